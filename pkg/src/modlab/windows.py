"""Basic wave packets: construction, free evolution, dilation and moment weights."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, UniformGrid, apply_multiplier

LAMBDA_DIAL = (1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "gaussian"  # gaussian | hermite1 | custom
    sigma: float = 1.0
    lam: float = 1.0
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "hermite1", "custom"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind != "custom" and not self.sigma > 0:
            raise ValueError("window width must be positive")
        if not self.lam >= 1:
            raise ValueError("dilation parameter must be >= 1")
        if self.kind == "custom" and self.samples is None:
            raise ValueError("custom window needs samples")


def make_window(spec: WindowSpec, grid: UniformGrid) -> Field:
    """Sample the window described by ``spec`` on ``grid`` (time tag 0).

    The dilation ``phi_lam(x) = lam^{n/2} phi(lam x)`` is applied for the
    analytic kinds; custom samples are taken as given.
    """
    if spec.kind == "custom":
        vals = np.asarray(spec.samples, dtype=complex).reshape(grid.shape)
    else:
        X = grid.mesh() * spec.lam
        r2 = np.sum(X ** 2, axis=-1)
        vals = spec.lam ** (grid.n / 2) * np.exp(-r2 / (2 * spec.sigma ** 2))
        if spec.kind == "hermite1":
            vals = vals * X[..., 0] / spec.sigma
    phi = Field(grid, vals, 0.0)
    if phi.l2_norm == 0:
        raise ValueError("window samples are identically zero")
    return phi


def gaussian_window(grid: UniformGrid, sigma: float = 1.0, lam: float = 1.0) -> Field:
    return make_window(WindowSpec("gaussian", sigma, lam), grid)


def free_symbol(grid: UniformGrid, t: float) -> np.ndarray:
    """Multiplier ``exp(-i t |xi|^2 / 2)`` of ``exp(i t Laplacian / 2)``."""
    return np.exp(-0.5j * t * grid.xi_squared)


def evolve_window(phi0: Field, t: float) -> Field:
    """``phi(t) = exp(i t Laplacian / 2) phi0`` by the exact Fourier multiplier."""
    if t == 0:
        return phi0
    vals = apply_multiplier(phi0.values, phi0.grid, free_symbol(phi0.grid, t))
    return Field(phi0.grid, vals, phi0.time_tag + t)


def moment_window(phi: Field, k: int, l: int) -> Field:
    """``y -> y_k y_l phi(y)`` with zero-based axes ``k`` and ``l``."""
    n = phi.grid.n
    if not (0 <= k < n and 0 <= l < n):
        raise ValueError(f"axes ({k}, {l}) out of range for n={n}")
    Y = phi.grid.mesh()
    return phi.with_values(Y[..., k] * Y[..., l] * phi.values)
