"""Uniform periodic grids and the Fourier pair used throughout the package.

Convention: ``f_hat(xi) = int exp(-i x.xi) f(x) dx`` (no normalisation) and
``f(x) = int exp(i x.xi) f_hat(xi) dxi / (2 pi)^n``.  Frequencies are stored
in increasing order; the FFT ordering never leaks out of this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _is_power_of_two(N: int) -> bool:
    return N > 0 and (N & (N - 1)) == 0


@dataclass(frozen=True)
class UniformGrid:
    """Periodic grid on ``[-L, L)^n`` with ``N`` nodes per axis."""

    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"unsupported dimension n={self.n}; expected 1 or 2")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half width must be positive, got L={self.L}")
        if int(self.N) != self.N or not _is_power_of_two(int(self.N)) or self.N < 16:
            raise ValueError(f"N must be a power of two >= 16, got N={self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N ** self.n

    @cached_property
    def x(self) -> np.ndarray:
        """Spatial nodes along one axis."""
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency nodes along one axis, increasing."""
        return self.dxi * np.arange(-self.N // 2, self.N // 2)

    @cached_property
    def _sign(self) -> np.ndarray:
        # (-1)^k for k = -N/2 .. N/2-1 (absorbs the offset x_0 = -L)
        k = np.arange(-self.N // 2, self.N // 2)
        return np.where(k % 2 == 0, 1.0, -1.0)

    def mesh(self) -> np.ndarray:
        """Coordinates of every node, shape ``grid.shape + (n,)``."""
        axes = np.meshgrid(*([self.x] * self.n), indexing="ij")
        return np.stack(axes, axis=-1)

    def freq_mesh(self) -> np.ndarray:
        axes = np.meshgrid(*([self.xi] * self.n), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """``|xi|^2`` on the frequency nodes."""
        return np.sum(self.freq_mesh() ** 2, axis=-1)

    @property
    def x_weight(self) -> float:
        return self.h ** self.n

    @property
    def xi_weight(self) -> float:
        """Quadrature weight of the d-bar measure, ``(dxi / 2 pi)^n``."""
        return (self.dxi / (2.0 * np.pi)) ** self.n

    def index_of(self, x: float, tol: float = 1e-9) -> int:
        """Index of the node at ``x``; raises if ``x`` is not a node."""
        j = int(round((x + self.L) / self.h))
        if not 0 <= j < self.N or abs(self.x[j] - x) > tol * max(1.0, self.h):
            raise ValueError(f"{x} is not a grid node")
        return j

    def xi_index_of(self, xi: float, tol: float = 1e-9) -> int:
        k = int(round(xi / self.dxi)) + self.N // 2
        if not 0 <= k < self.N or abs(self.xi[k] - xi) > tol * max(1.0, self.dxi):
            raise ValueError(f"{xi} is not a frequency node")
        return k


def make_grid(n: int, L: float, N: int) -> UniformGrid:
    return UniformGrid(n, L, N)


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of a complex function on a grid at time ``time_tag``.

    ``domain`` is ``"x"`` for spatial samples and ``"xi"`` for samples on the
    frequency nodes.  The array is copied and frozen on construction.
    """

    grid: UniformGrid
    values: np.ndarray
    time_tag: float = 0.0
    domain: str = "x"

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(f"field has {vals.size} samples, grid has {self.grid.size}")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("field contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.domain not in ("x", "xi"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @cached_property
    def l2_norm(self) -> float:
        w = self.grid.x_weight if self.domain == "x" else self.grid.xi_weight
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * w))

    def with_values(self, values, time_tag=None) -> "Field":
        return Field(self.grid, values, self.time_tag if time_tag is None else time_tag, self.domain)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def _axes(grid: UniformGrid):
    return tuple(range(-grid.n, 0))


def _signs(grid: UniformGrid) -> np.ndarray:
    s = grid._sign
    if grid.n == 1:
        return s
    return np.multiply.outer(s, s)


def forward_array(values: np.ndarray, grid: UniformGrid) -> np.ndarray:
    """Forward transform along the trailing ``n`` axes of ``values``."""
    ax = _axes(grid)
    F = np.fft.fftshift(np.fft.fftn(values, axes=ax), axes=ax)
    return F * _signs(grid) * grid.x_weight


def inverse_array(values: np.ndarray, grid: UniformGrid) -> np.ndarray:
    """Inverse of :func:`forward_array` along the trailing ``n`` axes."""
    ax = _axes(grid)
    G = np.fft.ifftshift(values * _signs(grid), axes=ax)
    return np.fft.ifftn(G, axes=ax) / grid.x_weight


def fourier_forward(f: Field) -> Field:
    if f.domain != "x":
        raise ValueError("fourier_forward expects spatial samples")
    return Field(f.grid, forward_array(f.values, f.grid), f.time_tag, "xi")


def fourier_inverse(F: Field) -> Field:
    if F.domain != "xi":
        raise ValueError("fourier_inverse expects frequency samples")
    return Field(F.grid, inverse_array(F.values, F.grid), F.time_tag, "x")


def apply_multiplier(values: np.ndarray, grid: UniformGrid, symbol: np.ndarray) -> np.ndarray:
    """Apply the Fourier multiplier ``symbol`` (sampled on frequency nodes)."""
    return inverse_array(forward_array(values, grid) * symbol, grid)


def gradient(values: np.ndarray, grid: UniformGrid) -> np.ndarray:
    """Spectral gradient; returns shape ``grid.shape + (n,)``."""
    F = forward_array(values, grid)
    xi = grid.xi.copy()
    xi[0] = 0.0  # Nyquist mode carries no odd derivative
    out = []
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.N
        out.append(inverse_array(F * (1j * xi).reshape(shape), grid))
    return np.stack(out, axis=-1)


def laplacian(values: np.ndarray, grid: UniformGrid) -> np.ndarray:
    return apply_multiplier(values, grid, -grid.xi_squared)


def shift_samples(values: np.ndarray, grid: UniformGrid, shifts: np.ndarray) -> np.ndarray:
    """Trigonometric-interpolation translates ``y -> g(y - s)`` for each shift.

    ``shifts`` has shape ``(B, n)`` (or ``(B,)`` in 1D); the result has shape
    ``(B,) + grid.shape``.
    """
    shifts = np.asarray(shifts, dtype=float).reshape(-1, grid.n)
    F = forward_array(values, grid)
    xi = grid.freq_mesh()
    phase = np.exp(-1j * np.tensordot(shifts, np.moveaxis(xi, -1, 0), axes=(1, 0)))
    return inverse_array(F[None] * phase, grid)


def boundary_mass_fraction(f: Field, width: float | None = None) -> float:
    """Mass within ``width`` (default 4h) of the periodic boundary, relative."""
    g = f.grid
    width = 4 * g.h if width is None else width
    near = np.abs(g.x) >= g.L - width
    mask = near
    if g.n == 2:
        mask = near[:, None] | near[None, :]
    total = np.sum(np.abs(f.values) ** 2)
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(f.values[mask]) ** 2) / total)


def spectral_tail_fraction(f: Field) -> float:
    """Spectral mass outside ``|xi| <= dxi N / 4`` on every axis, relative."""
    g = f.grid
    F = np.abs(forward_array(f.values, g)) ** 2
    outside = np.abs(g.xi) > g.dxi * g.N / 4
    mask = outside
    if g.n == 2:
        mask = outside[:, None] | outside[None, :]
    total = np.sum(F)
    if total == 0:
        return 0.0
    return float(np.sum(F[mask]) / total)
