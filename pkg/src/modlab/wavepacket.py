"""Wave packet transform, its adjoint, and modulation-space mixed norms.

``W_phi f(x, xi) = int conj(phi(y - x)) exp(-i y.xi) f(y) dy`` is sampled
densely on (spatial nodes) x (frequency nodes) of a single grid.  The first
``n`` axes of a phase-space array index ``x``, the last ``n`` index ``xi``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .grid import (Field, UniformGrid, forward_array, inverse_array, shift_samples,
                   spectral_tail_fraction)

log = logging.getLogger(__name__)

BAND_LIMIT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    grid: UniformGrid
    values: np.ndarray
    window_l2: float
    window: Field | None = None
    signal: Field | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape * 2:
            raise ValueError(f"phase-space array has shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("phase-space field contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def x_grid(self) -> UniformGrid:
        return self.grid

    @property
    def xi_grid(self) -> UniformGrid:
        return self.grid

    def __mul__(self, c):
        signal = None if self.signal is None else self.signal * c
        return PhaseSpaceField(self.grid, self.values * c, self.window_l2, self.window, signal)

    __rmul__ = __mul__


@dataclass(frozen=True)
class MixedNormReport:
    p: float
    q: float
    value: float
    N: int
    L: float
    n: int


def _shift_index(grid: UniformGrid) -> np.ndarray:
    # idx[i, j] is the node index of y_j - x_i (periodic)
    N = grid.N
    i = np.arange(N)
    return (i[None, :] - i[:, None] + N // 2) % N


def shifted_windows(phi: Field) -> np.ndarray:
    """Array ``S[x-node, y-node] = phi(y - x)`` over all node pairs."""
    g = phi.grid
    idx = _shift_index(g)
    if g.n == 1:
        return phi.values[idx]
    # S[i1, i2, j1, j2] = phi[idx[i1, j1], idx[i2, j2]]
    return phi.values[idx[:, None, :, None], idx[None, :, None, :]]


def _check_same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def _warn_band_limit(f: Field, what: str):
    tail = spectral_tail_fraction(f)
    if tail > BAND_LIMIT_TOL:
        log.warning("%s is not numerically band-limited (tail mass %.2e)", what, tail)


def wpt(f: Field, phi: Field) -> PhaseSpaceField:
    """Dense wave packet transform of ``f`` with window ``phi``."""
    _check_same_grid(f, phi)
    if phi.l2_norm == 0:
        raise ValueError("window must be nonzero")
    _warn_band_limit(f, "signal")
    g = f.grid
    G = np.conj(shifted_windows(phi)) * f.values
    return PhaseSpaceField(g, forward_array(G, g), phi.l2_norm, phi, f)


def iwpt(F: PhaseSpaceField, phi: Field) -> Field:
    """Adjoint transform ``W*_phi F(x) = iint phi(x - y) e^{i x.xi} F(y, xi) dy dbar-xi``."""
    if F.grid != phi.grid:
        raise ValueError("phase-space field and window live on different grids")
    g = phi.grid
    G = inverse_array(F.values, g)
    S = shifted_windows(phi)
    axes = tuple(range(g.n))
    return Field(g, np.sum(S * G, axis=axes) * g.x_weight)


def invert(F: PhaseSpaceField, phi: Field) -> Field:
    """Inversion formula ``f = W*_phi W_phi f / ||phi||^2``."""
    return iwpt(F, phi) * (1.0 / phi.l2_norm ** 2)


def wpt_at(f: Field, phi: Field, x, xi) -> np.ndarray:
    """Evaluate ``W_phi f`` at arbitrary phase-space points.

    Off-node shifts of the window use trigonometric interpolation, so on the
    nodes this agrees with :func:`wpt` to rounding.
    """
    _check_same_grid(f, phi)
    g = f.grid
    x = np.asarray(x, dtype=float).reshape(-1, g.n)
    xi = np.asarray(xi, dtype=float).reshape(-1, g.n)
    if len(x) != len(xi):
        raise ValueError("x and xi must hold the same number of points")
    out = np.empty(len(x), dtype=complex)
    Y = g.mesh().reshape(-1, g.n)
    fv = f.values.reshape(-1)
    chunk = 256
    for start in range(0, len(x), chunk):
        sl = slice(start, start + chunk)
        S = shift_samples(phi.values, g, x[sl]).reshape(-1, g.size)
        E = np.exp(-1j * (xi[sl] @ Y.T))
        out[sl] = np.sum(np.conj(S) * fv * E, axis=1) * g.x_weight
    return out


def _lp(a: np.ndarray, p: float, axes, weight: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(a, axis=axes)
    if p == 1:
        return np.sum(a, axis=axes) * weight
    return (np.sum(a ** p, axis=axes) * weight) ** (1.0 / p)


def _refined_sup(F: PhaseSpaceField, candidates: int = 3) -> float:
    """Sup of ``|W|`` over continuous (x, xi), refined from the best nodes."""
    g = F.grid
    A = np.abs(F.values)
    best = float(A.max())
    if F.window is None or F.signal is None or best == 0:
        return best
    n = g.n
    flat = np.argsort(A.reshape(-1))[::-1][:candidates]
    scale = np.array([g.h] * n + [g.dxi] * n)

    def neg(z):
        z = z * scale
        return -abs(wpt_at(F.signal, F.window, z[:n], z[n:])[0])

    for idx in flat:
        ij = np.unravel_index(idx, A.shape)
        z0 = np.array([g.x[k] for k in ij[:n]] + [g.xi[k] for k in ij[n:]]) / scale
        res = minimize(neg, z0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-15 * best, "maxiter": 2000})
        best = max(best, -float(res.fun))
    return best


def mod_norm(F: PhaseSpaceField, p: float, q: float, refine: bool = True) -> MixedNormReport:
    """Mixed norm ``|| ||F(x, xi)||_{L^p_x} ||_{L^q_xi}``.

    Finite exponents use the grid quadrature weights (``h^n`` in ``x`` and
    ``(dxi/2pi)^n`` in ``xi``); infinite exponents are maxima.  For
    ``p = q = inf`` the nodal maximum is refined to the continuous supremum
    when the transform still knows its signal and window.
    """
    for e in (p, q):
        if np.isnan(e) or e < 1:
            raise ValueError(f"exponent must lie in [1, inf], got {e}")
    g = F.grid
    A = np.abs(F.values)
    if np.isinf(p) and np.isinf(q) and refine:
        value = _refined_sup(F)
    else:
        xaxes = tuple(range(g.n))
        inner = _lp(A, p, xaxes, g.x_weight)
        value = float(_lp(inner, q, tuple(range(g.n)), g.xi_weight))
    return MixedNormReport(float(p), float(q), float(value), g.N, g.L, g.n)


def modulation_norm(f: Field, phi: Field, p: float, q: float | None = None, refine: bool = True) -> float:
    """Convenience wrapper: ``||f||_{M^{p,q}_phi}`` (``q`` defaults to ``p``)."""
    return mod_norm(wpt(f, phi), p, p if q is None else q, refine).value
