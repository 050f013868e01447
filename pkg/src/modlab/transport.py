"""Phase-space side of the magnetic equation (one space dimension for remainders).

With the evolved window ``phi(t) = exp(i t Lap / 2) phi0`` the transform
``W(t) = W_{phi(t)} u(t)`` obeys

    (i d_t + i grad_xi H . grad_x - i grad_x H . grad_xi + h) W = -(R1 + R2 + R3) u

where the remainders are Taylor-remainder integrals.  Along the
characteristics this integrates to ``W(t) = exp(i int_0^t h) W_{phi0} u0(x(0),
xi(0)) + (remainder integral)``; the first piece is :func:`transport_leading`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .characteristics import backward_endpoints
from .grid import Field, UniformGrid, forward_array, gradient
from .potentials import PotentialModel, grad_hamiltonian, h_symbol
from .propagator import EvolutionRun
from .wavepacket import shifted_windows, wpt, wpt_at
from .windows import evolve_window

KERNELS = ("displayed", "taylor")


@dataclass(frozen=True, eq=False)
class LatticeField:
    """Complex values on a tensor lattice ``x_nodes x xi_nodes``."""

    x: np.ndarray
    xi: np.ndarray
    values: np.ndarray     # (len(x), len(xi))
    outside: np.ndarray    # bool mask: backward endpoint left the sampled box


@dataclass(frozen=True)
class TransportSample:
    x: float
    xi: float
    t: float
    w: complex          # solver-side W_{phi(t)} u(t)
    leading: complex    # characteristic transport of W_{phi0} u0
    r1: complex
    r2: complex
    r3: complex
    lhs: complex        # transport operator applied to W
    residual: float     # |lhs - Ru|, Ru = -(r1 + r2 + r3)

    @property
    def rhs(self) -> complex:
        return -(self.r1 + self.r2 + self.r3)

    @property
    def residual_without_rhs(self) -> float:
        return abs(self.lhs)


def _require_1d(grid: UniformGrid):
    if grid.n != 1:
        raise ValueError("remainder operators are implemented for n = 1 only")


# leading term ----------------------------------------------------------------

def transport_leading(u0: Field, phi0: Field, m: PotentialModel, t: float, x_nodes, xi_nodes,
                      dt: float = 1e-3, interp: str = "direct") -> LatticeField:
    """Characteristic transport of ``W_{phi0} u0`` to time ``t`` on a lattice.

    Each anchor ``(x, xi)`` is flowed back to ``s = 0``; the transform is read
    at the endpoint and multiplied by ``exp(-i int_t^0 h ds)``.  ``interp``
    chooses between direct evaluation of the transform at the endpoint
    (``"direct"``) and bilinear interpolation of the dense array
    (``"bilinear"``).
    """
    g = u0.grid
    x_nodes = np.asarray(x_nodes, dtype=float)
    xi_nodes = np.asarray(xi_nodes, dtype=float)
    XX, KK = np.meshgrid(x_nodes, xi_nodes, indexing="ij")
    if g.n == 1:
        X = XX.reshape(-1, 1)
        K = KK.reshape(-1, 1)
    else:
        raise ValueError("transport_leading lattices are one-dimensional")
    X0, K0, phase = backward_endpoints(m, t, X, K, 0.0, dt)
    outside = ((X0[:, 0] < g.x[0]) | (X0[:, 0] > g.x[-1])
               | (K0[:, 0] < g.xi[0]) | (K0[:, 0] > g.xi[-1]))
    if interp == "direct":
        W0 = wpt_at(u0, phi0, X0, K0)
    elif interp == "bilinear":
        dense = wpt(u0, phi0).values
        pts = np.column_stack([np.clip(X0[:, 0], g.x[0], g.x[-1]), np.clip(K0[:, 0], g.xi[0], g.xi[-1])])
        re = RegularGridInterpolator((g.x, g.xi), dense.real)(pts)
        im = RegularGridInterpolator((g.x, g.xi), dense.imag)(pts)
        W0 = re + 1j * im
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    vals = np.exp(-1j * phase) * W0
    vals = np.where(outside, np.nan, vals).reshape(XX.shape)
    return LatticeField(x_nodes, xi_nodes, vals, outside.reshape(XX.shape))


# remainders ------------------------------------------------------------------

def _theta_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _offsets(grid: UniformGrid, x_idx: np.ndarray) -> np.ndarray:
    """Periodic ``y_j - x_i`` for the selected rows, in ``[-L, L)``."""
    N = grid.N
    j = np.arange(N)
    k = (j[None, :] - x_idx[:, None] + N // 2) % N
    return grid.x[k]


def _theta_integrals(m: PotentialModel, t: float, x: np.ndarray, d: np.ndarray, order: int,
                     kernel: str):
    """Return the theta-integrated derivative factors on the (row, y) array."""
    theta, w = _theta_rule(order)
    z = x[:, None, None] + theta[None, None, :] * d[:, :, None]
    pts = z[..., None]
    a = m.value(t, pts)[..., 0]
    a1 = m.jacobian(t, pts)[..., 0, 0]
    a2 = m.hessian(t, pts)[..., 0, 0, 0]
    sq2 = 2.0 * (a1 ** 2 + a * a2)  # (a^2)''
    taylor2 = w * (1.0 - theta)      # second-order remainder weight
    first = taylor2 if kernel == "displayed" else w
    return {
        "sq2": np.sum(sq2 * taylor2, axis=-1),
        "a2_R2": np.sum(a2 * first, axis=-1),
        "a1_R2": np.sum(a1 * first, axis=-1),
        "a2_R3": np.sum(a2 * taylor2, axis=-1),
    }


def _integrands(u_t: Field, phi_t: Field, m: PotentialModel, t: float, x_idx: np.ndarray,
                kernel: str, theta_order: int) -> dict:
    """y-integrands of the three remainders on the rows ``x_idx``.

    The explicit ``xi`` factor of ``R3`` is left out; callers apply it after
    the ``y`` integration.
    """
    g = u_t.grid
    _require_1d(g)
    if phi_t.grid != g:
        raise ValueError("signal and window live on different grids")
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel variant {kernel!r}")
    x = g.x[x_idx]
    d = _offsets(g, x_idx)
    S = shifted_windows(phi_t)[x_idx]                     # phi(y - x)
    dphi = gradient(phi_t.values, g)[..., 0]
    dS = dphi[(np.arange(g.N)[None, :] - x_idx[:, None] + g.N // 2) % g.N]
    I = _theta_integrals(m, t, x, d, theta_order, kernel)
    u = u_t.values
    K21 = 0.5j * I["a2_R2"] * d
    K22 = 1j * I["a1_R2"] * d
    return {
        "R1": -0.5 * np.conj(S) * I["sq2"] * d ** 2 * u,
        "R2": (K21 * np.conj(S) + K22 * np.conj(dS)) * u,
        "R3": np.conj(d ** 2 * S) * I["a2_R3"] * u,
    }


def remainder_rows(u_t: Field, phi_t: Field, m: PotentialModel, t: float, x_idx,
                   kernel: str = "taylor", theta_order: int = 16) -> dict:
    """``R1 u``, ``R2 u``, ``R3 u`` on the rows ``x_idx`` at every frequency node.

    Returns a dict of complex arrays of shape ``(len(x_idx), N)``.
    """
    g = u_t.grid
    x_idx = np.atleast_1d(np.asarray(x_idx, dtype=int))
    parts = _integrands(u_t, phi_t, m, t, x_idx, kernel, theta_order)
    out = {k: forward_array(v, g) for k, v in parts.items()}
    out["R3"] = out["R3"] * g.xi[None, :]
    return out


def remainder_apply(u_t: Field, phi_t: Field, m: PotentialModel, t: float, which: str,
                    x: float, xi: float, kernel: str = "taylor", theta_order: int = 16) -> complex:
    """One remainder term at ``(x, xi)``; ``x`` must be a spatial node, ``xi`` is free."""
    if which not in ("R1", "R2", "R3"):
        raise ValueError(f"unknown remainder {which!r}")
    g = u_t.grid
    _require_1d(g)
    i = g.index_of(x)
    integrand = _integrands(u_t, phi_t, m, t, np.array([i]), kernel, theta_order)[which][0]
    value = np.sum(integrand * np.exp(-1j * g.x * xi)) * g.h
    return complex(value * xi if which == "R3" else value)


# transport residual ------------------------------------------------------------

def _d4(A: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Fourth-order central difference (periodic wrap)."""
    r = lambda k: np.roll(A, -k, axis=axis)
    return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * step)


def transport_lhs(W_prev: np.ndarray, W: np.ndarray, W_next: np.ndarray, dt: float,
                  grid: UniformGrid, m: PotentialModel, t: float) -> np.ndarray:
    """``(i d_t + i grad_xi H d_x - i grad_x H d_xi + h) W`` on the dense 1D array."""
    XX, KK = np.meshgrid(grid.x, grid.xi, indexing="ij")
    X = XX[..., None]
    K = KK[..., None]
    gx, gxi = grad_hamiltonian(m, t, X, K)
    hv = h_symbol(m, t, X, K)
    Wt = (W_next - W_prev) / (2 * dt)
    Wx = _d4(W, grid.h, 0)
    Wk = _d4(W, grid.dxi, 1)
    return 1j * Wt + 1j * gxi[..., 0] * Wx - 1j * gx[..., 0] * Wk + hv * W


def transport_residual(run: EvolutionRun, phi0: Field, m: PotentialModel, t: float,
                       x_nodes, xi_nodes, kernel: str = "taylor", with_leading: bool = True,
                       flow_dt: float = 1e-3) -> list:
    """Residual of the phase-space transport equation on a node lattice."""
    g = run.grid
    _require_1d(g)
    times = np.asarray(run.times)
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-12 or k == 0 or k == len(times) - 1:
        raise ValueError("run needs snapshots at t and on both sides of it")
    dt_prev, dt_next = t - times[k - 1], times[k + 1] - t
    if abs(dt_prev - dt_next) > 1e-12 * max(1.0, t):
        raise ValueError("snapshots around t must be evenly spaced")
    Ws = []
    for s, snap in zip(times[k - 1:k + 2], run.snapshots[k - 1:k + 2]):
        Ws.append(wpt(snap, evolve_window(phi0, s)).values)
    lhs = transport_lhs(Ws[0], Ws[1], Ws[2], dt_next, g, m, t)

    xi_idx = np.array([g.xi_index_of(v) for v in np.atleast_1d(xi_nodes)])
    x_idx = np.array([g.index_of(v) for v in np.atleast_1d(x_nodes)])
    phi_t = evolve_window(phi0, t)
    R = remainder_rows(run.snapshots[k], phi_t, m, t, x_idx, kernel)
    lead = None
    if with_leading:
        lead = transport_leading(run.u0, phi0, m, t, g.x[x_idx], g.xi[xi_idx], flow_dt).values

    samples = []
    for a, i in enumerate(x_idx):
        for b, kk in enumerate(xi_idx):
            r1, r2, r3 = R["R1"][a, kk], R["R2"][a, kk], R["R3"][a, kk]
            L = lhs[i, kk]
            samples.append(TransportSample(
                float(g.x[i]), float(g.xi[kk]), float(t), complex(Ws[1][i, kk]),
                complex(lead[a, b]) if lead is not None else complex("nan"),
                complex(r1), complex(r2), complex(r3), complex(L),
                float(abs(L + r1 + r2 + r3))))
    return samples


def node_lattice(grid: UniformGrid, x_range, xi_range, x_stride: int = 1, xi_stride: int = 1):
    """Spatial and frequency nodes inside the given ranges, thinned by strides."""
    xs = grid.x[(grid.x >= x_range[0]) & (grid.x <= x_range[1])][::x_stride]
    xis = grid.xi[(grid.xi >= xi_range[0]) & (grid.xi <= xi_range[1])][::xi_stride]
    return xs, xis
