"""Hamiltonian characteristics of ``H = |xi - a(t, x)|^2 / 2``.

Trajectories solve ``x' = grad_xi H``, ``xi' = -grad_x H`` with a fixed-step
classical RK4 scheme, forward or backward from an anchor ``(t, x, xi)``.
The action phase ``int_t^s h`` is accumulated afterwards by Simpson's rule
along the stored states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .potentials import PotentialModel, grad_hamiltonian, h_symbol, japanese

MAX_STEPS = 10_000_000


@dataclass(frozen=True, eq=False)
class Trajectory:
    model: PotentialModel
    t: float
    x: np.ndarray
    xi: np.ndarray
    s: np.ndarray       # (M+1,) time nodes, s[0] == t
    X: np.ndarray       # (M+1, n)
    XI: np.ndarray      # (M+1, n)
    phase: np.ndarray   # (M+1,) complex, int_t^{s_k} h

    @property
    def dt(self) -> float:
        return float(self.s[1] - self.s[0]) if len(self.s) > 1 else 0.0

    @property
    def end(self):
        return self.X[-1], self.XI[-1]


def _steps(span: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    M = math.ceil(abs(span) / dt - 1e-9)
    if M > MAX_STEPS:
        raise OverflowError(f"{M} steps exceed the limit of {MAX_STEPS}")
    if M == 0:
        return 0
    return max(2, M + (M % 2))  # even, for Simpson


def _rhs(m: PotentialModel, s: float, X, XI):
    gx, gxi = grad_hamiltonian(m, s, X, XI)
    return gxi, -gx


def flow_batch(m: PotentialModel, t: float, X0, XI0, s_target: float, dt: float,
               keep_path: bool = False):
    """RK4 flow of a batch of anchors ``X0, XI0`` (shape ``(B, n)``) from ``t`` to ``s_target``.

    Returns ``(s, X, XI)``; with ``keep_path`` the state arrays carry a leading
    time axis of length ``M + 1``.
    """
    X = np.array(X0, dtype=float)
    XI = np.array(XI0, dtype=float)
    M = _steps(s_target - t, dt)
    s = np.linspace(t, s_target, M + 1) if M else np.array([t])
    step = (s_target - t) / M if M else 0.0
    path_x, path_xi = ([X.copy()], [XI.copy()]) if keep_path else (None, None)
    for k in range(M):
        sk = s[k]
        k1x, k1p = _rhs(m, sk, X, XI)
        k2x, k2p = _rhs(m, sk + step / 2, X + step / 2 * k1x, XI + step / 2 * k1p)
        k3x, k3p = _rhs(m, sk + step / 2, X + step / 2 * k2x, XI + step / 2 * k2p)
        k4x, k4p = _rhs(m, sk + step, X + step * k3x, XI + step * k3p)
        X = X + step / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        XI = XI + step / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(XI))):
            raise FloatingPointError(f"non-finite characteristic state at s={s[k + 1]:.6g}")
        if keep_path:
            path_x.append(X)
            path_xi.append(XI)
    if keep_path:
        return s, np.stack(path_x), np.stack(path_xi)
    return s, X, XI


def _phase(m: PotentialModel, s, X, XI) -> np.ndarray:
    """Cumulative ``int_{s_0}^{s_k} h`` along a path with a leading time axis."""
    hv = np.stack([h_symbol(m, sk, X[k], XI[k]) for k, sk in enumerate(s)])
    if len(s) == 1:
        return np.zeros_like(hv, dtype=complex)
    zero = np.zeros((1,) + hv.shape[1:], dtype=complex)
    step = s[1] - s[0]
    cum = np.sign(step) * (cumulative_simpson(hv.real, dx=abs(step), axis=0)
                           + 1j * cumulative_simpson(hv.imag, dx=abs(step), axis=0))
    return np.concatenate([zero, cum], axis=0)


def solve_flow(m: PotentialModel, t: float, x, xi, s_target: float, dt: float = 1e-3) -> Trajectory:
    x = np.asarray(x, dtype=float).reshape(m.n)
    xi = np.asarray(xi, dtype=float).reshape(m.n)
    s, X, XI = flow_batch(m, t, x[None], xi[None], s_target, dt, keep_path=True)
    phase = _phase(m, s, X, XI)[:, 0]
    return Trajectory(m, float(t), x, xi, s, X[:, 0], XI[:, 0], phase)


def backward_endpoints(m: PotentialModel, t: float, X, XI, s_target: float = 0.0, dt: float = 1e-3):
    """Endpoints and phase ``int_t^{s_target} h`` for a batch of anchors."""
    s, PX, PXI = flow_batch(m, t, X, XI, s_target, dt, keep_path=True)
    phase = _phase(m, s, PX, PXI)[-1]
    return PX[-1], PXI[-1], phase


def flow_jacobian_det(m: PotentialModel, t: float, x, xi, s: float, eps: float = 1e-4,
                      dt: float = 1e-3) -> float:
    """Determinant of the central-difference Jacobian of ``(x, xi) -> (x(s), xi(s))``."""
    if not 1e-6 <= eps <= 1e-3:
        raise ValueError("eps must lie in [1e-6, 1e-3]")
    return float(flow_jacobian_dets(m, t, np.reshape(x, (1, -1)), np.reshape(xi, (1, -1)), s, eps, dt)[0])


def flow_jacobian_dets(m: PotentialModel, t: float, X, XI, s: float, eps: float = 1e-4,
                       dt: float = 1e-3) -> np.ndarray:
    """Batched :func:`flow_jacobian_det` over anchors of shape ``(B, n)``."""
    n = m.n
    X = np.asarray(X, dtype=float).reshape(-1, n)
    XI = np.asarray(XI, dtype=float).reshape(-1, n)
    B = len(X)
    Z = np.concatenate([X, XI], axis=1)
    E = np.eye(2 * n) * eps
    Zp = (Z[:, None, :] + E[None]).reshape(-1, 2 * n)
    Zm = (Z[:, None, :] - E[None]).reshape(-1, 2 * n)
    Zall = np.concatenate([Zp, Zm])
    _, FX, FXI = flow_batch(m, t, Zall[:, :n], Zall[:, n:], s, dt)
    F = np.concatenate([FX, FXI], axis=1)
    Fp, Fm = F[: B * 2 * n], F[B * 2 * n:]
    J = ((Fp - Fm) / (2 * eps)).reshape(B, 2 * n, 2 * n)  # [b, column, row]
    return np.linalg.det(np.swapaxes(J, 1, 2))


def _yajima_path(m, t, X, XI, T, dt):
    if t != 0.0:
        _, X, XI = flow_batch(m, t, X, XI, 0.0, dt)
    return flow_batch(m, 0.0, X, XI, T, dt, keep_path=True)


def yajima_integrals(m: PotentialModel, delta: float, T: float, t: float, X, XI,
                     dt: float = 1e-3) -> np.ndarray:
    """``int_0^T <x(tau)>^{-1-delta} |xi(tau)| dtau`` for a batch of anchors."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not 0 < T <= 1:
        raise ValueError("T must lie in (0, 1]")
    X = np.asarray(X, dtype=float).reshape(-1, m.n)
    XI = np.asarray(XI, dtype=float).reshape(-1, m.n)
    s, PX, PXI = _yajima_path(m, float(t), X, XI, T, dt)
    integrand = japanese(PX) ** (-1 - delta) * np.linalg.norm(PXI, axis=-1)
    return simpson(integrand, dx=s[1] - s[0], axis=0)


def yajima_integral(m: PotentialModel, delta: float, T: float, t: float, x, xi,
                    dt: float = 1e-3) -> float:
    return float(yajima_integrals(m, delta, T, t, np.reshape(x, (1, -1)), np.reshape(xi, (1, -1)), dt)[0])


def anchor_lattice(n: int, x_max: float, xi_max: float, nx: int = 21, nxi: int = 21):
    """Tensor lattice of anchors in ``[-x_max, x_max]^n x [-xi_max, xi_max]^n``."""
    xs = np.linspace(-x_max, x_max, nx)
    xis = np.linspace(-xi_max, xi_max, nxi)
    grids = np.meshgrid(*([xs] * n + [xis] * n), indexing="ij")
    Z = np.stack(grids, axis=-1).reshape(-1, 2 * n)
    return Z[:, :n], Z[:, n:]


def yajima_sup(m: PotentialModel, delta: float, T: float, x_max: float, xi_max: float,
               nx: int = 21, nxi: int = 21, t: float = 0.0, dt: float = 1e-3) -> float:
    X, XI = anchor_lattice(m.n, x_max, xi_max, nx, nxi)
    return float(np.max(yajima_integrals(m, delta, T, t, X, XI, dt)))
