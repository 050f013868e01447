"""Vector potential catalog, the growth-condition checker, and phase-space symbols.

Every model has closed-form first and second spatial derivatives.  Batched
evaluation takes points of shape ``(..., n)`` and returns ``(..., n)`` for
``a``, ``(..., n, n)`` for ``Da`` (``Da[..., j, k] = d_k a_j``) and
``(..., n, n, n)`` for the Hessians (``D2a[..., j, k, l] = d_k d_l a_j``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

KINDS = ("zero", "constant", "linear", "sublinear")


def japanese(x: np.ndarray) -> np.ndarray:
    """``<x> = (1 + |x|^2)^{1/2}`` over the last axis."""
    return np.sqrt(1.0 + np.sum(np.asarray(x) ** 2, axis=-1))


@dataclass(frozen=True)
class PotentialModel:
    """Real vector potential ``a(t, x)``.

    kinds:
      * ``zero``
      * ``constant``  -- ``a = c``
      * ``linear``    -- ``a = s(t) A x`` (comparison runs / negative control)
      * ``sublinear`` -- ``a = s(t) v <x>^rho``

    with ``s(t) = c0 (1 + eps sin(omega t))``.
    """

    kind: str = "zero"
    n: int = 1
    c: tuple = ()
    A: tuple = ()
    c0: float = 1.0
    eps: float = 0.0
    omega: float = 1.0
    rho: float = 0.5
    v: tuple = ()
    _c: np.ndarray = field(init=False, repr=False, compare=False)
    _A: np.ndarray = field(init=False, repr=False, compare=False)
    _v: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.n not in (1, 2):
            raise ValueError("potentials are defined for n in {1, 2}")
        n = self.n
        c = np.zeros(n) if len(self.c) == 0 else np.asarray(self.c, dtype=float).reshape(n)
        A = np.eye(n) if len(self.A) == 0 else np.asarray(self.A, dtype=float).reshape(n, n)
        v = np.ones(n) / np.sqrt(n) if len(self.v) == 0 else np.asarray(self.v, dtype=float).reshape(n)
        if self.kind == "sublinear" and not self.rho < 1:
            raise ValueError(f"sublinear potentials need rho < 1, got {self.rho}")
        if abs(self.eps) >= 1 and self.kind in ("linear", "sublinear"):
            raise ValueError("|eps| must be < 1")
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_A", A)
        object.__setattr__(self, "_v", v)

    # amplitude and its bound -------------------------------------------------
    def amplitude(self, t) -> np.ndarray:
        return self.c0 * (1.0 + self.eps * np.sin(self.omega * np.asarray(t, dtype=float)))

    def amplitude_bound(self) -> float:
        return abs(self.c0) * (1.0 + abs(self.eps))

    # closed forms ------------------------------------------------------------
    def value(self, t: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.broadcast_to(self._c, x.shape).copy()
        s = self.amplitude(t)
        if self.kind == "linear":
            return s * x @ self._A.T
        return s * japanese(x)[..., None] ** self.rho * self._v

    def jacobian(self, t: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.n
        shape = x.shape[:-1] + (n, n)
        if self.kind in ("zero", "constant"):
            return np.zeros(shape)
        s = self.amplitude(t)
        if self.kind == "linear":
            return np.broadcast_to(s * self._A, shape).copy()
        r = japanese(x)
        grad = self.rho * x * (r ** (self.rho - 2))[..., None]  # d_k <x>^rho
        return s * self._v[:, None] * grad[..., None, :]

    def hessian(self, t: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.n
        shape = x.shape[:-1] + (n, n, n)
        if self.kind != "sublinear":
            return np.zeros(shape)
        s = self.amplitude(t)
        rho = self.rho
        r = japanese(x)[..., None, None]
        eye = np.eye(n)
        xx = x[..., :, None] * x[..., None, :]
        H = rho * eye * r ** (rho - 2) + rho * (rho - 2) * xx * r ** (rho - 4)
        return s * self._v[:, None, None] * H[..., None, :, :]

    def divergence(self, t: float, x) -> np.ndarray:
        return np.trace(self.jacobian(t, x), axis1=-2, axis2=-1)

    def max_abs(self, X: np.ndarray, t0: float = 0.0, t1: float = 1.0) -> float:
        """``max |a|`` over the points ``X`` and 33 sample times in ``[t0, t1]``."""
        if self.kind == "zero":
            return 0.0
        return max(float(np.max(np.linalg.norm(self.value(t, X), axis=-1)))
                   for t in np.linspace(t0, t1, 33))


def eval_potential(m: PotentialModel, t: float, x, alpha) -> np.ndarray:
    """``d^alpha_x a(t, x)`` componentwise for a multi-index with ``|alpha| <= 2``."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != m.n or min(alpha) < 0:
        raise ValueError(f"multi-index {alpha} does not match n={m.n}")
    order = sum(alpha)
    x = np.asarray(x, dtype=float)
    if order == 0:
        return m.value(t, x)
    axes = [k for k, a in enumerate(alpha) for _ in range(a)]
    if order == 1:
        return m.jacobian(t, x)[..., :, axes[0]]
    if order == 2:
        return m.hessian(t, x)[..., :, axes[0], axes[1]]
    raise ValueError(f"derivatives of order {order} > 2 are not supported")


def multi_indices(n: int, max_order: int = 2):
    return [a for a in itertools.product(range(max_order + 1), repeat=n) if sum(a) <= max_order]


@dataclass
class AssumptionReport:
    rho: float
    box: tuple
    samples: int
    sup: dict          # alpha -> sup of |d^alpha a_j| / <x>^{rho - |alpha|}
    sup_doubled: dict  # same on the doubled box
    passed: bool
    failures: list

    def growth(self, alpha) -> float:
        a, b = self.sup[alpha], self.sup_doubled[alpha]
        return 0.0 if a == b else (b - a) / max(abs(a), 1e-300)


def _ratio_sup(m: PotentialModel, T: float, X: float, samples: int, rho: float) -> dict:
    ts = np.linspace(0.0, T, max(2, samples // 4 + 1))
    axis = np.linspace(-X, X, samples)
    pts = np.stack(np.meshgrid(*([axis] * m.n), indexing="ij"), axis=-1).reshape(-1, m.n)
    weight = japanese(pts)
    out = {}
    for alpha in multi_indices(m.n):
        worst = 0.0
        for t in ts:
            d = np.max(np.abs(eval_potential(m, t, pts, alpha)), axis=-1)
            worst = max(worst, float(np.max(d / weight ** (rho - sum(alpha)))))
        out[alpha] = worst
    return out


def check_assumption(m: PotentialModel, box=(1.0, 20.0), samples: int = 201,
                     rho: float | None = None, rel_tol: float = 0.05) -> AssumptionReport:
    """Sample the sub-linear growth bound over ``[0, T] x [-X, X]^n``.

    The model passes when every ratio is finite and its supremum moves by
    less than ``rel_tol`` when both the box and the lattice are doubled; a
    ratio that keeps growing with the box means no constant ``C_alpha``
    exists for the declared exponent.
    """
    T, X = box
    if T <= 0 or X <= 0 or samples < 2:
        raise ValueError("box and sample count must be positive")
    rho = m.rho if rho is None else rho
    sup = _ratio_sup(m, T, X, samples, rho)
    sup2 = _ratio_sup(m, T, 2 * X, 2 * samples - 1, rho)
    failures = []
    for alpha in sup:
        a, b = sup[alpha], sup2[alpha]
        if not (np.isfinite(a) and np.isfinite(b)):
            failures.append((alpha, "non-finite"))
        elif b > 0 and abs(b - a) > rel_tol * max(a, b):
            failures.append((alpha, f"sup grew from {a:.4g} to {b:.4g}"))
    return AssumptionReport(rho, (T, X), samples, sup, sup2, not failures, failures)


# phase-space symbols ---------------------------------------------------------

def hamiltonian(m: PotentialModel, t: float, x, xi) -> np.ndarray:
    """``H = |xi - a(t, x)|^2 / 2``."""
    d = np.asarray(xi, dtype=float) - m.value(t, x)
    return 0.5 * np.sum(d ** 2, axis=-1)


def grad_hamiltonian(m: PotentialModel, t: float, x, xi):
    """Return ``(grad_x H, grad_xi H)``."""
    d = np.asarray(xi, dtype=float) - m.value(t, x)
    Da = m.jacobian(t, x)
    gx = -np.einsum("...jk,...j->...k", Da, d)
    return gx, d


def h_symbol(m: PotentialModel, t: float, x, xi) -> np.ndarray:
    """``h = -H + grad_x H . x + (i/2) div a``."""
    x = np.asarray(x, dtype=float)
    gx, _ = grad_hamiltonian(m, t, x, xi)
    return (-hamiltonian(m, t, x, xi) + np.sum(gx * x, axis=-1)
            + 0.5j * m.divergence(t, x))
