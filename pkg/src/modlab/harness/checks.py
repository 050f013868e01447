"""Named invariant checks run by ``verify``.

Each check returns a :class:`CheckResult`.  Tolerances are multiplied by
``tol_scale``; the one lower-bound check (remainder ablation) divides by it.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from ..characteristics import anchor_lattice, flow_jacobian_dets, yajima_integrals
from ..grid import Field, UniformGrid
from ..potentials import PotentialModel, check_assumption
from ..propagator import (SCHEMES, free_propagate, magnetic_propagate, policy_dt,
                          relative_l2_difference, richardson_order)
from ..transport import node_lattice, transport_leading, transport_residual
from ..wavepacket import invert, mod_norm, wpt, wpt_at
from ..windows import WindowSpec, evolve_window, make_window
from .io import p_label
from .scenario import Scenario, ScenarioResult, constant_report, gaussian_packet, run_scenario

log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    observed: object
    tolerance: object
    detail: str = ""
    seconds: float = 0.0

    def as_dict(self) -> dict:
        d = {"name": self.name, "pass": bool(self.passed), "observed": self.observed,
             "tolerance": self.tolerance}
        if self.detail:
            d["detail"] = self.detail
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: observed={_fmt(self.observed)} tolerance={_fmt(self.tolerance)}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, dict):
        keys = [p_label(k) if isinstance(k, float) else k for k in v]
        return "{" + ", ".join(f"{k}={_fmt(x)}" for k, x in zip(keys, v.values())) + "}"
    return str(v)


def catalog(n: int = 1) -> dict:
    """Representative model of every potential kind."""
    eye = tuple(np.eye(n).reshape(-1))
    return {
        "zero": PotentialModel("zero", n),
        "constant": PotentialModel("constant", n, c=(1.0,) * n),
        "linear": PotentialModel("linear", n, A=eye, c0=0.2, rho=0.5),
        "sublinear": sublinear_model(n),
    }


def sublinear_model(n: int = 1, c0: float = 0.2) -> PotentialModel:
    return PotentialModel("sublinear", n, c0=c0, eps=0.3, omega=2.0, rho=0.5)


def _step(grid, m, scheme, T, dt=0.01):
    return min(dt, policy_dt(grid, m, scheme, 0.0, T))


# individual checks ----------------------------------------------------------

def check_inversion(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 1e-8 * tol_scale
    worst = 0.0
    fields = s.initial_data()
    for sigma in (1.0, 2.0):
        for lam in (1.0, 4.0):
            phi = make_window(WindowSpec("gaussian", sigma, lam), s.grid)
            for f in fields:
                worst = max(worst, relative_l2_difference(invert(wpt(f, phi), phi), f))
    return CheckResult("inversion", worst < tol, worst, tol)


def check_m22(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 1e-8 * tol_scale
    phi = make_window(s.window, s.grid)
    worst = 0.0
    for f in s.initial_data():
        target = phi.l2_norm * f.l2_norm
        worst = max(worst, abs(mod_norm(wpt(f, phi), 2, 2).value - target) / target)
    return CheckResult("m22_identity", worst < tol, worst, tol)


def check_conservation(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 1e-6 * tol_scale
    u0 = s.initial_data()[0]
    drift = {}
    for kind, m in catalog(s.grid.n).items():
        for scheme in SCHEMES:
            run = magnetic_propagate(u0, m, 1.0, _step(s.grid, m, scheme, 1.0), scheme,
                                     output_times=[0.25, 0.5, 0.75, 1.0])
            drift[f"{kind}/{scheme}"] = run.max_drift()
    worst = max(drift.values())
    return CheckResult("l2_conservation", worst < tol, worst, tol,
                       f"worst case {max(drift, key=drift.get)}")


def check_scheme_agreement(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 1e-5 * tol_scale
    m = sublinear_model(s.grid.n)
    u0 = s.initial_data()[0]
    T = 0.5
    a = magnetic_propagate(u0, m, T, _step(s.grid, m, "strang-split", T, 5e-3), "strang-split").final
    b = magnetic_propagate(u0, m, T, _step(s.grid, m, "lines-rk4", T), "lines-rk4").final
    diff = relative_l2_difference(a, b)
    return CheckResult("scheme_agreement", diff < tol, diff, tol)


def check_richardson(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    m = sublinear_model(s.grid.n)
    u0 = s.initial_data()[0]
    T = 0.5
    strang = richardson_order(m, u0, T, 0.04, "strang-split")
    rk4 = richardson_order(m, u0, T, policy_dt(s.grid, m, "lines-rk4", 0.0, T), "lines-rk4")
    band = {"strang-split": 0.2 * tol_scale, "lines-rk4": 0.4 * tol_scale}
    ok = abs(strang - 2) <= band["strang-split"] and abs(rk4 - 4) <= band["lines-rk4"]
    return CheckResult("richardson_order", ok, {"strang-split": strang, "lines-rk4": rk4},
                       {"strang-split": f"2+-{band['strang-split']:g}",
                        "lines-rk4": f"4+-{band['lines-rk4']:g}"})


def check_jacobian(s: Scenario, tol_scale=1.0, seed=0, **_) -> CheckResult:
    tol = 1e-5 * tol_scale
    n = s.grid.n
    rng = np.random.default_rng(seed)
    X = rng.uniform(-5, 5, (100, n))
    XI = rng.uniform(-3, 3, (100, n))
    dev = {}
    for kind, m in catalog(n).items():
        dev[kind] = float(np.max(np.abs(flow_jacobian_dets(m, 0.0, X, XI, 1.0) - 1)))
    worst = max(dev.values())
    return CheckResult("unit_jacobian", worst < tol, worst, tol,
                       f"worst kind {max(dev, key=dev.get)}")


def yajima_table(m: PotentialModel, L: float, delta=0.5, horizons=(0.25, 0.5, 0.75, 1.0),
                 xi_max=50.0, nx=21, nxi=21, dt=1e-3) -> dict:
    """Lattice sup of the integral at each horizon, one pass per horizon."""
    X, XI = anchor_lattice(m.n, L, xi_max, nx, nxi)
    return {T: float(np.max(yajima_integrals(m, delta, T, 0.0, X, XI, dt))) for T in horizons}


def check_yajima(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 0.10 * tol_scale
    m = s.potential if s.potential.kind == "sublinear" else sublinear_model(s.grid.n)
    sup = yajima_table(m, s.grid.L, horizons=(0.75, 1.0))
    r75, r1 = sup[0.75] / 1.75, sup[1.0] / 2.0
    change = (r1 - r75) / r75
    wide = yajima_table(m, s.grid.L, horizons=(1.0,), xi_max=100.0)[1.0]
    ok = abs(change) < tol and math.isfinite(wide)
    return CheckResult("yajima_bound", ok, {"relative_change": change, "sup_xi100": wide}, tol,
                       f"sup/(1+T): {r75:.4g} at T=0.75, {r1:.4g} at T=1")


def check_transport_exactness(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 1e-6 * tol_scale
    g = s.grid
    u0 = s.initial_data()[0]
    phi0 = make_window(s.window, g)
    t = 0.5
    xs, xis = node_lattice(g, (-8, 8), (-3, 3), 4, 4)
    errs = {}
    for kind in ("zero", "constant"):
        m = catalog(1)[kind]
        ut = magnetic_propagate(u0, m, t, _step(g, m, "strang-split", t, 1e-3), "strang-split").final
        W = wpt(ut, evolve_window(phi0, t)).values
        lead = transport_leading(u0, phi0, m, t, xs, xis).values
        idx = np.ix_([g.index_of(x) for x in xs], [g.xi_index_of(k) for k in xis])
        errs[kind] = float(np.nanmax(np.abs(lead - W[idx])))
    worst = max(errs.values())
    return CheckResult("transport_exactness", worst < tol, worst, tol)


def ablation_ratio(g: UniformGrid, phi0: Field, m: PotentialModel, t: float = 0.25,
                   kernel: str = "taylor", snapshot_dt: float = 1e-3) -> float:
    """Median residual with the right side zeroed over the median with remainders."""
    u0 = gaussian_packet(g, 0.5, 1.0, 1.0)
    dt = min(1e-3, policy_dt(g, m, "lines-rk4", 0.0, t + snapshot_dt))
    run = magnetic_propagate(u0, m, t + snapshot_dt, dt, "lines-rk4",
                             output_times=[t - snapshot_dt, t, t + snapshot_dt])
    xs, xis = node_lattice(g, (-4, 5), (-1.5, 3.5), 2, 4)
    samples = transport_residual(run, phi0, m, t, xs, xis, kernel=kernel, with_leading=False)
    w = np.array([abs(sm.w) for sm in samples])
    keep = w >= 0.05 * w.max()
    full = np.median([sm.residual for sm, k in zip(samples, keep) if k])
    bare = np.median([sm.residual_without_rhs for sm, k in zip(samples, keep) if k])
    return float(bare / full)


def check_ablation(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    need = 5.0 / tol_scale
    phi0 = make_window(s.window, s.grid)
    ratio = ablation_ratio(s.grid, phi0, sublinear_model(1))
    return CheckResult("remainder_ablation", ratio >= need, ratio, f">= {need:g}")


def check_free_preservation(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    tol = 1e-6 * tol_scale
    g = s.grid
    phi0 = make_window(s.window, g)
    T = 1.0
    phiT = evolve_window(phi0, T)
    rng = np.random.default_rng(1)
    point_err, worst = 0.0, 0.0
    for u0 in s.initial_data()[:3]:
        uT = free_propagate(u0, T)
        F0, FT = wpt(u0, phi0), wpt(uT, phiT)
        # displacement identity at random nodes, oracle: direct transform of the pair
        flat = rng.choice(FT.values.size, 64, replace=False)
        ij = np.unravel_index(flat, FT.values.shape)
        x = np.stack([g.x[ij[k]] for k in range(g.n)], axis=-1)
        xi = np.stack([g.xi[ij[g.n + k]] for k in range(g.n)], axis=-1)
        shifted = wpt_at(u0, phi0, x - T * xi, xi) * np.exp(-0.5j * T * np.sum(xi ** 2, axis=-1))
        point_err = max(point_err, float(np.max(np.abs(FT.values[ij] - shifted))))
        for p in (1, 2, math.inf):
            r = mod_norm(FT, p, p).value / mod_norm(F0, p, p).value
            worst = max(worst, abs(r - 1))
    ok = worst < tol and point_err < tol
    return CheckResult("free_norm_preservation", ok,
                       {"ratio_deviation": worst, "pointwise": point_err}, tol)


def check_assumption_of(s: Scenario, tol_scale=1.0, **_) -> CheckResult:
    rep = check_assumption(s.potential, box=(max(s.T, 1.0), 20.0), rel_tol=0.05 * tol_scale)
    growth = max(abs(rep.growth(a)) for a in rep.sup)
    detail = "; ".join(f"alpha={a}: {msg}" for a, msg in rep.failures)
    return CheckResult("assumption_check", rep.passed, growth, 0.05 * tol_scale,
                       detail or f"declared rho={rep.rho:g}")


def _constants(result: ScenarioResult, cap: float) -> dict:
    rep = constant_report([result.series], cap)[result.scenario.name]
    return {p: v["C_T"] for p, v in rep.items()}


def check_theorem_constant(s: Scenario, tol_scale=1.0, result=None, refined=None, **_) -> CheckResult:
    result = result or run_scenario(s)
    if result.failures:
        return CheckResult("theorem_constant", False, None, s.cap,
                           f"scenario run failed: {result.failures[0]}")
    base = _constants(result, s.cap)
    observed = {"C_T": base}
    ok = all(math.isfinite(v) and v < s.cap for v in base.values())
    tol = {"cap": s.cap}
    if 2.0 in base:
        tol["p2"] = 1 + 1e-6 * tol_scale
        ok &= base[2.0] <= tol["p2"]
    if s.refine_N:
        refined = refined or run_scenario(s.refined())
        if refined.failures:
            return CheckResult("theorem_constant", False, None, s.cap,
                               f"refined run failed: {refined.failures[0]}")
        fine = _constants(refined, s.cap)
        change = max(abs(fine[p] - base[p]) / base[p] for p in base)
        observed["refinement_change"] = change
        tol["refinement"] = s.refine_tol * tol_scale
        ok &= change < tol["refinement"]
    return CheckResult("theorem_constant", bool(ok), observed, tol)


def check_window_equivalence(s: Scenario, tol_scale=1.0, result=None, **_) -> CheckResult:
    bound = 10.0 * tol_scale
    result = result or run_scenario(s)
    other_sigma = 2.0 if s.window.sigma != 2.0 else 1.0
    other = run_scenario(replace(s, window=replace(s.window, sigma=other_sigma)))
    a, b = _constants(result, s.cap), _constants(other, s.cap)
    factor = max(max(a[p] / b[p], b[p] / a[p]) for p in a)
    return CheckResult("window_equivalence", factor < bound, factor, bound,
                       f"sigma={s.window.sigma:g} vs sigma={other_sigma:g}")


CHECKS = {
    "inversion": check_inversion,
    "m22_identity": check_m22,
    "l2_conservation": check_conservation,
    "scheme_agreement": check_scheme_agreement,
    "richardson_order": check_richardson,
    "unit_jacobian": check_jacobian,
    "yajima_bound": check_yajima,
    "transport_exactness": check_transport_exactness,
    "remainder_ablation": check_ablation,
    "theorem_constant": check_theorem_constant,
    "free_norm_preservation": check_free_preservation,
    "assumption_check": check_assumption_of,
    "window_equivalence": check_window_equivalence,
}
ONE_DIMENSIONAL = ("transport_exactness", "remainder_ablation", "yajima_bound")


def default_checks(s: Scenario) -> list:
    names = list(CHECKS)
    if s.grid.n != 1:
        names = [k for k in names if k not in ONE_DIMENSIONAL]
    return names


def run_checks(s: Scenario, names=None, tol_scale: float = 1.0, seed: int = 0,
               result: ScenarioResult | None = None) -> list:
    """Run the named checks; an exception inside a check marks it failed."""
    names = default_checks(s) if names is None else list(names)
    unknown = [k for k in names if k not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks {unknown}")
    out = []
    for name in names:
        start = time.perf_counter()
        try:
            res = CHECKS[name](s, tol_scale=tol_scale, seed=seed, result=result)
        except Exception as exc:  # a crashing check is a failing check
            log.exception("check %s raised", name)
            res = CheckResult(name, False, None, None, f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        log.info("%s (%.1fs)", res.line(), res.seconds)
        out.append(res)
    return out
