"""Desk-scale acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import time

import numpy as np
import pytest

from modlab.harness import config as C
from modlab.harness.checks import (CheckResult, check_ablation, check_conservation, check_free_preservation,
                                   check_inversion, check_jacobian, check_m22, check_richardson,
                                   check_scheme_agreement, check_theorem_constant,
                                   check_transport_exactness, check_window_equivalence, check_yajima)
from modlab.harness.scenario import constant_report, run_scenario, scenario_from_config
from modlab.potentials import PotentialModel, check_assumption

SUBLINEAR_AMPLITUDES = (0.1, 0.2, 0.4)
_START = time.perf_counter()


def desk(**kw):
    cfg = dict(C.DEFAULTS)
    cfg.update({k.replace("__", "."): str(v) for k, v in kw.items()})
    return scenario_from_config(cfg)


def report(capsys, number, *results):
    ok = all(r.passed for r in results)
    with capsys.disabled():
        for r in results:
            print(f"\n[criterion {number:2d}] {r.line()}  ({r.seconds:.1f}s)", end="")
    return ok


def timed(fn, *args, **kw) -> CheckResult:
    start = time.perf_counter()
    res = fn(*args, **kw)
    res.seconds = time.perf_counter() - start
    return res


@pytest.fixture(scope="module")
def free():
    return desk(name="free")


@pytest.fixture(scope="module")
def sublinear_runs():
    out = {}
    for c0 in SUBLINEAR_AMPLITUDES:
        s = desk(name=f"sublinear_c{c0:g}", potential__kind="sublinear", potential__c0=c0,
                 potential__eps=0.3, potential__omega=2)
        start = time.perf_counter()
        base, fine = run_scenario(s), run_scenario(s.refined())
        out[c0] = (s, base, fine, time.perf_counter() - start)
    return out


def test_c01_inversion(free, capsys):
    r = timed(check_inversion, free)
    ok = report(capsys, 1, r)
    assert ok and r.seconds < 30


def test_c02_m22_identity(free, capsys):
    assert report(capsys, 2, timed(check_m22, free))


def test_c03_l2_conservation(free, capsys):
    assert report(capsys, 3, timed(check_conservation, free))


def test_c04_scheme_cross_validation(free, capsys):
    assert report(capsys, 4, timed(check_scheme_agreement, free), timed(check_richardson, free))


def test_c05_unit_jacobian(free, capsys):
    assert report(capsys, 5, timed(check_jacobian, free))


def test_c06_yajima_bound(capsys):
    s = desk(potential__kind="sublinear", potential__c0=0.2, potential__eps=0.3, potential__omega=2)
    assert report(capsys, 6, timed(check_yajima, s))


def test_c07_transport_exactness(free, capsys):
    assert report(capsys, 7, timed(check_transport_exactness, free))


def test_c08_remainder_ablation(free, capsys):
    assert report(capsys, 8, timed(check_ablation, free))


def test_c09_theorem_constant(sublinear_runs, capsys):
    results, sup_curve = [], []
    for c0, (s, base, fine, seconds) in sublinear_runs.items():
        r = check_theorem_constant(s, result=base, refined=fine)
        r.name = f"theorem_constant[c0={c0:g}]"
        r.seconds = seconds
        results.append(r)
        sup_curve.append(constant_report([base.series])[s.name][np.inf]["C_T"])
    s, base, _, _ = sublinear_runs[0.2]
    eq = timed(check_window_equivalence, s, result=base)
    results.append(eq)
    ok = report(capsys, 9, *results)
    with capsys.disabled():
        print(f"\n[criterion  9] p=inf constants over c0={SUBLINEAR_AMPLITUDES}: "
              + ", ".join(f"{v:.6g}" for v in sup_curve), end="")
    assert ok
    assert np.all(np.diff(sup_curve) >= -1e-12)
    assert time.perf_counter() - _START < 600


def test_c10_free_norm_preservation(free, capsys):
    assert report(capsys, 10, timed(check_free_preservation, free))


def test_c11_assumption_negative_control(capsys):
    start = time.perf_counter()
    good = {c0: check_assumption(PotentialModel("sublinear", c0=c0, eps=0.3, omega=2, rho=0.5))
            for c0 in SUBLINEAR_AMPLITUDES}
    bad = check_assumption(PotentialModel("linear", c0=0.2, rho=0.5))
    diverges = any(a == (0,) for a, _ in bad.failures) and bad.growth((0,)) > 0.05
    passed = all(r.passed for r in good.values()) and not bad.passed and diverges
    r = CheckResult("assumption_negative_control", passed,
                    {"sublinear_pass": all(r.passed for r in good.values()),
                     "linear_alpha0_growth": bad.growth((0,))}, "linear fails, sublinear passes",
                    seconds=time.perf_counter() - start)
    assert report(capsys, 11, r)
