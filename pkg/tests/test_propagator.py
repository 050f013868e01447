import numpy as np
import pytest

from modlab.grid import Field
from modlab.potentials import PotentialModel
from modlab.propagator import (SCHEMES, StabilityError, free_propagate, l2_norm, magnetic_propagate,
                               policy_dt, relative_l2_difference, richardson_order)

from conftest import packet

SUB = PotentialModel("sublinear", 1, c0=0.2, eps=0.3, omega=2.0, rho=0.5)
CATALOG = [PotentialModel("zero"), PotentialModel("constant", c=(1.0,)),
           PotentialModel("linear", c0=0.2), SUB]


def test_l2_norm(grid):
    assert l2_norm(Field(grid, np.zeros(grid.N))) == 0
    g = Field(grid, np.exp(-grid.x ** 2 / 2))
    np.testing.assert_allclose(l2_norm(g), np.pi ** 0.25, atol=1e-10)
    np.testing.assert_allclose(l2_norm(g * 2), 2 * l2_norm(g))


def test_free_identity_and_group(gauss):
    assert free_propagate(gauss, 0.0) is gauss
    a = free_propagate(free_propagate(gauss, 0.3), 0.4)
    b = free_propagate(gauss, 0.7)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)
    assert b.time_tag == pytest.approx(0.7)


def test_free_closed_form(grid):
    u0 = Field(grid, np.exp(-grid.x ** 2 / 2))
    u1 = free_propagate(u0, 1.0)
    exact = np.exp(-grid.x ** 2 / (2 * (1 + 1j))) / np.sqrt(1 + 1j)
    assert np.max(np.abs(u1.values - exact)) < 1e-9


@pytest.mark.parametrize("scheme", SCHEMES)
def test_zero_kind_matches_free(gauss, grid, scheme):
    m = PotentialModel("zero")
    dt = min(5e-3, policy_dt(grid, m, scheme, 0, 0.5))
    run = magnetic_propagate(gauss, m, 0.5, dt, scheme)
    assert relative_l2_difference(run.final, free_propagate(gauss, 0.5)) < 1e-8


@pytest.mark.parametrize("m", CATALOG, ids=lambda m: m.kind)
@pytest.mark.parametrize("scheme", SCHEMES)
def test_conservation(gauss, grid, m, scheme):
    dt = min(0.01, policy_dt(grid, m, scheme, 0, 1))
    run = magnetic_propagate(gauss, m, 1.0, dt, scheme, output_times=[0.5, 1.0])
    assert run.max_drift() < 1e-6
    assert run.times == [0.5, 1.0]


def test_constant_gauge(grid, gauss):
    # u = e^{icx} v with v free from e^{-icx} u0
    c = 0.75
    m = PotentialModel("constant", c=(c,))
    run = magnetic_propagate(gauss, m, 0.5, 5e-3, "strang-split")
    v0 = gauss.with_values(np.exp(-1j * c * grid.x) * gauss.values)
    expected = np.exp(1j * c * grid.x) * free_propagate(v0, 0.5).values
    np.testing.assert_allclose(run.final.values, expected, atol=1e-10)


def test_scheme_agreement(grid, gauss):
    a = magnetic_propagate(gauss, SUB, 0.5, 5e-3, "strang-split").final
    b = magnetic_propagate(gauss, SUB, 0.5, policy_dt(grid, SUB, "lines-rk4", 0, 0.5), "lines-rk4").final
    assert relative_l2_difference(a, b) < 1e-5


def test_richardson_orders(grid, gauss):
    assert abs(richardson_order(SUB, gauss, 0.5, 0.04, "strang-split") - 2) < 0.2
    c = PotentialModel("constant", c=(1.0,))
    for m in (SUB, c):
        dt = policy_dt(grid, m, "lines-rk4", 0, 0.5)
        assert abs(richardson_order(m, gauss, 0.5, dt, "lines-rk4") - 4) < 0.4


def test_backward_and_outputs(grid, gauss):
    fwd = magnetic_propagate(gauss, SUB, 0.4, 5e-3, "strang-split").final
    back = magnetic_propagate(fwd, SUB, 0.0, 5e-3, "strang-split", output_times=[0.2, 0.0])
    assert back.times == [0.2, 0.0]
    assert relative_l2_difference(back.final, gauss) < 1e-5
    with pytest.raises(KeyError):
        back.at(0.3)
    np.testing.assert_array_equal(back.at(0.2).values, back.snapshots[0].values)


def test_argument_checks(grid, gauss):
    with pytest.raises(ValueError):
        magnetic_propagate(gauss, SUB, 1.0, 0.01, "euler")
    with pytest.raises(ValueError):
        magnetic_propagate(gauss, SUB, 1.0, 0.0)
    with pytest.raises(ValueError):
        magnetic_propagate(gauss, SUB, 1.0, 0.01, output_times=[0.5, 0.2])
    with pytest.raises(ValueError):
        magnetic_propagate(gauss, SUB, 1.0, 0.01, output_times=[1.5])
    with pytest.raises(ValueError):
        magnetic_propagate(gauss, PotentialModel("zero", 2), 1.0, 0.01)


def test_stability_policy(grid, gauss):
    with pytest.raises(StabilityError):
        magnetic_propagate(gauss, SUB, 1.0, 0.05, "lines-rk4")
    lin = PotentialModel("linear", c0=1.0)
    with pytest.raises(StabilityError):
        magnetic_propagate(gauss, lin, 1.0, 0.01, "strang-split")
    assert policy_dt(grid, PotentialModel("zero"), "strang-split") == np.inf
    with pytest.raises(ValueError):
        policy_dt(grid, SUB, "euler")


def test_two_dimensional(grid2):
    X = grid2.mesh()
    u0 = Field(grid2, np.exp(-np.sum(X ** 2, axis=-1) / 8 + 0.5j * X[..., 0]))
    m = PotentialModel("sublinear", 2, c0=0.2, rho=0.5)
    a = magnetic_propagate(u0, m, 0.5, 5e-3, "strang-split")
    b = magnetic_propagate(u0, m, 0.5, policy_dt(grid2, m, "lines-rk4", 0, 0.5), "lines-rk4")
    assert a.max_drift() < 1e-6 and b.max_drift() < 1e-6
    assert relative_l2_difference(a.final, b.final) < 1e-5
