import numpy as np
import pytest
from scipy.integrate import solve_ivp

from modlab.characteristics import (anchor_lattice, backward_endpoints, flow_batch, flow_jacobian_det,
                                    flow_jacobian_dets, solve_flow, yajima_integral, yajima_sup)
from modlab.potentials import PotentialModel, grad_hamiltonian, h_symbol, hamiltonian

ZERO = PotentialModel("zero")
CONST = PotentialModel("constant", c=(1.0,))
SUB = PotentialModel("sublinear", 1, c0=1.0, rho=0.5)


def test_free_flow_exact():
    tr = solve_flow(ZERO, 1.0, [0.0], [2.0], 0.0)
    np.testing.assert_allclose(tr.end[0], [-2.0], atol=1e-13)
    np.testing.assert_allclose(tr.end[1], [2.0], atol=1e-13)
    assert tr.s[0] == 1.0 and tr.dt < 0


def test_constant_flow_exact():
    tr = solve_flow(CONST, 0.0, [0.0], [2.0], 1.0)
    np.testing.assert_allclose(tr.end[0], [1.0], atol=1e-13)
    np.testing.assert_allclose(tr.end[1], [2.0], atol=1e-13)


def test_anchor_preserved():
    tr = solve_flow(SUB, 0.3, [1.2], [-0.4], 0.8)
    np.testing.assert_array_equal(tr.X[0], [1.2])
    np.testing.assert_array_equal(tr.XI[0], [-0.4])
    assert tr.phase[0] == 0


@pytest.mark.parametrize("m", [ZERO, CONST])
def test_energy_conservation_autonomous(m):
    tr = solve_flow(m, 0.0, [0.5], [1.5], 2.0)
    H = hamiltonian(m, 0, tr.X, tr.XI)
    assert np.max(np.abs(H - H[0])) < 1e-10


def test_self_convergence():
    a = solve_flow(SUB, 0.0, [1.0], [1.0], 0.5, 1e-3).end
    b = solve_flow(SUB, 0.0, [1.0], [1.0], 0.5, 1e-4).end
    assert abs(a[0][0] - b[0][0]) < 1e-9 and abs(a[1][0] - b[1][0]) < 1e-9


def test_against_solve_ivp():
    m = PotentialModel("sublinear", 1, c0=0.7, eps=0.3, omega=2.0, rho=0.5)

    def rhs(s, z):
        x, xi = z[0:1], z[1:2]
        gx, gxi = grad_hamiltonian(m, s, x, xi)
        h = h_symbol(m, s, x, xi)
        return [gxi[0], -gx[0], h.real, h.imag]

    ref = solve_ivp(rhs, (0.2, -0.6), [0.7, -1.3, 0, 0], rtol=1e-12, atol=1e-12).y[:, -1]
    X0, XI0, phase = backward_endpoints(m, 0.2, [[0.7]], [[-1.3]], -0.6)
    np.testing.assert_allclose([X0[0, 0], XI0[0, 0]], ref[:2], atol=1e-10)
    np.testing.assert_allclose(phase[0], ref[2] + 1j * ref[3], atol=1e-10)


def test_batch_matches_single():
    X = np.array([[0.0], [1.0], [-2.0]])
    XI = np.array([[1.0], [0.0], [0.5]])
    _, XE, XIE = flow_batch(SUB, 0.0, X, XI, 0.7, 1e-3)
    for k in range(3):
        tr = solve_flow(SUB, 0.0, X[k], XI[k], 0.7)
        np.testing.assert_allclose(XE[k], tr.end[0], atol=1e-14)
        np.testing.assert_allclose(XIE[k], tr.end[1], atol=1e-14)


def test_step_validation():
    with pytest.raises(ValueError):
        flow_batch(SUB, 0, [[0.0]], [[0.0]], 1.0, 0.0)
    with pytest.raises(OverflowError):
        flow_batch(SUB, 0, [[0.0]], [[0.0]], 1e6, 1e-3)


@pytest.mark.parametrize("m", [ZERO, CONST])
def test_unit_jacobian_trivial(m):
    assert abs(flow_jacobian_det(m, 0.0, [0.3], [1.1], 2.5) - 1) < 1e-10


def test_unit_jacobian_sublinear():
    assert abs(flow_jacobian_det(SUB, 0.0, [0.7], [-1.3], 1.0, 1e-4) - 1) < 1e-6
    with pytest.raises(ValueError):
        flow_jacobian_det(SUB, 0.0, [0.7], [-1.3], 1.0, 1e-2)


def test_unit_jacobian_2d():
    m = PotentialModel("sublinear", 2, c0=0.5, rho=0.5, v=(0.6, 0.8))
    X, XI = anchor_lattice(2, 2.0, 1.0, 3, 3)
    dets = flow_jacobian_dets(m, 0.0, X, XI, 1.0)
    assert dets.shape == (81,)
    assert np.max(np.abs(dets - 1)) < 1e-6


def test_yajima_free_closed_form():
    for T, xi in [(0.7, 3.0), (1.0, -2.0), (0.3, 10.0)]:
        np.testing.assert_allclose(yajima_integral(ZERO, 1.0, T, 0, [0.0], [xi]), np.arctan(T * abs(xi)),
                                   atol=1e-8)
    assert yajima_integral(ZERO, 0.5, 1.0, 0, [2.0], [0.0]) == 0


def test_yajima_validation():
    with pytest.raises(ValueError):
        yajima_integral(ZERO, 0.0, 1.0, 0, [0.0], [1.0])
    with pytest.raises(ValueError):
        yajima_integral(ZERO, 0.5, 1.5, 0, [0.0], [1.0])


def test_yajima_sup_bounded_in_xi():
    m = PotentialModel("sublinear", 1, c0=1.0, rho=0.5)
    sups = [yajima_sup(m, 0.5, 0.5, 5.0, xm) for xm in (25.0, 50.0, 100.0)]
    assert np.all(np.isfinite(sups))
    # the sup saturates: doubling the frequency range adds little
    assert sups[2] < 1.2 * sups[1]


def test_anchor_lattice_shape():
    X, XI = anchor_lattice(1, 1.0, 2.0, 5, 3)
    assert X.shape == (15, 1) and XI.shape == (15, 1)
    assert set(np.round(XI[:, 0], 12)) == {-2.0, 0.0, 2.0}
