import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modlab.grid import Field, make_grid
from modlab.wavepacket import (PhaseSpaceField, invert, iwpt, mod_norm, modulation_norm,
                               shifted_windows, wpt, wpt_at)
from modlab.windows import gaussian_window

from conftest import packet


def random_band_limited(g, seed, count=4):
    rng = np.random.default_rng(seed)
    vals = np.zeros(g.shape, dtype=complex)
    for _ in range(count):
        x0, k0 = rng.uniform(-6, 6), rng.uniform(-2, 2)
        w = rng.uniform(0.8, 2.0)
        vals += (rng.normal() + 1j * rng.normal()) * np.exp(-(g.x - x0) ** 2 / (2 * w ** 2) + 1j * k0 * g.x)
    return Field(g, vals)


def test_gaussian_closed_form(grid, phi0):
    F = wpt(phi0, phi0)
    X, K = np.meshgrid(grid.x, grid.xi, indexing="ij")
    exact = np.sqrt(np.pi) * np.exp(-X ** 2 / 4 - K ** 2 / 4)
    assert np.max(np.abs(np.abs(F.values) - exact)) < 1e-8


def test_direct_quadrature_oracle(grid, phi0):
    f = packet(grid)
    F = wpt(f, phi0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        i, k = rng.integers(0, grid.N, 2)
        y = grid.x
        direct = np.sum(np.exp(-(y - grid.x[i]) ** 2 / 2) * np.exp(-1j * y * grid.xi[k]) * f.values) * grid.h
        np.testing.assert_allclose(F.values[i, k], direct, atol=1e-12)


def test_zero_signal(grid, phi0):
    F = wpt(Field(grid, np.zeros(grid.N)), phi0)
    assert np.all(F.values == 0)
    assert np.all(iwpt(F, phi0).values == 0)
    for p, q in [(1, 1), (2, 2), (np.inf, np.inf), (1, np.inf)]:
        assert mod_norm(F, p, q).value == 0


def test_translation_covariance(grid, phi0):
    a = 11
    f = packet(grid)
    fa = Field(grid, np.roll(f.values, a))
    A = np.abs(wpt(f, phi0).values)
    B = np.abs(wpt(fa, phi0).values)
    np.testing.assert_allclose(B, np.roll(A, a, axis=0), atol=1e-12)


@settings(max_examples=5, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_round_trip(seed):
    g = make_grid(1, 8 * np.pi, 256)
    f = random_band_limited(g, seed)
    for lam in (1.0, 4.0):
        phi = gaussian_window(g, 1.0, lam)
        back = invert(wpt(f, phi), phi)
        assert np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values) < 1e-8


def test_round_trip_2d(grid2):
    phi = gaussian_window(grid2, 2.0)
    X = grid2.mesh()
    f = Field(grid2, np.exp(-np.sum((X - 1) ** 2, axis=-1) / 8 + 0.5j * X[..., 0]))
    back = invert(wpt(f, phi), phi)
    assert np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values) < 1e-8
    np.testing.assert_allclose(mod_norm(wpt(f, phi), 2, 2).value, phi.l2_norm * f.l2_norm, rtol=1e-8)


def test_m22_identity(grid, phi0):
    for seed in range(5):
        f = random_band_limited(grid, seed)
        np.testing.assert_allclose(mod_norm(wpt(f, phi0), 2, 2).value, phi0.l2_norm * f.l2_norm, rtol=1e-8)


@pytest.mark.parametrize("p,q", [(1, 1), (2, 2), (1, 2), (2, 1), (np.inf, np.inf), (1, np.inf), (np.inf, 2)])
def test_homogeneity(grid, phi0, p, q):
    F = wpt(packet(grid), phi0)
    c = 3 + 4j
    np.testing.assert_allclose(mod_norm(F * c, p, q).value, 5 * mod_norm(F, p, q).value, rtol=1e-9)


def test_exponent_validation(grid, phi0):
    F = wpt(packet(grid), phi0)
    for bad in (0.5, -1, np.nan):
        with pytest.raises(ValueError):
            mod_norm(F, bad, 2)


def test_refined_sup(grid, phi0):
    F = wpt(phi0, phi0)
    np.testing.assert_allclose(mod_norm(F, np.inf, np.inf).value, np.sqrt(np.pi), rtol=1e-10)
    # off-node maximum: shift the signal by half a cell
    f = Field(grid, np.exp(-(grid.x - grid.h / 2) ** 2 / 2))
    refined = mod_norm(wpt(f, phi0), np.inf, np.inf).value
    nodal = mod_norm(wpt(f, phi0), np.inf, np.inf, refine=False).value
    np.testing.assert_allclose(refined, np.sqrt(np.pi), rtol=1e-10)
    assert nodal < refined


def test_wpt_at_matches_nodes(grid, phi0):
    f = packet(grid)
    F = wpt(f, phi0).values
    idx = [(10, 200), (256, 256), (300, 270)]
    x = np.array([[grid.x[i]] for i, _ in idx])
    xi = np.array([[grid.xi[k]] for _, k in idx])
    np.testing.assert_allclose(wpt_at(f, phi0, x, xi), [F[i, k] for i, k in idx], atol=1e-12)
    with pytest.raises(ValueError):
        wpt_at(f, phi0, x, xi[:2])


def test_wpt_at_off_node_closed_form(grid, phi0):
    x, xi = np.array([0.37, -1.1]), np.array([0.55, 2.01])
    vals = wpt_at(phi0, phi0, x, xi)
    np.testing.assert_allclose(np.abs(vals), np.sqrt(np.pi) * np.exp(-x ** 2 / 4 - xi ** 2 / 4), atol=1e-12)


def test_shifted_windows_2d(grid2):
    phi = gaussian_window(grid2)
    S = shifted_windows(phi)
    assert S.shape == grid2.shape * 2
    i, j = (3, 5), (10, 40)
    y = grid2.x[list(j)] - grid2.x[list(i)]
    np.testing.assert_allclose(S[i + j], np.exp(-np.sum(y ** 2) / 2), atol=1e-14)


def test_field_shape_and_grid_checks(grid, small_grid, phi0):
    with pytest.raises(ValueError):
        PhaseSpaceField(grid, np.zeros((grid.N, 3)), 1.0)
    with pytest.raises(ValueError):
        wpt(Field(small_grid, np.ones(small_grid.N)), phi0)
    with pytest.raises(ValueError):
        wpt(packet(grid), Field(grid, np.zeros(grid.N)))


def test_band_limit_warning(grid, phi0, caplog):
    rough = np.zeros(grid.N)
    rough[::2] = 1.0
    with caplog.at_level(logging.WARNING, logger="modlab.wavepacket"):
        wpt(Field(grid, rough), phi0)
    assert "band-limited" in caplog.text


def test_modulation_norm_wrapper(grid, phi0):
    f = packet(grid)
    np.testing.assert_allclose(modulation_norm(f, phi0, 2), phi0.l2_norm * f.l2_norm, rtol=1e-10)
