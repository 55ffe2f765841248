import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from owrte.errors import ConfigurationError, EvanescentModeError
from owrte.geometry import (TransportParams, beta, grad_beta, group_velocity, largest_cone_kappa,
                            make_grid)


def test_beta_values():
    assert beta(0.0) == 1.0
    assert np.isclose(beta(0.6), 0.8, rtol=1e-15)
    assert np.isclose(beta([0.6, 0.0]), 0.8, rtol=1e-15)


def test_beta_evanescent():
    with pytest.raises(EvanescentModeError):
        beta(1.0)
    with pytest.raises(EvanescentModeError):
        grad_beta([0.8, 0.7])


def test_grad_beta_values():
    assert grad_beta(0.0)[0] == 0.0
    assert np.isclose(grad_beta(0.6)[0], -0.75, rtol=1e-15)
    assert np.isclose(group_velocity(0.6)[0], 0.75, rtol=1e-15)


def test_grad_beta_finite_differences():
    rng = np.random.default_rng(3)
    h = 1e-5
    for _ in range(100):
        k = rng.uniform(-0.6, 0.6, size=2)
        fd = np.array([(beta(k + h * e) - beta(k - h * e)) / (2 * h) for e in np.eye(2)])
        assert np.max(np.abs(grad_beta(k) - fd)) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.99), st.floats(0, 0.99))
def test_beta_decreasing(a, b):
    if a < b:
        assert beta(a) > beta(b)


def test_params_validation():
    p = TransportParams(1.0, 20.0, 0.1)
    assert np.isclose(p.kappa_max, 0.95 * largest_cone_kappa(20.0))
    assert np.isclose(p.gamma, 2 * np.pi / 20)
    for kw in [dict(k=-1, ell=1, alpha=0.1), dict(k=1, ell=0.5, alpha=0.1), dict(k=1, ell=5, alpha=0),
               dict(k=1, ell=5, alpha=0.1, d=3), dict(k=1, ell=5, alpha=0.1, kappa_max=1.0)]:
        with pytest.raises(ConfigurationError):
            TransportParams(**kw)
    with pytest.raises(ConfigurationError, match="cone"):
        TransportParams(1.0, 2.0, 0.1, kappa_max=0.95)


def test_grid_measure_d1():
    p = TransportParams(1.0, 20.0, 0.1, kappa_max=0.8)
    g = make_grid(p, 64)
    assert abs(g.weights.sum() / ((1 / (2 * np.pi)) * 1.6) - 1) < 1e-12
    m2 = g.integrate(g.nodes[:, 0] ** 2)
    assert abs(m2 / ((1 / (2 * np.pi)) * 2 * 0.8 ** 3 / 3) - 1) < 1e-12
    assert np.all(np.abs(g.nodes) <= 0.8) and np.all(g.weights > 0)


def test_grid_measure_d2():
    p = TransportParams(1.0, 20.0, 0.1, d=2, kappa_max=0.8)
    g = make_grid(p, (32, 64))
    assert abs(g.weights.sum() / ((1 / (2 * np.pi)) ** 2 * np.pi * 0.64) - 1) < 1e-10
    assert np.all(np.linalg.norm(g.nodes, axis=1) <= 0.8)


@pytest.mark.parametrize("res,d,rule", [(64, 1, "gauss"), ((16, 32), 2, "gauss"),
                                        (32, 1, "midpoint"), (16, 2, "midpoint")])
def test_grid_mirror_symmetry(res, d, rule):
    p = TransportParams(1.0, 20.0, 0.1, d=d, kappa_max=0.8)
    g = make_grid(p, res, rule=rule)
    m = g.mirror_index()
    assert np.array_equal(g.nodes[m], -g.nodes)
    assert np.array_equal(g.weights[m], g.weights)


def test_grid_resolution_errors():
    p = TransportParams(1.0, 20.0, 0.1)
    with pytest.raises(ConfigurationError):
        make_grid(p, 4)
    with pytest.raises(ConfigurationError):
        make_grid(p, 60)  # not a multiple of the panel order
    p2 = TransportParams(1.0, 20.0, 0.1, d=2)
    with pytest.raises(ConfigurationError):
        make_grid(p2, 16)
    with pytest.raises(ConfigurationError):
        make_grid(p2, (16, 33))


def test_midpoint_grid_spacing():
    p = TransportParams(1.0, 20.0, 0.1, kappa_max=0.5)
    g = make_grid(p, 100, rule="midpoint")
    assert np.isclose(g.spacing, 0.01)
    assert np.allclose(np.diff(g.nodes[:, 0]), 0.01)
    assert np.isclose(g.weights.sum(), g.measure)
