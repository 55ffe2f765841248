import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from owrte.errors import ConfigurationError, OutOfRangeError, UnsupportedModelError
from owrte.medium import (GaussianIsotropic, Lorentzian2D, TabulatedIsotropic, autocovariance,
                          breve_iso, partial_psd, psd, spectrum_from_config)

vec = st.floats(-6, 6, allow_nan=False)


def test_gaussian_autocovariance_values(gauss2):
    assert autocovariance(gauss2, [0.0, 0.0]) == 1.0
    assert np.isclose(autocovariance(gauss2, [0.6, 0.8]), np.exp(-0.5), rtol=1e-15)


def test_gaussian_psd_values(gauss2):
    assert np.isclose(psd(gauss2, [0.0, 0.0]), 2 * np.pi, rtol=1e-15)
    assert np.isclose(psd(gauss2, [0.0, 1.0]), 2 * np.pi * np.exp(-0.5), rtol=1e-15)
    assert np.isclose(psd(gauss2, [0.0, 1.0]), 3.810945, rtol=1e-6)


def test_gaussian_partial_psd_origin(gauss2):
    assert np.isclose(partial_psd(gauss2, [0.0], 0.0), np.sqrt(2 * np.pi), rtol=1e-15)
    assert partial_psd(gauss2, [0.0], 40.0) < 1e-300


@pytest.mark.parametrize("model", [GaussianIsotropic(d_total=2), GaussianIsotropic(d_total=3)])
def test_fourier_consistency_gaussian(model):
    d = model.d
    for q_t, q_z in [(0.3, 0.7), (1.2, -0.4), (0.0, 2.0)]:
        qt = np.full(d, q_t / np.sqrt(d))
        val, _ = integrate.quad(lambda z: model.partial_psd(qt, z) * np.cos(q_z * z), -12, 12,
                                epsabs=0, epsrel=1e-12)
        ref = model.psd(np.append(qt, q_z))
        assert abs(val / ref - 1) < 1e-8


def test_breve_closed_forms():
    lor = Lorentzian2D(r0=1.0)
    assert breve_iso(lor, 0.0) == 1.0
    assert breve_iso(lor, 1.0) == 0.5
    assert np.isclose(breve_iso(GaussianIsotropic(d_total=2), 0.0), 1.0, rtol=1e-10)


@pytest.mark.parametrize("q", [0.0, 0.5, 2.0, 4.0])
def test_breve_equals_psd_over_2pi(q):
    g = GaussianIsotropic(d_total=2)
    assert abs(g.breve_iso(q) / (g.psd([q, 0.0]) / (2 * np.pi)) - 1) < 1e-6
    lor = Lorentzian2D(r0=2.0)
    assert abs(lor.breve_iso(q) - lor.psd([0.0, q]) / (2 * np.pi)) < 1e-15


def test_breve_unsupported_for_3d():
    with pytest.raises(UnsupportedModelError):
        GaussianIsotropic(d_total=3).breve_iso(1.0)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_lorentzian_real_space_is_macdonald_profile(s):
    # the cutoff perturbs r0 K0(s) by O(q_cutoff^-3/2)
    lor = Lorentzian2D(r0=1.0)
    assert abs(lor.radial(s) / special.k0(s) - 1) < 1e-3


def test_lorentzian_finite_at_origin():
    lor = Lorentzian2D(r0=1.0, q_cutoff=1e3)
    assert np.isfinite(lor.radial(0.0)) and lor.radial(0.0) > lor.radial(0.1)


def test_lorentzian_partial_psd_transform():
    # 2 int_0^inf R^(q, zeta) cos(q_z zeta) = R~ for |q_z| well below the cutoff
    lor = Lorentzian2D(r0=1.0)
    for qt, qz in [(0.0, 0.5), (1.0, 1.0)]:
        f = lambda z: lor.partial_psd([qt], z)
        val, _ = integrate.quad(f, 0, 30, weight="cos", wvar=qz, epsabs=1e-5, limit=500)
        assert abs(2 * val / lor.psd([qt, qz]) - 1) < 1e-3


def test_lorentzian_derivatives_unsupported():
    with pytest.raises(UnsupportedModelError):
        Lorentzian2D().transverse_hessian(np.zeros((1, 1)), np.zeros(1))


@settings(max_examples=60, deadline=None)
@given(vec, vec, vec)
def test_psd_even_and_nonnegative(a, b, c):
    for m, q in [(GaussianIsotropic(d_total=2), [a, b]), (GaussianIsotropic(d_total=3), [a, b, c]),
                 (Lorentzian2D(), [a, b])]:
        q = np.array(q)
        assert m.psd(q) >= 0
        assert m.psd(q) == m.psd(-q)


@settings(max_examples=60, deadline=None)
@given(vec, vec)
def test_autocovariance_even_and_peaked(a, b):
    g = GaussianIsotropic(d_total=2)
    r = np.array([a, b])
    assert g.autocovariance(r) == g.autocovariance(-r)
    assert g.autocovariance(r) <= g.autocovariance(np.zeros(2))


def test_bochner_random_sample():
    rng = np.random.default_rng(0)
    q = rng.normal(scale=5, size=(1000, 2))
    assert np.all(Lorentzian2D().psd(q) >= 0)
    assert np.all(_tab_gauss(2).psd(q) >= 0)


def _tab_gauss(d_total, s_max=9.0, n=600):
    s = np.linspace(0.0, s_max, n)
    return TabulatedIsotropic(d_total=d_total, s=tuple(s), values=tuple(np.exp(-s ** 2 / 2)))


@pytest.mark.parametrize("d_total", [2, 3])
def test_tabulated_gaussian_matches_analytic(d_total):
    tab, ana = _tab_gauss(d_total), GaussianIsotropic(d_total=d_total)
    q = np.array([[0.0] * d_total, [0.5] + [0.0] * (d_total - 1), [1.0] * d_total])
    assert np.allclose(tab.psd(q), ana.psd(q), rtol=1e-6)
    qt = np.array([[0.7] * (d_total - 1)])
    assert np.allclose(tab.partial_psd(qt, [0.4]), ana.partial_psd(qt, [0.4]), rtol=1e-6)
    assert np.isclose(tab.line_integral_iso(), ana.line_integral_iso(), rtol=1e-8)


def test_tabulated_psd_even():
    tab = _tab_gauss(2)
    q = np.array([0.3, -1.1])
    assert abs(tab.psd(q) - tab.psd(-q)) <= 1e-12 * tab.psd(q)


def test_tabulated_out_of_range():
    tab = _tab_gauss(2)
    with pytest.raises(OutOfRangeError):
        tab.autocovariance([10.0, 0.0])


def test_tabulated_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        TabulatedIsotropic(d_total=2, s=(0.0, 1.0, 0.5, 2.0), values=(1, 0.5, 0.2, 0))
    with pytest.raises(ConfigurationError):
        TabulatedIsotropic(d_total=2, s=(0.1, 1.0, 1.5, 2.0), values=(1, 0.5, 0.2, 0))
    # a flat-top covariance is not positive definite in two dimensions
    s = np.linspace(0, 1.0, 50)
    box = TabulatedIsotropic(d_total=2, s=tuple(s), values=tuple(np.ones(50)))
    with pytest.raises(ConfigurationError):
        box.psd([0.0, 5.0])


def test_tabulated_from_csv(tmp_path):
    s = np.linspace(0, 9, 300)
    path = tmp_path / "cov.csv"
    path.write_text("s,R\n" + "\n".join(f"{a},{np.exp(-a * a / 2)}" for a in s))
    tab = TabulatedIsotropic.from_csv(path, d_total=2)
    assert np.isclose(tab.psd([0.0, 0.0]), 2 * np.pi, rtol=1e-5)
    cfg = spectrum_from_config({"type": "tabulated", "path": str(path)}, 2)
    assert isinstance(cfg, TabulatedIsotropic)


def test_spectrum_from_config_errors():
    assert isinstance(spectrum_from_config({"type": "gaussian"}, 3), GaussianIsotropic)
    with pytest.raises(ConfigurationError):
        spectrum_from_config({"type": "lorentzian2d"}, 3)
    with pytest.raises(ConfigurationError):
        spectrum_from_config({"type": "vonkarman"}, 2)
    with pytest.raises(ConfigurationError):
        GaussianIsotropic(d_total=4)


def test_gaussian_derivatives_match_finite_differences():
    g = GaussianIsotropic(d_total=3)
    r_t = np.array([[0.3, -0.2], [1.1, 0.4]])
    zeta = np.array([0.5, -0.7])
    fd_h = super(GaussianIsotropic, g).transverse_hessian(r_t, zeta, h=1e-3)
    assert np.allclose(g.transverse_hessian(r_t, zeta), fd_h, atol=1e-9)
    fd_t = super(GaussianIsotropic, g).transverse_third(r_t, zeta, h=1e-2)
    assert np.allclose(g.transverse_third(r_t, zeta), fd_t, atol=1e-6)


@pytest.mark.parametrize("d_total", [2, 3])
def test_outer_partial_transform_matches_pointwise(d_total):
    s = np.linspace(0, 9, 200)
    tab = TabulatedIsotropic(d_total=d_total, s=tuple(s), values=tuple(np.exp(-s * s / 2)))
    q = np.random.default_rng(1).normal(size=(7, d_total - 1))
    z = np.array([0.0, 0.4, 1.3, 2.2])
    outer = tab.partial_psd_outer(q, z)
    point = tab.partial_psd(q[:, None, :], z[None, :])
    assert np.allclose(outer, point, rtol=1e-13, atol=1e-15)
    g = GaussianIsotropic(d_total=d_total)
    assert np.allclose(g.partial_psd_outer(q, z), g.partial_psd(q[:, None, :], z[None, :]))
