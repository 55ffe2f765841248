import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from owrte import TransportParams, beta, build_xsection_table, make_grid
from owrte.coherent import (SourceModel, backward_amplitudes, homogeneous_field,
                            initial_intensity, mean_amplitude, source_amplitudes)
from owrte.errors import ConfigurationError
from owrte.montecarlo import ParticleEnsemble, estimate_coherent, evolve


@pytest.fixture(scope="module")
def src():
    return SourceModel(kind="gaussian", kappa_width=0.05, normalization=2.0)


def test_amplitude_at_normal_incidence_is_positive_imaginary(p20, src):
    g = make_grid(p20, 64)
    a = source_amplitudes(src, p20, g)
    centre = np.argmin(np.abs(g.nodes[:, 0]))
    assert np.all(a.real == 0)
    assert a[centre].imag > 0


def test_flux_normalization_and_profile(p20, src):
    g = make_grid(p20, 64)
    a = source_amplitudes(src, p20, g)
    assert abs(g.weights @ np.abs(a) ** 2 - 2.0) < 1e-12
    shape = np.abs(a) ** 2 * beta(g.nodes)
    target = np.exp(-g.nodes[:, 0] ** 2 / (2 * 0.05 ** 2))
    ratio = shape / target
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert np.array_equal(backward_amplitudes(src, p20, g), a)
    assert np.allclose(initial_intensity(src, p20, g).values, np.abs(a) ** 2)


def test_wider_source_spreads_intensity(p20):
    g = make_grid(p20, 64)
    narrow = initial_intensity(SourceModel(kappa_width=0.03), p20, g)
    wide = initial_intensity(SourceModel(kappa_width=0.06), p20, g)
    assert wide.variance() > 3.5 * narrow.variance()


def test_source_support_checks(p20):
    g = make_grid(p20, 32)
    with pytest.raises(ConfigurationError):
        source_amplitudes(SourceModel(kappa_width=0.3), p20, g)
    with pytest.raises(ConfigurationError):
        source_amplitudes(SourceModel(normalization=0.0), p20, g)
    with pytest.raises(ConfigurationError):
        source_amplitudes(SourceModel(kind="tabulated", samples=([0.0, 0.5, 0.94], [1.0, 0.5, 0.2])),
                          p20, g)
    with pytest.raises(ConfigurationError):
        source_amplitudes(SourceModel(kind="plane"), p20, g)
    tab = SourceModel(kind="tabulated", samples=([0.0, 0.1, 0.2], [1.0, 0.5, 0.0]))
    assert np.all(np.isfinite(source_amplitudes(tab, p20, g)))


@pytest.fixture(scope="module")
def coh_setup(p20, gauss2, src):
    g = make_grid(p20, 64)
    table = build_xsection_table(p20, gauss2, g)
    return g, table, source_amplitudes(src, p20, g)


def test_mean_amplitude_decays_at_one_over_mfp(coh_setup):
    g, table, a0 = coh_setup
    assert np.array_equal(mean_amplitude(a0, table, 0.0), a0)
    for i in (5, 32):
        s = table.mfp[i]
        ratio = abs(mean_amplitude(a0, table, s)[i]) / abs(a0[i])
        assert abs(ratio - np.exp(-1.0)) < 1e-12
    with pytest.raises(ValueError):
        mean_amplitude(a0, table, -1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 500.0), st.floats(0.0, 500.0))
def test_mean_amplitude_semigroup(coh_setup, z1, z2):
    g, table, a0 = coh_setup
    two = mean_amplitude(mean_amplitude(a0, table, z1), table, z2)
    one = mean_amplitude(a0, table, z1 + z2)
    assert np.allclose(two, one, rtol=1e-10, atol=1e-14 * np.abs(a0).max())


def test_coherent_intensity_matches_unscattered_particles(coh_setup):
    g, table, a0 = coh_setup
    i = 32
    z = 0.7 * table.mfp[i]
    decay = abs(mean_amplitude(a0, table, z)[i]) ** 2 / abs(a0[i]) ** 2
    ens = evolve(ParticleEnsemble.monoenergetic(g, i, 100_000, seed=21), table, z)
    f, se = estimate_coherent(ens)
    assert abs(f - decay) < 4 * se


def test_homogeneous_field_basic_properties(p20, src):
    g = make_grid(p20, 128)
    a0 = source_amplitudes(src, p20, g)
    x = np.linspace(-200, 200, 81)[:, None]
    with pytest.raises(ValueError):
        homogeneous_field(a0, p20, g, x, 0.0)
    u1 = homogeneous_field(a0, p20, g, x, 50.0)
    u2 = homogeneous_field(2j * a0, p20, g, x, 50.0)
    assert np.allclose(u2, 2j * u1, rtol=1e-13)
    # symmetric source -> symmetric field
    assert np.allclose(np.abs(u1), np.abs(u1[::-1]), rtol=1e-10)


def _beam_width(u, x):
    p = np.abs(u) ** 2
    return np.sqrt(np.sum(p * x[:, 0] ** 2) / np.sum(p))


def test_homogeneous_beam_spreads_with_range(p20, src):
    g = make_grid(p20, 128)
    a0 = source_amplitudes(src, p20, g)
    x = np.linspace(-400, 400, 801)[:, None]
    widths = [_beam_width(homogeneous_field(a0, p20, g, x, z), x) for z in (10.0, 200.0, 400.0)]
    assert widths[0] < widths[1] < widths[2]


def test_homogeneous_field_converges_under_refinement(p20, src):
    x = np.linspace(-50, 50, 21)[:, None]
    u = [homogeneous_field(source_amplitudes(src, p20, make_grid(p20, n)), p20, make_grid(p20, n), x, 30.0)
         for n in (128, 256)]
    assert np.max(np.abs(u[0] - u[1])) < 1e-8 * np.max(np.abs(u[1]))


def test_two_dimensional_source(gauss3):
    p = TransportParams(1.0, 20.0, 0.1, d=2)
    g = make_grid(p, (16, 16))
    a = source_amplitudes(SourceModel(kappa_width=0.05), p, g)
    assert abs(g.weights @ np.abs(a) ** 2 - 1.0) < 1e-12
    u = homogeneous_field(a, p, g, np.zeros((1, 2)), 10.0)
    assert u.shape == (1,)
