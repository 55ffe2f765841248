"""Named validation pipelines with pass/fail checks against configured tolerances."""

import os
import time
import warnings

import numpy as np
from scipy import stats

from . import montecarlo as mc
from .coherent import mean_amplitude, source_amplitudes
from .config import RunConfig
from .errors import ConfigurationError
from .io import write_csv, write_json
from .medium import GaussianIsotropic
from .pipeline import build_grid, build_params, build_spectrum, s_at_zero
from .transport import (IntensityField, diffusion_coeffs, diffusion_field, paraxial_table,
                        paraxial_xsection, solve_angular, solve_kappa_diffusion)
from .transport.paraxial import SupportLeakageWarning
from .xsection import (build_xsection_table, diff_xsection, hg_identification_sides, hg_phase,
                       q_exponent_direct, verify_rte3d_reduction)

SCENARIOS = ("hg-check", "rte3d-check", "bridge-paraxial", "bridge-diffusion",
             "mc-vs-deterministic", "coherent-decay")


def preset(name):
    """Default configuration of a scenario."""
    cfg = RunConfig()
    if name == "hg-check":
        cfg = cfg.override("medium.type", '"lorentzian2d"')
        cfg = cfg.override("params.ell", "5.0").override("params.alpha", "0.05")
    elif name == "rte3d-check":
        cfg = cfg.override("params.d", "2").override("params.ell", "5.0")
    elif name == "bridge-paraxial":
        cfg = cfg.override("grid.n_kappa", "128").override("grid.half_width", "0.7")
    elif name == "bridge-diffusion":
        cfg = cfg.override("grid.n_kappa", "256").override("grid.rule", '"midpoint"')
        cfg = cfg.override("source.kappa_width", "0.02")
    elif name == "mc-vs-deterministic":
        cfg = cfg.override("mc.particles", "1000000")
    elif name == "coherent-decay":
        cfg = cfg.override("mc.particles", "1000000").override("mc.start", '"mono"')
    else:
        raise ConfigurationError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}",
                                 "scenario")
    return cfg


class Report:
    def __init__(self, name):
        self.name = name
        self.checks = []
        self.info = {}

    def check(self, label, measured, tolerance, passed=None, relation="<="):
        if passed is None:
            passed = bool(measured <= tolerance) if relation == "<=" else bool(measured >= tolerance)
        self.checks.append({"check": label, "measured": float(measured),
                            "tolerance": float(tolerance), "relation": relation,
                            "passed": bool(passed)})
        return passed

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def lines(self):
        out = []
        for c in self.checks:
            tag = "PASS" if c["passed"] else "FAIL"
            out.append(f"[{tag}] {self.name}: {c['check']}: measured {c['measured']:.6g} "
                       f"{c['relation']} {c['tolerance']:.6g}")
        return out

    def to_dict(self):
        return {"scenario": self.name, "passed": self.passed, "checks": self.checks, "info": self.info}


def _hg(cfg, rep, out):
    params = build_params(cfg)
    spectrum = build_spectrum(cfg, params)
    theta = 2 * np.pi * np.arange(360) / 360
    lhs, rhs = hg_identification_sides(params, theta, cfg.medium.r0, spectrum)
    rep.check("identification sup relative deviation", np.max(np.abs(lhs - rhs) / np.abs(lhs)),
              cfg.checks.hg)
    from .xsection import hg_params
    g, mu_s = hg_params(params, cfg.medium.r0)
    fine = 2 * np.pi * np.arange(8192) / 8192
    norm = hg_phase(g, fine).sum() * 2 * np.pi / 8192
    rep.check("phase function normalization error", abs(norm - 1), cfg.checks.hg_norm)
    rep.info.update(g=g, mu_s=mu_s, k_ell=params.k_ell)
    if out:
        write_csv(os.path.join(out, "hg.csv"), ["theta", "lhs", "rhs"], np.c_[theta, lhs, rhs],
                  cfg.config_hash(), ["rad", "1/length/rad", "1/length/rad"])


def _rte3d(cfg, rep, out):
    params = build_params(cfg)
    if params.d != 2:
        raise ConfigurationError("rte3d-check needs d = 2", "params.d")
    spectrum = build_spectrum(cfg, params)
    rng = np.random.default_rng(cfg.seed)

    def disk(n):
        r = params.kappa_max * np.sqrt(rng.random(n))
        t = 2 * np.pi * rng.random(n)
        return np.c_[r * np.cos(t), r * np.sin(t)]

    kap, kapp = disk(100), disk(100)
    dev = verify_rte3d_reduction(params, spectrum, kap, kapp)
    rep.check("reduced kernel max relative deviation (100 pairs)", dev, cfg.checks.rte3d)


def _paraxial(cfg, rep, out):
    params = build_params(cfg)
    spectrum = build_spectrum(cfg, params)
    kk = np.linspace(-0.05, 0.05, 41)
    if params.d == 1:
        pts = kk[:, None]
    else:
        gx, gy = np.meshgrid(kk, kk, indexing="ij")
        pts = np.c_[gx.ravel(), gy.ravel()]
        pts = pts[np.linalg.norm(pts, axis=1) <= 0.05]
    Q = diff_xsection(params, spectrum, pts[:, None, :], pts[None, :, :])
    Qp = paraxial_xsection(params, spectrum, pts[:, None, :], pts[None, :, :])
    rep.check("kernel sup |Q/Q_pa - 1| for |kappa|<=0.05", np.max(np.abs(Q / Qp - 1)),
              cfg.checks.paraxial_kernel)
    grid = build_grid(cfg, params)
    full = build_xsection_table(params, spectrum, grid, imag=False, threads=cfg.solver.threads)
    s0 = s_at_zero(params, spectrum, grid)
    r = grid.radius
    i0 = IntensityField(grid, np.where(r <= 0.05, np.cos(0.5 * np.pi * r / 0.05) ** 2, 0.0))
    a = solve_angular(full, i0, [s0])[0]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SupportLeakageWarning)
        b = solve_angular(paraxial_table(params, spectrum, grid), i0, [s0])[0]
    rep.check("narrow-beam L1 distance / total at z=S(0)", a.l1_distance(b) / a.total,
              cfg.checks.paraxial_l1)
    rep.info.update(S0=s0, leakage_warnings=len(caught))
    if out:
        nodes = grid.nodes
        write_csv(os.path.join(out, "paraxial.csv"),
                  [f"kappa{j + 1}" for j in range(params.d)] + ["I_full", "I_paraxial"],
                  np.c_[nodes, a.values, b.values], cfg.config_hash())


def support_radius(field, mass=0.99):
    """Smallest |kappa - mean| containing ``mass`` of the intensity."""
    c = field.mean()
    r = np.linalg.norm(field.grid.nodes - c, axis=-1)
    order = np.argsort(r)
    cum = np.cumsum((field.grid.weights * field.values)[order]) / field.total
    return float(r[order][np.searchsorted(cum, mass)])


def _diffusion(cfg, rep, out):
    params = build_params(cfg)
    spectrum = build_spectrum(cfg, params)
    grid = build_grid(cfg, params)
    coeff0 = diffusion_coeffs(params, spectrum, np.zeros(params.d))
    A0 = float(np.trace(coeff0.a_matrix)) / params.d
    if isinstance(spectrum, GaussianIsotropic):
        closed = params.alpha ** 2 * spectrum.variance_scale * np.sqrt(2 * np.pi) / 8
        rep.check("A(0) vs closed form, relative", abs(A0 / closed - 1), cfg.checks.diffusion_a0)
    table = build_xsection_table(params, spectrum, grid, imag=False, threads=cfg.solver.threads)
    s0 = s_at_zero(params, spectrum, grid)
    i0 = IntensityField.gaussian_beam(grid, cfg.source.kappa_width)
    zs = np.linspace(0.0, s0, 6)
    ang = solve_angular(table, i0, zs)
    sup = np.array([support_radius(f) for f in ang])
    ok = sup <= 0.3 * params.kappa_max
    var = np.array([f.variance() for f in ang])
    if ok.sum() < 3:
        rep.check("support <= 0.3 kappa_max at 3+ ranges", float(sup[2]), 0.3 * params.kappa_max)
        return
    # variance grows by 2 A per unit of z / ell per transverse dimension
    rate = np.polyfit(zs[ok], var[ok], 1)[0] * params.wavelength / params.d
    target = 2 * params.gamma * A0
    rep.check("angular variance rate vs 2 gamma A(0), relative", abs(rate / target - 1),
              cfg.checks.diffusion_rate)
    coeffs = diffusion_field(params, spectrum, grid)
    dif = solve_kappa_diffusion(coeffs, params.gamma, i0, zs, z_unit=params.wavelength,
                                drift_power=cfg.solver.drift_power)
    vdif = np.array([f.variance() for f in dif])
    rate_d = np.polyfit(zs[ok], vdif[ok], 1)[0] * params.wavelength / params.d
    rep.check("diffusion-solver variance rate vs angular, relative", abs(rate_d / rate - 1),
              cfg.checks.diffusion_rate)
    rep.info.update(S0=s0, A0=A0, gamma=params.gamma, angular_rate=rate, diffusion_rate=rate_d,
                    support_max=float(sup[ok].max()))
    if out:
        write_csv(os.path.join(out, "variance.csv"), ["z", "var_angular", "var_diffusion", "support"],
                  np.c_[zs, var, vdif, sup], cfg.config_hash(), ["length", "1", "1", "1"])


def _mc(cfg, rep, out):
    params = build_params(cfg)
    spectrum = build_spectrum(cfg, params)
    grid = build_grid(cfg, params)
    table = build_xsection_table(params, spectrum, grid, imag=False, threads=cfg.solver.threads)
    s0 = s_at_zero(params, spectrum, grid)
    i0 = IntensityField.gaussian_beam(grid, cfg.source.kappa_width)
    t0 = time.perf_counter()
    ens = mc.ParticleEnsemble.from_intensity(i0, cfg.mc.particles, cfg.seed, params)
    ens = mc.evolve(ens, table, s0, threads=cfg.solver.threads)
    est = mc.estimate_intensity(ens)
    elapsed = time.perf_counter() - t0
    det = solve_angular(table, i0, [s0])[0]
    zscore = np.abs(est.values - det.values) / est.stderr
    frac = float(np.mean(zscore <= cfg.checks.n_sigma))
    rep.check(f"fraction of bins within {cfg.checks.n_sigma:g} stderr", frac,
              cfg.checks.mc_bin_fraction, relation=">=")
    row = int(np.argmin(np.linalg.norm(grid.nodes, axis=-1)))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, 1])))
    draws = mc.sample_scatter(table, np.full(cfg.mc.particles, row), rng)
    p_val = row_chi2(table, row, draws)
    rep.check("chi-square p-value of scatter draws", p_val, cfg.checks.chi2_alpha, relation=">=")
    rep.info.update(S0=s0, particles=cfg.mc.particles, mc_seconds=elapsed)
    if out:
        write_csv(os.path.join(out, "mc_histogram.csv"),
                  [f"kappa{j + 1}" for j in range(params.d)] + ["I_mc", "stderr", "I_deterministic"],
                  np.c_[grid.nodes, est.values, est.stderr, det.values], cfg.config_hash())


def row_chi2(table, row, draws):
    """Goodness-of-fit p-value of draws from row ``row``; bins with expectation < 5 are pooled."""
    n_draw = draws.size
    counts = np.bincount(draws, minlength=table.n).astype(float)
    p = table.q_matrix[row] * table.grid.weights / table.sigma[row]
    expct = n_draw * p / p.sum()
    big = expct >= 5
    obs = np.append(counts[big], counts[~big].sum())
    exp = np.append(expct[big], expct[~big].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    return float(stats.chisquare(obs, exp).pvalue)


def _coherent(cfg, rep, out):
    params = build_params(cfg)
    spectrum = build_spectrum(cfg, params)
    grid = build_grid(cfg, params)
    table = build_xsection_table(params, spectrum, grid, imag=True, threads=cfg.solver.threads)
    i = int(np.argmin(np.linalg.norm(grid.nodes - cfg.mc.kappa0, axis=-1)))
    z = float(table.mfp[i])
    ens = mc.ParticleEnsemble.monoenergetic(grid, i, cfg.mc.particles, cfg.seed, params)
    ens = mc.evolve(ens, table, z, threads=cfg.solver.threads)
    f, se = mc.estimate_coherent(ens)
    expect = np.exp(-table.sigma[i] * z)
    n_sig = abs(f - expect) / se
    rep.check("MC survival vs exp(-Sigma z), in stderr", n_sig, cfg.checks.n_sigma)
    a0 = source_amplitudes(_source(cfg, params), params, grid)
    amp = mean_amplitude(a0, table, z)
    ratio = np.abs(amp) / np.abs(a0)
    qd = q_exponent_direct(params, spectrum, grid.nodes, grid)
    ref = np.exp(qd.real * z)
    rep.check("|A(z)|/|a0| vs exp(Re Q z) from range quadrature, relative",
              float(np.max(np.abs(ratio / ref - 1))), cfg.checks.coherent_decay)
    rep.info.update(z=z, survival=f, survival_stderr=se, expected=float(expect))
    if out:
        write_csv(os.path.join(out, "coherent.csv"),
                  [f"kappa{j + 1}" for j in range(params.d)] + ["re_A", "im_A", "abs_A2", "exp_minus_z_over_S"],
                  np.c_[grid.nodes, amp.real, amp.imag, np.abs(amp) ** 2, np.exp(-z / table.mfp)],
                  cfg.config_hash())


def _source(cfg, params):
    from .pipeline import build_source
    return build_source(cfg)


_RUNNERS = {"hg-check": _hg, "rte3d-check": _rte3d, "bridge-paraxial": _paraxial,
            "bridge-diffusion": _diffusion, "mc-vs-deterministic": _mc,
            "coherent-decay": _coherent}


def run_scenario(name, config=None, out_dir=None):
    """Run a named scenario; returns the Report (``report.passed`` is the verdict)."""
    if name not in _RUNNERS:
        raise ConfigurationError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}",
                                 "scenario")
    cfg = preset(name) if config is None else config
    rep = Report(name)
    _RUNNERS[name](cfg, rep, out_dir)
    if out_dir:
        write_json(os.path.join(out_dir, f"{name}.json"), rep.to_dict(), cfg.config_hash())
    return rep
