"""Command-line interface.

Exit status: 0 success (all checks pass), 1 numerical failure, 2 configuration error.
"""

import argparse
import os
import sys

import numpy as np

from . import montecarlo as mc
from .coherent import initial_intensity, mean_amplitude, source_amplitudes
from .config import RunConfig
from .errors import ConfigurationError, OWRTEError
from .io import write_csv, write_json
from .pipeline import (build_grid, build_params, build_source, build_spectrum, parse_z,
                       s_at_zero)
from .scenarios import SCENARIOS, preset, run_scenario
from .transport import (WignerField, diffusion_field, solve_angular, solve_kappa_diffusion,
                        solve_wigner)
from .xsection import build_xsection_table, hg_params, mfp_highfreq, verify_hg_identification


def _kappa_cols(d):
    return [f"kappa{j + 1}" for j in range(d)]


def _load(args, scenario=None):
    if args.config:
        cfg = RunConfig.load(args.config)
    elif scenario is not None:
        cfg = preset(scenario)
    else:
        cfg = RunConfig()
    for item in args.set or []:
        if "=" not in item:
            raise ConfigurationError("--set expects section.key=value", item)
        k, v = item.split("=", 1)
        cfg = cfg.override(k.strip(), v.strip())
    overrides = {"seed": args.seed, "solver.threads": args.threads,
                 "grid.n_kappa": getattr(args, "n_kappa", None),
                 "grid.n_radial": getattr(args, "n_radial", None),
                 "grid.n_angular": getattr(args, "n_angular", None),
                 "solver.z": getattr(args, "z", None),
                 "solver.method": getattr(args, "method", None),
                 "mc.particles": getattr(args, "particles", None)}
    for k, v in overrides.items():
        if v is not None:
            cfg = cfg.override(k, v if not isinstance(v, str) else f'"{v}"')
    if args.out is not None:
        cfg = cfg.override("output.directory", f'"{args.out}"')
    return cfg


class _Setup:
    def __init__(self, cfg, imag=None):
        self.cfg = cfg
        self.params = build_params(cfg)
        self.spectrum = build_spectrum(cfg, self.params)
        self.grid = build_grid(cfg, self.params)
        self.hash = cfg.config_hash()
        self.out = cfg.output.directory
        self._imag = cfg.solver.imag if imag is None else imag
        self._table = None

    @property
    def table(self):
        if self._table is None:
            self._table = build_xsection_table(self.params, self.spectrum, self.grid,
                                               imag=self._imag, threads=self.cfg.solver.threads)
        return self._table

    @property
    def s0(self):
        return s_at_zero(self.params, self.spectrum, self.grid)

    def path(self, name):
        return os.path.join(self.out, name)

    def z_list(self):
        return parse_z(self.cfg.solver.z, self.s0)


def _file_target(out, default_dir, name):
    if out and out.endswith((".csv", ".json")):
        return out
    return os.path.join(out or default_dir, name)


def cmd_grid(args):
    s = _Setup(_load(args))
    target = _file_target(args.out, s.out, "grid.csv")
    write_csv(target, _kappa_cols(s.params.d) + ["weight"], np.c_[s.grid.nodes, s.grid.weights],
              s.hash, ["1"] * s.params.d + ["(1/length)^d"])
    print(f"grid: {s.grid.n} nodes -> {target}")
    return 0


def cmd_xsection(args):
    s = _Setup(_load(args), imag=False)
    T = s.table
    d, n = s.params.d, s.grid.n
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    rows = np.c_[s.grid.nodes[ii.ravel()], s.grid.nodes[jj.ravel()], T.q_matrix.ravel()]
    cols = [f"kappa_i{j + 1}" for j in range(d)] + [f"kappa_j{j + 1}" for j in range(d)] + ["Q"]
    target = _file_target(args.out, s.out, "xsection.csv")
    write_csv(target, cols, rows, s.hash, ["1"] * 2 * d + ["length^(d-1)"])
    print(f"xsection: {n}x{n} kernel -> {target}")
    return 0


def cmd_mfp(args):
    s = _Setup(_load(args))
    T = s.table
    hf = mfp_highfreq(s.params, s.spectrum, s.grid.nodes)
    rows = np.c_[s.grid.nodes, T.mfp, hf, T.sigma, T.q_exponent.real, T.q_exponent.imag]
    target = _file_target(args.out, s.out, "mfp.csv")
    write_csv(target, _kappa_cols(s.params.d) + ["S", "S_highfreq", "Sigma", "ReQ", "ImQ"], rows,
              s.hash, ["1"] * s.params.d + ["length", "length", "1/length", "1/length", "1/length"])
    print(f"mfp: S(0) = {s.s0:.10g} -> {target}")
    return 0


def cmd_hg(args):
    cfg = _load(args)
    if args.k_ell is not None:
        cfg = cfg.override("params.ell", repr(args.k_ell / cfg.params.k))
    if args.r0 is not None:
        cfg = cfg.override("medium.r0", repr(args.r0))
    cfg = cfg.override("medium.type", '"lorentzian2d"').override("params.d", "1")
    params = build_params(cfg)
    spectrum = build_spectrum(cfg, params)
    g, mu_s = hg_params(params, cfg.medium.r0)
    theta = 2 * np.pi * np.arange(360) / 360
    dev = verify_hg_identification(params, cfg.medium.r0, theta, spectrum)
    print(f"g={g:.12g} mu_s={mu_s:.12g} deviation={dev:.3e}")
    if args.out is not None:
        write_json(_file_target(args.out, args.out, "hg.json"),
                   {"k_ell": params.k_ell, "r0": cfg.medium.r0, "g": g, "mu_s": mu_s,
                    "deviation": dev}, cfg.config_hash())
    return 0 if dev <= cfg.checks.hg else 1


def _intensity_summary(fields):
    return [{"z": f.z, "total": f.total, "variance": f.variance(), "min": float(f.values.min())}
            for f in fields]


def cmd_solve(args):
    s = _Setup(_load(args), imag=False)
    i0 = initial_intensity(build_source(s.cfg), s.params, s.grid)
    fields = solve_angular(s.table, i0, s.z_list(), method=s.cfg.solver.method)
    for k, f in enumerate(fields):
        write_csv(s.path(f"intensity_{k:03d}.csv"), _kappa_cols(s.params.d) + ["I"],
                  np.c_[s.grid.nodes, f.values], s.hash, ["1"] * s.params.d + ["intensity"])
    summ = _intensity_summary(fields)
    write_json(s.path("summary.json"), {"S0": s.s0, "method": s.cfg.solver.method, "ranges": summ}, s.hash)
    drift = abs(summ[-1]["total"] / summ[0]["total"] - 1)
    print(f"solve: {len(fields)} ranges, relative total drift {drift:.2e} -> {s.out}")
    return 0


def cmd_wigner(args):
    s = _Setup(_load(args), imag=False)
    w = s.cfg.wigner
    s0 = s.s0
    if s.params.d != 1:
        raise ConfigurationError("the wigner subcommand supports d = 1", "params.d")
    i0 = initial_intensity(build_source(s.cfg), s.params, s.grid)
    width = w.beam_width * s0
    w0 = WignerField.from_profile(i0, w.x_extent * s0, w.n_x,
                                  lambda x: np.exp(-0.5 * (x / width) ** 2))
    out = solve_wigner(s.table, w0, s.z_list(), s.cfg.solver.steps_per_mfp)
    xs = out[0].x_nodes[0]
    summ = []
    for k, f in enumerate(out):
        kk, xx = np.meshgrid(s.grid.nodes[:, 0], xs, indexing="ij")
        write_csv(s.path(f"wigner_{k:03d}.csv"), ["kappa1", "x1", "W"],
                  np.c_[kk.ravel(), xx.ravel(), f.values.ravel()], s.hash,
                  ["1", "length", "energy density"])
        summ.append({"z": f.z, "total": f.total, "min": float(f.values.min())})
    write_json(s.path("wigner_summary.json"), {"S0": s0, "ranges": summ}, s.hash)
    print(f"wigner: {len(out)} ranges -> {s.out}")
    return 0


def cmd_diffuse(args):
    cfg = _load(args, "bridge-diffusion" if not args.config else None)
    s = _Setup(cfg, imag=False)
    i0 = initial_intensity(build_source(cfg), s.params, s.grid)
    zs = s.z_list()
    ang = solve_angular(s.table, i0, zs)
    coeffs = diffusion_field(s.params, s.spectrum, s.grid)
    dif = solve_kappa_diffusion(coeffs, s.params.gamma, i0, zs, z_unit=s.params.wavelength,
                                drift_power=cfg.solver.drift_power)
    for k, (a, b) in enumerate(zip(ang, dif)):
        write_csv(s.path(f"diffuse_{k:03d}.csv"), _kappa_cols(s.params.d) + ["I_angular", "I_diffusion"],
                  np.c_[s.grid.nodes, a.values, b.values], s.hash)
    summ = [{"z": a.z, "var_angular": a.variance(), "var_diffusion": b.variance()} for a, b in zip(ang, dif)]
    write_json(s.path("diffuse_summary.json"), {"gamma": s.params.gamma, "ranges": summ}, s.hash)
    print(f"diffuse: {len(zs)} ranges -> {s.out}")
    return 0


def cmd_mc(args):
    s = _Setup(_load(args), imag=False)
    cfg = s.cfg
    zs = s.z_list()
    if cfg.mc.start == "mono":
        i = int(np.argmin(np.linalg.norm(s.grid.nodes - cfg.mc.kappa0, axis=-1)))
        ens = mc.ParticleEnsemble.monoenergetic(s.grid, i, cfg.mc.particles, cfg.seed, s.params)
    elif cfg.mc.start == "source":
        i0 = initial_intensity(build_source(cfg), s.params, s.grid)
        ens = mc.ParticleEnsemble.from_intensity(i0, cfg.mc.particles, cfg.seed, s.params)
    else:
        raise ConfigurationError("mc.start must be 'source' or 'mono'", "mc.start")
    summ = []
    for k, z in enumerate(zs):
        if z > ens.z:
            ens = mc.evolve(ens, s.table, z - ens.z, threads=cfg.solver.threads)
        est = mc.estimate_intensity(ens)
        write_csv(s.path(f"mc_{k:03d}.csv"), _kappa_cols(s.params.d) + ["I", "stderr"],
                  np.c_[s.grid.nodes, est.values, est.stderr], s.hash,
                  ["1"] * s.params.d + ["intensity", "intensity"])
        summ.append(mc.summary(ens))
    write_json(s.path("mc_summary.json"), {"seed": cfg.seed, "ranges": summ}, s.hash)
    print(f"mc: {ens.n} particles, {len(zs)} ranges -> {s.out}")
    return 0


def cmd_coherent(args):
    s = _Setup(_load(args))
    a0 = source_amplitudes(build_source(s.cfg), s.params, s.grid)
    T = s.table
    for k, z in enumerate(s.z_list()):
        amp = mean_amplitude(a0, T, z)
        write_csv(s.path(f"coherent_{k:03d}.csv"),
                  _kappa_cols(s.params.d) + ["re_A", "im_A", "abs_A2", "exp_minus_z_over_S"],
                  np.c_[s.grid.nodes, amp.real, amp.imag, np.abs(amp) ** 2, np.exp(-z / T.mfp)],
                  s.hash)
    print(f"coherent -> {s.out}")
    return 0


def cmd_run(args):
    cfg = _load(args, args.scenario)
    out = cfg.output.directory if (args.out is not None or args.config) else None
    rep = run_scenario(args.scenario, cfg, out)
    for line in rep.lines():
        print(line)
    return 0 if rep.passed else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (or file for single-file commands)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one configuration key (repeatable)")
    grid_opts = argparse.ArgumentParser(add_help=False)
    grid_opts.add_argument("--n-kappa", type=int)
    grid_opts.add_argument("--n-radial", type=int)
    grid_opts.add_argument("--n-angular", type=int)
    z_opt = argparse.ArgumentParser(add_help=False)
    z_opt.add_argument("--z", help="ranges, e.g. 0,0.5S,1S,2S (S = mean free path at kappa=0)")

    p = argparse.ArgumentParser(prog="owrte", description="One-way radiative transfer toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("grid", parents=[common, grid_opts], help="dump quadrature nodes and weights").set_defaults(func=cmd_grid)
    sub.add_parser("xsection", parents=[common, grid_opts], help="differential cross-section table").set_defaults(func=cmd_xsection)
    sub.add_parser("mfp", parents=[common, grid_opts], help="mean free paths and Q(kappa)").set_defaults(func=cmd_mfp)
    hg = sub.add_parser("hg", parents=[common], help="Henyey-Greenstein parameters of a Lorentzian medium")
    hg.add_argument("--k-ell", type=float)
    hg.add_argument("--r0", type=float)
    hg.set_defaults(func=cmd_hg)
    sv = sub.add_parser("solve", parents=[common, grid_opts, z_opt], help="angular intensity solve")
    sv.add_argument("--method", choices=["rk4", "matrix_exp"])
    sv.set_defaults(func=cmd_solve)
    sub.add_parser("wigner", parents=[common, grid_opts, z_opt], help="phase-space solve").set_defaults(func=cmd_wigner)
    sub.add_parser("diffuse", parents=[common, grid_opts, z_opt], help="kappa-diffusion comparison").set_defaults(func=cmd_diffuse)
    m = sub.add_parser("mc", parents=[common, grid_opts, z_opt], help="Monte Carlo particle transport")
    m.add_argument("--particles", type=lambda v: int(float(v)))
    m.set_defaults(func=cmd_mc)
    sub.add_parser("coherent", parents=[common, grid_opts, z_opt], help="mean field decay").set_defaults(func=cmd_coherent)
    r = sub.add_parser("run", parents=[common], help="named validation scenario")
    r.add_argument("scenario", choices=SCENARIOS)
    r.set_defaults(func=cmd_run)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OWRTEError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
