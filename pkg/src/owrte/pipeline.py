"""Construct model objects from a RunConfig."""

import numpy as np

from .coherent import SourceModel
from .errors import ConfigurationError
from .geometry import TransportParams, make_grid
from .medium import spectrum_from_config
from .xsection import mean_free_path


def build_params(cfg):
    p = cfg.params
    return TransportParams(p.k, p.ell, p.alpha, p.d, p.kappa_max)


def build_spectrum(cfg, params):
    m = cfg.medium
    block = {"type": m.type, "variance_scale": m.variance_scale, "r0": m.r0,
             "q_cutoff": m.q_cutoff}
    if m.path is not None:
        block["path"] = m.path
    return spectrum_from_config(block, params.d_total)


def build_grid(cfg, params, **kw):
    g = cfg.grid
    res = g.n_kappa if params.d == 1 else (g.n_kappa if g.rule == "midpoint" else (g.n_radial, g.n_angular))
    options = {"rule": g.rule, "half_width": g.half_width}
    options.update(kw)
    return make_grid(params, res, **options)


def build_source(cfg):
    s = cfg.source
    samples = None
    if s.kind == "tabulated":
        if s.samples_path is None:
            raise ConfigurationError("tabulated source needs samples_path", "source.samples_path")
        try:
            data = np.loadtxt(s.samples_path, delimiter=",", comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read source samples: {exc}", "source.samples_path") from None
        samples = (tuple(data[:, 0]), tuple(data[:, 1]))
    return SourceModel(s.kind, s.kappa_width, samples, s.normalization)


def parse_z(text, s0):
    """Parse a range list like '0,0.5S,1S,2S'; a trailing S means units of S(0)."""
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if tok.upper().endswith("S"):
                head = tok[:-1].strip()
                out.append((float(head) if head else 1.0) * s0)
            else:
                out.append(float(tok))
        except ValueError:
            raise ConfigurationError(f"cannot parse range {tok!r}", "solver.z") from None
    z = np.asarray(out)
    if z.size == 0 or np.any(z < 0) or np.any(np.diff(z) < 0):
        raise ConfigurationError("ranges must be a nondecreasing list of nonnegative values",
                                 "solver.z")
    return z


def s_at_zero(params, spectrum, grid):
    return float(mean_free_path(params, spectrum, np.zeros(params.d), grid))
