"""
Particle simulation of the jump process behind the transport equation.

Particles sit on the nodes of an angular grid, fly exponentially
distributed ranges with rate Sigma_i, drift transversally with velocity
kappa / beta, and jump to node j with probability w_j Q_ij / Sigma_i.
Because the chain lives on the same nodes as the deterministic solver,
Monte Carlo and deterministic results differ by sampling error only.

Random streams: one Philox stream per chunk of ``CHUNK`` particles,
spawned from ``SeedSequence(seed)``.  Results do not depend on the number
of worker threads.
"""

import copy
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, GridMismatchError
from .geometry import group_velocity
from .transport.fields import IntensityField

CHUNK = 1 << 16
NO_SCATTER = -1


def build_alias_tables(table):
    """Vose alias tables for every row of the jump law w_j Q_ij / Sigma_i.

    Returns ``(prob, alias)``, both (n, n).  Rows with Sigma_i = 0 get
    ``alias = NO_SCATTER``.
    """
    n = table.n
    P = table.q_matrix * table.grid.weights[None, :]
    prob = np.ones((n, n))
    alias = np.tile(np.arange(n), (n, 1))
    for i in range(n):
        s = table.sigma[i]
        if not s > 0:
            alias[i] = NO_SCATTER
            prob[i] = 0.0
            continue
        p = P[i] * (n / s)
        small = [j for j in range(n) if p[j] < 1.0]
        large = [j for j in range(n) if p[j] >= 1.0]
        while small and large:
            lo = small.pop()
            hi = large[-1]
            prob[i, lo] = p[lo]
            alias[i, lo] = hi
            p[hi] -= 1.0 - p[lo]
            if p[hi] < 1.0:
                large.pop()
                small.append(hi)
        for j in large + small:
            prob[i, j] = 1.0
    prob.flags.writeable = False
    alias.flags.writeable = False
    return prob, alias


def sample_scatter(table, kappa_index, rng):
    """Post-scatter node index for each entry of ``kappa_index``.

    Returns ``NO_SCATTER`` for nodes of a non-scattering row.
    """
    prob, alias = table.alias
    idx = np.asarray(kappa_index)
    n = table.n
    col = rng.integers(0, n, size=idx.shape)
    u = rng.random(size=idx.shape)
    keep = u < prob[idx, col]
    out = np.where(keep, col, alias[idx, col])
    return out if out.ndim else int(out)


def sample_flights(table, kappa_index, rng):
    """Exponential free-flight ranges with rate Sigma at each node (inf if Sigma = 0)."""
    idx = np.asarray(kappa_index)
    e = rng.standard_exponential(size=idx.shape)
    s = table.sigma[idx]
    with np.errstate(divide="ignore"):
        return np.where(s > 0, e / np.where(s > 0, s, 1.0), np.inf)


def _streams(seed, n_particles):
    n_chunks = max(1, -(-n_particles // CHUNK))
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    return [np.random.Generator(np.random.Philox(s)) for s in seqs]


def _chunks(n):
    return [slice(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]


@dataclass(eq=False)
class ParticleEnsemble:
    """State of N particles: node index, transverse position, scatter count.

    Use the ``from_intensity`` and ``monoenergetic`` constructors.
    """

    grid: object
    kappa_index: np.ndarray
    x: np.ndarray
    n_scatter: np.ndarray
    z: float
    rng_seed: int
    params: Optional[object] = None
    monoenergetic_start: bool = False
    _rngs: list = field(default_factory=list, repr=False)

    @property
    def n(self):
        return self.kappa_index.size

    @property
    def kappa(self):
        return self.grid.nodes[self.kappa_index]

    @classmethod
    def from_intensity(cls, intensity, n_particles, seed, params=None, x0=None):
        """Start nodes drawn with probability proportional to w_i I_i."""
        n_particles = int(n_particles)
        if n_particles < 1:
            raise ConfigurationError("need at least one particle", "mc.particles")
        g = intensity.grid
        p = g.weights * np.maximum(intensity.values, 0.0)
        if not p.sum() > 0:
            raise ConfigurationError("initial intensity has zero total", "source")
        cdf = np.cumsum(p / p.sum())
        cdf[-1] = 1.0
        rngs = _streams(seed, n_particles)
        idx = np.empty(n_particles, dtype=np.int64)
        for sl, rng in zip(_chunks(n_particles), rngs):
            idx[sl] = np.searchsorted(cdf, rng.random(sl.stop - sl.start), side="right")
        return cls._make(g, idx, seed, params, x0, rngs, bool(np.count_nonzero(p) == 1))

    @classmethod
    def monoenergetic(cls, grid, index, n_particles, seed, params=None, x0=None):
        """All particles start at node ``index``."""
        n_particles = int(n_particles)
        if n_particles < 1:
            raise ConfigurationError("need at least one particle", "mc.particles")
        idx = np.full(n_particles, int(index), dtype=np.int64)
        return cls._make(grid, idx, seed, params, x0, _streams(seed, n_particles), True)

    @classmethod
    def _make(cls, grid, idx, seed, params, x0, rngs, mono):
        x = np.zeros((idx.size, grid.d))
        if x0 is not None:
            x += np.asarray(x0, dtype=float)
        return cls(grid, idx, x, np.zeros(idx.size, dtype=np.int64), 0.0, int(seed), params,
                   mono, rngs)

    def copy(self):
        return ParticleEnsemble(self.grid, self.kappa_index.copy(), self.x.copy(),
                                self.n_scatter.copy(), self.z, self.rng_seed, self.params,
                                self.monoenergetic_start, copy.deepcopy(self._rngs))


def _evolve_chunk(table, vel, idx, x, ns, rng, dz):
    remaining = np.full(idx.size, float(dz))
    active = np.arange(idx.size)
    while active.size:
        i = idx[active]
        tau = sample_flights(table, i, rng)
        done = tau >= remaining[active]
        step = np.where(done, remaining[active], tau)
        x[active] += vel[i] * step[:, None]
        remaining[active] -= step
        active = active[~done]
        if active.size:
            idx[active] = sample_scatter(table, idx[active], rng)
            ns[active] += 1


def evolve(ensemble, table, dz, threads=1):
    """Advance every particle by range ``dz``; returns a new ensemble.

    The input ensemble is left unchanged.  ``threads`` workers process
    particle chunks; each chunk keeps its own random stream, so the result
    is identical for any thread count.
    """
    if not dz > 0:
        raise ValueError("dz must be positive")
    if not table.grid.same_as(ensemble.grid):
        raise GridMismatchError("ensemble and table use different grids")
    ens = ensemble.copy()
    vel = group_velocity(table.grid.nodes)
    jobs = [(sl, rng) for sl, rng in zip(_chunks(ens.n), ens._rngs)]

    def run(job):
        sl, rng = job
        idx, x, ns = ens.kappa_index[sl].copy(), ens.x[sl].copy(), ens.n_scatter[sl].copy()
        _evolve_chunk(table, vel, idx, x, ns, rng, dz)
        return sl, idx, x, ns

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    for sl, idx, x, ns in results:   # ordered merge
        ens.kappa_index[sl] = idx
        ens.x[sl] = x
        ens.n_scatter[sl] = ns
    ens.z = ensemble.z + float(dz)
    return ens


def estimate_intensity(ensemble, grid=None):
    """Histogram estimate I_i = count_i / (N w_i) with binomial standard errors.

    The standard error uses ``max(p, 1/N)`` for the bin probability so that
    empty bins are not reported as exact.
    """
    grid = ensemble.grid if grid is None else grid
    N = ensemble.n
    if N == 0:
        raise ValueError("empty ensemble")
    if not grid.same_as(ensemble.grid):
        raise GridMismatchError("estimator grid differs from the ensemble grid")
    counts = np.bincount(ensemble.kappa_index, minlength=grid.n).astype(float)
    p = counts / N
    se = np.sqrt(np.maximum(p, 1.0 / N) * (1.0 - p) / N) / grid.weights
    return IntensityField(grid, p / grid.weights, ensemble.z, se)


def estimate_coherent(ensemble):
    """Fraction of never-scattered particles and its binomial standard error."""
    if not ensemble.monoenergetic_start:
        warnings.warn("coherent estimate from a non-monoenergetic start mixes decay rates",
                      RuntimeWarning, stacklevel=2)
    N = ensemble.n
    f = float(np.count_nonzero(ensemble.n_scatter == 0)) / N
    return f, float(np.sqrt(f * (1.0 - f) / N))


def summary(ensemble):
    """Survival fraction, mean scatter count and kappa variance of an ensemble."""
    f, se = estimate_coherent(ensemble) if ensemble.monoenergetic_start else (
        float(np.mean(ensemble.n_scatter == 0)), float("nan"))
    k = ensemble.kappa
    return {"z": ensemble.z, "particles": ensemble.n, "survival": f, "survival_stderr": se,
            "mean_n_scatter": float(ensemble.n_scatter.mean()),
            "kappa_variance": float(np.sum(k.var(axis=0)))}
