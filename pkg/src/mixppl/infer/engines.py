"""Importance-sampling engines: LLW, naive LW, IRLW, LPF and naive PF.

Samples are drawn in fixed-size chunks. Chunk ``c`` of stage ``s`` uses the
generator ``default_rng([seed, s, c])``; likelihood weighting is stage 0 and
the particle filters propagate step ``t`` in stage ``t``. Results are reduced
in chunk order, so serial and threaded runs agree bit for bit and a one-step
filter draws exactly the samples that likelihood weighting draws.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..dist import Dist
from ..errors import DegeneracyError, UnsupportedModelError, ZeroWeightError
from ..model.batch import BatchWorld, as_lanes
from ..model.world import DEFAULT_OBJECT_CAP, World, coerce, query_targets
from .weights import (effective_sample_size, fold_terms, lexicographic_estimate,
                      normalized_weights, surviving)

CHUNK = 8192
RESAMPLE_STAGE = 2**32 - 1


@dataclass
class PosteriorEstimate:
    """Per-query estimates from one engine run (or one filter step)."""

    estimates: dict
    d_star: int
    surviving_count: int
    ess: float
    samples: int
    algo: str = ""
    step: int = None
    trace: list = field(default_factory=list)
    weights: object = None  # (d, logw) arrays, or normalised weights for a filter step
    values: dict = None  # per-sample query values keyed by label

    def __getitem__(self, label):
        return self.estimates[label]

    def __iter__(self):
        return iter(self.estimates)


@dataclass(frozen=True)
class Options:
    atom_tol: float = 0.0
    object_cap: int = DEFAULT_OBJECT_CAP
    threads: int = 1
    vectorize: bool = True


def as_seed(seed):
    """An integer seed from an int, None, or a numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**63))
    if seed is None:
        return 0
    return int(seed)


def chunk_rng(seed, stage, chunk):
    return np.random.default_rng([seed, stage, chunk])


def _chunks(n):
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def _map(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _options(atom_tol, object_cap, threads, vectorize):
    return Options(atom_tol, object_cap, threads, vectorize)


# -- one population of samples -------------------------------------------------

class Population:
    """K sampled worlds, vectorised when the model allows it."""

    def __init__(self, model, size, opts):
        self.model = model
        self.size = size
        self.opts = opts
        self.vector = opts.vectorize and model.batchable
        if self.vector:
            self.batch = BatchWorld(model, size, atom_tol=opts.atom_tol)
            self.batch.observe(model.evidence)
        else:
            self.worlds = []
            for _ in range(size):
                self.worlds.append(World(model, object_cap=opts.object_cap, atom_tol=opts.atom_tol))

    def split(self):
        out = []
        for start, n in _chunks(self.size):
            part = Population.__new__(Population)
            part.__dict__.update(self.__dict__)
            part.size = n
            if self.vector:
                part.batch = self.batch.take(np.arange(start, start + n))
            else:
                part.worlds = self.worlds[start:start + n]
            out.append(part)
        return out

    @staticmethod
    def join(parts):
        out = Population.__new__(Population)
        out.__dict__.update(parts[0].__dict__)
        out.size = sum(p.size for p in parts)
        if out.vector:
            out.batch = BatchWorld.concat([p.batch for p in parts])
        else:
            out.worlds = [w for p in parts for w in p.worlds]
        return out

    def take(self, idx):
        out = Population.__new__(Population)
        out.__dict__.update(self.__dict__)
        out.size = len(idx)
        if self.vector:
            out.batch = self.batch.take(idx)
        else:
            out.worlds = [self.worlds[i].copy() for i in idx]
        return out

    def advance(self, rng, evidence, queries, score):
        """Instantiate ``evidence`` and ``queries`` in every lane.

        ``score(kernel, y)`` turns an evidence kernel into ``(is_mass, value)``;
        when None the kernel's mass-or-density at the observation is used.
        Returns the evidence terms and the query values as lane arrays.
        """
        n = self.size
        if self.vector:
            bw = self.batch
            bw.rng = rng
            terms = []
            for ev in evidence:
                t = bw.evidence_term(ev)
                if score is not None:
                    t = score(bw.evidence_kernel(ev), ev.value)
                    t = (as_lanes(t[0], n, "Bool"), as_lanes(t[1], n, "Real"))
                terms.append(t)
            values = [bw.lanes(bw.eval(q.expr, env), q.value_type) for _, q, env in queries]
            return terms, values
        is_mass = np.ones((len(evidence), n), dtype=bool)
        value = np.ones((len(evidence), n))
        raw = [[None] * n for _ in queries]
        for i, w in enumerate(self.worlds):
            w.rng = rng
            if not hasattr(w, "evidence_rv"):
                w.observe(self.model.evidence)
            for j, ev in enumerate(evidence):
                brv, term = w.evidence_term(ev)
                if score is not None:
                    m, v = score(w.evidence_kernel(ev), ev.value)
                    is_mass[j, i], value[j, i] = bool(m), float(v)
                else:
                    is_mass[j, i], value[j, i] = term.is_mass, term.value
            for j, (_, q, env) in enumerate(queries):
                raw[j][i] = coerce(w.eval(q.expr, env), q.value_type)
        values = [_lane_array(r, q.value_type) for r, (_, q, _) in zip(raw, queries)]
        return list(zip(is_mass, value)), values


def _lane_array(values, type_name):
    if type_name in ("Real", "Integer"):
        return np.array([np.nan if v is None else v for v in values], dtype=float)
    if type_name == "Bool":
        return np.array([bool(v) for v in values], dtype=bool)
    arr = np.empty(len(values), dtype=object)
    arr[:] = values
    return arr


def _concat_lanes(chunks):
    """Join per-chunk (terms, values) results in chunk order."""
    terms = [(np.concatenate([c[0][j][0] for c in chunks]), np.concatenate([c[0][j][1] for c in chunks]))
             for j in range(len(chunks[0][0]))]
    values = [np.concatenate([c[1][j] for c in chunks]) for j in range(len(chunks[0][1]))]
    return terms, values


# -- estimation ----------------------------------------------------------------

def _query_estimate(d, logw, q, f):
    if q.kind == "probability":
        fv = np.array([bool(x) if x is not None else False for x in f], dtype=float) \
            if f.dtype == object else f.astype(float)
        return lexicographic_estimate(d, logw, fv)[0]
    if q.kind == "mean":
        return lexicographic_estimate(d, logw, np.asarray(f, dtype=float))[0]
    keep, _ = surviving(d, logw)
    w = normalized_weights(d, logw)
    dist = {}
    for v, wi in zip(f[keep], w[keep]):
        key = "null" if v is None else str(v)
        dist[key] = dist.get(key, 0.0) + float(wi)
    return dict(sorted(dist.items()))


def _estimate(d, logw, queries, values, algo, samples, step=None):
    keep, d_star = surviving(d, logw)
    if d_star is None:
        raise ZeroWeightError(f"{algo}: all {samples} samples have zero weight")
    estimates = {label: _query_estimate(d, logw, q, f) for (label, q, _), f in zip(queries, values)}
    return PosteriorEstimate(estimates, d_star, int(keep.sum()), effective_sample_size(d, logw),
                             samples, algo, step,
                             values={label: f for (label, _, _), f in zip(queries, values)})


def _checkpoints(k, points=40):
    return sorted(set(np.unique(np.geomspace(1, k, points).astype(int)).tolist()) | {k})


def _trace(d, logw, queries, values):
    rows = []
    for i in _checkpoints(len(d)):
        _, d_star = surviving(d[:i], logw[:i])
        if d_star is None:
            continue
        est = {label: _query_estimate(d[:i], logw[:i], q, f[:i])
               for (label, q, _), f in zip(queries, values)}
        rows.append((i, est))
    return rows


# -- likelihood weighting family ----------------------------------------------------

def _check_run(model, k):
    if k < 1:
        raise ValueError("need at least one sample")
    if not model.queries:
        raise UnsupportedModelError("model has no query")


def _weighting_run(model, k, seed, algo, lexicographic, score, opts, trace):
    _check_run(model, k)
    seed = as_seed(seed)
    queries = query_targets(model)
    evidence = list(model.evidence)

    def work(chunk):
        c, (start, n) = chunk
        pop = Population(model, n, opts)
        return pop.advance(chunk_rng(seed, 0, c), evidence, queries, score)

    chunks = _map(work, list(enumerate(_chunks(k))), opts.threads)
    terms, values = _concat_lanes(chunks)
    d = np.zeros(k, dtype=np.int64)
    logw = np.zeros(k)
    for is_mass, value in terms:
        d, logw = fold_terms(d, logw, is_mass, value, lexicographic)
    est = _estimate(d, logw, queries, values, algo, k)
    if trace:
        est.trace = _trace(d, logw, queries, values)
    est.weights = (d, logw)
    return est


def llw_run(model, k, seed=None, *, atom_tol=0.0, object_cap=DEFAULT_OBJECT_CAP, threads=1,
            vectorize=True, trace=False):
    """Lexicographic likelihood weighting with ``k`` prior samples."""
    return _weighting_run(model, k, seed, "llw", True, None,
                          _options(atom_tol, object_cap, threads, vectorize), trace)


def naive_lw_run(model, k, seed=None, *, atom_tol=0.0, object_cap=DEFAULT_OBJECT_CAP, threads=1,
                 vectorize=True, trace=False):
    """Ordinary likelihood weighting: masses and densities multiplied alike."""
    return _weighting_run(model, k, seed, "lw", False, None,
                          _options(atom_tol, object_cap, threads, vectorize), trace)


def alpha_n(y, n):
    """Round ``y`` up to the dyadic grid of spacing ``2**-n``."""
    if n < 1:
        raise ValueError("refinement level must be >= 1")
    return np.ldexp(np.ceil(np.ldexp(y, n)), -n)


def cell_probability(kernel, params, y, n):
    """Probability that a draw falls in the dyadic cell ``(a - 2**-n, a]`` holding ``y``."""
    from ..dist import make_kernel

    params = params if isinstance(params, tuple) else ((params,) if params is not None else ())
    k = make_kernel(kernel, *params)
    return float(_cell(k, y, n))


def _cell(kernel: Dist, y, n):
    a = alpha_n(y, n)
    return np.clip(kernel.cdf(a) - kernel.cdf(a - math.ldexp(1.0, -n)), 0.0, 1.0)


def irlw_run(model, k, n, seed=None, *, object_cap=DEFAULT_OBJECT_CAP, threads=1, vectorize=True,
             trace=False):
    """Iterative-refinement weighting at level ``n`` (a slow consistency reference)."""
    for ev in model.evidence:
        if model.functions[ev.fn].ret_type not in ("Real", "Integer"):
            raise UnsupportedModelError(f"IRLW requires real evidence; {ev.label} is "
                                        f"{model.functions[ev.fn].ret_type}")
    if n < 1:
        raise ValueError("refinement level must be >= 1")

    def score(kernel, y):
        return True, _cell(kernel, float(y), n)

    return _weighting_run(model, k, seed, "irlw", False, score,
                          _options(0.0, object_cap, threads, vectorize), trace)


# -- particle filters --------------------------------------------------------------

def _steps(model, horizon):
    if not model.is_ssm():
        raise UnsupportedModelError("model is not timestep-indexed: every random function needs a "
                                    "Timestep argument and every observation a @k literal")
    horizon = model.horizon if horizon is None else horizon
    ev_at = {t: [] for t in range(horizon + 1)}
    for ev in model.evidence:
        s = model.evidence_step(ev)
        if s <= horizon:
            ev_at[s].append(ev)
    q_at = {t: [] for t in range(horizon + 1)}
    for label, q, env in query_targets(model, horizon):
        step = next((v.index for v in env.values() if hasattr(v, "index")), horizon)
        q_at[step].append((label, q, env))
    return horizon, ev_at, q_at


def _resample(rng, w, k, systematic):
    if systematic:
        u = (rng.random() + np.arange(k)) / k
        idx = np.searchsorted(np.cumsum(w), u, side="right")
        return np.minimum(idx, len(w) - 1)
    return rng.choice(len(w), size=k, replace=True, p=w)


def _filter_run(model, k, seed, algo, lexicographic, opts, horizon, systematic, resample_last=False):
    if k < 1:
        raise ValueError("need at least one particle")
    seed = as_seed(seed)
    horizon, ev_at, q_at = _steps(model, horizon)
    pop = Population(model, k, opts)
    results = []
    for t in range(horizon + 1):
        parts = pop.split()

        def work(item, t=t):
            c, part = item
            return part.advance(chunk_rng(seed, t, c), ev_at[t], q_at[t], None)

        chunks = _map(work, list(enumerate(parts)), opts.threads)
        pop = Population.join(parts)
        terms, values = _concat_lanes(chunks)
        d = np.zeros(k, dtype=np.int64)
        logw = np.zeros(k)
        for is_mass, value in terms:
            d, logw = fold_terms(d, logw, is_mass, value, lexicographic)
        _, d_star = surviving(d, logw)
        if d_star is None:
            raise DegeneracyError(t, f"{algo}: every particle has zero weight at step @{t}")
        est = _estimate(d, logw, q_at[t], values, algo, k, step=t)
        w = normalized_weights(d, logw)
        est.weights = w
        results.append(est)
        if t < horizon or resample_last:
            idx = _resample(chunk_rng(seed, RESAMPLE_STAGE, t), w, k, systematic)
            pop = pop.take(idx)
        if pop.size != k:
            raise AssertionError("particle count changed")
    return results


def lpf_run(model, k, seed=None, *, atom_tol=0.0, object_cap=DEFAULT_OBJECT_CAP, threads=1,
            vectorize=True, horizon=None, systematic=False):
    """Lexicographic particle filter; one estimate per timestep."""
    return _filter_run(model, k, seed, "lpf", True, _options(atom_tol, object_cap, threads, vectorize),
                       horizon, systematic)


def naive_pf_run(model, k, seed=None, *, atom_tol=0.0, object_cap=DEFAULT_OBJECT_CAP, threads=1,
                 vectorize=True, horizon=None, systematic=False):
    """Bootstrap particle filter without density counting."""
    return _filter_run(model, k, seed, "pf", False, _options(atom_tol, object_cap, threads, vectorize),
                       horizon, systematic)


def trace_rows(engine, seed, results):
    """Convergence-trace rows ``(engine, seed, index, query, estimate)``."""
    rows = []
    if isinstance(results, PosteriorEstimate):
        for index, est in results.trace:
            for label, v in est.items():
                rows.append((engine, seed, index, label, v))
        return rows
    for r in results:
        for label, v in r.estimates.items():
            rows.append((engine, seed, r.step, label, v))
    return rows
