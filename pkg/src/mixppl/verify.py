"""Reference oracles: exhaustive enumeration, quadrature, and synthetic data.

Nothing here is used by the inference engines. Enumeration walks the lazy
world semantics with every random choice replaced by a branch over the
kernel's finite support; quadrature uses scipy distributions directly.
"""
from __future__ import annotations

import csv
import io
import itertools
import math

import numpy as np
from scipy import integrate

from .errors import EnumerationError
from .model.values import BasicRV, Timestep, format_value
from .model.world import DEFAULT_OBJECT_CAP, World, query_targets

MAX_WORLDS = 10**6


def exact_posterior_discrete(model, max_worlds=MAX_WORLDS, object_cap=DEFAULT_OBJECT_CAP):
    """Exact posterior of every query by enumerating all worlds.

    Every kernel met along the way must have finite support. Probability
    queries map to floats, real/integer queries to posterior means, and other
    queries to ``{value: probability}``.
    """
    queries = query_targets(model)
    total = 0.0
    acc = [dict() for _ in queries]
    prefix = []
    worlds = 0
    while True:
        worlds += 1
        if worlds > max_worlds:
            raise EnumerationError(f"more than {max_worlds} worlds")
        sizes = []
        path = []
        prob = [1.0]

        def draw(brv, kernel):
            support = [(v, p) for v, p in kernel.support() if p > 0]
            i = len(sizes)
            idx = prefix[i] if i < len(prefix) else 0
            sizes.append(len(support))
            path.append(idx)
            v, p = support[idx]
            prob[0] *= p
            return v

        w = World(model, object_cap=object_cap, draw=draw)
        w.observe(model.evidence)
        weight = 1.0
        for ev in model.evidence:
            _, term = w.evidence_term(ev)
            if not term.is_mass:
                raise EnumerationError(f"evidence {ev.label} has a density; enumeration needs masses")
            weight *= term.value
        values = [w.eval(q.expr, env) for _, q, env in queries]
        weight *= prob[0]
        if weight > 0:
            total += weight
            for a, v in zip(acc, values):
                a[v] = a.get(v, 0.0) + weight
        # advance to the next unexplored branch
        j = len(path) - 1
        while j >= 0 and path[j] + 1 >= sizes[j]:
            j -= 1
        if j < 0:
            break
        prefix = path[:j] + [path[j] + 1]
    if total <= 0:
        raise EnumerationError("evidence has probability zero")
    out = {}
    for (label, q, _), a in zip(queries, acc):
        if q.kind == "probability":
            out[label] = sum(p for v, p in a.items() if v) / total
        elif q.kind == "mean":
            out[label] = sum(v * p for v, p in a.items() if v is not None) / total
        else:
            out[label] = {format_value(v): p / total for v, p in sorted(a.items(), key=lambda kv: str(kv[0]))}
    return out


def expected_density_at(latent, observation, y, rel_tol=1e-6):
    """``E[f(y | D)]`` for ``D ~ latent`` by adaptive quadrature.

    ``latent`` is a frozen ``scipy.stats`` continuous distribution, or a plain
    number for a point mass. ``observation(m)`` returns the frozen scipy
    distribution of the observation given latent value ``m``.
    """
    if isinstance(latent, (int, float)):
        return float(observation(float(latent)).pdf(y))
    lo, hi = latent.support()
    if lo > hi:
        lo, hi = hi, lo
    val, err = integrate.quad(lambda m: latent.pdf(m) * observation(m).pdf(y), lo, hi,
                              epsabs=0.0, epsrel=rel_tol * 1e-3, limit=200)
    if not math.isfinite(val) or err > rel_tol * max(abs(val), 1e-300):
        raise ValueError(f"quadrature did not converge (value {val}, error {err})")
    return float(val)


def scale_naive_limit(sigma):
    """Limit of naive weighting on the scale model: P(fake coin | balanced reading)."""
    from scipy import stats

    diff = stats.truncnorm((0.1 - 0.5) / 1.0, (1.0 - 0.5) / 1.0, loc=0.5, scale=1.0)
    e = expected_density_at(diff, lambda m: stats.norm(loc=m, scale=sigma), 0.0)
    return 0.5 * e / (0.5 * e + 0.5)


def gpa_naive_limit():
    """Limit of naive weighting on the one-student GPA model."""
    usa = 0.5 * 0.01
    india = 0.5 * 0.99 / 10.0
    return usa / (usa + india)


def irlw_gpa_cell_limit(n):
    """IRLW's limit on the one-student GPA model at refinement ``n`` (y = 4)."""
    width = 2.0 ** -n
    usa = 0.01 + 0.99 * width / 4.0
    india = 0.99 * width / 10.0
    return usa / (usa + india)


# -- synthetic state-space data ---------------------------------------------------

def _observed_functions(model):
    names = []
    for ev in model.evidence:
        if ev.fn not in names:
            names.append(ev.fn)
    return names


def _latent_functions(model, observed):
    return [f.name for f in model.functions.values()
            if f.kind == "random" and f.param_types == ("Timestep",) and f.name not in observed
            and f.ret_type in ("Real", "Integer")]


def generate_ssm_dataset(model, T, seed, observed=None, object_cap=DEFAULT_OBJECT_CAP):
    """Forward-simulate ``@0..@T`` and return ``(obs_text, truth_rows)``.

    ``observed`` names the observation functions (default: those observed in
    ``model``); they are recorded for every combination of constants in their
    non-time arguments. ``truth_rows`` holds one dict per step with the latent
    real functions of time, keyed ``t`` and ``<name>_true``.
    """
    observed = list(observed or _observed_functions(model))
    if not observed:
        raise ValueError("no observation functions given or observed in the model")
    prior = model.without_evidence()
    world = World(prior, np.random.default_rng(seed), object_cap=object_cap)
    latents = _latent_functions(prior, observed)
    lines = []
    rows = []
    for t in range(T + 1):
        ts = Timestep(t)
        row = {"t": t}
        for name in latents:
            row[f"{name}_true"] = world.lookup(BasicRV("function", name, (ts,)))
        for name in observed:
            f = prior.functions[name]
            others = [prior.constants_by_type.get(pt, []) for pt in f.param_types if pt != "Timestep"]
            for combo in itertools.product(*others):
                args, rest = [], iter(combo)
                for pt in f.param_types:
                    args.append(ts if pt == "Timestep" else next(rest))
                value = world.lookup(BasicRV("function", name, tuple(args)))
                lines.append(f"obs {name}({', '.join(format_value(a) for a in args)}) = "
                             f"{format_value(value)};")
        rows.append(row)
    return "\n".join(lines) + "\n", rows


def truth_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: format_value(v) for k, v in r.items()})
    return buf.getvalue()


def read_truth_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: (int(v) if k == "t" else float(v)) for k, v in row.items()} for row in csv.DictReader(fh)]
