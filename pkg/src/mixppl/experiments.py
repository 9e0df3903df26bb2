"""The three benchmark comparisons: GPA, Scale and Aircraft-Tracking.

Each experiment runs a lexicographic engine next to its naive counterpart over
a sweep of sample counts and seeds, and returns per-run rows plus a summary.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .dsl import MODELS_DIR, load_model
from .infer import llw_run, lpf_run, naive_lw_run, naive_pf_run
from .verify import (generate_ssm_dataset, gpa_naive_limit, read_truth_csv, scale_naive_limit,
                     truth_csv)

AIRCRAFT_DATA_SEED = 5
AIRCRAFT_T = 8


def aircraft_dataset(seed=AIRCRAFT_DATA_SEED, T=AIRCRAFT_T):
    """Regenerate the bundled aircraft model text and its ground-truth CSV."""
    base = (MODELS_DIR / "aircraft_model.blog").read_text(encoding="utf-8")
    model = load_model(base)
    obs, rows = generate_ssm_dataset(model, T, seed, observed=["obs_dist"])
    header = f"// synthetic radar readings: T = {T}, data seed {seed}\n"
    return base + header + obs, truth_csv(rows)


def load_aircraft():
    """The bundled aircraft model with data, and its truth rows."""
    return load_model("aircraft"), read_truth_csv(MODELS_DIR / "aircraft_truth.csv")


def trajectory_mse(results, truth):
    """Mean over steps of the squared Euclidean error of the (X, Y) estimate."""
    errs = []
    for r, row in zip(results, truth):
        t = r.step
        errs.append((r[f"X(@{t})"] - row["X_true"]) ** 2 + (r[f"Y(@{t})"] - row["Y_true"]) ** 2)
    return float(np.mean(errs))


def _summary(rows, key, value="estimate"):
    out = {}
    for r in rows:
        out.setdefault(tuple(r[k] for k in key), []).append(r[value])
    return [dict(zip(key, k), mean=float(np.mean(v)), sd=float(np.std(v)), runs=len(v))
            for k, v in out.items()]


def gpa_experiment(samples=(100, 1000, 10000), seeds=range(5), threads=1):
    model = load_model("gpa_two_country")
    label = model.queries[0].label
    rows = []
    for k in samples:
        for s in seeds:
            for algo, run in (("llw", llw_run), ("lw", naive_lw_run)):
                est = run(model, k, s, threads=threads)
                rows.append({"algo": algo, "samples": k, "seed": s, "estimate": est[label]})
    summary = _summary(rows, ("algo", "samples"))
    for row in summary:
        row["reference"] = 1.0 if row["algo"] == "llw" else gpa_naive_limit()
    return rows, summary


def scale_experiment(sigmas=(1.0, 2.0, 4.0), samples=(100, 1000, 10000), seeds=range(5), threads=1):
    base = load_model("scale")
    rows = []
    for sigma in sigmas:
        model = base.with_fixed(sigma=float(sigma))
        for k in samples:
            for s in seeds:
                for algo, run in (("llw", llw_run), ("lw", naive_lw_run)):
                    est = run(model, k, s, threads=threads)
                    rows.append({"algo": algo, "sigma": float(sigma), "samples": k, "seed": s,
                                 "estimate": est["hasFakeCoin"]})
    summary = _summary(rows, ("algo", "sigma", "samples"))
    for row in summary:
        row["reference"] = 0.0 if row["algo"] == "llw" else scale_naive_limit(row["sigma"])
    return rows, summary


def aircraft_experiment(particles=(100, 1000, 10000), seeds=range(20), threads=1):
    model, truth = load_aircraft()
    rows = []
    for k in particles:
        for s in seeds:
            for algo, run in (("lpf", lpf_run), ("pf", naive_pf_run)):
                res = run(model, k, s, threads=threads)
                rows.append({"algo": algo, "particles": k, "seed": s, "mse": trajectory_mse(res, truth)})
    return rows, _summary(rows, ("algo", "particles"), "mse")


def to_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def write_report(out_dir, name, rows, summary):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}_runs.csv").write_text(to_csv(rows), encoding="utf-8")
    (out / f"{name}_summary.csv").write_text(to_csv(summary), encoding="utf-8")
    return out / f"{name}_runs.csv", out / f"{name}_summary.csv"


def format_table(summary):
    keys = list(summary[0])
    widths = [max(len(k), *(len(_cell(r[k])) for r in summary)) for k in keys]
    lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths))]
    for r in summary:
        lines.append("  ".join(_cell(r[k]).ljust(w) for k, w in zip(keys, widths)))
    return "\n".join(lines)


def _cell(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)
