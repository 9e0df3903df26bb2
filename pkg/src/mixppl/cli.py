"""Command-line front end: ``mixppl run`` and ``mixppl experiment``.

Exit codes: 0 success, 2 model errors (including a missing file), 3 inference
errors. Errors are printed to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import experiments as X
from .dsl import MODELS_DIR, load_model
from .errors import MixPPLError
from .infer import irlw_run, llw_run, lpf_run, naive_lw_run, naive_pf_run, trace_rows
from .model.world import DEFAULT_OBJECT_CAP

SCHEMA = 1
ALGOS = ("llw", "lw", "lpf", "pf", "irlw")


def _seed(value):
    if value is not None:
        return value
    env = os.environ.get("MIXPPL_SEED")
    return int(env) if env else 0


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="mixppl", description="Inference for mixed discrete/continuous models.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one inference engine on a model file")
    r.add_argument("--model", required=True, help="path to a .blog file, or a bundled model name")
    r.add_argument("--algo", choices=ALGOS, default="llw")
    r.add_argument("--samples", type=int, help="number of samples (weighting engines)")
    r.add_argument("--particles", type=int, help="number of particles (filters)")
    r.add_argument("--seed", type=int, help="random seed (default: $MIXPPL_SEED, else 0)")
    r.add_argument("--irlw-n", type=int, default=20, help="IRLW refinement level")
    r.add_argument("--atom-tol", type=float, default=0.0, help="absolute tolerance for matching atoms")
    r.add_argument("--output", choices=("json", "csv"), default="json")
    r.add_argument("--trace", help="write a convergence trace CSV here")
    r.add_argument("--object-cap", type=int, default=DEFAULT_OBJECT_CAP)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--systematic", action="store_true", help="systematic instead of multinomial resampling")

    e = sub.add_parser("experiment", help="run a benchmark comparison")
    e.add_argument("name", choices=("gpa", "scale", "aircraft"))
    e.add_argument("--samples", type=_ints, default=[100, 1000, 10000])
    e.add_argument("--particles", type=_ints, default=[100, 1000, 10000])
    e.add_argument("--sigma", type=_floats, default=[1.0, 2.0, 4.0])
    e.add_argument("--seeds", type=int, default=None, help="number of seeds (default 5; 20 for aircraft)")
    e.add_argument("--seed", type=int, help="first seed of the sweep (default: $MIXPPL_SEED, else 0)")
    e.add_argument("--out", default="results", help="directory for the CSV reports")
    e.add_argument("--threads", type=int, default=1)
    return p


def _model_source(name):
    path = Path(name)
    if path.exists():
        return path
    if (MODELS_DIR / path.name).exists() and path.parent == Path("."):
        return MODELS_DIR / path.name
    if name.isidentifier() and not (MODELS_DIR / f"{name}.blog").exists():
        raise FileNotFoundError(2, "no such file or bundled model", name)
    return path if path.suffix or os.sep in name else name


def _run(args):
    model = load_model(_model_source(args.model))
    seed = _seed(args.seed)
    common = {"object_cap": args.object_cap, "threads": args.threads}
    k = args.particles if args.algo in ("lpf", "pf") else args.samples
    k = k or args.samples or args.particles or (1000 if args.algo in ("lpf", "pf") else 10000)
    if args.algo in ("lpf", "pf"):
        run = lpf_run if args.algo == "lpf" else naive_pf_run
        steps = run(model, k, seed, atom_tol=args.atom_tol, systematic=args.systematic, **common)
        flat = {}
        for s in steps:
            flat.update(s.estimates)
        doc = {"schema": SCHEMA, "algo": args.algo, "seed": seed, "particles": k, **flat,
               "steps": [{"t": s.step, "d_star": s.d_star, "surviving": s.surviving_count, "ess": s.ess}
                         for s in steps]}
        rows = [(args.algo, s.step, label, v, s.d_star, s.surviving_count, s.ess)
                for s in steps for label, v in s.estimates.items()]
        trace = trace_rows(args.algo, seed, steps)
    else:
        want_trace = bool(args.trace)
        if args.algo == "irlw":
            est = irlw_run(model, k, args.irlw_n, seed, trace=want_trace, **common)
        else:
            run = llw_run if args.algo == "llw" else naive_lw_run
            est = run(model, k, seed, atom_tol=args.atom_tol, trace=want_trace, **common)
        doc = {"schema": SCHEMA, "algo": args.algo, "seed": seed, "samples": k, **est.estimates,
               "d_star": est.d_star, "surviving": est.surviving_count, "ess": est.ess}
        rows = [(args.algo, "", label, v, est.d_star, est.surviving_count, est.ess)
                for label, v in est.estimates.items()]
        trace = trace_rows(args.algo, seed, est)
    if args.trace:
        _write_csv(args.trace, ("engine", "seed", "index", "query", "estimate"), trace)
    if args.output == "json":
        return json.dumps(doc, indent=1) + "\n"
    return _csv_text(("algo", "step", "query", "estimate", "d_star", "surviving", "ess"), _expand(rows))


def _expand(rows):
    out = []
    for algo, step, label, v, d, n, ess in rows:
        if isinstance(v, dict):
            for value, p in v.items():
                out.append((algo, step, f"{label} = {value}", p, d, n, ess))
        else:
            out.append((algo, step, label, v, d, n, ess))
    return out


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _write_csv(path, header, rows):
    Path(path).write_text(_csv_text(header, rows), encoding="utf-8")


def _experiment(args):
    first = _seed(args.seed)
    n = args.seeds or (20 if args.name == "aircraft" else 5)
    seeds = range(first, first + n)
    if args.name == "gpa":
        rows, summary = X.gpa_experiment(args.samples, seeds, args.threads)
    elif args.name == "scale":
        rows, summary = X.scale_experiment(args.sigma, args.samples, seeds, args.threads)
    else:
        rows, summary = X.aircraft_experiment(args.particles, seeds, args.threads)
    runs, table = X.write_report(args.out, args.name, rows, summary)
    return X.format_table(summary) + f"\n\nwrote {runs} and {table}\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        out = _run(args) if args.command == "run" else _experiment(args)
    except FileNotFoundError as exc:
        return _fail("FileNotFound", 2, f"no such file: {exc.filename or exc}")
    except MixPPLError as exc:
        return _fail(type(exc).__name__, exc.exit_code, str(exc))
    except ValueError as exc:
        return _fail("InvalidArgument", 2, str(exc))
    sys.stdout.write(out)
    return 0


def _fail(kind, code, message):
    sys.stderr.write(json.dumps({"error": kind, "exit": code, "message": message}) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
