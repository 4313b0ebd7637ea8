"""Command-line interface: ``vineinfer <subcommand> [options]``.

Subcommands
-----------
filter   raw levels -> differenced, smoothed, ARMA-GARCH filtered residuals and u-scores
fit      u-scores -> vine copula model document
predict  model + data -> conditional quantiles of every variable given the others
stress   model -> medians of all variables with one variable pinned at a high quantile
synth    draw data from one of the four built-in five-dimensional scenarios
compare  repeated train/test comparison of cross-prediction methods

Every run writes ``manifest.json`` next to its outputs.  Exit status is 0
when all artifacts were written, 1 on a pipeline error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import InputError, VineInferError

__all__ = ["main", "build_parser", "read_csv", "write_csv"]

_MODEL_FILE = "model.json"
_MARGINS_FILE = "margins.json"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- CSV helpers

def read_csv(path):
    """Read a header-plus-numbers CSV; returns ``(names, matrix)``."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}, row {lineno}: expected {len(header)} cells, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                bad = next(c for c in row if not _is_number(c))
                raise InputError(f"{path}, row {lineno}: non-numeric cell {bad!r}") from None
            if not all(np.isfinite(vals)):
                raise InputError(f"{path}, row {lineno}: missing or non-finite value")
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=float)


def _is_number(c):
    try:
        float(c)
    except ValueError:
        return False
    return True


def write_csv(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(outdir, command, args, inputs, outputs):
    import scipy

    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    doc = {
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": sorted(Path(p).name for p in outputs),
        "versions": {"vineinfer": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    _write_json(Path(outdir) / "manifest.json", doc)


def _outdir(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _floats(text, what):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"could not parse {what} {text!r}") from None


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise UsageError("--alpha must lie in (0, 1)")


def _load_model(path):
    from .fit import VineModel

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return VineModel.from_dict(doc["vine"]), list(doc.get("variables") or [])


# ---------------------------------------------------------------- subcommands

def cmd_filter(args):
    from .margins.outliers import smooth_outliers
    from .margins.pipeline import MarginPipeline

    names, x = read_csv(args.input)
    out = _outdir(args)
    diffs = np.diff(x, axis=0)
    for j, name in enumerate(names):
        if np.var(diffs[:, j]) == 0.0:
            raise InputError(f"column {name!r}: zero-variance series")
    smoothed = smooth_outliers(diffs, seed=np.random.default_rng([args.seed, 1]))
    pipe, resid = MarginPipeline.fit_series(smoothed.data, names)
    u = pipe.cdf(resid)
    files = [out / "residuals.csv", out / "uscores.csv", out / _MARGINS_FILE, out / "outliers.csv"]
    write_csv(files[0], names, resid)
    write_csv(files[1], names, u)
    _write_json(files[2], pipe.to_dict())
    write_csv(files[3], ["row", "variable", "boundary"],
              [(o.row, names[o.column], int(o.boundary)) for o in smoothed.outliers])
    for name, f in zip(names, pipe.filters):
        if f.at_boundary:
            print(f"warning: {name}: ARMA-GARCH estimate on the parameter boundary", file=sys.stderr)
    _write_manifest(out, "filter", args, [args.input], files)
    print(f"filtered {len(names)} series, {resid.shape[0]} rows; {len(smoothed.outliers)} outliers smoothed")
    return 0


def _read_array_file(path):
    from .vine import validate_array

    text = Path(path).read_text(encoding="utf-8").strip()
    if text.startswith("[") or text.startswith("{"):
        doc = json.loads(text)
        rows = doc["array"] if isinstance(doc, dict) else doc
    else:
        rows = [[int(float(c)) for c in line.replace(",", " ").split()] for line in text.splitlines() if line.strip()]
    return validate_array(np.asarray(rows, dtype=int))


def cmd_fit(args):
    from .fit import fit_vine, format_report, parse_candidates

    names, u = read_csv(args.input)
    out = _outdir(args)
    array = _read_array_file(args.array_file) if args.array_file else None
    if array is not None and array.d != len(names):
        raise InputError(f"array has dimension {array.d} but the data have {len(names)} columns")
    model = fit_vine(u, array=array, candidates=parse_candidates(args.candidates), criterion=args.criterion)
    f = out / _MODEL_FILE
    _write_json(f, {"variables": names, "vine": model.to_dict()})
    _write_manifest(out, "fit", args, [args.input] + ([args.array_file] if args.array_file else []), [f])
    print(format_report(model))
    print(f"overall AIC {model.aic:.3f}  BIC {model.bic:.3f}  loglik {model.loglik:.3f}")
    return 0


def cmd_predict(args):
    from .infer import PredictionRequest, cross_predict
    from .margins.pipeline import ParametricMargins

    model, model_names = _load_model(args.model)
    names, x = read_csv(args.input)
    if model_names and names != model_names:
        raise InputError(f"variable names {names} do not match the model's {model_names}")
    if len(names) != model.d:
        raise InputError(f"model has {model.d} variables, data have {len(names)}")
    margins = None
    if args.margins:
        margins = ParametricMargins.from_dict(json.loads(Path(args.margins).read_text(encoding="utf-8")))
    if args.quantiles:
        qs = _floats(args.quantiles, "--quantiles")
    else:
        _check_alpha(args.alpha)
        qs = (args.alpha / 2.0, 0.5, 1.0 - args.alpha / 2.0)
    res = cross_predict(model, margins, PredictionRequest(x, qs))
    out = _outdir(args)
    header = [f"{n}_q{q:g}" for n in names for q in res.quantiles]
    rows = res.values.reshape(res.values.shape[0], -1)
    f = out / "predictions.csv"
    write_csv(f, header, rows)
    inputs = [args.model, args.input] + ([args.margins] if args.margins else [])
    _write_manifest(out, "predict", args, inputs, [f])
    print(f"wrote {rows.shape[0]} rows x {len(header)} columns")
    return 0


def _resolve_var(spec, names, d):
    if spec in names:
        return names.index(spec) + 1
    try:
        v = int(spec)
    except ValueError:
        raise UsageError(f"unknown variable {spec!r}") from None
    if not 1 <= v <= d:
        raise UsageError(f"--stress-var must lie in 1..{d}")
    return v


def cmd_stress(args):
    from .infer import StressSpec, risk_transfer_summary

    model, names = _load_model(args.model)
    names = names or [f"V{j}" for j in range(1, model.d + 1)]
    var = _resolve_var(args.stress_var, names, model.d)
    spec = StressSpec(var, args.stress_q, args.nsim, args.reps)
    summ = risk_transfer_summary(model, spec, seed=np.random.default_rng([args.seed, 3]))
    out = _outdir(args)
    files = [out / "stress.csv", out / "stress_groups.csv"]
    write_csv(files[0], ["variable", "distance", "mean", "se"],
              [(names[r["variable"] - 1], r["distance"], r["mean"], r["se"]) for r in summ.table()])
    write_csv(files[1], ["distance", "variables", "mean", "se"],
              [(g["distance"], " ".join(names[v - 1] for v in g["variables"]), g["mean"], g["se"])
               for g in summ.groups])
    _write_manifest(out, "stress", args, [args.model], files)
    for g in summ.groups:
        print(f"distance {g['distance']}: mean {g['mean']:.4f} (se {g['se']:.4f})")
    return 0


def _check_case(case):
    if case not in (1, 2, 3, 4):
        raise UsageError(f"unknown case {case}; expected 1-4")


def cmd_synth(args):
    from .evaluation.scenarios import generate_scenario

    _check_case(args.case)
    x = generate_scenario(args.case, args.n, seed=np.random.default_rng([args.seed, 2]))
    out = _outdir(args)
    f = out / f"case{args.case}.csv"
    write_csv(f, [f"X{j}" for j in range(1, x.shape[1] + 1)], x)
    _write_manifest(out, "synth", args, [], [f])
    print(f"wrote {x.shape[0]} rows to {f}")
    return 0


def cmd_compare(args):
    from .evaluation.comparison import METHODS, run_comparison
    from .fit import parse_candidates

    _check_alpha(args.alpha)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    if (args.case is None) == (args.input is None):
        raise UsageError("give exactly one of --case or --input")
    inputs = []
    if args.case is not None:
        _check_case(args.case)
        source = args.case
    else:
        _, source = read_csv(args.input)
        inputs.append(args.input)
    res = run_comparison(source, methods, reps=args.reps, split=(args.n_train, args.n_test), seed=args.seed,
                         alpha=args.alpha, candidates=parse_candidates(args.candidates), workers=args.workers)
    out = _outdir(args)
    files = [out / "scores.csv", out / "scores_per_rep.csv", out / "widths.csv", out / "summary.json"]
    summ = res.summary()
    cols = ["mae", "mae_sd", "rmse", "rmse_sd", "is", "is_sd", "failed"]
    write_csv(files[0], ["method"] + cols, [[m] + [summ[m][c] for c in cols] for m in methods])
    write_csv(files[1], ["rep", "method", "mae", "rmse", "is"],
              [(r, m, *res.scores[m][r]) for r in range(res.reps) for m in methods])
    widths = {m: res.pooled_widths(m) for m in methods}
    length = max((w.size for w in widths.values()), default=0)
    write_csv(files[2], list(methods),
              [[(widths[m][i] if i < widths[m].size else "") for m in methods] for i in range(length)])
    doc = {"summary": summ, "alpha": args.alpha, "reps": args.reps,
           "failures": {m: [[r, e] for r, e in v] for m, v in res.failures.items()}}
    if "vine-copula" in methods and "linear" in methods:
        doc["vine_beats_linear_is"] = res.wins("vine-copula", "linear")
    _write_json(files[3], doc)
    _write_manifest(out, "compare", args, inputs, files)
    print(f"{'method':<16}{'MAE':>16}{'RMSE':>16}{'IS':>16}")
    for m in methods:
        s = summ[m]
        print(f"{m:<16}" + "".join(f"{s[k]:>8.3f} ({s[k + '_sd']:.3f})" for k in ("mae", "rmse", "is")))
    failed = [m for m in methods if summ[m]["failed"] == res.reps]
    if failed:
        print(f"error: every repetition failed for {', '.join(failed)}", file=sys.stderr)
        for m in failed:
            print(f"  {m}: {res.failures[m][0][1]}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vineinfer", description="Vine copula cross prediction and stress testing.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_required=False, input_required=True):
        sp.add_argument("--input", required=input_required, help="input CSV with a header row")
        sp.add_argument("--output-dir", required=True, help="directory for outputs and manifest.json")
        sp.add_argument("--seed", type=int, required=seed_required, default=None)

    sp = sub.add_parser("filter", help="difference, smooth outliers, ARMA-GARCH filter and PIT")
    common(sp, seed_required=True)
    sp.set_defaults(func=cmd_filter)

    sp = sub.add_parser("fit", help="fit a vine copula to u-scores")
    common(sp)
    sp.add_argument("--candidates", default="default",
                    help="'default', 'application' or a comma list such as N,t,C,G.s")
    sp.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    sp.add_argument("--array-file", default=None, help="fixed vine array (JSON or whitespace/comma rows)")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("predict", help="cross-predict every variable from the others")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--margins", default=None, help="margins JSON; without it the data are u-scores")
    sp.add_argument("--quantiles", default=None, help="comma list, e.g. 0.1,0.5,0.9")
    sp.add_argument("--alpha", type=float, default=0.2, help="used when --quantiles is absent")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("stress", help="stressed conditional simulation grouped by tree-1 distance")
    common(sp, seed_required=True, input_required=False)
    sp.add_argument("--model", required=True)
    sp.add_argument("--stress-var", required=True, help="variable name or 1-based index")
    sp.add_argument("--stress-q", type=float, default=0.95)
    sp.add_argument("--nsim", type=int, default=100)
    sp.add_argument("--reps", type=int, default=1000)
    sp.set_defaults(func=cmd_stress)

    sp = sub.add_parser("synth", help="simulate one of the built-in scenarios")
    common(sp, seed_required=True, input_required=False)
    sp.add_argument("--case", type=int, required=True)
    sp.add_argument("--n", type=int, default=1000)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("compare", help="repeated train/test comparison")
    common(sp, seed_required=True, input_required=False)
    sp.add_argument("--case", type=int, default=None)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--alpha", type=float, default=0.2)
    sp.add_argument("--methods", default="linear,gaussian-copula,vine-copula")
    sp.add_argument("--candidates", default="default")
    sp.add_argument("--n-train", type=int, default=800)
    sp.add_argument("--n-test", type=int, default=200)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (VineInferError, OSError, ValueError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
