"""Command-line interface.

Subcommands: gen-moments, recover, fourier, statmix, ideal-check.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.

Reports are JSON with sorted keys; everything except the ``timing`` field is
a deterministic function of the inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _stdio
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .elimination import recover_two_component
from .errors import NumericalFailure
from .fourier import reconstruct_signal
from .ideals import FAMILIES, check_family
from .recovery import RecoveryConfig, recover
from .statmix import empirical_moments, estimate, sample_config

THREADS_ENV = "LOCALDIRAC_THREADS"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {n}")
    return n


def _digest(*paths: str) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _config(args, **kw) -> RecoveryConfig:
    opts = dict(seed=args.seed, starts=args.starts, workers=_threads())
    if args.tol is not None:
        opts["rank_tol"] = args.tol
    opts.update(kw)
    return RecoveryConfig(**opts)


def _report(args, argv, inputs: list[str], result, diagnostics: dict, started: float) -> dict:
    diagnostics = dict(diagnostics)
    seconds = diagnostics.pop("seconds", None)
    params = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "out", "signal_out") and not k.startswith("_")
    }
    return {
        "command": ["localdirac", *argv],
        "subcommand": " ".join(x for x in (args.command, getattr(args, "action", None)) if x),
        "inputs_digest": _digest(*inputs),
        "parameters": params,
        "seed": args.seed,
        "result": result,
        "diagnostics": diagnostics,
        "timing": {"seconds": time.perf_counter() - started, "solver_seconds": seconds},
    }


def _emit(text: str, out: str | None):
    text = text if text.endswith("\n") else text + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([json.dumps(io.encode(v)) if isinstance(v, (list, tuple, complex, np.ndarray)) else v
                    for v in row])
    return buf.getvalue()


def _components(mix) -> list[dict]:
    return [{"xi": c.xi, "lambdas": c.lambdas} for c in mix.components]


def _write_report(report: dict, args, rows=None, header=None):
    if args.format == "csv" and rows is not None:
        _emit(_rows_csv(header, rows), args.out)
    else:
        _emit(io.dumps(report), args.out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_moments(args, argv, started):
    spec = json.loads(io.read_text(args.spec))
    if not isinstance(spec, dict):
        raise ValueError("spec must be a JSON object")
    if args.degree < 0:
        raise ValueError("degree must be non-negative")
    m = io.moments_from_spec(spec, args.degree)
    _emit(io.moments_to_csv(m) if args.format == "csv" else io.moments_to_json(m), args.out)


def cmd_recover(args, argv, started):
    m = io.parse_moments(io.read_text(args.moments))
    if args.method == "elimination":
        if (args.r, args.l) != (2, 1):
            raise ValueError("--method elimination handles r=2, l=1 only")
        cands = recover_two_component(m, statistical=args.statistical)
        if not cands:
            raise NumericalFailure("no candidate passes the statistical filter", {"method": "elimination"})
        best = cands[0]
        comps = [
            {"xi": best.xi1, "lambdas": [best.lam, best.lam * (best.alpha1 or 0)]},
            {"xi": best.xi2, "lambdas": [1 - best.lam, (1 - best.lam) * (best.alpha2 or 0)]},
        ]
        diag = {
            "method": "elimination",
            "n_candidates": len(cands),
            "candidates": [
                {"xi1": c.xi1, "xi2": c.xi2, "lam": c.lam, "alpha1": c.alpha1, "alpha2": c.alpha2,
                 "residual_m6": c.residual_m6}
                for c in cands
            ],
        }
    else:
        cfg = _config(args, statistical=args.statistical, solver=args.solver)
        res = recover(m, args.r, args.l, cfg, method=args.method)
        comps, diag = _components(res.mixture), res.diagnostics
    report = _report(args, argv, [args.moments], {"components": comps}, diag, started)
    rows = [[i, c["xi"], c["lambdas"]] for i, c in enumerate(comps)]
    _write_report(report, args, rows, ["component", "xi", "lambdas"])


def cmd_fourier(args, argv, started):
    c = io.fourier_from_csv(io.read_text(args.coeffs))
    cfg = _config(args)
    sig, diag = reconstruct_signal(c, args.r, cfg, refine=not args.no_refine)
    report = _report(args, argv, [args.coeffs], {"signal": sig.to_dict()}, diag, started)
    if args.signal_out:
        Path(args.signal_out).write_text(io.dumps(sig.to_dict()))
    n = sig.r
    rows = [
        [sig.breakpoints[j], sig.values[j] if j < n - 1 else None, sig.slopes[j] if j < n - 1 else None]
        for j in range(n)
    ]
    _write_report(report, args, rows, ["t", "f", "fprime"])


def cmd_statmix(args, argv, started):
    xs = io.read_sample(io.read_text(args.sample))
    d = (args.l + 2) * args.r
    moments = empirical_moments(xs, d)
    cfg = sample_config(seed=args.seed, starts=args.starts, workers=_threads())
    if args.tol is not None:
        cfg.rank_tol = args.tol
    est = estimate(moments, args.r, args.l, cfg=cfg, sd=args.sd, require_density=args.require_density,
                   sample_xs=xs if args.select == "likelihood" else None)
    result = {
        "xis": est.xis,
        "weights": est.weights,
        "alphas": [list(a) for a in est.alphas],
        "valid_mixture": est.mixture is not None,
        "n_samples": int(xs.size),
    }
    report = _report(args, argv, [args.sample], result, est.diagnostics, started)
    rows = [[j, est.xis[j], est.weights[j], est.alphas[j]] for j in range(est.xis.size)]
    _write_report(report, args, rows, ["component", "xi", "weight", "alphas"])


def cmd_ideal_check(args, argv, started):
    m = io.parse_moments(io.read_text(args.moments))
    tol = 1e-9 if args.tol is None else args.tol
    records = check_family(m, args.family, rel_tol=tol, n=args.n)
    result = {
        "family": args.family,
        "n_generators": len(records),
        "all_pass": all(r["pass"] for r in records),
        "generators": records,
    }
    report = _report(args, argv, [args.moments], result, {}, started)
    rows = [[r["family"], r["index"], r["value"], r["scale"], r["pass"]] for r in records]
    _write_report(report, args, rows, ["family", "index", "value", "scale", "pass"])


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--tol", type=float, default=None,
                        help="rank tolerance for recovery; pass threshold for ideal-check")
    common.add_argument("--starts", type=int, default=200, help="Newton starts when homotopy is not used")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(
        prog="localdirac",
        description="Moment-based recovery of local Dirac and local Gaussian mixtures.",
        epilog=f"Set {THREADS_ENV} to use several worker threads in the Newton solver.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-moments", parents=[common], help="forward moments of a mixture or Pareto spec")
    g.add_argument("spec", help='JSON: {"components": [{"xi":..,"lambdas":[..]}]} or {"pareto": {"alpha":..,"xi":..}}')
    g.add_argument("-d", "--degree", type=int, required=True)
    g.set_defaults(func=cmd_gen_moments)

    r = sub.add_parser("recover", parents=[common], help="recover mixture parameters from moments")
    r.add_argument("moments", help="moments file (JSON or CSV)")
    r.add_argument("-r", type=int, required=True, help="number of components")
    r.add_argument("-l", type=int, required=True, help="order of each component")
    r.add_argument("--method", choices=("auto", "minimal", "linear", "elimination"), default="auto")
    r.add_argument("--solver", choices=("auto", "homotopy", "newton"), default="auto")
    r.add_argument("--statistical", action="store_true", help="keep only real ξ and weights in [0, 1]")
    r.set_defaults(func=cmd_recover)

    f = sub.add_parser("fourier", help="piecewise-linear signal from Fourier coefficients")
    fsub = f.add_subparsers(dest="action", required=True)
    fr = fsub.add_parser("recon", parents=[common], help="reconstruct the signal")
    fr.add_argument("--coeffs", required=True, help="CSV with columns k, re, im for k = -s..s")
    fr.add_argument("--segments", "-r", dest="r", type=int, required=True, help="number of breakpoints r")
    fr.add_argument("--signal-out", default=None, help="also write the signal JSON here")
    fr.add_argument("--no-refine", action="store_true", help="skip the least-squares refinement")
    fr.set_defaults(func=cmd_fourier)

    s = sub.add_parser("statmix", help="local Gaussian mixtures")
    ssub = s.add_subparsers(dest="action", required=True)
    se = ssub.add_parser("estimate", parents=[common], help="estimate parameters from a sample")
    se.add_argument("--sample", required=True, help="one draw per line (first CSV column)")
    se.add_argument("--components", "-r", dest="r", type=int, required=True)
    se.add_argument("--order", "-l", dest="l", type=int, required=True)
    se.add_argument("--sd", type=float, default=1.0, help="standard deviation of the base Gaussian")
    se.add_argument("--require-density", action="store_true",
                    help="keep only candidates with non-negative component densities")
    se.add_argument("--select", choices=["likelihood", "moment"], default="likelihood",
                    help="rank candidates by sample likelihood or by the extra-moment residual")
    se.set_defaults(func=cmd_statmix)

    ic = sub.add_parser("ideal-check", parents=[common], help="evaluate a generator family on moments")
    ic.add_argument("moments")
    ic.add_argument("--family", choices=FAMILIES, required=True)
    ic.add_argument("--n", type=int, default=None, help="exponent for delta_power")
    ic.set_defaults(func=cmd_ideal_check)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        args.func(args, argv, started)
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(io.dumps({"diagnostics": exc.diagnostics}), file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, IndexError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
