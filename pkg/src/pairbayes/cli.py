"""Command-line interface.

Results are written as JSON (tests, cross-validation, calibration) or CSV
(supports, ROC curves, simulated matrices) to ``--out``, or to stdout when
no path is given. Report commands optionally render a figure next to the
delimited output via ``--figure``. Exit codes: 0 success, 2 validation
error, 3 numeric degeneracy, 64 usage error, 66 file error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bayesfactor import default_hyperparams
from .dataio import (
    center_columns,
    load_covariance,
    load_matrix,
    matrix_to_delimited,
    transform_null,
)
from .errors import DegenerateDataError, PairBayesError
from .evalmetrics import ks_distance, mc_null_statistics, roc_curve
from .hyptest import (
    c_np,
    diagonality_test,
    gumbel_cdf,
    gumbel_quantile,
    one_sample_test,
    pairwise_independence_test,
)
from .simulate import make_cov_model, sample_mvn, save_covariance
from .support import cv_select_threshold, default_grid, select_support

_MODELS = ("identity", "compound_symmetry", "two_entry", "banded1", "banded2")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _default_threads() -> int:
    raw = os.environ.get("PAIRBAYES_THREADS", "")
    try:
        value = int(raw) if raw else 1
    except ValueError:
        return 1
    return max(value, 1)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(record: dict, out: str | None) -> None:
    _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", out)


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    return "tsv" if path.endswith(".tsv") else "csv"


def _load_input(args) -> "DataMatrix":
    data = load_matrix(args.input, format=_infer_format(args.input, args.format))
    if not args.no_center:
        data = center_columns(data)
    return data


def _add_input_flags(parser: _Parser) -> None:
    parser.add_argument("--input", required=True, help="delimited data matrix")
    parser.add_argument(
        "--format", choices=("csv", "tsv"), default=None,
        help="input format (default: by file extension, csv unless .tsv)",
    )
    parser.add_argument(
        "--no-center", action="store_true",
        help="skip column mean-centering (default: file input is centered)",
    )


def _add_hyper_flags(parser: _Parser, alpha_default: str) -> None:
    parser.add_argument(
        "--k", type=float, default=100.0,
        help="prior concentration K; a0 = 2 + K^-2 (default: 100)",
    )
    parser.add_argument(
        "--alpha", type=float, default=None,
        help=f"shrinkage exponent (default: {alpha_default})",
    )
    parser.add_argument(
        "--gamma", type=float, default=None,
        help="shrinkage factor, overrides the alpha rule (default: derived)",
    )


def _add_threads_flag(parser: _Parser) -> None:
    parser.add_argument(
        "--threads", type=int, default=_default_threads(),
        help="worker cap for the pair sweep; results are identical for any "
        "value (default: PAIRBAYES_THREADS or 1)",
    )


def _cmd_test_one_sample(args) -> int:
    data = _load_input(args)
    if args.sigma0 is not None:
        sigma0 = load_covariance(
            args.sigma0, format=_infer_format(args.sigma0, args.format)
        )
        data = transform_null(data, sigma0)
    hp = default_hyperparams(
        data.n, data.p, "one_sample", k=args.k, alpha=args.alpha, gamma=args.gamma
    )
    outcome = one_sample_test(
        data, hp, threshold=args.threshold, threads=args.threads
    )
    _emit_json(outcome.to_json_dict(), args.out)
    return 0


def _cmd_test_diagonal(args) -> int:
    data = _load_input(args)
    hp = default_hyperparams(
        data.n, data.p, "diagonality", k=args.k, alpha=args.alpha, gamma=args.gamma
    )
    outcome = diagonality_test(
        data,
        hp,
        threshold=args.threshold,
        asymptotic_size=args.size,
        threads=args.threads,
    )
    _emit_json(outcome.to_json_dict(), args.out)
    return 0


def _cmd_test_pair(args) -> int:
    data = _load_input(args)
    alpha_exp = args.alpha_exp
    if alpha_exp is None:
        alpha_exp = default_hyperparams(data.n, data.p, "pairwise_independence").alpha
    outcome = pairwise_independence_test(
        data, args.i, args.j, alpha_exp=alpha_exp, threshold=args.threshold
    )
    _emit_json(outcome.to_json_dict(), args.out)
    return 0


def _cmd_select_support(args) -> int:
    data = _load_input(args)
    hp = default_hyperparams(
        data.n, data.p, "support", k=args.k, alpha=args.alpha, gamma=args.gamma
    )
    estimate = select_support(
        data,
        hp,
        c_sel=args.threshold,
        symmetrize=not args.no_symmetrize,
        threads=args.threads,
    )
    _emit(estimate.edges_csv(), args.out)
    if args.json is not None:
        _emit_json(estimate.to_json_dict(), args.json)
    if args.figure is not None:
        from . import plots

        plots.save_support_figure(estimate, args.figure)
    return 0


def _cmd_cv_threshold(args) -> int:
    data = _load_input(args)
    hp = default_hyperparams(
        data.n, data.p, "support", k=args.k, alpha=args.alpha, gamma=args.gamma
    )
    grid = default_grid(args.grid_min, args.grid_max, args.grid_step)
    report = cv_select_threshold(
        data,
        hp,
        grid=grid,
        nsplits=args.nsplits,
        seed=args.seed,
        fit_beta_on=args.fit_beta_on,
        threads=args.threads,
    )
    _emit_json(report.to_json_dict(), args.out)
    if args.figure is not None:
        from . import plots

        plots.save_cv_figure(report, args.figure)
    return 0


def _cmd_simulate(args) -> int:
    model = make_cov_model(args.model, args.p, args.rho)
    data = sample_mvn(model.spec, args.n, args.seed)
    _emit(matrix_to_delimited(data, "csv"), args.out)
    if args.cov_out is not None:
        save_covariance(model.spec, args.cov_out)
    if args.model_json is not None:
        _emit_json(model.to_json_dict(), args.model_json)
    return 0


def _cmd_null_calibration(args) -> int:
    hp = default_hyperparams(
        args.n, args.p, "diagonality", k=args.k, alpha=args.alpha, gamma=args.gamma
    )
    stats = mc_null_statistics(
        args.n, args.p, hp, reps=args.reps, seed=args.seed, threads=args.threads
    )
    center = c_np(args.n, args.p, hp.gamma)
    threshold = center + gumbel_quantile(1.0 - args.size)
    record = {
        "n": int(args.n),
        "p": int(args.p),
        "reps": int(args.reps),
        "seed": int(args.seed),
        "size": float(args.size),
        "gamma": float(hp.gamma),
        "alpha": float(hp.alpha),
        "c_np": float(center),
        "ks_distance": float(ks_distance(stats - center, gumbel_cdf)),
        "empirical_size": float(np.mean(stats > threshold)),
        "statistics": [float(s) for s in stats],
    }
    _emit_json(record, args.out)
    if args.figure is not None:
        from . import plots

        plots.save_calibration_figure(stats, center, args.figure)
    return 0


def _cmd_roc(args) -> int:
    model = make_cov_model(args.model, args.p, args.rho)
    null_model = make_cov_model("identity", args.p)
    null_stats, alt_stats = [], []
    for arm, cov, sink in ((0, null_model, null_stats), (1, model, alt_stats)):
        for r in range(args.reps):
            seq = np.random.SeedSequence(args.seed, spawn_key=(arm, r))
            data = sample_mvn(cov.spec, args.n, seq)
            if args.test == "one-sample":
                hp = default_hyperparams(
                    data.n, data.p, "one_sample",
                    k=args.k, alpha=args.alpha, gamma=args.gamma,
                )
                stat = one_sample_test(data, hp, threads=args.threads).statistic
            else:
                hp = default_hyperparams(
                    data.n, data.p, "diagonality",
                    k=args.k, alpha=args.alpha, gamma=args.gamma,
                )
                stat = diagonality_test(data, hp, threads=args.threads).statistic
            sink.append(stat)
    curve = roc_curve(null_stats, alt_stats)
    _emit(curve.csv_text(), args.out)
    if args.json is not None:
        _emit_json(
            {
                "auc": float(curve.auc),
                "test": args.test,
                "model": args.model,
                "rho": None if args.rho is None else float(args.rho),
                "n": int(args.n),
                "p": int(args.p),
                "reps": int(args.reps),
                "seed": int(args.seed),
            },
            args.json,
        )
    if args.figure is not None:
        from . import plots

        plots.save_roc_figure(curve, args.figure, title=f"{args.test} vs {args.model}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="pairbayes",
        description="Maximum pairwise Bayes factor tests for covariance structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    one = sub.add_parser(
        "test-one-sample",
        help="test H0: covariance = identity (or a given sigma0)",
    )
    _add_input_flags(one)
    _add_hyper_flags(one, alpha_default="8.01*(1 - 1/log n)")
    one.add_argument(
        "--sigma0", default=None,
        help="null covariance CSV; data are transformed by sigma0^(-1/2)",
    )
    one.add_argument(
        "--threshold", type=float, default=0.0,
        help="rejection threshold on 2*log BF (default: 0)",
    )
    _add_threads_flag(one)
    one.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    one.set_defaults(func=_cmd_test_one_sample)

    diag = sub.add_parser("test-diagonal", help="test H0: covariance is diagonal")
    _add_input_flags(diag)
    _add_hyper_flags(diag, alpha_default="4.01*(1 - 1/log n)")
    rule = diag.add_mutually_exclusive_group()
    rule.add_argument(
        "--threshold", type=float, default=None,
        help="rejection threshold on 2*log BF (default: 0)",
    )
    rule.add_argument(
        "--size", type=float, default=None,
        help="asymptotic size alpha; thresholds at c_np + gumbel_quantile(1-alpha)",
    )
    _add_threads_flag(diag)
    diag.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    diag.set_defaults(func=_cmd_test_diagonal)

    pair = sub.add_parser(
        "test-pair", help="test independence of one column pair"
    )
    _add_input_flags(pair)
    pair.add_argument("--i", type=int, required=True, help="first column (1-based)")
    pair.add_argument("--j", type=int, required=True, help="second column (1-based)")
    pair.add_argument(
        "--alpha-exp", type=float, default=None,
        help="exponent in gamma = n^-alpha (default: 4.01*(1 - 1/log n))",
    )
    pair.add_argument(
        "--threshold", type=float, default=0.0,
        help="rejection threshold on 2*log BF (default: 0)",
    )
    _add_threads_flag(pair)
    pair.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    pair.set_defaults(func=_cmd_test_pair)

    sel = sub.add_parser(
        "select-support", help="select covariance support by thresholding pair scores"
    )
    _add_input_flags(sel)
    _add_hyper_flags(sel, alpha_default="4.01*(1 - 1/log n)")
    sel.add_argument(
        "--threshold", type=float, default=0.0,
        help="selection threshold on 2*log BF (default: 0)",
    )
    sel.add_argument(
        "--no-symmetrize", action="store_true",
        help="score pairs one way instead of the max of both orderings",
    )
    _add_threads_flag(sel)
    sel.add_argument("--out", default=None, help="edge-list CSV path (default: stdout)")
    sel.add_argument("--json", default=None, help="also write the support as JSON")
    sel.add_argument("--figure", default=None, help="render the support pattern to a file")
    sel.set_defaults(func=_cmd_select_support)

    cv = sub.add_parser(
        "cv-threshold",
        help="choose the support threshold by 50 random splits (n1 = ceil(n/3) test rows)",
    )
    _add_input_flags(cv)
    _add_hyper_flags(cv, alpha_default="4.01*(1 - 1/log n)")
    cv.add_argument("--grid-min", type=float, default=-7.0, help="grid start (default: -7)")
    cv.add_argument("--grid-max", type=float, default=10.0, help="grid end (default: 10)")
    cv.add_argument("--grid-step", type=float, default=0.2, help="grid step (default: 0.2)")
    cv.add_argument("--nsplits", type=int, default=50, help="random splits (default: 50)")
    cv.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    cv.add_argument(
        "--fit-beta-on", choices=("test", "train"), default="test",
        help="rows used for the per-pair regression slope (default: test)",
    )
    _add_threads_flag(cv)
    cv.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    cv.add_argument("--figure", default=None, help="render mean MSE vs threshold to a file")
    cv.set_defaults(func=_cmd_cv_threshold)

    sim = sub.add_parser("simulate", help="draw Gaussian data from a named covariance model")
    sim.add_argument("--model", choices=_MODELS, required=True)
    sim.add_argument("--p", type=int, required=True, help="dimension")
    sim.add_argument("--n", type=int, required=True, help="rows to draw")
    sim.add_argument(
        "--rho", type=float, default=None,
        help="correlation parameter (compound_symmetry, two_entry)",
    )
    sim.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    _add_threads_flag(sim)
    sim.add_argument("--out", default=None, help="data CSV path (default: stdout)")
    sim.add_argument("--cov-out", default=None, help="also write the covariance matrix CSV")
    sim.add_argument("--model-json", default=None, help="also write the model record JSON")
    sim.set_defaults(func=_cmd_simulate)

    cal = sub.add_parser(
        "null-calibration",
        help="Monte Carlo check of the diagonality statistic's null limit",
    )
    cal.add_argument("--n", type=int, required=True)
    cal.add_argument("--p", type=int, required=True)
    cal.add_argument("--reps", type=int, default=500, help="replicates (default: 500)")
    cal.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    cal.add_argument(
        "--size", type=float, default=0.05,
        help="nominal size for the empirical-size column (default: 0.05)",
    )
    _add_hyper_flags(cal, alpha_default="4.01*(1 - 1/log n)")
    _add_threads_flag(cal)
    cal.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    cal.add_argument("--figure", default=None, help="render ECDF vs limit law to a file")
    cal.set_defaults(func=_cmd_null_calibration)

    roc = sub.add_parser(
        "roc", help="simulate null vs alternative replicates and write the ROC curve"
    )
    roc.add_argument(
        "--test", choices=("one-sample", "diagonal"), default="diagonal",
        help="statistic to sweep (default: diagonal)",
    )
    roc.add_argument("--model", choices=_MODELS[1:], required=True,
                     help="alternative covariance model")
    roc.add_argument("--rho", type=float, default=None,
                     help="correlation parameter where the model takes one")
    roc.add_argument("--n", type=int, required=True)
    roc.add_argument("--p", type=int, required=True)
    roc.add_argument("--reps", type=int, default=50,
                     help="replicates per arm (default: 50)")
    roc.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    _add_hyper_flags(roc, alpha_default="per test rule")
    _add_threads_flag(roc)
    roc.add_argument("--out", default=None, help="ROC CSV path (default: stdout)")
    roc.add_argument("--json", default=None, help="also write an AUC summary JSON")
    roc.add_argument("--figure", default=None, help="render the ROC curve to a file")
    roc.set_defaults(func=_cmd_roc)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"pairbayes: error: {exc}", file=sys.stderr)
        return 3
    except PairBayesError as exc:
        print(f"pairbayes: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pairbayes: error: {exc}", file=sys.stderr)
        return 66


if __name__ == "__main__":
    sys.exit(main())
