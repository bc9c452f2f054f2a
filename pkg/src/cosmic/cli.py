"""Command-line surface: one binary, subcommand per pipeline stage.

Exit codes: 0 success, 2 input error (bad files, bad arguments), 3 numeric
failure.  Every report embeds the fully resolved configuration, so a saved
report is enough to rerun its job.  The seed defaults to the COSMIC_SEED
environment variable when set, else 0; two runs with equal inputs, flags,
and seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    correlation_csv,
    correlation_report,
    correlation_text,
    expected_error_rate,
    render_agreement,
)
from .bounds import prop1_bounds, rd_inverse
from .core import validate_pairing
from .errors import CosmicError, InputError, NumericError, OutOfRange, ParseError
from .hierarchy import build_hierarchy, export_dot, matrix_csv
from .io import (
    read_cemb,
    read_labels,
    read_manifest,
    read_scores,
    load_manifest_matrix,
)
from .knife import KnifeConfig, load_model
from .knife.serialize import MAGIC as MODEL_MAGIC
from .io import CEMB_MAGIC
from .oracle import sweep_verify
from .scores import cosmic_score, report_csv, report_text


def _default_seed() -> int:
    raw = os.environ.get("COSMIC_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise OutOfRange(f"COSMIC_SEED must be an integer, got {raw!r}") from None


def _add_knife_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator options")
    g.add_argument("--modes", type=int, default=None, help="mixture modes K (default 4)")
    g.add_argument("--learn-rate", type=float, default=None, help="Adam step size (default 1e-3)")
    g.add_argument("--epochs", type=int, default=None, help="max training epochs (default 200)")
    g.add_argument("--batch-size", type=int, default=None, help="mini-batch size (default 128)")
    g.add_argument("--patience", type=int, default=None,
                   help="epochs without improvement before stopping (default 10)")
    g.add_argument("--holdout-fraction", type=float, default=None,
                   help="fraction held out for evaluation (default 0: evaluate on all data)")
    g.add_argument("--no-standardize", action="store_true",
                   help="skip per-dimension standardization")
    g.add_argument("--hidden-width", type=int, default=None,
                   help="conditional network hidden width (default 64)")
    g.add_argument("--sigma-floor", type=float, default=None, help="scale clamp floor (default 1e-4)")
    g.add_argument("--sigma-ceil", type=float, default=None, help="scale clamp ceiling (default 1e4)")
    g.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: COSMIC_SEED env var, else 0)")


def _knife_config(args: argparse.Namespace) -> KnifeConfig:
    kwargs = {}
    for flag, field in (
        ("modes", "modes"),
        ("learn_rate", "learn_rate"),
        ("epochs", "epochs"),
        ("batch_size", "batch_size"),
        ("patience", "patience"),
        ("holdout_fraction", "holdout_fraction"),
        ("hidden_width", "hidden_width"),
        ("sigma_floor", "sigma_floor"),
        ("sigma_ceil", "sigma_ceil"),
    ):
        value = getattr(args, flag)
        if value is not None:
            kwargs[field] = value
    if args.no_standardize:
        kwargs["standardize"] = False
    kwargs["seed"] = args.seed if args.seed is not None else _default_seed()
    return KnifeConfig(**kwargs)


def _write_or_print(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_score(args: argparse.Namespace) -> int:
    config = _knife_config(args)
    source = read_cemb(args.source)
    summary = read_cemb(args.summary)
    pairs = validate_pairing(source, summary)
    report = cosmic_score(
        pairs,
        config,
        summarizer_name=args.summarizer_name,
        dataset_name=args.dataset_name,
        embedder_name=args.embedder_name,
    )
    _write_or_print(report_text(report, bits=args.bits), args.report)
    if args.csv is not None:
        _write_or_print(report_csv(report, bits=args.bits), args.csv)
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    if args.sweep:
        try:
            m_list = [int(m) for m in args.m_list.split(",") if m]
        except ValueError:
            raise OutOfRange(f"--m-list must be comma-separated integers, got {args.m_list!r}")
        if not m_list:
            raise OutOfRange("--m-list is empty")
        lines = ["m,mi,lower,upper"]
        for m in m_list:
            h = math.log(m)
            for mi in np.linspace(0.0, h, args.points):
                report = prop1_bounds(float(mi), m, h)
                lines.append(f"{m},{float(mi)!r},{report.lower!r},{report.upper!r}")
        _write_or_print("\n".join(lines) + "\n", args.out)
        return 0
    if args.mi is None or args.m is None:
        raise OutOfRange("bounds needs --mi and --m (or --sweep)")
    entropy_for_kappa = args.entropy if args.entropy is not None else math.log(args.m)
    report = prop1_bounds(args.mi, args.m, entropy_for_kappa)
    text = (
        f"mi: {report.mi!r}\n"
        f"m: {report.m}\n"
        f"entropy: {entropy_for_kappa!r}\n"
        f"kappa: {report.kappa!r}\n"
        f"lower: {report.lower!r}\n"
        f"upper: {report.upper!r}\n"
    )
    _write_or_print(text, args.out)
    return 0


def _cmd_verify_bounds(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.trials < 1:
        raise OutOfRange(f"--trials must be >= 1, got {args.trials}")
    passed, worst_lower, worst_upper = sweep_verify(
        args.trials, seed, args.min_classes, args.max_classes
    )
    print(f"{passed}/{args.trials} pass")
    print(f"worst_lower_slack: {worst_lower!r}")
    print(f"worst_upper_slack: {worst_upper!r}")
    if passed != args.trials:
        print("bound verification FAILED", file=sys.stderr)
        return 3
    return 0


def _cmd_hierarchy(args: argparse.Namespace) -> int:
    config = _knife_config(args)
    sets = []
    for path in args.manifests:
        manifest, matrix = load_manifest_matrix(path)
        name = manifest.summarizer_name or os.path.basename(path)
        sets.append((name, matrix))
    result = build_hierarchy(sets, config, jobs=args.jobs)
    dot_text = export_dot(result, threshold=args.threshold)
    if args.dot is None and args.csv is None:
        sys.stdout.write(dot_text)
    if args.dot is not None:
        _write_or_print(dot_text, args.dot)
    if args.csv is not None:
        _write_or_print(matrix_csv(result), args.csv)
    return 0


def _parse_named(entries: list[str], flag: str) -> list[tuple[str, dict[str, float]]]:
    out = []
    for entry in entries:
        if "=" not in entry:
            raise OutOfRange(f"{flag} expects NAME=PATH, got {entry!r}")
        name, path = entry.split("=", 1)
        out.append((name, read_scores(path)))
    return out


def _cmd_correlate(args: argparse.Namespace) -> int:
    metrics = _parse_named(args.metric, "--metric")
    targets = _parse_named(args.target, "--target")
    report = correlation_report(metrics, targets)
    if args.csv is not None:
        _write_or_print(correlation_csv(report), args.csv)
    if args.csv is None or args.text is not None:
        _write_or_print(correlation_text(report), args.text)
    return 0


def _cmd_agreement(args: argparse.Namespace) -> int:
    report = expected_error_rate(read_labels(args.labels_a), read_labels(args.labels_b))
    sys.stdout.write(render_agreement(report))
    return 0


def _validate_one(path: str) -> str:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == CEMB_MAGIC:
        matrix = read_cemb(path)
        return f"{path}: OK cemb n_rows={matrix.n_rows} dim={matrix.dim}"
    if head == MODEL_MAGIC:
        model = load_model(path)
        return f"{path}: OK model kind={type(model).__name__} modes={model.modes} dim={model.dim}"
    try:
        manifest = read_manifest(path)
    except ParseError:
        manifest = None
    if manifest is not None:
        _, matrix = load_manifest_matrix(path)
        return (
            f"{path}: OK manifest summarizer={manifest.summarizer_name} "
            f"n_rows={matrix.n_rows} dim={matrix.dim}"
        )
    try:
        scores = read_scores(path)
        return f"{path}: OK scores n={len(scores)}"
    except CosmicError:
        pass
    labels = read_labels(path)
    return (
        f"{path}: OK labels n={len(labels.pairs)} "
        f"vocabulary={','.join(labels.vocabulary)}"
    )


def _cmd_validate(args: argparse.Namespace) -> int:
    for path in args.paths:
        print(_validate_one(path))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosmic",
        description="Summarizer evaluation by mutual information between embeddings.",
    )
    parser.add_argument("--version", action="version", version=f"cosmic {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one summarizer from paired CEMB files")
    p.add_argument("source", help="source-text embeddings (.cemb)")
    p.add_argument("summary", help="summary embeddings (.cemb)")
    p.add_argument("--report", default=None, help="write the text report here (default stdout)")
    p.add_argument("--csv", default=None, help="also write a one-row CSV here")
    p.add_argument("--bits", action="store_true", help="display entropies and MI in bits")
    p.add_argument("--summarizer-name", default="", help="summarizer label for the report")
    p.add_argument("--dataset-name", default="", help="dataset label for the report")
    p.add_argument("--embedder-name", default="", help="embedder label for the report")
    _add_knife_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("bounds", help="evaluate the error-probability bounds at one point or as a sweep")
    p.add_argument("--mi", type=float, default=None, help="mutual information in nats")
    p.add_argument("--m", type=int, default=None, help="number of concept classes")
    p.add_argument("--entropy", type=float, default=None,
                   help="concept entropy in nats (default ln m, the uniform concept)")
    p.add_argument("--sweep", action="store_true", help="emit a CSV sweep instead of one point")
    p.add_argument("--m-list", default="2,4,10", help="comma-separated class counts for --sweep")
    p.add_argument("--points", type=int, default=200, help="sweep points per class count")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("verify-bounds", help="check the bounds against exact random joints")
    p.add_argument("--trials", type=int, default=1000, help="number of random joints")
    p.add_argument("--seed", type=int, default=None, help="sweep seed (default COSMIC_SEED, else 0)")
    p.add_argument("--min-classes", type=int, default=2, help="smallest alphabet size")
    p.add_argument("--max-classes", type=int, default=6, help="largest alphabet size")
    p.set_defaults(func=_cmd_verify_bounds)

    p = sub.add_parser("hierarchy", help="directed informativeness between summarizers")
    p.add_argument("manifests", nargs="+", help="manifest files, one per summarizer")
    p.add_argument("--dot", default=None, help="write DOT graph here")
    p.add_argument("--csv", default=None, help="write the MI matrix CSV here")
    p.add_argument("--threshold", type=float, default=0.0, help="minimum edge weight kept in DOT")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel worker processes (default: logical cores)")
    _add_knife_flags(p)
    p.set_defaults(func=_cmd_hierarchy)

    p = sub.add_parser("correlate", help="rank-correlate metric scores against targets")
    p.add_argument("--metric", action="append", default=[], required=True,
                   metavar="NAME=PATH", help="metric score file (repeatable)")
    p.add_argument("--target", action="append", default=[], required=True,
                   metavar="NAME=PATH", help="target score file (repeatable)")
    p.add_argument("--csv", default=None, help="write long-form CSV here")
    p.add_argument("--text", default=None, help="write the aligned table here (default stdout)")
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("agreement", help="label disagreement rate between two label files")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    p.set_defaults(func=_cmd_agreement)

    p = sub.add_parser("validate", help="check files parse cleanly and print diagnostics")
    p.add_argument("paths", nargs="+", help="cemb/manifest/model/labels/scores files")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
