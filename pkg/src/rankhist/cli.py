"""Command-line interface.

Every subcommand is deterministic: the same flags and seed always produce
byte-identical output. Results are emitted as JSON (default) or CSV on
stdout; domain errors become a JSON object on stderr and exit code 2,
usage errors exit with code 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .alternatives import AlternativeKind, rejection_probability
from .binsearch import BinSearchSpec, optimal_bin_count
from .distances import DistanceKind, distance
from .errors import DomainError, HistogramGenerationError
from .montecarlo import (
    DEFAULT_REPLICATIONS,
    CriticalValueCache,
    MCConfig,
    critical_value,
)
from .ranks import Histogram, RankSeries, load_ranks, rank_histogram
from .study import StudyDeck, analyze_study, generate_deck, read_labels

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; this tool reserves 2 for domain errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _emit_csv(rows: list[dict]) -> None:
    if not rows:
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    sys.stdout.write(buf.getvalue())


def _emit(payload: dict, rows: list[dict], fmt: str) -> None:
    if fmt == "csv":
        _emit_csv(rows)
    else:
        _emit_json(payload)


def _mc_config(args) -> MCConfig:
    return MCConfig(
        replications=args.mc_samples,
        master_seed=args.seed,
        worker_hint=args.workers,
    )


def _load_histogram(path: str) -> Histogram:
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DomainError(f"histogram file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: malformed histogram JSON: {exc}") from exc
    if isinstance(payload, dict) and "k" not in payload and "heights" in payload:
        payload = dict(payload, k=len(payload["heights"]))
    return Histogram.from_dict(payload)


def _cmd_transform(args) -> int:
    ranks = load_ranks(args.ranks)
    series = RankSeries(ensemble_size=args.ensemble_size, ranks=ranks)
    hist = rank_histogram(series, args.bins, args.seed)
    payload = hist.to_dict()
    rows = [
        {"bin": j + 1, "count": int(c), "height": float(h)}
        for j, (c, h) in enumerate(zip(hist.counts, hist.heights))
    ]
    _emit(payload, rows, args.format)
    return EXIT_OK


def _cmd_distance(args) -> int:
    kind = DistanceKind.coerce(args.kind)
    hist = _load_histogram(args.histogram)
    d = distance(hist, kind)
    payload = {"kind": kind.value, "distance": d}
    _emit(payload, [payload], args.format)
    return EXIT_OK


def _cmd_threshold(args) -> int:
    cache = CriticalValueCache(args.cache) if args.cache else None
    result = critical_value(
        DistanceKind.coerce(args.kind), args.alpha, args.bins, args.n,
        _mc_config(args), cache=cache,
    )
    payload = result.to_dict()
    _emit(payload, [payload], args.format)
    return EXIT_OK


def _cmd_optimal_k(args) -> int:
    spec = BinSearchSpec(
        kind=DistanceKind.coerce(args.kind),
        alpha=args.alpha,
        n=args.n,
        c_target=args.c_target,
        k_min=args.k_min,
        k_max=args.k_max,
        mc=_mc_config(args),
    )
    result = optimal_bin_count(spec)
    rows = [
        {"k": row.k, "c": row.c, "gap": row.gap, "k_opt": result.k_opt}
        for row in result.per_k
    ]
    _emit(result.to_dict(), rows, args.format)
    return EXIT_OK


def _cmd_power(args) -> int:
    result = rejection_probability(
        AlternativeKind.coerce(args.alternative),
        DistanceKind.coerce(args.kind),
        args.c,
        args.bins,
        args.n,
        replications=args.reps,
        seed=args.seed,
        workers=args.workers,
    )
    payload = result.to_dict()
    _emit(payload, [payload], args.format)
    return EXIT_OK


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _cmd_study_new(args) -> int:
    categories = None
    if args.bins or args.distances:
        from .study import DEFAULT_BIN_COUNTS, DEFAULT_TARGET_DISTANCES

        ks = _parse_ints(args.bins) if args.bins else list(DEFAULT_BIN_COUNTS)
        ds = _parse_floats(args.distances) if args.distances else list(DEFAULT_TARGET_DISTANCES)
        categories = [(k, d) for k in ks for d in ds]
    deck = generate_deck(
        categories=categories,
        per_category=args.per_category,
        shuffle_seed=args.seed,
    )
    deck.save(args.out)
    _emit_json({"deck": str(args.out), "items": len(deck)})
    return EXIT_OK


def _cmd_study_analyze(args) -> int:
    deck = StudyDeck.load(args.deck)
    labels = read_labels(args.labels)
    if not labels:
        raise DomainError(f"no labels found in {args.labels}")
    report = analyze_study(deck, labels, delta=args.delta).to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(report, sort_keys=True) + "\n")
        _emit_json({"report": str(args.out), "n_labels": report["n_labels"]})
    else:
        _emit_json(report)
    return EXIT_OK


def _cmd_study_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument(
        "--mc-samples", type=int, default=DEFAULT_REPLICATIONS,
        help="Monte-Carlo replications (default %(default)s)",
    )
    common.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="rankhist", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", parents=[common], help="bin observed ranks into a histogram")
    p.add_argument("--ranks", required=True, help="rank file (CSV with 'rank' header, or JSON array)")
    p.add_argument("--ensemble-size", type=int, required=True, metavar="M")
    p.add_argument("--bins", type=int, required=True, metavar="K")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("distance", parents=[common], help="flatness distance of a histogram file")
    p.add_argument("--histogram", required=True, help="histogram JSON file")
    p.add_argument("--kind", required=True, choices=[m.value for m in DistanceKind])
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("threshold", parents=[common], help="Monte-Carlo critical value c(alpha, k, n)")
    p.add_argument("--kind", required=True, choices=[m.value for m in DistanceKind])
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--bins", type=int, required=True, metavar="K")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cache", default=None, help="optional JSON threshold cache file")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("optimal-k", parents=[common], help="bin count matching an acceptance threshold")
    p.add_argument("--kind", required=True, choices=[m.value for m in DistanceKind])
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c-target", type=float, required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=12)
    p.set_defaults(func=_cmd_optimal_k)

    p = sub.add_parser("power", parents=[common], help="rejection probability under an alternative")
    p.add_argument("--alternative", required=True, choices=[m.value for m in AlternativeKind])
    p.add_argument("--kind", required=True, choices=[m.value for m in DistanceKind])
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--bins", type=int, required=True, metavar="K")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.set_defaults(func=_cmd_power)

    study = sub.add_parser("study", help="labeling-study tools")
    study_sub = study.add_subparsers(dest="study_command", required=True, parser_class=_Parser)

    p = study_sub.add_parser("new", parents=[common], help="generate a study deck")
    p.add_argument("--out", required=True, help="output deck JSON path")
    p.add_argument("--per-category", type=int, default=25)
    p.add_argument("--bins", default=None, help="comma-separated bin counts (default 5,6,8,10)")
    p.add_argument("--distances", default=None, help="comma-separated target distances")
    p.set_defaults(func=_cmd_study_new)

    p = study_sub.add_parser("analyze", parents=[common], help="analyze a label log against a deck")
    p.add_argument("--deck", required=True)
    p.add_argument("--labels", required=True, help="JSON-lines label store")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--out", default=None, help="write report JSON here instead of stdout")
    p.set_defaults(func=_cmd_study_analyze)

    p = study_sub.add_parser("serve", parents=[common], help="run the labeling service")
    default_data_dir = os.environ.get("RANKHIST_DATA_DIR")
    p.add_argument("--data-dir", default=default_data_dir, required=default_data_dir is None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", default=None, help="static UI bundle to serve at /")
    p.set_defaults(func=_cmd_study_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (DomainError, HistogramGenerationError, FileNotFoundError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
        return EXIT_DOMAIN


def entrypoint() -> None:
    raise SystemExit(main())
