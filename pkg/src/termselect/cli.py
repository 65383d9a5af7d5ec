"""Command-line front end: ingest -> profile -> axioms -> analyze -> evaluate.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 a property expected to hold produced a counterexample.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import axioms, concentration, corpus, cutoff, retrieval, weighting
from .errors import InvalidCutoffSpec, TermSelectError, UnknownMode

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_EXPECTATION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; this tool reserves 2 for data errors.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _existing(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def _thresholds(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# --- subcommands --------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    records = corpus.read_records(_existing(args.records, "records file"))
    stop = corpus.read_stopwords(_existing(args.stopwords, "stopword file")) if args.stopwords else set()
    coll = corpus.build_collection(records, args.mode, stop)
    coll = corpus.filter_speakers(coll, args.min_initiatives)
    out = _out_dir(args.out) / "collection.json"
    corpus.save_collection(coll, out)
    print(
        f"{len(records)} records -> {coll.stats.N} documents, {coll.stats.M} tokens "
        f"({coll.rejected_records} rejected, {coll.dropped_groups} empty groups dropped)"
    )
    print(f"wrote {out}")
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    spec = cutoff.CutoffSpec(args.cutoff, args.param)
    coll = corpus.load_collection(_existing(args.collection, "collection file"))
    rankings = weighting.rank_collection(coll.documents, args.measure, coll.stats)
    profiles = cutoff.build_profiles(rankings, spec)
    out = _out_dir(args.out)
    with open(out / "profiles.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        cutoff.write_profiles_jsonl(profiles, fh)
    with open(out / "rankings.csv", "w", encoding="utf-8", newline="") as fh:
        weighting.write_rankings_csv(rankings, fh)
    sizes = np.array([p.l for p in profiles], dtype=float)
    empty = sum(1 for r in rankings if not r.entries)
    print(f"{len(profiles)} profiles, {args.measure} + {spec.label}: l = {sizes.mean():.1f} +/- {sizes.std():.1f}")
    if empty:
        print(f"{empty} document(s) had no positively weighted term")
    print(f"wrote {out / 'profiles.jsonl'}")
    return EXIT_OK


def cmd_axioms(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    spec = cutoff.CutoffSpec(args.cutoff, args.param)
    report = axioms.run_axiom_suite(spec, args.trials, rng_seed=args.seed)
    out = _out_dir(args.out) / f"axioms_{spec.label}.json"
    out.write_text(report.to_json() + "\n", encoding="utf-8")
    print(f"{spec.label}: {args.trials} trials, seed {args.seed}")
    for line in axioms.expectation_summary(report):
        print("  " + line)
    unmet = report.unmet(args.expect)
    print(f"wrote {out}")
    if unmet:
        print(f"unmet under --expect {args.expect}: {', '.join(p.value for p in unmet)}", file=sys.stderr)
        return EXIT_EXPECTATION
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    coll = corpus.load_collection(_existing(args.collection, "collection file"))
    rankings = weighting.rank_collection(coll.documents, args.measure, coll.stats)
    out = _out_dir(args.out)
    with open(out / "curves.csv", "w", encoding="utf-8", newline="") as fh:
        concentration.write_curves_csv(rankings, fh)
    cvs = [cv for _, cv in concentration.cv_values(rankings)]
    with open(out / "cv_histogram.csv", "w", encoding="utf-8", newline="") as fh:
        concentration.write_histogram_csv(concentration.histogram_fractions(cvs, args.bin_width), fh)
    table = concentration.size_table_from_rankings(rankings, args.thresholds)
    with open(out / "size_table.csv", "w", encoding="utf-8", newline="") as fh:
        concentration.write_size_table_csv(table, fh)
    for t, (m, s) in zip(table.thresholds, table.mean_std()):
        print(f"SC{t:g}: l = {m:.1f} +/- {s:.1f}")
    print(f"wrote curves.csv, cv_histogram.csv, size_table.csv to {out}")
    return EXIT_OK


# --- evaluate config ------------------------------------------------------------

_REQUIRED = ("records", "measure", "cutoff", "seed")
_OPTIONAL = {
    "mode": "all",
    "stopwords": None,
    "bm25": {},
    "min_initiatives": 10,
    "train_frac": 0.8,
    "repetitions": 5,
    "k": 10,
}


def read_config(path: Path) -> dict[str, Any]:
    try:
        if path.suffix.lower() == ".toml":
            if sys.version_info >= (3, 11):
                import tomllib
            else:
                import tomli as tomllib
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
    except ValueError as exc:  # JSONDecodeError and TOMLDecodeError both subclass it
        raise UsageError(f"{path}: cannot parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a table/object")
    return data


def eval_config_from_mapping(data: Mapping[str, Any], base_dir: Path) -> tuple[retrieval.EvalConfig, Path]:
    """Validate an evaluate config; relative paths resolve against ``base_dir``.

    ``cutoff`` is ``{"kind": ..., "param": ...}`` or the string ``"full"``.
    """
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise UsageError(f"config is missing required key(s): {', '.join(missing)}")
    unknown = sorted(set(data) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise UsageError(f"config has unknown key(s): {', '.join(unknown)}")
    cfg = {**_OPTIONAL, **data}

    records = base_dir / cfg["records"]
    stop: frozenset[str] = frozenset()
    if cfg["stopwords"]:
        stop = frozenset(corpus.read_stopwords(_existing(base_dir / cfg["stopwords"], "stopword file")))

    raw_cut = cfg["cutoff"]
    if raw_cut == "full":
        spec = None
    elif isinstance(raw_cut, Mapping):
        missing = [k for k in ("kind", "param") if k not in raw_cut]
        if missing:
            raise UsageError(f"config cutoff is missing key(s): {', '.join('cutoff.' + k for k in missing)}")
        spec = cutoff.CutoffSpec(raw_cut["kind"], raw_cut["param"])
    else:
        raise UsageError('config cutoff must be {"kind": ..., "param": ...} or "full"')

    bm25 = cfg["bm25"]
    if not isinstance(bm25, Mapping) or set(bm25) - {"k1", "b"}:
        raise UsageError("config bm25 accepts only the keys k1 and b")
    try:
        config = retrieval.EvalConfig(
            mode=cfg["mode"],
            measure=cfg["measure"],
            cutoff=spec,
            bm25=retrieval.Bm25Params(**{k: float(v) for k, v in bm25.items()}),
            min_initiatives=int(cfg["min_initiatives"]),
            train_frac=float(cfg["train_frac"]),
            repetitions=int(cfg["repetitions"]),
            seed=int(cfg["seed"]),
            k=int(cfg["k"]),
            stopwords=stop,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc
    return config, records


def cmd_evaluate(args: argparse.Namespace) -> int:
    path = _existing(args.config, "config file")
    config, records_path = eval_config_from_mapping(read_config(path), path.parent)
    records = corpus.read_records(_existing(records_path, "records file"))
    report = retrieval.holdout_evaluate(records, config)
    out = _out_dir(args.out)
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    with open(out / "ndcg.csv", "w", encoding="utf-8", newline="") as fh:
        report.write_csv(fh)
    for rep in report.repetitions:
        print(f"repetition {rep.repetition}: NDCG@{config.k} = {rep.mean:.4f} over {len(rep.ndcg)} queries")
    print(f"grand mean NDCG@{config.k} = {report.grand_mean:.4f} +/- {report.grand_std:.4f}")
    print(f"wrote {out / 'report.json'}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="termselect", description="Term selection for document profiles.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    modes = [m.value for m in corpus.Mode]
    measures = [m.value for m in weighting.Measure]
    kinds = [k.value for k in cutoff.CutoffKind]

    ing = sub.add_parser("ingest", help="tokenize a JSONL corpus into a collection file")
    ing.add_argument("records", help="JSON Lines file of speech records")
    ing.add_argument("--stopwords", help="one stopword per line")
    ing.add_argument("--mode", choices=modes, default="all")
    ing.add_argument("--min-initiatives", type=int, default=0)
    ing.add_argument("--out", required=True)
    ing.set_defaults(func=cmd_ingest)

    prof = sub.add_parser("profile", help="weigh terms and cut each ranking into a profile")
    prof.add_argument("collection")
    prof.add_argument("--measure", choices=measures, required=True)
    prof.add_argument("--cutoff", choices=kinds, required=True)
    prof.add_argument("--param", type=float, required=True)
    prof.add_argument("--out", required=True)
    prof.set_defaults(func=cmd_profile)

    ax = sub.add_parser("axioms", help="randomized check of the concentration properties")
    ax.add_argument("--cutoff", choices=kinds, required=True)
    ax.add_argument("--param", type=float, required=True)
    ax.add_argument("--trials", type=int, default=1000)
    ax.add_argument("--seed", type=int, default=0)
    ax.add_argument("--expect", choices=["table1", "all"], default="table1")
    ax.add_argument("--out", required=True)
    ax.set_defaults(func=cmd_axioms)

    an = sub.add_parser("analyze", help="concentration curves, CV histogram, SC size table")
    an.add_argument("collection")
    an.add_argument("--measure", choices=measures, required=True)
    an.add_argument("--thresholds", type=_thresholds, default=[90.0, 95.0, 99.0, 99.7])
    an.add_argument("--bin-width", type=float, default=0.25)
    an.add_argument("--out", required=True)
    an.set_defaults(func=cmd_analyze)

    ev = sub.add_parser("evaluate", help="repeated-holdout NDCG evaluation from a JSON/TOML config")
    ev.add_argument("config")
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=cmd_evaluate)
    return p


_USAGE_ERRORS: tuple[type[BaseException], ...] = (UsageError, InvalidCutoffSpec, UnknownMode)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except _USAGE_ERRORS as exc:
        print(f"termselect {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TermSelectError, OSError) as exc:
        print(f"termselect {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:  # out-of-range flag values
        print(f"termselect {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
