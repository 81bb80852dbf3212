"""Batch command-line front end: ``reda <subcommand> [flags]``.

Exit status is 0 on success, 1 on data errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .engine import ALL_OPS, EditOp, RedaConfig
from .errors import RedaError
from .experiments import SweepSpec, generate_toy_corpus, generate_toy_lexicon, run_ablation, run_size_sweep
from .lexicon import SynonymLexicon, load_lexicon
from .matcher import TrainConfig, load_checkpoint, train
from .pipeline import augment_corpus, balanced_split, corpus_stats, read_corpus, write_corpus
from .text import LanguageMode

log = logging.getLogger("reda")


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def _ops(value: str) -> list[EditOp]:
    try:
        ops = EditOp.parse_list(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not ops:
        raise argparse.ArgumentTypeError("at least one op is required")
    return ops


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _add_common(p, lang=True, seed=True, jobs=False):
    if lang:
        p.add_argument("--lang", choices=["en", "zh"], default="en", help="language mode (default: en)")
    if seed:
        p.add_argument("--seed", type=_seed, default=0, help="master seed for all randomness")
    if jobs:
        p.add_argument("--jobs", type=int, default=1, help="worker processes for augmentation")


def _add_reda(p):
    g = p.add_argument_group("augmentation")
    g.add_argument("--lex", help="synonym lexicon TSV (omit for none)")
    g.add_argument("--rate-sr", type=float, default=0.2)
    g.add_argument("--rate-rs", type=float, default=0.2)
    g.add_argument("--rate-ri", type=float, default=0.1)
    g.add_argument("--rate-rd", type=float, default=0.1)
    g.add_argument("--rm-min", type=int, default=2, help="fewest ops Random Mix applies")
    g.add_argument("--rm-max", type=int, default=2, help="most ops Random Mix applies")
    g.add_argument("--rm-edits", type=int, default=1, help="edits per op inside Random Mix")
    g.add_argument("--naug-small", type=int, default=2)
    g.add_argument("--naug-large", type=int, default=1)
    g.add_argument("--threshold", type=int, default=50_000,
                   help="corpora smaller than this use --naug-small")
    g.add_argument("--retry-factor", type=int, default=10)


def _add_train(p):
    g = p.add_argument_group("training")
    g.add_argument("--epochs", type=int, default=3)
    g.add_argument("--batch", type=int, default=64)
    g.add_argument("--lr", type=float, default=0.0005)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reda", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("augment", help="augment a pair corpus")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ops", type=_ops, default=list(ALL_OPS), help="comma list from sr,ri,rs,rd,rm")
    p.add_argument("--report", help="CSV report path (default: OUT.report.csv)")
    _add_common(p, jobs=True)
    _add_reda(p)

    p = sub.add_parser("stats", help="print matched/mismatched counts")
    p.add_argument("--in", dest="inp", required=True)

    p = sub.add_parser("split", help="label-balanced train/dev/test split")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sizes", type=_int_list, required=True, help="TRAIN,DEV,TEST")
    _add_common(p, lang=False)

    p = sub.add_parser("train", help="train the CBOW matcher")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--dev")
    p.add_argument("--out", required=True, help="checkpoint path")
    _add_common(p)
    _add_train(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="write metrics JSON here")

    for name, text in (("sweep", "size sweep, all ops combined"), ("ablate", "per-op ablation")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--out", required=True, help="report CSV path")
        p.add_argument("--sizes", type=_int_list, required=True)
        p.add_argument("--dev-size", type=int, default=400)
        p.add_argument("--test-size", type=int, default=400)
        _add_common(p, jobs=True)
        _add_reda(p)
        _add_train(p)

    p = sub.add_parser("toygen", help="write a synthetic pair corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=4000, help="number of pairs (even)")
    p.add_argument("--vocab-size", type=int, default=60)
    p.add_argument("--lex-out", help="also write a sparse synonym lexicon here")
    _add_common(p, lang=False)
    return parser


def _reda_config(args, parser) -> RedaConfig:
    try:
        return RedaConfig(rate_sr=args.rate_sr, rate_rs=args.rate_rs, rate_ri=args.rate_ri,
                          rate_rd=args.rate_rd, rm_min_ops=args.rm_min, rm_max_ops=args.rm_max,
                          rm_edits_per_op=args.rm_edits, n_aug_small=args.naug_small,
                          n_aug_large=args.naug_large, small_corpus_threshold=args.threshold,
                          retry_factor=args.retry_factor, seed=args.seed)
    except ValueError as exc:
        parser.error(str(exc))


def _train_config(args, parser) -> TrainConfig:
    try:
        return TrainConfig(batch_size=args.batch, learning_rate=args.lr, epochs=args.epochs,
                           seed=args.seed)
    except ValueError as exc:
        parser.error(str(exc))


def _lexicon(args) -> SynonymLexicon:
    mode = LanguageMode.parse(args.lang)
    if args.lex:
        return load_lexicon(args.lex, mode)
    return SynonymLexicon({}, mode)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_augment(args, parser) -> None:
    cfg = _reda_config(args, parser)
    lex = _lexicon(args)
    corpus = read_corpus(args.inp)
    augmented, report = augment_corpus(corpus, args.ops, cfg, lex, jobs=args.jobs)
    write_corpus(augmented, args.out)
    _write_text(args.report or f"{args.out}.report.csv", report.as_csv())
    sys.stdout.write(report.as_text())


def cmd_stats(args, parser) -> None:
    total, matched, mismatched = corpus_stats(read_corpus(args.inp))
    print(f"total {total} matched {matched} mismatched {mismatched}")


def cmd_split(args, parser) -> None:
    if len(args.sizes) != 3:
        parser.error("--sizes needs exactly three values: TRAIN,DEV,TEST")
    corpus = read_corpus(args.inp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for part in balanced_split(corpus, *args.sizes, seed=args.seed):
        write_corpus(part, out / f"{part.split_name}.tsv")
        total, matched, mismatched = corpus_stats(part)
        print(f"{part.split_name} total {total} matched {matched} mismatched {mismatched}")


def cmd_train(args, parser) -> None:
    cfg = _train_config(args, parser)
    mode = LanguageMode.parse(args.lang)
    train_corpus = read_corpus(args.inp)
    dev = read_corpus(args.dev, "dev") if args.dev else None
    model = train(train_corpus, dev, cfg, mode)
    model.save(args.out)
    for rec in model.history:
        line = f"epoch {rec.epoch} train_loss {rec.train_loss:.6f}"
        if rec.dev is not None:
            line += (f" dev_accuracy {rec.dev.accuracy:.6f} dev_precision {rec.dev.precision:.6f}"
                     f" dev_recall {rec.dev.recall:.6f}")
        print(line)


def cmd_eval(args, parser) -> None:
    model = load_checkpoint(args.model)
    metrics = model.evaluate(read_corpus(args.inp, "test"))
    d = metrics.as_dict()
    print(" ".join(f"{k} {v:.6f}" if isinstance(v, float) else f"{k} {v}" for k, v in d.items()))
    if args.out:
        _write_text(args.out, json.dumps(d, indent=2, sort_keys=True) + "\n")


def _sidecar(path: str, suffix: str) -> str:
    root, _ = os.path.splitext(path)
    return f"{root}.{suffix}"


def cmd_experiment(args, parser) -> None:
    try:
        spec = SweepSpec(sizes=tuple(args.sizes),
                         ops_mode="combined" if args.command == "sweep" else "ablation",
                         reda_cfg=_reda_config(args, parser), train_cfg=_train_config(args, parser),
                         mode=LanguageMode.parse(args.lang), dev_size=args.dev_size,
                         test_size=args.test_size, seed=args.seed, jobs=args.jobs)
    except ValueError as exc:
        parser.error(str(exc))
    lex = _lexicon(args)
    corpus = read_corpus(args.inp)
    runner = run_size_sweep if args.command == "sweep" else run_ablation
    report = runner(corpus, spec, lex)
    _write_text(args.out, report.to_csv())
    _write_text(_sidecar(args.out, "sizes.csv"), report.sizes_csv())
    _write_text(_sidecar(args.out, "meta.json"),
                json.dumps(report.metadata, indent=2, sort_keys=True, default=str) + "\n")
    for metric in ("accuracy", "precision", "recall"):
        print(report.pretty_table(metric))


def cmd_toygen(args, parser) -> None:
    try:
        corpus = generate_toy_corpus(args.n, args.vocab_size, args.seed)
    except ValueError as exc:
        parser.error(str(exc))
    write_corpus(corpus, args.out)
    if args.lex_out:
        lex = generate_toy_lexicon(args.vocab_size, seed=args.seed)
        _write_text(args.lex_out, "".join(f"{h}\t" + "\t".join(s) + "\n" for h, s in lex.entries.items()))
    total, matched, mismatched = corpus_stats(corpus)
    print(f"total {total} matched {matched} mismatched {mismatched}")


COMMANDS = {
    "augment": cmd_augment,
    "stats": cmd_stats,
    "split": cmd_split,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_experiment,
    "ablate": cmd_experiment,
    "toygen": cmd_toygen,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args, parser)
    except (RedaError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"reda: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
