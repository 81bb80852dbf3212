"""Text-pair corpora: TSV I/O, cross-paired augmentation, balanced splits."""

from __future__ import annotations

import csv
import io
import os
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .engine import EditOp, RedaConfig, augment_counted, derive_rng, make_rng
from .errors import EmptyCorpus, InsufficientExamples, OddSize, ParseError
from .lexicon import SynonymLexicon
from .text import default_segmenter, register_words, tokenize

__all__ = [
    "PairExample",
    "Corpus",
    "OpStats",
    "AugmentationReport",
    "read_corpus",
    "write_corpus",
    "augment_pair",
    "augment_corpus",
    "balanced_split",
    "corpus_stats",
]

SPLIT_NAMES = ("train", "dev", "test", "augmented")


@dataclass(frozen=True)
class PairExample:
    text_a: str
    text_b: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if not self.text_a.strip() or not self.text_b.strip():
            raise ValueError("both texts of a pair must be non-empty")


@dataclass
class Corpus:
    examples: list[PairExample] = field(default_factory=list)
    split_name: str = "train"

    def __post_init__(self):
        if self.split_name not in SPLIT_NAMES:
            raise ValueError(f"unknown split name: {self.split_name!r}")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    @property
    def labels(self) -> list[int]:
        return [ex.label for ex in self.examples]


def read_corpus(path: str | os.PathLike, split_name: str = "train") -> Corpus:
    """Load ``text_a<TAB>text_b<TAB>label`` lines; malformed lines raise ParseError."""
    examples = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", path, line_no)
            a, b, label = fields
            if label.strip() not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {label!r}", path, line_no)
            if not a.strip() or not b.strip():
                raise ParseError("empty text field", path, line_no)
            examples.append(PairExample(a, b, int(label)))
    return Corpus(examples, split_name)


def format_corpus(corpus: Iterable[PairExample]) -> str:
    return "".join(f"{ex.text_a}\t{ex.text_b}\t{ex.label}\n" for ex in corpus)


def write_corpus(corpus: Iterable[PairExample], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_corpus(corpus))


@dataclass
class OpStats:
    requested: int = 0
    attempted: int = 0
    produced: int = 0
    dedup_rejected: int = 0
    shortfall: int = 0

    def __iadd__(self, other: "OpStats") -> "OpStats":
        self.requested += other.requested
        self.attempted += other.attempted
        self.produced += other.produced
        self.dedup_rejected += other.dedup_rejected
        self.shortfall += other.shortfall
        return self


@dataclass
class AugmentationReport:
    n_aug: int = 0
    input_pairs: int = 0
    output_pairs: int = 0
    per_op: "OrderedDict[EditOp, OpStats]" = field(default_factory=OrderedDict)

    def stats(self, op: EditOp) -> OpStats:
        return self.per_op.setdefault(EditOp.parse(op), OpStats())

    def merge(self, other: "AugmentationReport") -> "AugmentationReport":
        self.input_pairs += other.input_pairs
        self.output_pairs += other.output_pairs
        self.n_aug = self.n_aug or other.n_aug
        for op, st in other.per_op.items():
            self.stats(op).__iadd__(st)
        return self

    @property
    def ops(self) -> list[EditOp]:
        return list(self.per_op)

    def as_text(self) -> str:
        lines = [f"input_pairs {self.input_pairs}",
                 f"output_pairs {self.output_pairs}",
                 f"n_aug {self.n_aug}"]
        for op, st in self.per_op.items():
            for key in ("requested", "attempted", "produced", "dedup_rejected", "shortfall"):
                lines.append(f"{op.value}.{key} {getattr(st, key)}")
        return "\n".join(lines) + "\n"

    def as_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["op", "requested", "attempted", "produced", "dedup_rejected", "shortfall",
                    "input_pairs", "output_pairs", "n_aug"])
        for op, st in self.per_op.items():
            w.writerow([op.value, st.requested, st.attempted, st.produced, st.dedup_rejected,
                        st.shortfall, self.input_pairs, self.output_pairs, self.n_aug])
        return buf.getvalue()


def _augment_pair_into(pair: PairExample, ops: Sequence[EditOp], n_aug: int, cfg: RedaConfig,
                       lex: SynonymLexicon, rng, report: AugmentationReport) -> list[PairExample]:
    out = []
    seqs = (tokenize(pair.text_a, lex.language), tokenize(pair.text_b, lex.language))
    for op in ops:
        st = report.stats(op)
        for side in (0, 1):
            text = pair.text_a if side == 0 else pair.text_b
            variants, attempts, rejected = augment_counted(text, op, n_aug, cfg, lex, rng, seqs[side])
            st.requested += n_aug
            st.attempted += attempts
            st.dedup_rejected += rejected
            st.produced += len(variants)
            st.shortfall += n_aug - len(variants)
            if side == 0:
                out.extend(PairExample(v, pair.text_b, pair.label) for v in variants)
            else:
                out.extend(PairExample(pair.text_a, v, pair.label) for v in variants)
    return out


def augment_pair(pair: PairExample, ops: Sequence[EditOp], cfg: RedaConfig, lex: SynonymLexicon,
                 rng, n_aug: int | None = None) -> list[PairExample]:
    """Cross-paired augmentations of one pair, originals excluded.

    Each augmented text is paired with the untouched partner text and keeps
    the source label. ``n_aug`` defaults to ``cfg.n_aug_small``; corpus-level
    callers resolve it from the corpus size.
    """
    ops = [EditOp.parse(op) for op in ops]
    if n_aug is None:
        n_aug = cfg.n_aug_small
    return _augment_pair_into(pair, ops, n_aug, cfg, lex, rng, AugmentationReport())


def _augment_chunk(args):
    start, pairs, ops, n_aug, cfg, lex, words = args
    if words:
        register_words(words)
    report = AugmentationReport()
    for op in ops:
        report.stats(op)
    results = []
    for offset, pair in enumerate(pairs):
        rng = derive_rng(cfg.seed, start + offset)
        results.append(_augment_pair_into(pair, ops, n_aug, cfg, lex, rng, report))
    return results, report


def augment_corpus(corpus: Corpus | Sequence[PairExample], ops: Sequence[EditOp], cfg: RedaConfig,
                   lex: SynonymLexicon, jobs: int = 1,
                   chunk_size: int = 2000) -> tuple[Corpus, AugmentationReport]:
    """Augment every pair and return originals followed by their augmentations.

    Example ``i`` draws from a generator derived from ``(cfg.seed, i)``, so the
    output does not depend on ``jobs`` or on scheduling order.
    """
    examples = list(corpus.examples if isinstance(corpus, Corpus) else corpus)
    if not examples:
        raise EmptyCorpus("cannot augment an empty corpus")
    ops = [EditOp.parse(op) for op in ops]
    n_aug = cfg.n_aug_for(len(examples))
    words = sorted(default_segmenter().words) if jobs > 1 else []
    tasks = [(start, examples[start:start + chunk_size], ops, n_aug, cfg, lex, words)
             for start in range(0, len(examples), chunk_size)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_augment_chunk, tasks))
    else:
        parts = [_augment_chunk(t) for t in tasks]

    report = AugmentationReport(n_aug=n_aug, input_pairs=len(examples))
    for op in ops:
        report.stats(op)
    augmented: list[PairExample] = []
    for results, part in parts:
        report.merge(part)
        for res in results:
            augmented.extend(res)
    report.n_aug = n_aug
    report.input_pairs = len(examples)
    report.output_pairs = len(examples) + len(augmented)
    return Corpus(examples + augmented, "augmented"), report


def balanced_split(pairs: Sequence[PairExample], train_n: int, dev_n: int, test_n: int,
                   seed: int) -> tuple[Corpus, Corpus, Corpus]:
    """Three disjoint corpora, each half matched and half mismatched."""
    sizes = (train_n, dev_n, test_n)
    for s in sizes:
        if s < 0:
            raise ValueError("split sizes must be >= 0")
        if s % 2:
            raise OddSize(f"split size {s} is odd; balanced splits need even sizes")
    pairs = list(pairs.examples if isinstance(pairs, Corpus) else pairs)
    need = sum(sizes) // 2
    by_label = {1: [ex for ex in pairs if ex.label == 1], 0: [ex for ex in pairs if ex.label == 0]}
    for label, group in by_label.items():
        if len(group) < need:
            raise InsufficientExamples(
                f"need {need} examples with label {label}, have {len(group)}")
    rng = make_rng(seed)
    pools = {}
    for label in (1, 0):
        group = by_label[label][:]
        rng.shuffle(group)
        pools[label] = group
    out = []
    offset = 0
    for name, size in zip(("train", "dev", "test"), sizes):
        half = size // 2
        chosen = pools[1][offset:offset + half] + pools[0][offset:offset + half]
        offset += half
        rng.shuffle(chosen)
        out.append(Corpus(chosen, name))
    return tuple(out)


def corpus_stats(corpus: Corpus | Iterable[PairExample]) -> tuple[int, int, int]:
    """``(total, matched, mismatched)`` counts."""
    total = matched = 0
    for ex in corpus:
        total += 1
        matched += ex.label
    return total, matched, total - matched
