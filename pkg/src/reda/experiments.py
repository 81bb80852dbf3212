"""Size sweeps and per-operation ablations on text-pair corpora.

Both designs train one baseline per size on a label-stratified subsample
and one augmented model per (size, op) on the same subsample plus its
augmentations, then score everything on one fixed test split.
"""

from __future__ import annotations

import csv
import io
import logging
import random
from dataclasses import dataclass, field, replace
from statistics import fmean
from typing import Sequence

from .engine import ALL_OPS, EditOp, RedaConfig, derive_seed
from .errors import InsufficientExamples
from .lexicon import SynonymLexicon
from .matcher import TrainConfig, train
from .pipeline import Corpus, PairExample, augment_corpus, balanced_split
from .text import LanguageMode

__all__ = [
    "generate_toy_corpus",
    "generate_toy_lexicon",
    "SweepSpec",
    "SweepRow",
    "SweepReport",
    "run_size_sweep",
    "run_ablation",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["size", "op", "variant", "accuracy", "precision", "recall",
              "train_examples", "augmented_examples", "seed"]
# column order of the per-op augmented size table
SIZE_TABLE_OPS = (EditOp.SR, EditOp.RS, EditOp.RI, EditOp.RD, EditOp.RM)
COMBINED = "combined"


def _toy_words(vocab_size: int):
    n_topics = max(2, vocab_size // 20)
    anchors = [f"topic{j}" for j in range(n_topics)]
    others = [f"other{j}" for j in range(n_topics)]
    filler = [f"w{i}" for i in range(vocab_size - 2 * n_topics)]
    return anchors, others, filler


def generate_toy_corpus(n_pairs: int, vocab_size: int = 60, seed: int = 0) -> Corpus:
    """Label-balanced synthetic matching task.

    Every text is 4-8 filler words plus one topic token. Matched pairs carry
    the same anchor topic on both sides. Mismatched pairs carry two different
    topics, at least one of them from the off-topic set, so the label is
    recoverable from per-text evidence.
    """
    if n_pairs % 2:
        raise ValueError("n_pairs must be even")
    if vocab_size < 20:
        raise ValueError("vocab_size must be >= 20")
    rng = random.Random(seed)
    anchors, others, filler = _toy_words(vocab_size)

    def text(topic):
        words = [filler[rng.randrange(len(filler))] for _ in range(rng.randint(4, 8))]
        words.insert(rng.randrange(len(words) + 1), topic)
        return " ".join(words)

    examples = []
    for k in range(n_pairs):
        label = k % 2
        if label:
            ta = tb = rng.choice(anchors)
        else:
            kind = rng.randrange(3)
            if kind == 0:
                ta, tb = rng.choice(anchors), rng.choice(others)
            elif kind == 1:
                ta, tb = rng.choice(others), rng.choice(anchors)
            else:
                ta, tb = rng.sample(others, 2)
        examples.append(PairExample(text(ta), text(tb), label))
    rng.shuffle(examples)
    return Corpus(examples, "train")


def generate_toy_lexicon(vocab_size: int = 60, coverage: float = 0.4, max_synonyms: int = 3,
                         seed: int = 0) -> SynonymLexicon:
    """Sparse synonym lexicon over the toy filler words; topic tokens get none."""
    rng = random.Random(seed)
    _, _, filler = _toy_words(vocab_size)
    heads = sorted(rng.sample(filler, round(coverage * len(filler))), key=filler.index)
    entries = {}
    for head in heads:
        pool = [w for w in filler if w != head]
        entries[head] = rng.sample(pool, rng.randint(1, max_synonyms))
    return SynonymLexicon.from_mapping(entries, LanguageMode.ENGLISH)


@dataclass(frozen=True)
class SweepSpec:
    sizes: tuple[int, ...]
    ops_mode: str = COMBINED
    reda_cfg: RedaConfig = field(default_factory=RedaConfig.experiment)
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    mode: LanguageMode = LanguageMode.ENGLISH
    dev_size: int = 400
    test_size: int = 400
    seed: int = 0
    model: str = "cbow"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes:
            raise ValueError("at least one size is required")
        if any(s <= 0 for s in self.sizes):
            raise ValueError("sizes must be positive")
        if any(a >= b for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly ascending")
        if self.ops_mode not in (COMBINED, "ablation"):
            raise ValueError(f"unknown ops_mode: {self.ops_mode!r}")

    def op_groups(self) -> list[tuple[str, list[EditOp]]]:
        if self.ops_mode == COMBINED:
            return [(COMBINED, list(ALL_OPS))]
        return [(op.value, [op]) for op in ALL_OPS]


@dataclass(frozen=True)
class SweepRow:
    size: int
    op: str
    variant: str
    accuracy: float
    precision: float
    recall: float
    train_examples: int
    augmented_examples: int
    seed: int
    model: str = "cbow"

    def csv_fields(self) -> list:
        return [self.size, self.op, self.variant, f"{self.accuracy:.6f}", f"{self.precision:.6f}",
                f"{self.recall:.6f}", self.train_examples, self.augmented_examples, self.seed]


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    augmented_sizes: dict = field(default_factory=dict)  # (size, op) -> examples

    def sorted_rows(self) -> list[SweepRow]:
        op_rank = {COMBINED: -1, **{op.value: i for i, op in enumerate(ALL_OPS)}}
        return sorted(self.rows, key=lambda r: (r.size, op_rank.get(r.op, 99), r.variant != "baseline"))

    def averages(self) -> list[SweepRow]:
        """Mean of each metric over sizes, per (op, variant)."""
        groups: dict[tuple[str, str], list[SweepRow]] = {}
        for row in self.sorted_rows():
            groups.setdefault((row.op, row.variant), []).append(row)
        out = []
        for (op, variant), rows in groups.items():
            out.append(SweepRow(0, op, variant, fmean(r.accuracy for r in rows),
                                fmean(r.precision for r in rows), fmean(r.recall for r in rows),
                                round(fmean(r.train_examples for r in rows)),
                                round(fmean(r.augmented_examples for r in rows)),
                                rows[0].seed, rows[0].model))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.sorted_rows():
            w.writerow(row.csv_fields())
        return buf.getvalue()

    def sizes_csv(self) -> str:
        """Augmented training-set sizes: one column per op (or one ``augmented`` column)."""
        ops = sorted({op for _, op in self.augmented_sizes},
                     key=lambda o: [COMBINED, *(x.value for x in SIZE_TABLE_OPS)].index(o))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["size", *(("augmented",) if ops == [COMBINED] else [o.upper() for o in ops])])
        for size in sorted({s for s, _ in self.augmented_sizes}):
            w.writerow([size, *(self.augmented_sizes[(size, o)] for o in ops)])
        return buf.getvalue()

    def pretty_table(self, metric: str = "accuracy") -> str:
        rows = self.sorted_rows()
        sizes = sorted({r.size for r in rows})
        cells = {(r.op, r.variant, r.size): getattr(r, metric) for r in rows}
        avg = {(r.op, r.variant): getattr(r, metric) for r in self.averages()}
        ops = list(dict.fromkeys(r.op for r in rows))
        model = rows[0].model.upper() if rows else "MODEL"
        head = [metric.capitalize(), *(_size_label(s) for s in sizes), "Average"]
        lines = [head]
        if ops:
            # the baseline is shared by every op at a given size
            lines.append([model, *(_pct(cells.get((ops[0], "baseline", s))) for s in sizes),
                          _pct(avg.get((ops[0], "baseline")))])
        for op in ops:
            tag = "+ REDA" if op == COMBINED else f"+ {op.upper()}"
            lines.append([f"  {tag}", *(_pct(cells.get((op, "augmented", s))) for s in sizes),
                          _pct(avg.get((op, "augmented")))])
        widths = [max(len(line[i]) for line in lines) for i in range(len(head))]
        text = []
        for i, line in enumerate(lines):
            text.append("  ".join(c.ljust(widths[0]) if j == 0 else c.rjust(widths[j])
                                  for j, c in enumerate(line)))
            if i == 0:
                text.append("-" * len(text[0]))
        return "\n".join(text) + "\n"


def _size_label(size: int) -> str:
    return f"{size // 1000}k" if size >= 1000 and size % 1000 == 0 else str(size)


def _pct(value) -> str:
    return "-" if value is None else f"{100 * value:.1f}%"


def _fixed_splits(corpus: Sequence[PairExample], spec: SweepSpec):
    dev_and_test = balanced_split(corpus, 0, spec.dev_size, spec.test_size,
                                  derive_seed(spec.seed, "heldout"))
    _, dev, test = dev_and_test
    used = {id(ex) for ex in dev.examples} | {id(ex) for ex in test.examples}
    pool = [ex for ex in corpus if id(ex) not in used]
    return pool, dev, test


def stratified_sample(pool: Sequence[PairExample], size: int, seed: int) -> list[PairExample]:
    """``size`` examples, half per label where the pool allows, seeded."""
    if size > len(pool):
        raise InsufficientExamples(f"size {size} exceeds the {len(pool)} available examples")
    rng = random.Random(seed)
    pos = [ex for ex in pool if ex.label == 1]
    neg = [ex for ex in pool if ex.label == 0]
    rng.shuffle(pos)
    rng.shuffle(neg)
    n_pos = min(len(pos), size - size // 2)
    n_neg = min(len(neg), size - n_pos)
    n_pos = size - n_neg
    sample = pos[:n_pos] + neg[:n_neg]
    rng.shuffle(sample)
    return sample


def _run(corpus, spec: SweepSpec, lex: SynonymLexicon) -> SweepReport:
    examples = list(corpus.examples if isinstance(corpus, Corpus) else corpus)
    pool, dev, test = _fixed_splits(examples, spec)
    if spec.sizes[-1] > len(pool):
        raise InsufficientExamples(
            f"largest size {spec.sizes[-1]} exceeds the {len(pool)} examples left after dev/test")
    report = SweepReport(metadata={
        "ops_mode": spec.ops_mode,
        "model": spec.model,
        "seed": spec.seed,
        "sampling": "label-stratified subsample per size",
        "dev_size": len(dev),
        "test_size": len(test),
        "n_aug": {},
        "reda": {k: getattr(spec.reda_cfg, k) for k in spec.reda_cfg.__dataclass_fields__},
        "train": {k: getattr(spec.train_cfg, k) for k in spec.train_cfg.__dataclass_fields__},
    })

    for size in spec.sizes:
        subsample = stratified_sample(pool, size, derive_seed(spec.seed, "subsample", size))
        train_cfg = replace(spec.train_cfg, seed=derive_seed(spec.seed, "train", size))
        report.metadata["n_aug"][size] = spec.reda_cfg.n_aug_for(size)
        log.info("size %d: baseline", size)
        base = train(subsample, dev, train_cfg, spec.mode).evaluate(test)
        for name, ops in spec.op_groups():
            cfg = replace(spec.reda_cfg, seed=derive_seed(spec.seed, "reda", size, name))
            augmented, aug_report = augment_corpus(subsample, ops, cfg, lex, jobs=spec.jobs)
            report.augmented_sizes[(size, name)] = len(augmented)
            log.info("size %d: %s (%d examples)", size, name, len(augmented))
            aug = train(augmented, dev, train_cfg, spec.mode).evaluate(test)
            for variant, m, n_aug_ex in (("baseline", base, 0), ("augmented", aug, len(augmented))):
                report.rows.append(SweepRow(size, name, variant, m.accuracy, m.precision, m.recall,
                                            size, n_aug_ex, spec.seed, spec.model))
    report.rows = report.sorted_rows()
    return report


def run_size_sweep(corpus, spec: SweepSpec, lex: SynonymLexicon) -> SweepReport:
    """Baseline vs. all-five-ops augmentation at every size."""
    if spec.ops_mode != COMBINED:
        spec = replace(spec, ops_mode=COMBINED)
    return _run(corpus, spec, lex)


def run_ablation(corpus, spec: SweepSpec, lex: SynonymLexicon) -> SweepReport:
    """Baseline vs. each single op at every size; the baseline is trained once per size."""
    if spec.ops_mode != "ablation":
        spec = replace(spec, ops_mode="ablation")
    return _run(corpus, spec, lex)
