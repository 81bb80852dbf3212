"""The five random edit operations and the deduplicating augmenter.

All randomness is drawn through ``rng.randrange`` so any object exposing
that method (``random.Random`` in practice) can drive the engine.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from functools import lru_cache

from .lexicon import SynonymLexicon
from .text import TokenSeq, is_word_token, join_tokens, tokenize

__all__ = [
    "EditOp",
    "RedaConfig",
    "make_rng",
    "derive_rng",
    "derive_seed",
    "num_edits",
    "synonym_replacement",
    "random_insertion",
    "random_swap",
    "random_deletion",
    "random_mix",
    "apply_op",
    "augment",
]

RATE_SCALE = 10_000


class EditOp(enum.Enum):
    SR = "sr"
    RI = "ri"
    RS = "rs"
    RD = "rd"
    RM = "rm"

    @classmethod
    def parse(cls, value: "str | EditOp") -> "EditOp":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown edit operation: {value!r}") from None

    @classmethod
    def parse_list(cls, spec: str) -> list["EditOp"]:
        return [cls.parse(part) for part in spec.split(",") if part.strip()]


ALL_OPS = (EditOp.SR, EditOp.RI, EditOp.RS, EditOp.RD, EditOp.RM)
BASIC_OPS = (EditOp.SR, EditOp.RI, EditOp.RS, EditOp.RD)


_RATE_FIELDS = {EditOp.SR: "rate_sr", EditOp.RS: "rate_rs", EditOp.RI: "rate_ri", EditOp.RD: "rate_rd"}


@dataclass(frozen=True)
class RedaConfig:
    rate_sr: float = 0.2
    rate_rs: float = 0.2
    rate_ri: float = 0.1
    rate_rd: float = 0.1
    rm_min_ops: int = 2
    rm_max_ops: int = 4
    rm_edits_per_op: int = 1
    n_aug_small: int = 2
    n_aug_large: int = 1
    small_corpus_threshold: int = 50_000
    retry_factor: int = 10
    seed: int = 0

    def __post_init__(self):
        for name in ("rate_sr", "rate_rs", "rate_ri", "rate_rd"):
            rate = getattr(self, name)
            if not 0 <= rate <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")
        if not 2 <= self.rm_min_ops <= self.rm_max_ops <= 4:
            raise ValueError("need 2 <= rm_min_ops <= rm_max_ops <= 4")
        for name in ("rm_edits_per_op", "n_aug_small", "n_aug_large", "retry_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.small_corpus_threshold < 0:
            raise ValueError("small_corpus_threshold must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def experiment(cls, **overrides) -> "RedaConfig":
        """Preset used for the size sweeps and ablations: Random Mix runs exactly two ops."""
        overrides.setdefault("rm_min_ops", 2)
        overrides.setdefault("rm_max_ops", 2)
        overrides.setdefault("rm_edits_per_op", 1)
        return cls(**overrides)

    def rate(self, op: EditOp) -> float:
        return getattr(self, _RATE_FIELDS[op])

    def n_aug_for(self, corpus_size: int) -> int:
        return self.n_aug_small if corpus_size < self.small_corpus_threshold else self.n_aug_large


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def _digest(seed, keys, size):
    h = hashlib.blake2b(digest_size=size)
    h.update(str(seed).encode())
    for k in keys:
        h.update(b"\x1f")
        h.update(str(k).encode())
    return int.from_bytes(h.digest(), "big")


def derive_rng(seed: int, *keys: int | str) -> random.Random:
    """An independent generator keyed on ``(seed, *keys)``; stable across processes."""
    return random.Random(_digest(seed, keys, 16))


def derive_seed(seed: int, *keys: int | str) -> int:
    """A 64-bit seed keyed on ``(seed, *keys)``."""
    return _digest(seed, keys, 8)


@lru_cache(maxsize=256)
def _rate_units(rate) -> int:
    units = (Decimal(str(rate)) * RATE_SCALE).to_integral_value(ROUND_HALF_EVEN)
    return int(units)


def num_edits(rate: float, length: int) -> int:
    """Edit count ``rate * length`` rounded half-to-even in exact integer arithmetic.

    ``rate`` is taken as a whole number of ten-thousandths, so 0.1 * 25 gives
    2 (2.5 rounds to even) where doubles would give 3.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    q, r = divmod(_rate_units(rate) * length, RATE_SCALE)
    twice = 2 * r
    if twice > RATE_SCALE or (twice == RATE_SCALE and q % 2):
        q += 1
    return q


# In-place list kernels. ``entries`` is the lexicon mapping.

def _sr(tokens, flags, n, entries, rng):
    for _ in range(n):
        eligible = [i for i, t in enumerate(tokens) if flags[i] and t in entries]
        if not eligible:
            return
        i = eligible[rng.randrange(len(eligible))]
        syns = entries[tokens[i]]
        s = syns[rng.randrange(len(syns))]
        tokens[i] = s
        flags[i] = is_word_token(s)


def _ri(tokens, flags, n, entries, rng):
    for _ in range(n):
        eligible = [i for i, t in enumerate(tokens) if flags[i] and t in entries]
        if not eligible:
            return
        i = eligible[rng.randrange(len(eligible))]
        syns = entries[tokens[i]]
        s = syns[rng.randrange(len(syns))]
        gap = rng.randrange(len(tokens) + 1)
        tokens.insert(gap, s)
        flags.insert(gap, is_word_token(s))


def _rs(tokens, flags, n, rng):
    size = len(tokens)
    if size < 2:
        return
    for _ in range(n):
        i = rng.randrange(size)
        j = rng.randrange(size - 1)
        if j >= i:
            j += 1
        tokens[i], tokens[j] = tokens[j], tokens[i]
        flags[i], flags[j] = flags[j], flags[i]


def _pick_distinct(rng, size, k):
    """First ``k`` slots of a partial Fisher-Yates shuffle of ``range(size)``."""
    pool = list(range(size))
    for t in range(k):
        r = t + rng.randrange(size - t)
        pool[t], pool[r] = pool[r], pool[t]
    return pool[:k]


def _rd(tokens, flags, n, rng):
    k = min(n, len(tokens) - 1)
    if k <= 0:
        return
    drop = set(_pick_distinct(rng, len(tokens), k))
    keep = [i for i in range(len(tokens)) if i not in drop]
    tokens[:] = [tokens[i] for i in keep]
    flags[:] = [flags[i] for i in keep]


def _run(op, tokens, flags, n, entries, rng):
    if op is EditOp.SR:
        _sr(tokens, flags, n, entries, rng)
    elif op is EditOp.RI:
        _ri(tokens, flags, n, entries, rng)
    elif op is EditOp.RS:
        _rs(tokens, flags, n, rng)
    elif op is EditOp.RD:
        _rd(tokens, flags, n, rng)
    else:
        raise ValueError(f"not a basic edit operation: {op}")


def _rm(tokens, flags, cfg, entries, rng):
    k = cfg.rm_min_ops + rng.randrange(cfg.rm_max_ops - cfg.rm_min_ops + 1)
    for idx in _pick_distinct(rng, len(BASIC_OPS), k):
        _run(BASIC_OPS[idx], tokens, flags, cfg.rm_edits_per_op, entries, rng)


def _rebuild(seq: TokenSeq, tokens, flags) -> TokenSeq:
    return TokenSeq(tuple(tokens), seq.mode, tuple(flags))


def synonym_replacement(seq: TokenSeq, n: int, lex: SynonymLexicon, rng) -> TokenSeq:
    """Replace one token at a time, ``n`` times, with a random synonym.

    Only the chosen position changes; other occurrences of the same word are
    left alone. Eligible positions are recomputed after every step.
    """
    tokens, flags = list(seq.tokens), list(seq.word_flags)
    _sr(tokens, flags, n, lex.entries, rng)
    return _rebuild(seq, tokens, flags)


def random_insertion(seq: TokenSeq, n: int, lex: SynonymLexicon, rng) -> TokenSeq:
    tokens, flags = list(seq.tokens), list(seq.word_flags)
    _ri(tokens, flags, n, lex.entries, rng)
    return _rebuild(seq, tokens, flags)


def random_swap(seq: TokenSeq, n: int, rng) -> TokenSeq:
    tokens, flags = list(seq.tokens), list(seq.word_flags)
    _rs(tokens, flags, n, rng)
    return _rebuild(seq, tokens, flags)


def random_deletion(seq: TokenSeq, n: int, rng) -> TokenSeq:
    """Delete ``min(n, len - 1)`` distinct random tokens; one always survives."""
    tokens, flags = list(seq.tokens), list(seq.word_flags)
    _rd(tokens, flags, n, rng)
    return _rebuild(seq, tokens, flags)


def random_mix(seq: TokenSeq, cfg: RedaConfig, lex: SynonymLexicon, rng) -> TokenSeq:
    tokens, flags = list(seq.tokens), list(seq.word_flags)
    _rm(tokens, flags, cfg, lex.entries, rng)
    return _rebuild(seq, tokens, flags)


def edits_for(op: EditOp, length: int, cfg: RedaConfig) -> int:
    """Edit count used by ``augment`` for a basic op on a text of ``length`` tokens."""
    return num_edits(cfg.rate(op), length)


def apply_op(seq: TokenSeq, op: EditOp, cfg: RedaConfig, lex: SynonymLexicon, rng) -> TokenSeq:
    """One application of ``op`` with its configured edit budget."""
    tokens, flags = list(seq.tokens), list(seq.word_flags)
    if op is EditOp.RM:
        _rm(tokens, flags, cfg, lex.entries, rng)
    else:
        _run(op, tokens, flags, edits_for(op, len(tokens), cfg), lex.entries, rng)
    return _rebuild(seq, tokens, flags)


def _cannot_change(seq: TokenSeq, op: EditOp, cfg: RedaConfig, entries) -> bool:
    """Cheap check for inputs where every attempt would reproduce the original."""
    if op is EditOp.RM:
        return len(seq) < 2 and not any(f and t in entries for t, f in zip(seq.tokens, seq.word_flags))
    n = edits_for(op, len(seq), cfg)
    if n == 0:
        return True
    if op in (EditOp.SR, EditOp.RI):
        return not any(f and t in entries for t, f in zip(seq.tokens, seq.word_flags))
    return len(seq) < 2


def augment_counted(text: str, op: EditOp, n_aug: int, cfg: RedaConfig,
                    lex: SynonymLexicon, rng, seq: TokenSeq | None = None) -> tuple[list[str], int, int]:
    """Like :func:`augment` but also return ``(attempts, duplicate_rejections)``.

    ``seq`` may carry the already tokenized ``text`` to skip re-tokenizing.
    """
    if n_aug < 1:
        raise ValueError("n_aug must be >= 1")
    op = EditOp.parse(op)
    if seq is None:
        seq = tokenize(text, lex.language)
    entries = lex.entries
    if _cannot_change(seq, op, cfg, entries):
        return [], 0, 0
    mode = seq.mode
    original = join_tokens(seq.tokens, mode)
    seen = {original, text}
    out: list[str] = []
    base_tokens, base_flags = list(seq.tokens), list(seq.word_flags)
    n = 0 if op is EditOp.RM else edits_for(op, len(seq), cfg)
    attempts = rejected = 0
    budget = cfg.retry_factor * n_aug
    while len(out) < n_aug and attempts < budget:
        attempts += 1
        tokens, flags = base_tokens[:], base_flags[:]
        if op is EditOp.RM:
            _rm(tokens, flags, cfg, entries, rng)
        else:
            _run(op, tokens, flags, n, entries, rng)
        candidate = join_tokens(tokens, mode)
        if candidate in seen:
            rejected += 1
            continue
        seen.add(candidate)
        out.append(candidate)
    return out, attempts, rejected


def augment(text: str, op: EditOp, n_aug: int, cfg: RedaConfig,
            lex: SynonymLexicon, rng) -> list[str]:
    """Up to ``n_aug`` distinct augmented versions of ``text``.

    An attempt is rejected when it reproduces the original (raw or
    re-joined) or an earlier result; at most ``cfg.retry_factor * n_aug``
    attempts are made. The language mode is taken from the lexicon.
    """
    return augment_counted(text, op, n_aug, cfg, lex, rng)[0]
