"""CBOW text-pair matcher trained with hand-written backprop and Adam.

Each text is encoded as the mean of its token embeddings. The two encodings
are concatenated and fed through ``Linear -> tanh -> Linear`` to two logits.
Everything is float64 numpy; there is no autograd.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, IndexOutOfRange
from .pipeline import Corpus, PairExample
from .text import LanguageMode, tokenize

__all__ = [
    "Vocab",
    "MatcherParams",
    "TrainConfig",
    "Metrics",
    "AdamState",
    "EpochRecord",
    "TrainedMatcher",
    "build_vocab",
    "forward",
    "loss_and_grads",
    "adam_step",
    "train",
    "evaluate",
    "predict",
    "save_checkpoint",
    "load_checkpoint",
]

PARAM_NAMES = ("E", "W1", "b1", "W2", "b2")


class Vocab:
    """Token to index map; index 0 is reserved for out-of-vocabulary tokens."""

    OOV = 0

    def __init__(self, tokens: Iterable[str] = ()):
        self.itos: list[str] = [""]
        self.stoi: dict[str, int] = {}
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        idx = self.stoi.get(token)
        if idx is None:
            idx = self.stoi[token] = len(self.itos)
            self.itos.append(token)
        return idx

    def __len__(self) -> int:
        return len(self.itos)

    def __getitem__(self, token: str) -> int:
        return self.stoi.get(token, self.OOV)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.itos == other.itos

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        get = self.stoi.get
        return np.fromiter((get(t, 0) for t in tokens), dtype=np.int64, count=len(tokens))


def build_vocab(corpus: Corpus | Iterable[PairExample], mode: LanguageMode) -> Vocab:
    """Index every distinct token of both sides, in order of first appearance."""
    vocab = Vocab()
    seen_any = False
    for ex in corpus:
        seen_any = True
        for text in (ex.text_a, ex.text_b):
            for tok in tokenize(text, mode).tokens:
                vocab.add(tok)
    if not seen_any:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    return vocab


@dataclass
class MatcherParams:
    E: np.ndarray
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @classmethod
    def initialize(cls, vocab_size: int, rng: np.random.Generator, scale: float = 0.05,
                   emb_dim: int = 128, hidden_dim: int = 128) -> "MatcherParams":
        u = lambda *shape: rng.uniform(-scale, scale, size=shape)
        return cls(u(vocab_size, emb_dim), u(2 * emb_dim, hidden_dim), u(hidden_dim),
                   u(hidden_dim, 2), u(2))

    @classmethod
    def zeros(cls, vocab_size: int, emb_dim: int = 128, hidden_dim: int = 128) -> "MatcherParams":
        return cls(np.zeros((vocab_size, emb_dim)), np.zeros((2 * emb_dim, hidden_dim)),
                   np.zeros(hidden_dim), np.zeros((hidden_dim, 2)), np.zeros(2))

    def items(self):
        return ((name, getattr(self, name)) for name in PARAM_NAMES)

    def copy(self) -> "MatcherParams":
        return MatcherParams(*(a.copy() for _, a in self.items()))

    def zeros_like(self) -> "MatcherParams":
        return MatcherParams(*(np.zeros_like(a) for _, a in self.items()))

    @property
    def vocab_size(self) -> int:
        return self.E.shape[0]

    @property
    def emb_dim(self) -> int:
        return self.E.shape[1]

    def check(self) -> None:
        d, h = self.emb_dim, self.b1.shape[0]
        expected = {"W1": (2 * d, h), "b1": (h,), "W2": (h, 2), "b2": (2,)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        for name, arr in self.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    learning_rate: float = 0.0005
    epochs: int = 3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    init_scale: float = 0.05
    emb_dim: int = 128
    hidden_dim: int = 128
    seed: int = 0

    def __post_init__(self):
        for name in ("batch_size", "learning_rate", "epochs", "adam_beta1", "adam_beta2",
                     "adam_eps", "init_scale", "emb_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, labels: Sequence[int], predictions: Sequence[int]) -> "Metrics":
        y = np.asarray(labels, dtype=np.int64)
        p = np.asarray(predictions, dtype=np.int64)
        if y.shape != p.shape:
            raise ValueError("labels and predictions differ in length")
        return cls(tp=int(np.sum((p == 1) & (y == 1))), fp=int(np.sum((p == 1) & (y == 0))),
                   tn=int(np.sum((p == 0) & (y == 0))), fn=int(np.sum((p == 0) & (y == 1))))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
                "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


# Batched computation. A batch side is (flat indices, segment starts, lengths).

def _pack(seqs: Sequence[np.ndarray]):
    lens = np.fromiter((len(s) for s in seqs), dtype=np.int64, count=len(seqs))
    if np.any(lens == 0):
        raise ValueError("every text must contain at least one token")
    starts = np.zeros(len(seqs), dtype=np.int64)
    np.cumsum(lens[:-1], out=starts[1:])
    return np.concatenate(seqs), starts, lens


def _pool(E, packed):
    flat, starts, lens = packed
    return np.add.reduceat(E[flat], starts, axis=0) / lens[:, None]


def _forward_batch(p: MatcherParams, a_packed, b_packed):
    x = np.concatenate([_pool(p.E, a_packed), _pool(p.E, b_packed)], axis=1)
    h = np.tanh(x @ p.W1 + p.b1)
    return x, h, h @ p.W2 + p.b2


def _check_indices(idx: np.ndarray, vocab_size: int) -> None:
    if idx.size and (idx.min() < 0 or idx.max() >= vocab_size):
        raise IndexOutOfRange(f"token index outside [0, {vocab_size})")


def forward(params: MatcherParams, a_idx: Sequence[int], b_idx: Sequence[int]) -> np.ndarray:
    a = np.asarray(a_idx, dtype=np.int64)
    b = np.asarray(b_idx, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both texts must contain at least one token")
    _check_indices(a, params.vocab_size)
    _check_indices(b, params.vocab_size)
    return _forward_batch(params, _pack([a]), _pack([b]))[2][0]


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _loss_and_grads_packed(p: MatcherParams, a_packed, b_packed, labels):
    n = len(labels)
    x, h, logits = _forward_batch(p, a_packed, b_packed)
    logp = _log_softmax(logits)
    loss = -logp[np.arange(n), labels].mean()

    d_logits = np.exp(logp)
    d_logits[np.arange(n), labels] -= 1.0
    d_logits /= n
    g = p.zeros_like()
    g.W2 = h.T @ d_logits
    g.b2 = d_logits.sum(axis=0)
    d_z = (d_logits @ p.W2.T) * (1.0 - h * h)
    g.W1 = x.T @ d_z
    g.b1 = d_z.sum(axis=0)
    d_x = d_z @ p.W1.T
    d = p.emb_dim
    for d_enc, (flat, _, lens) in ((d_x[:, :d], a_packed), (d_x[:, d:], b_packed)):
        np.add.at(g.E, flat, np.repeat(d_enc / lens[:, None], lens, axis=0))
    return float(loss), g


def loss_and_grads(params: MatcherParams, batch: Sequence[tuple]) -> tuple[float, MatcherParams]:
    """Mean cross-entropy over ``(a_idx, b_idx, label)`` triples and its exact gradient."""
    if not batch:
        raise ValueError("batch must be non-empty")
    a = [np.asarray(ex[0], dtype=np.int64) for ex in batch]
    b = [np.asarray(ex[1], dtype=np.int64) for ex in batch]
    labels = np.asarray([ex[2] for ex in batch], dtype=np.int64)
    return _loss_and_grads_packed(params, _pack(a), _pack(b), labels)


@dataclass
class AdamState:
    m: MatcherParams
    v: MatcherParams

    @classmethod
    def for_params(cls, params: MatcherParams) -> "AdamState":
        return cls(params.zeros_like(), params.zeros_like())


def adam_step(params: MatcherParams, grads: MatcherParams, state: AdamState, t: int,
              lr: float = 0.0005, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> MatcherParams:
    """One bias-corrected Adam update, applied in place; returns ``params``."""
    if t < 1:
        raise ValueError("Adam step index starts at 1")
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for name in PARAM_NAMES:
        g = getattr(grads, name)
        m = getattr(state.m, name)
        v = getattr(state.v, name)
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        theta = getattr(params, name)
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev: Metrics | None = None


@dataclass
class TrainedMatcher:
    params: MatcherParams
    vocab: Vocab
    mode: LanguageMode
    history: list[EpochRecord] = field(default_factory=list)
    first_batch_loss: float = float("nan")

    def evaluate(self, corpus: Corpus | Sequence[PairExample]) -> Metrics:
        return evaluate(self.params, corpus, self.vocab, self.mode)

    def save(self, path: str | os.PathLike) -> None:
        save_checkpoint(path, self.params, self.vocab, self.mode)


def _encode(corpus: Iterable[PairExample], vocab: Vocab, mode: LanguageMode):
    a, b, labels = [], [], []
    for ex in corpus:
        a.append(vocab.encode(tokenize(ex.text_a, mode).tokens))
        b.append(vocab.encode(tokenize(ex.text_b, mode).tokens))
        labels.append(ex.label)
    return a, b, np.asarray(labels, dtype=np.int64)


def _examples(corpus) -> list[PairExample]:
    return list(corpus.examples if isinstance(corpus, Corpus) else corpus)


def train(train_corpus: Corpus | Sequence[PairExample], dev_corpus: Corpus | Sequence[PairExample] | None,
          cfg: TrainConfig = TrainConfig(), mode: LanguageMode = LanguageMode.ENGLISH,
          vocab: Vocab | None = None) -> TrainedMatcher:
    """Train from scratch for ``cfg.epochs`` epochs; no early stopping.

    Initialization and per-epoch shuffling both come from ``cfg.seed``. Dev
    metrics, when a dev corpus is given, are recorded after every epoch and
    never feed back into training.
    """
    examples = _examples(train_corpus)
    if not examples:
        raise EmptyCorpus("training corpus is empty")
    dev = _examples(dev_corpus) if dev_corpus is not None else []
    mode = LanguageMode.parse(mode)
    if vocab is None:
        vocab = build_vocab(examples, mode)
    rng = np.random.default_rng(cfg.seed)
    params = MatcherParams.initialize(len(vocab), rng, cfg.init_scale, cfg.emb_dim, cfg.hidden_dim)
    state = AdamState.for_params(params)
    a, b, labels = _encode(examples, vocab, mode)
    dev_encoded = _encode(dev, vocab, mode) if dev else None

    result = TrainedMatcher(params, vocab, mode)
    t = 0
    n = len(examples)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = _loss_and_grads_packed(
                params, _pack([a[i] for i in idx]), _pack([b[i] for i in idx]), labels[idx])
            if t == 0:
                result.first_batch_loss = loss
            t += 1
            adam_step(params, grads, state, t, cfg.learning_rate,
                      cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
            total_loss += loss * len(idx)
        dev_metrics = _evaluate_encoded(params, *dev_encoded) if dev_encoded else None
        result.history.append(EpochRecord(epoch, total_loss / n, dev_metrics))
    return result


def _predict_encoded(params, a, b, batch_size=1024) -> np.ndarray:
    preds = []
    for start in range(0, len(a), batch_size):
        logits = _forward_batch(params, _pack(a[start:start + batch_size]),
                                _pack(b[start:start + batch_size]))[2]
        preds.append(np.argmax(logits, axis=1))
    return np.concatenate(preds) if preds else np.zeros(0, dtype=np.int64)


def _evaluate_encoded(params, a, b, labels) -> Metrics:
    return Metrics.from_predictions(labels, _predict_encoded(params, a, b))


def predict(params: MatcherParams, corpus, vocab: Vocab, mode: LanguageMode) -> np.ndarray:
    a, b, _ = _encode(_examples(corpus), vocab, LanguageMode.parse(mode))
    return _predict_encoded(params, a, b)


def evaluate(params: MatcherParams, corpus, vocab: Vocab, mode: LanguageMode) -> Metrics:
    examples = _examples(corpus)
    if not examples:
        raise EmptyCorpus("evaluation corpus is empty")
    return _evaluate_encoded(params, *_encode(examples, vocab, LanguageMode.parse(mode)))


def save_checkpoint(path: str | os.PathLike, params: MatcherParams, vocab: Vocab,
                    mode: LanguageMode) -> None:
    """Write an uncompressed ``.npz`` holding the five arrays, vocab and language."""
    meta = json.dumps({"mode": LanguageMode.parse(mode).value, "vocab": vocab.itos[1:]},
                      ensure_ascii=False)
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(meta), **dict(params.items()))


def load_checkpoint(path: str | os.PathLike) -> TrainedMatcher:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        params = MatcherParams(*(data[name].astype(np.float64, copy=True) for name in PARAM_NAMES))
    params.check()
    vocab = Vocab(meta["vocab"])
    if len(vocab) != params.vocab_size:
        raise ValueError("checkpoint vocabulary does not match embedding rows")
    return TrainedMatcher(params, vocab, LanguageMode(meta["mode"]))
