"""Tokenization and detokenization for English and Chinese text.

Nothing is normalized: punctuation, stop words and case survive intact.
English splits into maximal runs of word characters (letters, digits,
apostrophes, hyphens) and single-character punctuation tokens. Chinese is
segmented by forward maximum matching against a registry of known words,
falling back to single characters.
"""

from __future__ import annotations

import enum
import re
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .errors import EmptyText

__all__ = [
    "LanguageMode",
    "TokenSeq",
    "Segmenter",
    "tokenize",
    "detokenize",
    "register_words",
    "default_segmenter",
    "is_word_token",
]


class LanguageMode(enum.Enum):
    ENGLISH = "en"
    CHINESE = "zh"

    @classmethod
    def parse(cls, value: "str | LanguageMode") -> "LanguageMode":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        aliases = {"en": cls.ENGLISH, "english": cls.ENGLISH, "zh": cls.CHINESE, "chinese": cls.CHINESE}
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown language mode: {value!r}") from None


@dataclass(frozen=True)
class TokenSeq:
    """A tokenized text. ``word_flags[i]`` marks tokens eligible for lexicon lookup."""

    tokens: tuple[str, ...]
    mode: LanguageMode
    word_flags: tuple[bool, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.word_flags):
            raise ValueError("tokens and word_flags differ in length")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], mode: LanguageMode) -> "TokenSeq":
        toks = tuple(tokens)
        return cls(toks, mode, tuple(is_word_token(t) for t in toks))


_EN_TOKEN = re.compile(r"(?:[^\W_]|['\-])+|\S")


@lru_cache(maxsize=1 << 16)
def is_word_token(token: str) -> bool:
    """True unless the token is made only of punctuation/symbol characters."""
    return any(c.isalnum() for c in token)


class Segmenter:
    """Forward maximum matching over a word set, with single-character fallback."""

    def __init__(self, words: Iterable[str] = ()):
        self._words: set[str] = set()
        self.max_len = 1
        self._lock = threading.Lock()
        self.add(words)

    def add(self, words: Iterable[str]) -> None:
        with self._lock:
            for w in words:
                if w:
                    self._words.add(w)
                    if len(w) > self.max_len:
                        self.max_len = len(w)

    @property
    def words(self) -> frozenset[str]:
        return frozenset(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._words

    def cut(self, text: str) -> list[str]:
        words = self._words
        out = []
        i, n = 0, len(text)
        while i < n:
            for size in range(min(self.max_len, n - i), 1, -1):
                if text[i:i + size] in words:
                    break
            else:
                size = 1
            out.append(text[i:i + size])
            i += size
        return out


_default = Segmenter()


def default_segmenter() -> Segmenter:
    return _default


def register_words(words: Iterable[str]) -> None:
    """Add words to the process-wide Chinese segmentation registry."""
    _default.add(words)


def tokenize(text: str, mode: LanguageMode = LanguageMode.ENGLISH,
             segmenter: Segmenter | None = None) -> TokenSeq:
    if not text or text.isspace():
        raise EmptyText("text is empty or whitespace-only")
    mode = LanguageMode.parse(mode)
    if mode is LanguageMode.ENGLISH:
        tokens = _EN_TOKEN.findall(text)
    else:
        # whitespace is dropped before matching so that detokenize round-trips
        compact = "".join(text.split())
        tokens = (segmenter or _default).cut(compact)
    return TokenSeq.from_tokens(tokens, mode)


def join_tokens(tokens: Iterable[str], mode: LanguageMode) -> str:
    return " ".join(tokens) if mode is LanguageMode.ENGLISH else "".join(tokens)


def detokenize(seq: TokenSeq) -> str:
    return join_tokens(seq.tokens, seq.mode)
