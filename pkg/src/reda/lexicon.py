"""Synonym dictionaries backing synonym replacement and random insertion.

File format is UTF-8 TSV, one entry per line::

    headword<TAB>synonym<TAB>synonym...

``#`` starts a comment line and blank lines are skipped. Lookups are exact
and case-sensitive.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ParseError
from .text import LanguageMode, TokenSeq, register_words

__all__ = ["SynonymLexicon", "load_lexicon", "synonyms_of", "eligible_positions"]


@dataclass(frozen=True)
class SynonymLexicon:
    entries: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    language: LanguageMode = LanguageMode.ENGLISH

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[str]],
                     language: LanguageMode = LanguageMode.ENGLISH) -> "SynonymLexicon":
        """Build a lexicon from an in-memory mapping, applying the same cleanup as the loader."""
        merged: dict[str, list[str]] = {}
        for head, syns in mapping.items():
            syns = list(syns)
            for w in [head, *syns]:
                if not w or any(c.isspace() for c in w):
                    raise ValueError(f"lexicon words must be non-empty and whitespace-free: {w!r}")
            _merge(merged, head, syns)
        return cls(_freeze(merged), LanguageMode.parse(language))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def synonyms(self, word: str) -> tuple[str, ...]:
        return self.entries.get(word, ())

    def words(self) -> set[str]:
        """Every headword and synonym in the lexicon."""
        out = set(self.entries)
        for syns in self.entries.values():
            out.update(syns)
        return out


def _merge(merged: dict[str, list[str]], head: str, syns: Iterable[str]) -> None:
    bucket = merged.setdefault(head, [])
    for s in syns:
        if s != head and s not in bucket:
            bucket.append(s)


def _freeze(merged: dict[str, list[str]]) -> dict[str, tuple[str, ...]]:
    return {h: tuple(s) for h, s in merged.items() if s}


def load_lexicon(path: str | os.PathLike, language: LanguageMode | str = LanguageMode.ENGLISH,
                 register: bool = True) -> SynonymLexicon:
    """Read a TSV synonym file.

    Duplicate headwords are merged in order of first appearance, and
    self-references and repeated synonyms are dropped. A line with fewer than
    two non-empty fields, or a field containing internal whitespace, raises
    :class:`ParseError`. For Chinese lexicons every word is also added to the
    segmentation registry unless ``register`` is false.
    """
    language = LanguageMode.parse(language)
    merged: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = [f.strip() for f in line.split("\t")]
            if not fields[0]:
                raise ParseError("empty headword", path, line_no)
            syns = [f for f in fields[1:] if f]
            if not syns:
                raise ParseError("expected a headword and at least one synonym", path, line_no)
            for f in [fields[0], *syns]:
                if any(c.isspace() for c in f):
                    raise ParseError(f"entry contains whitespace: {f!r}", path, line_no)
            _merge(merged, fields[0], syns)
    lex = SynonymLexicon(_freeze(merged), language)
    if register and language is LanguageMode.CHINESE:
        register_words(lex.words())
    return lex


def synonyms_of(lex: SynonymLexicon, word: str) -> list[str]:
    return list(lex.entries.get(word, ()))


def eligible_positions(lex: SynonymLexicon, seq: TokenSeq) -> list[int]:
    entries = lex.entries
    return [i for i, (tok, is_word) in enumerate(zip(seq.tokens, seq.word_flags))
            if is_word and tok in entries]
