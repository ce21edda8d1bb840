"""Happiness-score lexicon with one-hop acronym aliases."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Union

from .errors import LexiconError

NEUTRAL = 5.0
MIN_SCORE, MAX_SCORE = 1.0, 9.0

# Acronyms expanded before scoring in the reference corpus.
DEFAULT_ALIASES = {
    "maga": "makeamericagreatagain",
    "msm": "mainstreammedia",
    "tcot": "topconservativesontwitter",
    "potus": "presidentoftheunitedstates",
}

Source = Union[str, Path, IO[str], None]


@dataclass(frozen=True)
class LexiconEntry:
    h: float
    sd: float


@dataclass(frozen=True)
class ScoredWord:
    word: str
    h: float
    N: int
    tweet_count: int


@dataclass
class Lexicon:
    entries: dict[str, LexiconEntry] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)
    duplicates: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, word: str) -> Optional[LexiconEntry]:
        # Aliases resolve exactly one hop; the target is never re-aliased.
        target = self.aliases.get(word, word)
        return self.entries.get(target)

    def score_of(self, word: str) -> Optional[float]:
        entry = self.lookup(word)
        return None if entry is None else entry.h

    def scores(self, words: Iterable[str]) -> list[float]:
        """Scores for ``words`` with NaN marking misses."""
        out = []
        for w in words:
            h = self.score_of(w)
            out.append(math.nan if h is None else h)
        return out


def score_of(lex: Lexicon, word: str) -> Optional[float]:
    return lex.score_of(word)


def deviation_weight(h: float, N: float, total_N: float) -> float:
    """Signed contribution of a word to the corpus mean's offset from neutral.

    ``(h - 5) * N / total_N``; summing over all scored words gives the
    count-weighted mean score minus 5.
    """
    if total_N <= 0:
        raise ValueError("total_N must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    return (h - NEUTRAL) * N / total_N


def _open(src: Source):
    if src is None:
        return io.StringIO("")
    if isinstance(src, (str, Path)):
        return open(src, encoding="utf-8")
    return src


def _rows(fh):
    """Yield (line_number, fields) for non-blank rows after the header."""
    header = None
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if header is None:
            header = [f.strip().lower() for f in fields]
            continue
        yield lineno, header, fields


def _read_scores(fh, name: str) -> tuple[dict[str, LexiconEntry], int]:
    entries: dict[str, LexiconEntry] = {}
    dups = 0
    cols = None
    for lineno, header, fields in _rows(fh):
        if cols is None:
            try:
                cols = (header.index("word"), header.index("happs"), header.index("stddev"))
            except ValueError:
                raise LexiconError(f"{name}: header must name word, happs and stddev columns") from None
        try:
            word = fields[cols[0]].strip().lower()
            h = float(fields[cols[1]])
            sd = float(fields[cols[2]])
        except (IndexError, ValueError):
            raise LexiconError(f"{name}:{lineno}: malformed score row") from None
        if not word or not math.isfinite(h) or not (sd >= 0):
            raise LexiconError(f"{name}:{lineno}: malformed score row")
        if not MIN_SCORE <= h <= MAX_SCORE:
            raise LexiconError(f"{name}:{lineno}: score {h} outside [1, 9] for {word!r}")
        if word in entries:
            dups += 1
        entries[word] = LexiconEntry(h, sd)
    return entries, dups


def _read_aliases(fh, name: str) -> tuple[dict[str, str], int]:
    aliases: dict[str, str] = {}
    dups = 0
    for lineno, _header, fields in _rows(fh):
        if len(fields) < 2 or not fields[0].strip() or not fields[1].strip():
            raise LexiconError(f"{name}:{lineno}: malformed alias row")
        word = fields[0].strip().lower()
        if word in aliases:
            dups += 1
        aliases[word] = fields[1].strip().lower()
    return aliases, dups


def load_lexicon(score_file: Source, alias_file: Source = None) -> Lexicon:
    """Read a score TSV (``word, happs, stddev``) and an alias TSV (``word, expansion``).

    Both files carry a header row. Duplicate words keep the last row and are
    tallied in ``Lexicon.duplicates``.
    """
    fh = _open(score_file)
    try:
        entries, d1 = _read_scores(fh, str(getattr(fh, "name", "scores")))
    finally:
        if fh is not score_file:
            fh.close()
    fh = _open(alias_file)
    try:
        aliases, d2 = _read_aliases(fh, str(getattr(fh, "name", "aliases")))
    finally:
        if fh is not alias_file:
            fh.close()
    return Lexicon(entries, aliases, d1 + d2)
