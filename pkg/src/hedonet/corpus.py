"""
Tweet parsing and corpus-level word counting.

Each document goes through a fixed sequence of steps: lowercase, undo
contractions, drop the hashtag symbol, split on whitespace, filter handles,
numbers, URLs and punctuation, and finally drop anchor words.
"""

from __future__ import annotations

import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusError

# (pattern, replacement) pairs, applied in order after lowercasing.
DEFAULT_CONTRACTIONS: tuple[tuple[str, str], ...] = (
    (r"(?<=\w)n't\b", " not"),
    (r"(?<=\w)'s\b", " "),
    (r"(?<=\w)'m\b", " "),
    (r"(?<=\w)'d\b", " "),
    (r"(?<=\w)'re\b", " "),
    (r"(?<=\w)'ve\b", " have"),
    (r"(?<=\w)'ll\b", " will"),
)

URL_PREFIXES = ("http://", "https://", "www.")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})


def normalize_word(word: str) -> str:
    """Normalize a configured word (anchor, stop word) the way tokens are."""
    return unicodedata.normalize("NFC", word).lower().replace("#", "").strip()


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str


@dataclass(frozen=True)
class ParsedDocument:
    id: str
    tokens: tuple[str, ...]
    unique_tokens: frozenset[str]


@dataclass(frozen=True)
class ParserConfig:
    anchors_to_remove: frozenset[str] = frozenset()
    extra_removals: frozenset[str] = frozenset()
    contraction_rules: tuple[tuple[str, str], ...] = DEFAULT_CONTRACTIONS
    strip_hashtag_symbol: bool = True

    @classmethod
    def build(cls, anchors: Iterable[str] = (), remove_words: Iterable[str] = (), **kw) -> "ParserConfig":
        return cls(
            anchors_to_remove=frozenset(normalize_word(a) for a in anchors if a.strip()),
            extra_removals=frozenset(normalize_word(w) for w in remove_words if w.strip()),
            **kw,
        )

    @property
    def removals(self) -> frozenset[str]:
        return self.anchors_to_remove | self.extra_removals

    def compiled_rules(self) -> list[tuple[re.Pattern, str]]:
        return [(re.compile(p), r) for p, r in self.contraction_rules]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[ParsedDocument, ...]
    word_counts: dict[str, int] = field(default_factory=dict)
    tweet_counts: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.tweet_counts)


def is_url(token: str) -> bool:
    return token.startswith(URL_PREFIXES)


def has_digit(token: str) -> bool:
    return any(ch.isdigit() for ch in token)


def strip_punctuation(token: str) -> str:
    return "".join(ch for ch in token if ch.isalnum())


def _tokenize(text: str, cfg: ParserConfig, rules) -> list[str]:
    text = unicodedata.normalize("NFC", text).translate(_APOSTROPHES)
    text = unicodedata.normalize("NFC", text.lower())
    for pattern, repl in rules:
        text = pattern.sub(repl, text)
    if cfg.strip_hashtag_symbol:
        text = text.replace("#", "")
    removals = cfg.removals
    tokens = []
    for raw in text.split():
        if raw.startswith("@") or has_digit(raw) or is_url(raw):
            continue
        tok = strip_punctuation(raw)
        if not tok or tok in removals:
            continue
        tokens.append(tok)
    return tokens


def parse_document(doc: RawDocument, cfg: ParserConfig, _rules=None) -> ParsedDocument:
    """Parse one raw document into its normalized token list.

    Degenerate input (empty text, all-URL text, ...) gives an empty token list.
    """
    rules = _rules if _rules is not None else cfg.compiled_rules()
    tokens = tuple(_tokenize(doc.text, cfg, rules))
    return ParsedDocument(doc.id, tokens, frozenset(tokens))


def count_words(docs: Iterable[ParsedDocument]) -> tuple[dict[str, int], dict[str, int]]:
    word_counts: Counter[str] = Counter()
    tweet_counts: Counter[str] = Counter()
    for d in docs:
        word_counts.update(d.tokens)
        tweet_counts.update(d.unique_tokens)
    return dict(sorted(word_counts.items())), dict(sorted(tweet_counts.items()))


def parse_corpus(docs: Sequence[RawDocument], cfg: ParserConfig) -> Corpus:
    seen: set[str] = set()
    for d in docs:
        if d.id in seen:
            raise CorpusError(f"duplicate document id: {d.id!r}")
        seen.add(d.id)
    rules = cfg.compiled_rules()
    parsed = tuple(parse_document(d, cfg, rules) for d in docs)
    return corpus_from_parsed(parsed)


def corpus_from_parsed(parsed: Sequence[ParsedDocument]) -> Corpus:
    wc, tc = count_words(parsed)
    return Corpus(tuple(parsed), wc, tc)


def restrict_vocabulary(corpus: Corpus, keep) -> Corpus:
    """Drop every token for which ``keep(token)`` is false."""
    docs = []
    for d in corpus.documents:
        toks = tuple(t for t in d.tokens if keep(t))
        docs.append(ParsedDocument(d.id, toks, frozenset(toks)))
    return corpus_from_parsed(docs)


# --- I/O -------------------------------------------------------------------


def read_documents(path: str | Path, input_format: str = "jsonl") -> list[RawDocument]:
    path = Path(path)
    docs = []
    with open(path, encoding="utf-8") as fh:
        if input_format == "txt":
            for i, line in enumerate(fh, start=1):
                docs.append(RawDocument(str(i), line.rstrip("\n")))
            return docs
        if input_format != "jsonl":
            raise ValueError(f"unknown input format {input_format!r}")
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                docs.append(RawDocument(str(obj["id"]), str(obj["text"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{i}: bad corpus record ({exc})") from exc
    return docs


def read_word_list(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def write_parsed(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in corpus.documents:
            fh.write(json.dumps({"id": d.id, "tokens": list(d.tokens)}, ensure_ascii=False) + "\n")


def read_parsed(path: str | Path) -> Corpus:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                toks = tuple(obj["tokens"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{i}: bad parsed record ({exc})") from exc
            docs.append(ParsedDocument(str(obj["id"]), toks, frozenset(toks)))
    return corpus_from_parsed(docs)


def write_word_counts(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word\tN\ttweet_count\n")
        for w, n in corpus.word_counts.items():
            fh.write(f"{w}\t{n}\t{corpus.tweet_counts[w]}\n")
