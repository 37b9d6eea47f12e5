"""Documents, summaries, dictionaries and translation memories.

Corpora arrive pre-segmented into sentences; nothing here splits sentences.
"""

from __future__ import annotations

import json
import unicodedata
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError, ParseError

TokenSeq = list  # list[str], lowercase, no empty tokens


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, peel leading/trailing punctuation.

    Each peeled punctuation character becomes its own token, so
    ``"The cat sat."`` gives ``["the", "cat", "sat", "."]``. Punctuation inside
    a word (``"x-ray"``, ``"fr_cat"``) is left alone.
    """
    tokens = []
    for chunk in text.lower().split():
        start, end = 0, len(chunk)
        while start < end and _is_punct(chunk[start]):
            start += 1
        while end > start and _is_punct(chunk[end - 1]):
            end -= 1
        tokens.extend(chunk[:start])
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


def join_tokens(tokens: Iterable[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class Document:
    id: str
    language: str
    sentences: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.sentences:
            raise InputError(f"document {self.id!r} has no sentences")
        for i, s in enumerate(self.sentences):
            if not isinstance(s, str) or not s.strip():
                raise InputError(f"document {self.id!r}: sentence {i} is empty")

    def __len__(self):
        return len(self.sentences)

    def tokenized(self) -> list[list[str]]:
        return [tokenize(s) for s in self.sentences]


@dataclass(frozen=True)
class SummaryPair:
    document: Document
    summary: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "summary", tuple(self.summary))
        if not self.summary:
            raise InputError(f"document {self.document.id!r} has an empty summary")

    @property
    def id(self) -> str:
        return self.document.id

    @property
    def language(self) -> str:
        return self.document.language

    def summary_tokens(self) -> list[str]:
        return tokenize(" ".join(self.summary))

    def to_record(self) -> dict:
        return {
            "id": self.document.id,
            "language": self.document.language,
            "sentences": list(self.document.sentences),
            "summary": list(self.summary),
        }

    @classmethod
    def from_record(cls, record: dict) -> "SummaryPair":
        doc = Document(record["id"], record["language"], record["sentences"])
        return cls(doc, record["summary"])


def _check_str_list(value, name):
    if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
        raise InputError(f"field {name!r} must be a list of strings")
    if not value:
        raise InputError(f"field {name!r} is empty")


def load_corpus(path) -> list[SummaryPair]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}")
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise InputError("record is not a JSON object")
                for key in ("id", "language"):
                    if not isinstance(record.get(key), str):
                        raise InputError(f"field {key!r} missing or not a string")
                _check_str_list(record.get("sentences"), "sentences")
                _check_str_list(record.get("summary"), "summary")
                pairs.append(SummaryPair.from_record(record))
            except (json.JSONDecodeError, InputError) as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return pairs


def save_corpus(pairs: Iterable[SummaryPair], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_record(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class BilingualDictionary:
    source_lang: str
    target_lang: str
    entries: dict = field(default_factory=dict)  # lowercased source -> tuple of targets

    def lookup(self, word: str) -> tuple[str, ...] | None:
        return self.entries.get(word.lower())

    def __contains__(self, word):
        return word.lower() in self.entries

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], source_lang="en", target_lang="xx"):
        entries: dict[str, list[str]] = {}
        for src, tgt in pairs:
            if not src or not tgt:
                raise InputError("dictionary entries must be non-empty")
            cands = entries.setdefault(src.lower(), [])
            if tgt not in cands:
                cands.append(tgt)
        return cls(source_lang, target_lang, {k: tuple(v) for k, v in entries.items()})

    def inverted(self) -> "BilingualDictionary":
        pairs = [(t, s) for s, cands in self.entries.items() for t in cands]
        return BilingualDictionary.from_pairs(pairs, self.target_lang, self.source_lang)


def load_dictionary(path, source_lang="en", target_lang="xx") -> BilingualDictionary:
    """Read a MUSE-style ``src tgt`` file; repeated sources accumulate candidates."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"dictionary file not found: {path}")
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) < 2:
                raise ParseError(path, lineno, "expected 'source target'")
            pairs.append((fields[0], fields[1]))
    return BilingualDictionary.from_pairs(pairs, source_lang, target_lang)


def save_dictionary(dictionary: BilingualDictionary, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for src, cands in dictionary.entries.items():
            for tgt in cands:
                fh.write(f"{src} {tgt}\n")


@dataclass(frozen=True)
class TranslationMemory:
    source_lang: str
    target_lang: str
    entries: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def get(self, sentence: str) -> str | None:
        return self.entries.get(sentence)


def load_translation_memory(path, source_lang="en", target_lang="xx") -> TranslationMemory:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"translation memory not found: {path}")
    entries: dict[str, str] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ParseError(path, lineno, "missing tab separator")
            src, tgt = line.split("\t", 1)
            if not src or not tgt.strip():
                raise ParseError(path, lineno, "empty source or target")
            if src in entries:
                warnings.warn(f"{path}:{lineno}: duplicate source sentence, keeping the last")
            entries[src] = tgt
    return TranslationMemory(source_lang, target_lang, entries)


def save_translation_memory(memory: TranslationMemory | dict, path) -> None:
    entries = memory.entries if isinstance(memory, TranslationMemory) else memory
    with Path(path).open("w", encoding="utf-8") as fh:
        for src, tgt in entries.items():
            if "\t" in src or "\n" in src or "\n" in tgt:
                raise InputError(f"sentence cannot be stored in TSV: {src!r}")
            fh.write(f"{src}\t{tgt}\n")


def sentence_counts(pairs: Sequence[SummaryPair]) -> dict[str, int]:
    return {p.id: len(p.document) for p in pairs}
