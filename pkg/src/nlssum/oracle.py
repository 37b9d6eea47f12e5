"""Greedy extractive oracle (GetPosLabel)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Document, tokenize
from .errors import InputError
from .rouge import oracle_gain_score


@dataclass(frozen=True)
class OracleConfig:
    metric: str = "rouge12"


@dataclass(frozen=True)
class OracleLabels:
    positive_indices: tuple[int, ...]
    objective_trace: tuple[tuple[int, float], ...]

    @property
    def score(self) -> float:
        return self.objective_trace[-1][1] if self.objective_trace else 0.0


def _sentence_tokens(document) -> list[list[str]]:
    if isinstance(document, Document):
        return document.tokenized()
    return [tokenize(s) if isinstance(s, str) else list(s) for s in document]


def get_pos_label(document, summary, config: OracleConfig | None = None) -> OracleLabels:
    """Add one sentence at a time while the objective strictly improves.

    ``document`` is a Document or a sequence of sentences (strings or token
    lists); ``summary`` is a sequence of summary sentences, concatenated into a
    single reference. Ties go to the lowest sentence index.
    """
    config = config or OracleConfig()
    sents = _sentence_tokens(document)
    if isinstance(summary, str):
        summary = [summary]
    reference = tokenize(" ".join(summary))

    selected: list[int] = []
    best = 0.0
    trace = []
    while len(selected) < len(sents):
        pick, pick_score = None, best
        for i in range(len(sents)):
            if i in selected:
                continue
            order = sorted(selected + [i])
            score = oracle_gain_score([sents[j] for j in order], reference, config.metric)
            if score > pick_score:
                pick, pick_score = i, score
        if pick is None:
            break
        selected.append(pick)
        best = pick_score
        trace.append((pick, pick_score))
    return OracleLabels(tuple(sorted(selected)), tuple(trace))


def labels_from_indices(positive_indices: Iterable[int], n: int) -> list[int]:
    y = [0] * n
    for i in positive_indices:
        if not 0 <= i < n:
            raise InputError(f"label index {i} out of range for {n} sentences")
        y[i] = 1
    return y


def label_corpus(pairs: Sequence, config: OracleConfig | None = None, jobs: int = 1):
    """Oracle labels for each SummaryPair, in input order."""
    items = [(p.document, p.summary, config) for p in pairs]
    if jobs > 1 and len(items) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_label_one, items, chunksize=16))
    return [_label_one(it) for it in items]


def _label_one(item):
    doc, summary, config = item
    return get_pos_label(doc, summary, config)
