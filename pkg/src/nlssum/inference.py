"""Zero-shot extraction: rank sentences by score, take the top k with trigram blocking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import torch

from .corpus import Document, tokenize
from .encoder import ExtractiveModel
from .errors import InputError


@dataclass(frozen=True)
class ExtractionResult:
    selected_indices: tuple[int, ...]  # document order
    scores: np.ndarray
    blocked_indices: tuple[int, ...]


def trigrams(tokens: Sequence[str]) -> set:
    return {tuple(tokens[i:i + 3]) for i in range(len(tokens) - 2)}


def shares_trigram(candidate: Sequence[str], selected_union: set) -> bool:
    return any(tg in selected_union for tg in trigrams(candidate))


def select_top_k(scores: Sequence[float], sentences: Sequence[Sequence[str]], k: int = 3,
                 blocking: bool = True) -> tuple[list[int], list[int]]:
    """Greedy top-k over scores (ties to the lower index); returns (selected, blocked)."""
    if k < 1:
        raise InputError("k must be >= 1")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    chosen, blocked = [], []
    seen: set = set()
    for i in order:
        if len(chosen) == k:
            break
        if blocking and shares_trigram(sentences[i], seen):
            blocked.append(i)
            continue
        chosen.append(i)
        seen |= trigrams(sentences[i])
    return sorted(chosen), blocked


def score_document(model: ExtractiveModel, sentences: Sequence[Sequence[str]]) -> np.ndarray:
    with torch.no_grad():
        enc = model.encode(sentences)
        return torch.sigmoid(model.score_logits(enc.contextual)).numpy()


def extract_summary(model: ExtractiveModel, document, k: int = 3,
                    blocking: bool = True) -> ExtractionResult:
    """Sentences beyond the encoder's token budget are never selected."""
    if k < 1:
        raise InputError("k must be >= 1")
    if isinstance(document, Document):
        sents = document.tokenized()
    else:
        sents = [tokenize(s) if isinstance(s, str) else list(s) for s in document]
    scores = score_document(model, sents)
    chosen, blocked = select_top_k(scores, sents[: len(scores)], k, blocking)
    return ExtractionResult(tuple(chosen), scores, tuple(blocked))


def extract_corpus(model: ExtractiveModel, pairs: Iterable, k: int = 3,
                   blocking: bool = True) -> dict[str, list[int]]:
    return {p.id: list(extract_summary(model, p.document, k, blocking).selected_indices)
            for p in pairs}
