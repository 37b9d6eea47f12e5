"""ROUGE-N and ROUGE-L over token lists."""

from __future__ import annotations

from collections import Counter
from typing import NamedTuple, Sequence


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


ZERO = RougeScore(0.0, 0.0, 0.0)


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> RougeScore:
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    if not cand or not ref:
        return ZERO
    overlap = sum((cand & ref).values())
    p = overlap / sum(cand.values())
    r = overlap / sum(ref.values())
    return RougeScore(p, r, _f1(p, r))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    if not candidate or not reference:
        return ZERO
    lcs = lcs_length(candidate, reference)
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return RougeScore(p, r, _f1(p, r))


def concat(sentences: Sequence[Sequence[str]]) -> list[str]:
    return [tok for sent in sentences for tok in sent]


def oracle_gain_score(candidate_sentences: Sequence[Sequence[str]],
                      reference: Sequence[str], metric: str = "rouge12") -> float:
    """Objective maximised by the greedy labeler.

    Sentences are concatenated in the order given (callers pass them in
    document order). ``rouge12`` is the mean of ROUGE-1 and ROUGE-2 F1;
    ``rougeL`` uses ROUGE-L F1 instead.
    """
    cand = concat(candidate_sentences)
    if metric == "rouge12":
        return (rouge_n(cand, reference, 1).f1 + rouge_n(cand, reference, 2).f1) / 2
    if metric == "rougeL":
        return rouge_l(cand, reference).f1
    raise ValueError(f"unknown oracle metric: {metric}")
