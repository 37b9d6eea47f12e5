"""ROUGE-L evaluation, bootstrap intervals, baselines and label-position density."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import SummaryPair, tokenize
from .errors import InputError
from .oracle import OracleConfig, get_pos_label
from .rouge import rouge_l


@dataclass(frozen=True)
class LanguageScore:
    mean: float
    lo: float
    hi: float
    n: int


@dataclass(frozen=True)
class EvalReport:
    system: str
    config_hash: str
    languages: dict
    per_document: dict = field(default_factory=dict)  # id -> ROUGE-L F1

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "config_hash": self.config_hash,
            "languages": {lang: {"mean": s.mean, "ci": [s.lo, s.hi], "n": s.n}
                          for lang, s in sorted(self.languages.items())},
            "per_document": dict(sorted(self.per_document.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def bootstrap_ci(scores: Sequence[float], n_resamples: int = 1000, level: float = 0.95,
                 seed: int = 0) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean."""
    x = np.asarray(scores, dtype=float)
    if x.size == 0:
        raise InputError("bootstrap needs at least one score")
    if np.all(x == x[0]):
        return float(x[0]), float(x[0])
    rng = np.random.default_rng(seed)
    means = x[rng.integers(0, x.size, size=(n_resamples, x.size))].mean(axis=1)
    tail = (1 - level) / 2 * 100
    lo, hi = np.percentile(means, [tail, 100 - tail])
    m = x.mean()
    # the sample mean sits inside the bulk; clamp only absorbs rounding at tiny n
    return float(min(lo, m)), float(max(hi, m))


def summary_rouge_l(pair: SummaryPair, selected: Iterable[int]) -> float:
    sents = pair.document.sentences
    idx = sorted(selected)
    for i in idx:
        if not 0 <= i < len(sents):
            raise InputError(f"{pair.id}: selected index {i} out of range")
    cand = tokenize(" ".join(sents[i] for i in idx))
    return rouge_l(cand, pair.summary_tokens()).f1


def _config_hash(payload) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def evaluate(selections: Mapping[str, Sequence[int]], corpus: Sequence[SummaryPair],
             system: str = "system", seed: int = 0, n_resamples: int = 1000) -> EvalReport:
    missing = [p.id for p in corpus if p.id not in selections]
    if missing:
        raise InputError(f"no selection for document(s): {missing[:5]}")
    per_doc, by_lang = {}, {}
    for pair in corpus:
        f = summary_rouge_l(pair, selections[pair.id])
        per_doc[pair.id] = f
        by_lang.setdefault(pair.language, []).append((pair.id, f))
    languages = {}
    for lang, items in by_lang.items():
        items.sort()  # order-independent result
        vals = [f for _, f in items]
        lo, hi = bootstrap_ci(vals, n_resamples, 0.95, seed)
        languages[lang] = LanguageScore(float(np.mean(vals)), lo, hi, len(vals))
    h = _config_hash({"system": system, "seed": seed, "n_resamples": n_resamples,
                      "ids": sorted(per_doc)})
    return EvalReport(system, h, languages, per_doc)


def lead_k(document, k: int) -> list[int]:
    if k < 1:
        raise InputError("k must be >= 1")
    return list(range(min(k, len(document))))


def oracle_selections(corpus: Sequence[SummaryPair], config: OracleConfig | None = None):
    return {p.id: list(get_pos_label(p.document, p.summary, config).positive_indices)
            for p in corpus}


def oracle_upper_bound(corpus: Sequence[SummaryPair], seed: int = 0,
                       config: OracleConfig | None = None) -> EvalReport:
    return evaluate(oracle_selections(corpus, config), corpus, "oracle", seed)


def lead_baseline(corpus: Sequence[SummaryPair], k: int, seed: int = 0) -> EvalReport:
    return evaluate({p.id: lead_k(p.document, k) for p in corpus}, corpus, f"lead-{k}", seed)


@dataclass(frozen=True)
class Significance:
    mean_diff: float
    lo: float
    hi: float
    significant: bool


def significance(scores_a: Mapping[str, float], scores_b: Mapping[str, float], seed: int = 0,
                 n_resamples: int = 1000, level: float = 0.95) -> Significance:
    """Paired bootstrap on B - A; significant iff the interval excludes 0."""
    if set(scores_a) != set(scores_b):
        raise InputError("systems were scored on different document ids")
    ids = sorted(scores_a)
    diffs = [scores_b[i] - scores_a[i] for i in ids]
    lo, hi = bootstrap_ci(diffs, n_resamples, level, seed)
    return Significance(float(np.mean(diffs)), lo, hi, not lo <= 0.0 <= hi)


def selection_f1(selections: Mapping[str, Sequence[int]],
                 gold: Mapping[str, Sequence[int]]) -> float:
    """Micro-averaged F1 of selected vs gold sentence indices over all documents."""
    tp = fp = fn = 0
    for doc_id, g in gold.items():
        s, g = set(selections.get(doc_id, ())), set(g)
        tp += len(s & g)
        fp += len(s - g)
        fn += len(g - s)
    if tp == 0:
        return 0.0
    p, r = tp / (tp + fp), tp / (tp + fn)
    return 2 * p * r / (p + r)


# --- label positions -------------------------------------------------------


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    positions: np.ndarray

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.positions) / self.bandwidth
        return np.exp(-0.5 * z * z).sum(axis=-1) / (
            self.positions.size * self.bandwidth * math.sqrt(2 * math.pi))

    def _padded(self, lo=None, hi=None):
        pad = 8 * self.bandwidth
        lo = self.positions.min() - pad if lo is None else lo
        hi = self.positions.max() + pad if hi is None else hi
        npts = max(2001, int(math.ceil((hi - lo) / (self.bandwidth / 20))) + 1)
        return np.linspace(lo, hi, npts)

    def total_mass(self) -> float:
        """Trapezoid integral over the support padded by 8 bandwidths."""
        x = self._padded()
        return float(np.trapezoid(self.evaluate(x), x))

    def mass_above(self, t: float) -> float:
        x = self._padded(lo=t, hi=self.positions.max() + 8 * self.bandwidth)
        if x[0] >= x[-1]:
            return 0.0
        return float(np.trapezoid(self.evaluate(x), x))

    def to_csv(self) -> str:
        lines = ["x,density"]
        lines += [f"{x!r},{d!r}" for x, d in zip(self.grid.tolist(), self.density.tolist())]
        return "\n".join(lines) + "\n"


def relative_positions(labels: Iterable[tuple[Sequence[int], int]]) -> np.ndarray:
    """``i / (N - 1)`` for each positive index; single-sentence documents give 0.5."""
    out = []
    for indices, n in labels:
        for i in indices:
            out.append(0.5 if n == 1 else i / (n - 1))
    return np.asarray(out, dtype=float)


def silverman_bandwidth(x: np.ndarray) -> float:
    """0.9 * min(std, IQR/1.34) * n^(-1/5), falling back to whichever spread is non-zero."""
    n = x.size
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25) / 1.34
    spread = min(std, iqr) if std > 0 and iqr > 0 else max(std, iqr)
    if spread == 0:
        spread = 0.05  # all positions coincide
    return 0.9 * spread * n ** (-0.2)


def position_density(corpus_labels: Iterable[tuple[Sequence[int], int]],
                     bandwidth: float | None = None, grid_size: int = 101) -> DensityCurve:
    """Gaussian KDE of relative positions of positive-label sentences.

    ``corpus_labels`` yields ``(positive_indices, n_sentences)`` per document.
    """
    pos = relative_positions(corpus_labels)
    if pos.size == 0:
        raise InputError("no positive labels to estimate a density from")
    h = float(bandwidth) if bandwidth else silverman_bandwidth(pos)
    if h <= 0:
        raise InputError("bandwidth must be positive")
    grid = np.linspace(0.0, 1.0, grid_size)
    curve = DensityCurve(grid, np.zeros(grid_size), h, pos)
    return DensityCurve(grid, curve.evaluate(grid), h, pos)
