"""Per-sentence soft labels from sentence-level (alpha) and set-level (beta) weights."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .labelsets import MultilingualLabels

DEGENERATE_WEIGHT = 0.75


@dataclass(frozen=True)
class WeightedLabels:
    alpha: np.ndarray
    beta: np.ndarray
    m: np.ndarray
    l_raw: np.ndarray
    l: np.ndarray
    l_min: float
    l_max: float


def _member_mask(labels: MultilingualLabels, n: int) -> np.ndarray:
    """(4, n) boolean matrix: row j marks sentences in set j."""
    mask = np.zeros((4, n), dtype=bool)
    for j, s in enumerate(labels.sets):
        mask[j, list(s)] = True
    return mask


def mask_alpha(alpha_hat, union, n: int) -> np.ndarray:
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    if alpha_hat.shape != (n,):
        raise InputError(f"expected {n} alpha values, got shape {alpha_hat.shape}")
    keep = np.zeros(n, dtype=bool)
    for i in union:
        if not 0 <= i < n:
            raise InputError(f"index {i} out of range for {n} sentences")
        keep[i] = True
    return np.where(keep, alpha_hat, 0.0)


def combine_weights(alpha, beta, labels: MultilingualLabels):
    """Raw weight: alpha_i times the mean beta of the sets containing i.

    Returns ``(l_raw, m)`` where ``m`` counts the sets containing each sentence.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    member = _member_mask(labels, len(alpha))
    m = member.sum(axis=0)
    beta_sum = (member * beta[:, None]).sum(axis=0)
    l_raw = np.where(m > 0, alpha * beta_sum / np.maximum(m, 1), 0.0)
    return l_raw, m


def rescale_weights(l_raw, union) -> np.ndarray:
    """Affinely map weights on the union to [0.5, 1.0]; everything else is 0."""
    l_raw = np.asarray(l_raw, dtype=float)
    out = np.zeros_like(l_raw)
    idx = np.asarray(sorted(union), dtype=int)
    if idx.size == 0:
        warnings.warn("empty label union; soft labels are all zero")
        return out
    vals = l_raw[idx]
    lo, hi = vals.min(), vals.max()
    if hi - lo < 1e-12:
        out[idx] = DEGENERATE_WEIGHT
    else:
        out[idx] = (vals - lo) / (2 * (hi - lo)) + 0.5
    return out


def search_weights(alpha_hat, beta, labels: MultilingualLabels) -> WeightedLabels:
    n = len(alpha_hat)
    union = labels.union
    alpha = mask_alpha(alpha_hat, union, n)
    l_raw, m = combine_weights(alpha, beta, labels)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        l = rescale_weights(l_raw, union)
    if union:
        l_min, l_max = float(l_raw[list(union)].min()), float(l_raw[list(union)].max())
    else:
        l_min = l_max = 0.0
    return WeightedLabels(alpha, np.asarray(beta, dtype=float), m, l_raw, l, l_min, l_max)


def fixed_weights(labels: MultilingualLabels, w: float) -> np.ndarray:
    """Fixed-weight ablation: 1.0 on English oracle sentences, ``w`` on the rest of the union."""
    l = np.zeros(labels.n_sentences)
    l[list(labels.union)] = w
    l[list(labels.U_a)] = 1.0
    return l
