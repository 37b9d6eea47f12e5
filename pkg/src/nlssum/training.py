"""Joint training of the extractive model and the two weight predictors.

Per document the loss is the unweighted sum of four mean binary
cross-entropies:

    BCE(y_hat, y_a) + BCE(y_hat, l) + BCE(alpha_hat, y_alpha) + BCE(beta, y_beta)

``l`` (the searched soft labels) enters as a constant, and the predictors read
detached sentence vectors, so the summarizer and the predictors only meet
through the forward computation of ``l``.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .augment import WrConfig, derive_seed, word_replace
from .corpus import BilingualDictionary, SummaryPair, tokenize
from .encoder import EncoderConfig, ExtractiveModel, set_means
from .errors import InputError, TrainingError
from .labelsearch import fixed_weights, search_weights
from .labelsets import MultilingualLabels

log = logging.getLogger(__name__)

MODES = ("nlssum", "nlssum-sep", "fixed-weight", "english-only")


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 300
    batch: int = 4
    accum: int = 2
    lr: float = 3e-3
    warmup: int = 30
    seed: int = 0
    wr_rate: float = 0.5
    langs: tuple[str, ...] = ("fr",)
    mode: str = "nlssum"
    fixed_weight: float = 0.8
    adam_betas: tuple[float, float] = (0.9, 0.999)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)

    def __post_init__(self):
        object.__setattr__(self, "langs", tuple(self.langs))
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.steps < 1 or self.batch < 1 or self.accum < 1:
            raise InputError("steps, batch and accum must be positive")
        if not 0 <= self.warmup <= self.steps:
            raise InputError("warmup must lie in [0, steps]")
        if not 0.0 <= self.wr_rate <= 1.0:
            raise InputError("wr_rate must lie in [0, 1]")
        if self.mode == "fixed-weight" and not 0.0 < self.fixed_weight <= 1.0:
            raise InputError("fixed_weight must lie in (0, 1]")
        if not self.langs:
            raise InputError("at least one target language is required")
        if self.mode == "nlssum-sep" and len(self.langs) != 1:
            raise InputError("nlssum-sep trains one model per language; pass exactly one")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["langs"] = list(self.langs)
        d["adam_betas"] = list(self.adam_betas)
        return d


def lr_at(step: int, config: TrainConfig) -> float:
    """Linear warmup from 0 to the peak at ``warmup``, then linear decay to 0 at ``steps``."""
    peak, warm, total = config.lr, config.warmup, config.steps
    if warm and step <= warm:
        return peak * step / warm
    if total == warm:
        return peak
    return peak * max(total - step, 0) / (total - warm)


@dataclass(frozen=True)
class TrainingTargets:
    y_a: np.ndarray
    y_alpha: np.ndarray
    beta_examples: tuple[tuple[tuple[int, ...], int], ...]  # (indices, target); positives first
    labels: MultilingualLabels
    beta_sets: tuple[int, ...]  # which of a..d each positive example is
    pool_empty: bool = False


def make_alpha_targets(labels: MultilingualLabels, n: int) -> np.ndarray:
    y = np.zeros(n)
    y[list(labels.union)] = 1.0
    return y


def make_beta_examples(labels: MultilingualLabels, zero_label_pool: Sequence[int],
                       rng: np.random.Generator):
    """One positive per non-empty label set, one 3-index negative per positive.

    Negatives are drawn from the zero-label pool without replacement (with
    replacement when the pool has fewer than 3 sentences); an empty pool gives
    no negatives.
    """
    pool = list(zero_label_pool)
    pos = [(tuple(s), 1) for s in labels.sets if s]
    neg = []
    if pool:
        for _ in pos:
            pick = rng.choice(pool, size=3, replace=len(pool) < 3)
            neg.append((tuple(int(i) for i in pick), 0))
    return pos + neg


def make_targets(labels: MultilingualLabels, n: int, rng: np.random.Generator) -> TrainingTargets:
    labels = labels.truncated(n)
    y_alpha = make_alpha_targets(labels, n)
    y_a = np.zeros(n)
    y_a[list(labels.U_a)] = 1.0
    pool = [i for i in range(n) if y_alpha[i] == 0]
    examples = make_beta_examples(labels, pool, rng)
    beta_sets = tuple(j for j, s in enumerate(labels.sets) if s)
    return TrainingTargets(y_a, y_alpha, tuple(examples), labels, beta_sets, not pool)


def bce(p, t) -> float:
    """Mean binary cross-entropy of probabilities ``p`` against (soft) targets ``t``."""
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)
    if p.size == 0:
        return 0.0
    return float(np.mean(-(t * np.log(p) + (1 - t) * np.log1p(-p))))


def joint_loss(y_hat, l, alpha, y_alpha, beta, y_beta, y_a) -> float:
    """The four-term objective on probabilities; ``alpha`` covers every sentence."""
    for arr in (y_hat, l, alpha, beta):
        if not np.all(np.isfinite(np.asarray(arr, dtype=float))):
            raise InputError("non-finite input to joint_loss")
    total = bce(y_hat, y_a) + bce(y_hat, l) + bce(alpha, y_alpha) + bce(beta, y_beta)
    if not math.isfinite(total):
        raise InputError("joint loss is not finite")
    return total


def _bce_logits(z, t):
    if z.numel() == 0:
        return z.new_zeros(())
    return F.binary_cross_entropy_with_logits(z, t, reduction="mean")


@dataclass
class Frozen:
    """Values treated as constants in the loss (detached predictor inputs and soft labels)."""

    predictor_inputs: torch.Tensor
    soft_labels: np.ndarray


def example_loss(model: ExtractiveModel, sentences: Sequence[Sequence[str]],
                 targets: TrainingTargets, mode: str = "nlssum", fixed_weight: float = 0.8,
                 frozen: Frozen | None = None):
    """Loss for one document. Returns ``(loss, terms, frozen)``.

    ``frozen`` carries the constants computed on this pass; passing it back
    in evaluates the same surrogate at other parameter values, which is what
    a finite-difference check of the stop-gradient loss needs.
    """
    enc = model.encode(sentences)
    n = enc.n_sentences
    if n != len(targets.y_a):
        raise InputError(f"targets cover {len(targets.y_a)} sentences, encoder kept {n}")
    z = model.score_logits(enc.contextual)
    y_a = torch.from_numpy(targets.y_a)
    zero = z.new_zeros(())
    terms = [_bce_logits(z, y_a), zero, zero, zero]
    if mode == "english-only":
        return terms[0], terms, frozen

    if mode == "fixed-weight":
        l = fixed_weights(targets.labels, fixed_weight)
        terms[1] = _bce_logits(z, torch.from_numpy(l))
        return terms[0] + terms[1], terms, Frozen(enc.sentence_vectors.detach(), l)

    u1 = frozen.predictor_inputs if frozen is not None else enc.sentence_vectors.detach()
    a_logits = model.alpha_logits(u1)
    b_logits = model.beta_logits(set_means(u1, targets.labels.sets))
    if frozen is not None:
        l = frozen.soft_labels
    else:
        with torch.no_grad():
            alpha_hat = torch.sigmoid(a_logits).numpy()
            beta = torch.sigmoid(b_logits).numpy()
        l = search_weights(alpha_hat, beta, targets.labels).l
    terms[1] = _bce_logits(z, torch.from_numpy(l))
    terms[2] = _bce_logits(a_logits, torch.from_numpy(targets.y_alpha))

    pos = [b_logits[j] for j in targets.beta_sets]
    negs = [ix for ix, t in targets.beta_examples if t == 0]
    logits = pos
    if negs:
        neg_logits = model.beta_logits(set_means(u1, negs))
        logits = pos + list(neg_logits)
    if logits:
        y_beta = torch.tensor([1.0] * len(pos) + [0.0] * (len(logits) - len(pos)),
                              dtype=torch.float64)
        terms[3] = _bce_logits(torch.stack(logits), y_beta)
    return sum(terms), terms, Frozen(u1, l)


@dataclass
class TrainResult:
    model: ExtractiveModel
    log: list
    rng_state: dict
    config: TrainConfig
    warnings: int = 0


LOG_COLUMNS = ("step", "lr", "loss", "term1", "term2", "term3", "term4")


def write_loss_log(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for row in rows:
            w.writerow([row["step"]] + [repr(float(row[c])) for c in LOG_COLUMNS[1:]])


def _index_labels(label_sets: Sequence[MultilingualLabels]):
    out = {}
    for rec in label_sets:
        out[(rec.id, rec.lang)] = rec
    return out


def train(corpus: Sequence[SummaryPair], label_sets: Sequence[MultilingualLabels],
          dictionaries: Mapping[str, BilingualDictionary], config: TrainConfig) -> TrainResult:
    """Adam with warmup/decay over ``config.steps`` optimizer updates.

    Each update consumes ``batch * accum`` documents visited in a per-epoch
    shuffled order. Each document gets a target language, a freshly sampled
    word-replaced input and its language's label sets.
    """
    if not corpus:
        raise InputError("empty training corpus")
    index = _index_labels(label_sets)
    by_id = {}
    for rec in label_sets:
        by_id.setdefault(rec.id, rec)
    langs = config.langs
    needs_sets = config.mode != "english-only"
    for pair in corpus:
        for lang in langs:
            if (pair.id, lang) not in index and (needs_sets or pair.id not in by_id):
                raise InputError(f"no label sets for document {pair.id!r}, language {lang!r}")
    if config.wr_rate > 0:
        for lang in langs:
            if lang not in dictionaries:
                raise InputError(f"no word-replacement dictionary for language {lang!r}")

    torch.set_num_threads(1)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    model = ExtractiveModel(config.encoder)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=0.0, betas=config.adam_betas)

    order: list[int] = []
    epoch = -1
    cursor = 0
    pool_warnings = 0
    rows = []
    per_step = config.batch * config.accum
    for step in range(1, config.steps + 1):
        lr = lr_at(step, config)
        for group in opt.param_groups:
            group["lr"] = lr
        opt.zero_grad(set_to_none=True)
        sums = np.zeros(5)
        for _ in range(per_step):
            if cursor >= len(order):
                epoch += 1
                order = list(rng.permutation(len(corpus)))
                cursor = 0
            pair = corpus[order[cursor]]
            cursor += 1
            lang = langs[0] if len(langs) == 1 else langs[int(rng.integers(len(langs)))]
            # english-only reads U_a alone, which is the same English oracle in every record
            labels = index.get((pair.id, lang)) or by_id[pair.id]
            sents = list(pair.document.sentences)
            if config.wr_rate > 0:
                wr = WrConfig(config.wr_rate, derive_seed(config.seed, epoch, pair.id, lang),
                              dictionaries[lang])
                sents = word_replace(sents, wr)
            toks = [tokenize(s) for s in sents]
            n = len(model.token_ids(toks)[1])
            targets = make_targets(labels, n, rng)
            pool_warnings += targets.pool_empty
            loss, terms, _ = example_loss(model, toks, targets, config.mode, config.fixed_weight)
            if not torch.isfinite(loss):
                raise TrainingError(f"non-finite loss at step {step} on document {pair.id!r}")
            (loss / per_step).backward()
            sums += [loss.item()] + [t.item() for t in terms]
        opt.step()
        means = sums / per_step
        rows.append({"step": step, "lr": lr, "loss": means[0], "term1": means[1],
                     "term2": means[2], "term3": means[3], "term4": means[4]})
        if step % 50 == 0 or step == config.steps:
            log.info("step %d lr %.2e loss %.4f", step, lr, means[0])
    if pool_warnings:
        warnings.warn(f"{pool_warnings} document visit(s) had no zero-label sentences for "
                      "negative beta examples")
    model.eval()
    return TrainResult(model, rows, _rng_state(rng), config, pool_warnings)


def _rng_state(rng: np.random.Generator) -> dict:
    state = rng.bit_generator.state
    return {"bit_generator": state["bit_generator"],
            "state": {k: str(v) for k, v in state["state"].items()},
            "has_uint32": state["has_uint32"], "uinteger": state["uinteger"]}
