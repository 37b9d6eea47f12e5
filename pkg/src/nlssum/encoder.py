"""Toy extractive encoder: token transformer, sentence transformer, classifier,
and the two weight predictors (sentence-level alpha, set-level beta).

Everything runs in float64 on CPU. Parameters are initialised from a numpy
generator so that a seed gives the same weights regardless of torch version.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch
from torch import nn

from .errors import CheckpointError, InputError

CHECKPOINT_FORMAT = "nlssum-checkpoint"
CHECKPOINT_VERSION = 1

GROUPS = {
    "embedding": "embedding",
    "sent_encoder": "T_S",
    "doc_encoder": "T_D",
    "classifier": "classifier",
    "alpha": "T_alpha",
    "beta": "T_beta",
}


@dataclass(frozen=True)
class EncoderConfig:
    buckets: int = 4096
    dim: int = 32
    heads: int = 2
    sent_layers: int = 2
    doc_layers: int = 2
    predictor_layers: int = 2
    ff_dim: int = 64
    max_tokens: int = 512
    local_attention: bool = True
    dropout: float = 0.0
    init_seed: int = 0

    def __post_init__(self):
        if self.dim % self.heads:
            raise InputError("dim must be divisible by heads")
        if self.max_tokens < 2:
            raise InputError("max_tokens must be >= 2")

    @property
    def marker_id(self) -> int:
        return self.buckets

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise CheckpointError(f"unknown encoder config keys: {sorted(unknown)}")
        return cls(**d)


def token_bucket(token: str, buckets: int) -> int:
    return zlib.crc32(token.encode("utf-8")) % buckets


def sinusoidal(length: int, dim: int) -> torch.Tensor:
    pos = np.arange(length)[:, None]
    rates = np.exp(-math.log(10000.0) * (np.arange(0, dim, 2) / dim))
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(pos * rates)
    table[:, 1::2] = np.cos(pos * rates[: dim // 2])
    return torch.from_numpy(table)


class SelfAttention(nn.Module):
    def __init__(self, dim, heads):
        super().__init__()
        self.heads = heads
        self.qkv = nn.Linear(dim, 3 * dim)
        self.out = nn.Linear(dim, dim)

    def forward(self, x, mask=None):
        t, d = x.shape
        h, dh = self.heads, d // self.heads
        q, k, v = self.qkv(x).view(t, 3, h, dh).permute(1, 2, 0, 3)
        logits = q @ k.transpose(-1, -2) / math.sqrt(dh)
        if mask is not None:
            logits = logits.masked_fill(~mask, float("-inf"))
        att = torch.softmax(logits, dim=-1)
        return self.out((att @ v).transpose(0, 1).reshape(t, d))


class Layer(nn.Module):
    """Pre-norm transformer block."""

    def __init__(self, dim, heads, ff_dim, dropout):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = SelfAttention(dim, heads)
        self.norm2 = nn.LayerNorm(dim)
        self.ff = nn.Sequential(nn.Linear(dim, ff_dim), nn.GELU(), nn.Linear(ff_dim, dim))
        self.drop = nn.Dropout(dropout)

    def forward(self, x, mask=None):
        x = x + self.drop(self.attn(self.norm1(x), mask))
        return x + self.drop(self.ff(self.norm2(x)))


class Stack(nn.Module):
    """Sinusoidal positions, ``n`` pre-norm layers, final LayerNorm."""

    def __init__(self, n, cfg: EncoderConfig):
        super().__init__()
        self.layers = nn.ModuleList(
            Layer(cfg.dim, cfg.heads, cfg.ff_dim, cfg.dropout) for _ in range(n))
        self.norm = nn.LayerNorm(cfg.dim)

    def forward(self, x, mask=None):
        x = x + sinusoidal(x.shape[0], x.shape[1]).to(x.dtype)
        for layer in self.layers:
            x = layer(x, mask)
        return self.norm(x)


class Predictor(nn.Module):
    """Transformer stack + linear head; returns one logit per input vector."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.encoder = Stack(cfg.predictor_layers, cfg)
        self.head = nn.Linear(cfg.dim, 1)

    def forward(self, x):
        return self.head(self.encoder(x)).squeeze(-1)


@dataclass
class EncodedDoc:
    token_vectors: torch.Tensor  # (T, d), markers included
    sentence_vectors: torch.Tensor  # (N, d), marker outputs u_1^i
    contextual: torch.Tensor  # (N, d), v_i
    n_sentences: int


class ExtractiveModel(nn.Module):
    def __init__(self, cfg: EncoderConfig | None = None):
        super().__init__()
        cfg = cfg or EncoderConfig()
        self.cfg = cfg
        self.embedding = nn.Embedding(cfg.buckets + 1, cfg.dim)
        self.sent_encoder = Stack(cfg.sent_layers, cfg)
        self.doc_encoder = Stack(cfg.doc_layers, cfg)
        self.classifier = nn.Linear(cfg.dim, 1)
        self.alpha = Predictor(cfg)
        self.beta = Predictor(cfg)
        self.double()
        self.reset_parameters(cfg.init_seed)

    @torch.no_grad()
    def reset_parameters(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        for name, p in self.named_parameters():
            if name.startswith("embedding"):
                vals = rng.normal(0.0, 1.0, p.shape)
            elif "norm" in name:
                vals = np.ones(p.shape) if name.endswith("weight") else np.zeros(p.shape)
            elif name.endswith("bias"):
                vals = np.zeros(p.shape)
            else:
                vals = rng.normal(0.0, 1.0 / math.sqrt(p.shape[1]), p.shape)
            p.copy_(torch.from_numpy(vals))

    def token_ids(self, sentences: Sequence[Sequence[str]]):
        """Flat ids with a marker before each sentence, truncated by whole sentences.

        Returns ``(ids, marker_positions)``.
        """
        cfg = self.cfg
        ids, marks = [], []
        for toks in sentences:
            if len(ids) + 1 + len(toks) > cfg.max_tokens:
                break
            marks.append(len(ids))
            ids.append(cfg.marker_id)
            ids.extend(token_bucket(t, cfg.buckets) for t in toks)
        if not marks:
            raise InputError(
                f"first sentence needs {1 + len(sentences[0]) if sentences else 1} tokens, "
                f"budget is {cfg.max_tokens}")
        return torch.tensor(ids, dtype=torch.long), marks

    def encode(self, sentences: Sequence[Sequence[str]]) -> EncodedDoc:
        ids, marks = self.token_ids(sentences)
        mask = None
        if self.cfg.local_attention:
            seg = torch.zeros(len(ids), dtype=torch.long)
            seg[marks[1:]] = 1
            seg = seg.cumsum(0)
            mask = seg[:, None] == seg[None, :]
        u = self.sent_encoder(self.embedding(ids), mask)
        u1 = u[marks]
        v = self.doc_encoder(u1)
        return EncodedDoc(u, u1, v, len(marks))

    def score_logits(self, v):
        return self.classifier(v).squeeze(-1)

    def alpha_logits(self, u1):
        return self.alpha(u1)

    def beta_logits(self, set_vectors):
        return self.beta(set_vectors)


def group_of(param_name: str) -> str:
    return GROUPS[param_name.split(".", 1)[0]]


def _tokens(document) -> list[list[str]]:
    from .corpus import Document, tokenize

    if isinstance(document, Document):
        return document.tokenized()
    return [tokenize(s) if isinstance(s, str) else list(s) for s in document]


def encode_document(model: ExtractiveModel, document) -> EncodedDoc:
    """Forward through the token and sentence transformers (no gradient)."""
    with torch.no_grad():
        return model.encode(_tokens(document))


def predict_scores(model: ExtractiveModel, v) -> np.ndarray:
    with torch.no_grad():
        return torch.sigmoid(model.score_logits(torch.as_tensor(v, dtype=torch.float64))).numpy()


def predict_alpha(model: ExtractiveModel, u1) -> np.ndarray:
    with torch.no_grad():
        return torch.sigmoid(model.alpha_logits(torch.as_tensor(u1, dtype=torch.float64))).numpy()


def set_means(u1: torch.Tensor, sets: Sequence[Sequence[int]]) -> torch.Tensor:
    """Mean of sentence vectors per index set; an empty set gives the zero vector."""
    rows = []
    for s in sets:
        rows.append(u1[list(s)].mean(dim=0) if len(s) else torch.zeros(u1.shape[1], dtype=u1.dtype))
    return torch.stack(rows)


def predict_beta(model: ExtractiveModel, set_vectors) -> np.ndarray:
    with torch.no_grad():
        x = torch.as_tensor(set_vectors, dtype=torch.float64)
        return torch.sigmoid(model.beta_logits(x)).numpy()


def gradients(model: ExtractiveModel, loss_fn: Callable[[ExtractiveModel], torch.Tensor]) -> dict:
    """Analytic gradient of ``loss_fn(model)`` for every parameter (zeros if unused)."""
    model.zero_grad(set_to_none=True)
    loss = loss_fn(model)
    if not torch.isfinite(loss):
        raise InputError(f"loss is not finite: {loss.item()}")
    loss.backward()
    out = {}
    for name, p in model.named_parameters():
        out[name] = np.zeros(tuple(p.shape)) if p.grad is None else p.grad.detach().numpy().copy()
    model.zero_grad(set_to_none=True)
    return out


def flat_params(model: ExtractiveModel) -> dict[str, np.ndarray]:
    return {n: p.detach().numpy().copy() for n, p in model.named_parameters()}


def save_checkpoint(path, model: ExtractiveModel, train_config: dict | None = None,
                    rng_state: dict | None = None) -> None:
    record = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.cfg),
        "train_config": train_config or {},
        "params": {
            name: {"shape": list(p.shape), "data": p.detach().reshape(-1).tolist()}
            for name, p in model.named_parameters()
        },
        "rng_state": rng_state or {},
    }
    Path(path).write_text(json.dumps(record, sort_keys=True) + "\n", encoding="utf-8")


def load_checkpoint(path, expected_config: EncoderConfig | None = None):
    """Return ``(model, record)``; raise CheckpointError on a format or config mismatch."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not JSON ({exc})") from None
    if record.get("format") != CHECKPOINT_FORMAT or record.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format/version")
    cfg = EncoderConfig.from_dict(record["config"])
    if expected_config is not None and cfg != expected_config:
        raise CheckpointError(f"{path}: config {cfg} does not match expected {expected_config}")
    model = ExtractiveModel(cfg)
    params = dict(model.named_parameters())
    if set(params) != set(record["params"]):
        raise CheckpointError(f"{path}: parameter names do not match the model")
    with torch.no_grad():
        for name, p in params.items():
            entry = record["params"][name]
            if list(p.shape) != entry["shape"]:
                raise CheckpointError(f"{path}: shape mismatch for {name}")
            p.copy_(torch.tensor(entry["data"], dtype=torch.float64).reshape(p.shape))
    return model, record
