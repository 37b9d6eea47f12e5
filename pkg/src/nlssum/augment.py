"""Code-switching word replacement and sentence translation providers.

Real machine translation is not available offline, so translation goes through
a ``TranslationProvider``: an exact-match translation memory, a token-wise
prefix transform (optionally with aliases that merge source words), or the
identity.
"""

from __future__ import annotations

import warnings
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import BilingualDictionary, TranslationMemory, _is_punct, tokenize
from .errors import InputError, MissingTranslation


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from ints and strings (strings hashed with crc32)."""
    entropy = [p if isinstance(p, int) else zlib.crc32(str(p).encode("utf-8")) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0] >> 1)


class TranslationProvider:
    source_lang = "en"
    target_lang = "xx"

    def translate_sentence(self, sentence: str) -> str:
        raise NotImplementedError


class IdentityProvider(TranslationProvider):
    def __init__(self, source_lang="en", target_lang="en"):
        self.source_lang, self.target_lang = source_lang, target_lang

    def translate_sentence(self, sentence):
        return sentence


class MemoryProvider(TranslationProvider):
    def __init__(self, memory: TranslationMemory):
        self.memory = memory
        self.source_lang, self.target_lang = memory.source_lang, memory.target_lang

    def translate_sentence(self, sentence):
        out = self.memory.get(sentence)
        if out is None:
            raise MissingTranslation(sentence)
        return out


class PrefixProvider(TranslationProvider):
    """Token-wise synthetic translation ``t -> prefix + t``.

    ``aliases`` overrides the output for specific source tokens; mapping two
    source words onto one target word is how tests build translations that
    change n-gram overlap. Punctuation-only tokens pass through.
    """

    def __init__(self, prefix="xx_", aliases=None, source_lang="en", target_lang="xx"):
        self.prefix = prefix
        self.aliases = dict(aliases or {})
        self.source_lang, self.target_lang = source_lang, target_lang

    def translate_token(self, tok: str) -> str:
        if tok in self.aliases:
            return self.aliases[tok]
        if all(_is_punct(c) for c in tok):
            return tok
        return self.prefix + tok

    def translate_sentence(self, sentence):
        return " ".join(self.translate_token(t) for t in tokenize(sentence))

    def dictionary(self, vocabulary) -> BilingualDictionary:
        """EN->target dictionary consistent with this provider over ``vocabulary``."""
        pairs = [(w, self.translate_token(w)) for w in vocabulary]
        return BilingualDictionary.from_pairs(pairs, self.source_lang, self.target_lang)


def make_provider(kind: str, *, memory: TranslationMemory | None = None, prefix="xx_",
                  source_lang="en", target_lang="xx") -> TranslationProvider:
    if kind == "identity":
        return IdentityProvider(source_lang, target_lang)
    if kind == "prefix":
        return PrefixProvider(prefix, source_lang=source_lang, target_lang=target_lang)
    if kind == "memory":
        if memory is None:
            raise InputError("provider 'memory' needs a translation memory")
        return MemoryProvider(memory)
    raise InputError(f"unknown provider: {kind}")


@dataclass(frozen=True)
class WrConfig:
    rate: float
    seed: int
    dictionary: BilingualDictionary

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise InputError(f"replacement rate must be in [0, 1], got {self.rate}")


def word_replace(sentences: Sequence[str], config: WrConfig) -> list[str]:
    """Swap tokens for dictionary translations with probability ``rate``.

    One uniform draw per token (covered or not) keeps the random stream
    aligned with token positions. Output is lowercased and space-joined; a
    rate of 0 returns the input untouched.
    """
    if config.rate == 0.0:
        return list(sentences)
    rng = np.random.default_rng(config.seed)
    out = []
    for sent in sentences:
        toks = tokenize(sent)
        draws = rng.random(len(toks))
        new = []
        for tok, u in zip(toks, draws):
            cands = config.dictionary.lookup(tok) if u < config.rate else None
            if cands:
                tok = cands[int(rng.integers(len(cands)))] if len(cands) > 1 else cands[0]
            new.append(tok)
        out.append(" ".join(new))
    return out


def mt_translate(sentences: Sequence[str], provider: TranslationProvider,
                 strict: bool = False) -> list[str]:
    """Sentence-by-sentence translation.

    Non-strict mode copies untranslatable sentences through and warns once with
    the count; strict mode raises ``MissingTranslation``.
    """
    out = []
    missing = 0
    for sent in sentences:
        try:
            out.append(provider.translate_sentence(sent))
        except MissingTranslation:
            if strict:
                raise
            missing += 1
            out.append(sent)
    if missing:
        warnings.warn(f"{missing} sentence(s) passed through untranslated")
    return out


def full_replace(sentences: Sequence[str], dictionary: BilingualDictionary, seed: int = 0):
    """100% word replacement: every covered token is swapped, the rest kept."""
    return word_replace(sentences, WrConfig(1.0, seed, dictionary))


def back_translate_summary(summary: Sequence[str], mt_provider: TranslationProvider,
                           wr_dict: BilingualDictionary, strict: bool = False,
                           seed: int = 0) -> list[str]:
    """Paraphrase a summary: MT forward, then 100% dictionary replacement back."""
    return full_replace(mt_translate(summary, mt_provider, strict), wr_dict, seed)
