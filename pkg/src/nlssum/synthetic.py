"""Synthetic bilingual corpus with a planted summary signal and a controllable label bias.

Every document has a few *key* sentences near the head that carry the summary
keywords. In *bias* documents the summary also contains alias words that occur
nowhere in the English document, while a *tail* sentence near the end holds
different words that the synthetic translation maps onto the same target
words as the aliases. The English oracle therefore ignores the tail sentence
and the translated oracle picks it up, the same kind of label flip that real
translation causes when n-gram overlap shifts between languages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augment import PrefixProvider
from .corpus import (BilingualDictionary, Document, SummaryPair, TranslationMemory,
                     save_corpus, save_dictionary, save_translation_memory)
from .oracle import get_pos_label

KEY = tuple(f"k{i:02d}" for i in range(40))
FILL = tuple(f"w{i:03d}" for i in range(160))
TAIL = tuple(f"t{i:02d}" for i in range(24))
ALIAS = tuple(f"s{i:02d}" for i in range(24))
PHRASE = 4


def make_provider(lang: str) -> PrefixProvider:
    aliases = {s: f"{lang}_{t}" for s, t in zip(ALIAS, TAIL)}
    return PrefixProvider(f"{lang}_", aliases, "en", lang)


def make_dictionaries(lang: str):
    prov = make_provider(lang)
    fwd = prov.dictionary(KEY + FILL + TAIL + ALIAS)
    back = BilingualDictionary.from_pairs(
        [(prov.translate_token(w), w) for w in KEY + FILL + TAIL], lang, "en")
    return fwd, back


@dataclass
class SyntheticBundle:
    train: list
    test: list  # translated documents, one copy per language
    test_english: list
    langs: tuple
    providers: dict
    dictionaries: dict  # lang -> (en->lang, lang->en)
    memories: dict  # lang -> TranslationMemory
    bias_ids: set = field(default_factory=set)

    def save(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_corpus(self.train, out / "train.jsonl")
        save_corpus(self.test, out / "test.jsonl")
        save_corpus(self.test_english, out / "test_en.jsonl")
        for lang in self.langs:
            fwd, back = self.dictionaries[lang]
            save_dictionary(fwd, out / f"dict.en-{lang}.txt")
            save_dictionary(back, out / f"dict.{lang}-en.txt")
            save_translation_memory(self.memories[lang], out / f"tm.en-{lang}.tsv")


def _sentence(rng, length, phrase, fill):
    body = list(rng.choice(fill, size=length - len(phrase), replace=False))
    at = int(rng.integers(0, len(body) + 1))
    return body[:at] + list(phrase) + body[at:]


def _document(rng, doc_id, bias):
    n = int(rng.integers(7, 10))
    head = max(3, math.ceil(0.6 * n))
    n_keys = 2 if bias else 3
    key_pos = sorted(int(i) for i in rng.choice(head, size=n_keys, replace=False))
    tail_pos = int(rng.integers(math.ceil(0.7 * n), n)) if bias else None
    keys = list(rng.choice(KEY, size=PHRASE * n_keys, replace=False))
    sents, summary = [], []
    for i in range(n):
        length = int(rng.integers(7, 10))
        if i in key_pos:
            phrase = keys[PHRASE * key_pos.index(i):PHRASE * (key_pos.index(i) + 1)]
            summary.append(" ".join(phrase))
        elif i == tail_pos:
            j = rng.choice(len(TAIL), size=PHRASE, replace=False)
            phrase = [TAIL[k] for k in j]
            summary.append(" ".join(ALIAS[k] for k in j))
        else:
            phrase = []
        sents.append(" ".join(_sentence(rng, length, phrase, FILL)))
    pair = SummaryPair(Document(doc_id, "en", sents), summary)
    return pair, set(key_pos), tail_pos


def _translate_pair(pair, provider, lang, suffix=True):
    doc = pair.document
    tid = f"{doc.id}-{lang}" if suffix else doc.id
    sents = [provider.translate_sentence(s) for s in doc.sentences]
    return SummaryPair(Document(tid, lang, sents),
                       [provider.translate_sentence(s) for s in pair.summary])


def make_synthetic(n_train=200, n_test=50, seed=0, bias_fraction=0.5,
                   langs=("fr",)) -> SyntheticBundle:
    """Deterministic corpus; exactly ``round(bias_fraction * n)`` documents per split are biased."""
    rng = np.random.default_rng(seed)
    langs = tuple(langs)
    providers = {lang: make_provider(lang) for lang in langs}

    def split(prefix, count):
        biased = set(rng.permutation(count)[: round(bias_fraction * count)].tolist())
        pairs, bias_ids = [], set()
        for i in range(count):
            doc_id = f"{prefix}{i:04d}"
            while True:
                pair, keys, tail = _document(rng, doc_id, i in biased)
                if _check(pair, keys, tail, providers):
                    break
            pairs.append(pair)
            if i in biased:
                bias_ids.add(doc_id)
        return pairs, bias_ids

    train, bias_train = split("train", n_train)
    test_en, bias_test = split("test", n_test)
    test = [_translate_pair(p, providers[lang], lang) for lang in langs for p in test_en]
    memories = {}
    for lang, prov in providers.items():
        entries = {}
        for p in train + test_en:
            for s in p.document.sentences + p.summary:
                entries[s] = prov.translate_sentence(s)
        memories[lang] = TranslationMemory("en", lang, entries)
    dictionaries = {lang: make_dictionaries(lang) for lang in langs}
    return SyntheticBundle(train, test, test_en, langs, providers, dictionaries, memories,
                           bias_train | bias_test)


def _check(pair, keys, tail, providers) -> bool:
    """Reject samples whose oracles do not come out as designed."""
    if set(get_pos_label(pair.document, pair.summary).positive_indices) != keys:
        return False
    want = keys | ({tail} if tail is not None else set())
    for lang, prov in providers.items():
        tr = _translate_pair(pair, prov, lang)
        if set(get_pos_label(tr.document, tr.summary).positive_indices) != want:
            return False
    return True
