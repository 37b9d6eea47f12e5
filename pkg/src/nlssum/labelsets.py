"""The four multilingual label sets built from one English (document, summary) pair.

U_a  oracle on the English pair
U_b  oracle on the translated document and translated summary
U_c  oracle on the translated document and the 100%-word-replaced summary
U_d  oracle on the English document and the back-translated summary

Translation is sentence-by-sentence, so every index refers to the original
English sentence order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .augment import TranslationProvider, full_replace, mt_translate
from .corpus import BilingualDictionary, SummaryPair
from .errors import InputError, ParseError
from .oracle import OracleConfig, get_pos_label

SET_NAMES = ("U_a", "U_b", "U_c", "U_d")


@dataclass(frozen=True)
class MultilingualLabels:
    id: str
    lang: str
    U_a: tuple[int, ...]
    U_b: tuple[int, ...]
    U_c: tuple[int, ...]
    U_d: tuple[int, ...]
    n_sentences: int

    def __post_init__(self):
        for name in SET_NAMES:
            idx = tuple(sorted(set(int(i) for i in getattr(self, name))))
            bad = [i for i in idx if not 0 <= i < self.n_sentences]
            if bad:
                raise InputError(
                    f"{self.id}/{self.lang}: {name} index {bad[0]} outside [0, {self.n_sentences})")
            object.__setattr__(self, name, idx)

    @property
    def sets(self) -> tuple[tuple[int, ...], ...]:
        return (self.U_a, self.U_b, self.U_c, self.U_d)

    @property
    def union(self) -> tuple[int, ...]:
        return tuple(sorted(set().union(*self.sets)))

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return tuple(len(s) for s in self.sets)

    def truncated(self, n: int) -> "MultilingualLabels":
        """Drop indices >= n (used when the encoder truncates a long document)."""
        if n >= self.n_sentences:
            return self
        return MultilingualLabels(self.id, self.lang, *[[i for i in s if i < n] for s in self.sets], n)

    def to_record(self) -> dict:
        rec = {"id": self.id, "lang": self.lang}
        for name in SET_NAMES:
            rec[name] = list(getattr(self, name))
        rec["n"] = self.n_sentences
        return rec


def _translate_aligned(sentences, provider, strict, what):
    out = mt_translate(sentences, provider, strict)
    if len(out) != len(sentences):
        raise InputError(f"{what}: provider changed the sentence count")
    return out


def build_label_sets(pair: SummaryPair, mt: TranslationProvider, mt_dict: BilingualDictionary,
                     rev_dict: BilingualDictionary, *, lang: str | None = None,
                     strict: bool = False, seed: int = 0,
                     oracle_config: OracleConfig | None = None) -> MultilingualLabels:
    doc, summary = list(pair.document.sentences), list(pair.summary)
    n = len(doc)
    doc_mt = _translate_aligned(doc, mt, strict, pair.id)
    summ_mt = mt_translate(summary, mt, strict)
    summ_wr = full_replace(summary, mt_dict, seed)
    summ_back = full_replace(summ_mt, rev_dict, seed)

    def label(sents, summ):
        return get_pos_label(sents, summ, oracle_config).positive_indices

    return MultilingualLabels(
        pair.id, lang or mt.target_lang,
        label(doc, summary), label(doc_mt, summ_mt), label(doc_mt, summ_wr),
        label(doc, summ_back), n)


def save_label_sets(records: Iterable[MultilingualLabels], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_record(), ensure_ascii=False) + "\n")


def load_label_sets(path, sizes: Mapping[str, int] | None = None) -> list[MultilingualLabels]:
    """Read label-set JSON-lines.

    The sentence count comes from ``sizes`` (id -> N, usually from the corpus)
    when given, else from the record's ``n`` field; indices are range-checked
    against it.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"label file not found: {path}")
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                n = sizes.get(rec["id"]) if sizes is not None else rec.get("n")
                if n is None:
                    n = rec.get("n")
                if not isinstance(n, int):
                    raise InputError(f"unknown sentence count for id {rec['id']!r}")
                sets = []
                for name in SET_NAMES:
                    vals = rec[name]
                    if not isinstance(vals, list) or not all(isinstance(v, int) for v in vals):
                        raise InputError(f"{name} must be a list of integers")
                    sets.append(vals)
                out.append(MultilingualLabels(rec["id"], rec["lang"], *sets, n))
            except (json.JSONDecodeError, KeyError, TypeError, InputError) as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return out


def build_corpus_label_sets(pairs: Sequence[SummaryPair], mt, mt_dict, rev_dict, *,
                            lang=None, strict=False, seed=0, oracle_config=None, jobs=1):
    args = [(p, mt, mt_dict, rev_dict, lang, strict, seed, oracle_config) for p in pairs]
    if jobs > 1 and len(args) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_build_one, args, chunksize=8))
    return [_build_one(a) for a in args]


def _build_one(args):
    p, mt, mt_dict, rev_dict, lang, strict, seed, oracle_config = args
    return build_label_sets(p, mt, mt_dict, rev_dict, lang=lang, strict=strict, seed=seed,
                            oracle_config=oracle_config)
