import pytest

from nlssum.augment import (IdentityProvider, MemoryProvider, PrefixProvider, WrConfig,
                            back_translate_summary, derive_seed, make_provider, mt_translate,
                            word_replace)
from nlssum.corpus import BilingualDictionary, TranslationMemory
from nlssum.errors import InputError, MissingTranslation

WORDS = ("the cat sat on the mat while the dog ran to the red barn "
         "and a bird sang in the tree").split()


def fixture_dict():
    covered = sorted(set(WORDS) - {"the", "a"})
    return BilingualDictionary.from_pairs([(w, "fr_" + w) for w in covered], "en", "fr")


def test_rate_zero_is_identity():
    sents = ["The Cat sat.", "untouched  spacing"]
    assert word_replace(sents, WrConfig(0.0, 1, fixture_dict())) == sents


def test_rate_one_replaces_covered_words():
    d = BilingualDictionary.from_pairs([("cat", "chat"), ("sat", "assis")])
    assert word_replace(["the cat sat"], WrConfig(1.0, 0, d)) == ["the chat assis"]


def test_seeded_half_rate():
    cfg = WrConfig(0.5, 7, fixture_dict())
    out = word_replace([" ".join(WORDS)], cfg)
    assert out == ["the cat sat fr_on the mat fr_while the dog fr_ran fr_to the fr_red "
                   "fr_barn and a bird sang in the fr_tree"]
    assert word_replace([" ".join(WORDS)], cfg) == out
    toks = out[0].split()
    covered = [w for w in WORDS if w not in ("the", "a")]
    frac = sum(t.startswith("fr_") for t in toks) / len(covered)
    assert 0.2 <= frac <= 0.8


def test_multiple_candidates_are_all_reachable():
    d = BilingualDictionary.from_pairs([("cat", "chat"), ("cat", "félin")])
    seen = {word_replace(["cat"], WrConfig(1.0, s, d))[0] for s in range(40)}
    assert seen == {"chat", "félin"}


def test_rate_validation():
    with pytest.raises(InputError):
        WrConfig(1.5, 0, fixture_dict())


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, 1, "doc", "fr") == derive_seed(0, 1, "doc", "fr")
    assert derive_seed(0, 1, "doc", "fr") != derive_seed(0, 2, "doc", "fr")
    assert 0 <= derive_seed(2**40, "x") < 2**63


def test_memory_provider():
    tm = TranslationMemory("en", "fr", {"a": "x", "b": "y", "c": "z"})
    assert mt_translate(["a", "b", "c"], MemoryProvider(tm)) == ["x", "y", "z"]
    with pytest.raises(MissingTranslation):
        mt_translate(["a", "q"], MemoryProvider(tm), strict=True)
    with pytest.warns(UserWarning, match="1 sentence"):
        assert mt_translate(["a", "q"], MemoryProvider(tm)) == ["x", "q"]


def test_prefix_provider():
    assert mt_translate(["the cat"], PrefixProvider("xx_")) == ["xx_the xx_cat"]
    assert PrefixProvider("xx_").translate_sentence("Hi.") == "xx_hi ."


def test_make_provider():
    assert isinstance(make_provider("identity"), IdentityProvider)
    with pytest.raises(InputError):
        make_provider("memory")
    with pytest.raises(InputError):
        make_provider("google")


def test_back_translation_identity():
    out = back_translate_summary(["The Cat sat."], IdentityProvider(), BilingualDictionary("en", "en"))
    assert out == ["the cat sat ."]


def test_back_translation_inverse_and_miss():
    summary = ["the cat sat on the mat"]
    vocab = set(summary[0].split())
    back = BilingualDictionary.from_pairs([("xx_" + t, t) for t in vocab])
    assert back_translate_summary(summary, PrefixProvider("xx_"), back) == summary
    partial = BilingualDictionary.from_pairs([("xx_" + t, t) for t in vocab - {"cat"}])
    out = back_translate_summary(summary, PrefixProvider("xx_"), partial)
    assert out == ["the xx_cat sat on the mat"]
