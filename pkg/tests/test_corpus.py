import json
import warnings

import pytest

from nlssum.corpus import (BilingualDictionary, Document, SummaryPair, load_corpus,
                           load_dictionary, load_translation_memory, save_corpus,
                           save_translation_memory, tokenize)
from nlssum.errors import InputError, ParseError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.mark.parametrize("text,expected", [
    ("The cat sat.", ["the", "cat", "sat", "."]),
    ("", []),
    ("Er wurde nie angeklagt", ["er", "wurde", "nie", "angeklagt"]),
    ('"Hello," she said!', ['"', "hello", ",", '"', "she", "said", "!"]),
    ("x-ray fr_cat", ["x-ray", "fr_cat"]),
    ("   spaced\tout  ", ["spaced", "out"]),
])
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_load_two_lines_in_order(tmp_path):
    recs = [{"id": "b", "language": "en", "sentences": ["one."], "summary": ["one"]},
            {"id": "a", "language": "en", "sentences": ["two.", "three."], "summary": ["x"]}]
    p = write(tmp_path / "c.jsonl", "".join(json.dumps(r) + "\n" for r in recs))
    pairs = load_corpus(p)
    assert [x.id for x in pairs] == ["b", "a"]
    assert len(pairs[1].document) == 2


def test_empty_summary_names_line(tmp_path):
    good = {"id": "a", "language": "en", "sentences": ["s"], "summary": ["s"]}
    bad = dict(good, id="b", summary=[])
    p = write(tmp_path / "c.jsonl", json.dumps(good) + "\n" + json.dumps(bad) + "\n")
    with pytest.raises(ParseError, match=":2:"):
        load_corpus(p)


@pytest.mark.parametrize("line", ["not json", '{"id": 1}', '["a"]',
                                  '{"id": "a", "language": "en", "sentences": [], "summary": ["x"]}'])
def test_malformed_records(tmp_path, line):
    with pytest.raises(ParseError):
        load_corpus(write(tmp_path / "c.jsonl", line + "\n"))


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_corpus(tmp_path / "nope.jsonl")


def test_document_validation():
    with pytest.raises(InputError):
        Document("a", "en", [])
    with pytest.raises(InputError):
        SummaryPair(Document("a", "en", ["x"]), [])


def test_synthetic_corpus_round_trip(tmp_path, bundled_dir):
    src = bundled_dir / "train.jsonl"
    pairs = load_corpus(src)
    assert len(pairs) == 200
    save_corpus(pairs, tmp_path / "again.jsonl")
    assert (tmp_path / "again.jsonl").read_bytes() == src.read_bytes()


def test_dictionary_accumulates(tmp_path):
    d = load_dictionary(write(tmp_path / "d.txt", "cat chat\ncat félin\n\ndog chien\n"))
    assert d.lookup("cat") == ("chat", "félin")
    assert d.lookup("CAT") == ("chat", "félin")
    assert d.lookup("bird") is None
    assert len(d) == 2


def test_dictionary_empty_and_bad(tmp_path):
    assert len(load_dictionary(write(tmp_path / "e.txt", ""))) == 0
    with pytest.raises(ParseError, match=":2:"):
        load_dictionary(write(tmp_path / "b.txt", "cat chat\ncat\n"))


def test_dictionary_inverted():
    d = BilingualDictionary.from_pairs([("cat", "chat"), ("kitty", "chat")])
    assert d.inverted().lookup("chat") == ("cat", "kitty")


def test_translation_memory(tmp_path):
    tm = load_translation_memory(write(tmp_path / "one.tsv", "the cat\tle chat\n"))
    assert len(tm) == 1 and tm.get("the cat") == "le chat"
    with pytest.warns(UserWarning, match="duplicate"):
        tm = load_translation_memory(write(tmp_path / "dup.tsv", "a\tx\na\ty\n"))
    assert len(tm) == 1 and tm.get("a") == "y"
    with pytest.raises(ParseError):
        load_translation_memory(write(tmp_path / "bad.tsv", "no tab here\n"))


def test_translation_memory_fixture(tmp_path):
    entries = {f"sentence number {i} ." : f"phrase numéro {i} ." for i in range(50)}
    save_translation_memory(entries, tmp_path / "tm.tsv")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tm = load_translation_memory(tmp_path / "tm.tsv")
    assert all(tm.get(s) == t for s, t in entries.items())
