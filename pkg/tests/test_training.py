import math

import numpy as np
import pytest
import torch

from nlssum.corpus import BilingualDictionary, Document, SummaryPair
from nlssum.encoder import EncoderConfig
from nlssum.errors import InputError, TrainingError
from nlssum.labelsets import MultilingualLabels
from nlssum.training import (TrainConfig, bce, joint_loss, lr_at, make_alpha_targets,
                             make_beta_examples, make_targets, train)
from nlssum import training

SMALL = EncoderConfig(dim=16, ff_dim=32, init_seed=0)


def test_lr_schedule():
    cfg = TrainConfig(steps=20, warmup=5, lr=1e-3)
    assert lr_at(5, cfg) == 1e-3
    assert lr_at(1, cfg) == pytest.approx(2e-4)
    assert lr_at(20, cfg) == 0.0
    assert lr_at(10, cfg) == pytest.approx(1e-3 * 10 / 15)
    vals = [lr_at(s, cfg) for s in range(1, 21)]
    assert max(vals) == vals[4]
    steps = np.diff(vals)
    assert np.all(steps[:4] > 0) and np.all(steps[4:] < 0)


def test_config_validation():
    with pytest.raises(InputError):
        TrainConfig(steps=5, warmup=6)
    with pytest.raises(InputError):
        TrainConfig(wr_rate=1.2)
    with pytest.raises(InputError):
        TrainConfig(mode="fixed-weight", fixed_weight=0.0)
    with pytest.raises(InputError):
        TrainConfig(mode="nlssum-sep", langs=("fr", "de"))
    with pytest.raises(InputError):
        TrainConfig(mode="bogus")


def test_alpha_targets():
    lab = MultilingualLabels("d", "fr", [0], [2], [], [], 4)
    assert make_alpha_targets(lab, 4).tolist() == [1, 0, 1, 0]
    empty = MultilingualLabels("d", "fr", [], [], [], [], 3)
    assert make_alpha_targets(empty, 3).tolist() == [0, 0, 0]
    full = MultilingualLabels("d", "fr", [0, 1], [2], [], [], 3)
    assert make_alpha_targets(full, 3).tolist() == [1, 1, 1]


def test_beta_examples_seeded():
    lab = MultilingualLabels("d", "fr", [0], [0, 1], [1, 2], [3], 10)
    pool = [4, 5, 6, 7, 8, 9]
    ex = make_beta_examples(lab, pool, np.random.default_rng(5))
    assert ex == [((0,), 1), ((0, 1), 1), ((1, 2), 1), ((3,), 1),
                  ((8, 6, 4), 0), ((7, 6, 5), 0), ((7, 5, 8), 0), ((9, 8, 4), 0)]
    for ix, t in ex:
        if t == 0:
            assert len(set(ix)) == 3 and set(ix) <= set(pool)


def test_beta_examples_degenerate():
    lab = MultilingualLabels("d", "fr", [0], [0], [], [1], 4)
    ex = make_beta_examples(lab, [2, 3], np.random.default_rng(0))
    assert sum(t for _, t in ex) == 3 and len(ex) == 6
    assert all(set(ix) <= {2, 3} for ix, t in ex if t == 0)
    assert make_beta_examples(lab, [], np.random.default_rng(0)) == [
        ((0,), 1), ((0,), 1), ((1,), 1)]
    t = make_targets(MultilingualLabels("d", "fr", [0, 1], [], [], [], 2), 2,
                     np.random.default_rng(0))
    assert t.pool_empty


def test_joint_loss_hand_value():
    assert bce([0.8], [1]) == pytest.approx(0.22314, abs=1e-5)
    assert bce([0.8], [0.9]) == pytest.approx(0.36177, abs=1e-5)
    total = joint_loss([0.8], [0.9], [0.8], [1], [0.9] * 4, [1] * 4, [1])
    hand = -math.log(0.8) - (0.9 * math.log(0.8) + 0.1 * math.log(0.2)) - math.log(0.8) - math.log(0.9)
    assert total == pytest.approx(hand, abs=1e-12)


def test_joint_loss_structure():
    p = 1 - 1e-12
    l = np.array([0.7, 0.6])
    ent = float(np.mean(-(l * np.log(l) + (1 - l) * np.log(1 - l))))
    # hard-target terms vanish at their limits; the soft term bottoms out at H(l)
    assert joint_loss([p, p], l, [p, p], [1, 1], [p], [1], [1, 1]) - bce([p, p], l) < 1e-9
    total = joint_loss(l, l, [p, p], [1, 1], [p], [1], [1, 1])
    assert total - bce(l, [1, 1]) == pytest.approx(ent, abs=1e-9)
    y = np.array([1.0, 0.0])
    assert joint_loss([0.3, 0.4], y, [p, p], [1, 1], [p], [1], y) == pytest.approx(
        2 * bce([0.3, 0.4], y), abs=1e-9)
    with pytest.raises(InputError):
        joint_loss([np.nan], [0.5], [0.5], [1], [0.5], [1], [1])


def tiny_corpus():
    pairs, labels = [], []
    for i in range(4):
        sents = [f"k{i} alpha beta .", f"gamma delta w{i} .", "epsilon zeta eta ."]
        pairs.append(SummaryPair(Document(f"d{i}", "en", sents), [f"k{i} alpha beta"]))
        labels.append(MultilingualLabels(f"d{i}", "fr", [0], [0, 2], [0], [0], 3))
    words = {t for p in pairs for s in p.document.sentences for t in s.split()}
    d = BilingualDictionary.from_pairs([(w, "fr_" + w) for w in words], "en", "fr")
    return pairs, labels, {"fr": d}


@pytest.mark.parametrize("mode", ["nlssum", "nlssum-sep", "fixed-weight", "english-only"])
def test_train_runs_every_mode(mode):
    pairs, labels, dicts = tiny_corpus()
    cfg = TrainConfig(steps=10, warmup=5, batch=2, accum=1, mode=mode, encoder=SMALL)
    res = train(pairs, labels, dicts, cfg)
    assert [r["step"] for r in res.log] == list(range(1, 11))
    assert res.log[4]["lr"] == cfg.lr
    assert all(math.isfinite(r["loss"]) and r["loss"] >= 0 for r in res.log)
    if mode == "english-only":
        assert all(r["term2"] == r["term3"] == r["term4"] == 0 for r in res.log)
    if mode == "fixed-weight":
        assert all(r["term3"] == r["term4"] == 0 < r["term2"] for r in res.log)


def test_train_deterministic():
    pairs, labels, dicts = tiny_corpus()
    cfg = TrainConfig(steps=6, warmup=2, batch=2, accum=2, encoder=SMALL)
    a, b = train(pairs, labels, dicts, cfg), train(pairs, labels, dicts, cfg)
    assert a.log == b.log and a.rng_state == b.rng_state
    for p, q in zip(a.model.parameters(), b.model.parameters()):
        assert torch.equal(p, q)


def test_train_input_errors():
    pairs, labels, dicts = tiny_corpus()
    cfg = TrainConfig(steps=2, warmup=1, encoder=SMALL)
    with pytest.raises(InputError, match="d3"):
        train(pairs, labels[:3], dicts, cfg)
    with pytest.raises(InputError, match="dictionary"):
        train(pairs, labels, {}, cfg)
    with pytest.raises(InputError):
        train([], labels, dicts, cfg)


def test_nan_loss_names_document(monkeypatch):
    pairs, labels, dicts = tiny_corpus()
    real = training.example_loss

    def poisoned(model, *args, **kw):
        loss, terms, fr = real(model, *args, **kw)
        return loss * float("nan"), terms, fr

    monkeypatch.setattr(training, "example_loss", poisoned)
    with pytest.raises(TrainingError, match="document 'd"):
        train(pairs, labels, dicts, TrainConfig(steps=2, warmup=1, encoder=SMALL))
