"""Supervised ranking model tests."""

import math

import numpy as np
import pytest

from lexiscope.errors import (
    BadConfig,
    DimensionMismatch,
    EmptySet,
    SingleClassData,
    TooFewPairs,
    UnresolvablePair,
)
from lexiscope.evaluation import Setting
from lexiscope.ranker import (
    PairFeature,
    RankingModel,
    TrainConfig,
    build_training_set,
    load_model,
    logistic_loss,
    make_pair_feature,
    rank_with_model,
    save_model,
    train,
    two_fold_evaluate,
)

from util import hub_fixture, make_dataset, make_pair, make_set

LN2 = math.log(2.0)


def zero_model(dim):
    return RankingModel(w=np.zeros(dim), b=0.0)


class TestPairFeature:
    def test_signed_mean_difference(self):
        a = make_set("a", [[1.0, 0.0], [3.0, -4.0]])   # mean (2, -2)
        np.testing.assert_allclose(
            make_pair_feature(a, make_set("b", [[2.0, -2.0]])), [0.0, 0.0])
        np.testing.assert_allclose(
            make_pair_feature(a, make_set("b", [[0.0, -2.0]])), [2.0, 0.0])

    def test_antisymmetric(self):
        rng = np.random.default_rng(5)
        a = make_set("a", rng.standard_normal((3, 4)))
        b = make_set("b", rng.standard_normal((5, 4)))
        np.testing.assert_allclose(make_pair_feature(a, b),
                                   -make_pair_feature(b, a))

    def test_empty_set(self):
        from lexiscope.features import FeatureKind, ImageSet
        empty = ImageSet("e", FeatureKind.CNN, np.zeros((0, 2)))
        with pytest.raises(EmptySet):
            make_pair_feature(make_set("a", [[1.0, 0.0]]), empty)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            make_pair_feature(make_set("a", [[1.0]]), make_set("b", [[1.0, 2.0]]))

    def test_label_validation(self):
        with pytest.raises(BadConfig):
            PairFeature(source="a", target="b", x=np.zeros(2), label=0)


class TestTrainConfig:
    def test_rejects_bad_values(self):
        for kwargs in ({"learning_rate": 0.0}, {"epochs": 0}, {"l2": -1.0},
                       {"negative_ratio": 0}):
            with pytest.raises(BadConfig):
                TrainConfig(**kwargs)

    def test_none_ratio_allowed(self):
        assert TrainConfig(negative_ratio=None).negative_ratio is None


class TestBuildTrainingSet:
    def fixture(self):
        rng = np.random.default_rng(9)
        src = make_dataset("en", [(f"s{i}", "NOUN", rng.standard_normal((2, 3)))
                                  for i in range(3)])
        tgt = make_dataset("de", [(f"t{i}", "NOUN", rng.standard_normal((2, 3)))
                                  for i in range(3)])
        gold = [make_pair(f"s{i}", f"t{i}") for i in range(3)]
        return src, tgt, gold

    def test_all_negatives_kept_without_ratio(self):
        src, tgt, gold = self.fixture()
        data = build_training_set(src, tgt, gold, TrainConfig(negative_ratio=None))
        assert sum(p.label == 1 for p in data) == 3
        assert sum(p.label == -1 for p in data) == 6
        assert {(p.source, p.target) for p in data if p.label == -1} \
            == {(f"s{i}", f"t{j}") for i in range(3) for j in range(3) if i != j}

    def test_positives_follow_gold_order(self):
        src, tgt, gold = self.fixture()
        data = build_training_set(src, tgt, gold, TrainConfig(negative_ratio=None))
        positives = [p for p in data if p.label == 1]
        assert [(p.source, p.target) for p in positives] \
            == [(g.source.word, g.target.word) for g in gold]
        for p, g in zip(positives, gold):
            np.testing.assert_array_equal(
                p.x, make_pair_feature(src.sets[g.source.word],
                                       tgt.sets[g.target.word]))

    def test_ratio_caps_negatives(self):
        src, tgt, gold = self.fixture()
        data = build_training_set(src, tgt, gold, TrainConfig(negative_ratio=1))
        negatives = [(p.source, p.target) for p in data if p.label == -1]
        assert len(negatives) == 3
        assert set(negatives) <= {(f"s{i}", f"t{j}")
                                  for i in range(3) for j in range(3) if i != j}

    def test_subsampling_seeded(self):
        src, tgt, gold = self.fixture()
        runs = [build_training_set(src, tgt, gold,
                                   TrainConfig(negative_ratio=1, seed=4))
                for _ in range(2)]
        assert [(p.source, p.target) for p in runs[0]] \
            == [(p.source, p.target) for p in runs[1]]

    def test_generous_ratio_keeps_everything(self):
        src, tgt, gold = self.fixture()
        data = build_training_set(src, tgt, gold, TrainConfig(negative_ratio=10))
        assert sum(p.label == -1 for p in data) == 6

    def test_gold_pair_without_images(self):
        src, tgt, gold = self.fixture()
        gold.append(make_pair("ghost", "t0"))
        with pytest.raises(UnresolvablePair):
            build_training_set(src, tgt, gold, TrainConfig())


class TestTrain:
    def separable(self):
        return [PairFeature("a", "b", np.array([1.0]), 1),
                PairFeature("a", "c", np.array([-1.0]), -1)]

    def test_first_step_hand_computed(self):
        # from w = 0: coeff = -y/4, so w <- 0.1 * 0.5 = 0.05 and b stays 0
        cfg = TrainConfig(learning_rate=0.1, epochs=1, l2=0.0,
                          negative_ratio=None)
        model = train(self.separable(), cfg)
        np.testing.assert_allclose(model.w, [0.05])
        assert model.b == 0.0

    def test_learns_separating_direction(self):
        model = train(self.separable(), TrainConfig(epochs=200, l2=0.0))
        assert model.w[0] > 1.0

    def test_l2_shrinks_weights(self):
        free = train(self.separable(), TrainConfig(epochs=200, l2=0.0))
        tied = train(self.separable(), TrainConfig(epochs=200, l2=5.0))
        assert np.linalg.norm(tied.w) < np.linalg.norm(free.w)

    def test_bias_not_regularized(self):
        # shifted labels force a bias; strong l2 flattens w but must not
        # pull the bias back toward zero
        data = [PairFeature("a", "b", np.array([0.0]), 1),
                PairFeature("a", "c", np.array([0.0]), 1),
                PairFeature("a", "d", np.array([1.0]), 1),
                PairFeature("a", "e", np.array([1.0]), -1)]
        model = train(data, TrainConfig(epochs=500, l2=5.0))
        assert abs(model.w[0]) < 0.2
        assert model.b > 0.5

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassData):
            train([PairFeature("a", "b", np.array([1.0]), 1)], TrainConfig())

    def test_deterministic(self):
        rng = np.random.default_rng(21)
        data = [PairFeature("a", str(i), rng.standard_normal(4),
                            1 if i % 2 else -1) for i in range(10)]
        m1 = train(data, TrainConfig())
        m2 = train(data, TrainConfig())
        np.testing.assert_array_equal(m1.w, m2.w)
        assert m1.b == m2.b


class TestLogisticLoss:
    def test_zero_model_gives_ln2(self):
        data = [PairFeature("a", "b", np.array([3.0, -2.0]), 1),
                PairFeature("a", "c", np.array([0.5, 0.5]), -1)]
        assert logistic_loss(data, zero_model(2)) == pytest.approx(LN2, abs=1e-15)

    def test_hand_computed_value(self):
        data = [PairFeature("a", "b", np.array([2.0]), 1)]
        model = RankingModel(w=np.array([1.0]), b=0.5)
        expected = math.log1p(math.exp(-2.5))
        assert logistic_loss(data, model) == pytest.approx(expected, abs=1e-12)
        assert logistic_loss(data, model, l2=0.1) \
            == pytest.approx(expected + 0.05, abs=1e-12)

    def test_training_reduces_loss(self):
        rng = np.random.default_rng(2)
        data = [PairFeature("a", str(i), rng.standard_normal(3) + (2 if i % 2 else -2),
                            1 if i % 2 else -1) for i in range(20)]
        cfg = TrainConfig(epochs=50, l2=0.0)
        before = logistic_loss(data, zero_model(3))
        after = logistic_loss(data, train(data, cfg))
        assert after < before


class TestRankWithModel:
    def test_hand_scores(self):
        source = make_set("s", [[2.0, 2.0]])
        targets = make_dataset("de", [("t0", "NOUN", [[1.0, 0.0]]),
                                      ("t1", "NOUN", [[0.0, 1.0]])])
        model = RankingModel(w=np.array([1.0, 0.0]), b=0.0)
        ranked = rank_with_model(model, source, targets)
        assert ranked.method == "LOGREGR"
        assert ranked.entries == (("t1", 2.0), ("t0", 1.0))

    def test_zero_model_yields_lexicon_order(self):
        rng = np.random.default_rng(17)
        source = make_set("s", rng.standard_normal((3, 4)))
        targets = make_dataset("de", [(w, "NOUN", rng.standard_normal((3, 4)))
                                      for w in ("zeta", "alpha", "mid")])
        ranked = rank_with_model(zero_model(4), source, targets)
        assert [w for w, _ in ranked.entries] == ["zeta", "alpha", "mid"]

    def test_matches_score_oracle(self):
        rng = np.random.default_rng(29)
        source = make_set("s", rng.standard_normal((4, 5)))
        targets = make_dataset("de", [(f"t{i}", "NOUN", rng.standard_normal((3, 5)))
                                      for i in range(6)])
        model = RankingModel(w=rng.standard_normal(5), b=0.3)
        ranked = rank_with_model(model, source, targets)
        for word, score in ranked.entries:
            expected = model.w @ (source.vectors.mean(0)
                                  - targets.sets[word].vectors.mean(0)) + model.b
            assert score == pytest.approx(expected, abs=1e-12)
        scores = [s for _, s in ranked.entries]
        assert scores == sorted(scores, reverse=True)


class TestTwoFoldEvaluate:
    def test_hub_data_is_learnable(self):
        sources, targets, gold = hub_fixture()
        cfg = TrainConfig(seed=0, negative_ratio=None)
        report = two_fold_evaluate(sources, targets, gold, cfg)
        assert report.method == "LOGREGR"
        assert report.settings[Setting.ALL].p_at[1] >= 0.9

    def test_untrained_baseline_is_near_zero(self):
        # all-zero weights tie every score, so ranking degenerates to
        # lexicon order and the decoys bury the hub
        sources, targets, gold = hub_fixture()
        hits = 0
        for pair in gold:
            ranked = rank_with_model(zero_model(8),
                                     sources.sets[pair.source.word], targets)
            hits += ranked.entries[0][0] == pair.target.word
        assert hits / len(gold) <= 0.05

    def test_loss_starts_at_ln2_and_decreases(self):
        sources, targets, gold = hub_fixture()
        data = build_training_set(sources, targets, gold,
                                  TrainConfig(negative_ratio=None))
        losses = [logistic_loss(data, zero_model(8), l2=1e-4)]
        for epochs in range(1, 11):
            cfg = TrainConfig(epochs=epochs, negative_ratio=None)
            losses.append(logistic_loss(data, train(data, cfg), l2=1e-4))
        assert losses[0] == pytest.approx(LN2, abs=1e-12)
        assert all(a > b for a, b in zip(losses, losses[1:]))

    def test_seed_reproducible(self):
        sources, targets, gold = hub_fixture()
        cfg = TrainConfig(seed=3, negative_ratio=None)
        r1 = two_fold_evaluate(sources, targets, gold, cfg)
        r2 = two_fold_evaluate(sources, targets, gold, cfg)
        assert r1.settings[Setting.ALL].mrr == r2.settings[Setting.ALL].mrr
        assert r1.settings[Setting.ALL].p_at == r2.settings[Setting.ALL].p_at

    def test_too_few_pairs(self):
        sources, targets, gold = hub_fixture()
        with pytest.raises(TooFewPairs):
            two_fold_evaluate(sources, targets, gold[:1], TrainConfig())


class TestModelFile:
    def test_round_trip_exact_for_float32_values(self, tmp_path):
        model = RankingModel(w=np.array([0.5, -0.25, 1.75]), b=-2.5)
        path = tmp_path / "model.lxfv"
        save_model(model, path)
        loaded = load_model(path)
        np.testing.assert_array_equal(loaded.w, model.w)
        assert loaded.b == model.b

    def test_rejects_multi_row_file(self, tmp_path):
        from lexiscope import lxfv
        path = tmp_path / "bad.lxfv"
        lxfv.write(path, np.ones((2, 3)))
        with pytest.raises(DimensionMismatch):
            load_model(path)

    def test_rejects_weightless_file(self, tmp_path):
        from lexiscope import lxfv
        path = tmp_path / "bad.lxfv"
        lxfv.write(path, np.ones((1, 1)))
        with pytest.raises(DimensionMismatch):
            load_model(path)
