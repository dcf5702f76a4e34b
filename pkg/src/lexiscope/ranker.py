"""Supervised translation ranking.

A logistic-regression model is trained on signed difference vectors
between the mean image representations of source and target words;
candidates are then ranked by raw distance to the decision hyperplane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lxfv
from .corpus import Dataset, Lexicon, TranslationPair
from .errors import (
    BadConfig,
    DimensionMismatch,
    EmptySet,
    NonFiniteValue,
    SingleClassData,
    TooFewPairs,
    UnresolvablePair,
)
from .evaluation import EvalReport, average_reports, per_setting_report
from .similarity import RankedList, candidate_words

METHOD_LABEL = "LOGREGR"


@dataclass(frozen=True)
class PairFeature:
    source: str
    target: str
    x: np.ndarray
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise BadConfig(f"label must be +1 or -1, got {self.label}")


@dataclass(frozen=True)
class RankingModel:
    w: np.ndarray
    b: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.w)) and np.isfinite(self.b)):
            raise NonFiniteValue("model parameters must be finite")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4
    negative_ratio: int | None = 10  # None keeps every negative pair
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise BadConfig(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise BadConfig(f"epochs must be >= 1, got {self.epochs}")
        if self.l2 < 0:
            raise BadConfig(f"l2 must be >= 0, got {self.l2}")
        if self.negative_ratio is not None and self.negative_ratio < 1:
            raise BadConfig(f"negative_ratio must be >= 1 or None, "
                            f"got {self.negative_ratio}")


def make_pair_feature(a, b) -> np.ndarray:
    """Signed difference of set means, source minus target."""
    if len(a) == 0 or len(b) == 0:
        raise EmptySet(f"empty image set for {a.word!r} or {b.word!r}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.word}: dim {a.dim} vs {b.word}: dim {b.dim}")
    return a.vectors.mean(axis=0) - b.vectors.mean(axis=0)


def build_training_set(sources: Dataset, targets: Dataset,
                       gold: list[TranslationPair],
                       cfg: TrainConfig) -> list[PairFeature]:
    """One positive per gold pair; every other (source, target) word pair
    is a negative, optionally subsampled to negative_ratio per positive.
    """
    src_words = candidate_words(sources)
    tgt_words = candidate_words(targets)
    gold_keys = set()
    for pair in gold:
        if pair.source.word not in sources.sets or pair.target.word not in targets.sets:
            raise UnresolvablePair(
                f"no image set for {pair.source.word!r} -> {pair.target.word!r}")
        gold_keys.add((pair.source.word, pair.target.word))

    def diff(s: str, t: str) -> np.ndarray:
        return make_pair_feature(sources.sets[s], targets.sets[t])

    positives = [PairFeature(source=p.source.word, target=p.target.word,
                             x=diff(p.source.word, p.target.word), label=1)
                 for p in gold]
    negative_keys = [(s, t) for s in src_words for t in tgt_words
                     if (s, t) not in gold_keys]
    if cfg.negative_ratio is not None:
        budget = cfg.negative_ratio * len(positives)
        if budget < len(negative_keys):
            rng = np.random.default_rng(cfg.seed)
            picked = rng.choice(len(negative_keys), size=budget, replace=False)
            negative_keys = [negative_keys[i] for i in np.sort(picked)]
    negatives = [PairFeature(source=s, target=t, x=diff(s, t), label=-1)
                 for s, t in negative_keys]
    return positives + negatives


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def train(data: list[PairFeature], cfg: TrainConfig) -> RankingModel:
    """Full-batch gradient descent on mean logistic loss + (l2/2)|w|^2,
    starting from w = 0, b = 0. The bias is not regularized.
    """
    labels = {p.label for p in data}
    if labels != {-1, 1}:
        raise SingleClassData(f"training data has labels {sorted(labels)}")
    X = np.stack([p.x for p in data])
    y = np.array([p.label for p in data], dtype=np.float64)
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(cfg.epochs):
        margin = y * (X @ w + b)
        coeff = -y * _sigmoid(-margin) / n
        w -= cfg.learning_rate * (X.T @ coeff + cfg.l2 * w)
        b -= cfg.learning_rate * float(coeff.sum())
    return RankingModel(w=w, b=b)


def logistic_loss(data: list[PairFeature], model: RankingModel,
                  l2: float = 0.0) -> float:
    X = np.stack([p.x for p in data])
    y = np.array([p.label for p in data], dtype=np.float64)
    margin = y * (X @ model.w + model.b)
    return float(np.mean(np.logaddexp(0.0, -margin))
                 + 0.5 * l2 * float(model.w @ model.w))


def rank_with_model(model: RankingModel, source_set, targets: Dataset) -> RankedList:
    """Candidates sorted by w . (mean_source - mean_target) + b, descending;
    equal scores fall back to target lexicon order.
    """
    words = candidate_words(targets)
    if not words:
        raise EmptySet("no eligible target words")
    scores = [float(model.w @ make_pair_feature(source_set, targets.sets[w]) + model.b)
              for w in words]
    order = sorted(range(len(words)), key=lambda i: (-scores[i], i))
    return RankedList(source=source_set.word,
                      entries=tuple((words[i], scores[i]) for i in order),
                      method=METHOD_LABEL)


def _restrict(dataset: Dataset, words: set[str]) -> Dataset:
    entries = tuple(e for e in dataset.lexicon.entries if e.word in words)
    return Dataset(
        lexicon=Lexicon(language=dataset.lexicon.language, entries=entries),
        manifests={w: m for w, m in dataset.manifests.items() if w in words},
        sets={w: s for w, s in dataset.sets.items() if w in words})


def two_fold_evaluate(sources: Dataset, targets: Dataset,
                      gold: list[TranslationPair], cfg: TrainConfig) -> EvalReport:
    """Split gold pairs in two, train on each half, test on the other.

    At test time the candidate pool is restricted to the test fold's
    target words, so scores are comparable to a half-sized lexicon only.
    Fold metrics are averaged unweighted.
    """
    from .corpus import split_two_folds

    if len(gold) < 2:
        raise TooFewPairs(f"two-fold evaluation needs >= 2 gold pairs, got {len(gold)}")
    fold_a, fold_b = split_two_folds(gold, cfg.seed)
    reports = []
    for train_fold, test_fold in ((fold_a, fold_b), (fold_b, fold_a)):
        train_sources = _restrict(sources, {p.source.word for p in train_fold})
        train_targets = _restrict(targets, {p.target.word for p in train_fold})
        model = train(build_training_set(train_sources, train_targets,
                                         train_fold, cfg), cfg)
        test_targets = _restrict(targets, {p.target.word for p in test_fold})
        rankings = [rank_with_model(model, sources.sets[p.source.word], test_targets)
                    for p in test_fold]
        reports.append(per_setting_report(rankings, test_fold, method=METHOD_LABEL))
    return average_reports(reports[0], reports[1])


def save_model(model: RankingModel, path):
    """Single-row feature file: the weight vector followed by the bias."""
    row = np.concatenate([model.w, [model.b]])
    lxfv.write(path, row.reshape(1, -1))


def load_model(path) -> RankingModel:
    row = lxfv.read(path)
    if row.shape[0] != 1 or row.shape[1] < 2:
        raise DimensionMismatch(
            f"{path}: model file must hold one row of >= 2 values, "
            f"got shape {row.shape}")
    return RankingModel(w=row[0, :-1].copy(), b=float(row[0, -1]))
