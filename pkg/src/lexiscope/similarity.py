"""Cross-lingual image-set similarity and unsupervised translation ranking.

Four set-similarity aggregations plus two nearest-neighbor voting
schemes. All of them compare per-image vectors with cosine similarity;
a translation candidate is a target-lexicon word that owns at least one
image vector.
"""

from __future__ import annotations

import concurrent.futures
import enum
from dataclasses import dataclass, field

import numpy as np

from .corpus import Dataset, WordEntry
from .errors import (
    DimensionMismatch,
    EmptySet,
    MalformedLine,
    SetMismatch,
    TooFewImages,
)
from .numerics import cosine_similarity, kmeans, pairwise_cosine


class SimilarityMethod(str, enum.Enum):
    AVG_MAX = "AVG_MAX"
    MAX_MAX = "MAX_MAX"
    SET_MEAN = "SET_MEAN"
    SET_MAX = "SET_MAX"


@dataclass(frozen=True)
class RankedList:
    """Candidate translations for one source word, best first.

    entries[i] is (target word, score); rank of entries[i] is i + 1.
    """
    source: str
    entries: tuple[tuple[str, float], ...]
    method: str = ""

    def __post_init__(self):
        scores = [s for _, s in self.entries]
        if any(scores[i] < scores[i + 1] for i in range(len(scores) - 1)):
            raise MalformedLine("<ranking>", 0, f"{self.source}: scores increase")

    def __len__(self):
        return len(self.entries)

    def rank_of(self, target: str) -> int | None:
        for i, (word, _) in enumerate(self.entries):
            if word == target:
                return i + 1
        return None


@dataclass(frozen=True)
class KnnConfig:
    clusters: int = 1

    def __post_init__(self):
        if self.clusters < 1:
            raise TooFewImages(f"clusters must be >= 1, got {self.clusters}")


def candidate_words(targets: Dataset) -> list[str]:
    """Target words eligible as translation candidates, in lexicon order.

    A word is eligible when it owns a nonempty image set; duplicate word
    strings (multi-POS entries) count once.
    """
    seen = set()
    words = []
    for entry in targets.lexicon:
        if entry.word in seen:
            continue
        seen.add(entry.word)
        image_set = targets.sets.get(entry.word)
        if image_set is not None and len(image_set) > 0:
            words.append(entry.word)
    return words


def _check_compatible(a, b):
    if len(a) == 0 or len(b) == 0:
        raise EmptySet(f"empty image set for {a.word!r} or {b.word!r}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.word}: dim {a.dim} vs {b.word}: dim {b.dim}")
    if a.kind != b.kind:
        raise SetMismatch(f"{a.word}: kind {a.kind} vs {b.word}: kind {b.kind}")


def set_similarity(a, b, method: SimilarityMethod) -> float:
    """Similarity of two image sets under the chosen aggregation.

    AVG_MAX averages, over images of `a`, the best cosine match in `b`;
    MAX_MAX takes the single best pair. SET_MEAN and SET_MAX first pool
    each set into one vector (component-wise mean or max), then compare.
    AVG_MAX is directional (a is the source); the other three are
    symmetric.
    """
    _check_compatible(a, b)
    method = SimilarityMethod(method)
    if method is SimilarityMethod.SET_MEAN:
        return cosine_similarity(a.vectors.mean(axis=0), b.vectors.mean(axis=0))
    if method is SimilarityMethod.SET_MAX:
        return cosine_similarity(a.vectors.max(axis=0), b.vectors.max(axis=0))
    sims = pairwise_cosine(a.vectors, b.vectors)
    if method is SimilarityMethod.AVG_MAX:
        return float(np.mean(np.max(sims, axis=1)))
    return float(np.max(sims))


def rank_translations(source_set, targets: Dataset,
                      method: SimilarityMethod) -> RankedList:
    """Score every eligible target word against the source set.

    Descending score; equal scores fall back to target lexicon order.
    """
    words = candidate_words(targets)
    if not words:
        raise EmptySet("no eligible target words")
    scores = [set_similarity(source_set, targets.sets[w], method) for w in words]
    order = sorted(range(len(words)), key=lambda i: (-scores[i], i))
    return RankedList(source=source_set.word,
                      entries=tuple((words[i], scores[i]) for i in order),
                      method=SimilarityMethod(method).value)


def _stacked_targets(targets: Dataset):
    """All candidate image vectors stacked in (lexicon, image) order."""
    words = candidate_words(targets)
    if not words:
        raise EmptySet("no eligible target words")
    blocks = [targets.sets[w].vectors for w in words]
    owners = np.repeat(np.arange(len(words)), [b.shape[0] for b in blocks])
    return words, np.concatenate(blocks, axis=0), owners


def _mean_cosine_distance(src_vectors: np.ndarray, cand_vectors: np.ndarray) -> float:
    return 1.0 - float(np.mean(pairwise_cosine(src_vectors, cand_vectors)))


def _vote_counts(src_vectors, stacked, owners, n_words) -> np.ndarray:
    sims = pairwise_cosine(src_vectors, stacked)
    # argmax returns the first maximum, i.e. the lowest (word, image) slot
    nearest = np.argmax(sims, axis=1)
    return np.bincount(owners[nearest], minlength=n_words)


def _break_ties(indices, words, src_vectors, targets) -> int:
    if len(indices) == 1:
        return int(indices[0])
    dists = [_mean_cosine_distance(src_vectors, targets.sets[words[i]].vectors)
             for i in indices]
    # argmin keeps the first (lexicon-order) word among equal distances
    return int(indices[int(np.argmin(dists))])


def _first_entry(targets: Dataset, word: str) -> WordEntry:
    return targets.lexicon.entries_for(word)[0]


def knn_translate(source_set, targets: Dataset,
                  cfg: KnnConfig = KnnConfig()) -> WordEntry:
    """Nearest-neighbor voting: each source image votes for the target
    word owning its single closest image; most votes wins.

    Vote ties go to the candidate whose images are closest to the source
    images on average (mean cosine distance over all cross pairs), then
    to lexicon order.
    """
    if len(source_set) == 0:
        raise EmptySet(f"{source_set.word}: no source images")
    words, stacked, owners = _stacked_targets(targets)
    votes = _vote_counts(source_set.vectors, stacked, owners, len(words))
    tied = np.flatnonzero(votes == votes.max())
    winner = _break_ties(tied, words, source_set.vectors, targets)
    return _first_entry(targets, words[winner])


def knn_cluster_translate(source_set, targets: Dataset, cfg: KnnConfig,
                          seed: int) -> WordEntry:
    """Cluster the source images, vote per cluster, majority of clusters.

    Each cluster runs the plain nearest-neighbor vote on its own images.
    Cluster-win ties fall back to total votes summed across clusters,
    then to the average-distance rule, then to lexicon order.
    """
    k = cfg.clusters
    if len(source_set) < k:
        raise TooFewImages(
            f"{source_set.word}: {len(source_set)} images for k={k} clusters")
    if k == 1:
        return knn_translate(source_set, targets, cfg)

    words, stacked, owners = _stacked_targets(targets)
    clustering = kmeans(source_set.vectors, k=k, seed=seed)
    cluster_wins = np.zeros(len(words), dtype=np.int64)
    total_votes = np.zeros(len(words), dtype=np.int64)
    for c in range(k):
        rows = source_set.vectors[clustering.assignments == c]
        votes = _vote_counts(rows, stacked, owners, len(words))
        total_votes += votes
        tied = np.flatnonzero(votes == votes.max())
        cluster_wins[_break_ties(tied, words, rows, targets)] += 1

    tied = np.flatnonzero(cluster_wins == cluster_wins.max())
    if len(tied) > 1:
        tied_votes = total_votes[tied]
        tied = tied[tied_votes == tied_votes.max()]
    winner = _break_ties(tied, words, source_set.vectors, targets)
    return _first_entry(targets, words[winner])


def knn_prediction_list(source_set, targets: Dataset, cfg: KnnConfig,
                        seed: int = 0) -> RankedList:
    """Single-candidate ranked list for a voting prediction.

    The score is the winner's share of source-image votes (plain KNN) or
    of clusters (clustered KNN), so files stay comparable across words.
    """
    if cfg.clusters == 1:
        chosen = knn_translate(source_set, targets, cfg)
        words, stacked, owners = _stacked_targets(targets)
        votes = _vote_counts(source_set.vectors, stacked, owners, len(words))
        share = votes[words.index(chosen.word)] / len(source_set)
        label = "KNN"
    else:
        chosen = knn_cluster_translate(source_set, targets, cfg, seed)
        clustering = kmeans(source_set.vectors, k=cfg.clusters, seed=seed)
        words, stacked, owners = _stacked_targets(targets)
        wins = 0
        for c in range(cfg.clusters):
            rows = source_set.vectors[clustering.assignments == c]
            votes = _vote_counts(rows, stacked, owners, len(words))
            tied = np.flatnonzero(votes == votes.max())
            if words[_break_ties(tied, words, rows, targets)] == chosen.word:
                wins += 1
        share = wins / cfg.clusters
        label = "KNNC"
    return RankedList(source=source_set.word,
                      entries=((chosen.word, float(share)),), method=label)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense (source word, target word) similarity table."""
    source_words: tuple[str, ...]
    target_words: tuple[str, ...]
    method: SimilarityMethod
    values: np.ndarray = field(repr=False)

    def ranked(self, source_index: int) -> RankedList:
        row = self.values[source_index]
        order = sorted(range(len(self.target_words)), key=lambda j: (-row[j], j))
        return RankedList(source=self.source_words[source_index],
                          entries=tuple((self.target_words[j], float(row[j]))
                                        for j in order),
                          method=self.method.value)


def similarity_matrix(sources: Dataset, targets: Dataset,
                      method: SimilarityMethod, threads: int = 1) -> SimilarityMatrix:
    """set_similarity for every (source word, target word) pair.

    Rows may be computed on a thread pool; each row is an independent
    pure computation written to its own output slice, so the result is
    identical for any thread count.
    """
    method = SimilarityMethod(method)
    src_words = candidate_words(sources)
    tgt_words = candidate_words(targets)
    if not src_words or not tgt_words:
        raise EmptySet("similarity matrix needs images on both sides")
    values = np.zeros((len(src_words), len(tgt_words)))

    def fill_row(i: int):
        src = sources.sets[src_words[i]]
        for j, w in enumerate(tgt_words):
            values[i, j] = set_similarity(src, targets.sets[w], method)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(len(src_words))))
    else:
        for i in range(len(src_words)):
            fill_row(i)
    return SimilarityMatrix(source_words=tuple(src_words),
                            target_words=tuple(tgt_words),
                            method=method, values=values)


def write_ranked_lists(lists, path):
    """TSV serialization: source, 1-based rank, target, 9-decimal score."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rl in lists:
            for rank, (target, score) in enumerate(rl.entries, start=1):
                fh.write(f"{rl.source}\t{rank}\t{target}\t{score:.9f}\n")


def read_ranked_lists(path) -> list[RankedList]:
    """Inverse of write_ranked_lists; ranks must restart at 1 per source."""
    lists: list[RankedList] = []
    current: str | None = None
    entries: list[tuple[str, float]] = []

    def flush():
        if current is not None:
            lists.append(RankedList(source=current, entries=tuple(entries)))

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise MalformedLine(path, lineno, f"expected 4 columns, got {len(parts)}")
            source, rank_text, target, score_text = parts
            try:
                rank, score = int(rank_text), float(score_text)
            except ValueError:
                raise MalformedLine(path, lineno, "bad rank or score") from None
            if source != current:
                flush()
                current, entries = source, []
            if rank != len(entries) + 1:
                raise MalformedLine(path, lineno,
                                    f"rank {rank} out of order for {source!r}")
            entries.append((target, score))
    flush()
    return lists
