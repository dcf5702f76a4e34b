"""Deterministic numerical kernels: cosine similarity, k-means, PCA.

Vectors and matrices are plain numpy float64 arrays (rows = samples).
All kernels are pure functions: identical inputs (and seeds) give
identical outputs, with no hidden global state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DimensionTooLarge, TooFewPoints

log = logging.getLogger(__name__)

# Direct (n, k, d) distance tensors are used below this many k*d entries;
# larger problems fall back to the expanded quadratic form.
_DIRECT_DIST_LIMIT = 1_000_000
_CHUNK = 512


def as_matrix(points) -> np.ndarray:
    """Coerce to a rectangular float64 (n, d) array."""
    m = np.asarray(points, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, in [-1, 1].

    A zero vector on either side yields 0.0 by convention (degenerate
    feature vectors must not abort a ranking run).
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dims differ: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def normalize_rows(m: np.ndarray) -> np.ndarray:
    """L2-normalize each row; zero rows stay zero."""
    m = as_matrix(m)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return m / safe


def pairwise_cosine(a, b) -> np.ndarray:
    """All-pairs cosine similarities, shape (a.n, b.n).

    Rows with zero norm produce 0.0 against everything, matching
    cosine_similarity's convention.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"row dims differ: {a.shape[1]} vs {b.shape[1]}")
    sims = normalize_rows(a) @ normalize_rows(b).T
    return np.clip(sims, -1.0, 1.0)


@dataclass
class KMeansResult:
    centroids: np.ndarray          # (k, d)
    assignments: np.ndarray        # (n,) int centroid indices
    inertia: float                 # sum of squared distances to assigned centroids
    n_iter: int
    inertia_history: list[float] = field(default_factory=list)


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (n, k)."""
    n, d = points.shape
    k = centroids.shape[0]
    if k * d <= _DIRECT_DIST_LIMIT:
        out = np.empty((n, k))
        for start in range(0, n, _CHUNK):
            chunk = points[start:start + _CHUNK]
            diff = chunk[:, None, :] - centroids[None, :, :]
            out[start:start + _CHUNK] = np.einsum("ijk,ijk->ij", diff, diff)
        return out
    # expanded form for large codebooks; clip rounding artifacts
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + np.sum(centroids**2, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    idx = int(rng.integers(n))
    centroids[0] = points[idx]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[i] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centroids[i]) ** 2, axis=1))
    return centroids


def kmeans(points, k: int, seed: int, max_iters: int = 100) -> KMeansResult:
    """Lloyd's algorithm with seeded k-means++ initialization.

    Terminates when assignments stop changing or after max_iters.
    An empty cluster is repaired by reseeding its centroid to the point
    currently farthest from its assigned centroid. Deterministic given
    (points, k, seed): reruns are bit-identical.
    """
    points = as_matrix(points)
    n = points.shape[0]
    if k < 1 or n < k:
        raise TooFewPoints(f"need at least k={k} points, got {n}")
    max_iters = max(1, max_iters)

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)
    assignments = None
    history: list[float] = []

    for it in range(1, max_iters + 1):
        d2 = _sq_dists(points, centroids)
        new_assign = np.argmin(d2, axis=1)
        assigned_d2 = np.sum((points - centroids[new_assign]) ** 2, axis=1)

        counts = np.bincount(new_assign, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            # never steal from a singleton cluster, that would just move the hole
            eligible = np.where(counts[new_assign] > 1, assigned_d2, -1.0)
            far = int(np.argmax(eligible))
            counts[new_assign[far]] -= 1
            centroids[empty] = points[far]
            new_assign[far] = empty
            counts[empty] = 1
            assigned_d2[far] = 0.0

        history.append(float(assigned_d2.sum()))
        if assignments is not None and np.array_equal(assignments, new_assign):
            assignments = new_assign
            break
        assignments = new_assign
        for j in range(k):
            centroids[j] = points[assignments == j].mean(axis=0)

    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        inertia=history[-1],
        n_iter=len(history),
        inertia_history=history,
    )


@dataclass
class PcaModel:
    mean: np.ndarray                 # (d,)
    basis: np.ndarray                # (out_dim, d), orthonormal rows
    explained_variance: np.ndarray   # (out_dim,), non-increasing
    rank: int                        # numerical rank of the centered data


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude component is positive."""
    for row in basis:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return basis


def _complete_basis(basis_rows: list[np.ndarray], d: int, count: int) -> list[np.ndarray]:
    """Extend an orthonormal row set by `count` vectors via Gram-Schmidt
    against the standard basis (deterministic padding for rank-deficient data)."""
    out = []
    for j in range(d):
        if len(out) == count:
            break
        v = np.zeros(d)
        v[j] = 1.0
        for b in basis_rows + out:
            v -= np.dot(v, b) * b
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            out.append(v / norm)
    return out


def pca_fit(points, out_dim: int) -> PcaModel:
    """Principal axes of the sample covariance (divisor n-1).

    The eigenproblem is solved in the smaller of sample/feature space.
    Basis rows are ordered by non-increasing eigenvalue; each row's
    largest-magnitude component is positive. If the data rank falls
    short of out_dim the basis is padded with orthonormal directions of
    zero explained variance (reported via the rank field and a warning).
    """
    points = as_matrix(points)
    n, d = points.shape
    if n < 2:
        raise TooFewPoints(f"PCA needs at least 2 points, got {n}")
    if out_dim < 1 or out_dim > min(n, d):
        raise DimensionTooLarge(f"out_dim {out_dim} exceeds min(n={n}, dim={d})")

    mean = points.mean(axis=0)
    x = points - mean

    if d <= n:
        cov = (x.T @ x) / (n - 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        rows = [evecs[:, j].copy() for j in order]
    else:
        gram = (x @ x.T) / (n - 1)
        evals, u = np.linalg.eigh(gram)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        u = u[:, order]
        rows = []
        for j in range(len(evals)):
            v = x.T @ u[:, j]
            norm = np.linalg.norm(v)
            if norm > 0:
                rows.append(v / norm)
            else:
                rows.append(np.zeros(d))

    evals = np.maximum(evals, 0.0)
    tol = max(evals[0], 0.0) * 1e-12 if len(evals) else 0.0
    rank = int(np.sum(evals > tol))

    usable = min(out_dim, rank)
    basis_rows = rows[:usable]
    variances = list(evals[:usable])
    if usable < out_dim:
        log.warning("PCA rank %d < out_dim %d; padding basis with zero-variance directions",
                    rank, out_dim)
        basis_rows = basis_rows + _complete_basis(basis_rows, d, out_dim - usable)
        variances += [0.0] * (out_dim - usable)

    basis = _fix_signs(np.array(basis_rows))
    return PcaModel(
        mean=mean,
        basis=basis,
        explained_variance=np.array(variances),
        rank=rank,
    )


def pca_transform(model: PcaModel, v) -> np.ndarray:
    """Project a vector (or matrix of row vectors) onto the model's basis."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != model.mean.shape[0]:
        raise DimensionMismatch(
            f"input dim {v.shape[-1]} != model dim {model.mean.shape[0]}")
    return (v - model.mean) @ model.basis.T
