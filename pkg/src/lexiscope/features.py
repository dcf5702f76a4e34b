"""Per-image feature vectors and their assembly into image sets.

Feature kinds follow the experiment's vocabulary: COLOR and BOVW are
computed natively from pixels, CNN and TEX are imported from files
produced elsewhere, COMBI/VISPCA/COMBIPCA are derived combinations.
"""

from __future__ import annotations

import enum
import os
import urllib.parse
from dataclasses import dataclass

import numpy as np

from . import lxfv
from .corpus import Dataset, ImageManifest, load_manifests, load_word_list
from .errors import (
    BadBinCount,
    CountMismatch,
    DimensionMismatch,
    DuplicateEntry,
    ImageTooSmall,
    MalformedLine,
    NonFiniteValue,
    OovWord,
    SetMismatch,
    TooFewDescriptors,
    UnknownWord,
)
from .images import Image, grayscale
from .numerics import as_matrix, kmeans, normalize_rows, pca_fit, pca_transform

DESCRIPTOR_DIM = 128  # 4x4 cells x 8 orientation bins
DEFAULT_BINS_PER_CHANNEL = 16
DEFAULT_CODEBOOK_SIZE = 256
DEFAULT_PCA_DIM = 40


class FeatureKind(str, enum.Enum):
    COLOR = "COLOR"
    BOVW = "BOVW"
    CNN = "CNN"
    TEX = "TEX"
    COMBI = "COMBI"
    VISPCA = "VISPCA"
    COMBIPCA = "COMBIPCA"


@dataclass(frozen=True)
class ImageSet:
    word: str
    kind: FeatureKind
    vectors: np.ndarray  # (n_images, dim) float64, manifest order

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise DimensionMismatch(
                f"{self.word}: image set must be 2-D, got shape {self.vectors.shape}")
        if not np.all(np.isfinite(self.vectors)):
            raise NonFiniteValue(f"{self.word}: non-finite feature values")

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def take_rows(self, indices) -> "ImageSet":
        return ImageSet(word=self.word, kind=self.kind,
                        vectors=self.vectors[list(indices)].copy())


@dataclass(frozen=True)
class Codebook:
    centroids: np.ndarray  # (k, descriptor_dim)

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def descriptor_dim(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True)
class EmbeddingTable:
    language: str
    vectors: dict[str, np.ndarray]
    dim: int

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[word]


def _l1_histogram(values: np.ndarray, bins: int, width: int) -> np.ndarray:
    counts = np.bincount(values.ravel() // width, minlength=bins).astype(np.float64)
    total = counts.sum()
    return counts / total if total > 0 else counts


def color_histogram(img: Image, bins_per_channel: int = DEFAULT_BINS_PER_CHANNEL) -> np.ndarray:
    """Concatenated R, G, B and grayscale histograms, each L1-normalized.

    Output dim is 4 * bins_per_channel; bins_per_channel must divide 256.
    """
    if bins_per_channel < 2 or 256 % bins_per_channel != 0:
        raise BadBinCount(f"bins_per_channel must be >= 2 and divide 256, got {bins_per_channel}")
    width = 256 // bins_per_channel
    channels = [img.pixels[:, :, c] for c in range(3)] + [grayscale(img)]
    return np.concatenate([_l1_histogram(ch, bins_per_channel, width) for ch in channels])


def extract_descriptors(img: Image, patch_size: int = 16, stride: int = 8) -> np.ndarray:
    """Dense grid of gradient-orientation patch descriptors.

    Each patch is split into 4x4 cells; gradient magnitudes accumulate
    into 8 orientation bins per cell (128-d), then the descriptor is
    L2-normalized. Gradients are central differences on the luma plane.
    """
    if patch_size < 4:
        raise ImageTooSmall(f"patch_size must be >= 4, got {patch_size}")
    if stride < 1:
        raise ImageTooSmall(f"stride must be >= 1, got {stride}")
    if patch_size > min(img.width, img.height):
        raise ImageTooSmall(
            f"patch {patch_size} exceeds image {img.width}x{img.height}")

    gray = grayscale(img).astype(np.float64)
    gy, gx = np.gradient(gray)
    magnitude = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), 2.0 * np.pi)
    orient = np.minimum((theta / (2.0 * np.pi) * 8.0).astype(np.int64), 7)

    cell_edges = [(patch_size * i) // 4 for i in range(5)]
    descriptors = []
    for top in range(0, img.height - patch_size + 1, stride):
        for left in range(0, img.width - patch_size + 1, stride):
            desc = np.zeros((4, 4, 8))
            for cr in range(4):
                for cc in range(4):
                    r0, r1 = top + cell_edges[cr], top + cell_edges[cr + 1]
                    c0, c1 = left + cell_edges[cc], left + cell_edges[cc + 1]
                    mags = magnitude[r0:r1, c0:c1].ravel()
                    bins = orient[r0:r1, c0:c1].ravel()
                    desc[cr, cc] = np.bincount(bins, weights=mags, minlength=8)
            flat = desc.ravel()
            norm = np.linalg.norm(flat)
            descriptors.append(flat / norm if norm > 0 else flat)
    return np.array(descriptors).reshape(-1, DESCRIPTOR_DIM)


def sample_rows(matrix, count: int, seed: int) -> np.ndarray:
    """Seeded uniform sample of rows without replacement (all rows if count >= n)."""
    matrix = as_matrix(matrix)
    n = matrix.shape[0]
    if count >= n:
        return matrix.copy()
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=count, replace=False)
    return matrix[np.sort(idx)].copy()


def build_codebook(descriptor_sample, k: int, seed: int) -> Codebook:
    sample = as_matrix(descriptor_sample)
    if sample.shape[0] < k:
        raise TooFewDescriptors(
            f"need at least k={k} descriptors to build a codebook, got {sample.shape[0]}")
    result = kmeans(sample, k=k, seed=seed)
    return Codebook(centroids=result.centroids)


def bovw_encode(descriptors, codebook: Codebook) -> np.ndarray:
    """Nearest-centroid count histogram over the codebook, L1-normalized.

    Ties go to the lowest centroid index; zero descriptors encode to the
    zero vector (cosine then treats the image as similarity 0).
    """
    descriptors = np.asarray(descriptors, dtype=np.float64)
    if descriptors.size == 0:
        return np.zeros(codebook.size)
    descriptors = as_matrix(descriptors)
    if descriptors.shape[1] != codebook.descriptor_dim:
        raise DimensionMismatch(
            f"descriptor dim {descriptors.shape[1]} != codebook dim {codebook.descriptor_dim}")
    d2 = (
        np.sum(descriptors**2, axis=1)[:, None]
        - 2.0 * descriptors @ codebook.centroids.T
        + np.sum(codebook.centroids**2, axis=1)[None, :]
    )
    nearest = np.argmin(d2, axis=1)
    counts = np.bincount(nearest, minlength=codebook.size).astype(np.float64)
    return counts / counts.sum()


def attach_text_embedding(manifest: ImageManifest, table: EmbeddingTable) -> ImageSet:
    """Image set where every image carries the word's text embedding."""
    if manifest.word not in table:
        raise OovWord(f"{manifest.word!r} missing from the {table.language} embedding table")
    row = table[manifest.word]
    vectors = np.tile(row, (len(manifest), 1))
    return ImageSet(word=manifest.word, kind=FeatureKind.TEX, vectors=vectors)


def _concat_sets(vis: ImageSet, tex: ImageSet, kind: FeatureKind,
                 l2_normalize: bool) -> ImageSet:
    if vis.word != tex.word:
        raise SetMismatch(f"words differ: {vis.word!r} vs {tex.word!r}")
    if len(vis) != len(tex):
        raise SetMismatch(
            f"{vis.word}: image counts differ ({len(vis)} vs {len(tex)})")
    left, right = vis.vectors, tex.vectors
    if l2_normalize:
        left, right = normalize_rows(left), normalize_rows(right)
    return ImageSet(word=vis.word, kind=kind,
                    vectors=np.concatenate([left, right], axis=1))


def combine(vis: ImageSet, tex: ImageSet, l2_normalize: bool = False) -> ImageSet:
    """Row-wise concatenation of visual and text representations."""
    return _concat_sets(vis, tex, FeatureKind.COMBI, l2_normalize)


def combine_pca(vispca: ImageSet, tex: ImageSet, l2_normalize: bool = False) -> ImageSet:
    """As combine(), for PCA-reduced visual vectors."""
    return _concat_sets(vispca, tex, FeatureKind.COMBIPCA, l2_normalize)


def reduce_sets(source: Dataset, target: Dataset,
                out_dim: int = DEFAULT_PCA_DIM) -> tuple[Dataset, Dataset]:
    """PCA-reduce both languages' image vectors into one joint space.

    A single model is fitted on the union of all image vectors of both
    datasets (stacked in lexicon order for determinism), then applied to
    every image. Output sets carry kind VISPCA.
    """
    def ordered_words(ds: Dataset) -> list[str]:
        order = ds.lexicon.word_order()
        return sorted(ds.sets, key=lambda w: (order.get(w, len(order)), w))

    blocks = [source.sets[w].vectors for w in ordered_words(source) if len(source.sets[w])]
    blocks += [target.sets[w].vectors for w in ordered_words(target) if len(target.sets[w])]
    if not blocks:
        raise SetMismatch("no image vectors to fit the reduction on")
    model = pca_fit(np.concatenate(blocks, axis=0), out_dim)

    def project(ds: Dataset) -> Dataset:
        sets = {
            w: ImageSet(word=w, kind=FeatureKind.VISPCA,
                        vectors=pca_transform(model, s.vectors).reshape(len(s), out_dim))
            for w, s in ds.sets.items()
        }
        return Dataset(lexicon=ds.lexicon, manifests=dict(ds.manifests), sets=sets)

    return project(source), project(target)


def import_feature_file(path, manifest: ImageManifest,
                        kind: FeatureKind = FeatureKind.CNN) -> ImageSet:
    """Bind an LXFV file's rows to a manifest's images, in manifest order."""
    vectors = lxfv.read(path)
    if vectors.shape[0] != len(manifest):
        raise CountMismatch(
            f"{path}: {vectors.shape[0]} rows for {len(manifest)} manifest images "
            f"of {manifest.word!r}")
    return ImageSet(word=manifest.word, kind=kind, vectors=vectors)


def word_filename(word: str, suffix: str = ".lxfv") -> str:
    """Filesystem-safe, reversible file name for a word."""
    return urllib.parse.quote(word, safe="") + suffix


def load_feature_dataset(words_path, language: str, manifest_path, features_dir,
                         kind: FeatureKind, missing: str = "error") -> Dataset:
    """Assemble a Dataset from a word list, a manifest and per-word
    feature files named word_filename(word) under features_dir.

    missing="skip" leaves words whose feature file does not exist out of
    the set map (manifest entries stay), instead of failing; such words
    can then be counted as vocabulary misses downstream.
    """
    lexicon = load_word_list(words_path, language)
    known = {e.word for e in lexicon}
    manifests = load_manifests(manifest_path)
    sets = {}
    for word, manifest in manifests.items():
        if word not in known:
            raise UnknownWord(f"{manifest_path}: {word!r} not in the word list")
        path = os.path.join(features_dir, word_filename(word))
        if missing == "skip" and not os.path.exists(path):
            continue
        sets[word] = import_feature_file(path, manifest, kind)
    dataset = Dataset(lexicon=lexicon, manifests=manifests, sets=sets)
    return dataset.validate()


def load_embedding_table(path, language: str) -> EmbeddingTable:
    """Parse `word v1 ... vd` lines into an embedding table."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) < 2:
                raise MalformedLine(path, lineno, "expected word followed by values")
            word = parts[0]
            if word in vectors:
                raise DuplicateEntry(f"{path}:{lineno}: duplicate embedding for {word!r}")
            try:
                row = np.array([float(v) for v in parts[1:]])
            except ValueError:
                raise MalformedLine(path, lineno, "non-numeric embedding value") from None
            if not np.all(np.isfinite(row)):
                raise NonFiniteValue(f"{path}:{lineno}: non-finite embedding value")
            if dim is None:
                dim = row.shape[0]
            elif row.shape[0] != dim:
                raise MalformedLine(
                    path, lineno, f"dim {row.shape[0]} differs from table dim {dim}")
            vectors[word] = row
    return EmbeddingTable(language=language, vectors=vectors, dim=dim or 0)


def write_embedding_table(table: EmbeddingTable, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, row in table.vectors.items():
            values = " ".join(format(v, ".17g") for v in row)
            fh.write(f"{word} {values}\n")
