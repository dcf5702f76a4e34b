"""Synthetic bilingual image-feature corpora with controllable dispersion.

Each word is a latent concept vector; its images are the concept plus
isotropic Gaussian noise, so per-POS noise levels directly control the
per-POS image dispersion. The target language sees a shifted copy of
every concept, modeling imperfect cross-lingual visual overlap.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import lxfv
from .corpus import (
    POS_TAGS,
    Dataset,
    ImageManifest,
    Lexicon,
    TranslationPair,
    WordEntry,
    content_hash,
    write_manifests,
    write_translation_pairs,
    write_word_list,
)
from .errors import BadConfig
from .features import FeatureKind, ImageSet, word_filename

_POS_PREFIX = {"NOUN": "nn", "VERB": "vb", "ADJ": "adj"}


@dataclass(frozen=True)
class SynthConfig:
    num_words: dict[str, int] = field(
        default_factory=lambda: {"NOUN": 10, "VERB": 5, "ADJ": 5})
    noise_sigma: dict[str, float] = field(
        default_factory=lambda: {"NOUN": 0.1, "VERB": 0.1, "ADJ": 0.1})
    images_per_word: int = 50
    dim: int = 64
    cross_lingual_shift: float = 0.0
    concept_dim: int | None = None  # None picks max(2, dim // 8)
    seed: int = 0
    source_language: str = "en"
    target_language: str = "de"

    def __post_init__(self):
        for pos, count in self.num_words.items():
            if pos not in POS_TAGS:
                raise BadConfig(f"unknown POS {pos!r}")
            if count < 1:
                raise BadConfig(f"{pos}: word count must be >= 1, got {count}")
        if not self.num_words:
            raise BadConfig("num_words is empty")
        for pos in self.num_words:
            sigma = self.noise_sigma.get(pos)
            if sigma is None:
                raise BadConfig(f"no noise_sigma for {pos}")
            if sigma < 0:
                raise BadConfig(f"{pos}: noise_sigma must be >= 0, got {sigma}")
        if not 1 <= self.images_per_word <= 50:
            raise BadConfig(
                f"images_per_word must be in [1, 50], got {self.images_per_word}")
        if self.dim < 1:
            raise BadConfig(f"dim must be >= 1, got {self.dim}")
        if self.cross_lingual_shift < 0:
            raise BadConfig(f"cross_lingual_shift must be >= 0, "
                            f"got {self.cross_lingual_shift}")
        if self.concept_dim is not None and not 1 <= self.concept_dim <= self.dim:
            raise BadConfig(f"concept_dim must be in [1, dim], got {self.concept_dim}")

    def effective_concept_dim(self) -> int:
        if self.concept_dim is not None:
            return self.concept_dim
        return min(self.dim, max(2, self.dim // 8))


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        v = np.zeros(dim)
        v[0] = 1.0
        return v
    return v / norm


def _word_vectors(cfg: SynthConfig, index: int, sigma: float):
    """All randomness for one word, drawn from its own child stream so
    per-word generation order (or parallelism) cannot change results."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index]))
    cdim = cfg.effective_concept_dim()
    concept = np.zeros(cfg.dim)
    concept[:cdim] = _unit(rng, cdim)
    shift = cfg.cross_lingual_shift * _unit(rng, cfg.dim)
    n = cfg.images_per_word
    src = concept + sigma * rng.standard_normal((n, cfg.dim))
    tgt = (concept + shift) + sigma * rng.standard_normal((n, cfg.dim))
    return src, tgt


def _attach(word: str, vectors: np.ndarray):
    ids = tuple(f"{word}_{j:03d}" for j in range(vectors.shape[0]))
    hashes = tuple(content_hash(row.tobytes()) for row in vectors)
    manifest = ImageManifest(word=word, image_ids=ids, content_hashes=hashes)
    return manifest, ImageSet(word=word, kind=FeatureKind.CNN, vectors=vectors)


def generate(cfg: SynthConfig):
    """Build (source Dataset, target Dataset, gold pairs) for a config.

    Word i of POS p is named like nn003_en / nn003_de; the two sides of
    a gold pair share the concept vector up to cross_lingual_shift.
    """
    src_entries, tgt_entries = [], []
    src_manifests, tgt_manifests = {}, {}
    src_sets, tgt_sets = {}, {}
    gold = []
    index = 0
    for pos in POS_TAGS:
        for i in range(cfg.num_words.get(pos, 0)):
            stem = f"{_POS_PREFIX[pos]}{i:03d}"
            src_word = f"{stem}_{cfg.source_language}"
            tgt_word = f"{stem}_{cfg.target_language}"
            src_vecs, tgt_vecs = _word_vectors(cfg, index, cfg.noise_sigma[pos])
            src_manifests[src_word], src_sets[src_word] = _attach(src_word, src_vecs)
            tgt_manifests[tgt_word], tgt_sets[tgt_word] = _attach(tgt_word, tgt_vecs)
            src_entry = WordEntry(word=src_word, pos=pos, language=cfg.source_language)
            tgt_entry = WordEntry(word=tgt_word, pos=pos, language=cfg.target_language)
            src_entries.append(src_entry)
            tgt_entries.append(tgt_entry)
            gold.append(TranslationPair(source=src_entry, target=tgt_entry))
            index += 1
    source = Dataset(
        lexicon=Lexicon(language=cfg.source_language, entries=tuple(src_entries)),
        manifests=src_manifests, sets=src_sets).validate()
    target = Dataset(
        lexicon=Lexicon(language=cfg.target_language, entries=tuple(tgt_entries)),
        manifests=tgt_manifests, sets=tgt_sets).validate()
    return source, target, gold


def paper_pos_config(seed: int = 0, dim: int = 64,
                     images_per_word: int = 20) -> SynthConfig:
    """Preset with noun sets much tighter than verb/adjective sets, the
    dispersion regime reported for real search-engine image data."""
    return SynthConfig(
        num_words={"NOUN": 12, "VERB": 8, "ADJ": 8},
        noise_sigma={"NOUN": 0.1, "VERB": 0.8, "ADJ": 0.8},
        images_per_word=images_per_word,
        dim=dim,
        cross_lingual_shift=0.05,
        seed=seed)


def write_dataset(source: Dataset, target: Dataset, gold, out_dir):
    """Write the standard corpus files for both languages under out_dir.

    Layout: {source,target}_words.tsv, pairs.tsv,
    {source,target}_manifest.tsv, {source,target}_feats/<word>.lxfv.
    """
    os.makedirs(out_dir, exist_ok=True)
    write_word_list(source.lexicon, os.path.join(out_dir, "source_words.tsv"))
    write_word_list(target.lexicon, os.path.join(out_dir, "target_words.tsv"))
    write_translation_pairs(gold, os.path.join(out_dir, "pairs.tsv"))
    write_manifests(source.manifests, os.path.join(out_dir, "source_manifest.tsv"))
    write_manifests(target.manifests, os.path.join(out_dir, "target_manifest.tsv"))
    for side, dataset in (("source", source), ("target", target)):
        feats_dir = os.path.join(out_dir, f"{side}_feats")
        os.makedirs(feats_dir, exist_ok=True)
        for word, image_set in dataset.sets.items():
            lxfv.write(os.path.join(feats_dir, word_filename(word)),
                       image_set.vectors)
