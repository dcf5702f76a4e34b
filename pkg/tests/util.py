"""Shared builders for test fixtures."""

import numpy as np

from lexiscope.corpus import Dataset, Lexicon, TranslationPair, WordEntry
from lexiscope.features import FeatureKind, ImageSet


def make_set(word, rows, kind=FeatureKind.CNN) -> ImageSet:
    return ImageSet(word=word, kind=kind,
                    vectors=np.asarray(rows, dtype=np.float64).reshape(len(rows), -1))


def make_dataset(language, words, kind=FeatureKind.CNN) -> Dataset:
    """words: list of (word, pos, rows). Rows may be empty."""
    entries = tuple(WordEntry(word=w, pos=p, language=language) for w, p, _ in words)
    sets = {w: make_set(w, rows, kind) for w, p, rows in words}
    return Dataset(lexicon=Lexicon(language=language, entries=entries), sets=sets)


def make_pair(src_word, tgt_word, pos="NOUN", src_lang="en", tgt_lang="de"):
    return TranslationPair(
        source=WordEntry(word=src_word, pos=pos, language=src_lang),
        target=WordEntry(word=tgt_word, pos=pos, language=tgt_lang))


def random_bilingual(seed, n_words=4, n_images=3, dim=5, pos="NOUN"):
    """Random source/target datasets with identity gold pairing."""
    rng = np.random.default_rng(seed)
    src_words, tgt_words, gold = [], [], []
    for i in range(n_words):
        s, t = f"s{i:02d}", f"t{i:02d}"
        src_words.append((s, pos, rng.standard_normal((n_images, dim))))
        tgt_words.append((t, pos, rng.standard_normal((n_images, dim))))
        gold.append(make_pair(s, t, pos))
    return (make_dataset("en", src_words), make_dataset("de", tgt_words), gold)


HUB_DIM = 8


def _hub_mean(e1, noise_seed):
    """Mean vector with a controlled first coordinate and tiny noise."""
    rng = np.random.default_rng(noise_seed)
    v = np.zeros(HUB_DIM)
    v[0] = e1
    v[1:] = 0.05 * rng.standard_normal(HUB_DIM - 1)
    return v


def _hub_rows(mean):
    """Three images whose jitter sums to zero, so the set mean is exact."""
    jitter = np.zeros((3, HUB_DIM))
    jitter[0, 1] = 0.02
    jitter[1, 1] = -0.02
    return mean[None, :] + jitter


def hub_fixture():
    """Bilingual data where a trained ranker beats the untrained one.

    38 noun sources all translate to one shared hub target whose first
    coordinate sits well below theirs, while two verb sources map to
    their own decoy targets. The decoys precede the hub in lexicon
    order, so an all-zero model (which ties every score) ranks the hub
    last and almost never scores a hit, whereas a trained separator in
    the first coordinate recovers every noun pair.
    """
    tgt_items = [("dec_a", "VERB", _hub_rows(_hub_mean(1.0, 1))),
                 ("dec_b", "VERB", _hub_rows(_hub_mean(1.0, 2))),
                 ("hub", "NOUN", _hub_rows(_hub_mean(0.0, 3)))]
    src_items, gold = [], []
    for i, e1 in enumerate(np.linspace(2.6, 3.4, 38)):
        word = f"src{i:02d}"
        src_items.append((word, "NOUN", _hub_rows(_hub_mean(e1, 100 + i))))
        gold.append(make_pair(word, "hub", "NOUN"))
    for word, decoy, seed in (("vsrc_a", "dec_a", 200), ("vsrc_b", "dec_b", 201)):
        src_items.append((word, "VERB", _hub_rows(_hub_mean(3.0, seed))))
        gold.append(make_pair(word, decoy, "VERB"))
    return make_dataset("en", src_items), make_dataset("de", tgt_items), gold
