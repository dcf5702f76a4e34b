"""Bilingual corpus handling: word lists, gold translation pairs, image
manifests, cross-lingual deduplication, and the two-fold split.

File formats (all UTF-8, LF endings):
  word list   word<TAB>POS
  pairs       source_word<TAB>target_word
  manifest    word<TAB>image_id<TAB>hex_digest   (grouped by word)

All loaded values are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateEntry,
    DuplicateSource,
    MalformedLine,
    PosMismatch,
    TooFewPairs,
    UnknownPos,
    UnknownWord,
)

POS_TAGS = ("NOUN", "VERB", "ADJ")
MAX_IMAGES_PER_WORD = 50
SHARED_IMAGE_LIMIT = 10  # pairs sharing more than this many images are dropped


def normalize_word(raw: str) -> str:
    """Lowercase, trim, and NFC-normalize a word."""
    return unicodedata.normalize("NFC", raw.strip().lower())


@dataclass(frozen=True)
class WordEntry:
    word: str
    pos: str
    language: str

    def __post_init__(self):
        if not self.word:
            raise MalformedLine("<entry>", 0, "empty word")
        if "\t" in self.word or "\n" in self.word:
            raise MalformedLine("<entry>", 0, f"word contains tab/newline: {self.word!r}")
        if self.pos not in POS_TAGS:
            raise UnknownPos(f"unknown POS {self.pos!r} (expected one of {POS_TAGS})")
        if not (len(self.language) == 2 and self.language.isalpha() and self.language.islower()):
            raise MalformedLine("<entry>", 0, f"bad language code {self.language!r}")


@dataclass(frozen=True)
class Lexicon:
    language: str
    entries: tuple[WordEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.word, e.pos)
            if key in seen:
                raise DuplicateEntry(f"duplicate entry {key} in {self.language} lexicon")
            seen.add(key)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def entries_for(self, word: str) -> list[WordEntry]:
        """All entries carrying this word string, in file order."""
        return [e for e in self.entries if e.word == word]

    def word_order(self) -> dict[str, int]:
        """First-occurrence index of each word string (tie-break anchor)."""
        order: dict[str, int] = {}
        for i, e in enumerate(self.entries):
            order.setdefault(e.word, i)
        return order

    def entry_order(self) -> dict[WordEntry, int]:
        return {e: i for i, e in enumerate(self.entries)}


@dataclass(frozen=True)
class TranslationPair:
    source: WordEntry
    target: WordEntry

    def __post_init__(self):
        if self.source.pos != self.target.pos:
            raise PosMismatch(
                f"{self.source.word}/{self.source.pos} vs {self.target.word}/{self.target.pos}")
        if self.source.language == self.target.language:
            raise MalformedLine("<pair>", 0, "source and target share a language")


@dataclass(frozen=True)
class ImageManifest:
    word: str
    image_ids: tuple[str, ...]
    content_hashes: tuple[str, ...]

    def __post_init__(self):
        if len(self.image_ids) != len(self.content_hashes):
            raise MalformedLine("<manifest>", 0,
                                f"{self.word}: {len(self.image_ids)} ids vs "
                                f"{len(self.content_hashes)} hashes")
        if len(self.image_ids) > MAX_IMAGES_PER_WORD:
            raise MalformedLine("<manifest>", 0,
                                f"{self.word}: more than {MAX_IMAGES_PER_WORD} images")
        if len(set(self.image_ids)) != len(self.image_ids):
            raise DuplicateEntry(f"{self.word}: duplicate image ids")

    def __len__(self):
        return len(self.image_ids)


@dataclass
class Dataset:
    """One language's lexicon plus (optionally featurized) image sets."""
    lexicon: Lexicon
    manifests: dict[str, ImageManifest] = field(default_factory=dict)
    sets: dict[str, "ImageSet"] = field(default_factory=dict)  # noqa: F821

    def validate(self):
        kinds = {s.kind for s in self.sets.values()}
        if len(kinds) > 1:
            raise MalformedLine("<dataset>", 0, f"mixed feature kinds: {sorted(kinds)}")
        dims = {s.vectors.shape[1] for s in self.sets.values() if s.vectors.size}
        if len(dims) > 1:
            raise MalformedLine("<dataset>", 0, f"mixed feature dims: {sorted(dims)}")
        for word, image_set in self.sets.items():
            manifest = self.manifests.get(word)
            if manifest is not None and len(manifest) != image_set.vectors.shape[0]:
                raise MalformedLine(
                    "<dataset>", 0,
                    f"{word}: manifest has {len(manifest)} images, "
                    f"feature set has {image_set.vectors.shape[0]}")
        return self


def content_hash(data: bytes) -> str:
    """256-bit content digest of raw bytes, as lowercase hex."""
    return hashlib.sha256(data).hexdigest()


def load_word_list(path, language: str) -> Lexicon:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise MalformedLine(path, lineno, f"expected word<TAB>pos, got {line!r}")
            word, pos = normalize_word(parts[0]), parts[1].strip()
            if pos not in POS_TAGS:
                raise UnknownPos(f"{path}:{lineno}: unknown POS {pos!r}")
            if not word:
                raise MalformedLine(path, lineno, "empty word")
            entries.append(WordEntry(word=word, pos=pos, language=language))
    return Lexicon(language=language, entries=tuple(entries))


def write_word_list(lexicon: Lexicon, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in lexicon.entries:
            fh.write(f"{e.word}\t{e.pos}\n")


def load_translation_pairs(path, source: Lexicon, target: Lexicon) -> list[TranslationPair]:
    pairs = []
    seen_sources = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise MalformedLine(path, lineno, f"expected source<TAB>target, got {line!r}")
            s_word, t_word = normalize_word(parts[0]), normalize_word(parts[1])
            if s_word in seen_sources:
                raise DuplicateSource(f"{path}:{lineno}: duplicate source word {s_word!r}")
            seen_sources.add(s_word)
            s_entries = source.entries_for(s_word)
            t_entries = target.entries_for(t_word)
            if not s_entries:
                raise UnknownWord(f"{path}:{lineno}: {s_word!r} not in source lexicon")
            if not t_entries:
                raise UnknownWord(f"{path}:{lineno}: {t_word!r} not in target lexicon")
            match = next(
                ((s, t) for s in s_entries for t in t_entries if s.pos == t.pos), None)
            if match is None:
                raise PosMismatch(
                    f"{path}:{lineno}: no POS-compatible reading of {s_word!r}/{t_word!r}")
            pairs.append(TranslationPair(source=match[0], target=match[1]))
    return pairs


def write_translation_pairs(pairs, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(f"{p.source.word}\t{p.target.word}\n")


def load_manifests(path) -> dict[str, ImageManifest]:
    """Parse a manifest TSV; a word's lines must be contiguous."""
    groups: dict[str, tuple[list[str], list[str]]] = {}
    current = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedLine(path, lineno,
                                    f"expected word<TAB>image_id<TAB>digest, got {line!r}")
            word, image_id, digest = normalize_word(parts[0]), parts[1], parts[2].lower()
            if len(digest) != 64 or any(c not in "0123456789abcdef" for c in digest):
                raise MalformedLine(path, lineno, f"not a 256-bit hex digest: {parts[2]!r}")
            if word != current and word in groups:
                raise MalformedLine(path, lineno, f"manifest lines for {word!r} not contiguous")
            current = word
            ids, hashes = groups.setdefault(word, ([], []))
            ids.append(image_id)
            hashes.append(digest)
    return {
        word: ImageManifest(word=word, image_ids=tuple(ids), content_hashes=tuple(hashes))
        for word, (ids, hashes) in groups.items()
    }


def write_manifests(manifests: dict[str, ImageManifest], path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word in manifests:
            m = manifests[word]
            for image_id, digest in zip(m.image_ids, m.content_hashes):
                fh.write(f"{m.word}\t{image_id}\t{digest}\n")


def _prune_dataset(dataset: Dataset, shared: set[str]) -> Dataset:
    manifests = {}
    sets = dict(dataset.sets)
    for word, m in dataset.manifests.items():
        keep = [i for i, h in enumerate(m.content_hashes) if h not in shared]
        if len(keep) == len(m):
            manifests[word] = m
            continue
        manifests[word] = ImageManifest(
            word=word,
            image_ids=tuple(m.image_ids[i] for i in keep),
            content_hashes=tuple(m.content_hashes[i] for i in keep),
        )
        if word in sets:
            sets[word] = sets[word].take_rows(keep)
    return Dataset(lexicon=dataset.lexicon, manifests=manifests, sets=sets)


def dedupe_cross_lingual(source: Dataset, target: Dataset, pairs):
    """Remove cross-lingual duplicate images and over-shared pairs.

    Any image whose content hash occurs in both languages is dropped from
    both sides. Pairs whose two image sets shared more than
    SHARED_IMAGE_LIMIT hashes (counted before removal) are dropped and
    returned. Idempotent: a second application changes nothing.
    """
    src_hashes = {h for m in source.manifests.values() for h in m.content_hashes}
    tgt_hashes = {h for m in target.manifests.values() for h in m.content_hashes}
    shared = src_hashes & tgt_hashes

    removed = []
    for pair in pairs:
        sm = source.manifests.get(pair.source.word)
        tm = target.manifests.get(pair.target.word)
        if sm is None or tm is None:
            continue
        overlap = len(set(sm.content_hashes) & set(tm.content_hashes))
        if overlap > SHARED_IMAGE_LIMIT:
            removed.append(pair)

    return _prune_dataset(source, shared), _prune_dataset(target, shared), removed


def split_two_folds(pairs, seed: int):
    """Deterministic POS-stratified halving of a pair list.

    Each POS group is shuffled with the seeded generator and dealt in
    halves; odd remainders alternate folds so overall sizes differ by at
    most one and per-POS counts stay within one of each other.
    """
    if len(pairs) < 2:
        raise TooFewPairs(f"need at least 2 pairs to split, got {len(pairs)}")
    rng = np.random.default_rng(seed)
    fold_a_idx: list[int] = []
    fold_b_idx: list[int] = []
    extra_to_a = True
    for pos in POS_TAGS:
        group = [i for i, p in enumerate(pairs) if p.source.pos == pos]
        if not group:
            continue
        order = rng.permutation(len(group))
        shuffled = [group[j] for j in order]
        half = len(shuffled) // 2
        n_a = half
        if len(shuffled) % 2 == 1:
            if extra_to_a:
                n_a += 1
            extra_to_a = not extra_to_a
        fold_a_idx.extend(shuffled[:n_a])
        fold_b_idx.extend(shuffled[n_a:])
    fold_a = [pairs[i] for i in sorted(fold_a_idx)]
    fold_b = [pairs[i] for i in sorted(fold_b_idx)]
    return fold_a, fold_b
