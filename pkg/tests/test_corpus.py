"""Corpus loading, dedup and fold-splitting tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexiscope.corpus import (
    Dataset,
    ImageManifest,
    Lexicon,
    TranslationPair,
    WordEntry,
    content_hash,
    dedupe_cross_lingual,
    load_manifests,
    load_translation_pairs,
    load_word_list,
    normalize_word,
    split_two_folds,
    write_manifests,
    write_translation_pairs,
    write_word_list,
)
from lexiscope.errors import (
    DuplicateEntry,
    DuplicateSource,
    MalformedLine,
    PosMismatch,
    TooFewPairs,
    UnknownPos,
    UnknownWord,
)
from lexiscope.features import FeatureKind, ImageSet

from util import make_pair


def entry(word, pos="NOUN", lang="en"):
    return WordEntry(word=word, pos=pos, language=lang)


class TestNormalization:
    def test_lowercase_and_strip(self):
        assert normalize_word("  Hund ") == "hund"

    def test_unicode_composition(self):
        # decomposed u + combining diaeresis folds to the composed form
        assert normalize_word("über") == "über"


class TestWordList:
    def test_round_trip(self, tmp_path):
        lex = Lexicon("en", (entry("cow"), entry("run", "VERB"), entry("red", "ADJ")))
        path = tmp_path / "words.tsv"
        write_word_list(lex, path)
        loaded = load_word_list(path, "en")
        assert loaded == lex

    def test_unknown_pos(self, tmp_path):
        path = tmp_path / "words.tsv"
        path.write_text("cow\tNN\n")
        with pytest.raises(UnknownPos):
            load_word_list(path, "en")

    def test_malformed_column_count(self, tmp_path):
        path = tmp_path / "words.tsv"
        path.write_text("cow NOUN\n")
        with pytest.raises(MalformedLine) as err:
            load_word_list(path, "en")
        assert err.value.lineno == 1

    def test_duplicate_entry(self, tmp_path):
        path = tmp_path / "words.tsv"
        path.write_text("cow\tNOUN\nCow\tNOUN\n")
        with pytest.raises(DuplicateEntry):
            load_word_list(path, "en")

    def test_same_word_two_pos_allowed(self, tmp_path):
        path = tmp_path / "words.tsv"
        path.write_text("run\tNOUN\nrun\tVERB\n")
        lex = load_word_list(path, "en")
        assert len(lex) == 2

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "words.tsv"
        path.write_text("cow\tNOUN\n\n\ndog\tNOUN\n")
        assert len(load_word_list(path, "en")) == 2


class TestTranslationPairs:
    def setup_method(self):
        self.src = Lexicon("en", (entry("cow"), entry("run", "VERB"),
                                  entry("run", "NOUN")))
        self.tgt = Lexicon("de", (entry("kuh", lang="de"),
                                  entry("lauf", "NOUN", "de"),
                                  entry("laufen", "VERB", "de")))

    def test_round_trip(self, tmp_path):
        pairs = [TranslationPair(self.src.entries[0], self.tgt.entries[0])]
        path = tmp_path / "pairs.tsv"
        write_translation_pairs(pairs, path)
        assert load_translation_pairs(path, self.src, self.tgt) == pairs

    def test_first_pos_compatible_match_wins(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("run\tlauf\n")
        # "run" is VERB then NOUN in file order; "lauf" is NOUN only,
        # so the NOUN reading of "run" is the first compatible one
        [pair] = load_translation_pairs(path, self.src, self.tgt)
        assert pair.source.pos == "NOUN"

    def test_duplicate_source(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("cow\tkuh\ncow\tlauf\n")
        with pytest.raises(DuplicateSource):
            load_translation_pairs(path, self.src, self.tgt)

    def test_unknown_word(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("horse\tkuh\n")
        with pytest.raises(UnknownWord):
            load_translation_pairs(path, self.src, self.tgt)

    def test_no_pos_compatible_reading(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("cow\tlaufen\n")
        with pytest.raises(PosMismatch):
            load_translation_pairs(path, self.src, self.tgt)

    def test_pair_requires_distinct_languages(self):
        with pytest.raises(MalformedLine):
            TranslationPair(entry("cow"), entry("kuh"))


def digest(tag: str) -> str:
    return content_hash(tag.encode("utf-8"))


def manifest(word, n, salt=""):
    return ImageManifest(
        word=word,
        image_ids=tuple(f"{word}_{i}" for i in range(n)),
        content_hashes=tuple(digest(f"{salt}{word}_{i}") for i in range(n)))


class TestManifests:
    def test_round_trip(self, tmp_path):
        manifests = {"cow": manifest("cow", 3), "dog": manifest("dog", 2)}
        path = tmp_path / "m.tsv"
        write_manifests(manifests, path)
        assert load_manifests(path) == manifests

    def test_non_contiguous_groups_rejected(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text(f"cow\ta\t{digest('1')}\n"
                        f"dog\tb\t{digest('2')}\n"
                        f"cow\tc\t{digest('3')}\n")
        with pytest.raises(MalformedLine):
            load_manifests(path)

    def test_bad_digest_rejected(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("cow\ta\tdeadbeef\n")
        with pytest.raises(MalformedLine):
            load_manifests(path)

    def test_duplicate_image_ids_rejected(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text(f"cow\ta\t{digest('1')}\ncow\ta\t{digest('2')}\n")
        with pytest.raises(DuplicateEntry):
            load_manifests(path)

    def test_image_cap_enforced(self):
        with pytest.raises(MalformedLine):
            manifest("cow", 51)


def bilingual_fixture(n_shared: int):
    """One gold pair whose sets share n_shared content hashes."""
    total = 15
    shared = [digest(f"shared_{i}") for i in range(n_shared)]
    src_m = ImageManifest(
        word="cow",
        image_ids=tuple(f"s{i}" for i in range(total)),
        content_hashes=tuple(shared + [digest(f"src_{i}")
                                       for i in range(total - n_shared)]))
    tgt_m = ImageManifest(
        word="kuh",
        image_ids=tuple(f"t{i}" for i in range(total)),
        content_hashes=tuple(shared + [digest(f"tgt_{i}")
                                       for i in range(total - n_shared)]))
    rng = np.random.default_rng(1)
    src = Dataset(
        lexicon=Lexicon("en", (entry("cow"),)),
        manifests={"cow": src_m},
        sets={"cow": ImageSet("cow", FeatureKind.CNN,
                              rng.standard_normal((total, 4)))})
    tgt = Dataset(
        lexicon=Lexicon("de", (entry("kuh", lang="de"),)),
        manifests={"kuh": tgt_m},
        sets={"kuh": ImageSet("kuh", FeatureKind.CNN,
                              rng.standard_normal((total, 4)))})
    pair = TranslationPair(entry("cow"), entry("kuh", lang="de"))
    return src, tgt, [pair]


class TestDedupe:
    def test_no_shared_hashes_untouched(self):
        src, tgt, pairs = bilingual_fixture(0)
        out_src, out_tgt, removed = dedupe_cross_lingual(src, tgt, pairs)
        assert removed == []
        assert len(out_src.manifests["cow"]) == 15
        assert len(out_tgt.manifests["kuh"]) == 15

    def test_at_limit_pair_kept_images_removed(self):
        src, tgt, pairs = bilingual_fixture(10)
        out_src, out_tgt, removed = dedupe_cross_lingual(src, tgt, pairs)
        assert removed == []
        assert len(out_src.manifests["cow"]) == 5
        assert len(out_tgt.manifests["kuh"]) == 5
        assert out_src.sets["cow"].vectors.shape == (5, 4)

    def test_over_limit_pair_removed(self):
        src, tgt, pairs = bilingual_fixture(11)
        out_src, out_tgt, removed = dedupe_cross_lingual(src, tgt, pairs)
        assert removed == pairs
        assert len(out_src.manifests["cow"]) == 4

    def test_removed_rows_match_manifest_rows(self):
        src, tgt, pairs = bilingual_fixture(3)
        kept_rows = src.sets["cow"].vectors[3:]
        out_src, _, _ = dedupe_cross_lingual(src, tgt, pairs)
        np.testing.assert_array_equal(out_src.sets["cow"].vectors, kept_rows)

    def test_idempotent(self):
        src, tgt, pairs = bilingual_fixture(7)
        once_src, once_tgt, _ = dedupe_cross_lingual(src, tgt, pairs)
        twice_src, twice_tgt, removed = dedupe_cross_lingual(once_src, once_tgt, pairs)
        assert removed == []
        assert twice_src.manifests == once_src.manifests
        assert twice_tgt.manifests == once_tgt.manifests


class TestSplitTwoFolds:
    def make_pairs(self, counts):
        pairs = []
        for pos, n in counts.items():
            for i in range(n):
                pairs.append(make_pair(f"{pos.lower()}{i}", f"{pos.lower()}{i}x", pos))
        return pairs

    def test_partition(self):
        pairs = self.make_pairs({"NOUN": 7, "VERB": 4, "ADJ": 3})
        a, b = split_two_folds(pairs, seed=5)
        assert sorted(a + b, key=pairs.index) == pairs
        assert not set(p.source.word for p in a) & set(p.source.word for p in b)

    def test_sizes_within_one(self):
        for total in (2, 3, 9, 15):
            pairs = self.make_pairs({"NOUN": total})
            a, b = split_two_folds(pairs, seed=1)
            assert abs(len(a) - len(b)) <= 1

    def test_pos_stratified(self):
        pairs = self.make_pairs({"NOUN": 10, "VERB": 6, "ADJ": 2})
        a, b = split_two_folds(pairs, seed=9)
        for pos, n in (("NOUN", 10), ("VERB", 6), ("ADJ", 2)):
            n_a = sum(1 for p in a if p.source.pos == pos)
            n_b = sum(1 for p in b if p.source.pos == pos)
            assert n_a + n_b == n
            assert abs(n_a - n_b) <= 1

    def test_seed_reproducible(self):
        pairs = self.make_pairs({"NOUN": 9, "VERB": 5})
        assert split_two_folds(pairs, seed=3) == split_two_folds(pairs, seed=3)

    def test_different_seeds_differ_somewhere(self):
        pairs = self.make_pairs({"NOUN": 12})
        splits = {tuple(p.source.word for p in split_two_folds(pairs, seed=s)[0])
                  for s in range(20)}
        assert len(splits) > 1

    def test_too_few_pairs(self):
        with pytest.raises(TooFewPairs):
            split_two_folds(self.make_pairs({"NOUN": 1}), seed=0)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 40))
    @settings(max_examples=40, deadline=None)
    def test_partition_property(self, seed, n):
        pairs = self.make_pairs({"NOUN": n})
        a, b = split_two_folds(pairs, seed=seed)
        assert len(a) + len(b) == n
        assert abs(len(a) - len(b)) <= 1
        assert {p.source.word for p in a} | {p.source.word for p in b} == \
               {p.source.word for p in pairs}


class TestDatasetValidation:
    def test_mixed_kinds_rejected(self):
        ds = Dataset(
            lexicon=Lexicon("en", (entry("a"), entry("b"))),
            sets={"a": ImageSet("a", FeatureKind.CNN, np.ones((2, 3))),
                  "b": ImageSet("b", FeatureKind.COLOR, np.ones((2, 3)))})
        with pytest.raises(MalformedLine):
            ds.validate()

    def test_manifest_set_cardinality_mismatch(self):
        ds = Dataset(
            lexicon=Lexicon("en", (entry("a"),)),
            manifests={"a": manifest("a", 3)},
            sets={"a": ImageSet("a", FeatureKind.CNN, np.ones((2, 3)))})
        with pytest.raises(MalformedLine):
            ds.validate()
