"""Command-line pipeline: featurize images, build codebooks, rank
translations, train/evaluate the supervised ranker, score rankings,
measure dispersion, generate synthetic corpora, dedupe shared images.

Exit codes: 0 success, 2 configuration error (bad flags, missing
files), 3 data error (malformed or inconsistent file contents).
"""

from __future__ import annotations

import argparse
import os
import sys
import urllib.parse

import numpy as np

from . import corpus, evaluation, features, lxfv, ranker, similarity, synth
from .errors import BadBinCount, BadConfig, LexiscopeError
from .images import read_ppm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

_CONFIG_ERRORS = (BadConfig, BadBinCount)

_KIND_NAMES = {k.value.lower(): k for k in features.FeatureKind}
_SET_METHODS = {m.value.lower().replace("_", ""): m
                for m in similarity.SimilarityMethod}


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LEXISCOPE_THREADS", "1")))
    except ValueError:
        return 1


def _add_side_args(parser, prefix: str, language_default: str):
    parser.add_argument(f"--{prefix}-words", required=True)
    parser.add_argument(f"--{prefix}-manifest", required=True)
    parser.add_argument(f"--{prefix}-feats", required=True)
    parser.add_argument(f"--{prefix}-language", default=language_default)


def _load_side(args, prefix: str, kind: features.FeatureKind,
               missing: str = "error") -> corpus.Dataset:
    def get(name):
        return getattr(args, f"{prefix}_{name}")

    return _load_dataset(get("words"), get("language"), get("manifest"),
                         get("feats"), kind, missing)


def _load_dataset(words, language, manifest, feats_dir, kind,
                  missing: str = "error") -> corpus.Dataset:
    dataset = features.load_feature_dataset(words, language, manifest,
                                            feats_dir, kind, missing)
    skipped = sorted(set(dataset.manifests) - set(dataset.sets))
    if skipped:
        print(f"note: no features for {len(skipped)} word(s), skipped: "
              + " ".join(skipped), file=sys.stderr)
    return dataset


def _image_path(images_dir: str, image_id: str) -> str:
    return os.path.join(images_dir, urllib.parse.quote(image_id, safe="") + ".ppm")


def _iter_manifest_images(images_dir: str, manifest: corpus.ImageManifest):
    for image_id in manifest.image_ids:
        yield read_ppm(_image_path(images_dir, image_id))


def _write_sets(out_dir: str, sets: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for word, image_set in sets.items():
        lxfv.write(os.path.join(out_dir, features.word_filename(word)),
                   image_set.vectors)


def _require(args, names: list[str], context: str):
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        flags = " ".join("--" + n for n in missing)
        raise BadConfig(f"{context} requires {flags}")


def cmd_featurize(args) -> int:
    kind = _KIND_NAMES[args.kind]
    manifests = corpus.load_manifests(args.manifest)
    out_sets: dict[str, features.ImageSet] = {}

    if kind is features.FeatureKind.COLOR:
        _require(args, ["images"], "--kind color")
        for word, m in manifests.items():
            rows = [features.color_histogram(img, args.bins)
                    for img in _iter_manifest_images(args.images, m)]
            vectors = (np.stack(rows) if rows
                       else np.zeros((0, 4 * args.bins)))
            out_sets[word] = features.ImageSet(word=word, kind=kind, vectors=vectors)

    elif kind is features.FeatureKind.BOVW:
        _require(args, ["images", "codebook"], "--kind bovw")
        codebook = features.Codebook(centroids=lxfv.read(args.codebook))
        for word, m in manifests.items():
            rows = [features.bovw_encode(
                        features.extract_descriptors(img, args.patch, args.stride),
                        codebook)
                    for img in _iter_manifest_images(args.images, m)]
            vectors = np.stack(rows) if rows else np.zeros((0, codebook.size))
            out_sets[word] = features.ImageSet(word=word, kind=kind, vectors=vectors)

    elif kind is features.FeatureKind.TEX:
        _require(args, ["embeddings", "language"], "--kind tex")
        table = features.load_embedding_table(args.embeddings, args.language)
        for word, m in manifests.items():
            if args.skip_oov and word not in table:
                print(f"note: {word!r} not in embedding table, skipped",
                      file=sys.stderr)
                continue
            out_sets[word] = features.attach_text_embedding(m, table)

    elif kind is features.FeatureKind.COMBI:
        _require(args, ["words", "language", "vis-dir", "vis-kind", "embeddings"],
                 "--kind combi")
        vis = _load_dataset(args.words, args.language, args.manifest, args.vis_dir,
                            _KIND_NAMES[args.vis_kind])
        table = features.load_embedding_table(args.embeddings, args.language)
        for word, m in manifests.items():
            if args.skip_oov and word not in table:
                print(f"note: {word!r} not in embedding table, skipped",
                      file=sys.stderr)
                continue
            tex = features.attach_text_embedding(m, table)
            out_sets[word] = features.combine(vis.sets[word], tex,
                                              l2_normalize=args.l2_normalize)

    elif kind in (features.FeatureKind.VISPCA, features.FeatureKind.COMBIPCA):
        _require(args, ["words", "language", "vis-dir", "vis-kind",
                        "words2", "language2", "manifest2", "vis-dir2", "out2"],
                 f"--kind {args.kind}")
        vis_kind = _KIND_NAMES[args.vis_kind]
        side1 = _load_dataset(args.words, args.language, args.manifest,
                              args.vis_dir, vis_kind)
        side2 = _load_dataset(args.words2, args.language2, args.manifest2,
                              args.vis_dir2, vis_kind)
        red1, red2 = features.reduce_sets(side1, side2, args.pca_dim)
        sets1, sets2 = red1.sets, red2.sets
        if kind is features.FeatureKind.COMBIPCA:
            _require(args, ["embeddings", "embeddings2"], "--kind combipca")
            sets1 = _combine_pca_side(red1, args.embeddings, args.language,
                                      args.skip_oov, args.l2_normalize)
            sets2 = _combine_pca_side(red2, args.embeddings2, args.language2,
                                      args.skip_oov, args.l2_normalize)
        _write_sets(args.out, sets1)
        _write_sets(args.out2, sets2)
        return EXIT_OK

    _write_sets(args.out, out_sets)
    return EXIT_OK


def _combine_pca_side(dataset: corpus.Dataset, embeddings_path: str, language: str,
                      skip_oov: bool, l2_normalize: bool) -> dict:
    table = features.load_embedding_table(embeddings_path, language)
    out = {}
    for word, image_set in dataset.sets.items():
        if skip_oov and word not in table:
            print(f"note: {word!r} not in embedding table, skipped", file=sys.stderr)
            continue
        tex = features.attach_text_embedding(dataset.manifests[word], table)
        out[word] = features.combine_pca(image_set, tex, l2_normalize=l2_normalize)
    return out


def cmd_codebook(args) -> int:
    manifests = corpus.load_manifests(args.manifest)
    blocks = []
    for m in manifests.values():
        for img in _iter_manifest_images(args.images, m):
            blocks.append(features.extract_descriptors(img, args.patch, args.stride))
    pool = (np.concatenate(blocks, axis=0) if blocks
            else np.zeros((0, features.DESCRIPTOR_DIM)))
    sample = features.sample_rows(pool, args.sample, args.seed)
    codebook = features.build_codebook(sample, k=args.size, seed=args.seed)
    lxfv.write(args.out, codebook.centroids)
    return EXIT_OK


def cmd_rank(args) -> int:
    kind = _KIND_NAMES[args.kind]
    missing = "skip" if args.allow_missing else "error"
    sources = _load_side(args, "source", kind, missing)
    targets = _load_side(args, "target", kind, missing)

    if args.method in _SET_METHODS:
        matrix = similarity.similarity_matrix(
            sources, targets, _SET_METHODS[args.method], threads=args.threads)
        lists = [matrix.ranked(i) for i in range(len(matrix.source_words))]
    else:
        cfg = similarity.KnnConfig(clusters=args.k if args.method == "knnc" else 1)
        lists = [similarity.knn_prediction_list(sources.sets[w], targets, cfg,
                                                seed=args.seed)
                 for w in similarity.candidate_words(sources)]
    similarity.write_ranked_lists(lists, args.out)
    return EXIT_OK


def _load_gold(args, sources: corpus.Dataset, targets: corpus.Dataset):
    return corpus.load_translation_pairs(args.pairs, sources.lexicon, targets.lexicon)


def cmd_train_eval(args) -> int:
    kind = _KIND_NAMES[args.kind]
    sources = _load_side(args, "source", kind)
    targets = _load_side(args, "target", kind)
    gold = _load_gold(args, sources, targets)
    ratio = None if args.negative_ratio == "all" else int(args.negative_ratio)
    cfg = ranker.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                             l2=args.l2, negative_ratio=ratio, seed=args.seed)
    report = ranker.two_fold_evaluate(sources, targets, gold, cfg)
    _emit(evaluation.render_report(report, args.format), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    source_lex = corpus.load_word_list(args.source_words, args.source_language)
    target_lex = corpus.load_word_list(args.target_words, args.target_language)
    gold = corpus.load_translation_pairs(args.pairs, source_lex, target_lex)
    rankings = _read_rankings(args.rankings)
    report = evaluation.per_setting_report(rankings, gold, method=args.method_label)
    _emit(evaluation.render_report(report, args.format), args.out)
    return EXIT_OK


def _read_rankings(path: str) -> list[similarity.RankedList]:
    if os.path.isdir(path):
        lists: list[similarity.RankedList] = []
        for name in sorted(os.listdir(path)):
            if name.endswith(".tsv"):
                lists.extend(similarity.read_ranked_lists(os.path.join(path, name)))
        return lists
    return similarity.read_ranked_lists(path)


def cmd_dispersion(args) -> int:
    dataset = _load_dataset(args.words, args.language, args.manifest,
                            args.features, _KIND_NAMES[args.kind])
    report = evaluation.dispersion_summary(dataset)
    evaluation.write_dispersion_tsv(report, args.out)
    for pos in ("NOUN", "VERB", "ADJ"):
        if pos in report.pos_means:
            print(f"{pos}\t{report.pos_means[pos]:.9f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.preset == "paper-pos":
        cfg = synth.paper_pos_config(seed=args.seed, dim=args.dim,
                                     images_per_word=args.images_per_word)
    else:
        cfg = synth.SynthConfig(
            num_words={"NOUN": args.nouns, "VERB": args.verbs, "ADJ": args.adjs},
            noise_sigma={"NOUN": args.sigma_noun, "VERB": args.sigma_verb,
                         "ADJ": args.sigma_adj},
            images_per_word=args.images_per_word,
            dim=args.dim,
            cross_lingual_shift=args.shift,
            concept_dim=args.concept_dim,
            seed=args.seed)
    source, target, gold = synth.generate(cfg)
    synth.write_dataset(source, target, gold, args.out)
    return EXIT_OK


def cmd_dedupe(args) -> int:
    kind = _KIND_NAMES[args.kind]
    sources = _load_side(args, "source", kind)
    targets = _load_side(args, "target", kind)
    gold = _load_gold(args, sources, targets)
    pruned_src, pruned_tgt, dropped = corpus.dedupe_cross_lingual(
        sources, targets, gold)
    kept = [p for p in gold if p not in dropped]
    os.makedirs(args.out, exist_ok=True)
    corpus.write_word_list(pruned_src.lexicon,
                           os.path.join(args.out, "source_words.tsv"))
    corpus.write_word_list(pruned_tgt.lexicon,
                           os.path.join(args.out, "target_words.tsv"))
    corpus.write_manifests(pruned_src.manifests,
                           os.path.join(args.out, "source_manifest.tsv"))
    corpus.write_manifests(pruned_tgt.manifests,
                           os.path.join(args.out, "target_manifest.tsv"))
    corpus.write_translation_pairs(kept, os.path.join(args.out, "pairs.tsv"))
    _write_sets(os.path.join(args.out, "source_feats"), pruned_src.sets)
    _write_sets(os.path.join(args.out, "target_feats"), pruned_tgt.sets)
    n_src = sum(len(m) for m in sources.manifests.values())
    n_src_kept = sum(len(m) for m in pruned_src.manifests.values())
    n_tgt = sum(len(m) for m in targets.manifests.values())
    n_tgt_kept = sum(len(m) for m in pruned_tgt.manifests.values())
    print(f"removed {n_src - n_src_kept} source and {n_tgt - n_tgt_kept} target "
          f"images; dropped {len(dropped)} of {len(gold)} pairs")
    return EXIT_OK


def _emit(payload: bytes, out_path: str | None):
    if out_path:
        with open(out_path, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexiscope",
        description="Find translations by comparing the images words evoke.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="compute per-word feature files")
    p.add_argument("--kind", required=True, choices=sorted(_KIND_NAMES),
                   help="feature representation to produce")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--images", help="directory of <quoted image id>.ppm files")
    p.add_argument("--bins", type=int, default=features.DEFAULT_BINS_PER_CHANNEL)
    p.add_argument("--codebook", help="LXFV centroid file for bovw")
    p.add_argument("--embeddings", help="text embedding table")
    p.add_argument("--words")
    p.add_argument("--language", default="en")
    p.add_argument("--vis-dir", help="existing visual feature files")
    p.add_argument("--vis-kind", choices=sorted(_KIND_NAMES))
    p.add_argument("--patch", type=int, default=16)
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--pca-dim", type=int, default=features.DEFAULT_PCA_DIM)
    p.add_argument("--l2-normalize", action="store_true")
    p.add_argument("--skip-oov", action="store_true",
                   help="skip words missing from the embedding table")
    p.add_argument("--words2")
    p.add_argument("--language2", default="de")
    p.add_argument("--manifest2")
    p.add_argument("--vis-dir2")
    p.add_argument("--embeddings2")
    p.add_argument("--out2")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("codebook", help="cluster patch descriptors into codewords")
    p.add_argument("--images", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=features.DEFAULT_CODEBOOK_SIZE)
    p.add_argument("--sample", type=int, default=10000,
                   help="descriptors sampled before clustering")
    p.add_argument("--patch", type=int, default=16)
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("rank", help="rank target words for every source word")
    p.add_argument("--method", required=True,
                   choices=sorted(_SET_METHODS) + ["knn", "knnc"])
    p.add_argument("--kind", required=True, choices=sorted(_KIND_NAMES))
    _add_side_args(p, "source", "en")
    _add_side_args(p, "target", "de")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=3, help="clusters for knnc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--allow-missing", action="store_true",
                   help="skip words without feature files")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train-eval",
                       help="two-fold train/test of the supervised ranker")
    p.add_argument("--kind", required=True, choices=sorted(_KIND_NAMES))
    _add_side_args(p, "source", "en")
    _add_side_args(p, "target", "de")
    p.add_argument("--pairs", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--negative-ratio", default="10",
                   help="negatives kept per positive, or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("eval", help="score ranked lists against gold pairs")
    p.add_argument("--rankings", required=True,
                   help="ranked-list TSV file or directory of them")
    p.add_argument("--pairs", required=True)
    p.add_argument("--source-words", required=True)
    p.add_argument("--source-language", default="en")
    p.add_argument("--target-words", required=True)
    p.add_argument("--target-language", default="de")
    p.add_argument("--method-label", default="")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dispersion", help="per-word image dispersion report")
    p.add_argument("--words", required=True)
    p.add_argument("--language", default="en")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--kind", required=True, choices=sorted(_KIND_NAMES))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("synth", help="generate a synthetic bilingual corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=["paper-pos"])
    p.add_argument("--nouns", type=int, default=10)
    p.add_argument("--verbs", type=int, default=5)
    p.add_argument("--adjs", type=int, default=5)
    p.add_argument("--images-per-word", type=int, default=20)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--sigma-noun", type=float, default=0.1)
    p.add_argument("--sigma-verb", type=float, default=0.1)
    p.add_argument("--sigma-adj", type=float, default=0.1)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--concept-dim", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dedupe",
                       help="drop cross-lingual duplicate images and pairs")
    p.add_argument("--kind", required=True, choices=sorted(_KIND_NAMES))
    _add_side_args(p, "source", "en")
    _add_side_args(p, "target", "de")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dedupe)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LexiscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
