"""lexiscope: induce bilingual lexicons from the images words evoke.

Words are represented by sets of per-image feature vectors; translation
candidates are ranked by cross-lingual image-set similarity, by
nearest-neighbor voting, or by a supervised hyperplane ranker.
"""

from .corpus import (
    Dataset,
    ImageManifest,
    Lexicon,
    TranslationPair,
    WordEntry,
    dedupe_cross_lingual,
    split_two_folds,
)
from .evaluation import (
    EvalReport,
    Setting,
    dispersion_rank_correlation,
    dispersion_summary,
    image_dispersion,
    mrr,
    per_setting_report,
    precision_at_k,
    render_report,
)
from .features import Codebook, EmbeddingTable, FeatureKind, ImageSet
from .ranker import RankingModel, TrainConfig, train, two_fold_evaluate
from .similarity import (
    KnnConfig,
    RankedList,
    SimilarityMethod,
    knn_cluster_translate,
    knn_translate,
    rank_translations,
    set_similarity,
    similarity_matrix,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "Codebook",
    "Dataset",
    "EmbeddingTable",
    "EvalReport",
    "FeatureKind",
    "ImageManifest",
    "ImageSet",
    "KnnConfig",
    "Lexicon",
    "RankedList",
    "RankingModel",
    "Setting",
    "SimilarityMethod",
    "SynthConfig",
    "TrainConfig",
    "TranslationPair",
    "WordEntry",
    "dedupe_cross_lingual",
    "dispersion_rank_correlation",
    "dispersion_summary",
    "generate",
    "image_dispersion",
    "knn_cluster_translate",
    "knn_translate",
    "mrr",
    "per_setting_report",
    "precision_at_k",
    "rank_translations",
    "render_report",
    "set_similarity",
    "similarity_matrix",
    "split_two_folds",
    "train",
    "two_fold_evaluate",
    "__version__",
]
