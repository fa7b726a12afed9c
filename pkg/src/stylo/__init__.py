"""Batch authorship attribution toolkit.

Pipeline: canonicalize a corpus into labeled chunks, extract
stylometric feature matrices, then compare authors through delta
distances, compression distances, projections, supervised classifiers,
and degradation-curve verification.  Everything is deterministic for a
fixed seed; hot numeric kernels run through a compiled extension when
available, with a pure NumPy fallback.
"""

from ._kernels import BACKEND as kernel_backend
from ._kernels import backends as kernel_backends
from .compression import Compressor, NcdMatrix, builtin_compressors, ncd, ncd_matrix, ncd_tree
from .corpus import (
    AuthorProfile,
    CanonicalRules,
    Chunk,
    CorpusManifest,
    Document,
    balance_chunks,
    build_profiles,
    canonicalize,
    load_corpus,
    load_manifest,
    segment_chunks,
)
from .distance import (
    DELTA_KINDS,
    Dendrogram,
    DistanceMatrix,
    SeparationScore,
    cluster,
    delta,
    delta_grid,
    pairwise,
    separation,
)
from .features import (
    FEATURE_KINDS,
    FeatureMatrix,
    FeatureSpec,
    Featurizer,
    TokenStream,
    Vocabulary,
    build_vocabulary,
    extract,
    tfidf_weight,
    tokenize,
    zscore,
)
from .learn import (
    CLASSIFIER_KINDS,
    AttributionResult,
    ConfusionMatrix,
    EvaluationReport,
    TrainedModel,
    attribute,
    cross_validate,
    metrics,
    predict,
    train,
)
from .projection import ProjectedPoints, ProjectionModel, fit_lda, fit_pca, inverse_transform, transform
from .unmasking import (
    DegradationCurve,
    UnmaskingConfig,
    Verdict,
    build_curve_dataset,
    curve_features,
    pair_features,
    train_meta,
    unmask_pair,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "kernel_backend",
    "kernel_backends",
    # corpus
    "Document",
    "CorpusManifest",
    "CanonicalRules",
    "Chunk",
    "AuthorProfile",
    "load_manifest",
    "load_corpus",
    "canonicalize",
    "segment_chunks",
    "balance_chunks",
    "build_profiles",
    # features
    "FEATURE_KINDS",
    "FeatureSpec",
    "FeatureMatrix",
    "Featurizer",
    "TokenStream",
    "Vocabulary",
    "tokenize",
    "build_vocabulary",
    "extract",
    "zscore",
    "tfidf_weight",
    # distance
    "DELTA_KINDS",
    "DistanceMatrix",
    "Dendrogram",
    "SeparationScore",
    "delta",
    "pairwise",
    "cluster",
    "separation",
    "delta_grid",
    # compression
    "Compressor",
    "NcdMatrix",
    "builtin_compressors",
    "ncd",
    "ncd_matrix",
    "ncd_tree",
    # projection
    "ProjectionModel",
    "ProjectedPoints",
    "fit_pca",
    "fit_lda",
    "transform",
    "inverse_transform",
    # learn
    "CLASSIFIER_KINDS",
    "TrainedModel",
    "ConfusionMatrix",
    "EvaluationReport",
    "AttributionResult",
    "train",
    "predict",
    "cross_validate",
    "metrics",
    "attribute",
    # unmasking
    "UnmaskingConfig",
    "DegradationCurve",
    "Verdict",
    "pair_features",
    "unmask_pair",
    "curve_features",
    "build_curve_dataset",
    "train_meta",
    "verify",
]
