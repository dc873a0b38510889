from .canonical import (
    CanonicalIndex,
    canonicalize,
    canonical_board,
    preflop_class_count,
    flop_board_class_count,
)
from .equity import equity, equity_histogram, SamplingPolicy
from .buckets import BucketMap, build_buckets, bucket_of, kmeans_emd
from .actions import (
    ActionMenuConfig,
    abstract_actions,
    translate_action,
)

__all__ = [
    "CanonicalIndex", "canonicalize", "canonical_board",
    "preflop_class_count", "flop_board_class_count",
    "equity", "equity_histogram", "SamplingPolicy",
    "BucketMap", "build_buckets", "bucket_of", "kmeans_emd",
    "ActionMenuConfig", "abstract_actions", "translate_action",
]
