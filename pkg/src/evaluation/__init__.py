"""Long-tail coverage, popularity and accuracy metrics"""

from src.evaluation.metrics import (
    EpochResult,
    arp,
    per_user_arp,
    lcr,
    clcr,
    ndcg_at_k,
    mean_ndcg,
    longtail_quality_count,
)
from src.evaluation.significance import SignificanceResult, paired_significance, significance_marker, best_algorithm

__all__ = [
    "EpochResult",
    "arp",
    "per_user_arp",
    "lcr",
    "clcr",
    "ndcg_at_k",
    "mean_ndcg",
    "longtail_quality_count",
    "SignificanceResult",
    "paired_significance",
    "significance_marker",
    "best_algorithm",
]
