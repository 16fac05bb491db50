"""xQuAD re-ranking (list-based and history-based) for long-tail promotion"""

from src.rerank.categories import Category, UserCategoryPreference, user_category_preference
from src.rerank.ledger import HistoryLedger, record
from src.rerank.xquad import (
    Variant,
    SmoothForm,
    LedgerCadence,
    RerankConfig,
    coverage_term,
    diversity_score,
    rerank,
)
from src.rerank.registry import ALGORITHMS, BASE_LABEL, resolve_algorithm, registry_listing

__all__ = [
    "Category",
    "UserCategoryPreference",
    "user_category_preference",
    "HistoryLedger",
    "record",
    "Variant",
    "SmoothForm",
    "LedgerCadence",
    "RerankConfig",
    "coverage_term",
    "diversity_score",
    "rerank",
    "ALGORITHMS",
    "BASE_LABEL",
    "resolve_algorithm",
    "registry_listing",
]
