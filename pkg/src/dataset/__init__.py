"""Rating ingestion, filtering and the splits the temporal experiment runs on"""

from src.dataset.loader import Rating, RatingFormat, ParseResult, parse_ratings
from src.dataset.interactions import Interactions, filter_interactions
from src.dataset.splits import (
    Category,
    CategorySplit,
    SplitData,
    EpochPlan,
    split_categories,
    split_train_test,
    assign_epochs,
)
from src.dataset.cache import PreparedDataset, PreparedCache

__all__ = [
    "Rating",
    "RatingFormat",
    "ParseResult",
    "parse_ratings",
    "Interactions",
    "filter_interactions",
    "Category",
    "CategorySplit",
    "SplitData",
    "EpochPlan",
    "split_categories",
    "split_train_test",
    "assign_epochs",
    "PreparedDataset",
    "PreparedCache",
]
