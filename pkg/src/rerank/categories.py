"""User preference over the two popularity categories"""

from dataclasses import dataclass
from typing import Iterable

from src.dataset.splits import Category, CategorySplit


@dataclass(frozen=True)
class UserCategoryPreference:
    p_long: float
    p_short: float

    def __post_init__(self):
        if abs(self.p_long + self.p_short - 1.0) > 1e-12:
            raise ValueError(f"Preferences must sum to 1, got {self.p_long} + {self.p_short}")

    def of(self, category: Category) -> float:
        return self.p_long if category == Category.LONG_TAIL else self.p_short


def user_category_preference(profile: Iterable[int], split: CategorySplit) -> UserCategoryPreference:
    """
    Fraction of the user's train profile in each category. An empty
    profile falls back to the catalog-wide long-tail rating mass.
    """
    items = list(profile)
    if not items:
        p_long = split.tail_rating_mass
    else:
        p_long = sum(1 for v in items if v in split.long_tail) / len(items)
    return UserCategoryPreference(p_long=p_long, p_short=1.0 - p_long)


__all__ = ["Category", "UserCategoryPreference", "user_category_preference"]
