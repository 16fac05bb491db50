"""Append-only record of everything recommended so far"""

import copy
from dataclasses import dataclass, field
from typing import Set

from src.dataset.splits import Category, CategorySplit
from src.recommender.base import ScoredList


@dataclass
class HistoryLedger:
    """
    Items served from the first epoch up to now.

    Keeps both slot counters (multiplicity) and the distinct item set, so
    either reading of the history is available.
    """
    seen_items: Set[int] = field(default_factory=set)
    seen_long: Set[int] = field(default_factory=set)
    total_slots: int = 0
    count_long: int = 0
    count_short: int = 0

    def count(self, category: Category) -> int:
        return self.count_long if category == Category.LONG_TAIL else self.count_short

    def covers(self, category: Category) -> bool:
        return self.count(category) > 0

    def record(self, served: ScoredList, split: CategorySplit) -> "HistoryLedger":
        for item in served.items:
            self.seen_items.add(item)
            if split.category_of(item) == Category.LONG_TAIL:
                self.seen_long.add(item)
                self.count_long += 1
            else:
                self.count_short += 1
            self.total_slots += 1
        return self

    def snapshot(self) -> "HistoryLedger":
        return copy.deepcopy(self)

    def long_tail_coverage(self, split: CategorySplit) -> float:
        if not split.long_tail:
            return 0.0
        return len(self.seen_long) / len(split.long_tail)


def record(ledger: HistoryLedger, served: ScoredList, split: CategorySplit) -> HistoryLedger:
    return ledger.record(served, split)
