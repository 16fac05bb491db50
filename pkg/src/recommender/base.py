"""Scored candidate lists and the base recommender interface"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

from src.exceptions import UnknownEntityError


@dataclass
class ScoredList:
    """Ordered (item, score) pairs for one user"""
    user: int
    entries: List[Tuple[int, float]] = field(default_factory=list)
    produced_by: str = "base"
    short: bool = False

    @property
    def items(self) -> List[int]:
        return [item for item, _ in self.entries]

    @property
    def scores(self) -> List[float]:
        return [score for _, score in self.entries]

    def head(self, n: int, produced_by: str = None) -> "ScoredList":
        return ScoredList(
            user=self.user,
            entries=list(self.entries[:n]),
            produced_by=produced_by or self.produced_by,
            short=len(self.entries) < n,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


class BaseRecommender(ABC):
    """
    Anything that scores every catalog item for a user.

    Subclasses provide `user_ids`, `item_ids` (sorted, defining dense
    indices) and `score_all`; ranking lives here.
    """
    label = "base"
    user_ids: np.ndarray
    item_ids: np.ndarray

    @property
    def user_index(self) -> Dict[int, int]:
        if getattr(self, "_user_index", None) is None:
            self._user_index = {int(u): i for i, u in enumerate(self.user_ids)}
        return self._user_index

    @property
    def item_index(self) -> Dict[int, int]:
        if getattr(self, "_item_index", None) is None:
            self._item_index = {int(v): i for i, v in enumerate(self.item_ids)}
        return self._item_index

    def _user_row(self, user: int) -> int:
        try:
            return self.user_index[user]
        except KeyError:
            raise UnknownEntityError(f"Unknown user: {user}") from None

    def _item_col(self, item: int) -> int:
        try:
            return self.item_index[item]
        except KeyError:
            raise UnknownEntityError(f"Unknown item: {item}") from None

    @abstractmethod
    def score_all(self, user: int) -> np.ndarray:
        """Scores for every item in dense index order"""

    def score(self, user: int, item: int) -> float:
        col = self._item_col(item)
        return float(self.score_all(user)[col])

    def top_n(self, user: int, n: int, exclude: Iterable[int] = ()) -> ScoredList:
        """
        The n highest-scoring items outside `exclude`, ties by item id
        ascending. Returns fewer (flagged short) when the catalog runs out.
        """
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")

        scores = self.score_all(user)
        allowed = np.ones(len(self.item_ids), dtype=bool)
        excluded_cols = [self.item_index[v] for v in exclude if v in self.item_index]
        allowed[excluded_cols] = False

        cols = np.flatnonzero(allowed)
        # item_ids are sorted, so dense index order is item id order
        order = cols[np.lexsort((cols, -scores[cols]))][:n]
        entries = [(int(self.item_ids[c]), float(scores[c])) for c in order]
        return ScoredList(user=user, entries=entries, produced_by=self.label, short=len(entries) < n)
