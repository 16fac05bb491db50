"""Filtered rating collection with dense index maps and popularity counts"""

import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Set

import numpy as np
import pandas as pd
from scipy import sparse

from src.exceptions import EmptyDatasetError


@dataclass
class Interactions:
    """
    Ratings plus bijective id <-> dense index maps.

    `user_ids` / `item_ids` are sorted and define the dense indices
    0..U-1 / 0..V-1. They may cover more ids than appear in `ratings`
    (train and test splits share the full filtered catalog), in which
    case popularity of the missing items is 0.
    """
    ratings: pd.DataFrame
    user_ids: np.ndarray
    item_ids: np.ndarray
    user_index: Dict[int, int] = field(init=False, repr=False)
    item_index: Dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.user_index = {int(u): i for i, u in enumerate(self.user_ids)}
        self.item_index = {int(v): i for i, v in enumerate(self.item_ids)}
        self.ratings = self.ratings.assign(
            uidx=np.searchsorted(self.user_ids, self.ratings["user"].to_numpy()),
            iidx=np.searchsorted(self.item_ids, self.ratings["item"].to_numpy()),
        )

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        user_ids: Optional[np.ndarray] = None,
        item_ids: Optional[np.ndarray] = None,
    ) -> "Interactions":
        frame = frame.sort_values(["user", "item"], kind="mergesort").reset_index(drop=True)
        if user_ids is None:
            user_ids = np.unique(frame["user"].to_numpy())
        if item_ids is None:
            item_ids = np.unique(frame["item"].to_numpy())
        return cls(
            ratings=frame[[c for c in frame.columns if c not in ("uidx", "iidx")]],
            user_ids=np.asarray(user_ids, dtype=np.int64),
            item_ids=np.asarray(item_ids, dtype=np.int64),
        )

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_ratings(self) -> int:
        return len(self.ratings)

    @cached_property
    def popularity(self) -> np.ndarray:
        """Rating count per dense item index"""
        return np.bincount(self.ratings["iidx"].to_numpy(), minlength=self.n_items).astype(np.int64)

    def popularity_of(self, item: int) -> int:
        return int(self.popularity[self.item_index[item]])

    def popularity_map(self) -> Dict[int, int]:
        return {int(v): int(c) for v, c in zip(self.item_ids, self.popularity)}

    @cached_property
    def _profiles(self) -> Dict[int, np.ndarray]:
        grouped = self.ratings.groupby("user", sort=True)["item"]
        return {int(u): items.to_numpy() for u, items in grouped}

    def profile(self, user: int) -> Set[int]:
        """Item ids rated by the user (empty for users with no ratings here)"""
        items = self._profiles.get(user)
        return set() if items is None else {int(v) for v in items}

    def profile_array(self, user: int) -> np.ndarray:
        return self._profiles.get(user, np.empty(0, dtype=np.int64))

    def active_users(self) -> np.ndarray:
        """Ids of users with at least one rating in this collection"""
        return np.array(sorted(self._profiles.keys()), dtype=np.int64)

    def to_csr(self) -> sparse.csr_matrix:
        """U x V rating matrix in dense index space"""
        return sparse.csr_matrix(
            (
                self.ratings["rating"].to_numpy(dtype=np.float64),
                (self.ratings["uidx"].to_numpy(), self.ratings["iidx"].to_numpy()),
            ),
            shape=(self.n_users, self.n_items),
        )

    def mean_item_rating(self) -> np.ndarray:
        """Mean rating per dense item index, NaN where the item has no ratings"""
        sums = np.bincount(
            self.ratings["iidx"].to_numpy(),
            weights=self.ratings["rating"].to_numpy(dtype=np.float64),
            minlength=self.n_items,
        )
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.popularity > 0, sums / np.maximum(self.popularity, 1), np.nan)

    def content_hash(self) -> str:
        """Stable fingerprint of the (user, item, rating) triples"""
        digest = hashlib.sha256()
        for column in ("user", "item", "rating"):
            digest.update(np.ascontiguousarray(self.ratings[column].to_numpy()).tobytes())
        return digest.hexdigest()[:16]


def filter_interactions(ratings: pd.DataFrame, min_user: int, min_item: int) -> Interactions:
    """
    One pass of user filtering followed by one pass of item filtering.

    Not iterated to a fixed point: items removed in the second pass can
    leave some users below `min_user`.
    """
    if min_user < 0 or min_item < 0:
        raise ValueError(f"Filter thresholds must be >= 0, got ({min_user}, {min_item})")

    logging.info(f"Filtering {len(ratings)} ratings (min_user={min_user}, min_item={min_item})")

    user_counts = ratings.groupby("user")["item"].transform("size")
    kept = ratings[user_counts >= min_user]

    item_counts = kept.groupby("item")["user"].transform("size")
    kept = kept[item_counts >= min_item]

    if kept.empty:
        raise EmptyDatasetError(
            f"No ratings left after filtering with min_user={min_user}, min_item={min_item}"
        )

    inter = Interactions.from_frame(kept)
    logging.info(
        f"Filtered to {inter.n_users} users, {inter.n_items} items, {inter.n_ratings} ratings "
        f"({1 - inter.n_ratings / max(len(ratings), 1):.1%} reduction)"
    )
    return inter
