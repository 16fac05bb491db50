"""Catalog, train/test and epoch partitioning"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List

import numpy as np
import pandas as pd

from src.dataset.interactions import Interactions
from src.exceptions import EmptyDatasetError


class Category(str, Enum):
    LONG_TAIL = "tail"
    SHORT_HEAD = "head"


@dataclass(frozen=True)
class CategorySplit:
    """Short-head / long-tail partition of the catalog by rating count"""
    long_tail: FrozenSet[int]
    short_head: FrozenSet[int]
    threshold: int
    head_mass: float
    tail_rating_mass: float = 0.0

    def category_of(self, item: int) -> Category:
        if item in self.short_head:
            return Category.SHORT_HEAD
        if item in self.long_tail:
            return Category.LONG_TAIL
        raise KeyError(f"Item {item} is not part of the catalog")

    def is_long_tail(self, item: int) -> bool:
        return item in self.long_tail

    @property
    def catalog(self) -> FrozenSet[int]:
        return self.long_tail | self.short_head

    def to_frame(self) -> pd.DataFrame:
        rows = [(v, Category.SHORT_HEAD.value) for v in self.short_head]
        rows += [(v, Category.LONG_TAIL.value) for v in self.long_tail]
        return pd.DataFrame(rows, columns=["item", "category"]).sort_values("item").reset_index(drop=True)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, threshold: int, head_mass: float,
                   tail_rating_mass: float) -> "CategorySplit":
        head = frame.loc[frame["category"] == Category.SHORT_HEAD.value, "item"]
        tail = frame.loc[frame["category"] == Category.LONG_TAIL.value, "item"]
        return cls(
            long_tail=frozenset(int(v) for v in tail),
            short_head=frozenset(int(v) for v in head),
            threshold=int(threshold),
            head_mass=float(head_mass),
            tail_rating_mass=float(tail_rating_mass),
        )


def split_categories(inter: Interactions, head_mass: float) -> CategorySplit:
    """
    Smallest popularity-sorted prefix holding >= head_mass of all ratings
    becomes the short head; everything else is the long tail.

    Items tied with the least popular prefix item join the short head so
    that `popularity > threshold` decides membership exactly.
    """
    if not 0.0 < head_mass < 1.0:
        raise ValueError(f"head_mass must be in (0, 1), got {head_mass}")

    popularity = inter.popularity
    total = int(popularity.sum())
    if total == 0:
        raise EmptyDatasetError("Cannot split categories of a catalog without ratings")

    # popularity descending, item id ascending
    order = np.lexsort((inter.item_ids, -popularity))
    cumulative = np.cumsum(popularity[order])
    boundary = int(np.searchsorted(cumulative, head_mass * total, side="left"))
    boundary_pop = int(popularity[order[boundary]])
    threshold = boundary_pop - 1

    is_head = popularity > threshold
    if int(is_head.sum()) > boundary + 1:
        logging.info(f"{int(is_head.sum()) - boundary - 1} items tied at popularity {boundary_pop} joined the short head")

    head_ratings = int(popularity[is_head].sum())
    split = CategorySplit(
        long_tail=frozenset(int(v) for v in inter.item_ids[~is_head]),
        short_head=frozenset(int(v) for v in inter.item_ids[is_head]),
        threshold=threshold,
        head_mass=head_mass,
        tail_rating_mass=1.0 - head_ratings / total,
    )
    logging.info(
        f"Category split: {len(split.short_head)} short-head items (> {threshold} ratings), "
        f"{len(split.long_tail)} long-tail items"
    )
    return split


@dataclass
class SplitData:
    train: Interactions
    test: Interactions
    seed: int


def split_train_test(inter: Interactions, test_fraction: float, seed: int) -> SplitData:
    """Per-user random holdout of ceil(test_fraction * |profile|) ratings"""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")

    frame = inter.ratings.drop(columns=["uidx", "iidx"])
    rng = np.random.default_rng(seed)
    keys = pd.Series(rng.random(len(frame)), index=frame.index)
    users = frame["user"]

    rank = keys.groupby(users).rank(method="first").to_numpy() - 1
    sizes = users.groupby(users).transform("size").to_numpy()
    # tolerance keeps e.g. 0.1 * 30 from rounding up to 4
    n_test = np.ceil(test_fraction * sizes - 1e-9)
    n_test = np.where(n_test >= sizes, 0, n_test)
    is_test = rank < n_test

    train = Interactions.from_frame(frame[~is_test], user_ids=inter.user_ids, item_ids=inter.item_ids)
    test = Interactions.from_frame(frame[is_test], user_ids=inter.user_ids, item_ids=inter.item_ids)
    logging.info(f"Train/test split (seed={seed}): {train.n_ratings} train, {test.n_ratings} test ratings")
    return SplitData(train=train, test=test, seed=seed)


@dataclass
class EpochPlan:
    n_epochs: int
    assignment: Dict[int, int]
    seed: int
    epochs: List[List[int]] = field(default_factory=list, repr=False)

    def users_in(self, epoch: int) -> List[int]:
        return self.epochs[epoch]

    def sizes(self) -> List[int]:
        return [len(e) for e in self.epochs]


def assign_epochs(test_users: Iterable[int], n_epochs: int, seed: int) -> EpochPlan:
    """Seeded permutation of the test users chunked into n_epochs near-equal groups"""
    if n_epochs < 1:
        raise ValueError(f"n_epochs must be >= 1, got {n_epochs}")
    users = np.array(sorted(int(u) for u in test_users), dtype=np.int64)
    if len(users) == 0:
        raise EmptyDatasetError("No test users to assign to epochs")
    if n_epochs > len(users):
        raise ValueError(f"n_epochs ({n_epochs}) exceeds the number of test users ({len(users)})")

    rng = np.random.default_rng(seed)
    permuted = rng.permutation(users)
    epochs = [sorted(int(u) for u in chunk) for chunk in np.array_split(permuted, n_epochs)]
    assignment = {u: e for e, chunk in enumerate(epochs) for u in chunk}
    return EpochPlan(n_epochs=n_epochs, assignment=assignment, seed=seed, epochs=epochs)
