"""Popularity, long-tail coverage and ranking accuracy metrics"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from src.dataset.interactions import Interactions
from src.dataset.splits import CategorySplit
from src.exceptions import UndefinedMetricError
from src.recommender.base import ScoredList


@dataclass
class EpochResult:
    epoch: int
    per_user_lists: Dict[int, ScoredList]
    arp: float
    lcr: float
    clcr: float
    ndcg: float
    users_evaluated: int = 0
    users_skipped: int = 0
    per_user_ndcg: Dict[int, float] = field(default_factory=dict, repr=False)
    per_user_arp: Dict[int, float] = field(default_factory=dict, repr=False)


def per_user_arp(lists: Iterable[ScoredList], popularity: Mapping[int, int]) -> Dict[int, float]:
    """Mean popularity of each non-empty list, keyed by user"""
    return {
        lst.user: float(np.mean([popularity[v] for v in lst.items]))
        for lst in lists if len(lst) > 0
    }


def arp(lists: Iterable[ScoredList], popularity: Mapping[int, int]) -> float:
    """Mean over lists of the mean train popularity of the listed items"""
    lists = list(lists)
    per_list = [float(np.mean([popularity[v] for v in lst.items])) for lst in lists if len(lst) > 0]
    skipped = len(lists) - len(per_list)
    if skipped:
        logging.warning(f"ARP skipped {skipped} empty lists")
    if not per_list:
        raise UndefinedMetricError("ARP needs at least one non-empty list")
    return float(np.mean(per_list))


def covered_long_tail(lists: Iterable[ScoredList], split: CategorySplit) -> Set[int]:
    covered = set()
    for lst in lists:
        covered.update(v for v in lst.items if v in split.long_tail)
    return covered


def lcr(lists: Iterable[ScoredList], split: CategorySplit) -> float:
    """|union of lists & long tail| / |long tail|"""
    if not split.long_tail:
        raise UndefinedMetricError("LCR is undefined for an empty long tail")
    return len(covered_long_tail(lists, split)) / len(split.long_tail)


def clcr(history: Sequence[Iterable[ScoredList]], split: CategorySplit, mode: str = "union") -> float:
    """
    Cumulative long-tail coverage over every epoch in `history`.

    mode="union" counts distinct long-tail items across all epochs;
    mode="sum" adds up per-epoch LCR values (diagnostic only).
    """
    if not split.long_tail:
        raise UndefinedMetricError("CLCR is undefined for an empty long tail")
    if len(history) == 0:
        raise ValueError("CLCR needs at least one epoch")
    if mode == "sum":
        return float(sum(lcr(epoch, split) for epoch in history))
    if mode != "union":
        raise ValueError(f"Unknown CLCR mode: {mode}")
    covered = set()
    for epoch in history:
        covered |= covered_long_tail(epoch, split)
    return len(covered) / len(split.long_tail)


def ndcg_at_k(ranked: ScoredList, relevant: Set[int], k: int) -> Optional[float]:
    """Binary-relevance NDCG@k; None when the user has no relevant items"""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not relevant:
        return None
    dcg = sum(1.0 / math.log2(pos + 2) for pos, v in enumerate(ranked.items[:k]) if v in relevant)
    idcg = sum(1.0 / math.log2(pos + 2) for pos in range(min(k, len(relevant))))
    return dcg / idcg


def mean_ndcg(lists: Iterable[ScoredList], relevance: Mapping[int, Set[int]], k: int) -> Tuple[float, int, int]:
    """(mean NDCG@k over evaluable users, users evaluated, users skipped)"""
    values = []
    skipped = 0
    for lst in lists:
        value = ndcg_at_k(lst, relevance.get(lst.user, set()), k) if len(lst) else None
        if value is None:
            skipped += 1
        else:
            values.append(value)
    mean = float(np.mean(values)) if values else float("nan")
    return mean, len(values), skipped


def longtail_quality_count(split: CategorySplit, train: Interactions, min_avg: float = 3.0) -> int:
    """Long-tail items whose mean train rating is above min_avg"""
    means = train.mean_item_rating()
    count = 0
    for item, mean in zip(train.item_ids, means):
        if int(item) in split.long_tail and not np.isnan(mean) and mean > min_avg:
            count += 1
    return count
