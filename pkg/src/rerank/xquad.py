"""
Greedy xQuAD re-ranking over the short-head / long-tail categories.

Each step scores every remaining candidate v as

    s(v) = P(v|u) + lambda * P(d_v|u) * coverage(d_v, context)

and moves the best one into the output. List-based variants judge
coverage against the list under construction; time-based variants judge
it against the history ledger, which stays fixed while one user's list
is built.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from src.dataset.splits import Category, CategorySplit
from src.recommender.base import ScoredList
from src.rerank.categories import UserCategoryPreference
from src.rerank.ledger import HistoryLedger


class Variant(str, Enum):
    BINARY = "binary"
    SMOOTH = "smooth"
    TIME_BINARY = "time_binary"
    TIME_SMOOTH = "time_smooth"

    @property
    def is_temporal(self) -> bool:
        return self in (Variant.TIME_BINARY, Variant.TIME_SMOOTH)

    @property
    def is_binary(self) -> bool:
        return self in (Variant.BINARY, Variant.TIME_BINARY)


class SmoothForm(str, Enum):
    PER_ITEM_MASS = "per_item_mass"
    CONSTANT_FRACTION = "constant_fraction"


class LedgerCadence(str, Enum):
    PER_USER = "per_user"
    PER_EPOCH = "per_epoch"


@dataclass(frozen=True)
class RerankConfig:
    lam: float
    variant: Variant
    output_len: int = 10
    smooth_form: SmoothForm = SmoothForm.PER_ITEM_MASS
    normalize_scores: bool = False

    def __post_init__(self):
        if self.output_len < 1:
            raise ValueError(f"output_len must be >= 1, got {self.output_len}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


Context = Union[Sequence[int], HistoryLedger]


def _coverage_from_counts(binary: bool, n_d: int, size: int, smooth_form: SmoothForm) -> float:
    """prod over context items of (1 - P(i|d, context)) given |context| and |context & d|"""
    if binary:
        return 1.0 if n_d == 0 else 0.0
    if size == 0:
        return 1.0
    if smooth_form == SmoothForm.PER_ITEM_MASS:
        return (1.0 - 1.0 / size) ** n_d
    return (1.0 - n_d / size) ** size


def coverage_term(
    variant: Variant,
    category: Category,
    context: Context,
    split: CategorySplit,
    smooth_form: SmoothForm = SmoothForm.PER_ITEM_MASS,
) -> float:
    """Probability that category d is still uncovered by the context"""
    if variant.is_temporal:
        if not isinstance(context, HistoryLedger):
            raise TypeError(f"{variant.value} needs a HistoryLedger context")
        return _coverage_from_counts(variant.is_binary, context.count(category), context.total_slots, smooth_form)

    if isinstance(context, HistoryLedger):
        raise TypeError(f"{variant.value} needs the list under construction as context")
    n_d = sum(1 for v in context if split.category_of(v) == category)
    return _coverage_from_counts(variant.is_binary, n_d, len(context), smooth_form)


def diversity_score(
    item: int,
    pref: UserCategoryPreference,
    split: CategorySplit,
    variant: Variant,
    context: Context,
    smooth_form: SmoothForm = SmoothForm.PER_ITEM_MASS,
) -> float:
    """sum_d P(d|u) P(v|d) coverage(d); P(v|d) is an indicator so one term survives"""
    category = split.category_of(item)
    return pref.of(category) * coverage_term(variant, category, context, split, smooth_form)


def rerank(
    candidates: ScoredList,
    pref: UserCategoryPreference,
    split: CategorySplit,
    config: RerankConfig,
    ledger: Optional[HistoryLedger] = None,
) -> ScoredList:
    """Greedy construction of the output list; emitted scores are s at selection time"""
    n = len(candidates)
    steps = min(config.output_len, n)
    result = ScoredList(user=candidates.user, produced_by=config.variant.value,
                        short=n < config.output_len)
    if steps == 0:
        return result

    if config.variant.is_temporal and ledger is None:
        ledger = HistoryLedger()

    items = np.array(candidates.items, dtype=np.int64)
    base = np.array(candidates.scores, dtype=np.float64)
    is_long = np.array([v in split.long_tail for v in candidates.items], dtype=bool)
    # ties: higher base score first, then lower item id
    tie_rank = np.empty(n, dtype=np.int64)
    tie_rank[np.lexsort((items, -base))] = np.arange(n)

    relevance = base
    if config.normalize_scores:
        spread = base.max() - base.min()
        relevance = (base - base.min()) / spread if spread > 0 else np.ones(n)

    binary = config.variant.is_binary
    if config.variant.is_temporal:
        cov_long = _coverage_from_counts(binary, ledger.count_long, ledger.total_slots, config.smooth_form)
        cov_short = _coverage_from_counts(binary, ledger.count_short, ledger.total_slots, config.smooth_form)

    remaining = np.ones(n, dtype=bool)
    n_long = n_short = 0
    for step in range(steps):
        if not config.variant.is_temporal:
            cov_long = _coverage_from_counts(binary, n_long, step, config.smooth_form)
            cov_short = _coverage_from_counts(binary, n_short, step, config.smooth_form)

        bonus = np.where(is_long, pref.p_long * cov_long, pref.p_short * cov_short)
        s = relevance + config.lam * bonus
        masked = np.where(remaining, s, -np.inf)
        tied = np.flatnonzero(masked == masked.max())
        pick = tied[np.argmin(tie_rank[tied])]

        remaining[pick] = False
        if is_long[pick]:
            n_long += 1
        else:
            n_short += 1
        result.entries.append((int(items[pick]), float(s[pick])))

    return result
