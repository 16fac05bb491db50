"""Temporal experiment: serve epochs of users, keep a per-algorithm ledger, collect metrics"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from src.dataset.cache import PreparedDataset
from src.dataset.splits import EpochPlan, assign_epochs
from src.evaluation.metrics import (
    EpochResult,
    arp,
    clcr,
    lcr,
    mean_ndcg,
    ndcg_at_k,
    per_user_arp,
)
from src.exceptions import SimulationError, TailRerankError
from src.recommender.base import BaseRecommender, ScoredList
from src.rerank.categories import UserCategoryPreference, user_category_preference
from src.rerank.ledger import HistoryLedger
from src.rerank.registry import resolve_algorithm
from src.rerank.xquad import LedgerCadence, RerankConfig, SmoothForm, Variant, rerank


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    algorithm: str
    lam: float = 0.0
    n_epochs: int = 50
    candidate_len: int = 100
    output_len: int = 10
    split_seed: int = 1
    epoch_seed: int = 2
    serve_seed: int = 3
    smooth_form: SmoothForm = SmoothForm.PER_ITEM_MASS
    ledger_cadence: LedgerCadence = LedgerCadence.PER_USER
    normalize_scores: bool = False

    def __post_init__(self):
        if self.candidate_len < self.output_len:
            raise ValueError(
                f"candidate_len ({self.candidate_len}) must be >= output_len ({self.output_len})"
            )
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        resolve_algorithm(self.algorithm)

    @property
    def variant(self) -> Optional[Variant]:
        return resolve_algorithm(self.algorithm)

    @property
    def label(self) -> str:
        return f"{self.algorithm}(lambda={self.lam})"

    def rerank_config(self) -> Optional[RerankConfig]:
        if self.variant is None:
            return None
        return RerankConfig(
            lam=self.lam,
            variant=self.variant,
            output_len=self.output_len,
            smooth_form=self.smooth_form,
            normalize_scores=self.normalize_scores,
        )

    def shared_key(self) -> tuple:
        """Fields every config of one suite must agree on"""
        return (self.dataset, self.n_epochs, self.candidate_len, self.output_len,
                self.split_seed, self.epoch_seed, self.serve_seed)


@dataclass
class RunTrace:
    config: RunConfig
    epoch_results: List[EpochResult] = field(default_factory=list)
    ledger: HistoryLedger = field(default_factory=HistoryLedger)

    @property
    def mean_lcr(self) -> float:
        return float(np.mean([r.lcr for r in self.epoch_results]))

    @property
    def final_clcr(self) -> float:
        return self.epoch_results[-1].clcr

    def per_user_ndcg(self) -> Dict[int, float]:
        merged: Dict[int, float] = {}
        for result in self.epoch_results:
            merged.update(result.per_user_ndcg)
        return merged

    def per_user_arp(self) -> Dict[int, float]:
        merged: Dict[int, float] = {}
        for result in self.epoch_results:
            merged.update(result.per_user_arp)
        return merged

    def per_epoch_lcr(self) -> Dict[int, float]:
        return {r.epoch: r.lcr for r in self.epoch_results}

    @property
    def mean_ndcg(self) -> float:
        values = list(self.per_user_ndcg().values())
        return float(np.mean(values)) if values else float("nan")

    @property
    def mean_arp(self) -> float:
        values = list(self.per_user_arp().values())
        return float(np.mean(values)) if values else float("nan")

    def epoch_lists(self) -> List[List[ScoredList]]:
        return [list(r.per_user_lists.values()) for r in self.epoch_results]

    def summed_clcr(self, prepared: PreparedDataset) -> float:
        return clcr(self.epoch_lists(), prepared.categories, mode="sum")


def serve_order(users: Sequence[int], serve_seed: int, epoch: int) -> List[int]:
    """Seeded shuffle of one epoch's users; identical for every algorithm"""
    rng = np.random.default_rng([serve_seed, epoch])
    return [int(u) for u in rng.permutation(np.asarray(users, dtype=np.int64))]


def build_candidates(
    model: BaseRecommender,
    prepared: PreparedDataset,
    users: Iterable[int],
    candidate_len: int,
) -> Dict[int, ScoredList]:
    """Top-candidate_len lists excluding each user's train profile, computed once per user"""
    candidates = {}
    for user in users:
        candidates[int(user)] = model.top_n(int(user), candidate_len, exclude=prepared.train.profile(int(user)))
    short = sum(1 for lst in candidates.values() if lst.short)
    logging.info(f"Built {len(candidates)} candidate lists of length {candidate_len} ({short} short)")
    return candidates


def build_preferences(prepared: PreparedDataset, users: Iterable[int]) -> Dict[int, UserCategoryPreference]:
    return {
        int(u): user_category_preference(prepared.train.profile(int(u)), prepared.categories)
        for u in users
    }


def _epoch_result(
    epoch: int,
    lists: Dict[int, ScoredList],
    prepared: PreparedDataset,
    popularity: Dict[int, int],
    relevance: Dict[int, set],
    ledger: HistoryLedger,
    k: int,
) -> EpochResult:
    served = list(lists.values())
    non_empty = [lst for lst in served if len(lst)]
    ndcg, evaluated, skipped = mean_ndcg(served, relevance, k)

    per_user_ndcg = {}
    for lst in non_empty:
        value = ndcg_at_k(lst, relevance.get(lst.user, set()), k)
        if value is not None:
            per_user_ndcg[lst.user] = value

    return EpochResult(
        epoch=epoch,
        per_user_lists=lists,
        arp=arp(served, popularity) if non_empty else float("nan"),
        lcr=lcr(served, prepared.categories),
        clcr=ledger.long_tail_coverage(prepared.categories),
        ndcg=ndcg,
        users_evaluated=evaluated,
        users_skipped=skipped,
        per_user_ndcg=per_user_ndcg,
        per_user_arp=per_user_arp(non_empty, popularity),
    )


def run(
    config: RunConfig,
    prepared: PreparedDataset,
    model: BaseRecommender,
    plan: Optional[EpochPlan] = None,
    candidates: Optional[Dict[int, ScoredList]] = None,
    show_progress: bool = False,
) -> RunTrace:
    """Simulate config.n_epochs epochs for one algorithm with its own ledger"""
    test_users = prepared.test_users()
    if plan is None:
        plan = assign_epochs(test_users, config.n_epochs, config.epoch_seed)
    if candidates is None:
        candidates = build_candidates(model, prepared, test_users, config.candidate_len)

    variant = config.variant
    rerank_cfg = config.rerank_config()
    split = prepared.categories
    preferences = build_preferences(prepared, test_users) if variant is not None else {}
    popularity = prepared.train.popularity_map()
    relevance = {int(u): prepared.test.profile(int(u)) for u in test_users}
    per_epoch = config.ledger_cadence == LedgerCadence.PER_EPOCH

    logging.info(f"Running {config.label} on {config.dataset}: {plan.n_epochs} epochs, {len(test_users)} users")
    trace = RunTrace(config=config)
    ledger = trace.ledger

    for epoch in tqdm(range(plan.n_epochs), desc=config.label, disable=not show_progress):
        context = ledger.snapshot() if per_epoch else ledger
        lists: Dict[int, ScoredList] = {}

        for user in serve_order(plan.users_in(epoch), config.serve_seed, epoch):
            pool = candidates.get(user, ScoredList(user=user, short=True))
            if variant is None:
                served = pool.head(config.output_len, produced_by=config.algorithm)
            else:
                served = rerank(pool, preferences[user], split, rerank_cfg,
                                context if variant.is_temporal else None)
            lists[user] = served
            if not per_epoch:
                ledger.record(served, split)

        if per_epoch:
            for served in lists.values():
                ledger.record(served, split)

        result = _epoch_result(epoch, lists, prepared, popularity, relevance, ledger, config.output_len)
        trace.epoch_results.append(result)
        logging.debug(f"{config.label} epoch {epoch}: arp={result.arp:.2f} lcr={result.lcr:.5f} "
                      f"clcr={result.clcr:.5f} ndcg={result.ndcg:.4f}")

    logging.info(f"{config.label}: mean LCR {trace.mean_lcr:.5f}, final CLCR {trace.final_clcr:.5f}, "
                 f"mean NDCG {trace.mean_ndcg:.4f}")
    return trace


def _run_named(config: RunConfig, prepared, model, plan, candidates, show_progress) -> RunTrace:
    try:
        return run(config, prepared, model, plan=plan, candidates=candidates, show_progress=show_progress)
    except Exception as e:
        logging.error(f"Run {config.label} failed: {e}")
        raise SimulationError(f"Run {config.label} failed: {e}") from e


def run_suite(
    configs: Sequence[RunConfig],
    prepared: PreparedDataset,
    model: BaseRecommender,
    n_jobs: int = 1,
    show_progress: bool = False,
) -> List[RunTrace]:
    """
    One trace per config, all sharing the epoch plan, serve order and
    candidate lists so results pair up user by user.
    """
    if not configs:
        raise ValueError("run_suite needs at least one config")
    keys = {cfg.shared_key() for cfg in configs}
    if len(keys) > 1:
        raise SimulationError(f"Configs in one suite must share dataset, epochs, lengths and seeds: {keys}")

    first = configs[0]
    test_users = prepared.test_users()
    try:
        plan = assign_epochs(test_users, first.n_epochs, first.epoch_seed)
        candidates = build_candidates(model, prepared, test_users, first.candidate_len)
    except TailRerankError as e:
        raise SimulationError(f"Suite setup failed for {first.label}: {e}") from e

    return Parallel(n_jobs=n_jobs)(
        delayed(_run_named)(cfg, prepared, model, plan, candidates, show_progress) for cfg in configs
    )
