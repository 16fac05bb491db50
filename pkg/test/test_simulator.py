"""Pytest suite for the epoch simulator, its CSV writers and the log replay"""

import logging

import pandas as pd
import pytest

from src.dataset.cache import PreparedDataset
from src.dataset.interactions import Interactions
from src.dataset.loader import Rating, frame_from_records
from src.dataset.splits import CategorySplit, SplitData, assign_epochs
from src.exceptions import SimulationError
from src.recommender.base import ScoredList
from src.recommender.popularity import PopularityRanker
from src.rerank.categories import user_category_preference
from src.rerank.ledger import HistoryLedger
from src.rerank.xquad import LedgerCadence, RerankConfig, Variant, rerank
from src.simulation.replay import replay_matches, replay_metrics
from src.simulation.simulator import RunConfig, build_candidates, run, run_suite, serve_order
from src.simulation.writers import (
    LOG_HEADER,
    METRICS_HEADER,
    metrics_frame,
    recommendations_frame,
    summary_frame,
    sweep_frame,
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

RERANKERS = ["binary", "smooth", "time_binary", "time_smooth"]


# ============================================================================
# Fixtures
# ============================================================================

def _config(algorithm, lam=0.0, **overrides):
    fields = dict(dataset="synthetic", algorithm=algorithm, lam=lam, n_epochs=5,
                  candidate_len=30, output_len=10)
    fields.update(overrides)
    return RunConfig(**fields)


@pytest.fixture(scope="module")
def candidates(prepared, trained_model):
    return build_candidates(trained_model, prepared, prepared.test_users(), candidate_len=30)


@pytest.fixture(scope="module")
def base_trace(prepared, trained_model, candidates):
    return run(_config("base"), prepared, trained_model, candidates=candidates)


@pytest.fixture(scope="module")
def time_smooth_trace(prepared, trained_model, candidates):
    return run(_config("time_smooth", 0.05), prepared, trained_model, candidates=candidates)


def _toy_world():
    """
    Short head 1-12, long tail 20-22. Twenty filler users make the head
    popular; test users 1-3 hold two long-tail items in train (p_long = 2/3),
    test user 4 holds only short-head items (p_long = 0). Every test user's
    held-out rating is item 20, the single long-tail candidate.
    """
    train_records = [Rating(u, v, 4.0) for u in range(101, 121) for v in range(1, 13)]
    train_records.append(Rating(101, 20, 3.0))
    for user in (1, 2, 3):
        train_records += [Rating(user, 21, 4.0), Rating(user, 22, 4.0), Rating(user, 12, 4.0)]
    train_records.append(Rating(4, 12, 4.0))
    test_records = [Rating(user, 20, 5.0) for user in (1, 2, 3, 4)]

    full = Interactions.from_frame(frame_from_records(train_records + test_records))
    split = SplitData(
        train=Interactions.from_frame(frame_from_records(train_records), full.user_ids, full.item_ids),
        test=Interactions.from_frame(frame_from_records(test_records), full.user_ids, full.item_ids),
        seed=0,
    )
    categories = CategorySplit(
        long_tail=frozenset({20, 21, 22}),
        short_head=frozenset(range(1, 13)),
        threshold=3,
        head_mass=0.8,
        tail_rating_mass=0.03,
    )
    prepared = PreparedDataset(split=split, categories=categories, manifest={})
    return prepared, PopularityRanker(split.train)


# ============================================================================
# Integration Tests
# ============================================================================

def test_every_test_user_served_once(prepared, base_trace):
    served = [u for r in base_trace.epoch_results for u in r.per_user_lists]
    assert sorted(served) == sorted(int(u) for u in prepared.test_users())
    assert len(base_trace.epoch_results) == 5


def test_base_run_serves_candidate_prefix(base_trace, candidates):
    for result in base_trace.epoch_results:
        for user, served in result.per_user_lists.items():
            assert served.items == candidates[user].head(10).items
            assert served.produced_by == "base"


@pytest.mark.parametrize("algorithm", RERANKERS)
def test_lambda_zero_matches_base(prepared, trained_model, candidates, base_trace, algorithm):
    trace = run(_config(algorithm, 0.0), prepared, trained_model, candidates=candidates)
    for ours, theirs in zip(trace.epoch_results, base_trace.epoch_results):
        assert list(ours.per_user_lists) == list(theirs.per_user_lists)
        for user, served in ours.per_user_lists.items():
            assert served.items == theirs.per_user_lists[user].items
        assert (ours.lcr, ours.clcr, ours.arp) == (theirs.lcr, theirs.clcr, theirs.arp)


def test_clcr_monotone_and_ledger_conserved(prepared, time_smooth_trace):
    clcrs = [r.clcr for r in time_smooth_trace.epoch_results]
    assert clcrs == sorted(clcrs)

    ledger = time_smooth_trace.ledger
    slots = sum(len(lst) for r in time_smooth_trace.epoch_results for lst in r.per_user_lists.values())
    assert ledger.total_slots == slots
    assert ledger.count_long + ledger.count_short == ledger.total_slots
    assert len(ledger.seen_long) == round(time_smooth_trace.final_clcr * len(prepared.categories.long_tail))
    assert time_smooth_trace.final_clcr >= max(r.lcr for r in time_smooth_trace.epoch_results)


def test_single_epoch_clcr_equals_lcr(prepared, trained_model, candidates):
    trace = run(_config("smooth", 0.1, n_epochs=1), prepared, trained_model, candidates=candidates)
    assert trace.final_clcr == trace.epoch_results[0].lcr


def test_strong_time_smooth_serves_more_long_tail(prepared, trained_model, candidates, base_trace):
    trace = run(_config("time_smooth", 5.0), prepared, trained_model, candidates=candidates)
    assert trace.ledger.count_long > base_trace.ledger.count_long
    assert trace.mean_lcr >= base_trace.mean_lcr
    assert trace.final_clcr >= base_trace.final_clcr


def test_per_epoch_cadence_uses_epoch_start_snapshot(prepared, trained_model, candidates):
    config = _config("time_binary", 0.5, ledger_cadence=LedgerCadence.PER_EPOCH)
    trace = run(config, prepared, trained_model, candidates=candidates)
    rerank_cfg = RerankConfig(lam=0.5, variant=Variant.TIME_BINARY)

    first = trace.epoch_results[0]
    for user, served in first.per_user_lists.items():
        pref = user_category_preference(prepared.train.profile(user), prepared.categories)
        expected = rerank(candidates[user], pref, prepared.categories, rerank_cfg, HistoryLedger())
        assert served.items == expected.items


def test_runs_are_deterministic(prepared, trained_model):
    config = _config("time_smooth", 0.05)
    first = run(config, prepared, trained_model)
    second = run(config, prepared, trained_model)

    pd.testing.assert_frame_equal(metrics_frame(first), metrics_frame(second))
    pd.testing.assert_frame_equal(recommendations_frame(first, prepared.categories),
                                  recommendations_frame(second, prepared.categories))


def test_suite_shares_serve_order(prepared, trained_model):
    configs = [_config("base"), _config("smooth", 0.1), _config("time_smooth", 0.05)]
    traces = run_suite(configs, prepared, trained_model, n_jobs=1)

    assert [t.config.algorithm for t in traces] == ["base", "smooth", "time_smooth"]
    for epoch in range(5):
        orders = [list(t.epoch_results[epoch].per_user_lists) for t in traces]
        assert orders[0] == orders[1] == orders[2]


def test_time_binary_toy_world_saturates_after_first_epoch():
    prepared, ranker = _toy_world()
    config = _config("time_binary", 100.0, n_epochs=2, candidate_len=12,
                     ledger_cadence=LedgerCadence.PER_EPOCH)
    trace = run(config, prepared, ranker)
    base_prefix = list(range(1, 11))

    first, second = trace.epoch_results
    for user, served in first.per_user_lists.items():
        n_long = sum(1 for v in served.items if v in prepared.categories.long_tail)
        if user == 4:
            assert served.items == base_prefix
        else:
            assert n_long == 1
            assert served.items == [20] + list(range(1, 10))

    for served in second.per_user_lists.values():
        assert served.items == base_prefix
    assert second.clcr == first.clcr == pytest.approx(1 / 3)


def test_empty_candidate_list_is_served_and_skipped(prepared, trained_model, candidates):
    test_users = [int(u) for u in prepared.test_users()]
    starved_user = test_users[0]
    starved = dict(candidates)
    starved[starved_user] = ScoredList(user=starved_user, short=True)

    for algorithm, lam in (("base", 0.0), ("time_smooth", 0.05)):
        trace = run(_config(algorithm, lam), prepared, trained_model, candidates=starved)
        epoch = next(r for r in trace.epoch_results if starved_user in r.per_user_lists)

        assert len(epoch.per_user_lists[starved_user]) == 0
        assert starved_user not in epoch.per_user_ndcg
        assert epoch.users_skipped >= 1
        assert epoch.users_evaluated + epoch.users_skipped == len(epoch.per_user_lists)

        slots = sum(len(lst) for r in trace.epoch_results for lst in r.per_user_lists.values())
        assert trace.ledger.total_slots == slots


# ============================================================================
# Component Tests
# ============================================================================

def test_serve_order_is_seeded_permutation():
    users = list(range(1, 41))
    a = serve_order(users, serve_seed=3, epoch=0)

    assert sorted(a) == users
    assert a == serve_order(users, serve_seed=3, epoch=0)
    assert a != serve_order(users, serve_seed=3, epoch=1)


def test_metrics_and_log_frames(prepared, time_smooth_trace):
    metrics = metrics_frame(time_smooth_trace)
    log = recommendations_frame(time_smooth_trace, prepared.categories)

    assert list(metrics.columns) == METRICS_HEADER
    assert list(metrics["epoch"]) == list(range(5))
    assert list(log.columns) == LOG_HEADER
    assert len(log) == time_smooth_trace.ledger.total_slots
    assert log["rank"].min() == 1 and log["rank"].max() == 10
    assert set(log["category"]) <= {"head", "tail"}


def test_replay_reproduces_metrics(tmp_path, prepared, time_smooth_trace):
    path = tmp_path / "log.csv"
    recommendations_frame(time_smooth_trace, prepared.categories).to_csv(path, index=False)

    replayed = replay_metrics(pd.read_csv(path), prepared, k=10, n_epochs=5)
    metrics = metrics_frame(time_smooth_trace)

    assert replay_matches(metrics, replayed)
    assert list(replayed["lcr"]) == list(metrics["lcr"])
    assert list(replayed["clcr"]) == list(metrics["clcr"])


def test_summary_table(prepared, trained_model, candidates, base_trace, time_smooth_trace):
    zero = run(_config("binary", 0.0), prepared, trained_model, candidates=candidates)
    summary = summary_frame([base_trace, zero, time_smooth_trace], base_trace)

    assert {"Average LCR", "Average NDCG@10", "Average ARP", "Final CLCR"} <= set(summary.columns)
    base_row = summary.iloc[0]
    zero_row = summary.iloc[1]
    assert base_row["lcr_marker"] in ("", "**")
    for column in ("Average LCR", "Average NDCG@10", "Average ARP", "Final CLCR"):
        assert zero_row[column] == base_row[column]
    assert zero_row["ndcg_p"] == 1.0
    assert zero_row["ndcg_marker"] == "~"


def test_sweep_rows_sorted(prepared, trained_model, candidates):
    traces = [run(_config("smooth", lam), prepared, trained_model, candidates=candidates) for lam in (0.5, 0.0, 0.1)]
    frame = sweep_frame(traces)
    assert list(frame["lambda"]) == [0.0, 0.1, 0.5]


# ============================================================================
# Edge Cases & Error Handling
# ============================================================================

def test_suite_rejects_mixed_seeds(prepared, trained_model):
    with pytest.raises(SimulationError):
        run_suite([_config("base"), _config("smooth", 0.1, serve_seed=99)], prepared, trained_model)


def test_run_config_rejects_bad_values():
    with pytest.raises(ValueError):
        _config("smooth", 0.1, candidate_len=5)
    with pytest.raises(ValueError):
        _config("smooth", -1.0)
    with pytest.raises(NotImplementedError):
        _config("reg", 0.05)


def test_too_many_epochs(prepared, trained_model, candidates):
    n_users = len(prepared.test_users())
    with pytest.raises(ValueError):
        run(_config("base", n_epochs=n_users + 1), prepared, trained_model, candidates=candidates)


def test_epoch_plan_can_be_shared(prepared, trained_model, candidates):
    plan = assign_epochs(prepared.test_users(), 5, seed=2)
    trace = run(_config("base"), prepared, trained_model, plan=plan, candidates=candidates)
    for epoch, result in enumerate(trace.epoch_results):
        assert sorted(result.per_user_lists) == plan.users_in(epoch)


# ============================================================================
# Performance Tests
# ============================================================================

@pytest.mark.slow
def test_parallel_suite_matches_sequential(prepared, trained_model):
    configs = [_config(label, 0.1) for label in ["base"] + RERANKERS]
    sequential = run_suite(configs, prepared, trained_model, n_jobs=1)
    parallel = run_suite(configs, prepared, trained_model, n_jobs=2)

    for a, b in zip(sequential, parallel):
        pd.testing.assert_frame_equal(metrics_frame(a), metrics_frame(b))
