"""Pytest suite for the base recommenders, RankALS training and checkpoints"""

import logging

import numpy as np
import pytest

from src.dataset.interactions import Interactions
from src.dataset.loader import Rating, frame_from_records
from src.exceptions import CacheMissingError, TrainingError, UnknownEntityError
from src.recommender.base import BaseRecommender
from src.recommender.checkpoint import load_checkpoint, read_manifest, save_checkpoint
from src.recommender.popularity import PopularityRanker
from src.recommender.rank_als import FactorModel, RankALSConfig, RankALSTrainer, pairwise_loss, train

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


# ============================================================================
# Fixtures
# ============================================================================

@pytest.fixture
def small_interactions():
    """Items 1 and 2 tie at two ratings each; item 3 has three, item 4 one"""
    records = [
        Rating(1, 1, 5.0), Rating(1, 3, 4.0),
        Rating(2, 2, 3.0), Rating(2, 3, 2.0),
        Rating(3, 1, 4.0), Rating(3, 2, 1.0), Rating(3, 3, 5.0), Rating(3, 4, 3.0),
    ]
    return Interactions.from_frame(frame_from_records(records))


@pytest.fixture
def rank_one_world():
    """Fully dense ratings r_ui = a_u * b_i"""
    rng = np.random.default_rng(11)
    a = rng.uniform(1.0, 2.0, size=8)
    b = np.array([1.0, 1.3, 1.6, 1.9, 2.2, 2.5])
    records = [Rating(u + 1, i + 1, float(a[u] * b[i])) for u in range(8) for i in range(6)]
    return Interactions.from_frame(frame_from_records(records)), a, b


def _brute_force_loss(inter: Interactions, P: np.ndarray, Q: np.ndarray, support_weight: bool) -> float:
    R = inter.to_csr().toarray()
    rated = R != 0
    pop = inter.popularity.astype(float)
    s = pop / pop.mean() if support_weight else np.ones(inter.n_items)
    total = 0.0
    for u in range(inter.n_users):
        for i in range(inter.n_items):
            if not rated[u, i]:
                continue
            for j in range(inter.n_items):
                err = (P[u] @ Q[i] - P[u] @ Q[j]) - (R[u, i] - R[u, j])
                total += s[j] * err * err
    return total


# ============================================================================
# Component Tests
# ============================================================================

def test_popularity_top_n_ties_by_item_id(small_interactions):
    ranker = PopularityRanker(small_interactions)
    result = ranker.top_n(1, 4)

    assert result.items == [3, 1, 2, 4]
    assert result.scores == [3.0, 2.0, 2.0, 1.0]
    assert result.produced_by == "popularity"
    assert not result.short


def test_top_n_excludes_profile(small_interactions):
    ranker = PopularityRanker(small_interactions)
    result = ranker.top_n(1, 2, exclude=small_interactions.profile(1))
    assert result.items == [2, 4]


def test_top_n_short_when_catalog_runs_out(small_interactions):
    ranker = PopularityRanker(small_interactions)
    result = ranker.top_n(3, 10, exclude={1, 2})

    assert result.items == [3, 4]
    assert result.short


@pytest.mark.parametrize("support_weight", [False, True])
def test_pairwise_loss_matches_brute_force(small_interactions, support_weight):
    rng = np.random.default_rng(4)
    model = FactorModel(
        user_factors=rng.normal(size=(small_interactions.n_users, 3)),
        item_factors=rng.normal(size=(small_interactions.n_items, 3)),
        user_ids=small_interactions.user_ids,
        item_ids=small_interactions.item_ids,
    )
    expected = _brute_force_loss(small_interactions, model.user_factors, model.item_factors, support_weight)
    assert pairwise_loss(model, small_interactions, support_weight) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("support_weight", [False, True])
def test_objective_non_increasing(prepared, support_weight):
    model = train(prepared.train, RankALSConfig(k=4, sweeps=8, seed=3, support_weight=support_weight))
    history = model.objective_history

    assert len(history) == 9
    for before, after in zip(history, history[1:]):
        assert after <= before * (1 + 1e-6) + 1e-9
    assert history[-1] < history[0]
    assert model.metadata["variant"] == ("support_weighted" if support_weight else "uniform_support")


def test_factors_finite_and_seeded(prepared):
    config = RankALSConfig(k=3, sweeps=3, seed=9)
    first = train(prepared.train, config)
    second = train(prepared.train, config)

    assert np.all(np.isfinite(first.user_factors)) and np.all(np.isfinite(first.item_factors))
    assert np.array_equal(first.user_factors, second.user_factors)
    assert np.array_equal(first.item_factors, second.item_factors)


def test_rank_one_recovery(rank_one_world):
    """A rank-1 rating matrix is fit almost exactly and its item order recovered"""
    inter, a, b = rank_one_world
    model = train(inter, RankALSConfig(k=1, sweeps=200, regularization=1e-8, seed=0))

    assert pairwise_loss(model, inter) < 1e-4
    expected_order = [int(v) for v in inter.item_ids[np.argsort(-b)]]
    for user in inter.user_ids:
        assert model.top_n(int(user), 6).items == expected_order


class _ShiftedRanker(BaseRecommender):
    """Another recommender's scores plus a constant"""

    label = "shifted"

    def __init__(self, inner: BaseRecommender, shift: float):
        self.inner = inner
        self.shift = shift
        self.user_ids = inner.user_ids
        self.item_ids = inner.item_ids

    def score_all(self, user: int) -> np.ndarray:
        return self.inner.score_all(user) + self.shift


def test_top_n_is_prefix_of_longer_list(prepared, trained_model):
    for user in prepared.test_users()[:15]:
        user = int(user)
        exclude = prepared.train.profile(user)
        for n in (1, 5, 10, 29):
            shorter = trained_model.top_n(user, n, exclude)
            longer = trained_model.top_n(user, n + 1, exclude)
            assert longer.entries[:n] == shorter.entries


@pytest.mark.parametrize("shift", [3.0, -2.5])
def test_constant_shift_keeps_item_order(prepared, trained_model, shift):
    popularity = PopularityRanker(prepared.train)
    for base in (trained_model, popularity):
        shifted = _ShiftedRanker(base, shift)
        for user in prepared.test_users()[:15]:
            user = int(user)
            exclude = prepared.train.profile(user)
            assert shifted.top_n(user, 20, exclude).items == base.top_n(user, 20, exclude).items


def test_checkpoint_round_trip(tmp_path, prepared, trained_model):
    save_checkpoint(trained_model, tmp_path / "model", dataset_hash=prepared.train.content_hash())
    loaded = load_checkpoint(tmp_path / "model")
    manifest = read_manifest(tmp_path / "model")

    assert manifest["dataset_hash"] == prepared.train.content_hash()
    assert {"k", "seed", "sweeps", "variant", "objective_history"} <= set(manifest)
    for user in prepared.test_users()[:10]:
        user = int(user)
        exclude = prepared.train.profile(user)
        assert loaded.top_n(user, 10, exclude).entries == trained_model.top_n(user, 10, exclude).entries


# ============================================================================
# Edge Cases & Error Handling
# ============================================================================

def test_top_n_rejects_zero(small_interactions):
    with pytest.raises(ValueError):
        PopularityRanker(small_interactions).top_n(1, 0)


def test_unknown_user_and_item(trained_model):
    with pytest.raises(UnknownEntityError):
        trained_model.top_n(-1, 5)
    with pytest.raises(UnknownEntityError):
        trained_model.score(int(trained_model.user_ids[0]), -1)


@pytest.mark.parametrize("kwargs", [{"k": 0}, {"sweeps": 0}, {"regularization": -1.0}])
def test_bad_training_config(kwargs):
    with pytest.raises(ValueError):
        RankALSConfig(**kwargs)


def test_divergence_names_the_sweep(prepared, monkeypatch):
    monkeypatch.setattr(RankALSTrainer, "_user_step", lambda self: self.P.fill(np.nan))
    monkeypatch.setattr(RankALSTrainer, "_item_step", lambda self: None)
    with pytest.raises(TrainingError, match="sweep 1"):
        train(prepared.train, RankALSConfig(k=2, sweeps=3))


def test_missing_checkpoint_names_train(tmp_path):
    with pytest.raises(CacheMissingError, match="train"):
        load_checkpoint(tmp_path / "empty")
