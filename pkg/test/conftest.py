"""Shared fixtures: small synthetic rating worlds and a trained base model"""

from pathlib import Path

import pytest

from src.config import ExperimentConfig
from src.dataset.cache import PreparedDataset
from src.dataset.interactions import filter_interactions
from src.dataset.splits import CategorySplit, split_categories, split_train_test
from src.dataset.synthetic import generate_ratings, write_movielens
from src.recommender.rank_als import RankALSConfig, train


@pytest.fixture(scope="session")
def synthetic_frame():
    """Long-tailed synthetic ratings (120 users, 80 items)"""
    return generate_ratings(n_users=120, n_items=80, ratings_per_user=(15, 40), seed=3)


@pytest.fixture(scope="session")
def synthetic_interactions(synthetic_frame):
    return filter_interactions(synthetic_frame, min_user=5, min_item=3)


@pytest.fixture(scope="session")
def prepared(synthetic_interactions):
    """Prepared dataset built in memory, without touching the cache"""
    categories = split_categories(synthetic_interactions, head_mass=0.8)
    split = split_train_test(synthetic_interactions, test_fraction=0.2, seed=1)
    return PreparedDataset(split=split, categories=categories, manifest={})


@pytest.fixture(scope="session")
def trained_model(prepared):
    return train(prepared.train, RankALSConfig(k=4, sweeps=5, regularization=0.01, seed=0))


@pytest.fixture
def toy_split():
    """Items 1-4 short head, 5-10 long tail"""
    return CategorySplit(
        long_tail=frozenset(range(5, 11)),
        short_head=frozenset(range(1, 5)),
        threshold=10,
        head_mass=0.8,
        tail_rating_mass=0.2,
    )


@pytest.fixture
def synthetic_ratings_file(tmp_path, synthetic_frame) -> Path:
    return write_movielens(synthetic_frame, tmp_path / "raw" / "ratings.dat")


@pytest.fixture
def experiment_config(tmp_path, synthetic_ratings_file) -> ExperimentConfig:
    """Small, fast experiment over the synthetic ratings file"""
    return ExperimentConfig.model_validate({
        "dataset": {"name": "synthetic", "path": str(synthetic_ratings_file), "format": "movielens_1m"},
        "filter": {"min_user_ratings": 5, "min_item_ratings": 3},
        "base": {"k": 4, "sweeps": 4, "seed": 0},
        "algorithms": {"base": 0.0, "binary": 0.1, "smooth": 0.1, "time_binary": 0.1, "time_smooth": 0.05},
        "n_epochs": 5,
        "candidate_len": 30,
        "output_len": 10,
        "output_dir": str(tmp_path / "outputs"),
        "n_jobs": 1,
    })
