"""Synthetic long-tailed rating data for smoke runs and tests"""

import logging
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from src.dataset.loader import RATING_COLUMNS


def generate_ratings(
    n_users: int = 200,
    n_items: int = 150,
    ratings_per_user: Tuple[int, int] = (20, 60),
    popularity_exponent: float = 1.0,
    n_factors: int = 3,
    seed: int = 0,
) -> pd.DataFrame:
    """
    Users draw items without replacement with Zipf-like probabilities, so
    a few items collect most ratings. Ratings are integers 1..5 driven by
    a small latent-factor model plus noise.
    """
    rng = np.random.default_rng(seed)
    low, high = ratings_per_user
    high = min(high, n_items)
    low = min(low, high)

    weights = 1.0 / np.power(np.arange(1, n_items + 1), popularity_exponent)
    weights /= weights.sum()
    # shuffle so popularity does not follow item id order
    item_ids = rng.permutation(n_items) + 1

    user_latent = rng.normal(0.0, 1.0, size=(n_users, n_factors))
    item_latent = rng.normal(0.0, 1.0, size=(n_items, n_factors))

    rows = []
    for u in range(n_users):
        count = int(rng.integers(low, high + 1))
        chosen = rng.choice(n_items, size=count, replace=False, p=weights)
        affinity = item_latent[chosen] @ user_latent[u] / np.sqrt(n_factors)
        values = np.clip(np.rint(3.0 + 1.2 * affinity + rng.normal(0.0, 0.5, size=count)), 1, 5)
        for v, r in zip(chosen, values):
            rows.append((u + 1, int(item_ids[v]), float(r), 978300000 + len(rows)))

    frame = pd.DataFrame(rows, columns=RATING_COLUMNS)
    logging.debug(f"Generated {len(frame)} synthetic ratings for {n_users} users / {n_items} items")
    return frame.astype({"user": "int64", "item": "int64", "rating": "float64", "timestamp": "Int64"})


def write_movielens(frame: pd.DataFrame, path: Path) -> Path:
    """Write ratings as UserID::MovieID::Rating::Timestamp lines"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for row in frame.itertuples(index=False):
            ts = 0 if pd.isna(row.timestamp) else int(row.timestamp)
            f.write(f"{int(row.user)}::{int(row.item)}::{int(row.rating)}::{ts}\n")
    logging.info(f"Wrote {len(frame)} ratings to {path}")
    return path
