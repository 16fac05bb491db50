"""Deterministic most-popular ranker, used to exercise the re-rankers without factorization noise"""

import logging

import numpy as np

from src.dataset.interactions import Interactions
from src.recommender.base import BaseRecommender


class PopularityRanker(BaseRecommender):
    """score(u, v) = number of train ratings of v, identical for every user"""

    label = "popularity"

    def __init__(self, train: Interactions):
        self.user_ids = train.user_ids.copy()
        self.item_ids = train.item_ids.copy()
        self._scores = train.popularity.astype(np.float64)
        self._user_index = None
        self._item_index = None
        logging.info(f"PopularityRanker initialized over {len(self.item_ids)} items")

    def score_all(self, user: int) -> np.ndarray:
        self._user_row(user)
        return self._scores.copy()
