"""Base recommenders producing the candidate lists the re-rankers consume"""

from src.recommender.base import BaseRecommender, ScoredList
from src.recommender.rank_als import FactorModel, RankALSConfig, RankALSTrainer, train, pairwise_loss
from src.recommender.popularity import PopularityRanker
from src.recommender.checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "BaseRecommender",
    "ScoredList",
    "FactorModel",
    "RankALSConfig",
    "RankALSTrainer",
    "train",
    "pairwise_loss",
    "PopularityRanker",
    "save_checkpoint",
    "load_checkpoint",
]
