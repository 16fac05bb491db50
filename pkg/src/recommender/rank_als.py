"""
RankALS: pairwise learning-to-rank matrix factorization trained with
alternating least squares.

Minimizes, over user factors P and item factors Q,

    sum_u sum_i sum_j c_ui s_j [ (p_u.q_i - p_u.q_j) - (r_ui - r_uj) ]^2
      + reg * (|P|^2 + |Q|^2)

where c_ui = 1 for rated pairs, s_j is the support weight of item j
(uniform by default) and r_uj = 0 for unrated pairs. The user half is an
exact per-user solve; the item half updates one item at a time with the
running sums adjusted after each update, so every block update is an
exact minimization and the objective never increases.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from scipy import linalg
from tqdm import tqdm

from src.dataset.interactions import Interactions
from src.exceptions import TrainingError
from src.recommender.base import BaseRecommender


@dataclass
class RankALSConfig:
    k: int = 10
    sweeps: int = 30
    regularization: float = 0.01
    seed: int = 42
    support_weight: bool = False
    show_progress: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.regularization < 0:
            raise ValueError(f"regularization must be >= 0, got {self.regularization}")

    @property
    def variant(self) -> str:
        return "support_weighted" if self.support_weight else "uniform_support"


@dataclass
class FactorModel(BaseRecommender):
    user_factors: np.ndarray
    item_factors: np.ndarray
    user_ids: np.ndarray
    item_ids: np.ndarray
    trained_epochs: int = 0
    objective_history: List[float] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    label = "rank_als"

    def __post_init__(self):
        if self.user_factors.shape[0] != len(self.user_ids):
            raise ValueError("user_factors rows do not match user_ids")
        if self.item_factors.shape[0] != len(self.item_ids):
            raise ValueError("item_factors rows do not match item_ids")
        self._user_index = None
        self._item_index = None

    @property
    def k(self) -> int:
        return self.user_factors.shape[1]

    def score_all(self, user: int) -> np.ndarray:
        return self.item_factors @ self.user_factors[self._user_row(user)]

    def score(self, user: int, item: int) -> float:
        return float(self.user_factors[self._user_row(user)] @ self.item_factors[self._item_col(item)])


class _PairwiseData:
    """Sparse ratings and the per-user constants both ALS halves need"""

    def __init__(self, train: Interactions, support_weight: bool):
        self.R = train.to_csr()
        self.R.sort_indices()
        self.Rc = self.R.tocsc()
        self.n_users, self.n_items = self.R.shape

        if support_weight and train.popularity.sum() > 0:
            pop = train.popularity.astype(np.float64)
            self.s = pop / pop.mean()
        else:
            self.s = np.ones(self.n_items)
        self.S = float(self.s.sum())

        self.rows = np.repeat(np.arange(self.n_users), np.diff(self.R.indptr))
        self.cols = self.R.indices
        self.vals = self.R.data
        self.count = np.diff(self.R.indptr).astype(np.float64)          # C_u
        self.rating_sum = np.asarray(self.R.sum(axis=1)).ravel()         # R_u
        self.support_rating_sum = self.R @ self.s                        # T_u

    def pairwise_loss(self, P: np.ndarray, Q: np.ndarray) -> float:
        pred = np.einsum("ij,ij->i", P[self.rows], Q[self.cols])
        err = pred - self.vals
        n = self.n_users
        a = np.bincount(self.rows, weights=err * err, minlength=n)
        b = np.bincount(self.rows, weights=err, minlength=n)

        qt = self.s @ Q
        Qt = Q.T @ (self.s[:, None] * Q)
        sv = self.s[self.cols] * self.vals
        m = P @ qt - self.support_rating_sum
        v = (np.einsum("ij,ij->i", P @ Qt, P)
             - 2.0 * np.bincount(self.rows, weights=sv * pred, minlength=n)
             + np.bincount(self.rows, weights=sv * self.vals, minlength=n))

        return float(np.sum(self.S * a - 2.0 * b * m + self.count * v))


def _solve_spd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return linalg.solve(A, b, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        return linalg.lstsq(A, b)[0]


class RankALSTrainer:
    """Single-writer trainer; produces an immutable FactorModel"""

    def __init__(self, train: Interactions, config: RankALSConfig):
        if train.n_ratings == 0:
            raise ValueError("Cannot train on an empty interaction set")
        self.train = train
        self.config = config
        self.data = _PairwiseData(train, config.support_weight)

        rng = np.random.default_rng(config.seed)
        self.P = rng.normal(0.0, 0.1, size=(train.n_users, config.k))
        self.Q = rng.normal(0.0, 0.1, size=(train.n_items, config.k))
        self.regI = config.regularization * np.eye(config.k)

        logging.info(
            f"RankALSTrainer initialized: {train.n_users} users, {train.n_items} items, "
            f"k={config.k}, reg={config.regularization}, {config.variant}"
        )

    def objective(self) -> float:
        reg = self.config.regularization
        penalty = reg * (float(np.sum(self.P * self.P)) + float(np.sum(self.Q * self.Q)))
        return self.data.pairwise_loss(self.P, self.Q) + penalty

    def _user_step(self) -> None:
        d, Q, s = self.data, self.Q, self.data.s
        qt = s @ Q
        Qt = Q.T @ (s[:, None] * Q)
        indptr, indices, values = d.R.indptr, d.R.indices, d.R.data

        for u in range(d.n_users):
            start, end = indptr[u], indptr[u + 1]
            if start == end:
                self.P[u] = 0.0
                continue
            idx = indices[start:end]
            r = values[start:end]
            Qr = Q[idx]
            n_rated = end - start

            q_bar = Qr.sum(axis=0)
            A = (d.S * (Qr.T @ Qr)
                 - np.outer(q_bar, qt) - np.outer(qt, q_bar)
                 + n_rated * Qt + self.regI)
            b = (d.S * (Qr.T @ r)
                 - q_bar * d.support_rating_sum[u]
                 - qt * r.sum()
                 + n_rated * (Qr.T @ (s[idx] * r)))
            self.P[u] = _solve_spd(A, b)

    def _item_step(self) -> None:
        d, P, Q, s = self.data, self.P, self.Q, self.data.s
        n_users = d.n_users

        qt = s @ Q
        pqt = P @ qt
        q_bar = d.R.astype(bool).astype(np.float64) @ Q
        pqb = np.einsum("ij,ij->i", P, q_bar)

        c = np.zeros(n_users)
        r = np.zeros(n_users)
        for i in range(d.n_items):
            start, end = d.Rc.indptr[i], d.Rc.indptr[i + 1]
            raters = d.Rc.indices[start:end]
            c[raters] = 1.0
            r[raters] = d.Rc.data[start:end]

            si = s[i]
            pq = P @ Q[i]
            # sums over j != i
            S_ex = d.S - si
            T_ex = d.support_rating_sum - si * r
            C_ex = d.count - c
            R_ex = d.rating_sum - c * r
            pqt_ex = pqt - si * pq
            pqb_ex = pqb - c * pq

            w = c * S_ex + si * C_ex
            rhs = c * (pqt_ex + S_ex * r - T_ex) + si * (pqb_ex - R_ex + C_ex * r)
            M = (P * w[:, None]).T @ P + self.regI
            q_new = _solve_spd(M, P.T @ rhs)

            delta = q_new - Q[i]
            p_delta = P @ delta
            pqt += si * p_delta
            pqb[raters] += p_delta[raters]
            Q[i] = q_new

            c[raters] = 0.0
            r[raters] = 0.0

    def fit(self) -> FactorModel:
        history = [self.objective()]
        logging.info(f"Initial objective: {history[0]:.6f}")

        sweeps = range(1, self.config.sweeps + 1)
        for sweep in tqdm(sweeps, desc="RankALS sweeps", disable=not self.config.show_progress):
            self._user_step()
            self._item_step()
            if not (np.all(np.isfinite(self.P)) and np.all(np.isfinite(self.Q))):
                logging.error(f"Non-finite factors after sweep {sweep}")
                raise TrainingError(sweep)

            value = self.objective()
            if not np.isfinite(value):
                raise TrainingError(sweep, "non-finite objective")
            if value > history[-1] * (1 + 1e-6) + 1e-12:
                logging.warning(f"Objective increased at sweep {sweep}: {history[-1]:.6f} -> {value:.6f}")
            history.append(value)
            logging.debug(f"Sweep {sweep}: objective {value:.6f}")

        logging.info(f"RankALS finished after {self.config.sweeps} sweeps, objective {history[-1]:.6f}")
        return FactorModel(
            user_factors=self.P.copy(),
            item_factors=self.Q.copy(),
            user_ids=self.train.user_ids.copy(),
            item_ids=self.train.item_ids.copy(),
            trained_epochs=self.config.sweeps,
            objective_history=history,
            metadata={
                "k": self.config.k,
                "sweeps": self.config.sweeps,
                "regularization": self.config.regularization,
                "seed": self.config.seed,
                "variant": self.config.variant,
            },
        )


def train(train: Interactions, config: RankALSConfig) -> FactorModel:
    """Train RankALS on the given interactions"""
    return RankALSTrainer(train, config).fit()


def pairwise_loss(model: FactorModel, train: Interactions, support_weight: bool = False) -> float:
    """Pairwise squared-error term of the objective, without regularization"""
    data = _PairwiseData(train, support_weight)
    return data.pairwise_loss(model.user_factors, model.item_factors)
