"""Recompute per-epoch metrics from a written recommendation log"""

import logging
import math
from typing import Dict, List

import numpy as np
import pandas as pd

from src.dataset.cache import PreparedDataset
from src.simulation.writers import LOG_HEADER

REPLAY_COLUMNS = ["epoch", "arp", "lcr", "clcr", "ndcg", "users_evaluated"]


def _ndcg(ranked: List[int], relevant: set, k: int) -> float:
    dcg = sum(1.0 / math.log2(pos + 2) for pos, v in enumerate(ranked[:k]) if v in relevant)
    idcg = sum(1.0 / math.log2(pos + 2) for pos in range(min(k, len(relevant))))
    return dcg / idcg


def replay_metrics(log: pd.DataFrame, prepared: PreparedDataset, k: int, n_epochs: int) -> pd.DataFrame:
    """
    Rebuild arp, lcr, clcr and ndcg for every epoch using only the log rows,
    the train popularity and the test profiles. Users served an empty list
    leave no rows and so do not appear here.
    """
    missing = set(LOG_HEADER) - set(log.columns)
    if missing:
        raise ValueError(f"Recommendation log is missing columns: {sorted(missing)}")

    long_tail = prepared.categories.long_tail
    popularity = prepared.train.popularity_map()
    seen_long = set()
    rows = []

    by_epoch: Dict[int, pd.DataFrame] = {int(e): g for e, g in log.groupby("epoch", sort=True)}
    for epoch in range(n_epochs):
        group = by_epoch.get(epoch)
        per_list_pop = []
        ndcgs = []
        epoch_long = set()

        if group is not None:
            # groupby(sort=False) keeps first-appearance order, which is serve order
            for user, rows_u in group.groupby("user", sort=False):
                items = [int(v) for v in rows_u.sort_values("rank")["item"]]
                per_list_pop.append(float(np.mean([popularity[v] for v in items])))
                epoch_long.update(v for v in items if v in long_tail)
                relevant = prepared.test.profile(int(user))
                if relevant:
                    ndcgs.append(_ndcg(items, relevant, k))

        seen_long |= epoch_long
        rows.append({
            "epoch": epoch,
            "arp": float(np.mean(per_list_pop)) if per_list_pop else float("nan"),
            "lcr": len(epoch_long) / len(long_tail),
            "clcr": len(seen_long) / len(long_tail),
            "ndcg": float(np.mean(ndcgs)) if ndcgs else float("nan"),
            "users_evaluated": len(ndcgs),
        })

    logging.info(f"Replayed {len(log)} log rows over {n_epochs} epochs")
    return pd.DataFrame(rows, columns=REPLAY_COLUMNS)


def replay_matches(metrics: pd.DataFrame, replayed: pd.DataFrame, rtol: float = 1e-12) -> bool:
    """Coverage columns must agree exactly, averaged columns to rtol"""
    m = metrics.sort_values("epoch").reset_index(drop=True)
    r = replayed.sort_values("epoch").reset_index(drop=True)
    if len(m) != len(r):
        return False
    for column in ("lcr", "clcr", "users_evaluated"):
        if not (m[column].to_numpy() == r[column].to_numpy()).all():
            return False
    for column in ("arp", "ndcg"):
        if not np.allclose(m[column].to_numpy(dtype=float), r[column].to_numpy(dtype=float),
                           rtol=rtol, atol=0.0, equal_nan=True):
            return False
    return True
