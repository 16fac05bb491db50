"""Paired significance tests between algorithms"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional

import numpy as np
from scipy import stats

from src.exceptions import UndefinedMetricError

ALPHA = 0.05


@dataclass(frozen=True)
class SignificanceResult:
    p_value: float
    significant: bool
    mean_difference: float
    n: int


def paired_significance(per_user_a: Mapping[int, float], per_user_b: Mapping[int, float]) -> SignificanceResult:
    """
    Two-sided paired t-test over per-key differences.

    Zero-variance differences follow a fixed convention: all-zero gives
    p = 1, a nonzero constant gives p = 0.
    """
    if set(per_user_a) != set(per_user_b):
        raise UndefinedMetricError("Paired test needs identical key sets")
    if len(per_user_a) < 2:
        raise UndefinedMetricError("Paired test needs at least 2 pairs")

    keys = sorted(per_user_a)
    a = np.array([per_user_a[k] for k in keys], dtype=np.float64)
    b = np.array([per_user_b[k] for k in keys], dtype=np.float64)
    diff = a - b

    if np.all(diff == diff[0]):
        p_value = 1.0 if diff[0] == 0 else 0.0
    else:
        p_value = float(stats.ttest_rel(a, b).pvalue)

    return SignificanceResult(
        p_value=p_value,
        significant=p_value <= ALPHA,
        mean_difference=float(diff.mean()),
        n=len(keys),
    )


def significance_marker(candidate: Mapping[int, float], base: Mapping[int, float],
                        higher_is_better: bool) -> str:
    """'~' not significantly different from base, '*' significantly worse, '' otherwise"""
    result = paired_significance(candidate, base)
    if not result.significant:
        return "~"
    worse = result.mean_difference < 0 if higher_is_better else result.mean_difference > 0
    return "*" if worse else ""


def best_algorithm(per_algorithm: Dict[str, Mapping[int, float]], higher_is_better: bool) -> Optional[str]:
    """Label of the best algorithm if it beats the runner-up significantly"""
    if len(per_algorithm) < 2:
        return None
    means = {label: float(np.mean(list(values.values()))) for label, values in per_algorithm.items()}
    ranked = sorted(means, key=means.get, reverse=higher_is_better)
    best, runner_up = ranked[0], ranked[1]
    if means[best] == means[runner_up]:
        return None
    result = paired_significance(per_algorithm[best], per_algorithm[runner_up])
    return best if result.significant else None
