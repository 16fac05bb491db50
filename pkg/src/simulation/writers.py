"""CSV outputs: per-epoch metrics, recommendation logs, summary and sweep tables"""

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.dataset.splits import CategorySplit
from src.evaluation.significance import best_algorithm, paired_significance, significance_marker
from src.exceptions import UndefinedMetricError
from src.simulation.simulator import RunTrace

METRICS_HEADER = ["dataset", "algorithm", "lambda", "epoch", "arp", "lcr", "clcr", "ndcg",
                  "users_evaluated", "users_skipped"]
LOG_HEADER = ["epoch", "user", "rank", "item", "score", "category"]


def metrics_frame(trace: RunTrace) -> pd.DataFrame:
    cfg = trace.config
    rows = [
        [cfg.dataset, cfg.algorithm, cfg.lam, r.epoch, r.arp, r.lcr, r.clcr, r.ndcg,
         r.users_evaluated, r.users_skipped]
        for r in trace.epoch_results
    ]
    return pd.DataFrame(rows, columns=METRICS_HEADER)


def recommendations_frame(trace: RunTrace, split: CategorySplit) -> pd.DataFrame:
    """One row per served slot, in serve order then rank order"""
    rows = []
    for result in trace.epoch_results:
        for user, served in result.per_user_lists.items():
            for rank, (item, score) in enumerate(served.entries, start=1):
                rows.append([result.epoch, user, rank, item, score, split.category_of(item).value])
    return pd.DataFrame(rows, columns=LOG_HEADER)


def write_trace(trace: RunTrace, split: CategorySplit, directory: Path,
                with_log: bool = True) -> Tuple[Path, Optional[Path]]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = trace.config.algorithm

    metrics_path = directory / f"{stem}_metrics.csv"
    metrics_frame(trace).to_csv(metrics_path, index=False)

    log_path = None
    if with_log:
        log_path = directory / f"{stem}_recommendations.csv"
        recommendations_frame(trace, split).to_csv(log_path, index=False)

    logging.info(f"Wrote {stem} outputs to {directory}")
    return metrics_path, log_path


def _p_value(candidate: Mapping[int, float], base: Mapping[int, float]) -> float:
    try:
        return paired_significance(candidate, base).p_value
    except UndefinedMetricError as e:
        logging.warning(f"Significance test skipped: {e}")
        return float("nan")


def _marker(candidate, base, higher_is_better: bool) -> str:
    try:
        return significance_marker(candidate, base, higher_is_better)
    except UndefinedMetricError:
        return ""


def _best(per_algorithm: Dict[str, Mapping[int, float]], higher_is_better: bool) -> Optional[str]:
    try:
        return best_algorithm(per_algorithm, higher_is_better)
    except UndefinedMetricError:
        return None


def summary_frame(traces: Sequence[RunTrace], base: RunTrace, summed_clcr: Optional[Dict[str, float]] = None
                  ) -> pd.DataFrame:
    """
    One row per algorithm with averaged metrics, paired p-values against
    the base ranker and significance markers. '~' not significantly
    different from base, '*' significantly worse than base, '**' best
    algorithm and significantly ahead of the runner-up.
    """
    k = base.config.output_len
    ndcg_col = f"Average NDCG@{k}"

    per_lcr = {t.config.algorithm: t.per_epoch_lcr() for t in traces}
    per_ndcg = {t.config.algorithm: t.per_user_ndcg() for t in traces}
    per_arp = {t.config.algorithm: t.per_user_arp() for t in traces}
    best = {
        "lcr": _best(per_lcr, higher_is_better=True),
        "ndcg": _best(per_ndcg, higher_is_better=True),
        "arp": _best(per_arp, higher_is_better=False),
    }

    rows: List[dict] = []
    for trace in traces:
        label = trace.config.algorithm
        is_base = trace is base
        row = {
            "algorithm": label,
            "lambda": trace.config.lam,
            "Average LCR": trace.mean_lcr,
            ndcg_col: trace.mean_ndcg,
            "Average ARP": trace.mean_arp,
            "Final CLCR": trace.final_clcr,
        }
        if summed_clcr is not None:
            row["Summed CLCR"] = summed_clcr.get(label, np.nan)

        for metric, per, higher in (("lcr", per_lcr, True), ("ndcg", per_ndcg, True), ("arp", per_arp, False)):
            if is_base:
                p_value, marker = np.nan, ""
            else:
                p_value = _p_value(per[label], per[base.config.algorithm])
                marker = _marker(per[label], per[base.config.algorithm], higher)
            if best[metric] == label:
                marker = "**"
            row[f"{metric}_p"] = p_value
            row[f"{metric}_marker"] = marker
        rows.append(row)

    return pd.DataFrame(rows)


def sweep_frame(traces: Sequence[RunTrace]) -> pd.DataFrame:
    rows = [
        {
            "dataset": t.config.dataset,
            "algorithm": t.config.algorithm,
            "lambda": t.config.lam,
            "mean_lcr": t.mean_lcr,
            "final_clcr": t.final_clcr,
            "mean_ndcg": t.mean_ndcg,
            "mean_arp": t.mean_arp,
        }
        for t in traces
    ]
    return pd.DataFrame(rows).sort_values("lambda", kind="stable").reset_index(drop=True)


def format_summary(summary: pd.DataFrame) -> str:
    """Console rendering of the summary table with markers next to values"""
    ndcg_col = next(c for c in summary.columns if c.startswith("Average NDCG"))
    shown = pd.DataFrame({
        "algorithm": summary["algorithm"],
        "lambda": summary["lambda"],
        "Average LCR": [f"{v:.5f}{m}" for v, m in zip(summary["Average LCR"], summary["lcr_marker"])],
        ndcg_col: [f"{v:.4f}{m}" for v, m in zip(summary[ndcg_col], summary["ndcg_marker"])],
        "Average ARP": [f"{v:.2f}{m}" for v, m in zip(summary["Average ARP"], summary["arp_marker"])],
        "Final CLCR": [f"{v:.5f}" for v in summary["Final CLCR"]],
    })
    return shown.to_string(index=False)
