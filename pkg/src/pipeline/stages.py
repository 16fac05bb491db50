"""
Experiment stages: prepare, train, run and sweep.

Each stage reads what the previous one left on disk under the
experiment's output directory and returns a small result dict that the
CLI prints and the workflow threads through its state.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import pandas as pd

from src.config import ExperimentConfig
from src.dataset.cache import PreparedCache, PreparedDataset, fingerprint_hash
from src.dataset.interactions import filter_interactions
from src.dataset.loader import RatingFormat, parse_ratings
from src.dataset.splits import split_categories, split_train_test
from src.evaluation.metrics import longtail_quality_count
from src.exceptions import CacheMissingError, TailRerankError
from src.recommender.checkpoint import load_checkpoint, read_manifest, save_checkpoint
from src.recommender.rank_als import FactorModel, RankALSConfig, train
from src.rerank.registry import BASE_LABEL, resolve_algorithm
from src.simulation.replay import replay_matches, replay_metrics
from src.simulation.simulator import RunConfig, RunTrace, run_suite
from src.simulation.writers import format_summary, metrics_frame, summary_frame, sweep_frame, write_trace

SUMMARY_FILE = "summary.csv"

# Published post-filter counts for the two real datasets: (users, items, ratings, threshold)
REFERENCE_COUNTS = {
    RatingFormat.MOVIELENS_1M: (6040, 3043, 995492, 506),
    RatingFormat.EPINIONS: (8144, 5195, 220117, 73),
}


def run_config(config: ExperimentConfig, algorithm: str, lam: float) -> RunConfig:
    """RunConfig for one algorithm of an experiment"""
    return RunConfig(
        dataset=config.dataset.name,
        algorithm=algorithm,
        lam=lam,
        n_epochs=config.n_epochs,
        candidate_len=config.candidate_len,
        output_len=config.output_len,
        split_seed=config.seeds.split,
        epoch_seed=config.seeds.epoch,
        serve_seed=config.seeds.serve,
        smooth_form=config.rerank.smooth_form,
        ledger_cadence=config.rerank.ledger_cadence,
        normalize_scores=config.rerank.normalize_scores,
    )


def _reference_block(fmt: RatingFormat, counts: Dict[str, int]) -> Dict[str, Any]:
    if fmt not in REFERENCE_COUNTS:
        return {}
    users, items, ratings, threshold = REFERENCE_COUNTS[fmt]
    return {
        "reference": {"n_users": users, "n_items": items, "n_ratings": ratings, "threshold": threshold},
        "discrepancy": {
            "n_users": counts["n_users"] - users,
            "n_items": counts["n_items"] - items,
            "n_ratings": counts["n_ratings"] - ratings,
            "threshold": counts["threshold"] - threshold,
        },
    }


def format_counts(manifest: Dict[str, Any]) -> str:
    """Counts table printed by the prepare stage"""
    rows = [
        ("record lines", manifest["n_lines"]),
        ("skipped lines", manifest["skipped_lines"]),
        ("parsed ratings", manifest["parsed_ratings"]),
        ("users", manifest["n_users"]),
        ("items", manifest["n_items"]),
        ("ratings", manifest["n_ratings"]),
        ("train ratings", manifest["train_ratings"]),
        ("test ratings", manifest["test_ratings"]),
        ("test users", manifest["test_users"]),
        ("short-head items", manifest["n_short_head"]),
        ("long-tail items", manifest["n_long_tail"]),
        ("threshold (> ratings)", manifest["threshold"]),
        ("long-tail items rated > 3", manifest["longtail_quality_count"]),
    ]
    frame = pd.DataFrame(rows, columns=["count", "value"])
    return frame.to_string(index=False)


def cmd_prepare(config: ExperimentConfig) -> Dict[str, Any]:
    """Parse, filter, split and cache the dataset; a no-op if the cache is current"""
    cache = PreparedCache(config.prepared_dir)
    fingerprint = config.prepare_fingerprint()
    config_hash = fingerprint_hash(fingerprint)
    if cache.is_current(config_hash):
        logging.info(f"Prepared dataset in {cache.directory} is current, skipping")
        return {"prepared_dir": str(cache.directory), "cache_hit": True, "manifest": cache.read_manifest()}

    try:
        parsed = parse_ratings(config.dataset.path, config.dataset.format, config.dataset.rating_scale)
        inter = filter_interactions(parsed.ratings, config.filter.min_user_ratings,
                                    config.filter.min_item_ratings)
        categories = split_categories(inter, config.head_mass)
        split = split_train_test(inter, config.test_fraction, config.seeds.split)
    except TailRerankError as e:
        logging.error(f"Preparing {config.dataset.path} failed: {e}")
        raise

    manifest: Dict[str, Any] = {
        "config_hash": config_hash,
        "fingerprint": fingerprint,
        "source": str(config.dataset.path),
        "n_lines": parsed.n_lines,
        "skipped_lines": parsed.skipped,
        "skipped_examples": [f"line {n}: {reason}" for n, reason in parsed.skipped_examples],
        "parsed_ratings": parsed.n_valid,
        "n_users": inter.n_users,
        "n_items": inter.n_items,
        "n_ratings": inter.n_ratings,
        "train_ratings": split.train.n_ratings,
        "test_ratings": split.test.n_ratings,
        "test_users": int(len(split.test.active_users())),
        "threshold": categories.threshold,
        "head_mass": categories.head_mass,
        "tail_rating_mass": categories.tail_rating_mass,
        "n_short_head": len(categories.short_head),
        "n_long_tail": len(categories.long_tail),
        "split_seed": split.seed,
        "longtail_quality_count": longtail_quality_count(categories, split.train),
        "train_hash": split.train.content_hash(),
    }
    manifest.update(_reference_block(config.dataset.format, manifest))

    cache.save(PreparedDataset(split=split, categories=categories, manifest=manifest))
    return {"prepared_dir": str(cache.directory), "cache_hit": False, "manifest": manifest}


def cmd_train(config: ExperimentConfig) -> Dict[str, Any]:
    """Train the base recommender on the cached train split and checkpoint it"""
    prepared = PreparedCache(config.prepared_dir).load()
    base_cfg = RankALSConfig(
        k=config.base.k,
        sweeps=config.base.sweeps,
        regularization=config.base.regularization,
        seed=config.base.seed,
        support_weight=config.base.support_weight,
        show_progress=True,
    )
    logging.info(f"Training RankALS (k={base_cfg.k}, sweeps={base_cfg.sweeps}, "
                 f"regularization={base_cfg.regularization}, {base_cfg.variant})")
    try:
        model = train(prepared.train, base_cfg)
    except TailRerankError as e:
        logging.error(f"Training failed: {e}")
        raise

    save_checkpoint(model, config.model_dir, dataset_hash=prepared.train.content_hash(),
                    extra={"prepared_hash": prepared.manifest.get("config_hash")})
    return {
        "model_dir": str(config.model_dir),
        "final_objective": model.objective_history[-1],
        "objective_history": model.objective_history,
    }


def _load_inputs(config: ExperimentConfig) -> Tuple[PreparedDataset, FactorModel]:
    prepared = PreparedCache(config.prepared_dir).load()
    model = load_checkpoint(config.model_dir)
    manifest = read_manifest(config.model_dir)
    if manifest.get("dataset_hash") != prepared.train.content_hash():
        raise CacheMissingError(
            f"Checkpoint in {config.model_dir} was trained on a different train split; "
            f"run the 'train' command again"
        )
    return prepared, model


def _check_replay(trace: RunTrace, log_path: Path, prepared: PreparedDataset) -> bool:
    log = pd.read_csv(log_path)
    replayed = replay_metrics(log, prepared, trace.config.output_len, trace.config.n_epochs)
    ok = replay_matches(metrics_frame(trace), replayed)
    if not ok:
        logging.warning(f"Replay of {log_path.name} disagrees with the incremental metrics")
    return ok


def cmd_run(config: ExperimentConfig) -> Dict[str, Any]:
    """Simulate the base ranking and every configured re-ranker, write CSVs and the summary"""
    algorithms: Dict[str, float] = {BASE_LABEL: 0.0}
    algorithms.update({label: lam for label, lam in config.algorithms.items() if label != BASE_LABEL})
    for label in algorithms:
        resolve_algorithm(label)

    prepared, model = _load_inputs(config)
    configs = [run_config(config, label, lam) for label, lam in algorithms.items()]
    traces = run_suite(configs, prepared, model, n_jobs=config.n_jobs, show_progress=True)

    runs_dir = config.runs_dir
    replay_ok = True
    for trace in traces:
        _, log_path = write_trace(trace, prepared.categories, runs_dir)
        replay_ok = _check_replay(trace, log_path, prepared) and replay_ok

    base = next(t for t in traces if t.config.algorithm == BASE_LABEL)
    summed = {t.config.algorithm: t.summed_clcr(prepared) for t in traces}
    summary = summary_frame(traces, base, summed_clcr=summed)
    summary_path = runs_dir / SUMMARY_FILE
    summary.to_csv(summary_path, index=False)
    logging.info(f"Wrote summary for {len(traces)} algorithms to {summary_path}")

    return {
        "runs_dir": str(runs_dir),
        "summary_path": str(summary_path),
        "summary": format_summary(summary),
        "replay_ok": replay_ok,
    }


def dedupe_lambdas(lambdas: Sequence[float]) -> List[float]:
    if len(lambdas) == 0:
        raise ValueError("sweep needs at least one lambda value")
    unique = sorted(set(float(lam) for lam in lambdas))
    if len(unique) < len(lambdas):
        logging.warning(f"Dropped {len(lambdas) - len(unique)} duplicate lambda values")
    return unique


def cmd_sweep(config: ExperimentConfig, algorithm: str, lambdas: Sequence[float]) -> Dict[str, Any]:
    """One run per lambda with shared seeds; rows sorted by lambda"""
    values = dedupe_lambdas(lambdas)
    resolve_algorithm(algorithm)

    prepared, model = _load_inputs(config)
    configs = [run_config(config, algorithm, lam) for lam in values]
    traces = run_suite(configs, prepared, model, n_jobs=config.n_jobs, show_progress=True)

    frame = sweep_frame(traces)
    config.runs_dir.mkdir(parents=True, exist_ok=True)
    path = config.runs_dir / f"sweep_{algorithm}.csv"
    frame.to_csv(path, index=False)
    logging.info(f"Wrote {len(frame)} sweep rows to {path}")
    return {"sweep_path": str(path), "table": frame.to_string(index=False)}
