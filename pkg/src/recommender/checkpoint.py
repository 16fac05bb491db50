"""FactorModel checkpoints: numpy archive of the factor matrices plus a JSON manifest"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from src.exceptions import CacheMissingError
from src.recommender.rank_als import FactorModel

FACTORS_FILE = "factors.npz"
MANIFEST_FILE = "manifest.json"


def save_checkpoint(model: FactorModel, directory: Path, dataset_hash: str,
                    extra: Optional[Dict[str, Any]] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    np.savez(
        directory / FACTORS_FILE,
        user_factors=model.user_factors,
        item_factors=model.item_factors,
        user_ids=model.user_ids,
        item_ids=model.item_ids,
    )

    manifest = {
        **model.metadata,
        "trained_epochs": model.trained_epochs,
        "dataset_hash": dataset_hash,
        "objective_history": model.objective_history,
        **(extra or {}),
    }
    with open(directory / MANIFEST_FILE, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)

    logging.info(f"Saved checkpoint to {directory}")
    return directory


def read_manifest(directory: Path) -> Optional[Dict[str, Any]]:
    path = Path(directory) / MANIFEST_FILE
    if not path.exists():
        return None
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def load_checkpoint(directory: Path) -> FactorModel:
    directory = Path(directory)
    manifest = read_manifest(directory)
    if manifest is None or not (directory / FACTORS_FILE).exists():
        raise CacheMissingError(f"No checkpoint in {directory}; run the 'train' command first")

    with np.load(directory / FACTORS_FILE) as archive:
        model = FactorModel(
            user_factors=archive["user_factors"],
            item_factors=archive["item_factors"],
            user_ids=archive["user_ids"],
            item_ids=archive["item_ids"],
            trained_epochs=int(manifest.get("trained_epochs", 0)),
            objective_history=list(manifest.get("objective_history", [])),
            metadata={key: manifest[key] for key in ("k", "sweeps", "regularization", "seed", "variant")
                      if key in manifest},
        )
    logging.info(f"Loaded checkpoint from {directory} (k={model.k}, variant={model.metadata.get('variant')})")
    return model
