"""File-based prepared-dataset cache (tabular splits + JSON manifest)"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.dataset.interactions import Interactions
from src.dataset.splits import CategorySplit, SplitData
from src.exceptions import CacheMissingError

TRAIN_FILE = "train.tsv"
TEST_FILE = "test.tsv"
CATEGORIES_FILE = "categories.csv"
MANIFEST_FILE = "manifest.json"


def fingerprint_hash(fingerprint: Dict[str, Any]) -> str:
    payload = json.dumps(fingerprint, sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class PreparedDataset:
    split: SplitData
    categories: CategorySplit
    manifest: Dict[str, Any] = field(default_factory=dict)

    @property
    def train(self) -> Interactions:
        return self.split.train

    @property
    def test(self) -> Interactions:
        return self.split.test

    def test_users(self) -> np.ndarray:
        return self.split.test.active_users()


class PreparedCache:
    """Reads and writes a prepared dataset under one directory"""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    @property
    def manifest_path(self) -> Path:
        return self.directory / MANIFEST_FILE

    def exists(self) -> bool:
        return all((self.directory / name).exists()
                   for name in (TRAIN_FILE, TEST_FILE, CATEGORIES_FILE, MANIFEST_FILE))

    def read_manifest(self) -> Optional[Dict[str, Any]]:
        if not self.manifest_path.exists():
            return None
        with open(self.manifest_path, 'r', encoding='utf-8') as f:
            return json.load(f)

    def is_current(self, config_hash: str) -> bool:
        manifest = self.read_manifest()
        return self.exists() and manifest is not None and manifest.get("config_hash") == config_hash

    def save(self, prepared: PreparedDataset) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        columns = ["user", "item", "rating"]
        prepared.train.ratings[columns].to_csv(self.directory / TRAIN_FILE, sep="\t", index=False)
        prepared.test.ratings[columns].to_csv(self.directory / TEST_FILE, sep="\t", index=False)
        prepared.categories.to_frame().to_csv(self.directory / CATEGORIES_FILE, index=False)

        with open(self.manifest_path, 'w', encoding='utf-8') as f:
            json.dump(prepared.manifest, f, indent=2, sort_keys=True)

        logging.info(f"Saved prepared dataset to {self.directory}")

    def load(self) -> PreparedDataset:
        if not self.exists():
            raise CacheMissingError(
                f"Prepared dataset not found in {self.directory}; run the 'prepare' command first"
            )
        manifest = self.read_manifest()

        dtypes = {"user": "int64", "item": "int64", "rating": "float64"}
        train_frame = pd.read_csv(self.directory / TRAIN_FILE, sep="\t", dtype=dtypes)
        test_frame = pd.read_csv(self.directory / TEST_FILE, sep="\t", dtype=dtypes)

        # the filtered catalog is exactly the union of both splits
        user_ids = np.union1d(train_frame["user"].to_numpy(), test_frame["user"].to_numpy())
        item_ids = np.union1d(train_frame["item"].to_numpy(), test_frame["item"].to_numpy())
        train = Interactions.from_frame(train_frame, user_ids=user_ids, item_ids=item_ids)
        test = Interactions.from_frame(test_frame, user_ids=user_ids, item_ids=item_ids)

        categories = CategorySplit.from_frame(
            pd.read_csv(self.directory / CATEGORIES_FILE, dtype={"item": "int64", "category": str}),
            threshold=manifest["threshold"],
            head_mass=manifest["head_mass"],
            tail_rating_mass=manifest["tail_rating_mass"],
        )

        logging.info(f"Loaded prepared dataset from {self.directory}: "
                     f"{train.n_ratings} train / {test.n_ratings} test ratings")
        return PreparedDataset(
            split=SplitData(train=train, test=test, seed=int(manifest["split_seed"])),
            categories=categories,
            manifest=manifest,
        )
