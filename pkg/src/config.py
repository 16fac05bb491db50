import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from src.dataset.loader import RatingFormat, file_digest
from src.rerank.xquad import LedgerCadence, SmoothForm

load_dotenv()


class Config:
    # Project root directory (parent of src/)
    BASE_DIR = Path(__file__).resolve().parent.parent
    DATA_DIR = BASE_DIR / "data"
    OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(BASE_DIR / "outputs")))

    # Logging / execution
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    N_JOBS = int(os.getenv("N_JOBS", "1"))

    # Raw dataset locations (optional, used by the real-data tests)
    MOVIELENS_PATH = os.getenv("MOVIELENS_PATH")
    EPINIONS_PATH = os.getenv("EPINIONS_PATH")

    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    @classmethod
    def validate(cls):
        """Validate environments"""
        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Invalid LOG_LEVEL: {cls.LOG_LEVEL}")
        if cls.N_JOBS == 0:
            raise ValueError("N_JOBS must be non-zero")


# ============================================================================
# Experiment file schema
# ============================================================================

class DatasetSection(BaseModel):
    name: str
    path: Path
    format: RatingFormat = RatingFormat.MOVIELENS_1M
    rating_scale: Tuple[float, float] = (1.0, 5.0)

    @field_validator("path")
    @classmethod
    def _path_exists(cls, value: Path) -> Path:
        if not value.exists():
            raise ValueError(f"Dataset file not found: {value}")
        return value

    @field_validator("rating_scale")
    @classmethod
    def _scale_ordered(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] > value[1]:
            raise ValueError(f"rating_scale must be (low, high), got {value}")
        return value


class FilterSection(BaseModel):
    min_user_ratings: int = Field(default=20, ge=0)
    min_item_ratings: int = Field(default=20, ge=0)


class BaseSection(BaseModel):
    k: int = Field(default=10, ge=1)
    sweeps: int = Field(default=30, ge=1)
    regularization: float = Field(default=0.01, ge=0.0)
    seed: int = 42
    support_weight: bool = False


class SeedSection(BaseModel):
    split: int = 1
    epoch: int = 2
    serve: int = 3


class RerankSection(BaseModel):
    smooth_form: SmoothForm = SmoothForm.PER_ITEM_MASS
    ledger_cadence: LedgerCadence = LedgerCadence.PER_USER
    normalize_scores: bool = False


# MovieLens values; the Epinions config overrides them
DEFAULT_LAMBDAS = {
    "base": 0.0,
    "binary": 0.1,
    "smooth": 0.1,
    "time_binary": 0.1,
    "time_smooth": 0.05,
}


class ExperimentConfig(BaseModel):
    """Declarative experiment description loaded from YAML"""

    dataset: DatasetSection
    filter: FilterSection = Field(default_factory=FilterSection)
    head_mass: float = Field(default=0.8, gt=0.0, lt=1.0)
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    base: BaseSection = Field(default_factory=BaseSection)
    algorithms: Dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_LAMBDAS))
    n_epochs: int = Field(default=50, ge=1)
    candidate_len: int = Field(default=100, ge=1)
    output_len: int = Field(default=10, ge=1)
    seeds: SeedSection = Field(default_factory=SeedSection)
    rerank: RerankSection = Field(default_factory=RerankSection)
    output_dir: Optional[Path] = None
    n_jobs: int = Config.N_JOBS

    @field_validator("algorithms")
    @classmethod
    def _lambdas_non_negative(cls, value: Dict[str, float]) -> Dict[str, float]:
        for label, lam in value.items():
            if lam < 0:
                raise ValueError(f"lambda for '{label}' must be >= 0, got {lam}")
        return value

    @model_validator(mode="after")
    def _lengths_consistent(self) -> "ExperimentConfig":
        if self.candidate_len < self.output_len:
            raise ValueError(
                f"candidate_len ({self.candidate_len}) must be >= output_len ({self.output_len})"
            )
        if self.output_dir is None:
            self.output_dir = Config.OUTPUT_DIR / self.dataset.name
        return self

    @classmethod
    def load(cls, path: Path) -> "ExperimentConfig":
        """Read a YAML experiment file; relative paths resolve against its directory"""
        path = Path(path)
        with open(path, 'r', encoding='utf-8') as f:
            raw: Dict[str, Any] = yaml.safe_load(f) or {}

        base_dir = path.resolve().parent
        dataset = raw.get("dataset", {})
        if "path" in dataset and not Path(dataset["path"]).is_absolute():
            dataset["path"] = str(base_dir / dataset["path"])
        if raw.get("output_dir") and not Path(raw["output_dir"]).is_absolute():
            raw["output_dir"] = str(base_dir / raw["output_dir"])

        return cls.model_validate(raw)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Override every seed with a single value (the --seed flag)"""
        return self.model_copy(update={
            "seeds": SeedSection(split=seed, epoch=seed, serve=seed),
            "base": self.base.model_copy(update={"seed": seed}),
        })

    def with_output_dir(self, output_dir: Path) -> "ExperimentConfig":
        return self.model_copy(update={"output_dir": Path(output_dir)})

    @property
    def prepared_dir(self) -> Path:
        return self.output_dir / "prepared"

    @property
    def model_dir(self) -> Path:
        return self.output_dir / "model"

    @property
    def runs_dir(self) -> Path:
        return self.output_dir / "runs"

    def prepare_fingerprint(self) -> Dict[str, Any]:
        """Fields that determine the prepared cache contents, raw file included"""
        return {
            "dataset": self.dataset.name,
            "source": str(self.dataset.path.resolve()),
            "source_sha256": file_digest(self.dataset.path),
            "format": self.dataset.format.value,
            "rating_scale": list(self.dataset.rating_scale),
            "min_user_ratings": self.filter.min_user_ratings,
            "min_item_ratings": self.filter.min_item_ratings,
            "head_mass": self.head_mass,
            "test_fraction": self.test_fraction,
            "split_seed": self.seeds.split,
        }
