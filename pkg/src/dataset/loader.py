"""Raw rating file parsing for the MovieLens 1M and Epinions formats"""

import hashlib
import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple

import pandas as pd

from src.exceptions import MalformedRecordError

RATING_COLUMNS = ["user", "item", "rating", "timestamp"]

_EPINIONS_SPLIT = re.compile(r"[,\s]+")


def file_digest(path: Path, chunk_size: int = 1 << 20) -> str:
    """SHA-256 of a raw file, read in chunks"""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RatingFormat(str, Enum):
    MOVIELENS_1M = "movielens_1m"
    EPINIONS = "epinions"


@dataclass(frozen=True)
class Rating:
    user: int
    item: int
    value: float
    timestamp: Optional[int] = None


@dataclass
class ParseResult:
    """Ratings parsed from one file plus the accounting of what was not"""
    ratings: pd.DataFrame
    path: Path
    n_lines: int
    skipped: int = 0
    skipped_examples: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def n_valid(self) -> int:
        return len(self.ratings)

    def records(self) -> Iterator[Rating]:
        for row in self.ratings.itertuples(index=False):
            ts = None if pd.isna(row.timestamp) else int(row.timestamp)
            yield Rating(user=int(row.user), item=int(row.item), value=float(row.rating), timestamp=ts)


def parse_line(line: str, fmt: RatingFormat, scale: Tuple[float, float] = (1.0, 5.0)) -> Rating:
    """Turn one raw line into a Rating or raise MalformedRecordError"""
    text = line.strip()
    if fmt == RatingFormat.MOVIELENS_1M:
        fields = text.split("::")
        if len(fields) != 4:
            raise MalformedRecordError(f"expected 4 '::'-separated fields, got {len(fields)}")
    else:
        fields = _EPINIONS_SPLIT.split(text)
        if len(fields) < 3:
            raise MalformedRecordError(f"expected at least 3 fields, got {len(fields)}")

    try:
        user = int(fields[0])
        item = int(fields[1])
        value = float(fields[2])
        timestamp = int(fields[3]) if fmt == RatingFormat.MOVIELENS_1M else None
    except ValueError as e:
        raise MalformedRecordError(str(e)) from e

    if not math.isfinite(value) or not (scale[0] <= value <= scale[1]):
        raise MalformedRecordError(f"rating {value} outside scale {scale}")

    return Rating(user=user, item=item, value=value, timestamp=timestamp)


def parse_ratings(
    path: Path,
    fmt: RatingFormat,
    scale: Tuple[float, float] = (1.0, 5.0),
) -> ParseResult:
    """
    Parse a raw rating file into a DataFrame of Rating fields.

    Blank lines and '#'/'%' comment lines are not records; every other line
    either becomes a rating or is counted in `skipped`. Duplicate
    (user, item) pairs keep the last occurrence.
    """
    path = Path(path)
    logging.info(f"Parsing {fmt.value} ratings from {path}")

    users, items, values, stamps = [], [], [], []
    skipped = 0
    examples: List[Tuple[int, str]] = []
    n_lines = 0

    with open(path, 'r', encoding='utf-8', errors='replace') as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip() or line.lstrip().startswith(("#", "%")):
                continue
            n_lines += 1
            try:
                rating = parse_line(line, fmt, scale)
            except MalformedRecordError as e:
                skipped += 1
                if len(examples) < 10:
                    examples.append((line_no, str(e)))
                continue
            users.append(rating.user)
            items.append(rating.item)
            values.append(rating.value)
            stamps.append(rating.timestamp)

    frame = pd.DataFrame({
        "user": pd.Series(users, dtype="int64"),
        "item": pd.Series(items, dtype="int64"),
        "rating": pd.Series(values, dtype="float64"),
        "timestamp": pd.Series(stamps, dtype="Int64"),
    })

    before = len(frame)
    frame = frame.drop_duplicates(subset=["user", "item"], keep="last").reset_index(drop=True)
    if len(frame) < before:
        logging.warning(f"Dropped {before - len(frame)} duplicate (user, item) ratings, kept last")

    if skipped:
        first_line, reason = examples[0]
        logging.warning(f"Skipped {skipped} malformed lines in {path.name} (first at line {first_line}: {reason})")

    logging.info(f"Parsed {len(frame)} ratings from {n_lines} record lines")
    return ParseResult(
        ratings=frame,
        path=path,
        n_lines=n_lines,
        skipped=skipped,
        skipped_examples=examples,
    )


def frame_from_records(records: Iterable[Rating]) -> pd.DataFrame:
    """Build the rating DataFrame from Rating objects (tests, synthetic data)"""
    rows = [(r.user, r.item, r.value, r.timestamp) for r in records]
    frame = pd.DataFrame(rows, columns=RATING_COLUMNS)
    return frame.astype({"user": "int64", "item": "int64", "rating": "float64", "timestamp": "Int64"})
