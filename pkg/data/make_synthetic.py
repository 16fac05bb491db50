"""
Script to write a synthetic long-tailed rating file in the MovieLens format
"""

import sys
import logging
from pathlib import Path

import click

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import Config
from src.dataset.synthetic import generate_ratings, write_movielens


# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(levelname)s: %(message)s'
)


@click.command()
@click.option("--out", "out_path", default=str(Config.DATA_DIR / "synthetic" / "ratings.dat"),
              type=click.Path(dir_okay=False, path_type=Path), show_default=True)
@click.option("--users", default=300, show_default=True)
@click.option("--items", default=200, show_default=True)
@click.option("--exponent", default=1.0, show_default=True, help="Zipf exponent of item popularity")
@click.option("--seed", default=0, show_default=True)
def make_synthetic(out_path: Path, users: int, items: int, exponent: float, seed: int):
    """Generate ratings and write them as UserID::MovieID::Rating::Timestamp lines"""
    frame = generate_ratings(n_users=users, n_items=items, popularity_exponent=exponent, seed=seed)
    write_movielens(frame, out_path)
    logging.info(f"{frame['user'].nunique()} users, {frame['item'].nunique()} items, {len(frame)} ratings")


if __name__ == "__main__":
    make_synthetic()
