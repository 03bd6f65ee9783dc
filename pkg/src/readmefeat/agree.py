"""Validator ratings on the 1-4 quality scale and Cohen's kappa between two raters."""

from __future__ import annotations

import csv
import os
from collections import Counter
from dataclasses import dataclass, field

__all__ = ["RATING_SCALE", "RatingSheet", "cohen_kappa", "rating_distribution", "load_ratings_csv"]

RATING_SCALE = (1, 2, 3, 4)


@dataclass(frozen=True)
class RatingSheet:
    annotator_id: str
    ratings: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for repo_id, rating in self.ratings.items():
            if rating not in RATING_SCALE or isinstance(rating, bool):
                raise ValueError(f"{self.annotator_id}/{repo_id}: rating {rating!r} not in 1..4")


def cohen_kappa(a: RatingSheet, b: RatingSheet) -> float:
    """Unweighted Cohen's kappa over the items both annotators rated.

                 p_o - p_e
        kappa = -----------
                  1 - p_e

    p_o is the observed agreement fraction, p_e the agreement expected from
    the two raters' marginal label frequencies.
    """
    common = sorted(a.ratings.keys() & b.ratings.keys())
    if not common:
        raise ValueError(f"{a.annotator_id} and {b.annotator_id} share no rated items")
    n = len(common)
    xs = [a.ratings[k] for k in common]
    ys = [b.ratings[k] for k in common]
    p_o = sum(x == y for x, y in zip(xs, ys)) / n
    ca, cb = Counter(xs), Counter(ys)
    p_e = sum(ca[c] * cb[c] for c in RATING_SCALE) / (n * n)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def rating_distribution(sheet: RatingSheet) -> dict[int, int]:
    counts = Counter(sheet.ratings.values())
    return {r: counts.get(r, 0) for r in RATING_SCALE}


def load_ratings_csv(path: str | os.PathLike) -> dict[str, RatingSheet]:
    """Read ``repo_id,annotator_id,rating`` rows into one sheet per annotator."""
    by_annotator: dict[str, dict[str, int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"repo_id", "annotator_id", "rating"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, 2):
            try:
                rating = int(row["rating"])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: rating {row['rating']!r} is not an integer") from None
            sheet = by_annotator.setdefault(row["annotator_id"], {})
            if row["repo_id"] in sheet:
                raise ValueError(f"{path}: line {lineno}: {row['annotator_id']} rated {row['repo_id']} twice")
            sheet[row["repo_id"]] = rating
    return {aid: RatingSheet(aid, ratings) for aid, ratings in by_annotator.items()}
