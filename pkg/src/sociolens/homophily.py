"""Demographic structure statistics over learned annotator representations.

For an attribute, the observed probability is the average fraction of an
annotator's k nearest neighbors sharing their category; the chance
probability is the sum of squared category frequencies (the same-category
probability for two random draws); their ratio exceeds 1 when the
representation space clusters by that attribute. Bootstrap resampling
over annotators attaches a mean and standard deviation to all three.

Neighbor search is exact (brute force) under cosine distance by default,
with Euclidean available. Distance ties break by annotator id, then row
order, so results are deterministic.
"""

from __future__ import annotations

import csv
import os
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .features import MISSING, AnnotatorProfile, SocioSchema

METRICS = ("cosine", "euclidean")


class RepSpace:
    """Annotator representation rows plus their attribute categories."""

    def __init__(
        self,
        annotator_ids: list[str],
        vectors: np.ndarray,
        attributes: dict[str, list[str]],
    ):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(annotator_ids):
            raise DataError("vectors must be one row per annotator id")
        if not np.all(np.isfinite(vectors)):
            raise DataError("non-finite representation components")
        for attr, cats in attributes.items():
            if len(cats) != len(annotator_ids):
                raise DataError(f"attribute {attr!r} has {len(cats)} entries for {len(annotator_ids)} annotators")
        self.annotator_ids = list(annotator_ids)
        self.vectors = vectors
        self.attributes = {a: list(c) for a, c in attributes.items()}

    def __len__(self) -> int:
        return len(self.annotator_ids)

    @classmethod
    def from_representations(
        cls,
        reps: dict[str, np.ndarray],
        profiles: dict[str, AnnotatorProfile],
        schema: SocioSchema,
    ) -> "RepSpace":
        ids = list(reps)
        vectors = np.stack([reps[a] for a in ids])
        attributes = {
            attr: [profiles[a].assignments.get(attr, MISSING) or MISSING if a in profiles else MISSING for a in ids]
            for attr in schema.attribute_names
        }
        return cls(ids, vectors, attributes)


def save_representations(reps: dict[str, np.ndarray], path: str) -> None:
    """CSV export: annotator_id,d0..d{n-1} with full-precision floats."""
    if not reps:
        raise DataError("no representations to save")
    dim = len(next(iter(reps.values())))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["annotator_id"] + [f"d{i}" for i in range(dim)])
        for aid, vec in reps.items():
            writer.writerow([aid] + [repr(float(x)) for x in vec])


def load_representations(path: str) -> dict[str, np.ndarray]:
    if not os.path.exists(path):
        raise DataError(f"representation file not found: {path}")
    reps: dict[str, np.ndarray] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "annotator_id":
            raise DataError(f"{path}: expected an annotator_id representation CSV")
        dim = len(header) - 1
        for row_no, row in enumerate(reader, start=2):
            if len(row) - 1 != dim:
                raise DataError(f"{path}: row {row_no} has {len(row) - 1} components, expected {dim}")
            reps[row[0]] = np.array([float(x) for x in row[1:]], dtype=np.float64)
    if not reps:
        raise DataError(f"{path}: empty representation file")
    return reps


@dataclass(frozen=True)
class HomophilyRow:
    attribute: str
    observed_mean: float
    observed_std: float
    chance_mean: float
    chance_std: float
    ratio_mean: float
    ratio_std: float
    k: int
    iterations: int

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "observed_mean": self.observed_mean,
            "observed_std": self.observed_std,
            "chance_mean": self.chance_mean,
            "chance_std": self.chance_std,
            "ratio_mean": self.ratio_mean,
            "ratio_std": self.ratio_std,
            "k": self.k,
            "iterations": self.iterations,
        }


def _distance_matrix(vectors: np.ndarray, metric: str) -> np.ndarray:
    if metric == "cosine":
        norms = np.maximum(np.linalg.norm(vectors, axis=1, keepdims=True), 1e-30)
        unit = vectors / norms
        return 1.0 - unit @ unit.T
    if metric == "euclidean":
        sq = np.sum(vectors**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (vectors @ vectors.T)
        return np.sqrt(np.maximum(d2, 0.0))
    raise ConfigError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _neighbor_order(vectors: np.ndarray, ids: list[str], metric: str) -> np.ndarray:
    """Row i holds all other indices sorted by (distance to i, annotator id, index)."""
    dist = _distance_matrix(vectors, metric)
    # pre-permute columns into id order, then stable-sort by distance:
    # ties fall back to annotator id, then original row order
    by_id = np.argsort(np.array(ids, dtype=object), kind="stable")
    ordered = np.argsort(dist[:, by_id], axis=1, kind="stable")
    neighbors = by_id[ordered]
    n = len(ids)
    out = np.empty((n, n - 1), dtype=np.int64)
    for i in range(n):
        row = neighbors[i]
        out[i] = row[row != i]
    return out


def knn(space: RepSpace, i: int, k: int, metric: str = "cosine") -> list[int]:
    """Indices of the k nearest annotators to row i, excluding i itself."""
    n = len(space)
    if k >= n:
        raise DataError(f"k={k} needs at least k+1 annotators, have {n}")
    if k < 1:
        raise DataError("k must be >= 1")
    order = _neighbor_order(space.vectors, space.annotator_ids, metric)
    return order[i, :k].tolist()


def _observed_fractions(
    vectors: np.ndarray,
    ids: list[str],
    categories: list[str],
    k: int,
    metric: str,
) -> np.ndarray:
    """Same-category neighbor fraction per row, all rows at once."""
    order = _neighbor_order(vectors, ids, metric)
    cats = np.array(categories, dtype=object)
    neighbor_cats = cats[order[:, :k]]
    return (neighbor_cats == cats[:, None]).mean(axis=1)


def observed_probability(space: RepSpace, attribute: str, k: int = 50, metric: str = "cosine") -> float:
    """Mean over annotators of the same-attribute fraction among their k neighbors."""
    if attribute not in space.attributes:
        raise DataError(f"attribute {attribute!r} not present in representation space")
    if k >= len(space):
        raise DataError(f"k={k} needs at least k+1 annotators, have {len(space)}")
    fractions = _observed_fractions(
        space.vectors, space.annotator_ids, space.attributes[attribute], k, metric
    )
    return float(fractions.mean())


def chance_probability(space: RepSpace, attribute: str) -> float:
    """Sum of squared category frequencies; position-independent by construction."""
    if attribute not in space.attributes:
        raise DataError(f"attribute {attribute!r} not present in representation space")
    counts = Counter(space.attributes[attribute])
    n = len(space)
    # integer arithmetic then one division: uniform C categories give 1/C exactly
    return sum(c * c for c in counts.values()) / (n * n)


def homophily_ratio(space: RepSpace, attribute: str, k: int = 50, metric: str = "cosine") -> float:
    chance = chance_probability(space, attribute)
    if chance <= 0.0:
        raise DataError("chance probability is zero; empty annotator pool?")
    return observed_probability(space, attribute, k, metric) / chance


def bootstrap_homophily(
    space: RepSpace,
    attribute: str,
    k: int = 50,
    iterations: int = 1000,
    seed: int = 0,
    metric: str = "cosine",
) -> HomophilyRow:
    """Resample annotators with replacement and redo the three statistics.

    Each iteration draws N annotators with replacement; duplicates weight
    the observed average, but neighbor search runs over the draw's
    distinct members so a vector is never its own neighbor. Chance is
    recomputed from the resampled multiset, keeping each iteration's
    ratio internally consistent. Iteration seeds derive from (seed,
    iteration), so execution order cannot change the result.
    """
    if attribute not in space.attributes:
        raise DataError(f"attribute {attribute!r} not present in representation space")
    n = len(space)
    if n < k + 1:
        raise DataError(f"k={k} needs at least k+1 annotators, have {n}")
    cats_all = np.array(space.attributes[attribute], dtype=object)
    ids_all = np.array(space.annotator_ids, dtype=object)
    observed = np.empty(iterations, dtype=np.float64)
    chance = np.empty(iterations, dtype=np.float64)
    for it in range(iterations):
        rng = np.random.default_rng([seed, it])
        draw = rng.integers(0, n, size=n)
        distinct, weights = np.unique(draw, return_counts=True)
        if len(distinct) <= k:
            raise DataError(
                f"bootstrap iteration {it}: only {len(distinct)} distinct annotators for k={k}"
            )
        fractions = _observed_fractions(
            space.vectors[distinct],
            ids_all[distinct].tolist(),
            cats_all[distinct].tolist(),
            k,
            metric,
        )
        observed[it] = float(np.average(fractions, weights=weights))
        draw_cats = cats_all[draw]
        counts = Counter(draw_cats.tolist())
        chance[it] = sum(c * c for c in counts.values()) / (n * n)
    ratios = observed / chance
    return HomophilyRow(
        attribute=attribute,
        observed_mean=float(observed.mean()),
        observed_std=float(observed.std()),
        chance_mean=float(chance.mean()),
        chance_std=float(chance.std()),
        ratio_mean=float(ratios.mean()),
        ratio_std=float(ratios.std()),
        k=k,
        iterations=iterations,
    )


def homophily_table(
    space: RepSpace,
    k: int = 50,
    iterations: int = 1000,
    seed: int = 0,
    metric: str = "cosine",
    attributes: list[str] | None = None,
) -> list[HomophilyRow]:
    """Bootstrap rows for every attribute (or the requested subset), ratio-descending."""
    names = attributes if attributes is not None else list(space.attributes)
    rows = [bootstrap_homophily(space, a, k, iterations, seed, metric) for a in names]
    rows.sort(key=lambda r: -r.ratio_mean)
    return rows
