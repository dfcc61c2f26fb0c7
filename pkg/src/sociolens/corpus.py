"""Annotation ingestion, filtering, binarization, and text-level splitting.

An annotation is one (text, annotator, score) triple. Scores are ordinal
and non-negative; binarization maps 0 to the negative class and anything
above 0 to the positive class. Reliability filtering drops low-volume
annotators first and under-annotated texts second, one pass each, in that
order. Splits always partition unique text ids so no text appears on both
sides.
"""

from __future__ import annotations

import csv
import math
import os
from collections import Counter
from dataclasses import dataclass, field, replace

from .errors import (
    DataError,
    DuplicateError,
    EmptyDatasetError,
    SchemaError,
)
from .features import AnnotatorProfile
from .rng import seeded_shuffle


@dataclass(frozen=True)
class AnnotationRecord:
    text_id: str
    annotator_id: str
    raw_score: int
    label: int | None = None


@dataclass(frozen=True)
class ColumnMapping:
    """Which CSV columns hold the text id, annotator id, and score."""

    text_id: str = "text_id"
    annotator_id: str = "annotator_id"
    score: str = "score"


@dataclass(frozen=True)
class DatasetStats:
    records: int
    unique_texts: int
    unique_annotators: int
    label_counts: dict[int, int]


@dataclass
class Dataset:
    records: list[AnnotationRecord]
    profiles: dict[str, AnnotatorProfile] = field(default_factory=dict)

    @property
    def stats(self) -> DatasetStats:
        labels = Counter(r.label for r in self.records if r.label is not None)
        return DatasetStats(
            records=len(self.records),
            unique_texts=len({r.text_id for r in self.records}),
            unique_annotators=len({r.annotator_id for r in self.records}),
            label_counts={0: labels.get(0, 0), 1: labels.get(1, 0)},
        )

    def text_ids(self) -> list[str]:
        """Unique text ids in first-appearance order."""
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.text_id, None)
        return list(seen)

    def annotator_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.annotator_id, None)
        return list(seen)


@dataclass(frozen=True)
class FilterReport:
    removed_annotators: int
    removed_texts: int
    removed_records: int
    retained_records: int

    def to_dict(self) -> dict[str, int]:
        return {
            "removed_annotators": self.removed_annotators,
            "removed_texts": self.removed_texts,
            "removed_records": self.removed_records,
            "retained_records": self.retained_records,
        }


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float


def load_annotations(path: str, columns: ColumnMapping | None = None) -> Dataset:
    """Load an annotation CSV into a Dataset (records only, no profiles).

    Rejects missing columns, duplicate (text, annotator) pairs, and
    non-integer or negative scores, reporting offending row numbers.
    """
    if not os.path.exists(path):
        raise DataError(f"annotation file not found: {path}")
    columns = columns or ColumnMapping()
    records: list[AnnotationRecord] = []
    seen: dict[tuple[str, str], int] = {}
    duplicates: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        for col in (columns.text_id, columns.annotator_id, columns.score):
            if col not in reader.fieldnames:
                raise SchemaError(
                    f"{path}: declared column {col!r} not in header {reader.fieldnames}"
                )
        for row_no, row in enumerate(reader, start=2):
            text_id = row[columns.text_id]
            annotator_id = row[columns.annotator_id]
            raw = row[columns.score]
            try:
                score = int(raw)
            except (TypeError, ValueError):
                raise DataError(
                    f"{path}: row {row_no}: score {raw!r} is not a base-10 integer"
                ) from None
            if score < 0:
                raise DataError(f"{path}: row {row_no}: score {score} is negative")
            key = (text_id, annotator_id)
            if key in seen:
                duplicates.append(f"rows {seen[key]},{row_no}: {key}")
            else:
                seen[key] = row_no
                records.append(AnnotationRecord(text_id, annotator_id, score))
    if duplicates:
        raise DuplicateError(
            f"{path}: duplicate (text_id, annotator_id) pairs: " + "; ".join(duplicates)
        )
    return Dataset(records=records)


def save_annotations(dataset: Dataset, path: str, columns: ColumnMapping | None = None) -> None:
    """Re-emit a dataset with the same column conventions used for loading."""
    columns = columns or ColumnMapping()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([columns.text_id, columns.annotator_id, columns.score])
        for r in dataset.records:
            writer.writerow([r.text_id, r.annotator_id, r.raw_score])


def attach_profiles(dataset: Dataset, profiles: dict[str, AnnotatorProfile]) -> Dataset:
    """Attach profiles covering each record's annotator; missing coverage is an error."""
    needed = {r.annotator_id for r in dataset.records}
    missing = sorted(needed - profiles.keys())
    if missing:
        raise DataError(f"no profile for annotators: {missing[:10]}{'...' if len(missing) > 10 else ''}")
    kept = {aid: profiles[aid] for aid in dataset.annotator_ids()}
    return Dataset(records=list(dataset.records), profiles=kept)


def binarize(dataset: Dataset) -> Dataset:
    """Set label = 0 for score 0 and label = 1 for any score above 0. Idempotent."""
    records = [replace(r, label=0 if r.raw_score == 0 else 1) for r in dataset.records]
    return Dataset(records=records, profiles=dict(dataset.profiles))


def filter_dataset(
    dataset: Dataset,
    min_annotators_per_text: int,
    min_annotations_per_annotator: int,
) -> tuple[Dataset, FilterReport]:
    """Drop low-volume annotators, then under-annotated texts; one pass each.

    No fixpoint iteration: an annotator who falls below threshold only
    because of the text pass is kept.
    """
    if min_annotators_per_text < 1 or min_annotations_per_annotator < 1:
        raise DataError("filter thresholds must be >= 1")
    original = len(dataset.records)

    per_annotator = Counter(r.annotator_id for r in dataset.records)
    bad_annotators = {a for a, n in per_annotator.items() if n < min_annotations_per_annotator}
    after_annotators = [r for r in dataset.records if r.annotator_id not in bad_annotators]

    per_text = Counter(r.text_id for r in after_annotators)
    bad_texts = {t for t, n in per_text.items() if n < min_annotators_per_text}
    retained = [r for r in after_annotators if r.text_id not in bad_texts]

    if not retained:
        raise EmptyDatasetError(
            f"filtering with thresholds (texts>={min_annotators_per_text}, "
            f"annotators>={min_annotations_per_annotator}) removed every record"
        )
    kept_annotators = {r.annotator_id for r in retained}
    profiles = {a: p for a, p in dataset.profiles.items() if a in kept_annotators}
    report = FilterReport(
        removed_annotators=len(bad_annotators),
        removed_texts=len(bad_texts),
        removed_records=original - len(retained),
        retained_records=len(retained),
    )
    return Dataset(records=retained, profiles=profiles), report


def split_by_text(dataset: Dataset, train_fraction: float, seed: int) -> SplitPair:
    """Split by unique text id so all annotations of a text travel together.

    Unique text ids are taken in lexicographic order, shuffled by the
    documented SplitMix64 Fisher-Yates shuffle, and the first
    ceil(fraction * N) go to train. The same seed always reproduces the
    same split, independent of input row order.
    """
    if not (0.0 < train_fraction < 1.0):
        raise DataError(f"train_fraction must be in (0,1), got {train_fraction}")
    texts = sorted({r.text_id for r in dataset.records})
    if len(texts) < 2:
        raise DataError("need at least 2 unique texts to split")
    shuffled = seeded_shuffle(texts, seed)
    n_train = math.ceil(train_fraction * len(texts))
    if n_train == 0 or n_train == len(texts):
        raise DataError(
            f"train_fraction {train_fraction} places zero texts in one side "
            f"for {len(texts)} texts"
        )
    train_texts = set(shuffled[:n_train])

    def subset(in_train: bool) -> Dataset:
        recs = [r for r in dataset.records if (r.text_id in train_texts) == in_train]
        annotators = {r.annotator_id for r in recs}
        profiles = {a: p for a, p in dataset.profiles.items() if a in annotators}
        return Dataset(records=recs, profiles=profiles)

    return SplitPair(
        train=subset(True),
        test=subset(False),
        seed=seed,
        train_fraction=train_fraction,
    )


def majority_vote(dataset: Dataset) -> dict[str, int]:
    """Aggregate per-text labels; strict majority wins, exact ties go to 1."""
    votes: dict[str, Counter] = {}
    for r in dataset.records:
        if r.label is None:
            raise DataError("majority_vote requires binarized labels")
        votes.setdefault(r.text_id, Counter())[r.label] += 1
    out: dict[str, int] = {}
    for text_id, counter in votes.items():
        ones, zeros = counter.get(1, 0), counter.get(0, 0)
        out[text_id] = 1 if ones >= zeros else 0
    return out
