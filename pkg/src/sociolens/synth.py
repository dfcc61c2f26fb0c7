"""Synthetic populations with known demographic signal.

The generator realizes the simplest process under which demographics
shape judgments: each text carries a latent score z ~ N(0, 1), each
annotator's categories contribute additive log-odds shifts, and a label
is drawn from Bernoulli(sigmoid(z + shifts)). Text embeddings are
z * u + noise for a fixed random unit direction u, so the text signal is
linearly recoverable. Zero-signal populations give the whole pipeline a
null it must not contradict; planted shifts give it an effect it must
detect.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import AnnotationRecord, Dataset
from .errors import ConfigError
from .features import AnnotatorProfile, EmbeddingTable
from .model import sigmoid


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    categories: tuple[str, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.categories) != len(self.probabilities):
            raise ConfigError(f"attribute {self.name!r}: categories and probabilities differ in length")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ConfigError(f"attribute {self.name!r}: probabilities sum to {sum(self.probabilities)}")
        if any(p < 0 for p in self.probabilities):
            raise ConfigError(f"attribute {self.name!r}: negative probability")


@dataclass(frozen=True)
class PopulationSpec:
    annotator_count: int
    attributes: tuple[AttributeSpec, ...]
    signal: dict[tuple[str, str], float] = field(default_factory=dict)
    text_count: int = 100
    annotations_per_text: int = 4
    embedding_dim: int = 16
    embedding_noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.annotator_count < 1 or self.text_count < 1 or self.annotations_per_text < 1:
            raise ConfigError("all synth counts must be >= 1")
        if self.annotations_per_text > self.annotator_count:
            raise ConfigError("annotations_per_text cannot exceed annotator_count")
        if self.embedding_dim < 1:
            raise ConfigError("embedding_dim must be >= 1")
        names = {a.name for a in self.attributes}
        for attr, cat in self.signal:
            if attr not in names:
                raise ConfigError(f"signal names unknown attribute {attr!r}")
        for spec in self.attributes:
            for attr, cat in self.signal:
                if attr == spec.name and cat not in spec.categories:
                    raise ConfigError(f"signal names unknown category {cat!r} of {attr!r}")


@dataclass
class SynthCorpus:
    text_ids: list[str]
    latent: np.ndarray
    embeddings: EmbeddingTable
    direction: np.ndarray


def generate_population(spec: PopulationSpec) -> dict[str, AnnotatorProfile]:
    """Sample annotators i.i.d. from the categorical attribute distributions."""
    rng = np.random.default_rng([spec.seed, 1])
    width = len(str(max(spec.annotator_count - 1, 1)))
    profiles: dict[str, AnnotatorProfile] = {}
    for i in range(spec.annotator_count):
        aid = f"a{i:0{width}d}"
        assignments = {}
        for attr in spec.attributes:
            idx = rng.choice(len(attr.categories), p=np.array(attr.probabilities))
            assignments[attr.name] = attr.categories[int(idx)]
        profiles[aid] = AnnotatorProfile(annotator_id=aid, assignments=assignments)
    return profiles


def generate_corpus(spec: PopulationSpec) -> SynthCorpus:
    """Texts with latent scores and embeddings that carry the score linearly."""
    rng = np.random.default_rng([spec.seed, 2])
    width = len(str(max(spec.text_count - 1, 1)))
    text_ids = [f"t{i:0{width}d}" for i in range(spec.text_count)]
    latent = rng.standard_normal(spec.text_count)
    direction = rng.standard_normal(spec.embedding_dim)
    direction /= np.linalg.norm(direction)
    noise = rng.standard_normal((spec.text_count, spec.embedding_dim))
    vectors = latent[:, None] * direction[None, :] + spec.embedding_noise * noise
    table = EmbeddingTable(
        spec.embedding_dim, {tid: vectors[i] for i, tid in enumerate(text_ids)}
    )
    return SynthCorpus(text_ids=text_ids, latent=latent, embeddings=table, direction=direction)


def annotator_shift(profile: AnnotatorProfile, signal: dict[tuple[str, str], float]) -> float:
    return sum(
        shift
        for (attr, cat), shift in signal.items()
        if profile.assignments.get(attr) == cat
    )


def generate_annotations(
    population: dict[str, AnnotatorProfile],
    corpus: SynthCorpus,
    spec: PopulationSpec,
) -> Dataset:
    """Assign annotators per text without replacement; labels follow the shifted odds."""
    rng = np.random.default_rng([spec.seed, 3])
    annotator_ids = list(population)
    shifts = {aid: annotator_shift(population[aid], spec.signal) for aid in annotator_ids}
    records: list[AnnotationRecord] = []
    for i, text_id in enumerate(corpus.text_ids):
        chosen = rng.choice(len(annotator_ids), size=spec.annotations_per_text, replace=False)
        z = corpus.latent[i]
        for j in chosen:
            aid = annotator_ids[int(j)]
            p = float(sigmoid(np.array([z + shifts[aid]]))[0])
            label = int(rng.random() < p)
            records.append(AnnotationRecord(text_id=text_id, annotator_id=aid, raw_score=label, label=label))
    return Dataset(records=records, profiles=dict(population))


def generate_socio_embeddings(
    population: dict[str, AnnotatorProfile],
    dim: int,
    seed: int,
) -> EmbeddingTable:
    """Stand-in for an external encoder over profile strings.

    Each (attribute, category) pair gets a fixed random direction; an
    annotator's vector is the mean of their category directions plus
    small noise, so identical profiles land near each other.
    """
    rng = np.random.default_rng([seed, 4])
    pairs = sorted({(a, c) for p in population.values() for a, c in p.assignments.items()})
    directions = {pair: rng.standard_normal(dim) for pair in pairs}
    vectors: dict[str, np.ndarray] = {}
    for aid, profile in population.items():
        parts = [directions[(a, c)] for a, c in sorted(profile.assignments.items())]
        base = np.mean(parts, axis=0) if parts else np.zeros(dim)
        vectors[aid] = base + 0.01 * rng.standard_normal(dim)
    return EmbeddingTable(dim, vectors)
