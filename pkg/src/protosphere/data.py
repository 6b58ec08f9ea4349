"""Synthetic labeled vector datasets: balanced sphere-cluster mixtures, an
exponential long-tail thinning profile, and a line-oriented text format."""

import re
from dataclasses import dataclass, field

import numpy as np

from protosphere.errors import ArtifactError

DATASET_HEADER = re.compile(r"^# protosphere-dataset v1 n=(\d+) p=(\d+) c=(\d+)$")


@dataclass
class VectorDataset:
    """Feature rows (n, p), integer labels (n,), and a fixed class count."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    per_class_counts: np.ndarray = field(default=None)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (len(self.features),):
            raise ValueError("features must be (n, p) with one label per row")
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.class_count
        ):
            raise ValueError("label out of range")
        self.per_class_counts = np.bincount(self.labels, minlength=self.class_count)

    @property
    def n(self):
        return len(self.labels)

    @property
    def input_dim(self):
        return self.features.shape[1]


@dataclass
class LongTailSpec:
    """Exponential thinning profile: class k keeps
    round(max_per_class * imbalance_factor ** (k / (c - 1))) samples."""

    imbalance_factor: float
    max_per_class: int

    def __post_init__(self):
        if not 0.0 < self.imbalance_factor <= 1.0:
            raise ValueError("imbalance_factor must be in (0, 1]")
        if self.max_per_class < 1:
            raise ValueError("max_per_class must be >= 1")

    def count_for(self, k, class_count):
        decay = self.imbalance_factor ** (k / (class_count - 1))
        # half-up rounding keeps the smallest class non-empty at factor 1/(2*max)
        return int(np.floor(self.max_per_class * decay + 0.5))


def generate_gaussian_mixture(
    class_count, input_dim, per_class, spread, seed, min_angle=0.3
):
    """Balanced mixture with unit-vector class means and isotropic noise.

    Means are rejection-sampled until all pairwise angles reach min_angle
    radians; samples are mean + spread * standard normal. Deterministic per
    seed. Raises after 10000 failed mean draws.
    """
    if class_count < 2:
        raise ValueError("need at least 2 classes")
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    cos_limit = np.cos(min_angle)
    means = []
    attempts = 0
    while len(means) < class_count:
        if attempts >= 10000:
            raise RuntimeError(
                f"could not place {class_count} class means with pairwise angle"
                f" >= {min_angle} rad after 10000 attempts"
            )
        candidate = rng.standard_normal(input_dim)
        candidate /= np.linalg.norm(candidate)
        attempts += 1
        if all(np.dot(candidate, m) <= cos_limit for m in means):
            means.append(candidate)
    blocks, labels = [], []
    for k, mean in enumerate(means):
        noise = rng.standard_normal((per_class, input_dim))
        blocks.append(mean[None, :] + spread * noise)
        labels.extend([k] * per_class)
    return VectorDataset(np.vstack(blocks), labels, class_count)


def apply_long_tail(dataset, spec, seed):
    """Thin a balanced dataset to the exponential profile, keeping a seeded
    random subset of each class."""
    counts = dataset.per_class_counts
    if (counts < spec.max_per_class).any() or len(set(counts.tolist())) != 1:
        raise ValueError(
            "long-tail thinning needs a balanced dataset with at least"
            f" max_per_class={spec.max_per_class} samples per class"
        )
    rng = np.random.default_rng(seed)
    keep = []
    for k in range(dataset.class_count):
        target = spec.count_for(k, dataset.class_count)
        class_rows = np.flatnonzero(dataset.labels == k)
        chosen = rng.choice(class_rows, size=target, replace=False)
        keep.extend(sorted(chosen.tolist()))
    keep = np.array(keep, dtype=np.int64)
    return VectorDataset(
        dataset.features[keep], dataset.labels[keep], dataset.class_count
    )


def save_dataset(dataset, path):
    """Header, then one row per sample: p comma-separated doubles, label last."""
    lines = [
        f"# protosphere-dataset v1 n={dataset.n} p={dataset.input_dim}"
        f" c={dataset.class_count}"
    ]
    for row, label in zip(dataset.features, dataset.labels):
        lines.append(",".join(f"{x:.17g}" for x in row) + f",{int(label)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ArtifactError("empty dataset file")
    m = DATASET_HEADER.match(lines[0])
    if not m:
        raise ArtifactError(f"malformed dataset header: {lines[0]!r}")
    n, p, c = (int(g) for g in m.groups())
    if len(lines) - 1 != n:
        raise ArtifactError(f"expected {n} rows, found {len(lines) - 1}")
    features = np.empty((n, p))
    labels = np.empty(n, dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != p + 1:
            raise ArtifactError(
                f"row {i + 2}: expected {p} features plus a label,"
                f" found {len(parts)} fields"
            )
        features[i] = [float(v) for v in parts[:-1]]
        label = int(parts[-1])
        if not 0 <= label < c:
            raise ArtifactError(f"row {i + 2}: label {label} out of range [0, {c})")
        labels[i] = label
    return VectorDataset(features, labels, c)
