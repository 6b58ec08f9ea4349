"""Equidistributed prototype sets on the unit hypersphere.

Prototypes are estimated by projected gradient descent on a Gaussian-potential
pairwise objective and stay fixed afterwards; diagnostics quantify how evenly
a configuration covers the sphere.
"""

import re
from dataclasses import dataclass

import numpy as np

from protosphere.errors import ArtifactError

NORM_TOL = 1e-9
PROTO_HEADER = re.compile(
    r"^# protosphere-prototypes v1 d=(\d+) c=(\d+) t=([^ ]+) seed=(\d+)$"
)


@dataclass(frozen=True)
class PrototypeMatrix:
    """Fixed set of unit-norm prototype vectors, one per column (dim x count)."""

    vectors: np.ndarray

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=np.float64)
        if vecs.ndim != 2:
            raise ValueError("prototype matrix must be 2-dimensional")
        d, c = vecs.shape
        if d < 2 or c < 2:
            raise ValueError(f"need dim >= 2 and count >= 2, got {d}x{c}")
        norms = np.linalg.norm(vecs, axis=0)
        bad = np.abs(norms - 1.0) > NORM_TOL
        if bad.any():
            k = int(np.argmax(bad))
            raise ValueError(f"unit-norm violation at column {k} (norm {norms[k]!r})")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self):
        return self.vectors.shape[0]

    @property
    def count(self):
        return self.vectors.shape[1]

    def column(self, k):
        """Prototype vector at index k."""
        return self.vectors[:, k]


@dataclass
class UniformityConfig:
    """Schedule for prototype estimation.

    subset_size is the number of prototype rows entering the potential sum per
    iteration; None means all of them (the default schedule).
    """

    temperature: float = 2.0
    learning_rate: float = 0.1
    iterations: int = 1000
    subset_size: int | None = None
    seed: int = 0

    def validate(self, count):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        size = count if self.subset_size is None else self.subset_size
        if not 1 <= size <= count:
            raise ValueError(f"subset_size must be in [1, {count}], got {size}")
        return size


def _as_columns(protos):
    if isinstance(protos, PrototypeMatrix):
        return protos.vectors
    arr = np.asarray(protos, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a dim x count matrix")
    return arr


def _check_subset(subset, count):
    idx = np.asarray(subset, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("subset must not be empty")
    if idx.min() < 0 or idx.max() >= count:
        raise ValueError("subset index out of range")
    if len(np.unique(idx)) != idx.size:
        raise ValueError("subset indices must be distinct")
    return idx


def gaussian_potential(u, v, t):
    """Pairwise repulsion kernel exp(-t * |u - v|^2) for two unit vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("dimension mismatch")
    if t <= 0:
        raise ValueError("t must be positive")
    for name, vec in (("u", u), ("v", v)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-6:
            raise ValueError(f"{name} is not unit-norm")
    diff = u - v
    return float(np.exp(-t * np.dot(diff, diff)))


def _potential_terms(vecs, subset, t):
    """Kernel matrix over (subset row, every column) pairs, self-pairs included."""
    rows = vecs[:, subset]
    diff2 = ((rows[:, :, None] - vecs[:, None, :]) ** 2).sum(axis=0)
    return np.exp(-t * diff2)


def uniformity_loss(protos, subset, t):
    """Log of the mean-per-subset-row Gaussian potential sum.

    Low values mean the columns are spread far apart; the double sum pairs each
    subset column with every column of the matrix, self-pairs included.
    """
    vecs = _as_columns(protos)
    idx = _check_subset(subset, vecs.shape[1])
    if t <= 0:
        raise ValueError("t must be positive")
    terms = _potential_terms(vecs, idx, t)
    return float(np.log(terms.sum() / idx.size))


def uniformity_gradient(protos, subset, t):
    """Euclidean gradient of uniformity_loss with respect to every entry."""
    vecs = _as_columns(protos)
    idx = _check_subset(subset, vecs.shape[1])
    if t <= 0:
        raise ValueError("t must be positive")
    terms = _potential_terms(vecs, idx, t)
    return _pair_force(vecs, idx, t, terms) / terms.sum()


def _pair_force(vecs, idx, t, terms):
    """Gradient of the raw kernel double sum (not yet divided by the sum)."""
    rows = vecs[:, idx]
    weights = -2.0 * t * terms  # d g / d dist2 chained with d dist2 / dw
    row_tot = weights.sum(axis=1)
    col_tot = weights.sum(axis=0)
    grad = vecs * col_tot[None, :] - rows @ weights
    grad[:, idx] += rows * row_tot[None, :] - vecs @ weights.T
    return grad


def estimate_prototypes(d, c, config, history=None):
    """Estimate c near-equidistributed unit prototypes in R^d.

    Projected gradient descent: seeded standard-normal init, per-iteration
    subset draw, a step against the pairwise-potential force, then column
    renormalization. The step follows the raw potential-sum gradient, which
    points along the uniformity-loss gradient scaled by the current potential
    sum; the unscaled log-loss gradient vanishes like 1/c^2 and stalls for
    large c under the default schedule. Deterministic for a fixed seed. When
    `history` is a list, the uniformity loss is appended once per iteration.
    """
    if d < 2 or c < 2:
        raise ValueError("need d >= 2 and c >= 2")
    size = config.validate(c)
    t = config.temperature
    rng = np.random.default_rng(config.seed)
    vecs = rng.standard_normal((d, c))
    vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
    full = np.arange(c)
    for _ in range(config.iterations):
        idx = full if size == c else np.sort(rng.choice(c, size=size, replace=False))
        terms = _potential_terms(vecs, idx, t)
        if history is not None:
            history.append(float(np.log(terms.sum() / idx.size)))
        vecs = vecs - config.learning_rate * _pair_force(vecs, idx, t, terms)
        vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
    return PrototypeMatrix(vecs)


def circle_prototypes(c):
    """Closed-form d=2 configuration: equal slices of the unit circle, first
    prototype at angle 0."""
    if c < 2:
        raise ValueError("need c >= 2")
    angles = 2.0 * np.pi * np.arange(c) / c
    return PrototypeMatrix(np.vstack([np.cos(angles), np.sin(angles)]))


@dataclass(frozen=True)
class GeometryReport:
    apad: float
    min_cos: float
    max_cos: float
    min_pairwise_distance: float
    etf_gap: float


def geometry_report(protos):
    """Pairwise statistics over unordered column pairs.

    apad is the mean angular distance; min_pairwise_distance is the smallest
    cosine distance 1 - w_i.w_j; etf_gap measures the worst deviation of any
    pairwise cosine from the equiangular value -1/(c-1).
    """
    vecs = _as_columns(protos)
    c = vecs.shape[1]
    if c < 2:
        raise ValueError("need at least two prototypes")
    gram = vecs.T @ vecs
    cos = gram[np.triu_indices(c, 1)]
    return GeometryReport(
        apad=float(np.arccos(np.clip(cos, -1.0, 1.0)).mean()),
        min_cos=float(cos.min()),
        max_cos=float(cos.max()),
        min_pairwise_distance=float((1.0 - cos).min()),
        etf_gap=float(np.abs(cos + 1.0 / (c - 1)).max()),
    )


def save_prototypes(protos, path, temperature=2.0, seed=0):
    """Write the documented text format: header, then one comma-separated
    line of d doubles per prototype."""
    lines = [
        f"# protosphere-prototypes v1 d={protos.dim} c={protos.count}"
        f" t={float(temperature)!r} seed={int(seed)}"
    ]
    for k in range(protos.count):
        lines.append(",".join(f"{x:.17g}" for x in protos.vectors[:, k]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_prototypes(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ArtifactError("empty prototype file")
    m = PROTO_HEADER.match(lines[0])
    if not m:
        raise ArtifactError(f"malformed prototype header: {lines[0]!r}")
    d, c = int(m.group(1)), int(m.group(2))
    if len(lines) - 1 != c:
        raise ArtifactError(f"expected {c} prototype rows, found {len(lines) - 1}")
    vecs = np.empty((d, c))
    for k, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != d:
            raise ArtifactError(f"row {k} has {len(parts)} components, expected {d}")
        vecs[:, k] = [float(p) for p in parts]
    norms = np.linalg.norm(vecs, axis=0)
    bad = np.abs(norms - 1.0) > 1e-6
    if bad.any():
        raise ArtifactError(f"unit-norm violation at column {int(np.argmax(bad))}")
    if (np.abs(norms - 1.0) > NORM_TOL).any():
        vecs = vecs / norms  # hand-edited file: tolerated, snapped back to the sphere
    return PrototypeMatrix(vecs)
