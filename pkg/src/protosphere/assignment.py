"""Label-to-prototype assignment.

Keeps a momentum-averaged unit representative per class and matches classes to
prototypes by solving the dense linear-assignment problem on negated cosine
similarities. The matching minimizes the class-likelihood objective because
the normalizing log-sum term is the same for every bijection.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from protosphere import _core
from protosphere.errors import ArtifactError, DegenerateVectorError

ASSIGN_HEADER = re.compile(r"^# protosphere-assignment v1 c=(\d+)$")


@dataclass(frozen=True)
class AssignmentMapping:
    """Bijection from class label j to prototype index mapping[j]."""

    mapping: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mapping, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("mapping must be a non-empty 1-d index array")
        counts = np.bincount(arr, minlength=arr.size) if arr.min() >= 0 else None
        if counts is None or arr.max() >= arr.size or (counts != 1).any():
            raise ValueError("mapping is not a permutation of 0..c-1")
        arr.setflags(write=False)
        object.__setattr__(self, "mapping", arr)

    def __len__(self):
        return self.mapping.size

    def __getitem__(self, j):
        return int(self.mapping[j])

    @classmethod
    def identity(cls, count):
        return cls(np.arange(count, dtype=np.int64))

    def fixed_points(self):
        return [j for j in range(len(self)) if self.mapping[j] == j]

    def cycles(self):
        """Cycle decomposition, each cycle starting at its smallest element."""
        seen = np.zeros(len(self), dtype=bool)
        out = []
        for start in range(len(self)):
            if seen[start]:
                continue
            cycle, j = [], start
            while not seen[j]:
                seen[j] = True
                cycle.append(j)
                j = int(self.mapping[j])
            out.append(cycle)
        return out


@dataclass
class ClassRepresentatives:
    """Momentum-averaged unit feature per class (dim x count columns).

    A column is all-zero until its class has been observed once; the first
    observation is copied in directly, later ones are blended and renormalized.
    """

    vectors: np.ndarray
    seen: np.ndarray = field(default=None)

    def __post_init__(self):
        self.vectors = np.array(self.vectors, dtype=np.float64)
        if self.seen is None:
            self.seen = np.zeros(self.count, dtype=bool)
        else:
            self.seen = np.array(self.seen, dtype=bool)

    @classmethod
    def empty(cls, dim, count):
        return cls(np.zeros((dim, count)))

    @property
    def dim(self):
        return self.vectors.shape[0]

    @property
    def count(self):
        return self.vectors.shape[1]

    @property
    def all_seen(self):
        return bool(self.seen.all())

    def update(self, label, feature, alpha):
        """Blend a unit feature into the class column: alpha * old + (1-alpha) * new,
        renormalized. Bootstraps unseen classes by copying the feature."""
        if not 0 <= label < self.count:
            raise ValueError(f"label {label} out of range")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        z = np.asarray(feature, dtype=np.float64)
        if z.shape != (self.dim,):
            raise ValueError("feature dimension mismatch")
        if abs(np.linalg.norm(z) - 1.0) > 1e-6:
            raise ValueError("feature is not unit-norm")
        if not self.seen[label]:
            self.vectors[:, label] = z
            self.seen[label] = True
            return self
        blended = alpha * self.vectors[:, label] + (1.0 - alpha) * z
        norm = np.linalg.norm(blended)
        if norm < 1e-12:
            raise DegenerateVectorError(
                f"representative update for class {label} cancelled to zero norm"
            )
        self.vectors[:, label] = blended / norm
        return self


def build_cost_matrix(reps, protos):
    """Cost entry (j, k) = -(representative_j . prototype_k)."""
    if reps.dim != protos.dim or reps.count != protos.count:
        raise ValueError("representatives and prototypes disagree in dim or count")
    if not reps.all_seen:
        missing = int(np.argmin(reps.seen))
        raise ValueError(f"class {missing} has no representative yet")
    return -(reps.vectors.T @ protos.vectors)


def hungarian_solve(cost):
    """Minimum-total-cost permutation of a square cost matrix.

    Deterministic: the augmenting-path solver always resolves ties the same
    way, so equal inputs give equal mappings.
    """
    arr = np.asarray(cost, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.isfinite(arr).all():
        raise ValueError("cost matrix has non-finite entries")
    return AssignmentMapping(_core.lapjv(arr))


def reassign(reps, protos):
    """Best bijection from classes to prototypes given current representatives."""
    return hungarian_solve(build_cost_matrix(reps, protos))


def assignment_churn(prev, nxt):
    """Fraction of labels whose prototype changed between two mappings."""
    if len(prev) != len(nxt):
        raise ValueError("mappings differ in length")
    return float(np.mean(prev.mapping != nxt.mapping))


def save_assignment(mapping, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# protosphere-assignment v1 c={len(mapping)}\n")
        fh.write(" ".join(str(int(k)) for k in mapping.mapping) + "\n")


def load_assignment(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ArtifactError("empty assignment file")
    m = ASSIGN_HEADER.match(lines[0])
    if not m:
        raise ArtifactError(f"malformed assignment header: {lines[0]!r}")
    c = int(m.group(1))
    values = " ".join(lines[1:]).split()
    if len(values) != c:
        raise ArtifactError(f"expected {c} entries, found {len(values)}")
    try:
        arr = np.array([int(v) for v in values], dtype=np.int64)
    except ValueError as exc:
        raise ArtifactError(f"non-integer assignment entry: {exc}") from exc
    if arr.min() < 0 or arr.max() >= c:
        raise ArtifactError("prototype index out of range")
    if len(np.unique(arr)) != c:
        dup = int(np.argmax(np.bincount(arr, minlength=c) > 1))
        raise ArtifactError(f"duplicate prototype index {dup}")
    return AssignmentMapping(arr)
