"""Feed-forward feature extractor and training losses.

The backbone is an affine/tanh stack whose final output is divided by its
Euclidean norm, so features always live on the unit sphere. Gradients are
hand-derived reverse mode; the normalization stage contributes the Jacobian
(I - z z^T)/|v|. Two objectives are provided: the single-prototype alignment
regression and the softmax cross-entropy baseline with its pull/push and
attract/repel decompositions.
"""

import re
from dataclasses import dataclass

import numpy as np

from protosphere.errors import ArtifactError, DegenerateVectorError

CKPT_HEADER = re.compile(r"^# protosphere-checkpoint v1 dims=([0-9,]+)$")
_ZERO_NORM = 1e-12


@dataclass
class BackboneParams:
    """Affine layer weights (out x in) and biases for dims [p, h1, ..., d]."""

    layer_dims: list
    weights: list
    biases: list

    @classmethod
    def initialize(cls, layer_dims, seed):
        """Seeded uniform init in +-1/sqrt(fan_in); zero biases."""
        dims = [int(x) for x in layer_dims]
        if len(dims) < 2 or any(x < 1 for x in dims):
            raise ValueError("layer_dims must list at least input and output widths")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(dims, weights, biases)

    @classmethod
    def identity(cls, dim):
        """Single square affine layer with identity weights and zero bias."""
        return cls([dim, dim], [np.eye(dim)], [np.zeros(dim)])

    @property
    def input_dim(self):
        return self.layer_dims[0]

    @property
    def output_dim(self):
        return self.layer_dims[-1]


def forward_batch(params, inputs):
    """Run the stack on (B, p) rows; returns (B, d) unit rows plus the cache
    needed for backward_batch."""
    acts = [np.asarray(inputs, dtype=np.float64)]
    hidden = acts[0]
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        hidden = np.tanh(hidden @ w.T + b)
        acts.append(hidden)
    raw = hidden @ params.weights[-1].T + params.biases[-1]
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    if (norms < _ZERO_NORM).any():
        raise DegenerateVectorError("zero pre-normalization feature vector")
    feats = raw / norms
    return feats, (acts, feats, norms)


def backward_batch(params, cache, upstream):
    """Reverse-mode gradients of sum_i upstream_i . feature_i.

    Returns ([(dW, db) per layer], input gradient). The reduction over the
    batch is a fixed-order matrix product, so accumulation is deterministic.
    """
    acts, feats, norms = cache
    delta = (upstream - (upstream * feats).sum(axis=1, keepdims=True) * feats) / norms
    grads = [None] * len(params.weights)
    for li in range(len(params.weights) - 1, -1, -1):
        grads[li] = (delta.T @ acts[li], delta.sum(axis=0))
        delta = delta @ params.weights[li]
        if li > 0:
            delta = delta * (1.0 - acts[li] ** 2)
    return grads, delta


def forward(params, x):
    """Single-sample forward pass; returns the unit feature vector."""
    feats, _ = forward_batch(params, np.asarray(x, dtype=np.float64)[None, :])
    return feats[0]


def backward(params, x, upstream_grad):
    """Single-sample gradients of upstream_grad . forward(x) w.r.t. all
    parameters and the input."""
    x = np.asarray(x, dtype=np.float64)[None, :]
    _, cache = forward_batch(params, x)
    grads, input_grad = backward_batch(
        params, cache, np.asarray(upstream_grad, dtype=np.float64)[None, :]
    )
    return grads, input_grad[0]


def _check_pair(z, w):
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if z.shape != w.shape:
        raise ValueError("dimension mismatch")
    return z, w


def lipm_loss(z, w):
    """Alignment regression 0.5 * (z.w - 1)^2 against a single prototype."""
    z, w = _check_pair(z, w)
    return float(0.5 * (np.dot(z, w) - 1.0) ** 2)


def lipm_grad(z, w):
    """Gradient of lipm_loss w.r.t. z: (z.w - 1) * w. Feed to backward() so the
    normalization Jacobian keeps the update tangent to the sphere."""
    z, w = _check_pair(z, w)
    return (np.dot(z, w) - 1.0) * w


@dataclass
class FeatureBatch:
    """Unit feature rows (B, d) with integer labels (B,)."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (len(self.features),):
            raise ValueError("features must be (B, d) with one label per row")
        norms = np.linalg.norm(self.features, axis=1)
        if (np.abs(norms - 1.0) > 1e-6).any():
            raise ValueError("features must be unit-norm")

    def __len__(self):
        return len(self.labels)


def _assigned_logits(features, protos, mapping):
    cols = protos.vectors[:, mapping.mapping]
    return features @ cols


def softmax_probs(batch, protos, mapping):
    """Row-softmax of the assigned-prototype logits, (B, c)."""
    logits = _assigned_logits(batch.features, protos, mapping)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def psc_ce_loss(batch, protos, mapping):
    """Mean softmax cross-entropy over the batch, logits z . w_{A(k)},
    computed with max-subtraction."""
    if batch.features.shape[1] != protos.dim:
        raise ValueError("feature/prototype dimension mismatch")
    logits = _assigned_logits(batch.features, protos, mapping)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(len(batch)), batch.labels]
    return float(np.mean(log_norm - picked))


def psc_ce_feature_grad(z, y, protos, mapping):
    """Per-sample CE gradient w.r.t. the feature, split into the force toward
    the true prototype (pull) and away from the others (push)."""
    batch = FeatureBatch(np.asarray(z, dtype=np.float64)[None, :], [y])
    probs = softmax_probs(batch, protos, mapping)[0]
    cols = protos.vectors[:, mapping.mapping]
    pull = -(1.0 - probs[y]) * cols[:, y]
    weights = probs.copy()
    weights[y] = 0.0
    push = cols @ weights
    return pull, push


def psc_prototype_grad(batch, probs, j):
    """Batch-sum CE gradient w.r.t. prototype column j under the identity
    assignment, split into the force toward own-class features (attract) and
    away from other-class features (repel). Repel is generally nonzero even
    when the batch holds no sample of class j (passive update)."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape[0] != len(batch):
        raise ValueError("probs row count must match the batch")
    if (np.abs(probs.sum(axis=1) - 1.0) > 1e-9).any():
        raise ValueError("probability rows must sum to 1")
    own = batch.labels == j
    attract = -((1.0 - probs[own, j])[None, :] @ batch.features[own]).ravel()
    repel = (probs[~own, j][None, :] @ batch.features[~own]).ravel()
    return attract, repel


def lipm_sample_loss(z, y, protos, mapping):
    """Per-sample alignment loss; reads exactly one prototype column."""
    return lipm_loss(z, protos.column(mapping[y]))


def ce_sample_loss(z, y, protos, mapping):
    """Per-sample CE via the column accessor; reads all c prototype columns."""
    logits = np.array([np.dot(z, protos.column(mapping[k])) for k in range(len(mapping))])
    shifted = logits - logits.max()
    return float(np.log(np.exp(shifted).sum()) - shifted[y])


def save_checkpoint(params, path):
    """Header with the layer widths, then one line per tensor: name, shape,
    row-major comma-separated doubles."""
    dims = ",".join(str(x) for x in params.layer_dims)
    lines = [f"# protosphere-checkpoint v1 dims={dims}"]
    for li, (w, b) in enumerate(zip(params.weights, params.biases)):
        shape = "x".join(str(s) for s in w.shape)
        lines.append(f"W{li} {shape} " + ",".join(f"{x:.17g}" for x in w.ravel()))
        lines.append(f"b{li} {b.shape[0]} " + ",".join(f"{x:.17g}" for x in b))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ArtifactError("empty checkpoint file")
    m = CKPT_HEADER.match(lines[0])
    if not m:
        raise ArtifactError(f"malformed checkpoint header: {lines[0]!r}")
    dims = [int(x) for x in m.group(1).split(",")]
    n_layers = len(dims) - 1
    if len(lines) - 1 != 2 * n_layers:
        raise ArtifactError(
            f"expected {2 * n_layers} tensor lines, found {len(lines) - 1}"
        )
    weights, biases = [], []
    for li in range(n_layers):
        w = _parse_tensor(lines[1 + 2 * li], f"W{li}", (dims[li + 1], dims[li]))
        b = _parse_tensor(lines[2 + 2 * li], f"b{li}", (dims[li + 1],))
        weights.append(w)
        biases.append(b)
    return BackboneParams(dims, weights, biases)


def _parse_tensor(line, name, shape):
    parts = line.split(" ", 2)
    if len(parts) != 3 or parts[0] != name:
        raise ArtifactError(f"expected tensor {name}, got line {line[:40]!r}")
    declared = tuple(int(x) for x in parts[1].split("x"))
    if declared != shape:
        raise ArtifactError(f"tensor {name} shape {declared} does not match {shape}")
    values = np.array([float(v) for v in parts[2].split(",")])
    if values.size != int(np.prod(shape)):
        raise ArtifactError(f"tensor {name} has {values.size} values")
    return values.reshape(shape)
