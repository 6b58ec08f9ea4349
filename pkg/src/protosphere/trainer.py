"""Training loop: SGD on the backbone under the alignment loss against fixed
prototypes, with periodic re-matching of classes to prototypes from the
momentum-averaged representatives. Also hosts the CE baselines, evaluation,
and inverse-frequency class weighting."""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from protosphere import assignment as asg
from protosphere import model
from protosphere.hypersphere import PrototypeMatrix

LOSS_MODES = ("lipm", "psc_ce", "fixed_ce")
METRICS_FIELDS = ("epoch", "train_loss", "eval_accuracy", "assignment_churn", "wall_time_ms")


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.1
    sgd_momentum: float = 0.9
    alpha: float = 0.9
    tau_prime: float = 1.0
    class_weighting: str = "none"  # or "inverse"
    loss_mode: str = "lipm"
    seed: int = 0
    hidden_dims: tuple = ()
    identity_init: bool = False
    dynamic_assignment: bool = True
    assignment_init: str = "identity"  # or "random"

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.sgd_momentum < 1.0:
            raise ValueError("sgd_momentum must be in [0, 1)")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.tau_prime <= 0:
            raise ValueError("tau_prime must be positive")
        if self.class_weighting not in ("none", "inverse"):
            raise ValueError(f"unknown class_weighting {self.class_weighting!r}")
        if self.loss_mode not in LOSS_MODES:
            raise ValueError(f"unknown loss_mode {self.loss_mode!r}")
        if self.assignment_init not in ("identity", "random"):
            raise ValueError(f"unknown assignment_init {self.assignment_init!r}")


@dataclass
class MetricsRecord:
    epoch: int
    train_loss: float
    eval_accuracy: float
    assignment_churn: float
    wall_time_ms: int


@dataclass
class TrainState:
    params: model.BackboneParams
    assignment: asg.AssignmentMapping
    representatives: asg.ClassRepresentatives
    prototypes: PrototypeMatrix
    epoch: int = 0
    history: list = field(default_factory=list)


def class_weights(counts):
    """Inverse-frequency weights normalized so balanced counts give all ones."""
    counts = np.asarray(counts, dtype=np.float64)
    if (counts < 1).any():
        raise ValueError("all class counts must be >= 1")
    return counts.mean() / counts


def evaluate(params, protos, mapping, dataset):
    """Label accuracy under the nearest-assigned-prototype rule
    argmax_k feature . w_{mapping(k)}."""
    if dataset.n == 0:
        raise ValueError("empty dataset")
    feats, _ = model.forward_batch(params, dataset.features)
    logits = feats @ protos.vectors[:, mapping.mapping]
    return float(np.mean(np.argmax(logits, axis=1) == dataset.labels))


def train(dataset, protos, config):
    """Alternating optimization for config.epochs epochs.

    Per batch: forward, fold each feature into its class representative,
    gradient step on the batch-mean loss; the class-to-prototype mapping is
    re-solved every tau steps (tau_prime solves per epoch). The input
    prototype matrix is never modified; the learnable-prototype baseline
    trains a copy. Deterministic for a fixed seed.
    """
    config.validate()
    if dataset.class_count != protos.count:
        raise ValueError(
            f"dataset has {dataset.class_count} classes but the prototype"
            f" matrix holds {protos.count}"
        )
    if (dataset.per_class_counts < 1).any():
        empty = int(np.argmin(dataset.per_class_counts))
        raise ValueError(f"class {empty} has no samples")

    seeds = np.random.SeedSequence(config.seed).spawn(3)
    params_rng, shuffle_rng, assign_rng = (np.random.default_rng(s) for s in seeds)

    dims = [dataset.input_dim, *config.hidden_dims, protos.dim]
    if config.identity_init:
        if len(dims) != 2 or dims[0] != dims[1]:
            raise ValueError("identity_init needs a single square affine layer")
        params = model.BackboneParams.identity(dims[0])
    else:
        params = model.BackboneParams.initialize(dims, params_rng.integers(2**32))
    velocity = [
        (np.zeros_like(w), np.zeros_like(b))
        for w, b in zip(params.weights, params.biases)
    ]

    c = protos.count
    if config.assignment_init == "random":
        mapping = asg.AssignmentMapping(assign_rng.permutation(c))
    else:
        mapping = asg.AssignmentMapping.identity(c)
    reps = asg.ClassRepresentatives.empty(protos.dim, c)

    # the PSC baseline trains its own prototype copy under the identity mapping
    learnable = config.loss_mode == "psc_ce"
    proto_cols = protos.vectors.copy() if learnable else protos.vectors
    if learnable:
        mapping = asg.AssignmentMapping.identity(c)

    weights = (
        class_weights(dataset.per_class_counts)
        if config.class_weighting == "inverse"
        else np.ones(c)
    )

    n = dataset.n
    steps_per_epoch = int(np.ceil(n / config.batch_size))
    tau = max(1, int(np.floor(steps_per_epoch / config.tau_prime)))
    state = TrainState(params, mapping, reps, protos)
    step = 0
    for epoch in range(config.epochs):
        tic = time.monotonic()
        order = shuffle_rng.permutation(n)
        loss_sum = 0.0
        churn_events = []
        for start in range(0, n, config.batch_size):
            rows = order[start : start + config.batch_size]
            xb = dataset.features[rows]
            yb = dataset.labels[rows]
            feats, cache = model.forward_batch(params, xb)
            for zi, yi in zip(feats, yb):
                reps.update(int(yi), zi, config.alpha)
            b = len(rows)
            wb = weights[yb]
            if config.loss_mode == "lipm":
                assigned = proto_cols[:, mapping.mapping[yb]].T
                dots = (feats * assigned).sum(axis=1)
                loss_sum += float(np.sum(wb * 0.5 * (dots - 1.0) ** 2))
                upstream = (wb * (dots - 1.0))[:, None] * assigned / b
            else:
                logits = feats @ proto_cols[:, mapping.mapping]
                shifted = logits - logits.max(axis=1, keepdims=True)
                expv = np.exp(shifted)
                probs = expv / expv.sum(axis=1, keepdims=True)
                picked = shifted[np.arange(b), yb]
                loss_sum += float(
                    np.sum(wb * (np.log(expv.sum(axis=1)) - picked))
                )
                residual = probs.copy()
                residual[np.arange(b), yb] -= 1.0
                residual *= wb[:, None]
                upstream = residual @ proto_cols[:, mapping.mapping].T / b
                if learnable:
                    proto_grad = feats.T @ residual / b
                    proto_cols[:, mapping.mapping] -= (
                        config.learning_rate * proto_grad
                    )
                    proto_cols /= np.linalg.norm(proto_cols, axis=0, keepdims=True)
            grads, _ = model.backward_batch(params, cache, upstream)
            for (vel_w, vel_b), (gw, gb), w, bias in zip(
                velocity, grads, params.weights, params.biases
            ):
                vel_w *= config.sgd_momentum
                vel_w += gw
                vel_b *= config.sgd_momentum
                vel_b += gb
                w -= config.learning_rate * vel_w
                bias -= config.learning_rate * vel_b
            step += 1
            if (
                config.dynamic_assignment
                and not learnable
                and step % tau == 0
                and reps.all_seen
            ):
                new_mapping = asg.reassign(reps, protos)
                churn_events.append(asg.assignment_churn(mapping, new_mapping))
                mapping = new_mapping
        eval_protos = PrototypeMatrix(proto_cols) if learnable else protos
        record = MetricsRecord(
            epoch=epoch,
            train_loss=loss_sum / n,
            eval_accuracy=evaluate(params, eval_protos, mapping, dataset),
            assignment_churn=float(np.mean(churn_events)) if churn_events else 0.0,
            wall_time_ms=int(round((time.monotonic() - tic) * 1000.0)),
        )
        state.history.append(record)
        state.epoch = epoch + 1
        state.assignment = mapping
    state.prototypes = PrototypeMatrix(proto_cols) if learnable else protos
    return state


def write_metrics(history, path):
    """Append-style metrics log: one JSON record per line, UTF-8, fields
    epoch, train_loss, eval_accuracy, assignment_churn, wall_time_ms."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in history:
            fh.write(
                json.dumps(
                    {name: getattr(rec, name) for name in METRICS_FIELDS},
                    ensure_ascii=False,
                )
                + "\n"
            )
