"""Classification with fixed equidistributed hyperspherical prototypes and a
label-to-prototype assignment that is re-optimized during training."""

from protosphere._core import BACKEND as ASSIGNMENT_BACKEND
from protosphere.assignment import (
    AssignmentMapping,
    ClassRepresentatives,
    assignment_churn,
    build_cost_matrix,
    hungarian_solve,
    reassign,
)
from protosphere.data import (
    LongTailSpec,
    VectorDataset,
    apply_long_tail,
    generate_gaussian_mixture,
)
from protosphere.hypersphere import (
    GeometryReport,
    PrototypeMatrix,
    UniformityConfig,
    circle_prototypes,
    estimate_prototypes,
    gaussian_potential,
    geometry_report,
    uniformity_gradient,
    uniformity_loss,
)
from protosphere.model import BackboneParams, FeatureBatch
from protosphere.trainer import MetricsRecord, TrainConfig, TrainState, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "ASSIGNMENT_BACKEND",
    "AssignmentMapping",
    "BackboneParams",
    "ClassRepresentatives",
    "FeatureBatch",
    "GeometryReport",
    "LongTailSpec",
    "MetricsRecord",
    "PrototypeMatrix",
    "TrainConfig",
    "TrainState",
    "UniformityConfig",
    "VectorDataset",
    "apply_long_tail",
    "assignment_churn",
    "build_cost_matrix",
    "circle_prototypes",
    "estimate_prototypes",
    "evaluate",
    "gaussian_potential",
    "generate_gaussian_mixture",
    "geometry_report",
    "hungarian_solve",
    "reassign",
    "train",
    "uniformity_gradient",
    "uniformity_loss",
]
