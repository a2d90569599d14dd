# Models Package
from .lie_group import AlgebraVector, CoAlgebraVector, FactorKind, GroupElement, Signature, SE3, SO3_S1, SO3_SO3
from .geometry import HomogeneousPoint, HomogeneousStructure, Metric, PointKind, PotentialSpec, ProjectionRule, Subspace
from .dynamics import Diagnostics, Sample, State, Trajectory
from .control import ControlOutput, DriftDecomposition, ReconstructionReport, TransversalityReport
from .scenario import ConstraintSpec, ParameterSchema, ScenarioSpec, SimulationMode

__all__ = [
    # Lie group models
    "AlgebraVector",
    "CoAlgebraVector",
    "FactorKind",
    "GroupElement",
    "Signature",
    "SE3",
    "SO3_S1",
    "SO3_SO3",

    # Geometry models
    "HomogeneousPoint",
    "HomogeneousStructure",
    "Metric",
    "PointKind",
    "PotentialSpec",
    "ProjectionRule",
    "Subspace",

    # Dynamics models
    "Diagnostics",
    "Sample",
    "State",
    "Trajectory",

    # Control models
    "ControlOutput",
    "DriftDecomposition",
    "ReconstructionReport",
    "TransversalityReport",

    # Scenario models
    "ConstraintSpec",
    "ParameterSchema",
    "ScenarioSpec",
    "SimulationMode",
]
