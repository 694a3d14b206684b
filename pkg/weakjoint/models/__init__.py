from weakjoint.models.ensembles import (
    AssignmentProblem,
    AssignmentResidual,
    OperatorBasis,
    PrePostEnsemble,
    Realizability,
    RealizabilityReport,
    WeakVector,
)
from weakjoint.models.instruments import (
    EPRSelection,
    InstrumentGrid,
    KrausSample,
    PhaseFit,
    PointerDistribution,
    UncertaintyReport,
)
from weakjoint.models.kernel import Feasibility, PolynomialF, RootBranch
from weakjoint.models.nogo import ObservablePair, ObstructionProfile, Verdict
from weakjoint.models.operators import CanonicalGrid, Operator, StateVector
from weakjoint.models.weyl import CompositeTransform, DiscreteWeylBasis, PhasePoint

__all__ = [
    "AssignmentProblem",
    "AssignmentResidual",
    "OperatorBasis",
    "PrePostEnsemble",
    "Realizability",
    "RealizabilityReport",
    "WeakVector",
    "EPRSelection",
    "InstrumentGrid",
    "KrausSample",
    "PhaseFit",
    "PointerDistribution",
    "UncertaintyReport",
    "Feasibility",
    "PolynomialF",
    "RootBranch",
    "ObservablePair",
    "ObstructionProfile",
    "Verdict",
    "CanonicalGrid",
    "Operator",
    "StateVector",
    "CompositeTransform",
    "DiscreteWeylBasis",
    "PhasePoint",
]
