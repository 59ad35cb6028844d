"""Floquet-Bloch band structure of periodic quantum graphs with a degenerate band edge."""

from .band_edge import (
    DegeneracyReport,
    GapReport,
    PerturbSpec,
    QuantCheck,
    RobustnessReport,
    check_gap,
    degenerate_curve,
    ground_state_derivatives,
    perturb_and_verify,
    quant_condition,
    rho0,
)
from .dispersion import BandTable, SpectrumReport, band_sweep, discrete_diamond_bands, spectrum_report
from .errors import (
    ConfigError,
    CouplingOrderViolated,
    GapChainViolated,
    GridTooCoarse,
    InvalidCondition,
    LambdaOutOfRange,
    MultiplicityAmbiguous,
    NoCurve,
    NonPositiveLength,
    NotACurve,
    NotAnEigenvalue,
    QGBandError,
    ScanResolutionTooCoarse,
    SolverError,
    UnknownVertex,
    WrongDegree,
)
from .fd_oracle import DiscreteOperator, discretize, oracle_eigenvalues
from .graph_model import (
    CompactGraph,
    ConditionKind,
    Edge,
    VertexCondition,
    apply_floquet,
    build_gamma1,
    build_gamma2,
    dirichlet_perturbation,
)
from .polygon import PolygonCurve, classify, curve_samples, smoothness, topology
from .secular import (
    EigenSolution,
    eigenfunction,
    eigenvalue_count,
    eigenvalues_in,
    lowest_eigenvalues,
    secular_matrix,
    sigma_min,
)
from .transfer import BasisEval, basis_eval, transfer_matrix

__version__ = "0.1.0"
