"""Counterdiabatic driving fields, their energetic cost and work statistics."""
from .errors import (
    CtcostError,
    DegenerateCrossingError,
    IntegrationDivergedError,
    InvalidInputError,
    NumericalError,
)
from .operators import (
    HBAR,
    QuantumState,
    SpectralDecomposition,
    commutator,
    eigendecompose,
    expectation_and_variance,
    frobenius_norm,
    thermal_state,
)
from .propagation import IntegratorConfig, Schedule, Trajectory, evolve, projector_derivatives, unitary
from .counterdiabatic import (
    CostReport,
    adiabatic_trajectory,
    cd_full,
    cd_selected,
    cost_selected,
    cost_transitionless,
    exigency,
    friction_power_expansion,
)
from .work import (
    Benefit,
    WorkDistribution,
    adiabatic_work,
    driving_benefit,
    inner_friction,
    transition_matrix,
    work_distribution,
)

__version__ = "0.1.0"
