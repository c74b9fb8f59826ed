"""Model Hamiltonians: Landau-Zener, Ising chain, harmonic oscillator, LMG."""
from .ramp import Ramp
from .lz import lz_cd_analytic, lz_energies, lz_model
from .ising import (
    MomentumSectorModel,
    SubBlockClassification,
    classify_subblocks,
    exigency_ising,
    ising_cd_momentum,
    ising_dense,
    ising_momentum,
    selected_cost_ising,
    transitionless_cost_ising,
    two_spin_cd_analytic,
)
from .oscillator import ho_cd_analytic, ho_exigency_analytic, ho_model
from .lmg import lmg_exigency, lmg_exigency_generic, lmg_ground_state, lmg_hp_exigency, lmg_model
