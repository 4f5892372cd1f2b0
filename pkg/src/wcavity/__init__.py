"""Generation of N-atom W-class states in fiber-coupled cavities."""
from .analytic import (
    coefficients,
    effective_couplings,
    generation_times,
    target_state,
)
from .dynamics import (
    IntegratorConfig,
    RunResult,
    evolve_effective,
    evolve_full,
    evolve_lindblad,
    evolve_schrodinger,
    fidelity,
    reduce_to_atoms,
)
from .hamiltonian import build_effective, build_full_interaction_picture, build_full_static
from .model import BasisLabel, SystemParams, basis_index, validate_params
from .normal_modes import build_transform, detuning_spectrum, verify_diagonalization

__version__ = "0.1.0"
