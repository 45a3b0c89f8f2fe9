"""Single-particle lattice dynamics under H = H0 + i*Gamma.

The package quantifies how gain and loss break the lattice continuity
equation, repairs the current with a minimal longitudinal correction, and
reconstructs the classical electromagnetic fields the corrected current
would source. Brute-force oracles (dense propagators, a system (x) meter
postselection simulation) validate the production solvers independently.
"""

from .errors import ConfigError, NumericalError
from .lattice import LatticeSpec, curl_plaquette, div_bond, grad_bond
from .model import (JumpGamma, MatrixGamma, MeterModel, ModelSpec,
                    OnsiteGamma, QuantumState, build_gamma, build_h0,
                    build_meter_model)
from .evolve import (EvolveConfig, evolve, evolve_operators, gamma_shift,
                     phase_aligned_distance, step_expm, step_rk4)
from .observe import (bond_current, density, ehrenfest_rhs, eoc_residual,
                      expectation, source_term)
from .fieldsolve import (CurrentSet, FieldSnapshot, assemble_fields,
                         corrected_current, current_set, helmholtz,
                         jl_from_phi, poisson_phi,
                         vector_potential_quasistatic,
                         vector_potential_retarded, vector_potential_wave)
from .oracle import (effective_hamiltonian_check, finite_diff,
                     jump_realization, postselect_step,
                     postselection_convergence, propagate_exact,
                     propagator_agreement)
from .config import (CustomInit, FieldOptions, GaussianInit, LocalizedInit,
                     OracleOptions, OutputOptions, PlaneWaveInit, RunConfig,
                     build_initial_state, config_echo, parse_config,
                     parse_config_tree)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "NumericalError",
    "LatticeSpec", "grad_bond", "div_bond", "curl_plaquette",
    "ModelSpec", "OnsiteGamma", "MatrixGamma", "JumpGamma", "QuantumState",
    "MeterModel", "build_h0", "build_gamma", "build_meter_model",
    "EvolveConfig", "evolve", "evolve_operators", "step_rk4", "step_expm",
    "gamma_shift", "phase_aligned_distance",
    "density", "bond_current", "expectation", "ehrenfest_rhs", "source_term",
    "eoc_residual",
    "CurrentSet", "FieldSnapshot", "poisson_phi", "helmholtz",
    "corrected_current", "current_set", "jl_from_phi",
    "vector_potential_wave", "vector_potential_quasistatic",
    "vector_potential_retarded", "assemble_fields",
    "propagate_exact", "propagator_agreement", "postselect_step",
    "effective_hamiltonian_check", "jump_realization",
    "postselection_convergence", "finite_diff",
    "RunConfig", "parse_config", "parse_config_tree", "build_initial_state",
    "config_echo", "LocalizedInit", "GaussianInit", "PlaneWaveInit",
    "CustomInit", "FieldOptions", "OracleOptions", "OutputOptions",
    "__version__",
]
