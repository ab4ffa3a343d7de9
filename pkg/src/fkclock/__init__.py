"""Real-time quantum dynamics recast as a ground-state problem.

The package builds the clock Hamiltonian for a transverse-field Ising chain,
finds its ground state variationally, and extracts time-dependent physics
from the optimized history state.
"""

__version__ = "0.1.0"

from .ansatz import AnsatzSpec, build_ansatz, g_block, prep_layer
from .clock import ClockSpec, encode, hop, projector
from .config import ConfigError, ExperimentConfig, resolve_config
from .hamiltonian import (FKHamiltonian, HamiltonianSplit, TFIMParams,
                          first_excited_energy, gap_formula)
from .noise import DEVICES, DeviceProfile, NoiseParams, rates_from_device
from .observables import (loschmidt_direct, loschmidt_hadamard,
                          loschmidt_hadamard_state, magnetization,
                          project_clock, rate_function)
from .pauli import PauliString, PauliSum, multiply
from .sim import (DensityMatrix, Gate, ParameterizedCircuit, StateVector,
                  expectation, overlap, sample, trace_distance,
                  uhlmann_fidelity)
from .trotter import (cx_count, infidelity_profile, mean_integrated_infidelity,
                      reference_state)
from .vqe import (AnnealSchedule, OptimizerConfig, VQERunRecord, adam_step,
                  gradient, gradient_adjoint, run_vqe, run_vqe_depth_sweep)

__all__ = [
    "AnsatzSpec", "AnnealSchedule", "ClockSpec", "ConfigError", "DEVICES",
    "DensityMatrix", "DeviceProfile", "ExperimentConfig", "FKHamiltonian",
    "Gate", "HamiltonianSplit", "NoiseParams", "OptimizerConfig",
    "ParameterizedCircuit", "PauliString", "PauliSum", "StateVector",
    "TFIMParams", "VQERunRecord", "adam_step", "build_ansatz", "cx_count",
    "encode", "expectation", "first_excited_energy", "g_block", "gap_formula",
    "gradient", "gradient_adjoint", "hop", "infidelity_profile",
    "loschmidt_direct", "loschmidt_hadamard", "loschmidt_hadamard_state",
    "magnetization", "mean_integrated_infidelity", "multiply", "overlap",
    "prep_layer", "project_clock", "projector", "rate_function",
    "rates_from_device", "reference_state", "resolve_config", "run_vqe",
    "run_vqe_depth_sweep", "sample", "trace_distance", "uhlmann_fidelity",
]
