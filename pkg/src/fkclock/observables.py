"""Physics extracted from a (variational) history state: clock projections,
time-resolved expectation values, Loschmidt echoes, and the rate function.

Expectation values use the ratio form <O (x) P_t> / <P_t>: exact whenever the
clock branch has weight, and equal to the uniform-weight formula on the exact
history state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .clock import ClockSpec, code_index, encode
from .pauli import PauliString, PauliSum
from .sim import Gate, ParameterizedCircuit, StateVector, sample

MIN_BRANCH_PROB = 1e-12


def project_clock(state: StateVector, level: int,
                  spec: ClockSpec) -> tuple[StateVector, float]:
    """Normalized physical branch at one clock level and its probability."""
    n_s = state.width - spec.n_a
    if n_s < 1:
        raise ValueError("state narrower than the clock register")
    psi = state.amplitudes.reshape(1 << n_s, spec.levels)
    col = psi[:, code_index(level, spec)]
    prob = float(np.vdot(col, col).real)
    if prob < MIN_BRANCH_PROB:
        raise ValueError(f"clock level {level} has probability {prob:.3e}; "
                         "no normalized branch")
    return StateVector(col / math.sqrt(prob), n_s), prob


def expectation_at(state: StateVector, observable: PauliSum, level: int,
                   spec: ClockSpec) -> float:
    """<Psi| O (x) P_level |Psi> / <Psi| P_level |Psi> for a physical O."""
    n_s = state.width - spec.n_a
    if observable.width != n_s:
        raise ValueError(f"observable width {observable.width} != physical {n_s}")
    if not observable.is_hermitian():
        raise ValueError("observable must be Hermitian")
    psi = state.amplitudes.reshape(1 << n_s, spec.levels)
    col = psi[:, code_index(level, spec)]
    prob = float(np.vdot(col, col).real)
    if prob < MIN_BRANCH_PROB:
        raise ValueError(f"clock level {level} has probability {prob:.3e}")
    from .sim import apply_pauli_string
    num = 0j
    for string, coeff in observable:
        num += coeff * np.vdot(col, apply_pauli_string(col, string.labels))
    return float(num.real / prob)


def magnetization_op(n_s: int) -> PauliSum:
    """(1/n_s) sum_i Z_i."""
    return PauliSum(n_s, {PauliString.single("Z", q, n_s): 1.0 / n_s
                          for q in range(n_s)})


def magnetization(state: StateVector, level: int, n_s: int,
                  spec: ClockSpec) -> float:
    return expectation_at(state, magnetization_op(n_s), level, spec)


def loschmidt_direct(state: StateVector, t_i: int, t_j: int,
                     spec: ClockSpec) -> complex:
    """<psi(t_i)|psi(t_j)> from the normalized projected branches."""
    bra, _ = project_clock(state, t_i, spec)
    ket, _ = project_clock(state, t_j, spec)
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def rate_function(echo: float, dof: int) -> float:
    """-log(L)/D; warns and returns +inf for a non-positive echo."""
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if echo <= 0:
        warnings.warn("non-positive Loschmidt echo; rate function diverges")
        return math.inf
    return -math.log(echo) / dof


@dataclass(frozen=True)
class EchoCircuit:
    """Hadamard-test circuit: base state preparation plus an ancilla that
    controls X on every clock bit differing between the two times."""

    circuit: ParameterizedCircuit
    ancilla: int
    swap_bits: tuple[int, ...]
    part: str
    post_select: str


def time_swap_bits(t_i: int, t_j: int, spec: ClockSpec) -> tuple[int, ...]:
    """Clock bit positions differing between the encodings of the two levels."""
    bi, bj = encode(t_i, spec), encode(t_j, spec)
    return tuple(k for k, (a, b) in enumerate(zip(bi, bj)) if a != b)


def build_echo_circuit(base: ParameterizedCircuit, t_i: int, t_j: int,
                       part: str, spec: ClockSpec) -> EchoCircuit:
    """Extend a history-state circuit by the ancilla interference gadget."""
    if part not in ("real", "imag"):
        raise ValueError(f"part must be 'real' or 'imag', got {part!r}")
    n_s = base.width - spec.n_a
    ancilla = base.width
    gates = list(base.gates)
    gates.append(Gate("h", (ancilla,)))
    if part == "imag":
        gates.append(Gate("sdg", (ancilla,)))
    for bit in time_swap_bits(t_i, t_j, spec):
        gates.append(Gate("cnot", (ancilla, n_s + bit)))
    gates.append(Gate("h", (ancilla,)))
    return EchoCircuit(
        ParameterizedCircuit(base.width + 1, gates, n_params=base.n_params),
        ancilla, time_swap_bits(t_i, t_j, spec), part, encode(t_i, spec))


@dataclass(frozen=True)
class EchoEstimate:
    """Sampled Hadamard-test outcome for one overlap part."""

    part: str
    t_i: int
    t_j: int
    shots: int
    accepted: int
    n0: int
    n1: int
    paper_estimate: float
    conditional_estimate: float
    paper_stderr: float
    conditional_stderr: float


def _estimate_from_counts(hist: dict[str, int], shots: int, n_a: int,
                          post_select: str, part: str, t_i: int,
                          t_j: int) -> EchoEstimate:
    n0 = n1 = 0
    for outcome, count in hist.items():
        if outcome[1:] != post_select:
            continue
        if outcome[0] == "0":
            n0 += count
        else:
            n1 += count
    accepted = n0 + n1
    if accepted == 0:
        raise ValueError("zero post-selected shots")
    diff = n0 - n1
    mean = diff / shots
    var = (n0 + n1) / shots - mean ** 2
    paper = 2 ** n_a * mean
    paper_err = 2 ** n_a * math.sqrt(max(var, 0.0) / shots)
    p_hat = n0 / accepted
    cond = 2 * p_hat - 1
    cond_err = 2 * math.sqrt(max(p_hat * (1 - p_hat), 0.0) / accepted)
    return EchoEstimate(part, t_i, t_j, shots, accepted, n0, n1,
                        paper, cond, paper_err, cond_err)


def loschmidt_hadamard_state(state: StateVector, t_i: int, t_j: int,
                             part: str, shots: int, seed,
                             spec: ClockSpec) -> EchoEstimate:
    """Run the interference gadget directly on a prepared joint state."""
    if part not in ("real", "imag"):
        raise ValueError(f"part must be 'real' or 'imag', got {part!r}")
    n_s = state.width - spec.n_a
    ancilla = state.width
    width = state.width + 1
    amp = np.kron(state.amplitudes, np.array([1.0, 0.0], dtype=complex))
    gadget = [Gate("h", (ancilla,))]
    if part == "imag":
        gadget.append(Gate("sdg", (ancilla,)))
    gadget += [Gate("cnot", (ancilla, n_s + bit))
               for bit in time_swap_bits(t_i, t_j, spec)]
    gadget.append(Gate("h", (ancilla,)))
    from .sim import apply_gate_array
    for g in gadget:
        amp = apply_gate_array(amp, g, width)
    final = StateVector(amp, width)
    qubits = [ancilla] + [n_s + k for k in range(spec.n_a)]
    hist = sample(final, qubits, shots, seed)
    return _estimate_from_counts(hist, shots, spec.n_a, encode(t_i, spec),
                                 part, t_i, t_j)


def loschmidt_hadamard(theta: np.ndarray, t_i: int, t_j: int, part: str,
                       shots: int, seed, config) -> EchoEstimate:
    """Hadamard-test estimate on the variational state V(theta)|0>."""
    base = config.build_circuit()
    echo = build_echo_circuit(base, t_i, t_j, part, config.clock_spec())
    state = echo.circuit.apply(StateVector.zero(echo.circuit.width), theta)
    qubits = [echo.ancilla] + [config.n_s + k for k in range(config.n_a)]
    hist = sample(state, qubits, shots, seed)
    return _estimate_from_counts(hist, shots, config.n_a, echo.post_select,
                                 part, t_i, t_j)
