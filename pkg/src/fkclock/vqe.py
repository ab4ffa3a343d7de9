"""Ground-state search: exact-expectation gradients, ADAM, and the annealing
schedule over effective time steps.

Two gradient backends are provided. ``parameter_shift`` is the two-point rule
E(theta + pi/2) - E(theta - pi/2) over each rotation parameter;  ``adjoint``
is a reverse sweep computing the same analytic derivative for every parameter
in one pass (the two agree to machine precision for rotation generators, and
the adjoint pass is what makes the default iteration budgets affordable).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hamiltonian import FKHamiltonian, gap_formula
from .pauli import PAULI_MATRICES, PauliSum
from .sim import (ParameterizedCircuit, StateVector, _apply_single,
                  apply_gate_array, expectation)

GRADIENT_METHODS = ("adjoint", "parameter_shift")
DENSE_ENERGY_CAP = 10

_GENERATORS = {"rx": "X", "ry": "Y", "rz": "Z", "rzz": "ZZ"}


@dataclass(frozen=True)
class OptimizerConfig:
    """ADAM settings, per-stage budgets, and the convergence ratio."""

    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_iter: int = 500
    conv_ratio: float = 1e-2
    grad_tol: float = 1e-4
    seed: int = 0
    jitter: float = 1e-3
    gradient_method: str = "adjoint"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.conv_ratio < 1:
            raise ValueError("convergence ratio must lie in (0, 1)")
        if self.gradient_method not in GRADIENT_METHODS:
            raise ValueError(f"gradient method must be one of {GRADIENT_METHODS}")


@dataclass(frozen=True)
class AnnealSchedule:
    """Stage mapping for the effective time step; the last stage hits dt exactly."""

    stages: int = 10
    mapping: str = "linear"

    def __post_init__(self):
        if self.stages < 1:
            raise ValueError("need at least one stage")
        if self.mapping not in ("linear", "root"):
            raise ValueError(f"unknown mapping {self.mapping!r}")

    def effective_dts(self, dt: float) -> list[float]:
        if self.mapping == "linear":
            out = [dt * k / self.stages for k in range(1, self.stages + 1)]
        else:
            out = [dt / k for k in range(self.stages, 0, -1)]
        out[-1] = dt
        return out


@dataclass
class AdamMoments:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamMoments":
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(theta: np.ndarray, grad: np.ndarray, moments: AdamMoments,
              config: OptimizerConfig) -> tuple[np.ndarray, AdamMoments]:
    """One bias-corrected ADAM update; returns fresh arrays."""
    if theta.shape != grad.shape:
        raise ValueError("theta and gradient shapes differ")
    t = moments.t + 1
    m = config.beta1 * moments.m + (1 - config.beta1) * grad
    v = config.beta2 * moments.v + (1 - config.beta2) * grad * grad
    m_hat = m / (1 - config.beta1 ** t)
    v_hat = v / (1 - config.beta2 ** t)
    theta_new = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return theta_new, AdamMoments(m, v, t)


def _energy_fn(hamiltonian) -> Callable[[StateVector], float]:
    if isinstance(hamiltonian, FKHamiltonian):
        return lambda s: hamiltonian.energy(s, backend="matrix_free")
    if isinstance(hamiltonian, PauliSum):
        return lambda s: expectation(s, hamiltonian)
    raise TypeError(f"unsupported Hamiltonian type {type(hamiltonian)!r}")


def _check_rotation_gates(circuit: ParameterizedCircuit) -> None:
    seen: set[int] = set()
    for g in circuit.gates:
        if g.param is None:
            continue
        if g.kind not in _GENERATORS:
            raise ValueError(f"parameterized gate {g.kind!r} is not a rotation")
        if g.param in seen:
            raise ValueError(f"parameter {g.param} referenced more than once")
        seen.add(g.param)


def gradient(theta: np.ndarray, circuit: ParameterizedCircuit,
             hamiltonian) -> np.ndarray:
    """Parameter-shift gradient: 0.5 * [E(theta + pi/2 e_j) - E(theta - pi/2 e_j)]."""
    _check_rotation_gates(circuit)
    energy = _energy_fn(hamiltonian)
    zero = StateVector.zero(circuit.width)
    grad = np.zeros(circuit.n_params)
    work = np.array(theta, dtype=float)
    for j in range(circuit.n_params):
        work[j] = theta[j] + np.pi / 2
        e_plus = energy(circuit.apply(zero, work))
        work[j] = theta[j] - np.pi / 2
        e_minus = energy(circuit.apply(zero, work))
        work[j] = theta[j]
        grad[j] = 0.5 * (e_plus - e_minus)
    return grad


def _apply_generator(amp: np.ndarray, kind: str, qubits: tuple[int, ...],
                     width: int) -> np.ndarray:
    gen = _GENERATORS[kind]
    if gen == "ZZ":
        out = _apply_single(amp, PAULI_MATRICES["Z"], qubits[0], width)
        return _apply_single(out, PAULI_MATRICES["Z"], qubits[1], width)
    return _apply_single(amp, PAULI_MATRICES[gen], qubits[0], width)


def gradient_adjoint(theta: np.ndarray, circuit: ParameterizedCircuit,
                     apply_c: Callable[[np.ndarray], np.ndarray]
                     ) -> tuple[float, np.ndarray]:
    """Energy and full analytic gradient from one forward and one reverse sweep."""
    _check_rotation_gates(circuit)
    w = circuit.width
    amp = StateVector.zero(w).amplitudes
    for g in circuit.gates:
        amp = apply_gate_array(amp, g, w, theta)
    lam = apply_c(amp)
    energy = float(np.vdot(amp, lam).real)
    grad = np.zeros(circuit.n_params)
    for g in reversed(circuit.gates):
        if g.param is not None:
            gen = _apply_generator(amp, g.kind, g.qubits, w)
            grad[g.param] += np.vdot(lam, gen).imag
        amp = apply_gate_array(amp, g, w, theta, dagger=True)
        lam = apply_gate_array(lam, g, w, theta, dagger=True)
    return energy, grad


@dataclass
class VQERunRecord:
    """Reproducible trace of one optimization run."""

    n_s: int
    n_a: int
    depth: int
    seed: int
    energies: list[float] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    stage_ids: list[int] = field(default_factory=list)
    theta: np.ndarray | None = None
    e_final: float = np.nan
    e_over_e1: float = np.nan
    converged: bool = False
    iterations: int = 0
    wall_time: float = 0.0


def _make_apply_c(fk: FKHamiltonian) -> Callable[[np.ndarray], np.ndarray]:
    if fk.width <= DENSE_ENERGY_CAP:
        dense = fk.to_dense()
        return lambda amp: dense @ amp
    return lambda amp: fk.apply(StateVector(amp, fk.width)).amplitudes


def run_vqe(config) -> VQERunRecord:
    """Minimize <C> over the ansatz parameters, annealing the time step.

    ``config`` is an :class:`fkclock.config.ExperimentConfig`. Intermediate
    stages stop on a small gradient norm or the iteration cap; only the final
    stage applies the E/E1 < conv_ratio test, with E1 from the quoted gap
    formula. The record is bit-reproducible from the seed.
    """
    opt: OptimizerConfig = config.optimizer
    t_start = time.perf_counter()
    circuit = config.build_circuit()
    rng = np.random.default_rng(opt.seed)
    theta = opt.jitter * rng.uniform(-1.0, 1.0, circuit.n_params)
    e1 = gap_formula(config.n_a)
    record = VQERunRecord(config.n_s, config.n_a, config.depth, opt.seed)
    dts = config.schedule.effective_dts(config.dt)

    for stage, dt_eff in enumerate(dts, start=1):
        fk = config.build_hamiltonian(dt_eff)
        apply_c = _make_apply_c(fk)
        moments = AdamMoments.zeros(circuit.n_params)
        final = stage == len(dts)
        energy_fn = _energy_fn(fk)

        for it in range(opt.max_iter + 1):
            if opt.gradient_method == "adjoint":
                energy, grad = gradient_adjoint(theta, circuit, apply_c)
            else:
                energy = energy_fn(circuit.apply(StateVector.zero(circuit.width), theta))
                grad = gradient(theta, circuit, fk)
            gnorm = float(np.linalg.norm(grad))
            record.energies.append(energy)
            record.grad_norms.append(gnorm)
            record.stage_ids.append(stage)
            if final and energy / e1 < opt.conv_ratio:
                record.converged = True
                break
            if not final and gnorm < opt.grad_tol:
                break
            if it == opt.max_iter:
                break
            theta, moments = adam_step(theta, grad, moments, opt)
        if record.converged:
            break

    record.theta = theta
    record.e_final = record.energies[-1]
    record.e_over_e1 = record.e_final / e1
    record.iterations = len(record.energies)
    record.wall_time = time.perf_counter() - t_start
    return record


def run_vqe_depth_sweep(config, depth_cap: int | None = None) -> list[VQERunRecord]:
    """Retry with depth+1 on non-convergence, up to the cap; fresh record each."""
    from dataclasses import replace
    depth_cap = config.depth if depth_cap is None else depth_cap
    records = []
    for d in range(config.depth, depth_cap + 1):
        rec = run_vqe(replace(config, depth=d))
        records.append(rec)
        if rec.converged:
            break
    return records
