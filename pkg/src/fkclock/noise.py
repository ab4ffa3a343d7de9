"""Amplitude-damping plus dephasing Kraus channels after every fundamental
gate, device-derived rates, and the noisy-vs-ideal fidelity sweep.

Fundamental gates are CNOT, RX, RY, RZ. Everything else is rewritten first:
RZZ as CNOT-RZ-CNOT, H as RZ(pi) then RY(pi/2), X as RX(pi), S-dagger as
RZ(-pi/2), each correct up to a global phase. Channels act with the
single-qubit rate after every rewritten one-qubit gate and with the two-qubit
rate on both qubits after every CNOT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sim import DENSITY_WIDTH_CAP, DensityMatrix, Gate, StateVector, uhlmann_fidelity


@dataclass(frozen=True)
class NoiseParams:
    """Per-gate-class error probabilities, applied as p_amp = p_deph = p."""

    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            if not 0 <= p < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {p}")


@dataclass(frozen=True)
class DeviceProfile:
    """Published coherence times and gate durations, microseconds."""

    name: str
    t1: float
    t2: float
    tau1: float
    tau2: float

    def __post_init__(self):
        for field_name in ("t1", "t2", "tau1", "tau2"):
            if getattr(self, field_name) <= 0:
                raise ValueError(f"{field_name} must be positive")
        if self.t2 >= 2 * self.t1:
            raise ValueError("need T2 < 2*T1 for a finite dephasing time")

    @property
    def t_phi(self) -> float:
        return 2 * self.t1 * self.t2 / (2 * self.t1 - self.t2)


DEVICES = {
    "peekskill": DeviceProfile("IBMQ Peekskill", 250.12, 242.82, 0.0035, 0.420571),
    "hanoi": DeviceProfile("IBMQ Hanoi", 160.64, 144.7, 0.0035, 0.318603),
    "ionq11": DeviceProfile("IonQ 11 qubits", 1e7, 2e5, 10.0, 210.0),
}


@dataclass(frozen=True)
class DeviceRates:
    """The four raw channel probabilities from the decay formulas."""

    pa1: float
    pd1: float
    pa2: float
    pd2: float


def device_rate_detail(device: DeviceProfile) -> DeviceRates:
    def pa(tau):
        return 1.0 - math.exp(-tau / device.t1)

    def pd(tau):
        return 1.0 - math.exp(-2 * tau / device.t_phi)

    return DeviceRates(pa(device.tau1), pd(device.tau1),
                       pa(device.tau2), pd(device.tau2))


def rates_from_device(device: DeviceProfile) -> NoiseParams:
    """Per-gate-class probabilities; the amplitude-damping value stands in for
    the common p of each class (the damping and dephasing rates are close when
    T1 ~ T2, which is what makes the single-p model sensible)."""
    detail = device_rate_detail(device)
    return NoiseParams(p1=detail.pa1, p2=detail.pa2)


def kraus_amplitude_damping(p: float) -> list[np.ndarray]:
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return [np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex),
            np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)]


def kraus_dephasing(p: float) -> list[np.ndarray]:
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return [np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex),
            np.array([[0, 0], [0, math.sqrt(p)]], dtype=complex)]


def apply_channel(rho: DensityMatrix, qubit: int, p_amp: float,
                  p_deph: float) -> DensityMatrix:
    """Amplitude damping then dephasing on one qubit; returns a new matrix."""
    out = rho.copy()
    out.apply_kraus(kraus_amplitude_damping(p_amp), qubit)
    out.apply_kraus(kraus_dephasing(p_deph), qubit)
    return out


def decompose_to_fundamental(gates: Sequence[Gate],
                             theta=None) -> list[Gate]:
    """Rewrite a gate list into CNOT/RX/RY/RZ with resolved angles."""
    out: list[Gate] = []
    for g in gates:
        q = g.qubits[0]
        if g.kind in ("rx", "ry", "rz"):
            out.append(Gate(g.kind, g.qubits, angle=g.resolved_angle(theta)))
        elif g.kind == "cnot":
            out.append(g)
        elif g.kind == "rzz":
            angle = g.resolved_angle(theta)
            out += [Gate("cnot", g.qubits),
                    Gate("rz", (g.qubits[1],), angle=angle),
                    Gate("cnot", g.qubits)]
        elif g.kind == "h":
            out += [Gate("rz", (q,), angle=math.pi),
                    Gate("ry", (q,), angle=math.pi / 2)]
        elif g.kind == "x":
            out.append(Gate("rx", (q,), angle=math.pi))
        elif g.kind == "sdg":
            out.append(Gate("rz", (q,), angle=-math.pi / 2))
        else:
            raise ValueError(f"cannot decompose gate kind {g.kind!r}")
    return out


def run_noisy(gates: Sequence[Gate], width: int, noise: NoiseParams,
              initial: str | DensityMatrix | None = None,
              theta=None) -> DensityMatrix:
    """Density-matrix evolution with channels after every fundamental gate."""
    if width > DENSITY_WIDTH_CAP:
        raise ValueError(f"width {width} above density cap {DENSITY_WIDTH_CAP}")
    if isinstance(initial, DensityMatrix):
        rho = initial.copy()
    elif initial is None:
        rho = DensityMatrix.zero(width)
    else:
        rho = DensityMatrix.from_statevector(StateVector.basis(initial))
    for g in decompose_to_fundamental(gates, theta):
        rho.apply_gate(g)
        p = noise.p2 if g.kind == "cnot" else noise.p1
        if p > 0:
            for q in g.qubits:
                rho.apply_kraus(kraus_amplitude_damping(p), q)
                rho.apply_kraus(kraus_dephasing(p), q)
    return rho


def conditional_level_density(rho: DensityMatrix, level: int, n_s: int,
                              spec) -> tuple[DensityMatrix, float]:
    """Clock-projected physical density matrix P rho P / tr and its weight."""
    from .clock import code_index
    levels = spec.levels
    dp = 1 << n_s
    block = rho.entries.reshape(dp, levels, dp, levels)
    c = code_index(level, spec)
    sub = block[:, c, :, c]
    weight = float(np.trace(sub).real)
    if weight < 1e-12:
        raise ValueError(f"clock level {level} has weight {weight:.3e}")
    return DensityMatrix(sub / weight, n_s), weight


def default_p2_grid() -> np.ndarray:
    return np.logspace(-4, -1, 12)


def noise_sweep(config, theta: np.ndarray,
                p2_grid: np.ndarray | None = None) -> list[dict]:
    """Fidelity-vs-error-rate table comparing the variational and Trotter
    circuits under the same channels.

    The variational circuit runs once per p2 with the noiselessly optimized
    parameters; each clock level is conditioned and compared against the ideal
    branch. The Trotter side runs the bare evolution circuit per level on the
    physical register alone.
    """
    from .trotter import build_trotter_circuit
    if theta is None:
        raise ValueError("noise_sweep needs optimized parameters")
    if p2_grid is None:
        p2_grid = default_p2_grid()
    p1 = config.p1 if config.p1 is not None else 2e-4
    spec = config.clock_spec()
    fk = config.build_hamiltonian()
    circuit = config.build_circuit()
    refs = [fk.reference_branch(i) for i in range(spec.levels)]
    ref_rhos = [DensityMatrix.from_statevector(r) for r in refs]
    rows = []
    for p2 in p2_grid:
        noise = NoiseParams(p1=p1, p2=float(p2))
        rho = run_noisy(circuit.gates, circuit.width, noise, theta=theta)
        f_vfk = []
        for level in range(spec.levels):
            cond, _ = conditional_level_density(rho, level, config.n_s, spec)
            f_vfk.append(uhlmann_fidelity(cond, ref_rhos[level]))
        f_ts = []
        for level in range(spec.levels):
            tc = build_trotter_circuit(config, level)
            rho_ts = run_noisy(tc.gates, config.n_s, noise,
                               initial=config.initial_bits)
            f_ts.append(uhlmann_fidelity(rho_ts, ref_rhos[level]))
        row = {
            "p2": float(p2),
            "f_vfk_mean": float(np.mean(f_vfk)),
            "f_vfk_std": float(np.std(f_vfk)),
            "f_ts_mean": float(np.mean(f_ts)),
            "f_ts_std": float(np.std(f_ts)),
        }
        row["ratio"] = row["f_vfk_mean"] / row["f_ts_mean"]
        rows.append(row)
    return rows
