"""Exact pure-state and mixed-state simulation.

Amplitude index convention: qubit 0 is the most significant bit, matching the
Kron/label order of :mod:`fkclock.pauli`. Rotation gates follow
``RP(theta) = exp(-i*theta*P/2)``, which makes the parameter-shift rule exact
with shift pi/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PAULI_MATRICES, PauliSum

NORM_TOL = 1e-10
DENSITY_WIDTH_CAP = 10

ROTATION_KINDS = ("rx", "ry", "rz", "rzz")
FIXED_KINDS = ("cnot", "h", "x", "sdg")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = PAULI_MATRICES["X"]
_SDG = np.diag([1, -1j]).astype(complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """Dense unitary for one gate kind (2x2, or 4x4 for cnot/rzz)."""
    if kind in ROTATION_KINDS and angle is None:
        raise ValueError(f"{kind} needs an angle")
    if kind == "rx":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "ry":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rz":
        return np.diag([np.exp(-1j * angle / 2), np.exp(1j * angle / 2)])
    if kind == "rzz":
        p = np.exp(-1j * angle / 2)
        return np.diag([p, p.conjugate(), p.conjugate(), p])
    if kind == "cnot":
        return _CNOT.copy()
    if kind == "h":
        return _H.copy()
    if kind == "x":
        return _X.copy()
    if kind == "sdg":
        return _SDG.copy()
    raise ValueError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class Gate:
    """One gate: rotation kinds carry a parameter index or a fixed angle."""

    kind: str
    qubits: tuple[int, ...]
    param: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in ROTATION_KINDS + FIXED_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_q = 2 if self.kind in ("cnot", "rzz") else 1
        if len(self.qubits) != n_q:
            raise ValueError(f"{self.kind} acts on {n_q} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")
        if self.kind in ROTATION_KINDS:
            if (self.param is None) == (self.angle is None):
                raise ValueError(f"{self.kind} needs exactly one of param/angle")
        elif self.param is not None or self.angle is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    def resolved_angle(self, theta: Sequence[float] | None) -> float | None:
        if self.kind not in ROTATION_KINDS:
            return None
        if self.angle is not None:
            return self.angle
        if theta is None:
            raise ValueError("gate references a parameter but no vector given")
        return float(theta[self.param])


def _apply_single(amp: np.ndarray, u: np.ndarray, q: int, width: int) -> np.ndarray:
    t = amp.reshape(1 << q, 2, -1)
    out = np.empty_like(t)
    out[:, 0, :] = u[0, 0] * t[:, 0, :] + u[0, 1] * t[:, 1, :]
    out[:, 1, :] = u[1, 0] * t[:, 0, :] + u[1, 1] * t[:, 1, :]
    return out.reshape(amp.shape)

def _apply_pair(amp: np.ndarray, u4: np.ndarray, q1: int, q2: int,
                width: int) -> np.ndarray:
    """Apply a 4x4 unitary with row/col order (q1 bit, q2 bit)."""
    a, b = min(q1, q2), max(q1, q2)
    t = amp.reshape(1 << a, 2, 1 << (b - a - 1), 2, -1)
    if q1 > q2:  # u4 indexes (q1,q2); tensor axes are (a,b)=(q2,q1)
        u4 = u4.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    blocks = [t[:, 0, :, 0, :], t[:, 0, :, 1, :], t[:, 1, :, 0, :], t[:, 1, :, 1, :]]
    out = np.empty_like(t)
    targets = [out[:, 0, :, 0, :], out[:, 0, :, 1, :],
               out[:, 1, :, 0, :], out[:, 1, :, 1, :]]
    for r in range(4):
        acc = u4[r, 0] * blocks[0]
        for c in range(1, 4):
            if u4[r, c] != 0:
                acc = acc + u4[r, c] * blocks[c]
        targets[r][...] = acc
    return out.reshape(amp.shape)


def apply_gate_array(amp: np.ndarray, gate: Gate, width: int,
                     theta: Sequence[float] | None = None,
                     dagger: bool = False) -> np.ndarray:
    u = gate_matrix(gate.kind, gate.resolved_angle(theta))
    if dagger:
        u = u.conj().T
    if len(gate.qubits) == 1:
        return _apply_single(amp, u, gate.qubits[0], width)
    return _apply_pair(amp, u, gate.qubits[0], gate.qubits[1], width)


class StateVector:
    """A normalized pure state over ``width`` qubits."""

    __slots__ = ("amplitudes", "width")

    def __init__(self, amplitudes: np.ndarray, width: int | None = None):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if width is None:
            width = int(np.log2(amplitudes.size))
        if amplitudes.size != 1 << width:
            raise ValueError(f"need 2^{width} amplitudes, got {amplitudes.size}")
        self.amplitudes = amplitudes
        self.width = width

    @classmethod
    def zero(cls, width: int) -> "StateVector":
        amp = np.zeros(1 << width, dtype=complex)
        amp[0] = 1.0
        return cls(amp, width)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        width = len(bits)
        amp = np.zeros(1 << width, dtype=complex)
        amp[int(bits, 2)] = 1.0
        return cls(amp, width)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.width)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_normalized(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm() ** 2 - 1.0) > tol:
            raise ValueError(f"state norm^2 deviates from 1 by more than {tol}")


class ParameterizedCircuit:
    """An ordered gate list with a flat parameter vector in radians."""

    def __init__(self, width: int, gates: Iterable[Gate] = (),
                 n_params: int = 0, params: np.ndarray | None = None):
        self.width = width
        self.gates: list[Gate] = list(gates)
        self.n_params = n_params
        self.params = (np.zeros(n_params) if params is None
                       else np.asarray(params, dtype=float))
        if self.params.size != n_params:
            raise ValueError(f"need {n_params} parameters, got {self.params.size}")
        for g in self.gates:
            if any(q >= width for q in g.qubits):
                raise ValueError(f"gate {g} outside width {width}")
            if g.param is not None and not 0 <= g.param < n_params:
                raise ValueError(f"parameter index {g.param} out of range")

    def referenced_params(self) -> list[int]:
        return [g.param for g in self.gates if g.param is not None]

    def apply(self, state: StateVector,
              theta: Sequence[float] | None = None) -> StateVector:
        """Run the circuit on ``state``; ``theta`` overrides the bound vector."""
        if state.width != self.width:
            raise ValueError(f"state width {state.width} != circuit width {self.width}")
        theta = self.params if theta is None else theta
        amp = state.amplitudes
        for g in self.gates:
            amp = apply_gate_array(amp, g, self.width, theta)
        return StateVector(amp, self.width)

    def unitary(self, theta: Sequence[float] | None = None) -> np.ndarray:
        """Dense circuit unitary (small widths; test oracle).

        The gate kernels act on the leading state axis of a flat array, so the
        identity's columns evolve as a trailing batch dimension.
        """
        theta = self.params if theta is None else theta
        dim = 1 << self.width
        flat = np.eye(dim, dtype=complex).reshape(-1)
        for g in self.gates:
            flat = apply_gate_array(flat, g, self.width, theta)
        return flat.reshape(dim, dim)


def apply(circuit: ParameterizedCircuit, state: StateVector,
          theta: Sequence[float] | None = None) -> StateVector:
    out = circuit.apply(state, theta)
    out.check_normalized()
    return out


def apply_pauli_string(amp: np.ndarray, labels: str) -> np.ndarray:
    out = amp
    for q, lab in enumerate(labels):
        if lab != "I":
            out = _apply_single(out, PAULI_MATRICES[lab], q, len(labels))
    return out


def expectation(state: StateVector, observable: PauliSum) -> float:
    """<psi| observable |psi> for a Hermitian Pauli sum."""
    if state.width != observable.width:
        raise ValueError(f"width mismatch: state {state.width}, sum {observable.width}")
    if not observable.is_hermitian():
        raise ValueError("expectation requires a Hermitian PauliSum")
    amp = state.amplitudes
    val = 0j
    for string, coeff in observable:
        val += coeff * np.vdot(amp, apply_pauli_string(amp, string.labels))
    if abs(val.imag) > NORM_TOL:
        raise ValueError(f"imaginary residue {val.imag:.3e} exceeds tolerance")
    return float(val.real)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def sample(state: StateVector, qubits: Sequence[int], shots: int,
           seed) -> dict[str, int]:
    """Computational-basis histogram of the marginal over ``qubits``.

    Outcome keys are bitstrings ordered like the ``qubits`` argument.
    Deterministic given the seed (or an ``np.random.Generator``).
    """
    if len(qubits) == 0:
        raise ValueError("empty qubit set")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit in {qubits}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = state.width
    probs = np.abs(state.amplitudes.reshape((2,) * w)) ** 2
    keep = list(qubits)
    other = [q for q in range(w) if q not in keep]
    marg = probs.sum(axis=tuple(other)) if other else probs
    # axes of marg follow ascending original qubit index; reorder to `qubits`
    order = [sorted(keep).index(q) for q in keep]
    marg = np.transpose(marg, order).reshape(-1)
    marg = np.clip(marg, 0, None)
    marg /= marg.sum()
    counts = rng.multinomial(shots, marg)
    k = len(keep)
    return {format(i, f"0{k}b"): int(c) for i, c in enumerate(counts) if c > 0}


class DensityMatrix:
    """A mixed state: Hermitian, trace-one, PSD within tolerances."""

    __slots__ = ("entries", "width")

    def __init__(self, entries: np.ndarray, width: int | None = None):
        entries = np.asarray(entries, dtype=complex)
        if width is None:
            width = int(np.log2(entries.shape[0]))
        if entries.shape != (1 << width, 1 << width):
            raise ValueError(f"need a 2^{width} square matrix, got {entries.shape}")
        self.entries = entries
        self.width = width

    @classmethod
    def from_statevector(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(np.outer(a, a.conj()), state.width)

    @classmethod
    def zero(cls, width: int) -> "DensityMatrix":
        return cls.from_statevector(StateVector.zero(width))

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.entries.copy(), self.width)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                 eig_floor: float = -1e-9) -> None:
        m = self.entries
        if np.abs(m - m.conj().T).max() > herm_tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError("density matrix trace deviates from 1")
        if np.linalg.eigvalsh(m).min() < eig_floor:
            raise ValueError("density matrix has a negative eigenvalue")

    def apply_gate(self, gate: Gate, theta: Sequence[float] | None = None) -> None:
        """In-place rho -> U rho U^dagger.

        The flattened matrix is a 2*width-qubit array: row qubits first, then
        column qubits, so U acts on rows and conj(U) on shifted columns.
        """
        w = self.width
        flat = apply_gate_array(self.entries.reshape(-1), gate, 2 * w, theta)
        u = gate_matrix(gate.kind, gate.resolved_angle(theta)).conj()
        if len(gate.qubits) == 1:
            flat = _apply_single(flat, u, gate.qubits[0] + w, 2 * w)
        else:
            flat = _apply_pair(flat, u, gate.qubits[0] + w, gate.qubits[1] + w, 2 * w)
        self.entries = flat.reshape(self.entries.shape)

    def apply_kraus(self, kraus: Sequence[np.ndarray], qubit: int) -> None:
        """In-place rho -> sum_k K rho K^dagger on one qubit."""
        w = self.width
        flat = self.entries.reshape(-1)
        acc = np.zeros_like(flat)
        for k in kraus:
            term = _apply_single(flat, k, qubit, 2 * w)
            term = _apply_single(term, k.conj(), qubit + w, 2 * w)
            acc += term
        self.entries = acc.reshape(self.entries.shape)


def uhlmann_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """F(rho, sigma) = [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2."""
    rho.validate()
    sigma.validate()
    evals, vecs = np.linalg.eigh(rho.entries)
    sqrt_rho = (vecs * np.sqrt(np.clip(evals, 0, None))) @ vecs.conj().T
    inner = sqrt_rho @ sigma.entries @ sqrt_rho
    lam = np.clip(np.linalg.eigvalsh(inner), 0, None)
    return float(np.sum(np.sqrt(lam)) ** 2)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    lam = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return float(0.5 * np.abs(lam).sum())
