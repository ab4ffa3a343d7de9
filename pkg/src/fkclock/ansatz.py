"""Layered two-qubit-block variational circuit with a state-preparation layer.

Each block couples a qubit pair with four rotations and one CNOT. A depth-d
circuit repeats, per clock qubit, blocks over every unordered physical pair
followed by blocks joining that clock qubit to every physical qubit, giving
exactly 2*d*n_a*(n_s^2 + n_s) parameters and d*n_a*(n_s^2 + n_s)/2 CNOTs.

In the clock-physical blocks the physical qubit drives the CNOT. With the
all-zeros initial product state this leaves the preparation state invariant
at theta = 0, so the circuit starts at the exact dt = 0 ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sim import Gate, ParameterizedCircuit


@dataclass(frozen=True)
class AnsatzSpec:
    """Sizes of the layered block circuit."""

    n_s: int
    n_a: int
    depth: int

    def __post_init__(self):
        if self.n_s < 2:
            raise ValueError(f"n_s must be >= 2, got {self.n_s}")
        if self.n_a < 1:
            raise ValueError(f"n_a must be >= 1, got {self.n_a}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")

    @property
    def width(self) -> int:
        return self.n_s + self.n_a

    @property
    def n_params(self) -> int:
        return 2 * self.depth * self.n_a * (self.n_s ** 2 + self.n_s)

    @property
    def cx_count(self) -> int:
        return self.depth * self.n_a * (self.n_s ** 2 + self.n_s) // 2


def g_block(q1: int, q2: int, param_offset: int) -> list[Gate]:
    """Four rotations and one CNOT on the ordered pair (q1, q2).

    Parameter slots (offset + 0..3) map to RX(q1), RY(q1), RX(q2), RY(q2);
    the CNOT is controlled by q1.
    """
    if q1 == q2:
        raise ValueError(f"block needs two distinct qubits, got {q1} twice")
    return [
        Gate("rx", (q1,), param=param_offset),
        Gate("rx", (q2,), param=param_offset + 2),
        Gate("ry", (q1,), param=param_offset + 1),
        Gate("ry", (q2,), param=param_offset + 3),
        Gate("cnot", (q1, q2)),
    ]


def prep_layer(initial: str, spec: AnsatzSpec) -> list[Gate]:
    """X gates realizing the initial physical bit string, then H on the clock."""
    if len(initial) != spec.n_s or set(initial) - {"0", "1"}:
        raise ValueError(f"initial must be a {spec.n_s}-bit string, got {initial!r}")
    gates = [Gate("x", (q,)) for q, bit in enumerate(initial) if bit == "1"]
    gates += [Gate("h", (spec.n_s + a,)) for a in range(spec.n_a)]
    return gates


def build_ansatz(spec: AnsatzSpec, initial: str | None = None,
                 include_prep: bool = True) -> ParameterizedCircuit:
    """The full circuit: preparation layer followed by the block layers."""
    if initial is None:
        initial = "0" * spec.n_s
    gates: list[Gate] = prep_layer(initial, spec) if include_prep else []
    offset = 0
    for _ in range(spec.depth):
        for a in range(spec.n_s, spec.n_s + spec.n_a):
            for i in range(spec.n_s):
                for j in range(i + 1, spec.n_s):
                    gates += g_block(i, j, offset)
                    offset += 4
            for p in range(spec.n_s):
                gates += g_block(p, a, offset)
                offset += 4
    assert offset == spec.n_params
    return ParameterizedCircuit(spec.width, gates, n_params=spec.n_params)
