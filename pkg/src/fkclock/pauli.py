"""Exact algebra over weighted Pauli strings.

Strings are labelled over {I, X, Y, Z} with one letter per qubit, physical
qubits first and clock qubits last. Label position 0 is the most significant
bit of a dense-matrix index, so ``to_dense`` renders label order as the Kron
product order.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

PRUNE_THRESHOLD = 1e-14
DENSE_WIDTH_CAP = 14
HERMITIAN_TOL = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Single-qubit products a*b -> (phase, c) with a*b = phase * c.
_SINGLE_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


class PauliString:
    """An immutable tensor product of single-qubit Pauli operators."""

    __slots__ = ("labels",)

    def __init__(self, labels: str | Iterable[str]):
        labels = "".join(labels)
        bad = set(labels) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli labels {sorted(bad)} in {labels!r}")
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @property
    def width(self) -> int:
        return len(self.labels)

    @classmethod
    def identity(cls, width: int) -> "PauliString":
        return cls("I" * width)

    @classmethod
    def single(cls, label: str, qubit: int, width: int) -> "PauliString":
        """One non-identity letter at ``qubit``, identity elsewhere."""
        if not 0 <= qubit < width:
            raise ValueError(f"qubit {qubit} out of range for width {width}")
        return cls("I" * qubit + label + "I" * (width - qubit - 1))

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliString) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"PauliString({self.labels!r})"

    def commutes_with(self, other: "PauliString") -> bool:
        """Operator commutation: an even number of anticommuting positions."""
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")
        clashes = sum(
            1 for a, b in zip(self.labels, other.labels)
            if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def to_matrix(self) -> np.ndarray:
        if self.width > DENSE_WIDTH_CAP:
            raise ValueError(f"width {self.width} above dense cap {DENSE_WIDTH_CAP}")
        out = np.eye(1, dtype=complex)
        for lab in self.labels:
            out = np.kron(out, PAULI_MATRICES[lab])
        return out


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Pauli group product: returns (phase, c) with phase*c == a@b exactly."""
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    phase: complex = 1
    out = []
    for la, lb in zip(a.labels, b.labels):
        ph, lc = _SINGLE_PRODUCT[(la, lb)]
        phase *= ph
        out.append(lc)
    return phase, PauliString("".join(out))


class PauliSum:
    """A weighted sum of Pauli strings over a fixed register width.

    Terms with |coefficient| below the prune threshold are dropped on
    construction and after every arithmetic operation. Instances are treated
    as immutable; all arithmetic returns new sums.
    """

    __slots__ = ("width", "_terms", "prune")

    def __init__(self, width: int,
                 terms: Mapping[PauliString, complex] | None = None,
                 prune: float = PRUNE_THRESHOLD):
        self.width = int(width)
        self.prune = float(prune)
        self._terms: dict[PauliString, complex] = {}
        if terms:
            for string, coeff in terms.items():
                if string.width != self.width:
                    raise ValueError(
                        f"term width {string.width} != sum width {self.width}")
                c = self._terms.get(string, 0) + complex(coeff)
                if abs(c) > self.prune:
                    self._terms[string] = c
                elif string in self._terms:
                    del self._terms[string]

    @classmethod
    def from_label(cls, labels: str, coeff: complex = 1.0,
                   prune: float = PRUNE_THRESHOLD) -> "PauliSum":
        s = PauliString(labels)
        return cls(s.width, {s: coeff}, prune=prune)

    @classmethod
    def identity(cls, width: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(width, {PauliString.identity(width): coeff})

    @classmethod
    def zero(cls, width: int) -> "PauliSum":
        return cls(width)

    @property
    def terms(self) -> dict[PauliString, complex]:
        return dict(self._terms)

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get(string, 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum) or self.width != other.width:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= self.prune
                   for k in keys)

    def __repr__(self) -> str:
        return f"PauliSum(width={self.width}, terms={len(self._terms)})"

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")
        merged = dict(self._terms)
        for string, coeff in other._terms.items():
            merged[string] = merged.get(string, 0) + coeff
        return PauliSum(self.width, merged, prune=self.prune)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1)

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(self.width,
                        {s: c * scalar for s, c in self._terms.items()},
                        prune=self.prune)

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, expanding term by term with exact phases."""
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")
        out: dict[PauliString, complex] = {}
        for sa, ca in self._terms.items():
            for sb, cb in other._terms.items():
                phase, sc = multiply(sa, sb)
                out[sc] = out.get(sc, 0) + ca * cb * phase
        return PauliSum(self.width, out, prune=self.prune)

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.width,
                        {s: c.conjugate() for s, c in self._terms.items()},
                        prune=self.prune)

    def tensor(self, other: "PauliSum") -> "PauliSum":
        """Kron product; ``self`` occupies the leading (physical-side) qubits."""
        out: dict[PauliString, complex] = {}
        for sa, ca in self._terms.items():
            for sb, cb in other._terms.items():
                out[PauliString(sa.labels + sb.labels)] = ca * cb
        return PauliSum(self.width + other.width, out, prune=self.prune)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        """True iff the dense rendering is Hermitian.

        Pauli strings are Hermitian and linearly independent, so this is
        exactly the condition that every coefficient is real within ``tol``.
        """
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def to_dense(self, width_cap: int = DENSE_WIDTH_CAP) -> np.ndarray:
        if self.width > width_cap:
            raise ValueError(f"width {self.width} above dense cap {width_cap}")
        dim = 2 ** self.width
        out = np.zeros((dim, dim), dtype=complex)
        for string, coeff in self._terms.items():
            out += coeff * string.to_matrix()
        return out

    def group_commuting(self) -> list[list[PauliString]]:
        """Greedy first-fit partition into mutually commuting groups.

        The group count is an upper bound, not a minimal coloring.
        """
        groups: list[list[PauliString]] = []
        for string in self._terms:
            for group in groups:
                if all(string.commutes_with(member) for member in group):
                    group.append(string)
                    break
            else:
                groups.append([string])
        return groups

    def to_text(self) -> str:
        """One term per line: ``<coeff_re> <coeff_im> <label string>``."""
        lines = [f"{c.real:.17g} {c.imag:.17g} {s.labels}"
                 for s, c in sorted(self._terms.items(), key=lambda kv: kv[0].labels)]
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, prune: float = PRUNE_THRESHOLD) -> "PauliSum":
        terms: dict[PauliString, complex] = {}
        width = None
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            re_part, im_part, labels = line.split()
            s = PauliString(labels)
            if width is None:
                width = s.width
            elif s.width != width:
                raise ValueError(f"inconsistent widths in text: {line!r}")
            terms[s] = terms.get(s, 0) + complex(float(re_part), float(im_part))
        if width is None:
            raise ValueError("no terms in text")
        return cls(width, terms, prune=prune)
