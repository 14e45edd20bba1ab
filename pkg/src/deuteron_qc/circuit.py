"""Gate and circuit containers plus their line-oriented text format.

Text format, one gate per line::

    X q
    RY q theta
    H q
    SDGH q
    CNOT c t
    CRY c t theta

Angles are written with 17 significant digits so the text round-trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable

import numpy as np

from .errors import DomainError

_ARITY = {"X": 1, "RY": 1, "H": 1, "SDGH": 1, "CNOT": 2, "CRY": 2}
_PARAMETRIC = {"RY", "CRY"}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise DomainError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise DomainError(f"{self.kind} acts on {_ARITY[self.kind]} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise DomainError(f"{self.kind} needs distinct qubits, got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise DomainError("qubit indices must be non-negative")
        if (self.kind in _PARAMETRIC) != (self.angle is not None):
            raise DomainError(f"angle is required exactly for {sorted(_PARAMETRIC)}")
        if self.angle is not None and not math.isfinite(self.angle):
            raise DomainError("gate angle must be finite")

    def matrix(self) -> np.ndarray:
        """Dense unitary on the gate's own qubits, in the order of ``qubits``."""
        if self.kind == "X":
            return _X
        if self.kind == "H":
            return _H
        if self.kind == "SDGH":
            return _SDGH
        if self.kind == "RY":
            return ry_matrix(self.angle)
        if self.kind == "CNOT":
            return _CNOT
        out = np.eye(4, dtype=complex)
        out[2:, 2:] = ry_matrix(self.angle)
        return out

    def to_text(self) -> str:
        parts = [self.kind, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(f"{self.angle:.17g}")
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> Gate:
        parts = line.split()
        if not parts:
            raise DomainError("empty gate line")
        kind = parts[0].upper()
        if kind not in _ARITY:
            raise DomainError(f"unknown gate kind {parts[0]!r}")
        arity = _ARITY[kind]
        expected = arity + (kind in _PARAMETRIC)
        if len(parts) - 1 != expected:
            raise DomainError(f"{kind} expects {expected} field(s): {line!r}")
        qubits = tuple(int(p) for p in parts[1 : 1 + arity])
        angle = float(parts[-1]) if kind in _PARAMETRIC else None
        return cls(kind, qubits, angle)


def ry_matrix(theta: float) -> np.ndarray:
    """``exp(-i theta Y / 2)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SDG = np.diag([1, -1j])
# phase-dagger first, then Hadamard: maps Y onto Z
_SDGH = _H @ _SDG
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def PauliX(q: int) -> Gate:
    return Gate("X", (q,))


def RotY(q: int, angle: float) -> Gate:
    return Gate("RY", (q,), float(angle))


def Hadamard(q: int) -> Gate:
    return Gate("H", (q,))


def SdgH(q: int) -> Gate:
    return Gate("SDGH", (q,))


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def ControlledRotY(control: int, target: int, angle: float) -> Gate:
    return Gate("CRY", (control, target), float(angle))


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        if self.qubit_count < 1:
            raise DomainError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.qubit_count:
                raise DomainError(f"gate {g.to_text()!r} exceeds {self.qubit_count} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.qubit_count, self.gates + tuple(gates))

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    @property
    def cnot_count(self) -> int:
        return self.count("CNOT")

    def unitary(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` unitary (qubit 0 is the most significant bit)."""
        n = self.qubit_count
        u = np.eye(2**n, dtype=complex)
        for g in self.gates:
            u = embed(g.matrix(), g.qubits, n) @ u
        return u

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, text: str, qubit_count: int) -> Circuit:
        gates = [
            Gate.from_text(line)
            for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
        return cls(qubit_count, tuple(gates))


def embed(matrix: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Lift a k-qubit operator on ``qubits`` to the full n-qubit space."""
    rest = [q for q in range(n) if q not in qubits]
    full = reduce(np.kron, [matrix] + [np.eye(2)] * len(rest)) if rest else matrix
    # axes of `full` are ordered (qubits..., rest...); permute back to 0..n-1
    order = list(qubits) + rest
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)
