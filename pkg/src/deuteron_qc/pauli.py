"""Weighted Pauli-string algebra and the Jordan-Wigner image of one-body operators.

Strings are stored as text over ``{I, X, Y, Z}``; character ``q`` acts on qubit
``q``, and qubit 0 is the leftmost (most significant) tensor factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import DomainError

COEFF_CUTOFF = 1e-12
REAL_TOL = 1e-10
SYMMETRY_TOL = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products: (a, b) -> (phase, c) with a.b = phase * c
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``PauliString("XZI")``."""

    ops: str

    def __post_init__(self):
        if not self.ops:
            raise DomainError("a Pauli string needs at least one qubit")
        bad = set(self.ops) - set("IXYZ")
        if bad:
            raise DomainError(f"invalid Pauli characters {sorted(bad)} in {self.ops!r}")

    @classmethod
    def identity(cls, num_qubits: int) -> PauliString:
        return cls("I" * num_qubits)

    @classmethod
    def from_ops(cls, ops: Mapping[int, str], num_qubits: int) -> PauliString:
        """Build a string from a sparse ``{qubit: 'X'|'Y'|'Z'}`` mapping."""
        chars = ["I"] * num_qubits
        for q, p in ops.items():
            if not 0 <= q < num_qubits:
                raise DomainError(f"qubit {q} out of range for {num_qubits} qubits")
            chars[q] = p
        return cls("".join(chars))

    @property
    def num_qubits(self) -> int:
        return len(self.ops)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.ops)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.ops) if c != "I")

    @property
    def label(self) -> str:
        """Indexed form, e.g. ``"X0X1"`` for ``"XXI"``; ``"I"`` for the identity."""
        return "".join(f"{c}{q}" for q, c in enumerate(self.ops) if c != "I") or "I"

    def is_identity(self) -> bool:
        return self.weight == 0

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, (PAULI_MATRICES[c] for c in self.ops))

    def __str__(self) -> str:
        return self.ops


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    string: PauliString

    @property
    def num_qubits(self) -> int:
        return self.string.num_qubits

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return multiply(self, other)
        return PauliTerm(self.coefficient * other, self.string)

    __rmul__ = __mul__

    def matrix(self) -> np.ndarray:
        return self.coefficient * self.string.matrix()


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Operator product ``a @ b`` as a single term, phase folded into the coefficient."""
    if a.num_qubits != b.num_qubits:
        raise DomainError(f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}")
    phase = 1 + 0j
    chars = []
    for p, q in zip(a.string.ops, b.string.ops):
        ph, c = _PRODUCT[(p, q)]
        phase *= ph
        chars.append(c)
    return PauliTerm(a.coefficient * b.coefficient * phase, PauliString("".join(chars)))


class PauliSum:
    """Immutable weighted sum of same-width Pauli strings.

    Construction does not merge duplicates; call :meth:`simplify` (or use the
    arithmetic operators, which simplify) to get the canonical form.
    """

    __slots__ = ("_terms", "_n")

    def __init__(self, terms: Iterable[PauliTerm], qubit_count: int):
        if qubit_count < 1:
            raise DomainError("qubit_count must be positive")
        terms = tuple(terms)
        for t in terms:
            if t.num_qubits != qubit_count:
                raise DomainError(
                    f"term {t.string} has {t.num_qubits} qubits, expected {qubit_count}"
                )
        self._terms = terms
        self._n = qubit_count

    @classmethod
    def from_dict(cls, coeffs: Mapping[str, complex]) -> PauliSum:
        if not coeffs:
            raise DomainError("cannot infer qubit count from an empty mapping")
        n = len(next(iter(coeffs)))
        return cls((PauliTerm(complex(c), PauliString(s)) for s, c in coeffs.items()), n)

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self._terms

    @property
    def qubit_count(self) -> int:
        return self._n

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, self._terms))

    def __repr__(self) -> str:
        body = " + ".join(f"({t.coefficient:.6g})*{t.string}" for t in self._terms)
        return f"PauliSum({body or '0'}, n={self._n})"

    def coefficient(self, string: str | PauliString) -> complex:
        """Summed coefficient of ``string`` (0 when absent)."""
        key = string.ops if isinstance(string, PauliString) else string
        return sum((t.coefficient for t in self._terms if t.string.ops == key), 0j)

    def to_dict(self) -> dict[str, complex]:
        return {t.string.ops: t.coefficient for t in simplify(self)}

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other._n != self._n:
            raise DomainError(f"qubit count mismatch: {self._n} vs {other._n}")
        return simplify(PauliSum(self._terms + other._terms, self._n))

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            if other._n != self._n:
                raise DomainError(f"qubit count mismatch: {self._n} vs {other._n}")
            prods = (multiply(a, b) for a in self._terms for b in other._terms)
            return simplify(PauliSum(prods, self._n))
        if isinstance(other, PauliTerm):
            return self * PauliSum([other], other.num_qubits)
        return PauliSum((t * other for t in self._terms), self._n)

    def __rmul__(self, other):
        if isinstance(other, PauliTerm):
            return PauliSum([other], other.num_qubits) * self
        return self * other

    def adjoint(self) -> PauliSum:
        return PauliSum(
            (PauliTerm(t.coefficient.conjugate(), t.string) for t in self._terms), self._n
        )

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return all(abs(complex(t.coefficient).imag) < tol for t in self._terms)

    def matrix(self) -> np.ndarray:
        dim = 2**self._n
        out = np.zeros((dim, dim), dtype=complex)
        for t in self._terms:
            out += t.matrix()
        return out

    def to_text(self) -> str:
        """One ``<re> <im> <string>`` line per term; floats use round-trip repr."""
        lines = []
        for t in self._terms:
            c = complex(t.coefficient)
            lines.append(f"{float(c.real)!r} {float(c.imag)!r} {t.string.ops}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, qubit_count: int | None = None) -> PauliSum:
        terms = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DomainError(f"line {lineno}: expected '<re> <im> <string>', got {line!r}")
            re_, im_, s = parts
            terms.append(PauliTerm(complex(float(re_), float(im_)), PauliString(s)))
        if qubit_count is None:
            if not terms:
                raise DomainError("empty Pauli text needs an explicit qubit_count")
            qubit_count = terms[0].num_qubits
        return cls(terms, qubit_count)


def simplify(s: PauliSum) -> PauliSum:
    """Merge duplicate strings, drop near-zero terms and sort canonically."""
    acc: dict[str, complex] = {}
    for t in s:
        acc[t.string.ops] = acc.get(t.string.ops, 0j) + complex(t.coefficient)
    kept = (
        PauliTerm(c, PauliString(ops))
        for ops, c in sorted(acc.items())
        if abs(c) >= COEFF_CUTOFF
    )
    return PauliSum(kept, s.qubit_count)


def jw_lowering(n: int, num_qubits: int, z_sign: int = -1) -> PauliSum:
    """Jordan-Wigner image of the annihilator ``a_n``.

    ``a_n -> 1/2 [prod_{j<n} (z_sign * Z_j)] (X_n + i Y_n)``.  The default
    ``z_sign=-1`` is the ``-Z`` parity string; ``z_sign=+1`` gives the textbook
    ``Z`` string.  The two differ by the gauge ``a_n -> (-1)^n a_n``.
    """
    if not 0 <= n < num_qubits:
        raise DomainError(f"orbital index {n} out of range for {num_qubits} qubits")
    if z_sign not in (1, -1):
        raise DomainError("z_sign must be +1 or -1")
    prefix = "Z" * n
    tail = "I" * (num_qubits - n - 1)
    scale = 0.5 * z_sign**n
    return PauliSum(
        [
            PauliTerm(complex(scale), PauliString(prefix + "X" + tail)),
            PauliTerm(0.5j * z_sign**n, PauliString(prefix + "Y" + tail)),
        ],
        num_qubits,
    )


def jw_raising(n: int, num_qubits: int, z_sign: int = -1) -> PauliSum:
    return jw_lowering(n, num_qubits, z_sign).adjoint()


def jw_one_body(coeffs, z_sign: int = 1) -> PauliSum:
    """Qubit form of ``sum_{n,n'} M[n', n] a^dag_{n'} a_n`` for symmetric real ``M``.

    ``z_sign=+1`` keeps the one-particle block equal to ``M`` itself, which is
    the sign choice that gives negative XX + YY hopping coefficients.
    With ``z_sign=-1`` the off-diagonal elements with odd ``n + n'`` flip sign
    (same spectrum).
    """
    m = np.asarray(coeffs, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DomainError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise DomainError("one-body matrix must be symmetric")
    size = m.shape[0]
    lowering = [jw_lowering(n, size, z_sign) for n in range(size)]
    raising = [op.adjoint() for op in lowering]
    terms: list[PauliTerm] = []
    for n_prime in range(size):
        for n in range(size):
            if m[n_prime, n] == 0.0:
                continue
            terms.extend((raising[n_prime] * lowering[n] * float(m[n_prime, n])).terms)
    out = simplify(PauliSum(terms, size))
    if not out.is_real():
        raise DomainError("one-body image has non-real coefficients")
    return PauliSum((PauliTerm(complex(t.coefficient.real), t.string) for t in out), size)
