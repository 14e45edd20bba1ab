"""Leading-order pionless EFT deuteron Hamiltonian in the oscillator s-wave basis."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .pauli import PauliSum, jw_one_body


@dataclass(frozen=True)
class PhysicsConstants:
    """Model constants (MeV, fm).

    ``hbar_c`` and ``nucleon_mass`` only enter the continuum extrapolation; the
    extrapolation uses the two-nucleon reduced mass ``nucleon_mass / 2``.
    """

    hbar_omega: float = 7.0
    V0: float = -5.68658111
    hbar_c: float = 197.3269804
    nucleon_mass: float = 938.91875

    def __post_init__(self):
        if self.hbar_omega <= 0 or self.hbar_c <= 0 or self.nucleon_mass <= 0:
            raise DomainError("hbar_omega, hbar_c and nucleon_mass must be positive")
        if self.V0 >= 0:
            raise DomainError("the contact strength V0 must be negative")

    @property
    def reduced_mass(self) -> float:
        return self.nucleon_mass / 2.0


DEFAULT_CONSTANTS = PhysicsConstants()


def kinetic_element(n_prime: int, n: int, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    """Kinetic-energy matrix element ``<n'|T|n>`` in MeV (tridiagonal)."""
    if n < 0 or n_prime < 0:
        raise DomainError("oscillator quanta must be non-negative")
    half = constants.hbar_omega / 2.0
    if n == n_prime:
        return half * (2 * n + 1.5)
    if n == n_prime + 1:
        return -half * math.sqrt(n * (n + 0.5))
    if n == n_prime - 1:
        return -half * math.sqrt((n + 1) * (n + 1.5))
    return 0.0


def potential_element(n_prime: int, n: int, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    """Contact interaction: ``V0`` on the ``n = n' = 0`` state only."""
    if n < 0 or n_prime < 0:
        raise DomainError("oscillator quanta must be non-negative")
    return constants.V0 if n == n_prime == 0 else 0.0


def build_matrix(N: int, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """The ``N x N`` matrix ``<n'|T + V|n>``, rows indexed by ``n'``."""
    if N < 1:
        raise DomainError("basis size must be ≥ 1")
    h = np.zeros((N, N))
    for n_prime in range(N):
        for n in range(max(0, n_prime - 1), min(N, n_prime + 2)):
            h[n_prime, n] = kinetic_element(n_prime, n, constants) + potential_element(
                n_prime, n, constants
            )
    # the two off-diagonal formulas agree analytically; pin exact symmetry
    return np.triu(h) + np.triu(h, 1).T


def qubit_hamiltonian(N: int, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> PauliSum:
    return jw_one_body(build_matrix(N, constants))


def exact_ground_energy(N: int, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    return float(np.linalg.eigvalsh(build_matrix(N, constants))[0])


def matrix_to_csv(h: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_prime", "n", "value_mev"])
    for i in range(h.shape[0]):
        for j in range(h.shape[1]):
            writer.writerow([i, j, repr(float(h[i, j]))])
    return buf.getvalue()


def pauli_to_csv(ham: PauliSum) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["string", "coeff_real", "coeff_imag"])
    for t in ham:
        writer.writerow([t.string.ops, repr(t.coefficient.real), repr(t.coefficient.imag)])
    return buf.getvalue()
