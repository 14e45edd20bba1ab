"""Statevector and density-matrix simulation with CNOT white noise and readout errors.

Basis labels are bit strings with qubit 0 leftmost, so label ``"10"`` is
amplitude index 2.  Only CNOTs are noisy; every CNOT is followed by the
two-qubit white-noise channel ``rho -> (1 - eps) rho + eps Tr_pair(rho) (x) I/4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import Circuit, Hadamard, SdgH
from .errors import ContractViolation, DomainError
from .pauli import PauliString, PauliSum, PauliTerm

STATE_TOL = 1e-10


# ---------------------------------------------------------------- states


@dataclass
class PureState:
    amplitudes: np.ndarray

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.size)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[int(label, 2)])

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class MixedState:
    rho: np.ndarray

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.rho.shape[0])))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.rho)), 0.0, None)

    def density_matrix(self) -> np.ndarray:
        return self.rho

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))


QuantumState = PureState | MixedState


def basis_state(label: str, num_qubits: int | None = None) -> PureState:
    if num_qubits is not None and len(label) != num_qubits:
        raise DomainError(f"initial label {label!r} must have {num_qubits} bits")
    if not label or set(label) - {"0", "1"}:
        raise DomainError(f"invalid basis label {label!r}")
    amps = np.zeros(2 ** len(label), dtype=complex)
    amps[int(label, 2)] = 1.0
    return PureState(amps)


# ---------------------------------------------------------------- noise model


def confusion_matrix(e0: float, e1: float) -> np.ndarray:
    """Column-stochastic ``C[read, true]`` with ``e0 = p(1|0)``, ``e1 = p(0|1)``."""
    return np.array([[1.0 - e0, e1], [e0, 1.0 - e1]])


@dataclass(frozen=True)
class NoiseModel:
    """Per-CNOT white-noise strength and per-qubit readout confusion.

    ``readout`` holds one ``((p00, p01), (p10, p11))`` matrix per qubit with
    ``p_ab = p(read a | true b)``; ``None`` means perfect readout.
    """

    cnot_epsilon: float = 0.0
    readout: tuple[tuple[tuple[float, float], tuple[float, float]], ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.cnot_epsilon <= 1.0:
            raise DomainError(f"cnot_epsilon must lie in [0, 1], got {self.cnot_epsilon}")
        if self.readout is not None:
            fixed = tuple(tuple(tuple(float(v) for v in row) for row in m) for m in self.readout)
            for q, m in enumerate(fixed):
                arr = np.asarray(m)
                if arr.shape != (2, 2):
                    raise DomainError(f"readout matrix for qubit {q} must be 2x2")
                if np.any(arr < 0) or np.any(arr > 1):
                    raise DomainError(f"readout matrix for qubit {q} has entries outside [0, 1]")
                if not np.allclose(arr.sum(axis=0), 1.0, atol=1e-12):
                    raise DomainError(f"readout matrix for qubit {q} columns must sum to 1")
            object.__setattr__(self, "readout", fixed)

    @classmethod
    def with_readout(cls, num_qubits: int, e0: float, e1: float, cnot_epsilon: float = 0.0):
        m = confusion_matrix(e0, e1)
        mat = tuple(tuple(row) for row in m.tolist())
        return cls(cnot_epsilon, tuple(mat for _ in range(num_qubits)))

    @property
    def has_readout_error(self) -> bool:
        if self.readout is None:
            return False
        return any(not np.allclose(m, np.eye(2)) for m in self.readout_matrices())

    def readout_matrices(self, num_qubits: int | None = None) -> list[np.ndarray]:
        if self.readout is None:
            if num_qubits is None:
                return []
            return [np.eye(2) for _ in range(num_qubits)]
        mats = [np.asarray(m, dtype=float) for m in self.readout]
        if num_qubits is not None:
            if len(mats) < num_qubits:
                raise DomainError(f"readout model covers {len(mats)} qubits, need {num_qubits}")
            mats = mats[:num_qubits]
        return mats


PERFECT = NoiseModel()


# ---------------------------------------------------------------- kernels


def _apply_to_axes(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    op = matrix.reshape([2] * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _white_noise(rho_t: np.ndarray, pair: tuple[int, int], n: int, eps: float) -> np.ndarray:
    if eps == 0.0:
        return rho_t
    a, b = pair
    front = [a, b, n + a, n + b]
    moved = np.moveaxis(rho_t, front, [0, 1, 2, 3])
    reduced = np.einsum("ijij...->...", moved)
    eye = np.eye(2)
    mixed = np.einsum("ik,jl,...->ijkl...", eye, eye, reduced) / 4.0
    mixed = np.moveaxis(mixed, [0, 1, 2, 3], front)
    return (1.0 - eps) * rho_t + eps * mixed


def run_pure(circuit: Circuit, initial: str | None = None) -> PureState:
    n = circuit.qubit_count
    start = basis_state(initial if initial is not None else "0" * n, n)
    psi = start.amplitudes.reshape([2] * n)
    for g in circuit:
        psi = _apply_to_axes(psi, g.matrix(), g.qubits)
    return PureState(psi.reshape(-1))


def run_noisy(circuit: Circuit, noise: NoiseModel, initial: str | None = None) -> MixedState:
    """Density-matrix evolution; every CNOT is followed by the white-noise channel."""
    n = circuit.qubit_count
    if any(g.kind == "CRY" for g in circuit):
        raise ContractViolation("decompose ControlledRotY before a noisy run")
    start = basis_state(initial if initial is not None else "0" * n, n)
    rho = start.density_matrix().reshape([2] * (2 * n))
    eps = noise.cnot_epsilon
    for g in circuit:
        u = g.matrix()
        rho = _apply_to_axes(rho, u, g.qubits)
        rho = _apply_to_axes(rho, u.conj(), [n + q for q in g.qubits])
        if g.kind == "CNOT":
            rho = _white_noise(rho, g.qubits, n, eps)
    return MixedState(rho.reshape(2**n, 2**n))


def run(circuit: Circuit, noise: NoiseModel | None = None, initial: str | None = None):
    """Pure run unless the model has CNOT noise."""
    if noise is not None and noise.cnot_epsilon > 0.0:
        return run_noisy(circuit, noise, initial)
    return run_pure(circuit, initial)


# ---------------------------------------------------------------- observables


@lru_cache(maxsize=256)
def _dense(observable: PauliSum) -> np.ndarray:
    return observable.matrix()


def _as_sum(observable) -> PauliSum:
    if isinstance(observable, PauliSum):
        return observable
    if isinstance(observable, PauliTerm):
        return PauliSum([observable], observable.num_qubits)
    if isinstance(observable, PauliString):
        return PauliSum([PauliTerm(1.0 + 0j, observable)], observable.num_qubits)
    if isinstance(observable, str):
        return _as_sum(PauliString(observable))
    raise DomainError(f"cannot interpret {type(observable).__name__} as an observable")


def expectation(state: QuantumState, observable) -> float:
    obs = _as_sum(observable)
    if obs.qubit_count != state.num_qubits:
        raise DomainError(
            f"observable acts on {obs.qubit_count} qubits, state has {state.num_qubits}"
        )
    m = _dense(obs)
    if isinstance(state, PureState):
        val = np.vdot(state.amplitudes, m @ state.amplitudes)
    else:
        val = np.trace(state.rho @ m)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise DomainError(f"expectation has imaginary part {val.imag:.3e}; is the observable Hermitian?")
    return float(val.real)


def basis_change_gates(string: PauliString) -> list:
    if string.is_identity():
        raise DomainError("identity strings are added analytically, never measured")
    gates = []
    for q, p in enumerate(string.ops):
        if p == "X":
            gates.append(Hadamard(q))
        elif p == "Y":
            gates.append(SdgH(q))
    return gates


def measurement_circuit(base: Circuit, string: PauliString) -> Circuit:
    if string.num_qubits != base.qubit_count:
        raise DomainError("string and circuit widths differ")
    return base.then(basis_change_gates(string))


def rotate_to_measurement_basis(state: QuantumState, string: PauliString) -> QuantumState:
    """Apply the (noiseless) basis-change gates of ``string`` to an existing state."""
    gates = basis_change_gates(string)
    n = state.num_qubits
    if isinstance(state, PureState):
        psi = state.amplitudes.reshape([2] * n)
        for g in gates:
            psi = _apply_to_axes(psi, g.matrix(), g.qubits)
        return PureState(psi.reshape(-1))
    rho = state.rho.reshape([2] * (2 * n))
    for g in gates:
        u = g.matrix()
        rho = _apply_to_axes(rho, u, g.qubits)
        rho = _apply_to_axes(rho, u.conj(), [n + q for q in g.qubits])
    return MixedState(rho.reshape(2**n, 2**n))


def apply_confusion(probs: np.ndarray, matrices: Sequence[np.ndarray], qubits=None) -> np.ndarray:
    """Push an outcome distribution through per-qubit 2x2 matrices."""
    n = int(round(math.log2(probs.size)))
    t = probs.reshape([2] * n)
    qubits = range(n) if qubits is None else qubits
    for q in qubits:
        t = _apply_to_axes(t, np.asarray(matrices[q]), [q])
    return t.reshape(-1)


@lru_cache(maxsize=64)
def parity_signs(string: PauliString) -> np.ndarray:
    """``(-1)^{sum of support bits}`` for every basis index."""
    n = string.num_qubits
    idx = np.arange(2**n)
    par = np.zeros(2**n, dtype=int)
    for q in string.support:
        par ^= (idx >> (n - 1 - q)) & 1
    return 1.0 - 2.0 * par


def outcome_distribution(state: QuantumState, string: PauliString, noise: NoiseModel | None = None):
    """Readout-level outcome probabilities for measuring ``string`` on ``state``."""
    probs = rotate_to_measurement_basis(state, string).probabilities()
    probs = probs / probs.sum()
    if noise is not None and noise.has_readout_error:
        probs = apply_confusion(probs, noise.readout_matrices(string.num_qubits))
    return probs


@dataclass(frozen=True)
class ExpectationEstimate:
    """A (possibly sampled) expectation value.

    ``shots = 0`` marks an infinite-shot (exact distribution) value.
    ``distribution`` keeps the measured outcome frequencies so multi-qubit
    readout correction can be applied afterwards.
    """

    mean: float
    std_error: float
    shots: int
    distribution: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __add__(self, other: ExpectationEstimate) -> ExpectationEstimate:
        return ExpectationEstimate(
            self.mean + other.mean, math.hypot(self.std_error, other.std_error), 0
        )

    def scaled(self, c: float) -> ExpectationEstimate:
        return ExpectationEstimate(c * self.mean, abs(c) * self.std_error, self.shots)


def estimate_from_distribution(
    probs: np.ndarray, string: PauliString, shots: int | None, rng=None
) -> ExpectationEstimate:
    signs = parity_signs(string)
    if shots is None:
        return ExpectationEstimate(float(np.dot(signs, probs)), 0.0, 0, probs)
    if shots < 1:
        raise DomainError("shots must be ≥ 1")
    rng = np.random.default_rng(rng)
    p = np.clip(probs, 0.0, None)
    counts = rng.multinomial(shots, p / p.sum())
    freqs = counts / shots
    mean = float(np.dot(signs, freqs))
    std = math.sqrt(max(0.0, 1.0 - mean * mean) / shots)
    return ExpectationEstimate(mean, std, shots, freqs)


def sample_string(
    circuit: Circuit,
    string: PauliString,
    shots: int,
    noise: NoiseModel | None = None,
    rng_seed=None,
) -> ExpectationEstimate:
    """Estimate ``<string>`` from ``shots`` Z-basis samples of ``measurement_circuit``."""
    if shots < 1:
        raise DomainError("shots must be ≥ 1")
    state = run(measurement_circuit(circuit, string), noise)
    probs = state.probabilities()
    probs = probs / probs.sum()
    if noise is not None and noise.has_readout_error:
        probs = apply_confusion(probs, noise.readout_matrices(string.num_qubits))
    return estimate_from_distribution(probs, string, shots, rng_seed)


def task_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one task, keyed by e.g. (grid, term, scale, iteration)."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)
