"""Zero-noise extrapolation by CNOT repetition, and readout shift/rescale correction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit
from .errors import ContractViolation, DomainError, NumericError
from .simulator import (
    ExpectationEstimate,
    NoiseModel,
    apply_confusion,
    estimate_from_distribution,
    outcome_distribution,
    parity_signs,
    run,
    task_rng,
)
from .pauli import PauliString

DEFAULT_SCALES = (1, 3, 5, 7)
MIN_READOUT_CONTRAST = 0.1


def scale_noise(circuit: Circuit, r: int) -> Circuit:
    """Replace every CNOT by ``r`` consecutive copies (``r`` odd, so the unitary is kept)."""
    if r < 1 or r % 2 == 0:
        raise DomainError(f"noise scale must be an odd positive integer, got {r}")
    if any(g.kind == "CRY" for g in circuit):
        raise ContractViolation("decompose ControlledRotY before scaling CNOT noise")
    gates = []
    for g in circuit:
        gates.extend([g] * (r if g.kind == "CNOT" else 1))
    return Circuit(circuit.qubit_count, tuple(gates))


def _check_scales(scales: Sequence[int]) -> tuple[int, ...]:
    scales = tuple(int(r) for r in scales)
    if len(set(scales)) < 2:
        raise DomainError("zero-noise extrapolation needs at least two distinct scales")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise DomainError(f"scales must be strictly increasing, got {scales}")
    if any(r < 1 or r % 2 == 0 for r in scales):
        raise DomainError(f"scales must be odd positive integers, got {scales}")
    return scales


@dataclass(frozen=True)
class ZneSeries:
    scales: tuple[int, ...]
    estimates: tuple[ExpectationEstimate, ...]
    iterations: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scales", _check_scales(self.scales))
        object.__setattr__(self, "estimates", tuple(self.estimates))
        if len(self.estimates) != len(self.scales):
            raise DomainError("one estimate per scale is required")

    @property
    def means(self) -> np.ndarray:
        return np.array([e.mean for e in self.estimates])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([e.std_error for e in self.estimates])


@dataclass(frozen=True)
class ZneFit:
    intercept: float
    slope: float
    covariance: np.ndarray
    residual: float

    @property
    def intercept_std_error(self) -> float:
        return math.sqrt(max(0.0, float(self.covariance[0, 0])))

    @property
    def slope_std_error(self) -> float:
        return math.sqrt(max(0.0, float(self.covariance[1, 1])))

    def as_estimate(self) -> ExpectationEstimate:
        return ExpectationEstimate(self.intercept, self.intercept_std_error, 0)


def zne_extrapolate(series: ZneSeries) -> ZneFit:
    """Straight-line fit ``<O>(r) = <O>(0) + chi r``; inverse-variance weighted when possible."""
    r = np.asarray(series.scales, dtype=float)
    y = series.means
    sig = series.std_errors
    design = np.column_stack([np.ones_like(r), r])
    weighted = bool(np.all(sig > 0))
    w = 1.0 / sig**2 if weighted else np.ones_like(r)
    normal = design.T @ (w[:, None] * design)
    if abs(np.linalg.det(normal)) < 1e-14 * max(1.0, np.abs(normal).max() ** 2):
        raise NumericError("degenerate design matrix in zero-noise regression")
    cov = np.linalg.inv(normal)
    beta = cov @ (design.T @ (w * y))
    resid = y - design @ beta
    dof = len(r) - 2
    if weighted:
        chi2 = float(np.sum(w * resid**2))
    else:
        # uniform weights: scale by the residual variance
        s2 = float(np.sum(resid**2)) / dof if dof > 0 else 0.0
        cov = cov * s2
        chi2 = float(np.sum(resid**2))
    return ZneFit(float(beta[0]), float(beta[1]), cov, math.sqrt(chi2 / max(dof, 1)))


# ---------------------------------------------------------------- readout


def calibrate_readout(
    noise: NoiseModel, num_qubits: int, shots: int | None = None, seed: int = 0
) -> list[np.ndarray]:
    """Estimate per-qubit confusion matrices by preparing |0> and |1> and reading out.

    ``shots=None`` returns the model's true matrices.
    """
    true = noise.readout_matrices(num_qubits)
    if shots is None:
        return [m.copy() for m in true]
    if shots < 1:
        raise DomainError("calibration shots must be ≥ 1")
    out = []
    for q, m in enumerate(true):
        est = np.empty((2, 2))
        for b in (0, 1):
            flips = task_rng(seed, q, b).binomial(shots, m[1 - b, b])
            est[1 - b, b] = flips / shots
            est[b, b] = 1.0 - est[1 - b, b]
        out.append(est)
    return out


def _contrast(m: np.ndarray) -> float:
    # a = 1 - p(1|0) - p(0|1)
    return 1.0 - m[1, 0] - m[0, 1]


def correct_expectation(
    raw: ExpectationEstimate, string: PauliString, calibration: Sequence[np.ndarray]
) -> ExpectationEstimate:
    """Undo readout assignment errors on a parity estimate.

    Weight-one strings use ``(raw - b) / a``; heavier strings invert the
    per-qubit confusion matrices on the stored outcome distribution.
    """
    support = string.support
    if not support:
        raise DomainError("identity strings carry no readout error")
    if len(calibration) <= max(support):
        raise DomainError("calibration does not cover every measured qubit")
    contrasts = [_contrast(np.asarray(calibration[q])) for q in support]
    if min(contrasts) <= MIN_READOUT_CONTRAST:
        raise NumericError(f"readout correction is near-singular (contrast {min(contrasts):.3f})")
    scale = float(np.prod([1.0 / abs(a) for a in contrasts]))
    if len(support) == 1:
        m = np.asarray(calibration[support[0]])
        b = m[0, 1] - m[1, 0]
        return ExpectationEstimate(
            float((raw.mean - b) / contrasts[0]), raw.std_error * scale, raw.shots
        )
    if raw.distribution is None:
        raise DomainError("multi-qubit correction needs the outcome distribution")
    inv = [np.linalg.inv(np.asarray(m)) for m in calibration]
    corrected = apply_confusion(np.asarray(raw.distribution), inv, qubits=support)
    mean = float(np.dot(parity_signs(string), corrected))
    return ExpectationEstimate(mean, raw.std_error * scale, raw.shots, corrected)


# ---------------------------------------------------------------- series


def zne_series_terms(
    circuit: Circuit,
    strings: Iterable[PauliString],
    noise: NoiseModel,
    scales: Sequence[int] = DEFAULT_SCALES,
    shots: int | None = 8192,
    iterations: int = 10,
    seed: int = 0,
    calibration: Sequence[np.ndarray] | None = None,
    key: tuple[int, ...] = (),
    term_indices: Sequence[int] | None = None,
) -> list[ZneSeries]:
    """Per-string ZNE series; one noisy state per scale is shared by all strings.

    Each (string, scale, iteration) draw has its own generator keyed by
    ``(*key, term_index, r, iteration)``.
    """
    scales = _check_scales(scales)
    strings = list(strings)
    if iterations < 1:
        raise DomainError("iterations must be ≥ 1")
    if term_indices is None:
        term_indices = range(len(strings))
    per_string: list[list[ExpectationEstimate]] = [[] for _ in strings]
    for r in scales:
        state = run(scale_noise(circuit, r), noise)
        for slot, (ti, s) in enumerate(zip(term_indices, strings)):
            probs = outcome_distribution(state, s, noise)
            if shots is None:
                est = estimate_from_distribution(probs, s, None)
                if calibration is not None:
                    est = correct_expectation(est, s, calibration)
                per_string[slot].append(est)
                continue
            draws = []
            for it in range(iterations):
                est = estimate_from_distribution(probs, s, shots, task_rng(seed, *key, ti, r, it))
                if calibration is not None:
                    est = correct_expectation(est, s, calibration)
                draws.append(est)
            means = np.array([d.mean for d in draws])
            if iterations > 1:
                sem = float(np.std(means, ddof=1) / math.sqrt(iterations))
            else:
                sem = draws[0].std_error
            per_string[slot].append(ExpectationEstimate(float(means.mean()), sem, shots * iterations))
    return [ZneSeries(scales, tuple(ests), iterations) for ests in per_string]


def zne_series(
    circuit: Circuit,
    observable: PauliString,
    noise: NoiseModel,
    scales: Sequence[int] = DEFAULT_SCALES,
    shots: int | None = 8192,
    iterations: int = 10,
    seed: int = 0,
    calibration: Sequence[np.ndarray] | None = None,
) -> ZneSeries:
    return zne_series_terms(
        circuit, [observable], noise, scales, shots, iterations, seed, calibration
    )[0]
