"""Energy evaluation of ansatz states and grid-refinement VQE with spline minima.

Backends:

``exact``
    statevector expectation values.
``sampled``
    statevector plus finite-shot sampling (and readout error, if configured).
``noisy``
    density matrix with CNOT white noise; ``shots=None`` uses the exact
    outcome distribution.
``noisy+zne``
    as ``noisy`` at every CNOT scale, each term replaced by its zero-noise
    intercept.

Every draw uses a generator keyed by ``(seed, round, grid_index, term, r,
iteration)``, so results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .ansatz import ansatz_circuit, decompose_cry, param_count
from .errors import DomainError
from .mitigation import (
    DEFAULT_SCALES,
    calibrate_readout,
    correct_expectation,
    zne_extrapolate,
    zne_series_terms,
)
from .pauli import PauliString, PauliSum
from .simulator import (
    PERFECT,
    ExpectationEstimate,
    NoiseModel,
    estimate_from_distribution,
    expectation,
    outcome_distribution,
    run,
    run_pure,
    task_rng,
)
from .spline import fit_minimum_1d, fit_minimum_2d

MODES = ("exact", "sampled", "noisy", "noisy+zne")


@dataclass(frozen=True)
class Backend:
    mode: str = "exact"
    shots: int | None = None
    noise: NoiseModel = PERFECT
    scales: tuple[int, ...] = DEFAULT_SCALES
    iterations: int = 10
    mitigate_readout: bool = True
    # None: calibrate with the true confusion matrices
    calibration_shots: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.mode == "sampled" and (self.shots is None or self.shots < 1):
            raise DomainError("sampled mode needs shots ≥ 1")
        if self.shots is not None and self.shots < 1:
            raise DomainError("shots must be ≥ 1")
        if self.mode in ("noisy", "noisy+zne") and not (
            self.noise.cnot_epsilon > 0 or self.noise.has_readout_error
        ):
            raise DomainError("noisy modes need cnot_epsilon > 0 or readout errors")
        if self.iterations < 1:
            raise DomainError("iterations must be ≥ 1")
        object.__setattr__(self, "scales", tuple(int(r) for r in self.scales))

    @classmethod
    def exact(cls) -> Backend:
        return cls("exact")

    @classmethod
    def sampled(cls, shots: int = 8192, noise: NoiseModel = PERFECT) -> Backend:
        return cls("sampled", shots=shots, noise=noise)


@dataclass(frozen=True)
class LandscapeSample:
    params: tuple[float, ...]
    energy: ExpectationEstimate
    terms: dict[str, ExpectationEstimate] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class GridAxis:
    lower: float
    upper: float
    points: int

    def __post_init__(self):
        if self.points < 1:
            raise DomainError("grid axes need at least one point")
        if self.points > 1 and not self.upper > self.lower:
            raise DomainError("grid upper bound must exceed lower bound")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([0.5 * (self.lower + self.upper)])
        return np.linspace(self.lower, self.upper, self.points)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)


def default_grid(num_params: int, points: int = 13) -> tuple[GridAxis, ...]:
    return tuple(GridAxis(-math.pi, math.pi, points) for _ in range(num_params))


class EnergyEvaluator:
    """Evaluates ``<H>`` for ansatz parameters under one backend configuration."""

    def __init__(self, hamiltonian: PauliSum, backend: Backend, seed: int = 0):
        self.hamiltonian = hamiltonian
        self.backend = backend
        self.seed = int(seed)
        self.num_params = param_count(hamiltonian.qubit_count)
        self.identity = 0.0
        self.terms = []
        for idx, t in enumerate(hamiltonian):
            if abs(t.coefficient.imag) > 1e-10:
                raise DomainError("Hamiltonian coefficients must be real")
            if t.string.is_identity():
                self.identity += t.coefficient.real
            else:
                self.terms.append((idx, t.string, t.coefficient.real))
        noise = backend.noise
        self.calibration = None
        if backend.mode != "exact" and backend.mitigate_readout and noise.has_readout_error:
            self.calibration = calibrate_readout(
                noise, hamiltonian.qubit_count, backend.calibration_shots, self.seed
            )

    def term_estimates(self, params, key: tuple[int, ...] = (0, 0)) -> dict[str, ExpectationEstimate]:
        params = tuple(float(p) for p in params)
        if len(params) != self.num_params:
            raise DomainError(f"expected {self.num_params} parameter(s), got {len(params)}")
        b = self.backend
        circuit = ansatz_circuit(params)
        out: dict[str, ExpectationEstimate] = {}
        if b.mode == "exact":
            state = run_pure(circuit)
            for _, s, _ in self.terms:
                out[s.ops] = ExpectationEstimate(expectation(state, s), 0.0, 0)
            return out
        if b.mode == "noisy+zne":
            series = zne_series_terms(
                decompose_cry(circuit),
                [s for _, s, _ in self.terms],
                b.noise,
                b.scales,
                b.shots,
                b.iterations,
                self.seed,
                self.calibration,
                key=key,
                term_indices=[i for i, _, _ in self.terms],
            )
            for (_, s, _), ser in zip(self.terms, series):
                out[s.ops] = zne_extrapolate(ser).as_estimate()
            return out
        if b.mode == "noisy":
            state = run(decompose_cry(circuit), b.noise)
        else:
            state = run_pure(circuit)
        for idx, s, _ in self.terms:
            probs = outcome_distribution(state, s, b.noise)
            rng = task_rng(self.seed, *key, idx, 1, 0) if b.shots is not None else None
            est = estimate_from_distribution(probs, s, b.shots, rng)
            if self.calibration is not None:
                est = correct_expectation(est, s, self.calibration)
            out[s.ops] = est
        return out

    def combine(self, terms: dict[str, ExpectationEstimate]) -> ExpectationEstimate:
        mean = self.identity
        var = 0.0
        shots = 0
        for _, s, c in self.terms:
            e = terms[s.ops]
            mean += c * e.mean
            var += (c * e.std_error) ** 2
            shots = max(shots, e.shots)
        return ExpectationEstimate(float(mean), math.sqrt(var), shots)

    def sample(self, params, key: tuple[int, ...] = (0, 0)) -> LandscapeSample:
        terms = self.term_estimates(params, key)
        return LandscapeSample(tuple(float(p) for p in params), self.combine(terms), terms)


def energy_of(params, hamiltonian: PauliSum, backend: Backend = Backend(), seed: int = 0):
    """Energy estimate (MeV) of the ansatz state at ``params``."""
    return EnergyEvaluator(hamiltonian, backend, seed).sample(params).energy


def _scan(evaluator: EnergyEvaluator, axes: Sequence[GridAxis], round_index: int, workers: int):
    points = list(product(*(a.values() for a in axes)))
    if len(points) == 0:
        raise DomainError("empty grid")

    def task(item):
        gi, p = item
        return evaluator.sample(p, key=(round_index, gi))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, enumerate(points)))
    return [task(item) for item in enumerate(points)]


def scan_landscape(
    hamiltonian: PauliSum,
    grid: Sequence[GridAxis] | None = None,
    backend: Backend = Backend(),
    seed: int = 0,
    workers: int = 1,
    round_index: int = 0,
) -> list[LandscapeSample]:
    """One sample per grid point, in row-major (C) order of the axes."""
    evaluator = EnergyEvaluator(hamiltonian, backend, seed)
    grid = tuple(grid) if grid is not None else default_grid(evaluator.num_params)
    if len(grid) != evaluator.num_params:
        raise DomainError(f"grid has {len(grid)} axes, ansatz has {evaluator.num_params} params")
    return _scan(evaluator, grid, round_index, workers)


def wrap_angle(a: float) -> float:
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass
class VqeResult:
    best_params: tuple[float, ...]
    best_energy: float
    uncertainty: float
    landscape: list[LandscapeSample]
    method: str
    seed: int
    windows: list[tuple[GridAxis, ...]]
    spline: object = None

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "best_params": list(self.best_params),
            "best_energy": self.best_energy,
            "uncertainty": self.uncertainty,
            "rounds": [
                [{"lower": a.lower, "upper": a.upper, "points": a.points} for a in w]
                for w in self.windows
            ],
            "samples": len(self.landscape),
        }


def landscape_csv(samples: Sequence[LandscapeSample], param_names=None, term_columns=True) -> str:
    if not samples:
        return ""
    k = len(samples[0].params)
    names = list(param_names or (["theta"] if k == 1 else ["eta", "theta"]))
    # single-qubit terms first, then by support: Z0, Z1, X0X1, Y0Y1, ...
    terms = sorted(samples[0].terms, key=lambda t: (PauliString(t).weight, PauliString(t).support, t))
    terms = terms if term_columns else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = names + [f"{PauliString(t).label}_{c}" for t in terms for c in ("mean", "std_error")] + ["mean", "std_error"]
    w.writerow(header)
    for s in samples:
        row = [repr(p) for p in s.params]
        for t in terms:
            row += [repr(s.terms[t].mean), repr(s.terms[t].std_error)]
        row += [repr(s.energy.mean), repr(s.energy.std_error)]
        w.writerow(row)
    return buf.getvalue()


def refine_minimum(
    hamiltonian: PauliSum,
    backend: Backend = Backend(),
    initial_grid: Sequence[GridAxis] | None = None,
    rounds: int = 3,
    seed: int = 0,
    shrink: float = 4.0,
    workers: int = 1,
) -> VqeResult:
    """Grid refinement around the best sample, then a spline fit of the last round."""
    if rounds < 1:
        raise DomainError("rounds must be ≥ 1")
    if shrink <= 1:
        raise DomainError("shrink factor must exceed 1")
    evaluator = EnergyEvaluator(hamiltonian, backend, seed)
    axes = tuple(initial_grid) if initial_grid is not None else default_grid(evaluator.num_params)
    if len(axes) != evaluator.num_params:
        raise DomainError(f"grid has {len(axes)} axes, ansatz has {evaluator.num_params} params")
    if any(a.points < 4 for a in axes):
        raise DomainError("spline fit needs at least 4 points per axis")
    landscape: list[LandscapeSample] = []
    windows = []
    samples: list[LandscapeSample] = []
    for rnd in range(rounds):
        if rnd > 0:
            best = min(samples, key=lambda s: s.energy.mean)
            axes = tuple(
                GridAxis(c - a.half_width / shrink, c + a.half_width / shrink, a.points)
                for a, c in zip(axes, best.params)
            )
        windows.append(axes)
        samples = _scan(evaluator, axes, rnd, workers)
        landscape.extend(samples)

    means = np.array([s.energy.mean for s in samples])
    sigmas = np.array([s.energy.std_error for s in samples])
    if len(axes) == 1:
        fit = fit_minimum_1d(axes[0].values(), means, sigmas)
    else:
        shape = (axes[0].points, axes[1].points)
        fit = fit_minimum_2d(
            axes[0].values(), axes[1].values(), means.reshape(shape), sigmas.reshape(shape)
        )
    return VqeResult(
        best_params=tuple(wrap_angle(p) for p in fit.location),
        best_energy=fit.value,
        uncertainty=fit.std_error,
        landscape=landscape,
        method=backend.mode,
        seed=seed,
        windows=windows,
        spline=fit,
    )


def minimize_simplex(hamiltonian: PauliSum, x0=None, backend: Backend = Backend(), seed: int = 0):
    """Nelder-Mead cross-check of the grid result; returns (params, energy)."""
    from scipy.optimize import minimize

    evaluator = EnergyEvaluator(hamiltonian, backend, seed)
    x0 = np.zeros(evaluator.num_params) + 0.1 if x0 is None else np.asarray(x0, dtype=float)
    res = minimize(
        lambda p: evaluator.sample(p).energy.mean,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    return tuple(wrap_angle(p) for p in res.x), float(res.fun)
