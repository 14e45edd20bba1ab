"""Classical reproduction of a VQE computation of the deuteron binding energy.

Modules:
    pauli: Pauli-string algebra and Jordan-Wigner one-body images
    hamiltonian: pionless-EFT oscillator-basis Hamiltonian and exact energies
    circuit, simulator: gates, statevector / density-matrix simulation, sampling
    ansatz, vqe, spline: UCC ansatz circuits and grid-refinement VQE
    mitigation: zero-noise extrapolation and readout correction
    extrapolation: infinite-basis extrapolation of finite-basis energies
    cli: command-line driver
"""

from .errors import ContractViolation, DomainError, NumericError
from .extrapolation import ContinuumFit, Order, effective_radius, fit_continuum, model_energy
from .hamiltonian import (
    PhysicsConstants,
    build_matrix,
    exact_ground_energy,
    kinetic_element,
    potential_element,
    qubit_hamiltonian,
)
from .pauli import PauliString, PauliSum, PauliTerm, jw_lowering, jw_one_body, multiply, simplify
from .simulator import NoiseModel, expectation, run_noisy, run_pure, sample_string
from .vqe import Backend, energy_of, refine_minimum, scan_landscape

__all__ = [
    "Backend",
    "ContinuumFit",
    "ContractViolation",
    "DomainError",
    "NoiseModel",
    "NumericError",
    "Order",
    "PauliString",
    "PauliSum",
    "PauliTerm",
    "PhysicsConstants",
    "build_matrix",
    "effective_radius",
    "energy_of",
    "exact_ground_energy",
    "expectation",
    "fit_continuum",
    "jw_lowering",
    "jw_one_body",
    "kinetic_element",
    "model_energy",
    "multiply",
    "potential_element",
    "qubit_hamiltonian",
    "refine_minimum",
    "run_noisy",
    "run_pure",
    "sample_string",
    "scan_landscape",
    "simplify",
]
