"""Low-depth UCC ansatz circuits for two and three oscillator orbitals.

Both circuits start from ``|0...0>``, flip qubit 0 to put the deuteron in
orbital 0, and then rotate amplitude into the higher orbitals.  The circuit
angle relates to the UCC generator angle by ``theta_circuit = -2 theta_ucc``.
"""

from __future__ import annotations

from .circuit import CNOT, Circuit, ControlledRotY, PauliX, RotY
from .errors import DomainError


def ansatz_circuit_n2(theta: float) -> Circuit:
    """``cos(theta/2)|10> + sin(theta/2)|01>`` with a single CNOT."""
    return Circuit(2, (PauliX(0), RotY(1, theta), CNOT(1, 0)))


def ansatz_circuit_n3(eta: float, theta: float) -> Circuit:
    """``cos(eta/2)cos(theta/2)|100> + sin(eta/2)|010> + cos(eta/2)sin(theta/2)|001>``."""
    return Circuit(
        3,
        (
            PauliX(0),
            RotY(1, eta),
            CNOT(1, 0),
            ControlledRotY(0, 2, theta),
            CNOT(2, 0),
        ),
    )


def ansatz_circuit(params) -> Circuit:
    """Dispatch on the parameter count (1 -> two orbitals, 2 -> three orbitals)."""
    params = tuple(params)
    if len(params) == 1:
        return ansatz_circuit_n2(params[0])
    if len(params) == 2:
        return ansatz_circuit_n3(*params)
    raise DomainError(f"ansatz takes 1 or 2 angles, got {len(params)}")


def param_count(num_qubits: int) -> int:
    if num_qubits == 2:
        return 1
    if num_qubits == 3:
        return 2
    raise DomainError(f"no ansatz for {num_qubits} qubits (supported: 2, 3)")


def decompose_cry(circuit: Circuit) -> Circuit:
    """Rewrite each controlled-RY as ``RY(t, a/2), CNOT, RY(t, -a/2), CNOT``."""
    gates = []
    for g in circuit:
        if g.kind != "CRY":
            gates.append(g)
            continue
        c, t = g.qubits
        gates += [RotY(t, g.angle / 2), CNOT(c, t), RotY(t, -g.angle / 2), CNOT(c, t)]
    return Circuit(circuit.qubit_count, tuple(gates))
