import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deuteron_qc.errors import DomainError
from deuteron_qc.pauli import (
    PAULI_MATRICES,
    PauliString,
    PauliSum,
    PauliTerm,
    jw_lowering,
    jw_raising,
    jw_one_body,
    multiply,
    simplify,
)


def term(c, ops):
    return PauliTerm(complex(c), PauliString(ops))


def dense(ops):
    return reduce(np.kron, [PAULI_MATRICES[c] for c in ops])


def one_particle_block(matrix, n):
    # basis state with a single 1 at position q (qubit 0 leftmost)
    idx = [1 << (n - 1 - q) for q in range(n)]
    return matrix[np.ix_(idx, idx)]


def test_string_invariants():
    s = PauliString("XIZ")
    assert s.num_qubits == 3
    assert s.weight == 2
    assert s.support == (0, 2)
    assert s.label == "X0Z2"
    assert PauliString.identity(2).is_identity()
    assert PauliString.from_ops({1: "Y"}, 3).ops == "IYI"
    with pytest.raises(DomainError):
        PauliString("XA")


def test_pauli_multiplication_table():
    p = multiply(term(1, "X"), term(1, "Y"))
    assert p.string.ops == "Z" and p.coefficient == 1j
    p = multiply(term(1, "Z"), term(1, "Z"))
    assert p.string.ops == "I" and p.coefficient == 1
    p = multiply(term(2, "XY"), term(3, "YY"))
    assert p.string.ops == "ZI" and p.coefficient == 6j
    assert np.allclose(p.matrix(), term(2, "XY").matrix() @ term(3, "YY").matrix())


def test_multiply_exhaustive_two_qubits():
    strings = ["".join(s) for s in itertools.product("IXYZ", repeat=2)]
    for a, b in itertools.product(strings, repeat=2):
        p = multiply(term(1, a), term(1, b))
        assert np.allclose(p.matrix(), dense(a) @ dense(b), atol=1e-14)


def test_multiply_associative_exhaustive_two_qubits():
    strings = ["".join(s) for s in itertools.product("IXYZ", repeat=2)]
    for a, b, c in itertools.product(strings, repeat=3):
        ta, tb, tc = term(1, a), term(1, b), term(1, c)
        left = multiply(multiply(ta, tb), tc)
        right = multiply(ta, multiply(tb, tc))
        assert left == right


def test_multiply_qubit_mismatch():
    with pytest.raises(DomainError):
        multiply(term(1, "X"), term(1, "XX"))


def test_simplify_examples():
    merged = simplify(PauliSum([term(1, "X"), term(2, "X")], 1))
    assert merged.to_dict() == {"X": 3}
    empty = simplify(PauliSum([term(1, "X"), term(-1, "X")], 1))
    assert len(empty) == 0


def test_simplify_canonical_order_and_unique():
    s = simplify(PauliSum([term(1, "ZI"), term(2, "IX"), term(1, "ZI"), term(1e-15, "YY")], 2))
    ops = [t.string.ops for t in s]
    assert ops == sorted(ops) == ["IX", "ZI"]


def test_hopping_expansion_matches_dense_oracle():
    # independent oracle: a_n = Z^{(n)} (x) |0><1| with occupied = |1>
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    a0 = np.kron(lower, np.eye(2))
    a1 = np.kron(PAULI_MATRICES["Z"], lower)
    oracle = a0.conj().T @ a1 + a1.conj().T @ a0
    hop = jw_raising(0, 2, 1) * jw_lowering(1, 2, 1) + jw_raising(1, 2, 1) * jw_lowering(0, 2, 1)
    assert simplify(hop).to_dict() == pytest.approx({"XX": 0.5, "YY": 0.5})
    assert np.allclose(hop.matrix(), oracle)
    # the literal -Z string flips the sign of the cross terms
    literal = jw_raising(0, 2) * jw_lowering(1, 2) + jw_raising(1, 2) * jw_lowering(0, 2)
    assert simplify(literal).to_dict() == pytest.approx({"XX": -0.5, "YY": -0.5})


def test_jw_lowering_examples():
    assert jw_lowering(0, 1).to_dict() == pytest.approx({"X": 0.5, "Y": 0.5j})
    assert jw_lowering(1, 2).to_dict() == pytest.approx({"ZX": -0.5, "ZY": -0.5j})
    assert jw_lowering(2, 3).to_dict() == pytest.approx({"ZZX": 0.5, "ZZY": 0.5j})


def test_jw_lowering_is_annihilator():
    # occupied = |1>: a_n |1 at n> has a nonzero image, a_n |0 at n> = 0
    for n in range(3):
        a = jw_lowering(n, 3).matrix()
        assert np.allclose(a @ a, 0)
        number = jw_raising(n, 3).matrix() @ a
        diag = np.real(np.diag(number))
        for idx in range(8):
            bit = (idx >> (2 - n)) & 1
            assert diag[idx] == pytest.approx(bit)


def test_jw_anticommutation():
    for m, n in itertools.product(range(3), repeat=2):
        a_m = jw_lowering(m, 3).matrix()
        a_n_dag = jw_raising(n, 3).matrix()
        anti = a_m @ a_n_dag + a_n_dag @ a_m
        assert np.allclose(anti, np.eye(8) * (m == n), atol=1e-14)


def test_jw_one_body_1x1():
    s = jw_one_body([[1.3]])
    assert s.to_dict() == pytest.approx({"I": 0.65, "Z": -0.65})


def test_jw_one_body_rejects_asymmetric():
    with pytest.raises(DomainError):
        jw_one_body([[0.0, 1.0], [2.0, 0.0]])


def test_arithmetic_and_adjoint():
    a = PauliSum.from_dict({"XI": 1.0, "ZZ": 2j})
    b = PauliSum.from_dict({"XI": -1.0})
    assert (a + b).to_dict() == {"ZZ": 2j}
    assert (a - a).to_dict() == {}
    assert np.allclose(a.adjoint().matrix(), a.matrix().conj().T)
    assert np.allclose((a * b).matrix(), a.matrix() @ b.matrix())
    assert np.allclose((2.0 * a).matrix(), 2 * a.matrix())
    assert not a.is_real()


def test_text_round_trip_is_bit_exact():
    s = PauliSum.from_dict({"XXI": 0.1 + 1 / 3j, "IIZ": -2.143304, "YZY": 1e-300})
    back = PauliSum.from_text(s.to_text())
    assert back == s
    for t1, t2 in zip(back, s):
        assert t1.coefficient == t2.coefficient


symmetric = st.integers(1, 3).flatmap(
    lambda n: st.lists(
        st.floats(-50, 50, allow_nan=False), min_size=n * (n + 1) // 2, max_size=n * (n + 1) // 2
    ).map(lambda v, n=n: _sym(n, v))
)


def _sym(n, values):
    m = np.zeros((n, n))
    m[np.triu_indices(n)] = values
    return m + np.triu(m, 1).T


@settings(max_examples=60, deadline=None)
@given(symmetric)
def test_jw_one_body_real_and_subspace_equivalent(m):
    s = jw_one_body(m)
    assert all(abs(t.coefficient.imag) < 1e-10 for t in s)
    n = m.shape[0]
    assert np.allclose(one_particle_block(s.matrix(), n), m, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.sampled_from(["".join(p) for p in itertools.product("IXYZ", repeat=2)])), max_size=10))
def test_simplify_idempotent(items):
    s = PauliSum([term(c, ops) for c, ops in items], 2)
    once = simplify(s)
    assert simplify(once) == once
    assert np.allclose(once.matrix(), s.matrix(), atol=1e-10)
