import numpy as np
import pytest

from pauliprop.paulis import (
    PauliString,
    SignedPauli,
    pauli_index_on_subset,
    replace_on_subset,
    trace_inner_product_paulis,
)


def test_identity():
    p = PauliString.identity(5)
    assert p.x_mask == 0 and p.z_mask == 0
    assert p.weight() == 0
    assert p.to_string() == "IIIII"


@pytest.mark.parametrize("text", ["X", "IZ", "XYZI", "YYXZIZ"])
def test_string_round_trip(text):
    p = PauliString.from_string(text)
    assert p.n == len(text)
    assert p.to_string() == text
    assert str(p) == text


def test_qubit_zero_is_leftmost_character():
    p = PauliString.from_string("XZ")
    assert p.digit(0) == 1  # X
    assert p.digit(1) == 3  # Z
    assert p.x_mask == 0b01
    assert p.z_mask == 0b10


def test_from_string_rejects_bad_character():
    with pytest.raises(ValueError, match="bad Pauli character"):
        PauliString.from_string("XQZ")


def test_mask_bounds_checked():
    with pytest.raises(ValueError):
        PauliString(2, 0b100, 0)
    with pytest.raises(ValueError):
        PauliString(-1, 0, 0)


def test_weight_counts_non_identity_sites():
    assert PauliString.from_string("IXYZI").weight() == 3
    assert PauliString.from_string("YYYY").weight() == 4


def test_subset_index_example():
    # X on qubit 0, Z on qubit 1; first listed qubit is the low digit
    p = PauliString.from_string("XZ")
    assert pauli_index_on_subset(p, (0, 1)) == 1 + 4 * 3
    assert pauli_index_on_subset(p, (1, 0)) == 3 + 4 * 1
    assert pauli_index_on_subset(p, (0,)) == 1


def test_subset_index_errors():
    p = PauliString.from_string("XZ")
    with pytest.raises(ValueError, match="out of range"):
        pauli_index_on_subset(p, (0, 2))
    with pytest.raises(ValueError, match="duplicate"):
        pauli_index_on_subset(p, (1, 1))


def test_replace_on_subset_inverts_indexing():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        x = int(rng.integers(0, 1 << n))
        z = int(rng.integers(0, 1 << n))
        p = PauliString(n, x, z)
        qubits = tuple(int(q) for q in rng.permutation(n)[: rng.integers(1, n + 1)])
        idx = pauli_index_on_subset(p, qubits)
        assert replace_on_subset(p, qubits, idx) == p


def test_replace_on_subset_untouched_elsewhere():
    p = PauliString.from_string("XYZ")
    q = replace_on_subset(p, (1,), 0)
    assert q.to_string() == "XIZ"
    q = replace_on_subset(p, (0, 2), 3 + 4 * 1)
    assert q.to_string() == "ZYX"


def test_replace_on_subset_range_check():
    p = PauliString.identity(2)
    with pytest.raises(ValueError, match="local index"):
        replace_on_subset(p, (0,), 4)


def test_trace_inner_product_is_delta():
    a = PauliString.from_string("XY")
    assert trace_inner_product_paulis(a, PauliString.from_string("XY")) == 1.0
    assert trace_inner_product_paulis(a, PauliString.from_string("XZ")) == 0.0
    with pytest.raises(ValueError):
        trace_inner_product_paulis(a, PauliString.identity(3))


def test_signed_pauli_is_plain_record():
    sp = SignedPauli(PauliString.from_string("Z"), -2.5)
    assert sp.coeff == -2.5
    assert sp.pauli.digit(0) == 3
