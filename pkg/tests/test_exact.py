import math

import numpy as np
import pytest

from pauliprop.channels import ChannelApplication, make_clifford, make_measure_z, \
    make_reset, make_rotation
from pauliprop.exact import (
    OracleTooLargeError,
    apply_kraus,
    apply_ptm_dense,
    embed_operator,
    kraus_to_ptm,
    run_exact,
)
from pauliprop.operators import (
    DenseOperator,
    FactoredState,
    maximally_mixed,
    pauli_matrix,
    t_state,
    zero_state,
)
from pauliprop.propagation import Circuit

H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def random_density(n, rng):
    dim = 2**n
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


def test_embed_single_pauli_matches_global_index():
    n = 3
    for q in range(n):
        for d in range(4):
            got = embed_operator(pauli_matrix(d, 1), (q,), n)
            np.testing.assert_allclose(got, pauli_matrix(d * 4**q, n), atol=0)


def test_embed_interleaved_cnot_is_the_right_permutation():
    # control qubit 2, target qubit 0, spectator qubit 1
    u = np.zeros((4, 4), dtype=complex)
    for b in range(4):
        c, t = b & 1, (b >> 1) & 1
        u[c + 2 * (t ^ c), b] = 1
    got = embed_operator(u, (2, 0), 3)
    want = np.zeros((8, 8), dtype=complex)
    for b in range(8):
        c = (b >> 2) & 1
        want[b ^ c, b] = 1
    np.testing.assert_allclose(got, want, atol=0)


def test_embed_rejects_nothing_but_matches_kron_on_sorted_qubits():
    rng = np.random.default_rng(3)
    op = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    got = embed_operator(op, (0, 1), 3)
    np.testing.assert_allclose(got, np.kron(np.eye(2), op), atol=1e-14)


@pytest.mark.parametrize("qubits,kraus_builder", [
    ((1,), lambda: [np.diag([np.exp(-0.3j), np.exp(0.3j)])]),
    ((2,), lambda: [np.diag([1.0, 0.0]).astype(complex),
                    np.diag([0.0, 1.0]).astype(complex)]),
])
def test_apply_ptm_dense_agrees_with_embedded_kraus(qubits, kraus_builder):
    rng = np.random.default_rng(11)
    rho = random_density(3, rng)
    ops = kraus_builder()
    r = kraus_to_ptm(ops, 1)
    got = apply_ptm_dense(rho, r, qubits, 3)
    want = sum(
        embed_operator(k, qubits, 3) @ rho @ embed_operator(k, qubits, 3).conj().T
        for k in ops
    )
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_apply_ptm_dense_interleaved_two_qubit():
    rng = np.random.default_rng(12)
    rho = random_density(3, rng)
    u = np.zeros((4, 4), dtype=complex)
    for b in range(4):
        c, t = b & 1, (b >> 1) & 1
        u[c + 2 * (t ^ c), b] = 1
    got = apply_ptm_dense(rho, kraus_to_ptm([u], 2), (2, 0), 3)
    ue = embed_operator(u, (2, 0), 3)
    np.testing.assert_allclose(got, ue @ rho @ ue.conj().T, atol=1e-12)


def test_apply_kraus_checks_completeness():
    rho = np.eye(2, dtype=complex) / 2
    out = apply_kraus([np.diag([1.0, 0.0])], rho)  # trace-decreasing is fine
    assert abs(np.trace(out) - 0.5) < 1e-12
    with pytest.raises(ValueError, match="trace-increasing"):
        apply_kraus([math.sqrt(1.2) * np.eye(2)], rho)


def test_kraus_to_ptm_hadamard():
    want = np.array([
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, -1, 0],
        [0, 1, 0, 0],
    ], dtype=float)
    np.testing.assert_allclose(kraus_to_ptm([H], 1), want, atol=1e-12)


def _bell_circuit(observable):
    return Circuit(
        n=2,
        input=FactoredState.of_qubit_states([zero_state(), zero_state()]),
        channels=[
            ChannelApplication(make_clifford("h"), (0,)),
            ChannelApplication(make_clifford("cnot"), (0, 1)),
        ],
        observable=observable,
    )


def test_run_exact_bell_correlators():
    zz = FactoredState(2, [((0, 1), DenseOperator(pauli_matrix(15, 2)))])
    xx = FactoredState(2, [((0, 1), DenseOperator(pauli_matrix(5, 2)))])
    zi = FactoredState(2, [((0,), DenseOperator(pauli_matrix(3, 1))),
                           ((1,), DenseOperator(np.eye(2)))])
    assert abs(run_exact(_bell_circuit(zz)) - 1.0) < 1e-12
    assert abs(run_exact(_bell_circuit(xx)) - 1.0) < 1e-12
    assert abs(run_exact(_bell_circuit(zi))) < 1e-12


def test_run_exact_reset_then_measurement():
    circ = Circuit(
        n=1,
        input=FactoredState.of_qubit_states([maximally_mixed(1)]),
        channels=[ChannelApplication(make_reset(t_state()), (0,))],
        observable=FactoredState(1, [((0,), DenseOperator(pauli_matrix(1, 1)))]),
    )
    assert abs(run_exact(circ) - 1 / math.sqrt(2)) < 1e-12


def test_run_exact_respects_register_cap():
    n = 9
    obs = [((q,), DenseOperator(np.eye(2))) for q in range(n)]
    circ = Circuit(
        n=n,
        input=FactoredState.of_qubit_states([zero_state() for _ in range(n)]),
        channels=[ChannelApplication(make_rotation(0.1), (0,))],
        observable=FactoredState(n, obs),
    )
    with pytest.raises(OracleTooLargeError):
        run_exact(circ)


def test_measure_z_kills_coherences_exactly():
    rng = np.random.default_rng(4)
    rho = random_density(1, rng)
    out = apply_ptm_dense(rho, make_measure_z().matrix, (0,), 1)
    np.testing.assert_allclose(out, np.diag(np.diag(rho)), atol=1e-12)
