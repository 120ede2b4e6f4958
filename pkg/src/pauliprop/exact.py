"""Ground-truth engines: dense density-matrix simulation and Kraus application.

Everything here is deliberately independent of the sampling machinery so it
can act as an oracle for it. Channels are applied by converting the PTM to a
dense superoperator on the affected subsystem: the PTM stays the single
source of channel truth, there is no second channel encoding.

Register cap n <= 8 (256 x 256 densities, 4^k x 4^k local superoperators).
"""

from __future__ import annotations

import numpy as np

from .operators import pauli_basis

ORACLE_MAX_QUBITS = 8
KRAUS_COMPLETENESS_TOL = 1e-8


class OracleTooLargeError(Exception):
    """Raised when a circuit exceeds the dense oracle's register cap."""


def embed_operator(op: np.ndarray, qubits, n: int) -> np.ndarray:
    """Embed a k-qubit operator on the listed qubits into the 2^n space.

    qubits[pos] carries the operator's local qubit pos (its 2^pos bit).
    """
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    low = np.kron(np.eye(2 ** (n - k), dtype=complex), op)
    b = np.arange(2**n)
    fmap = np.zeros(2**n, dtype=np.intp)
    for pos, q in enumerate(qubits):
        fmap |= ((b >> pos) & 1) << q
    for j, q in enumerate(rest):
        fmap |= ((b >> (k + j)) & 1) << q
    out = np.zeros_like(low)
    out[fmap[:, None], fmap[None, :]] = low
    return out


def ptm_to_superoperator(r: np.ndarray, k: int) -> np.ndarray:
    """Dense 4^k x 4^k superoperator K with vec_row(Lambda(X)) = K vec_row(X).

    From Lambda(sigma_j) = sum_i R_ij sigma_i and Tr-orthogonality:
    K[(a,b),(d,c)] = sum_ij sigma_i[a,b] R_ij sigma_j[c,d] / 2^k.
    """
    dim = 2**k
    basis = pauli_basis(k)
    v = basis.reshape(4**k, dim * dim)
    w = basis.transpose(0, 2, 1).reshape(4**k, dim * dim)
    return v.T @ r.astype(complex) @ w / dim


def apply_ptm_dense(rho: np.ndarray, r: np.ndarray, qubits, n: int) -> np.ndarray:
    """Apply a k-qubit PTM to the listed qubits of an n-qubit density matrix."""
    k = len(qubits)
    dim = 2**k
    super_op = ptm_to_superoperator(r, k)

    t = rho.reshape((2,) * (2 * n))
    # row axis of qubit q is n-1-q, column axis is 2n-1-q; order the moved
    # axes most-significant-first so the combined index is (a*dim + b)
    row_axes = [n - 1 - q for q in reversed(qubits)]
    col_axes = [2 * n - 1 - q for q in reversed(qubits)]
    src = row_axes + col_axes
    t = np.moveaxis(t, src, range(2 * k))
    shape_rest = t.shape[2 * k:]
    t = t.reshape(dim * dim, -1)
    t = super_op @ t
    t = t.reshape((2,) * (2 * k) + shape_rest)
    t = np.moveaxis(t, range(2 * k), src)
    return t.reshape(2**n, 2**n)


def apply_kraus(ops, rho: np.ndarray) -> np.ndarray:
    """sum_K K rho K^dag, after checking sum_K K^dag K <= I (postselective)."""
    ops = [np.asarray(op, dtype=complex) for op in ops]
    dim = ops[0].shape[0]
    comp = sum(op.conj().T @ op for op in ops)
    excess = float(np.linalg.eigvalsh(comp - np.eye(dim))[-1])
    if excess > KRAUS_COMPLETENESS_TOL:
        raise ValueError(f"Kraus set is trace-increasing by {excess:.2e}")
    return sum(op @ rho @ op.conj().T for op in ops)


def kraus_to_ptm(ops, k: int) -> np.ndarray:
    """PTM entries R_ij = 2^{-k} Tr(sigma_i sum_K K sigma_j K^dag)."""
    from .operators import coeffs_from_matrix

    ops = [np.asarray(op, dtype=complex) for op in ops]
    r = np.zeros((4**k, 4**k))
    for j in range(4**k):
        sigma = pauli_basis(k)[j]
        out = sum(op @ sigma @ op.conj().T for op in ops)
        r[:, j] = coeffs_from_matrix(out, k)
    return r


def run_exact(circuit) -> float:
    """Exact <E> = Tr(E Lambda_k(...Lambda_1(rho_0))) for circuits with n <= 8."""
    n = circuit.n
    if n > ORACLE_MAX_QUBITS:
        raise OracleTooLargeError(f"n={n} exceeds the oracle cap {ORACLE_MAX_QUBITS}")
    rho = circuit.input.dense()
    for app in circuit.channels:
        rho = apply_ptm_dense(rho, app.ptm.matrix, app.qubits, n)
    e = circuit.observable.dense()
    return float(np.trace(e @ rho).real)
