"""Dense Hermitian operators on small qubit sets and Pauli-basis sampling.

This is the sampling workhorse: any Hermitian A on k <= 3 qubits decomposes
as A = sum_i coeffs[i] * sigma_i with coeffs[i] = Tr(sigma_i A)/2^k, and the
estimator draws sigma_i with probability |Tr(sigma_i A)| / (2^k * D(A)),
weighted by c = sign(Tr(sigma_i A)) * D(A). D is the stabilizer norm

    D(A) = 2^{-k} * sum_sigma |Tr(sigma A)|,

the L1 norm of the Pauli coefficient vector. E[c * sigma] = A.

Local Pauli indices are base-4 with the factor's first qubit as the least
significant digit, matching paulis.pauli_index_on_subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, cached_property

import numpy as np

from .paulis import PauliString, SignedPauli

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-10
# trace coefficients |Tr(sigma A)| at or below this are excluded from the
# sampling support, so sign() never sees numerical noise
ZERO_COEFF_TOL = 1e-12

_PAULI_1Q = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_matrix(index: int, k: int) -> np.ndarray:
    """Dense 2^k x 2^k matrix of the local Pauli with the given base-4 index."""
    m = np.array([[1]], dtype=complex)
    for pos in range(k):
        m = np.kron(_PAULI_1Q[(index >> (2 * pos)) & 3], m)
    return m


@lru_cache(maxsize=None)
def pauli_basis(k: int) -> np.ndarray:
    """All 4^k local Pauli matrices, stacked on axis 0. Cached per k."""
    out = np.stack([pauli_matrix(i, k) for i in range(4**k)])
    out.setflags(write=False)
    return out


def coeffs_from_matrix(matrix: np.ndarray, k: int) -> np.ndarray:
    """Pauli coefficient vector: entry i is Tr(sigma_i A)/2^k (real for Hermitian A)."""
    return np.einsum("nij,ji->n", pauli_basis(k), matrix).real / 2**k


def matrix_from_coeffs(coeffs: np.ndarray, k: int) -> np.ndarray:
    return np.tensordot(coeffs, pauli_basis(k), axes=1)


@dataclass(frozen=True)
class PauliCoeffs:
    """Coefficient vector of a k-qubit Hermitian in the Pauli basis."""

    k: int
    coeffs: np.ndarray

    def to_matrix(self) -> np.ndarray:
        return matrix_from_coeffs(self.coeffs, self.k)


class DenseOperator:
    """Hermitian matrix on k <= 3 qubits with cached Pauli data.

    Treated as immutable after construction; the matrix is marked read-only
    so the cached coefficient vector and sampling tables stay valid.
    """

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
        dim = matrix.shape[0]
        k = dim.bit_length() - 1
        if 2**k != dim or k > 3:
            raise ValueError(f"dimension {dim} is not 2^k with k <= 3")
        if np.abs(matrix - matrix.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("matrix is not Hermitian within 1e-10")
        self.k = k
        self.matrix = matrix.copy()
        self.matrix.setflags(write=False)

    @classmethod
    def from_coeffs(cls, coeffs, k: int) -> "DenseOperator":
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (4**k,):
            raise ValueError(f"expected {4**k} coefficients for k={k}")
        return cls(matrix_from_coeffs(coeffs, k))

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = coeffs_from_matrix(self.matrix, self.k)
        c.setflags(write=False)
        return c

    def pauli_coeffs(self) -> PauliCoeffs:
        return PauliCoeffs(self.k, self.coeffs)

    @cached_property
    def stabilizer_norm(self) -> float:
        return float(np.abs(self.coeffs).sum())

    @cached_property
    def trace_table(self) -> np.ndarray:
        """Unnormalized traces Tr(sigma_i A) = coeffs * 2^k, indexed by local Pauli."""
        t = self.coeffs * 2**self.k
        t.setflags(write=False)
        return t

    @cached_property
    def _sampler(self):
        """(support indices, cumulative probabilities, signs); see sample_pauli."""
        traces = self.trace_table
        support = np.flatnonzero(np.abs(traces) > ZERO_COEFF_TOL)
        if support.size == 0:
            return support, np.zeros(0), np.zeros(0)
        weights = np.abs(self.coeffs[support])
        cum = np.cumsum(weights)
        cum /= cum[-1]
        signs = np.sign(traces[support])
        return support, cum, signs

    def is_state(self, trace_tol=1e-9, psd_tol=PSD_TOL) -> bool:
        if abs(np.trace(self.matrix).real - 1.0) > trace_tol:
            return False
        return float(np.linalg.eigvalsh(self.matrix)[0]) >= -psd_tol

    def __repr__(self):
        return f"DenseOperator(k={self.k})"


def stabilizer_norm(a: DenseOperator) -> float:
    """D(A) = 2^{-k} sum_sigma |Tr(sigma A)|."""
    return a.stabilizer_norm


def sample_pauli(a: DenseOperator, rng: np.random.Generator) -> SignedPauli:
    """One draw of (sigma, c) with sigma ~ |Tr(sigma A)|/(2^k D(A)), c = sign * D(A).

    The returned Pauli lives on a k-qubit register (the operator's own qubits,
    numbered 0..k-1). Raises on the zero operator.
    """
    support, cum, signs = a._sampler
    if support.size == 0:
        raise ValueError("cannot sample from the zero operator (D = 0)")
    pick = int(np.searchsorted(cum, rng.random(), side="right"))
    pick = min(pick, support.size - 1)  # guard the u ~ 1.0 edge
    index = int(support[pick])
    x = z = 0
    for pos in range(a.k):
        digit = (index >> (2 * pos)) & 3
        x |= (digit in (1, 2)) << pos
        z |= (digit in (2, 3)) << pos
    return SignedPauli(
        PauliString(a.k, x, z), float(signs[pick]) * a.stabilizer_norm
    )


# ---------------------------------------------------------------------------
# tensor-factored operators

@dataclass(frozen=True)
class FactoredState:
    """Tensor product over disjoint qubit subsets covering [0, n).

    Used both for input states rho_0 and for observables E; factors need not
    be states (call validate_state() where a density matrix is required).
    """

    n: int
    factors: tuple  # of (qubit tuple, DenseOperator)

    def __post_init__(self):
        seen = set()
        for qubits, op in self.factors:
            if len(qubits) != op.k:
                raise ValueError(f"factor on {qubits} has mismatched operator size {op.k}")
            for q in qubits:
                if q < 0 or q >= self.n:
                    raise ValueError(f"qubit {q} out of range for n={self.n}")
                if q in seen:
                    raise ValueError(f"qubit {q} appears in two factors")
                seen.add(q)
        if len(seen) != self.n:
            raise ValueError("factors do not cover the register")

    @classmethod
    def of_qubit_states(cls, ops) -> "FactoredState":
        """One single-qubit factor per register position, in order."""
        return cls(len(ops), tuple(((q,), op) for q, op in enumerate(ops)))

    def validate_state(self):
        for qubits, op in self.factors:
            if not op.is_state():
                raise ValueError(f"factor on qubits {qubits} is not a valid state")

    def dense(self) -> np.ndarray:
        """Full 2^n x 2^n matrix (for oracle use on small registers)."""
        # factors may interleave qubits, so multiply register-sized embeddings
        from .exact import embed_operator

        acc = None
        for qubits, op in self.factors:
            emb = embed_operator(op.matrix, qubits, self.n)
            acc = emb if acc is None else acc @ emb
        return acc


def stabilizer_norm_factored(s: FactoredState) -> float:
    """Multiplicativity: D(A_1 (x) A_2 ...) = prod D(A_f)."""
    out = 1.0
    for _, op in s.factors:
        out *= op.stabilizer_norm
    return out


def sample_pauli_factored(s: FactoredState, rng: np.random.Generator) -> SignedPauli:
    """Per-factor independent draws; coefficients multiply, masks assemble."""
    x = z = 0
    coeff = 1.0
    for qubits, op in s.factors:
        local = sample_pauli(op, rng)
        coeff *= local.coeff
        for pos, q in enumerate(qubits):
            x |= ((local.pauli.x_mask >> pos) & 1) << q
            z |= ((local.pauli.z_mask >> pos) & 1) << q
    return SignedPauli(PauliString(s.n, x, z), coeff)


def trace_with_factored(p: PauliString, s: FactoredState) -> float:
    """Unnormalized Tr(sigma A_1 (x) A_2 ...) = prod_f Tr(sigma|_f A_f)."""
    if p.n != s.n:
        raise ValueError(f"mismatched register sizes {p.n} != {s.n}")
    out = 1.0
    for qubits, op in s.factors:
        index = 0
        for pos, q in enumerate(qubits):
            index += p.digit(q) << (2 * pos)
        out *= op.trace_table[index]
        if out == 0.0:
            return 0.0
    return out


# ---------------------------------------------------------------------------
# library states (named in circuit files)

def zero_state() -> DenseOperator:
    return DenseOperator(np.array([[1, 0], [0, 0]], dtype=complex))


def plus_state() -> DenseOperator:
    return DenseOperator(np.full((2, 2), 0.5, dtype=complex))


def maximally_mixed(k: int = 1) -> DenseOperator:
    return DenseOperator(np.eye(2**k, dtype=complex) / 2**k)


def h_state() -> DenseOperator:
    """Hadamard eigenstate |H><H|, Bloch vector (1/sqrt2, 0, 1/sqrt2)."""
    s = 1 / np.sqrt(2)
    return DenseOperator.from_coeffs([0.5, 0.5 * s, 0.0, 0.5 * s], 1)


def t_state() -> DenseOperator:
    """Equatorial magic state |T><T|, Bloch vector (1/sqrt2, 1/sqrt2, 0)."""
    s = 1 / np.sqrt(2)
    return DenseOperator.from_coeffs([0.5, 0.5 * s, 0.5 * s, 0.0], 1)


LIBRARY_STATES = {
    "zero": zero_state,
    "plus": plus_state,
    "maximally_mixed": maximally_mixed,
    "H_state": h_state,
    "T_state": t_state,
}
