"""Bit-packed n-qubit Pauli strings and the signed-Pauli estimator atom.

A Pauli word is stored as two mask integers: bit q of ``x_mask`` / ``z_mask``
gives the X / Z component on qubit q, decoded per qubit as

    (x, z): (0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z.

Qubit 0 is the least significant bit everywhere; tensor notation A (x) B puts
A on the lower-indexed qubit. Phases are never tracked here: all sign and
weight information lives in SignedPauli.coeff, since channels act through
real transfer matrices and the estimators only ever need real weights.
"""

from __future__ import annotations

from dataclasses import dataclass

# local Pauli codes, base-4 digits
_I, _X, _Y, _Z = 0, 1, 2, 3

# (x, z) bit pair -> digit, and back
_XZ_TO_DIGIT = {(0, 0): _I, (1, 0): _X, (1, 1): _Y, (0, 1): _Z}
_DIGIT_TO_XZ = {v: k for k, v in _XZ_TO_DIGIT.items()}

_CHAR_TO_DIGIT = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}
_DIGIT_TO_CHAR = "IXYZ"


@dataclass(frozen=True, slots=True)
class PauliString:
    """An n-qubit Pauli word (no phase, no weight)."""

    n: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"negative qubit count {self.n}")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask bits beyond qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_string(cls, text: str) -> "PauliString":
        """Parse e.g. "XIZY"; qubit 0 is the leftmost character."""
        x = z = 0
        for q, ch in enumerate(text):
            try:
                digit = _CHAR_TO_DIGIT[ch]
            except KeyError:
                raise ValueError(f"bad Pauli character {ch!r} in {text!r}") from None
            xb, zb = _DIGIT_TO_XZ[digit]
            x |= xb << q
            z |= zb << q
        return cls(len(text), x, z)

    def to_string(self) -> str:
        return "".join(
            _DIGIT_TO_CHAR[self.digit(q)] for q in range(self.n)
        )

    def digit(self, q: int) -> int:
        """Local Pauli code on qubit q (I=0, X=1, Y=2, Z=3)."""
        return _XZ_TO_DIGIT[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)]

    def weight(self) -> int:
        """Number of non-identity sites."""
        return (self.x_mask | self.z_mask).bit_count()

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True, slots=True)
class SignedPauli:
    """The estimator atom c * sigma: a Pauli word with a real scalar weight."""

    pauli: PauliString
    coeff: float


def pauli_index_on_subset(p: PauliString, qubits) -> int:
    """Base-4 index of p restricted to `qubits`, in [0, 4^k).

    Digit order follows the subset order: the first listed qubit is the least
    significant digit. Example: X on qubit 0, Z on qubit 1, subset (0, 1)
    gives 1 + 4*3 = 13.
    """
    seen = set()
    index = 0
    for pos, q in enumerate(qubits):
        if q < 0 or q >= p.n:
            raise ValueError(f"qubit {q} out of range for n={p.n}")
        if q in seen:
            raise ValueError(f"duplicate qubit {q} in subset")
        seen.add(q)
        index += p.digit(q) << (2 * pos)
    return index


def replace_on_subset(p: PauliString, qubits, local_index: int) -> PauliString:
    """Overwrite the local word on `qubits` with the decoded local_index.

    Inverse of pauli_index_on_subset on the subset; other qubits unchanged.
    """
    k = len(qubits)
    if not 0 <= local_index < (1 << (2 * k)):
        raise ValueError(f"local index {local_index} out of range for k={k}")
    x, z = p.x_mask, p.z_mask
    for pos, q in enumerate(qubits):
        if q < 0 or q >= p.n:
            raise ValueError(f"qubit {q} out of range for n={p.n}")
        digit = (local_index >> (2 * pos)) & 3
        xb, zb = _DIGIT_TO_XZ[digit]
        bit = 1 << q
        x = (x & ~bit) | (xb << q)
        z = (z & ~bit) | (zb << q)
    return PauliString(p.n, x, z)


def trace_inner_product_paulis(a: PauliString, b: PauliString) -> float:
    """Normalized trace inner product Tr(ab)/2^n: 1 if a == b else 0."""
    if a.n != b.n:
        raise ValueError(f"mismatched register sizes {a.n} != {b.n}")
    return 1.0 if (a.x_mask == b.x_mask and a.z_mask == b.z_mask) else 0.0
