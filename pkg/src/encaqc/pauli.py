"""Exact N-qubit Pauli group arithmetic in symplectic form.

A :class:`PauliString` stores ``i**phase * P_0 (x) P_1 (x) ... (x) P_{N-1}``
with each ``P_q`` in {I, X, Y, Z}. Qubit 0 is the leftmost tensor factor of
the dense matrix and the leftmost character of the text form. The X and Z
parts are packed into Python ints (qubit ``q`` in bit ``N-1-q``) and the
phase is an integer mod 4, so products are exact.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import CapacityError, DimensionError

DENSE_LIMIT = 12

_PHASE_TOKENS = {0: "", 1: "+i", 2: "-", 3: "-i"}
_TOKEN_PHASES = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_CHAR = {v: k for k, v in _CHAR_BITS.items()}


def _popcount(v):
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """Immutable Pauli operator with exact quarter-phase.

    Parameters
    ----------
    x, z : int
        Packed X and Z masks; qubit ``q`` is bit ``n_qubits - 1 - q``.
    phase : int
        Power of ``i`` multiplying the Hermitian Pauli labels (0..3).
    n_qubits : int
        Number of qubits ``N``.
    """

    x: int
    z: int
    phase: int
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bit masks longer than n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # ----------------------------------------------------------- constructors
    @classmethod
    def identity(cls, n_qubits):
        return cls(0, 0, 0, n_qubits)

    @classmethod
    def from_label(cls, text):
        """Parse text such as ``"-iXZYI"``; see :meth:`label`."""
        text = text.strip()
        body = text.lstrip("+-i")
        token = text[: len(text) - len(body)]
        if token not in _TOKEN_PHASES:
            raise ValueError(f"bad phase token {token!r} in {text!r}")
        if not body:
            raise ValueError(f"empty Pauli string {text!r}")
        n = len(body)
        x = z = 0
        for q, ch in enumerate(body.upper()):
            if ch not in _CHAR_BITS:
                raise ValueError(f"bad Pauli character {ch!r} in {text!r}")
            bx, bz = _CHAR_BITS[ch]
            x |= bx << (n - 1 - q)
            z |= bz << (n - 1 - q)
        return cls(x, z, _TOKEN_PHASES[token], n)

    @classmethod
    def from_bits(cls, x_bits, z_bits, phase=0):
        """Build from per-qubit bit sequences (qubit 0 first)."""
        x_bits, z_bits = list(x_bits), list(z_bits)
        if len(x_bits) != len(z_bits):
            raise DimensionError("x_bits and z_bits differ in length")
        n = len(x_bits)
        x = sum(int(b) << (n - 1 - q) for q, b in enumerate(x_bits))
        z = sum(int(b) << (n - 1 - q) for q, b in enumerate(z_bits))
        return cls(x, z, phase, n)

    @classmethod
    def single(cls, n_qubits, qubit, axis):
        """``axis`` ("X", "Y" or "Z") on ``qubit``, identity elsewhere."""
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
        bx, bz = _CHAR_BITS[axis.upper()]
        shift = n_qubits - 1 - qubit
        return cls(bx << shift, bz << shift, 0, n_qubits)

    # ------------------------------------------------------------- accessors
    @property
    def x_bits(self):
        n = self.n_qubits
        return tuple((self.x >> (n - 1 - q)) & 1 for q in range(n))

    @property
    def z_bits(self):
        n = self.n_qubits
        return tuple((self.z >> (n - 1 - q)) & 1 for q in range(n))

    @property
    def weight(self):
        return _popcount(self.x | self.z)

    @property
    def is_hermitian(self):
        return self.phase % 2 == 0

    @property
    def is_identity(self):
        return self.x == 0 and self.z == 0

    @property
    def sign(self):
        """Complex phase factor ``i**phase``."""
        return complex(_kernels._PHASES[self.phase])

    def unsigned(self):
        """Same Pauli with phase +1."""
        return PauliString(self.x, self.z, 0, self.n_qubits)

    def label(self):
        body = "".join(_BITS_CHAR[(bx, bz)] for bx, bz in zip(self.x_bits, self.z_bits))
        return _PHASE_TOKENS[self.phase] + body

    def __str__(self):
        return self.label()

    def __repr__(self):
        return f"PauliString({self.label()!r})"

    # ------------------------------------------------------------ algebra
    def _check(self, other):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(
                f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}"
            )

    def __mul__(self, other):
        return multiply(self, other)

    def __neg__(self):
        return PauliString(self.x, self.z, self.phase + 2, self.n_qubits)

    def commutes(self, other):
        return commutes(self, other)

    def to_dense(self, limit=DENSE_LIMIT):
        return to_dense(self, limit)


def multiply(a, b):
    """Group product ``a * b`` with exact phase."""
    a._check(b)
    x = a.x ^ b.x
    z = a.z ^ b.z
    # label form -> X^x Z^z form, reorder Z_a X_b, back to label form
    exponent = (
        a.phase + b.phase
        + _popcount(a.x & a.z) + _popcount(b.x & b.z)
        + 2 * _popcount(a.z & b.x)
        - _popcount(x & z)
    )
    return PauliString(x, z, exponent, a.n_qubits)


def symplectic_product(a, b):
    """``a.x . b.z + a.z . b.x`` mod 2."""
    a._check(b)
    return _popcount((a.x & b.z) ^ (a.z & b.x)) & 1


def commutes(a, b):
    """True iff ``a`` and ``b`` commute; phases are irrelevant."""
    return symplectic_product(a, b) == 0


def anticommutation_matrix(rows, cols):
    """Int8 matrix with 1 where ``rows[i]`` anticommutes with ``cols[j]``."""
    rows, cols = list(rows), list(cols)
    if not rows or not cols:
        return np.zeros((len(rows), len(cols)), dtype=np.int8)
    n = rows[0].n_qubits
    if any(p.n_qubits != n for p in rows + cols):
        raise DimensionError("mixed qubit counts")
    if n > 63:
        return np.array(
            [[symplectic_product(a, b) for b in cols] for a in rows], dtype=np.int8
        )
    return _kernels.anticommutation(
        [p.x for p in rows], [p.z for p in rows],
        [p.x for p in cols], [p.z for p in cols],
    )


@lru_cache(maxsize=4096)
def _dense_cached(n, x, z, phase):
    out = _kernels.pauli_dense(n, x, z, phase)
    out.setflags(write=False)
    return out


def to_dense(p, limit=DENSE_LIMIT):
    """Dense ``2**N x 2**N`` matrix; qubit 0 is the leftmost tensor factor.

    The returned array is shared and read-only.
    """
    if p.n_qubits > limit:
        raise CapacityError(f"{p.n_qubits} qubits exceeds dense limit {limit}")
    return _dense_cached(p.n_qubits, p.x, p.z, p.phase)


def parse_pauli(text):
    return PauliString.from_label(text)
