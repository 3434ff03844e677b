"""Encoded adiabatic Hamiltonians built from logical operators."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .codes import codespace_basis
from .errors import ModelValidationError, UndefinedBoundError
from .pauli import DENSE_LIMIT, PauliString, commutes, to_dense

log = logging.getLogger(__name__)


def linear_a(s):
    return 1.0 - s


def linear_b(s):
    return s


@dataclass(frozen=True)
class AnnealSchedule:
    """``H(t) = a(t/T) * sum(h_initial) + b(t/T) * sum(h_final)``.

    ``h_initial`` and ``h_final`` are sequences of ``(coefficient, PauliString)``.
    """

    total_time: float
    h_initial: tuple
    h_final: tuple
    a: object = linear_a
    b: object = linear_b
    kind: str = "linear"

    @classmethod
    def linear(cls, total_time, h_initial, h_final):
        return cls(float(total_time), _terms(h_initial), _terms(h_final))

    @classmethod
    def tabulated(cls, total_time, s_points, a_values, b_values, h_initial, h_final):
        """Schedule sampled on ``s_points`` and linearly interpolated."""
        s_points = np.asarray(s_points, dtype=float)
        a_values = np.asarray(a_values, dtype=float)
        b_values = np.asarray(b_values, dtype=float)
        if s_points.ndim != 1 or s_points.shape != a_values.shape or s_points.shape != b_values.shape:
            raise ModelValidationError("schedule table columns must have equal length")
        if np.any(np.diff(s_points) <= 0):
            raise ModelValidationError("schedule table s values must be strictly increasing")

        def a(s):
            return float(np.interp(s, s_points, a_values))

        def b(s):
            return float(np.interp(s, s_points, b_values))

        return cls(float(total_time), _terms(h_initial), _terms(h_final), a, b, "table")


def _terms(pairs):
    out = []
    for coef, p in pairs:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        out.append((float(coef), p))
    return tuple(out)


class _Scaled:
    """Picklable ``t -> coef * f(t / T)``."""

    def __init__(self, coef, fn, total_time):
        self.coef, self.fn, self.total_time = coef, fn, total_time

    def __call__(self, t):
        return self.coef * self.fn(t / self.total_time)


class _Const:
    def __init__(self, value):
        self.value = value

    def __call__(self, t):
        return self.value


@dataclass(frozen=True)
class HamiltonianTermList:
    """``H(t) = sum_k f_k(t) P_k`` with real coefficient functions."""

    terms: tuple
    n_qubits: int

    @classmethod
    def zero(cls, n_qubits):
        return cls((), n_qubits)

    @classmethod
    def constant(cls, pairs, n_qubits=None):
        pairs = _terms(pairs)
        if n_qubits is None:
            n_qubits = pairs[0][1].n_qubits
        return cls(tuple((_Const(c), p) for c, p in pairs), n_qubits)

    @property
    def is_zero(self):
        return not self.terms

    def at(self, t):
        """Term list ``[(coefficient, PauliString), ...]`` at time ``t``."""
        return [(float(f(t)), p) for f, p in self.terms]

    def dense(self, t, limit=DENSE_LIMIT):
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=np.complex128)
        for f, p in self.terms:
            c = float(f(t))
            if c:
                out += c * to_dense(p, limit)
        return out

    def split(self, e):
        """``(H_plus, H_minus)``: terms commuting / anticommuting with ``e``."""
        plus = tuple(term for term in self.terms if commutes(term[1], e))
        minus = tuple(term for term in self.terms if not commutes(term[1], e))
        return HamiltonianTermList(plus, self.n_qubits), HamiltonianTermList(minus, self.n_qubits)

    def effective(self, e):
        """``H_plus - H_minus``: the Hamiltonian seen between an error and its correction."""
        return HamiltonianTermList(
            tuple(
                (f, p) if commutes(p, e) else (f, -p)
                for f, p in self.terms
            ),
            self.n_qubits,
        )


def build_encoded_aqc(code, schedule):
    """Encoded Hamiltonian from a schedule whose terms are logical operators."""
    for which, pairs in (("h_initial", schedule.h_initial), ("h_final", schedule.h_final)):
        for k, (coef, p) in enumerate(pairs):
            if p.n_qubits != code.n_physical:
                raise ModelValidationError(
                    f"{which}[{k}] ({p}) acts on {p.n_qubits} qubits, code has {code.n_physical}"
                )
            if not p.is_hermitian:
                raise ModelValidationError(f"{which}[{k}] ({p}) is not Hermitian")
            for m, g in enumerate(code.generators):
                if not commutes(p, g):
                    raise ModelValidationError(
                        f"{which}[{k}] ({p}) is not a logical operator: "
                        f"anticommutes with generator {m} ({g})"
                    )
    T = schedule.total_time
    terms = tuple(
        (_Scaled(c, schedule.a, T), p) for c, p in schedule.h_initial
    ) + tuple(
        (_Scaled(c, schedule.b, T), p) for c, p in schedule.h_final
    )
    return HamiltonianTermList(terms, code.n_physical)


def landau_zener_model(code, total_time, logical=0):
    """``-(1-s) Xbar - s Zbar`` on one logical qubit of ``code``."""
    schedule = AnnealSchedule.linear(
        total_time,
        [(-1.0, code.logical_x[logical])],
        [(-1.0, code.logical_z[logical])],
    )
    return build_encoded_aqc(code, schedule)


def decompose_against_error(h, e, t, limit=DENSE_LIMIT):
    """Dense ``(H_plus(t), H_minus(t))`` with ``[H_plus, e] = {H_minus, e} = 0``."""
    plus, minus = h.split(e)
    return plus.dense(t, limit), minus.dense(t, limit)


def spectral_norm(hermitian):
    if not hermitian.size:
        return 0.0
    vals = np.linalg.eigvalsh(hermitian)
    return float(np.max(np.abs(vals)))


def correction_timescale_bound(h, errs, grid, limit=DENSE_LIMIT):
    """``1 / max_{j,s} ||H_minus_j(s)||`` over the time ``grid``.

    Returns ``math.inf`` when no error anticommutes with any term (no
    scrambling). The caller applies whatever safety margin it wants.
    """
    errs = list(errs)
    grid = list(grid)
    if not errs:
        raise UndefinedBoundError("correction timescale needs at least one error")
    if not grid:
        raise UndefinedBoundError("correction timescale needs a non-empty time grid")
    worst = 0.0
    for e in errs:
        _, minus = h.split(e)
        if minus.is_zero:
            continue
        for t in grid:
            worst = max(worst, spectral_norm(minus.dense(t, limit)))
    if worst == 0.0:
        log.info("no scrambling: every error commutes with the encoded Hamiltonian")
        return math.inf
    return 1.0 / worst


def codespace_ground(h, code, t, limit=DENSE_LIMIT, degeneracy_tol=1e-9):
    """Ground eigenspace of ``H(t)`` restricted to the codespace.

    Returns ``(energy, projector, vector)``; ``vector`` is one deterministic
    unit vector inside the ground eigenspace.
    """
    basis = codespace_basis(code, limit)
    block = basis.conj().T @ h.dense(t, limit) @ basis
    vals, vecs = np.linalg.eigh(0.5 * (block + block.conj().T))
    ground = vecs[:, vals < vals[0] + degeneracy_tol]
    span = basis @ ground
    projector = span @ span.conj().T
    # deterministic representative: image of the basis vector with largest overlap
    k = int(np.argmax(np.real(np.diag(projector))))
    vec = projector[:, k].copy()
    vec /= np.linalg.norm(vec)
    phase = vec[np.argmax(np.abs(vec))]
    vec *= abs(phase) / phase
    return float(vals[0]), projector, vec
