"""Dynamical decoupling and energy-gap protection in one toggling-frame picture.

Both controls are described by how they dress an error operator ``E`` in
the toggling frame. An EGP penalty ``H_C(t) = -sum_m alpha_m(t) T_m`` built
from stabilizer-group elements ``T_m`` gives

    E~(t) = E exp(2i sum_{m: {T_m, E} = 0} A_m(t) T_m),  A_m(t) = int_0^t alpha_m,

and an instantaneous DD pulse of ``S`` is the special case of an impulse of
strength pi/2 on ``S``. DD is also kept as its own code path through the
parity ``p(t)`` so the two descriptions can be checked against each other.

Pulses are left-continuous: a pulse at ``t_k`` affects times strictly after
``t_k``.
"""
import bisect
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .codes import full_group, sector_projectors
from .errors import CodeValidationError, DomainError
from .pauli import DENSE_LIMIT, PauliString, anticommutation_matrix, multiply, symplectic_product, to_dense

log = logging.getLogger(__name__)

UDD_NOTE = (
    "udd_pulse_times uses t_n = T*cos(n*pi/(2*(N+1))), sorted ascending; this differs "
    "from the commonly quoted t_n = T*sin^2(n*pi/(2N+2))"
)


# ------------------------------------------------------------- weights

@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Penalty weight ``alpha(t) >= 0``: a smooth part plus declared impulses.

    ``rate(t)`` is the smooth weight, ``integral(t)`` its antiderivative from
    0, and ``impulses`` a tuple of ``(time, strength)`` delta terms. Impulses
    are never discretised; they enter ``accumulated`` as jumps and the
    propagator as exact unitaries.
    """

    kind: str
    rate: object = None
    integral: object = None
    impulses: tuple = ()
    value: float = None
    params: dict = field(default_factory=dict, compare=False)

    @classmethod
    def zero(cls):
        return cls("zero", value=0.0)

    @classmethod
    def constant(cls, alpha):
        alpha = float(alpha)
        if alpha < 0:
            raise ValueError("penalty weight must be non-negative")
        return cls("constant", value=alpha)

    @classmethod
    def table(cls, times, values):
        """Piecewise-linear weight through ``(times, values)``; held flat outside."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("weight table needs two equal-length columns of >= 2 rows")
        if np.any(np.diff(times) <= 0):
            raise ValueError("weight table times must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("weight table values must be finite and non-negative")
        return cls("table", params={"times": times, "values": values})

    @classmethod
    def udd(cls, total_time, n_pulses):
        """``alpha(t) = N T / sqrt(t (T - t))`` with its closed-form integral."""
        return cls("udd", params={"T": float(total_time), "N": int(n_pulses)})

    @classmethod
    def pulses(cls, times, strength=math.pi / 2):
        """Delta impulses; strength pi/2 reproduces a unitary stabilizer pulse."""
        times = sorted(float(t) for t in times)
        return cls("impulses", impulses=tuple((t, float(strength)) for t in times))

    # smooth part --------------------------------------------------------
    def smooth_rate(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.value)
        if self.kind == "table":
            return np.interp(t, self.params["times"], self.params["values"])
        if self.kind == "udd":
            T, N = self.params["T"], self.params["N"]
            with np.errstate(divide="ignore", invalid="ignore"):
                return N * T / np.sqrt(t * (T - t))
        if self.kind == "custom":
            return np.asarray(self.rate(t), dtype=float)
        return np.zeros_like(t)

    def smooth_integral(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return self.value * t
        if self.kind == "table":
            return _table_integral(self.params["times"], self.params["values"], t)
        if self.kind == "udd":
            T, N = self.params["T"], self.params["N"]
            return 2.0 * N * T * np.arcsin(np.sqrt(np.clip(t / T, 0.0, 1.0)))
        if self.kind == "custom":
            return np.asarray(self.integral(t), dtype=float)
        return np.zeros_like(t)

    def impulse_total(self, t):
        """Sum of impulse strengths strictly before ``t``."""
        if not self.impulses:
            return 0.0
        times = [ti for ti, _ in self.impulses]
        k = bisect.bisect_left(times, t)
        return float(sum(s for _, s in self.impulses[:k]))

    def accumulated(self, t, ref=None):
        """``int_0^t alpha``; impulses are counted at ``ref`` (default ``t``).

        Passing ``ref`` evaluates the piecewise-constant impulse part at a
        single reference time, which is how quadrature segments avoid the
        ambiguity at their endpoints.
        """
        t = np.asarray(t, dtype=float)
        if ref is None and t.ndim:
            jumps = np.array([self.impulse_total(v) for v in t.ravel()]).reshape(t.shape)
        else:
            jumps = self.impulse_total(float(t) if ref is None else ref)
        return self.smooth_integral(t) + jumps

    @property
    def impulse_times(self):
        return tuple(t for t, _ in self.impulses)

    @property
    def has_smooth_part(self):
        return self.kind not in ("zero", "impulses")

    def describe(self):
        if self.kind == "constant":
            return {"kind": "constant", "alpha": self.value}
        if self.kind == "table":
            return {"kind": "table", "times": self.params["times"].tolist(),
                    "values": self.params["values"].tolist()}
        if self.kind == "udd":
            return {"kind": "udd", "T": self.params["T"], "N": self.params["N"]}
        if self.kind == "impulses":
            return {"kind": "impulses", "times": [t for t, _ in self.impulses],
                    "strength": self.impulses[0][1] if self.impulses else math.pi / 2}
        return {"kind": self.kind}


def _table_integral(times, values, t):
    seg = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    # flat extension before the first sample starts the integral at 0
    head = values[0] * np.clip(np.minimum(t, times[0]), 0.0, None)
    tc = np.clip(t, times[0], times[-1])
    k = np.clip(np.searchsorted(times, tc, side="right") - 1, 0, len(times) - 2)
    dt = tc - times[k]
    slope = (values[k + 1] - values[k]) / (times[k + 1] - times[k])
    inside = cum[k] + values[k] * dt + 0.5 * slope * dt * dt
    tail = values[-1] * np.clip(t - times[-1], 0.0, None)
    return head + inside + tail


# ----------------------------------------------------------- protocols

@dataclass(frozen=True)
class NoControl:
    """Free evolution."""

    kind: str = "none"


@dataclass(frozen=True)
class DDProtocol:
    """Instantaneous pulses of generator ``ordering[k]`` at ``pulse_times[k]``."""

    ordering: tuple
    pulse_times: tuple
    kind: str = "dd"

    def __post_init__(self):
        object.__setattr__(self, "ordering", tuple(int(n) for n in self.ordering))
        object.__setattr__(self, "pulse_times", tuple(float(t) for t in self.pulse_times))
        if len(self.ordering) != len(self.pulse_times):
            raise ValueError("ordering and pulse_times must have equal length")
        if any(b <= a for a, b in zip(self.pulse_times, self.pulse_times[1:])):
            raise ValueError("DD pulse times must be strictly increasing")

    @classmethod
    def build(cls, code, pulse_times, ordering=None):
        """Pulses at ``pulse_times``; ``ordering`` is repeated cyclically.

        The default ordering cycles through the generator list.
        """
        pulse_times = list(pulse_times)
        if ordering is None:
            ordering = list(range(code.n_generators))
        ordering = list(ordering)
        if pulse_times and not ordering:
            raise ValueError("DD ordering is empty")
        full = [ordering[k % len(ordering)] for k in range(len(pulse_times))]
        proto = cls(tuple(full), tuple(pulse_times))
        proto.validate(code)
        return proto

    def validate(self, code):
        for n in self.ordering:
            if not 0 <= n < code.n_generators:
                raise CodeValidationError(
                    f"DD ordering index {n} out of range for {code.n_generators} generators"
                )

    def pulses_before(self, t):
        """``K(t)``: number of pulses strictly before ``t``."""
        return bisect.bisect_left(self.pulse_times, t)


@dataclass(frozen=True)
class EGPProtocol:
    """Penalty ``H_C(t) = -sum_m alpha_m(t) T_m`` over stabilizer-group terms.

    ``alpha`` is set for the constant-uniform fast path.
    """

    penalty: tuple
    weights: tuple
    alpha: float = None
    penalty_kind: str = "generators"
    kind: str = "egp"

    def __post_init__(self):
        object.__setattr__(self, "penalty", tuple(self.penalty))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.penalty) != len(self.weights):
            raise ValueError("one weight function is needed per penalty term")

    @classmethod
    def constant(cls, code, alpha, penalty="generators"):
        terms = penalty_terms(code, penalty)
        w = WeightFunction.constant(alpha)
        proto = cls(terms, tuple(w for _ in terms), float(alpha),
                    penalty if isinstance(penalty, str) else "custom")
        proto.validate(code)
        return proto

    @classmethod
    def from_weights(cls, code, weights, penalty="generators"):
        terms = penalty_terms(code, penalty)
        proto = cls(terms, tuple(weights), None, penalty if isinstance(penalty, str) else "custom")
        proto.validate(code)
        return proto

    def validate(self, code):
        for k, t in enumerate(self.penalty):
            if stabilizer_decomposition(code, t) is None:
                raise CodeValidationError(
                    f"EGP penalty term {k} ({t}) is not an element of the stabilizer group"
                )

    @property
    def is_constant(self):
        return self.alpha is not None

    def impulse_times(self):
        return sorted({t for w in self.weights for t in w.impulse_times})


def penalty_terms(code, penalty="generators"):
    """``"generators"``, ``"full_group"`` (identity dropped), or explicit Paulis."""
    if penalty == "generators":
        return tuple(code.generators)
    if penalty == "full_group":
        return tuple(g for g in code.group if not g.is_identity)
    terms = tuple(PauliString.from_label(p) if isinstance(p, str) else p for p in penalty)
    return terms


def stabilizer_decomposition(code, p):
    """Generator subset (bitmask) whose exact product is ``p``, else ``None``."""
    for k, g in enumerate(full_group(code)):
        if g == p:
            return k
    return None


# ------------------------------------------------------- DD parity

def accumulated_pulse_product(protocol, code, t):
    """``U_C^DD(t)`` as a PauliString: product of all pulses strictly before ``t``."""
    acc = PauliString.identity(code.n_physical)
    for n in protocol.ordering[: protocol.pulses_before(t)]:
        acc = multiply(code.generators[n], acc)
    return acc


def dd_parity(protocol, code, e, t):
    """``p(t)`` with ``U^dag E U = (-1)**p E`` for the accumulated pulse product."""
    return symplectic_product(accumulated_pulse_product(protocol, code, t), e)


def dd_flip_flags(protocol, code, e):
    """1 for each pulse whose generator anticommutes with ``e``."""
    if not protocol.ordering:
        return np.zeros(0, dtype=np.int64)
    anti = anticommutation_matrix([e], code.generators)[0]
    return anti[np.asarray(protocol.ordering)].astype(np.int64)


def dd_parity_array(protocol, code, e, times, ref=None):
    """Vectorised ``p`` at ``times`` (prefix parity of flipping pulses)."""
    flips = dd_flip_flags(protocol, code, e)
    prefix = np.concatenate([[0], np.cumsum(flips) % 2])
    pulse_times = np.asarray(protocol.pulse_times)
    where = np.asarray(times if ref is None else np.full(np.shape(times), ref), dtype=float)
    return prefix[np.searchsorted(pulse_times, where, side="left")]


# ------------------------------------------------- toggling frame

def control_unitary(protocol, code, t, limit=DENSE_LIMIT):
    """Dense ``U_C(t)``."""
    dim = 1 << code.n_physical
    if protocol.kind == "none":
        return np.eye(dim, dtype=np.complex128)
    if protocol.kind == "dd":
        return to_dense(accumulated_pulse_product(protocol, code, t), limit).copy()
    u = np.eye(dim, dtype=np.complex128)
    for term, w in zip(protocol.penalty, protocol.weights):
        a = float(w.accumulated(t))
        u = u @ (math.cos(a) * np.eye(dim) + 1j * math.sin(a) * to_dense(term, limit))
    return u


def anticommuting_penalty(protocol, e):
    """Indices of penalty terms anticommuting with ``e``."""
    if not protocol.penalty:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(anticommutation_matrix([e], protocol.penalty)[0])


def egp_toggled_error(protocol, code, e, t, limit=DENSE_LIMIT):
    """``E exp(2i sum_{anti m} A_m(t) T_m)`` as a dense matrix."""
    dim = 1 << code.n_physical
    out = to_dense(e, limit).copy()
    for m in anticommuting_penalty(protocol, e):
        a = 2.0 * float(protocol.weights[m].accumulated(t))
        out = out @ (math.cos(a) * np.eye(dim) + 1j * math.sin(a) * to_dense(protocol.penalty[m], limit))
    return out


def egp_toggled_error_left(protocol, code, e, t, limit=DENSE_LIMIT):
    """The same operator written as ``exp(-2i sum_{anti m} A_m(t) T_m) E``."""
    dim = 1 << code.n_physical
    left = np.eye(dim, dtype=np.complex128)
    for m in anticommuting_penalty(protocol, e):
        a = -2.0 * float(protocol.weights[m].accumulated(t))
        left = left @ (math.cos(a) * np.eye(dim) + 1j * math.sin(a) * to_dense(protocol.penalty[m], limit))
    return left @ to_dense(e, limit)


def toggled_error(protocol, code, e, t, limit=DENSE_LIMIT):
    """Dense toggling-frame error ``E~(t)`` for any protocol."""
    if protocol.kind == "none":
        return to_dense(e, limit).copy()
    if protocol.kind == "dd":
        return (-1.0) ** dd_parity(protocol, code, e, t) * to_dense(e, limit)
    return egp_toggled_error(protocol, code, e, t, limit)


def penalty_sector_signs(protocol, code, limit=DENSE_LIMIT):
    """``signs[s, m]``: eigenvalue of penalty term ``m`` on syndrome sector ``s``."""
    projs = sector_projectors(code, limit)
    signs = np.zeros((len(projs), len(protocol.penalty)))
    for s, proj in enumerate(projs):
        rank = np.trace(proj).real
        for m, term in enumerate(protocol.penalty):
            signs[s, m] = np.trace(to_dense(term, limit) @ proj).real / rank
    if not np.allclose(np.abs(signs), 1.0, atol=1e-12):
        raise CodeValidationError("penalty terms are not diagonal in the syndrome sectors")
    return np.rint(signs)


# -------------------------------------------------------- modulation

@dataclass(frozen=True)
class ModulationFunction:
    """``m(t, tau)`` for one error, seen from one syndrome sector.

    ``signs`` holds the eigenvalues of the penalty terms on the starting
    sector (all +1 for the codespace, which gives the usual ``m_j``).
    """

    protocol: object
    code: object
    error: object
    signs: tuple = None

    @property
    def unit_modulus(self):
        return True

    def _check(self, t, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0) or np.any(tau > t * (1 + 1e-12) + 1e-300):
            raise DomainError(f"modulation needs 0 <= tau <= t (t={t})")
        return tau

    def phase_angle(self, t, s, ref=None):
        """``chi(s)`` for EGP: signed sum of accumulated weights of anticommuting terms."""
        p = self.protocol
        anti = anticommuting_penalty(p, self.error)
        total = np.zeros(np.shape(s))
        for m in anti:
            sign = 1.0 if self.signs is None else self.signs[m]
            total = total + sign * p.weights[m].accumulated(s, ref)
        return total

    def __call__(self, t, tau, ref=None):
        """Evaluate at ``(t, tau)``; ``ref`` pins the impulse/pulse count of ``t - tau``."""
        tau = self._check(t, tau)
        p = self.protocol
        if p.kind == "none":
            return np.ones_like(tau, dtype=complex) if tau.ndim else 1.0 + 0j
        if p.kind == "dd":
            pt = dd_parity_array(p, self.code, self.error, [t])[0]
            ps = dd_parity_array(p, self.code, self.error, t - tau, ref)
            out = np.where((pt - ps) % 2 == 0, 1.0, -1.0).astype(complex)
            return out if tau.ndim else complex(out)
        if p.is_constant and self.signs is None:
            w = len(anticommuting_penalty(p, self.error))
            out = np.exp(2j * p.alpha * tau * w)
            return out if tau.ndim else complex(out)
        delta = self.phase_angle(t, t) - self.phase_angle(t, t - tau, ref)
        out = np.exp(2j * delta)
        return out if tau.ndim else complex(out)

    def discontinuities(self, t):
        """Sorted ``tau`` in ``(0, t)`` where ``m(t, tau)`` jumps."""
        p = self.protocol
        if p.kind == "dd":
            flips = dd_flip_flags(p, self.code, self.error)
            times = [tk for tk, f in zip(p.pulse_times, flips) if f and tk < t]
        elif p.kind == "egp":
            anti = anticommuting_penalty(p, self.error)
            times = sorted({ti for m in anti for ti in p.weights[m].impulse_times if ti < t})
        else:
            times = []
        return sorted(t - tk for tk in times if 0.0 < t - tk < t)


def modulation_function(protocol, code, e, signs=None):
    return ModulationFunction(protocol, code, e, None if signs is None else tuple(signs))


def modulation(protocol, code, e, t, tau):
    """``m_j(t, tau)`` for the codespace.

    EGP constant: ``exp(2i alpha tau w)``; DD: ``(-1)**(p(t) - p(t - tau))``;
    EGP general: ``exp(2i (chi(t) - chi(t - tau)))``; no control: 1.
    """
    return modulation_function(protocol, code, e)(t, tau)


# ------------------------------------------------- pulse schedules

def udd_pulse_times(total_time, n_pulses):
    """``T cos(n pi / (2 (N + 1)))`` for ``n = 1..N``, sorted, clamped, deduplicated."""
    if n_pulses < 1:
        raise ValueError("UDD needs at least one pulse")
    n = np.arange(1, n_pulses + 1)
    times = total_time * np.cos(n * np.pi / (2 * (n_pulses + 1)))
    times = np.unique(np.clip(times, 0.0, total_time))
    log.info(UDD_NOTE)
    return times.tolist()


def uniform_pulse_times(total_time, n_pulses):
    """``N`` pulses with period ``Delta = T / N`` at ``(k - 1/2) Delta``."""
    if n_pulses < 1:
        return []
    delta = total_time / n_pulses
    return [(k + 0.5) * delta for k in range(n_pulses)]


def egp_alpha_for_dd(pulse_times, generator_index=None):
    """Impulsive weight ``sum_i (pi/2) delta(t - t_i)`` for one generator."""
    return WeightFunction.pulses(pulse_times, math.pi / 2)


def egp_from_dd(protocol, code):
    """EGP protocol whose impulsive weights reproduce a DD sequence."""
    weights = []
    for m in range(code.n_generators):
        times = [t for t, n in zip(protocol.pulse_times, protocol.ordering) if n == m]
        weights.append(egp_alpha_for_dd(times, m))
    return EGPProtocol(tuple(code.generators), tuple(weights), None, "generators")


def matched_egp_alpha(delta, w):
    """Constant weight whose modulation frequency ``2 alpha w`` equals ``pi / Delta``."""
    return math.pi / (2.0 * delta * w)
