"""Pure-state propagation and the error-scrambling scenario."""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .codes import codespace_projector, one_error_projector
from .errors import IntegratorError, PreconditionError
from .model import codespace_ground
from .pauli import DENSE_LIMIT, to_dense

NORM_TOL = 1e-6


@dataclass
class SimState:
    """Dense pure state or density matrix at time ``t``."""

    kind: str
    data: np.ndarray
    t: float = 0.0

    @classmethod
    def pure(cls, vector, t=0.0):
        return cls("pure", np.asarray(vector, dtype=np.complex128), float(t))

    @classmethod
    def density(cls, matrix, t=0.0):
        return cls("density", np.asarray(matrix, dtype=np.complex128), float(t))

    @classmethod
    def from_pure(cls, vector, t=0.0):
        v = np.asarray(vector, dtype=np.complex128)
        return cls.density(np.outer(v, v.conj()), t)

    def check(self, tol=1e-9):
        """Raise ``ValueError`` when the state invariants are violated."""
        if self.kind == "pure":
            if abs(np.linalg.norm(self.data) - 1.0) > tol:
                raise ValueError("pure state is not normalised")
        elif self.kind == "density":
            rho = self.data
            if np.max(np.abs(rho - rho.conj().T)) > tol:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > tol:
                raise ValueError("density matrix trace is not 1")
            if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -tol:
                raise ValueError("density matrix has negative eigenvalues")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        return self


@dataclass
class Trajectory:
    """Time series of codespace population, one-error population and fidelity."""

    times: np.ndarray
    P_c: np.ndarray
    P_e1: np.ndarray
    fidelity: np.ndarray
    trace_err: np.ndarray
    min_eig: np.ndarray
    herm_residual: float = 0.0
    snapshots: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    final_state: np.ndarray = None

    HEADER = ("t", "P_c", "P_e1", "fidelity", "trace_err", "min_eig")

    def rows(self):
        cols = (self.times, self.P_c, self.P_e1, self.fidelity, self.trace_err, self.min_eig)
        return list(zip(*(np.asarray(c, dtype=float) for c in cols)))


# ------------------------------------------------------------ propagation

def _expm_hermitian(h, dt):
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * dt * vals)) @ vecs.conj().T


def _control_events(protocol, code, limit):
    """``[(time, unitary), ...]`` for every impulse of the protocol, time-ordered."""
    if protocol is None or protocol.kind == "none":
        return []
    events = []
    if protocol.kind == "dd":
        for t, n in zip(protocol.pulse_times, protocol.ordering):
            events.append((t, to_dense(code.generators[n], limit)))
    else:
        dim = 1 << code.n_physical
        for term, w in zip(protocol.penalty, protocol.weights):
            for t, strength in w.impulses:
                u = math.cos(strength) * np.eye(dim) + 1j * math.sin(strength) * to_dense(term, limit)
                events.append((t, u))
    events.sort(key=lambda ev: ev[0])
    return events


def _control_hamiltonian(protocol, t, limit):
    """Smooth part ``-sum_m alpha_m(t) T_m`` of an EGP penalty (else ``None``)."""
    if protocol is None or protocol.kind != "egp":
        return None
    out = None
    for term, w in zip(protocol.penalty, protocol.weights):
        if not w.has_smooth_part:
            continue
        a = float(w.smooth_rate(t))
        if a:
            contrib = -a * to_dense(term, limit)
            out = contrib if out is None else out + contrib
    return out


def time_grid(t0, t1, dt, breaks=()):
    """Step boundaries covering ``[t0, t1]`` with spacing ``<= dt``, split at ``breaks``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    cuts = sorted({t0, t1, *[b for b in breaks if t0 < b < t1]})
    grid = [t0]
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(1, math.ceil((b - a) / dt - 1e-9))
        grid.extend(a + (b - a) * np.arange(1, n + 1) / n)
    return np.asarray(grid)


def propagate_pure(h, state, t0, t1, dt, protocol=None, code=None, limit=DENSE_LIMIT):
    """Time-ordered evolution of a pure state from ``t0`` to ``t1``.

    Fixed-step midpoint exponentials ``exp(-i H(t_mid) dt)`` (second order)
    for ``H = H_AQC + H_C``; control impulses are applied as exact unitaries.
    A pulse at ``t_k`` is applied when ``t0 <= t_k < t1``.
    """
    if state.kind != "pure":
        raise PreconditionError("propagate_pure needs a pure state")
    if protocol is not None and protocol.kind != "none" and code is None:
        raise PreconditionError("a control protocol needs the code")
    psi = np.array(state.data, dtype=np.complex128)
    if t1 <= t0:
        return SimState.pure(psi, t1)
    events = [ev for ev in _control_events(protocol, code, limit) if t0 <= ev[0] < t1]
    grid = time_grid(t0, t1, dt, [ev[0] for ev in events])
    k = 0
    norm0 = np.linalg.norm(psi)
    for a, b in zip(grid[:-1], grid[1:]):
        while k < len(events) and events[k][0] <= a:
            psi = events[k][1] @ psi
            k += 1
        mid = 0.5 * (a + b)
        ham = h.dense(mid, limit)
        hc = _control_hamiltonian(protocol, mid, limit)
        if hc is not None:
            ham = ham + hc
        if np.any(ham):
            psi = _expm_hermitian(ham, b - a) @ psi
        drift = abs(np.linalg.norm(psi) - norm0)
        if drift > NORM_TOL:
            raise IntegratorError(f"norm drift {drift:.3g} at t={b:.6g}")
    return SimState.pure(psi, t1)


# ------------------------------------------------------------ scrambling

@dataclass
class ScrambleResult:
    """Outcome of one error-at-tau, correct-at-T run."""

    error: object
    tau_err: float
    total_time: float
    final_state: np.ndarray
    corrected_state: np.ndarray
    effective_state: np.ndarray
    logical_fidelity: float
    effective_fidelity: float
    agreement: float
    baseline_fidelity: float
    notes: list = field(default_factory=list)


def error_scrambling_scenario(h, code, e, tau_err, total_time, dt, limit=DENSE_LIMIT,
                              adiabatic_threshold=0.999):
    """Compare the direct error/correction evolution with the effective Hamiltonian.

    Direct: ``E U(tau, T) E U(0, tau) |0>_0``. Effective: evolution under
    ``H_plus - H_minus`` from ``tau`` to ``T`` applied to ``U(0, tau) |0>_0``.
    ``logical_fidelity`` is the overlap of the corrected state with the
    ground eigenspace of ``H(T)`` in the codespace; ``agreement`` is
    ``|<direct|effective>|^2``.
    """
    if not 0.0 <= tau_err <= total_time:
        raise PreconditionError("need 0 <= tau_err <= T")
    _, _, psi0 = codespace_ground(h, code, 0.0, limit)
    _, ground_T, _ = codespace_ground(h, code, total_time, limit)
    E = to_dense(e, limit)
    psi_tau = propagate_pure(h, SimState.pure(psi0), 0.0, tau_err, dt, limit=limit).data
    final = propagate_pure(h, SimState.pure(E @ psi_tau), tau_err, total_time, dt, limit=limit).data
    corrected = E @ final
    effective = propagate_pure(h.effective(e), SimState.pure(psi_tau), tau_err, total_time, dt,
                               limit=limit).data
    baseline = propagate_pure(h, SimState.pure(psi_tau), tau_err, total_time, dt, limit=limit).data

    def fid(v):
        return float(np.real(v.conj() @ ground_T @ v))

    notes = []
    base_fid = fid(baseline)
    if base_fid < adiabatic_threshold:
        notes.append(f"non-adiabatic baseline: unperturbed final fidelity {base_fid:.6f}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    return ScrambleResult(
        error=e,
        tau_err=float(tau_err),
        total_time=float(total_time),
        final_state=final,
        corrected_state=corrected,
        effective_state=effective,
        logical_fidelity=fid(corrected),
        effective_fidelity=fid(effective),
        agreement=float(abs(np.vdot(corrected, effective)) ** 2),
        baseline_fidelity=base_fid,
        notes=notes,
    )


def populations(code, errs, limit=DENSE_LIMIT):
    """Projectors ``(P, Q1)`` used for trajectory records."""
    return codespace_projector(code, limit), one_error_projector(code, errs, limit)
