"""Non-Markovian master equation in the control toggling frame.

The state obeys

    d rho / dt = -i [H(t), rho] - sum_j (X_j + X_j^dag),
    X_j = E~_j(t) L_j(t) rho - E~_j(t) rho L_j(t)^dag,
    L_j(t) = int_0^{min(t, tau_max)} C(tau) Xi~_j(t, tau) dtau,

with ``Xi~_j(t, tau)`` the toggled error carried back over the memory time
``tau`` by the encoded Hamiltonian. Two variants of that back-propagation
are offered: ``"frozen"`` uses ``exp(-i tau H(t))`` and ``"time_ordered"``
uses the exact propagator ``U(t, t - tau)``.

The toggled error splits over syndrome sectors as
``E~(u) = sum_g f_g(u) E Pi_g`` with scalar phases ``f_g``, so with
``H(t) = V diag(lambda) V^dag`` the frozen memory operator is

    V^dag L V = sum_g (V^dag E Pi_g V) o K_g,
    K_g[a, b] = sum_k w_k C(tau_k) f_g(t - tau_k) exp(-i tau_k (lambda_a - lambda_b)),

which is the Bohr-frequency kernel in :mod:`encaqc._kernels`.
"""
import logging
import math
import warnings

import numpy as np

from . import _kernels
from .baths import correlation, default_tau_max, rate_closed_form, rate_ohmic_closed_form, rate_quadrature
from .codes import codespace_projector, one_error_projector, sector_projectors, syndrome_index
from .control import (
    ModulationFunction,
    anticommuting_penalty,
    dd_flip_flags,
    penalty_sector_signs,
)
from .dynamics import Trajectory, _expm_hermitian
from .errors import IntegratorError, PreconditionError
from .model import HamiltonianTermList, codespace_ground
from .pauli import DENSE_LIMIT, to_dense

log = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-4


class PositivityWarning(RuntimeWarning):
    """The density matrix developed an eigenvalue below ``-POSITIVITY_TOL``."""


def _impulse_totals(weight, refs):
    """Impulse strength accumulated strictly before each ``ref``."""
    refs = np.asarray(refs, dtype=float)
    if not weight.impulses:
        return np.zeros_like(refs)
    times = np.array([t for t, _ in weight.impulses])
    cum = np.concatenate([[0.0], np.cumsum([s for _, s in weight.impulses])])
    return cum[np.searchsorted(times, refs, side="left")]


class _Channel:
    """One error operator with its sector decomposition under the control."""

    def __init__(self, e, code, protocol, signs, sectors, limit):
        self.error = e
        self.protocol = protocol
        self.code = code
        self.E = to_dense(e, limit)
        self.modulation = ModulationFunction(protocol, code, e)
        dim = self.E.shape[0]
        if protocol.kind == "egp":
            self.anti = anticommuting_penalty(protocol, e)
            patterns = {}
            for s, proj in enumerate(sectors):
                key = tuple(signs[s, self.anti].astype(int))
                patterns[key] = patterns.get(key, 0) + proj
            self.signs = [np.array(k, dtype=float) for k in patterns]
            self.parts = [self.E @ proj for proj in patterns.values()]
        else:
            self.anti = np.zeros(0, dtype=np.int64)
            self.signs = [np.zeros(0)]
            self.parts = [self.E.copy()]
        if protocol.kind == "dd":
            flips = dd_flip_flags(protocol, code, e)
            self._prefix = np.concatenate([[0], np.cumsum(flips) % 2])
            self._pulse_times = np.asarray(protocol.pulse_times)
        self.identity = np.eye(dim)

    def phases(self, u, refs):
        """``f_g(u)`` for every group, shape ``(n_groups, len(u))``.

        Smooth parts are evaluated at ``u``; impulses and pulses at ``refs``.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        refs = np.broadcast_to(np.asarray(refs, dtype=float), u.shape)
        p = self.protocol
        if p.kind == "none":
            return np.ones((1, u.size), dtype=complex)
        if p.kind == "dd":
            parity = self._prefix[np.searchsorted(self._pulse_times, refs, side="left")]
            return (1.0 - 2.0 * parity)[None, :].astype(complex)
        acc = np.array([
            p.weights[m].smooth_integral(u) + _impulse_totals(p.weights[m], refs) for m in self.anti
        ]).reshape(len(self.anti), u.size)
        return np.exp(2j * np.array([sg @ acc for sg in self.signs]))

    def toggled(self, t, ref):
        f = self.phases([t], [ref])[:, 0]
        return sum(fg * part for fg, part in zip(f, self.parts))


class MasterEquation:
    """Right-hand side of the master equation for one scenario.

    Parameters
    ----------
    h : HamiltonianTermList
        Encoded Hamiltonian (may be zero).
    code : StabilizerCode
    errs : ErrorSet or sequence of PauliString
    protocol : NoControl, DDProtocol or EGPProtocol
    bath : ClassicalExponential or OhmicLorentzDrude
    tau_max : float, optional
        Memory cutoff; defaults to ten correlation times.
    points : int
        Trapezoid nodes per ``tau_max`` of memory.
    xi : {"frozen", "time_ordered"}
    """

    def __init__(self, h, code, errs, protocol, bath, tau_max=None, points=200, xi="frozen",
                 limit=DENSE_LIMIT):
        if xi not in ("frozen", "time_ordered"):
            raise ValueError(f"xi must be 'frozen' or 'time_ordered', got {xi!r}")
        self.h = h if h is not None else HamiltonianTermList.zero(code.n_physical)
        self.code, self.protocol, self.bath = code, protocol, bath
        self.errs = list(errs)
        self.tau_max = float(tau_max) if tau_max is not None else default_tau_max(bath)
        self.points = int(points)
        self.xi = xi
        self.limit = limit
        sectors = sector_projectors(code, limit)
        signs = penalty_sector_signs(protocol, code, limit) if protocol.kind == "egp" else None
        self.channels = [_Channel(e, code, protocol, signs, sectors, limit) for e in self.errs]
        self._memo = {}

    # --------------------------------------------------------- memory
    def segments(self, channel, t):
        """Trapezoid segments ``[(tau, weights, ref), ...]`` over ``[0, min(t, tau_max)]``.

        Segments break where the toggled error jumps; ``ref`` is the
        segment midpoint expressed in absolute time ``t - tau``.
        """
        upper = min(t, self.tau_max)
        if upper <= 0:
            return []
        cuts = [c for c in channel.modulation.discontinuities(t) if c < upper]
        edges = [0.0, *cuts, upper]
        out = []
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            n = max(2, math.ceil(self.points * (b - a) / self.tau_max))
            tau = np.linspace(a, b, n + 1)
            w = np.full(n + 1, (b - a) / n)
            w[0] *= 0.5
            w[-1] *= 0.5
            out.append((tau, w, t - 0.5 * (a + b)))
        return out

    def _nodes(self, channel, t):
        segs = self.segments(channel, t)
        if not segs:
            return None
        tau = np.concatenate([s[0] for s in segs])
        w = np.concatenate([s[1] for s in segs])
        refs = np.concatenate([np.full(s[0].size, s[2]) for s in segs])
        return tau, w, refs

    def _eig(self, t):
        key = ("eig", t)
        if key not in self._memo:
            vals, vecs = np.linalg.eigh(self.h.dense(t, self.limit))
            self._memo[key] = (vals, vecs)
        return self._memo[key]

    def memory_operator(self, j, t):
        """``L_j(t)`` as a dense matrix."""
        key = ("L", j, t)
        if key in self._memo:
            return self._memo[key]
        ch = self.channels[j]
        nodes = self._nodes(ch, t)
        if nodes is None:
            out = np.zeros_like(ch.E)
        elif self.xi == "frozen":
            out = self._memory_frozen(ch, t, *nodes)
        else:
            out = self._memory_time_ordered(ch, t, *nodes)
        self._memo[key] = out
        return out

    def _memory_frozen(self, ch, t, tau, w, refs):
        vals, vecs = self._eig(t)
        omega = np.subtract.outer(vals, vals)
        uniq, inv = np.unique(np.round(omega, 12), return_inverse=True)
        cw = w * correlation(self.bath, tau)
        f = ch.phases(t - tau, refs)
        out = np.zeros_like(ch.E)
        for fg, part in zip(f, ch.parts):
            k = _kernels.bohr_sum(uniq[None, :], tau, cw * fg)[0][inv].reshape(omega.shape)
            out += (vecs.conj().T @ part @ vecs) * k
        return vecs @ out @ vecs.conj().T

    def _memory_time_ordered(self, ch, t, tau, w, refs):
        cw = w * correlation(self.bath, tau)
        f = ch.phases(t - tau, refs)
        dim = ch.E.shape[0]
        u = np.eye(dim, dtype=complex)
        out = np.zeros_like(ch.E)
        prev = 0.0
        for k in range(tau.size):
            step = tau[k] - prev
            if step > 0:
                ham = self.h.dense(t - 0.5 * (prev + tau[k]), self.limit)
                if np.any(ham):
                    u = u @ _expm_hermitian(ham, step)
                prev = tau[k]
            op = sum(f[g, k] * part for g, part in enumerate(ch.parts))
            out += cw[k] * (u @ op @ u.conj().T)
        return out

    # ------------------------------------------------------ right side
    def dissipator(self, rho, t, ref=None):
        """``-sum_j (X_j + X_j^dag)``; ``ref`` pins the pulse count of ``E~(t)``."""
        ref = t if ref is None else ref
        out = np.zeros_like(rho)
        for j, ch in enumerate(self.channels):
            L = self.memory_operator(j, t)
            if not np.any(L):
                continue
            et = ch.toggled(t, ref)
            x = et @ (L @ rho - rho @ L.conj().T)
            out -= x + x.conj().T
        return out

    def rhs(self, rho, t, ref=None):
        ham = self.h.dense(t, self.limit)
        return -1j * (ham @ rho - rho @ ham) + self.dissipator(rho, t, ref)

    def forget(self):
        self._memo.clear()


def _step_grid(total_time, dt, breaks):
    """Union of the uniform grid and ``breaks``; returns ``(grid, is_record)``."""
    n = max(1, math.ceil(total_time / dt - 1e-9))
    base = total_time * np.arange(n + 1) / n
    extra = [b for b in breaks if 0.0 < b < total_time
             and np.min(np.abs(base - b)) > 1e-12 * max(1.0, total_time)]
    grid = np.array(sorted([*base, *extra]))
    is_record = np.isin(grid, base)
    return grid, is_record


def integrate_master_equation(me, rho0, total_time, dt, snapshot_times=(), check_every=1):
    """Integrate ``me`` from 0 to ``total_time`` and record a :class:`Trajectory`.

    Second-order exponential midpoint scheme: the coherent part is
    propagated exactly over each step with ``H`` frozen at the midpoint and
    the dissipator is added at the start and midpoint stages. Steps are
    split at every control impulse. Records are taken on the uniform grid
    ``k * T / ceil(T / dt)``.
    """
    code, limit = me.code, me.limit
    rho = np.array(rho0, dtype=np.complex128)
    P = codespace_projector(code, limit)
    Q1 = one_error_projector(code, me.errs, limit)
    breaks = []
    if me.protocol.kind == "dd":
        breaks = list(me.protocol.pulse_times)
    elif me.protocol.kind == "egp":
        breaks = list(me.protocol.impulse_times())
    grid, is_record = _step_grid(total_time, dt, breaks)
    snaps = sorted(float(s) for s in snapshot_times)
    rec = {k: [] for k in ("t", "P_c", "P_e1", "fidelity", "trace_err", "min_eig")}
    snapshots = []
    herm = 0.0

    def record(t):
        _, ground, _ = codespace_ground(me.h, code, t, limit)
        evals = np.linalg.eigvalsh(rho)
        rec["t"].append(t)
        rec["P_c"].append(float(np.real(np.trace(P @ rho))))
        rec["P_e1"].append(float(np.real(np.trace(Q1 @ rho))))
        rec["fidelity"].append(float(np.real(np.trace(ground @ rho))))
        rec["trace_err"].append(float(abs(np.trace(rho) - 1.0)))
        rec["min_eig"].append(float(evals[0]))
        if evals[0] < -POSITIVITY_TOL:
            warnings.warn(f"min eigenvalue {evals[0]:.3g} at t={t:.6g}", PositivityWarning, stacklevel=3)
        while snaps and snaps[0] <= t + 1e-12:
            snapshots.append((snaps.pop(0), t, rho.copy()))

    record(0.0)
    for k, (a, b) in enumerate(zip(grid[:-1], grid[1:])):
        h_step = b - a
        mid = 0.5 * (a + b)
        ham = me.h.dense(mid, limit)
        u_half = _expm_hermitian(ham, 0.5 * h_step)
        u_full = u_half @ u_half
        k1 = me.dissipator(rho, a, ref=mid)
        rho_mid = u_half @ (rho + 0.5 * h_step * k1) @ u_half.conj().T
        k2 = me.dissipator(rho_mid, mid, ref=mid)
        rho = u_full @ rho @ u_full.conj().T + h_step * (u_half @ k2 @ u_half.conj().T)
        herm = max(herm, float(np.max(np.abs(rho - rho.conj().T))))
        rho = 0.5 * (rho + rho.conj().T)
        me.forget()
        if is_record[k + 1]:
            record(float(b))
    traj = Trajectory(
        times=np.array(rec["t"]), P_c=np.array(rec["P_c"]), P_e1=np.array(rec["P_e1"]),
        fidelity=np.array(rec["fidelity"]), trace_err=np.array(rec["trace_err"]),
        min_eig=np.array(rec["min_eig"]), herm_residual=herm, snapshots=snapshots,
        meta={"dt": dt, "T": total_time, "xi": me.xi, "points": me.points, "tau_max": me.tau_max},
    )
    traj.final_state = rho
    return traj


def codespace_population_rhs(me, rho, t):
    """``d Tr(P rho) / dt`` from the population equation (frozen memory).

    ``2 sum_j int Re{C m_j Tr(E_j P Xi_j Q rho Q)} - Re{C conj(m_j) Tr(E_j Xi_j P rho P)}``
    with ``Xi_j = exp(-i tau H(t)) E_j exp(i tau H(t))`` and ``Q = 1 - P``. It
    equals ``Tr(P rhs P)`` of the full equation on the same quadrature nodes.
    """
    P = codespace_projector(me.code, me.limit)
    Q = np.eye(P.shape[0]) - P
    vals, vecs = np.linalg.eigh(me.h.dense(t, me.limit))
    omega = np.subtract.outer(vals, vals).ravel()
    B1 = vecs.conj().T @ (Q @ rho @ Q) @ vecs
    B2 = vecs.conj().T @ (P @ rho @ P) @ vecs
    total = 0.0
    for ch in me.channels:
        Ev = vecs.conj().T @ ch.E @ vecs
        EPv = vecs.conj().T @ (ch.E @ P) @ vecs
        # Tr(A Xi B) = sum_ab (V^dag E V)_ab (V^dag B A V)_ba exp(-i tau w_ab)
        m1 = (Ev * (B1 @ EPv).T).ravel()
        m2 = (Ev * (B2 @ Ev).T).ravel()
        for tau, w, ref in me.segments(ch, t):
            phase = np.exp(-1j * np.multiply.outer(tau, omega))
            c = correlation(me.bath, tau)
            m = ch.modulation(t, tau, ref)
            total += np.sum(w * np.real(c * m * (phase @ m1)))
            total -= np.sum(w * np.real(c * np.conj(m) * (phase @ m2)))
    return 2.0 * total


# ------------------------------------------------------------- rate equation

def _leak_rate_fn(code, protocol, bath, e, signs):
    """``t -> 2 Re int_0^t C conj(m)`` for ``e`` leaving a sector with penalty ``signs``."""
    if protocol.kind == "none" or (protocol.kind == "egp" and protocol.is_constant):
        mu = 0.0
        if protocol.kind == "egp":
            anti = anticommuting_penalty(protocol, e)
            mu = 2.0 * protocol.alpha * float(np.sum(signs[anti]))
        if bath.kind == "classical":
            return lambda t: rate_closed_form(bath, mu, t, "-"), ("mu", mu)
        return lambda t: rate_ohmic_closed_form(bath, mu, t, "-"), ("mu", mu)
    if protocol.kind == "dd":
        m = ModulationFunction(protocol, code, e)
        key = ("dd", tuple(dd_flip_flags(protocol, code, e)))
    else:
        anti = anticommuting_penalty(protocol, e)
        m = ModulationFunction(protocol, code, e, tuple(signs))
        key = ("egp", tuple(anti), tuple(signs[anti]))
    return (lambda t: rate_quadrature(bath, m, t, "-")), key


def rate_equation_solve(code, errs, protocol, bath, total_time, dt, p_c0=1.0, p_e10=0.0,
                        closure="sectors", h=None):
    """Classical population dynamics for ``H_AQC = 0``.

    ``closure="sectors"`` evolves all syndrome-sector populations with
    ``dp_s/dt = sum_j R_j(s^j, t) p_{s^j} - R_j(s, t) p_s`` (``s^j`` is ``s``
    flipped by error ``j``), which is exact for a vanishing Hamiltonian.
    ``closure="two_level"`` keeps only ``P_c`` and ``P_e1 = N_0 - P_c`` with
    ``dP_c/dt = -sum_j r_j^- P_c + sum_j r_j^+ P_e1``. Fourth-order
    Runge-Kutta with fixed step ``dt``; steps are split at control impulses,
    where the rates jump, and records are taken on the uniform grid.
    """
    if h is not None and not h.is_zero:
        raise PreconditionError("the rate equation requires a vanishing encoded Hamiltonian")
    if closure not in ("sectors", "two_level"):
        raise ValueError(f"unknown closure {closure!r}")
    errs = list(errs)
    n_sec = 1 << code.n_generators
    if protocol.kind == "egp":
        signs = penalty_sector_signs(protocol, code)
    else:
        signs = np.ones((n_sec, 0))
    syn = [syndrome_index(code, e) for e in errs]
    cache, fns = {}, {}

    def rate(j, s, t):
        e = errs[j]
        if (j, s) not in fns:
            fns[(j, s)] = _leak_rate_fn(code, protocol, bath, e, signs[s])
        fn, key = fns[(j, s)]
        if (key, t) not in cache:
            cache[(key, t)] = fn(t)
        return cache[(key, t)]

    if closure == "sectors":
        p0 = np.zeros(n_sec)
        p0[0] = p_c0
        one = sorted(set(syn))
        for s in one:
            p0[s] += p_e10 / len(one)

        def deriv(p, t):
            out = np.zeros_like(p)
            for j, sj in enumerate(syn):
                for s in range(n_sec):
                    flow = rate(j, s, t) * p[s]
                    out[s] -= flow
                    out[s ^ sj] += flow
            return out

        one_mask = np.zeros(n_sec, dtype=bool)
        one_mask[one] = True

        def observe(p):
            return p[0], float(np.sum(p[one_mask]))
    else:
        n0 = p_c0 + p_e10
        p0 = np.array([p_c0])
        plus_sector = {j: sj for j, sj in enumerate(syn)}

        def deriv(p, t):
            leak = sum(rate(j, 0, t) for j in range(len(errs)))
            back = sum(rate(j, plus_sector[j], t) for j in range(len(errs)))
            return np.array([-leak * p[0] + back * (n0 - p[0])])

        def observe(p):
            return p[0], n0 - p[0]

    breaks = []
    if protocol.kind == "dd":
        breaks = list(protocol.pulse_times)
    elif protocol.kind == "egp":
        breaks = list(protocol.impulse_times())
    times, is_record = _step_grid(total_time, dt, breaks)
    # the rate jumps at a pulse; a step starting there uses the right limit
    nudge = 1e-12 * max(1.0, total_time)
    jumps = set(float(b) for b in breaks)
    p = p0.astype(float)
    total0 = p_c0 + p_e10
    rows = []

    def push(t, p):
        pc, pe = observe(p)
        rows.append((t, pc, pe, abs(pc + pe - total0) if closure == "two_level" else abs(np.sum(p) - total0),
                     float(np.min(p))))

    push(0.0, p)
    for k, (a, b) in enumerate(zip(times[:-1], times[1:])):
        h_step = b - a
        k1 = deriv(p, a + nudge if float(a) in jumps else a)
        k2 = deriv(p + 0.5 * h_step * k1, a + 0.5 * h_step)
        k3 = deriv(p + 0.5 * h_step * k2, a + 0.5 * h_step)
        k4 = deriv(p + h_step * k3, b)
        p = p + h_step * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        if np.min(p) < -1e-12:
            raise IntegratorError(f"negative population {np.min(p):.3g} at t={b:.6g}")
        if is_record[k + 1]:
            push(float(b), p)
    arr = np.array(rows)
    return Trajectory(
        times=arr[:, 0], P_c=arr[:, 1], P_e1=arr[:, 2], fidelity=np.full(len(rows), np.nan),
        trace_err=arr[:, 3], min_eig=arr[:, 4],
        meta={"closure": closure, "dt": dt, "T": total_time},
    )
