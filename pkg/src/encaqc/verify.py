"""Invariant checks run by the ``verify`` subcommand."""
from dataclasses import dataclass

import numpy as np

from .baths import exponential_modulation, rate_closed_form, rate_ohmic_closed_form, rate_quadrature
from .codes import anticommuting_weight, codespace_projector, half_group_counts, is_detectable
from .control import (
    DDProtocol,
    EGPProtocol,
    control_unitary,
    dd_parity,
    egp_toggled_error,
    uniform_pulse_times,
)
from .master import MasterEquation, codespace_population_rhs
from .pauli import PauliString, multiply, to_dense


@dataclass
class Check:
    name: str
    status: str  # "pass", "fail" or "skip"
    residual: float = 0.0
    detail: str = ""

    def line(self):
        tag = self.status.upper()
        body = f"{tag:4s} {self.name}"
        if self.status != "skip":
            body += f" residual={self.residual:.3e}"
        if self.detail:
            body += f" ({self.detail})"
        return body


def _check(name, residual, tol, detail=""):
    return Check(name, "pass" if residual <= tol else "fail", float(residual), detail)


def check_half_group(code, errs):
    out = []
    for e in errs:
        n_anti, total = half_group_counts(code, e)
        out.append(_check(f"half_group[{e}]", abs(2 * n_anti - total), 0,
                          f"{n_anti} of {total} anticommute"))
        w = anticommuting_weight(code, e, use_full_group=True)
        expect = 1 << (code.n_physical - code.n_logical - 1)
        out.append(_check(f"full_group_weight[{e}]", abs(w - expect), 0, f"w={w}, expected {expect}"))
    if not errs:
        out.append(Check("half_group", "skip", detail="empty error set"))
    return out


def check_pauli_algebra(n_qubits, rng, n_pairs=200):
    worst = 0.0
    for _ in range(n_pairs):
        a = PauliString(int(rng.integers(1 << n_qubits)), int(rng.integers(1 << n_qubits)),
                        int(rng.integers(4)), n_qubits)
        b = PauliString(int(rng.integers(1 << n_qubits)), int(rng.integers(1 << n_qubits)),
                        int(rng.integers(4)), n_qubits)
        worst = max(worst, float(np.max(np.abs(to_dense(multiply(a, b)) - to_dense(a) @ to_dense(b)))))
    return [_check("pauli_product_vs_dense", worst, 1e-12, f"{n_pairs} random pairs")]


def check_toggling(code, errs, protocol, total_time, n_grid=50):
    """DD parity and EGP exponent identities on a time grid."""
    out = []
    grid = np.linspace(0.0, total_time, n_grid)
    dd = protocol if protocol.kind == "dd" else DDProtocol.build(code, uniform_pulse_times(total_time, 8))
    egp = protocol if protocol.kind == "egp" else EGPProtocol.constant(code, 1.0)
    worst_dd = worst_egp = 0.0
    for e in errs:
        E = to_dense(e)
        for t in grid:
            u = control_unitary(dd, code, t)
            lhs = u.conj().T @ E @ u
            worst_dd = max(worst_dd, float(np.max(np.abs(lhs - (-1.0) ** dd_parity(dd, code, e, t) * E))))
            u = control_unitary(egp, code, t)
            lhs = u.conj().T @ E @ u
            worst_egp = max(worst_egp, float(np.max(np.abs(lhs - egp_toggled_error(egp, code, e, t)))))
    if not errs:
        return [Check("toggling", "skip", detail="empty error set")]
    out.append(_check("toggling_dd", worst_dd, 1e-10, f"{n_grid}-point grid"))
    out.append(_check("toggling_egp", worst_egp, 1e-10, f"{n_grid}-point grid"))
    return out


def check_rates(bath, errs, total_time, n_grid=5):
    if not errs:
        return [Check("rates", "skip", detail="empty error set")]
    worst = 0.0
    closed = rate_closed_form if bath.kind == "classical" else rate_ohmic_closed_form
    n = 0
    for mu in np.linspace(0.0, 20.0 * bath.gamma, n_grid):
        for t in np.linspace(0.1, total_time, n_grid):
            for sign in ("+", "-"):
                m = exponential_modulation(mu)
                worst = max(worst, abs(closed(bath, mu, t, sign) - rate_quadrature(bath, m, t, sign)))
                n += 1
    return [_check("rate_closed_vs_quadrature", worst, 1e-9, f"{n} points")]


def check_master(h, code, errs, protocol, bath, total_time, tau_max=None, points=200):
    if not errs:
        return [Check("master_equation", "skip", detail="empty error set")]
    me = MasterEquation(h, code, errs, protocol, bath, tau_max=tau_max, points=points)
    dim = 1 << code.n_physical
    rng = np.random.default_rng(7)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    worst_tr = worst_pop = 0.0
    P = codespace_projector(code)
    for t in np.linspace(0.0, total_time, 4):
        r = me.rhs(rho, t)
        worst_tr = max(worst_tr, abs(np.trace(r)))
        worst_pop = max(worst_pop, abs(np.trace(P @ r @ P).real - codespace_population_rhs(me, rho, t)))
        me.forget()
    return [
        _check("master_rhs_trace", worst_tr, 1e-10),
        _check("population_equation", worst_pop, 1e-8),
    ]


def run_suite(scenario, seed=0):
    code, errs = scenario.code, list(scenario.errs)
    rng = np.random.default_rng(seed)
    checks = []
    checks += check_half_group(code, errs)
    checks += check_pauli_algebra(code.n_physical, rng)
    checks += check_toggling(code, errs, scenario.protocol, scenario.total_time)
    checks += check_rates(scenario.bath, errs, scenario.total_time)
    checks += check_master(scenario.h, code, errs, scenario.protocol, scenario.bath,
                           scenario.total_time, scenario.cfg.numerics.tau_max, scenario.cfg.numerics.points)
    detectable = all(is_detectable(code, e) for e in errs)
    checks.append(_check("errors_detectable", 0.0 if detectable else 1.0, 0))
    return checks
