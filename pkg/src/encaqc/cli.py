"""Command-line entry point.

Subcommands ``verify``, ``scramble``, ``master``, ``rates``, ``compare`` and
``sweep`` read one YAML scenario file. Exit status is 0 on success, 1 when a
check fails and 2 for configuration errors.
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .baths import rate_quadrature
from .codes import syndrome_index
from .config import Scenario, effective_yaml, load_config, matched_alpha, parse_config, with_value
from .control import DDProtocol, EGPProtocol, ModulationFunction, penalty_sector_signs, uniform_pulse_times
from .dynamics import error_scrambling_scenario
from .errors import ConfigError, EncAQCError
from .io import rows_to_csv, snapshots_text, trajectory_csv, write_text
from .master import MasterEquation, integrate_master_equation, rate_equation_solve
from .model import codespace_ground
from .pauli import parse_pauli
from .verify import run_suite

log = logging.getLogger("encaqc")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class Run:
    """Output directory plus the report being assembled."""

    def __init__(self, command, cfg, out):
        self.command = command
        self.cfg = cfg
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.lines = []
        self.failed = False

    def say(self, text):
        self.lines.append(text)

    def fail(self, text):
        self.failed = True
        self.say(f"FAIL {text}")

    def write(self, name, text):
        write_text(self.out / name, text)
        self.say(f"wrote {name}")

    def finish(self):
        head = [f"command: {self.command}", f"seed: {self.cfg.seed}",
                f"status: {'fail' if self.failed else 'ok'}", ""]
        body = head + self.lines + ["", "# effective config", effective_yaml(self.cfg)]
        write_text(self.out / f"{self.command}_report.txt", "\n".join(body))
        print("\n".join(head[:3] + self.lines))
        return EXIT_FAIL if self.failed else EXIT_OK


def _initial_rho(sc):
    _, _, v = codespace_ground(sc.h, sc.code, 0.0)
    return np.outer(v, v.conj())


def run_master(sc, protocol=None, dt=None, snapshots=()):
    n = sc.cfg.numerics
    me = MasterEquation(sc.h, sc.code, sc.errs, protocol or sc.protocol, sc.bath,
                        tau_max=n.tau_max, points=n.points, xi=n.xi)
    return integrate_master_equation(me, _initial_rho(sc), sc.total_time, dt or sc.dt, snapshots)


# ------------------------------------------------------------ commands

def cmd_verify(sc, run):
    for check in run_suite(sc, run.cfg.seed):
        run.say(check.line())
        if check.status == "fail":
            run.failed = True


def cmd_scramble(sc, run):
    sec = sc.cfg.scramble
    errors = [parse_pauli(p) for p in sec.errors] if sec.errors is not None else list(sc.errs)
    rows = []
    for e in errors:
        for frac in sec.tau_fractions:
            r = error_scrambling_scenario(sc.h, sc.code, e, frac * sc.total_time, sc.total_time, sc.dt)
            rows.append((str(e), r.tau_err, r.logical_fidelity, r.effective_fidelity, r.agreement,
                         r.baseline_fidelity))
            for note in r.notes:
                run.say(f"note {e} tau={r.tau_err:.6g}: {note}")
            if r.agreement < 1.0 - sec.agreement_tol:
                run.fail(f"{e} tau={r.tau_err:.6g}: direct/effective agreement {r.agreement:.12f}")
    run.write("scramble.csv", rows_to_csv(
        ("error", "tau", "logical_fidelity", "effective_fidelity", "agreement", "baseline_fidelity"), rows))
    if rows:
        run.say(f"min logical fidelity {min(r[2] for r in rows):.12g}")


def _trajectory_checks(run, traj, label):
    if traj.trace_err.max() >= 1e-7:
        run.fail(f"{label}: trace error {traj.trace_err.max():.3g}")
    if traj.herm_residual >= 1e-10:
        run.fail(f"{label}: Hermiticity residual {traj.herm_residual:.3g}")
    run.say(f"{label}: final P_c={traj.P_c[-1]:.12g} fidelity={traj.fidelity[-1]:.12g} "
            f"max trace_err={traj.trace_err.max():.3g} herm_residual={traj.herm_residual:.3g} "
            f"min_eig={traj.min_eig.min():.3g}")


def cmd_master(sc, run):
    traj = run_master(sc, snapshots=sc.cfg.numerics.snapshots)
    run.write("trajectory.csv", trajectory_csv(traj))
    if traj.snapshots:
        run.write("snapshots.txt", snapshots_text([(t, rho) for _, t, rho in traj.snapshots]))
    _trajectory_checks(run, traj, "master")


def _rate(sc, e, t, signs):
    m = ModulationFunction(sc.protocol, sc.code, e, signs)
    return rate_quadrature(sc.bath, m, t, "-")


def cmd_rates(sc, run):
    errs = list(sc.errs)
    if not errs:
        run.say("SKIP rates: empty error set")
        return
    times = np.linspace(0.0, sc.total_time, sc.cfg.numerics.rate_grid)
    signs_fn = _sector_signs(sc)
    rows = []
    for t in times:
        for e in errs:
            r_minus = _rate(sc, e, t, signs_fn(0))
            r_plus = _rate(sc, e, t, signs_fn(syndrome_index(sc.code, e)))
            rows.append((t, str(e), r_minus, r_plus))
    run.write("rates.csv", rows_to_csv(("t", "error", "r_minus", "r_plus"), rows))
    if sc.h.is_zero:
        traj = rate_equation_solve(sc.code, errs, sc.protocol, sc.bath, sc.total_time, sc.rate_dt,
                                   closure=sc.cfg.numerics.closure)
        run.write("rate_trajectory.csv", trajectory_csv(traj))
        run.say(f"rate equation: final P_c={traj.P_c[-1]:.12g}")
    else:
        run.say("SKIP rate equation: encoded Hamiltonian is nonzero")


def _sector_signs(sc):
    if sc.protocol.kind != "egp":
        return lambda s: None
    signs = penalty_sector_signs(sc.protocol, sc.code)
    return lambda s: tuple(signs[s])


def compare_protocols(sc):
    """Matched DD and EGP trajectories on the configured scenario."""
    cfg = sc.cfg
    alpha, n = matched_alpha(cfg, sc.errs, sc.code)
    delta = sc.total_time / n
    ordering = cfg.compare.dd_ordering if cfg.compare.dd_ordering is not None else cfg.protocol.ordering
    dd = DDProtocol.build(sc.code, uniform_pulse_times(sc.total_time, n), ordering)
    penalty = cfg.protocol.penalty if isinstance(cfg.protocol.penalty, str) else \
        [parse_pauli(p) for p in cfg.protocol.penalty]
    egp = EGPProtocol.constant(sc.code, alpha, penalty)
    dt = min(sc.dt, delta / 8)
    return run_master(sc, dd, dt), run_master(sc, egp, dt), alpha, n


def cmd_compare(sc, run):
    if not list(sc.errs):
        run.say("SKIP compare: empty error set")
        return
    t_dd, t_egp, alpha, n = compare_protocols(sc)
    diff = np.abs(t_dd.P_c - t_egp.P_c)
    run.write("compare_dd.csv", trajectory_csv(t_dd))
    run.write("compare_egp.csv", trajectory_csv(t_egp))
    run.write("compare.csv", rows_to_csv(("t", "P_c_dd", "P_c_egp", "abs_diff"),
                                         zip(t_dd.times, t_dd.P_c, t_egp.P_c, diff)))
    run.say(f"pulses={n} alpha={alpha:.12g} max|P_c_dd - P_c_egp|={diff.max():.6g} "
            f"threshold={sc.cfg.compare.threshold}")
    if diff.max() > sc.cfg.compare.threshold:
        run.fail("DD/EGP difference exceeds threshold")
    _trajectory_checks(run, t_dd, "dd")
    _trajectory_checks(run, t_egp, "egp")


def sweep_point(cfg, parameter, value):
    sc = Scenario(with_value(cfg, parameter, value))
    traj = run_master(sc)
    leak = 1.0 - traj.P_c
    integrated = float(np.sum(0.5 * (leak[1:] + leak[:-1]) * np.diff(traj.times)))
    return (value, traj.P_c[-1], traj.fidelity[-1], leak[-1], integrated)


def run_sweep(cfg, threads=1):
    """Rows in input order; points run on ``threads`` workers."""
    sec = cfg.sweep
    values = list(sec.values)
    for v in values:  # resolve every point before computing any
        Scenario(with_value(cfg, sec.parameter, v))
    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda v: sweep_point(cfg, sec.parameter, v), values))
    else:
        rows = [sweep_point(cfg, sec.parameter, v) for v in values]
    return rows


def cmd_sweep(sc, run, threads=1):
    rows = run_sweep(run.cfg, threads)
    run.write("sweep.csv", rows_to_csv(
        (run.cfg.sweep.parameter, "final_P_c", "final_fidelity", "final_leakage", "integrated_leakage"), rows))


COMMANDS = {
    "verify": cmd_verify,
    "scramble": cmd_scramble,
    "master": cmd_master,
    "rates": cmd_rates,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="encaqc", description="Encoded AQC error-suppression simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="YAML scenario file (defaults if omitted)")
        p.add_argument("--out", metavar="DIR", default=".", help="output directory")
        p.add_argument("--threads", metavar="N", type=int, default=1, help="sweep workers")
        p.add_argument("--seed", metavar="K", type=int, default=None, help="recorded in reports")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else parse_config({})
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads < 1:
            raise ConfigError("must be >= 1", "--threads")
        sc = Scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run = Run(args.command, cfg, args.out)
    try:
        if args.command == "sweep":
            cmd_sweep(sc, run, args.threads)
        else:
            COMMANDS[args.command](sc, run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EncAQCError as exc:
        run.fail(f"{type(exc).__name__}: {exc}")
    return run.finish()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
