"""Scenario configuration: YAML in, validated models out.

Every section has defaults, unknown keys are rejected, and
:func:`effective_yaml` renders the fully resolved configuration so that a
run can be repeated from its own report.
"""
import math
from collections import Counter
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .baths import ClassicalExponential, OhmicLorentzDrude
from .codes import (
    PRESET_NAMES,
    load_code_file,
    make_error_set,
    penalty_weight,
    preset,
    single_qubit_errors,
)
from .control import (
    DDProtocol,
    EGPProtocol,
    NoControl,
    WeightFunction,
    penalty_terms,
    udd_pulse_times,
    uniform_pulse_times,
)
from .errors import CodeValidationError, ConfigError, EncAQCError
from .model import AnnealSchedule, HamiltonianTermList, build_encoded_aqc
from .pauli import parse_pauli

SWEEP_PARAMETERS = {
    "alpha": ("protocol", "alpha"),
    "gamma": ("bath", "gamma"),
    "E_R": ("bath", "E_R"),
    "beta": ("bath", "beta"),
    "pulse_count": ("protocol", "pulses"),
    "T": ("schedule", "total_time"),
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CodeSection(_Section):
    preset: Optional[str] = "c422"
    file: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if self.file is not None:
            self.preset = None
        elif self.preset not in PRESET_NAMES:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESET_NAMES)}")
        return self


class ScheduleSection(_Section):
    kind: Literal["landau_zener", "linear", "zero"] = "landau_zener"
    total_time: float = Field(20.0, gt=0)
    logical: int = Field(0, ge=0)
    h_initial: List[Tuple[float, str]] = []
    h_final: List[Tuple[float, str]] = []


class ProtocolSection(_Section):
    kind: Literal["none", "dd", "egp"] = "none"
    sequence: Literal["uniform", "udd"] = "uniform"
    pulses: int = Field(0, ge=0)
    ordering: Optional[List[int]] = None
    alpha: float = Field(0.0, ge=0)
    penalty: Union[Literal["generators", "full_group"], List[str]] = "generators"


class BathSection(_Section):
    kind: Literal["classical", "ohmic"] = "classical"
    c: float = Field(1e-3, ge=0)
    gamma: float = Field(1.0, gt=0)
    E_R: float = Field(0.05, ge=0)
    beta: float = Field(1.0, gt=0)
    K: int = Field(50, ge=0)


class ErrorSection(_Section):
    axes: str = "XYZ"
    paulis: Optional[List[str]] = None


class NumericsSection(_Section):
    dt: Optional[float] = Field(None, gt=0)
    tau_max: Optional[float] = Field(None, gt=0)
    points: int = Field(200, ge=2)
    xi: Literal["frozen", "time_ordered"] = "frozen"
    rate_dt: Optional[float] = Field(None, gt=0)
    closure: Literal["sectors", "two_level"] = "sectors"
    snapshots: List[float] = []
    rate_grid: int = Field(11, ge=1)


class ScrambleSection(_Section):
    errors: Optional[List[str]] = None
    tau_fractions: List[float] = [0.25, 0.5, 0.75]
    agreement_tol: float = 1e-8


class CompareSection(_Section):
    pulses_per_gamma: float = Field(8.0, gt=0)
    alpha_override: Optional[float] = Field(None, ge=0)
    threshold: float = 0.05
    dd_ordering: Optional[List[int]] = None


class SweepSection(_Section):
    parameter: str = "alpha"
    values: List[float] = []

    @model_validator(mode="after")
    def _known(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"unknown sweep parameter {self.parameter!r}; choose from {sorted(SWEEP_PARAMETERS)}"
            )
        return self


class ScenarioConfig(_Section):
    code: CodeSection = CodeSection()
    schedule: ScheduleSection = ScheduleSection()
    protocol: ProtocolSection = ProtocolSection()
    bath: BathSection = BathSection()
    errors: ErrorSection = ErrorSection()
    numerics: NumericsSection = NumericsSection()
    scramble: ScrambleSection = ScrambleSection()
    compare: CompareSection = CompareSection()
    sweep: SweepSection = SweepSection()
    seed: int = 0


def _loc(err):
    return ".".join(str(p) for p in err["loc"])


def parse_config(data):
    """Validate a mapping; raise :class:`ConfigError` naming the first bad key."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(err["msg"], _loc(err)) from None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}", str(path)) from None
    cfg = parse_config(data)
    if cfg.code.file is not None and not Path(cfg.code.file).is_absolute():
        cfg.code.file = str((path.parent / cfg.code.file).resolve())
    return cfg


def effective_yaml(cfg):
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


def with_value(cfg, parameter, value):
    """Copy of ``cfg`` with one sweep parameter replaced."""
    section, key = SWEEP_PARAMETERS[parameter]
    data = cfg.model_dump(mode="json")
    data[section][key] = int(value) if key == "pulses" else float(value)
    return parse_config(data)


# ------------------------------------------------------------- building

class Scenario:
    """Resolved objects for one configuration.

    All cross-references are resolved on construction; any failure is a
    :class:`ConfigError` with the offending key path.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.code = _guard("code", lambda: _build_code(cfg.code))
        self.errs = _guard("errors", lambda: _build_errors(cfg.errors, self.code))
        self.h = _guard("schedule", lambda: _build_schedule(cfg.schedule, self.code))
        self.total_time = cfg.schedule.total_time
        self.protocol = _guard("protocol", lambda: build_protocol(cfg.protocol, self.code, self.total_time))
        self.bath = _guard("bath", lambda: _build_bath(cfg.bath))
        n = cfg.numerics
        self.dt = n.dt if n.dt is not None else self.total_time / 2000
        self.rate_dt = n.rate_dt if n.rate_dt is not None else self.total_time / 500


def _guard(path, fn):
    try:
        return fn()
    except ConfigError:
        raise
    except (EncAQCError, ValueError) as exc:
        raise ConfigError(str(exc), path) from None


def _build_code(sec):
    if sec.file is not None:
        try:
            return load_code_file(sec.file)
        except OSError as exc:
            raise ConfigError(f"cannot read code file: {exc.strerror}", "code.file") from None
        except (CodeValidationError, ValueError, yaml.YAMLError) as exc:
            raise ConfigError(str(exc), "code.file") from None
    return preset(sec.preset)


def _build_errors(sec, code):
    if sec.paulis is not None:
        return make_error_set(code, [parse_pauli(p) for p in sec.paulis])
    return single_qubit_errors(code, sec.axes)


def _build_schedule(sec, code):
    if sec.kind == "zero":
        return HamiltonianTermList.zero(code.n_physical)
    if sec.kind == "landau_zener":
        if sec.logical >= code.n_logical:
            raise ConfigError(f"code has {code.n_logical} logical qubits", "schedule.logical")
        sched = AnnealSchedule.linear(
            sec.total_time, [(-1.0, code.logical_x[sec.logical])], [(-1.0, code.logical_z[sec.logical])]
        )
    else:
        sched = AnnealSchedule.linear(
            sec.total_time,
            [(c, parse_pauli(p)) for c, p in sec.h_initial],
            [(c, parse_pauli(p)) for c, p in sec.h_final],
        )
    return build_encoded_aqc(code, sched)


def build_protocol(sec, code, total_time):
    if sec.kind == "none":
        return NoControl()
    if sec.kind == "dd":
        if sec.pulses == 0:
            times = []
        elif sec.sequence == "udd":
            times = udd_pulse_times(total_time, sec.pulses)
        else:
            times = uniform_pulse_times(total_time, sec.pulses)
        return DDProtocol.build(code, times, sec.ordering)
    penalty = sec.penalty if isinstance(sec.penalty, str) else [parse_pauli(p) for p in sec.penalty]
    if sec.sequence == "udd" and sec.pulses:
        terms = penalty_terms(code, penalty)
        w = WeightFunction.udd(total_time, sec.pulses)
        return EGPProtocol.from_weights(code, [w] * len(terms), penalty)
    return EGPProtocol.constant(code, sec.alpha, penalty)


def _build_bath(sec):
    if sec.kind == "classical":
        return ClassicalExponential(sec.c, sec.gamma)
    bath = OhmicLorentzDrude(sec.E_R, sec.gamma, sec.beta, sec.K)
    bath.check_resonance()
    return bath


def matched_alpha(cfg, errs, code):
    """``(alpha, N)``: EGP weight matching ``N`` DD pulses of period ``T / N``.

    ``w`` is the most common nonzero anticommuting weight of the error set.
    """
    n = max(1, math.ceil(cfg.compare.pulses_per_gamma * cfg.bath.gamma * cfg.schedule.total_time))
    delta = cfg.schedule.total_time / n
    if cfg.compare.alpha_override is not None:
        return cfg.compare.alpha_override, n
    terms = penalty_terms(code, cfg.protocol.penalty if isinstance(cfg.protocol.penalty, str)
                          else [parse_pauli(p) for p in cfg.protocol.penalty])
    ws = [penalty_weight(terms, e) for e in errs]
    ws = [w for w in ws if w > 0]
    if not ws:
        raise ConfigError("no error anticommutes with the penalty", "protocol.penalty")
    w = Counter(ws).most_common(1)[0][0]
    return math.pi / (2.0 * delta * w), n
