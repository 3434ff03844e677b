"""Stabilizer error-detecting codes.

Generators, logical operators, the full stabilizer group, syndromes, and
dense projectors onto the codespace and the one-error subspace.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import yaml

from .errors import CapacityError, CodeValidationError, PreconditionError
from .pauli import DENSE_LIMIT, PauliString, anticommutation_matrix, commutes, multiply, to_dense

GROUP_LIMIT = 16


def gf2_rank(paulis):
    """Rank over GF(2) of the symplectic vectors of ``paulis``."""
    rows = []
    for p in paulis:
        v = (p.x << p.n_qubits) | p.z
        for r in rows:
            v = min(v, v ^ r)
        if v:
            rows.append(v)
    return len(rows)


@dataclass(frozen=True)
class StabilizerCode:
    """Validated stabilizer code.

    All invariants are checked on construction and the first violation is
    raised as :class:`CodeValidationError`.
    """

    generators: tuple
    logical_x: tuple
    logical_z: tuple
    n_physical: int
    label: str = ""

    def __post_init__(self):
        for name in ("generators", "logical_x", "logical_z"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        _validate_code(self)

    @property
    def n_logical(self):
        return len(self.logical_x)

    @property
    def n_generators(self):
        return len(self.generators)

    @cached_property
    def group(self):
        return tuple(full_group(self))


def _validate_code(code):
    n = code.n_physical
    named = (
        [("generator", i, g) for i, g in enumerate(code.generators)]
        + [("logical_x", i, p) for i, p in enumerate(code.logical_x)]
        + [("logical_z", i, p) for i, p in enumerate(code.logical_z)]
    )
    for kind, i, p in named:
        if p.n_qubits != n:
            raise CodeValidationError(
                f"qubit count: {kind} {i} ({p}) acts on {p.n_qubits} qubits, code has {n}"
            )
        if not p.is_hermitian:
            raise CodeValidationError(f"hermiticity: {kind} {i} ({p}) is not Hermitian")
    gens = code.generators
    for i, g in enumerate(gens):
        if g.phase != 0:
            raise CodeValidationError(f"generator phase: generator {i} ({g}) must have phase +1")
        if g.is_identity:
            raise CodeValidationError(f"independence: generator {i} is the identity")
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not commutes(gens[i], gens[j]):
                raise CodeValidationError(
                    f"commutation: generators {i} ({gens[i]}) and {j} ({gens[j]}) do not commute"
                )
    for k in range(len(gens)):
        if gf2_rank(gens[: k + 1]) != k + 1:
            raise CodeValidationError(
                f"independence: generator {k} ({gens[k]}) is a product of the others"
            )
    for kind, i, p in named[len(gens):]:
        for m, g in enumerate(gens):
            if not commutes(p, g):
                raise CodeValidationError(
                    f"logical commutation: {kind} {i} ({p}) anticommutes with generator {m} ({g})"
                )
    lx, lz = code.logical_x, code.logical_z
    if len(lx) != len(lz):
        raise CodeValidationError(
            f"logical pairing: {len(lx)} logical_x vs {len(lz)} logical_z operators"
        )
    for i in range(len(lx)):
        for j in range(len(lz)):
            anti = not commutes(lx[i], lz[j])
            if anti != (i == j):
                want = "anticommute" if i == j else "commute"
                raise CodeValidationError(
                    f"logical algebra: logical_x {i} ({lx[i]}) and logical_z {j} ({lz[j]}) must {want}"
                )
        for j in range(i + 1, len(lx)):
            if not commutes(lx[i], lx[j]):
                raise CodeValidationError(f"logical algebra: logical_x {i} and {j} must commute")
            if not commutes(lz[i], lz[j]):
                raise CodeValidationError(f"logical algebra: logical_z {i} and {j} must commute")
    if len(gens) != n - len(lx):
        raise CodeValidationError(
            f"generator count: N_g = {len(gens)} but N - n_l = {n} - {len(lx)} = {n - len(lx)}"
        )


def make_code(generators, logical_x, logical_z, label=""):
    """Build a code from Pauli text labels."""
    gens = [PauliString.from_label(s) for s in generators]
    lx = [PauliString.from_label(s) for s in logical_x]
    lz = [PauliString.from_label(s) for s in logical_z]
    everything = gens + lx + lz
    if not everything:
        raise CodeValidationError("qubit count: code has no operators to fix N")
    return StabilizerCode(tuple(gens), tuple(lx), tuple(lz), everything[0].n_qubits, label)


_PRESETS = {
    "bitflip3": dict(generators=["ZZI", "IZZ"], logical_x=["XXX"], logical_z=["ZII"]),
    "c422": dict(
        generators=["XXXX", "ZZZZ"],
        logical_x=["XXII", "XIXI"],
        logical_z=["ZIZI", "ZZII"],
    ),
    "c513": dict(
        generators=["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"],
        logical_x=["XXXXX"],
        logical_z=["ZZZZZ"],
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name):
    """One of ``bitflip3``, ``c422``, ``c513``."""
    try:
        spec = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown code preset {name!r}; choose from {PRESET_NAMES}") from None
    return make_code(label=name, **spec)


def code_from_mapping(data):
    """Build and validate a code from a parsed code-definition mapping."""
    if not isinstance(data, dict):
        raise CodeValidationError("code file must be a mapping")
    unknown = set(data) - {"label", "generators", "logical_x", "logical_z"}
    if unknown:
        raise CodeValidationError(f"unknown keys in code file: {sorted(unknown)}")
    try:
        return make_code(
            data.get("generators", []) or [],
            data.get("logical_x", []) or [],
            data.get("logical_z", []) or [],
            str(data.get("label", "")),
        )
    except ValueError as exc:
        if isinstance(exc, CodeValidationError):
            raise
        raise CodeValidationError(f"parse: {exc}") from exc


def load_code_file(path):
    """Read a YAML code definition with keys label/generators/logical_x/logical_z."""
    with open(path) as fh:
        return code_from_mapping(yaml.safe_load(fh))


def dump_code(code):
    return {
        "label": code.label,
        "generators": [str(g) for g in code.generators],
        "logical_x": [str(p) for p in code.logical_x],
        "logical_z": [str(p) for p in code.logical_z],
    }


# ---------------------------------------------------------------- group ops

def full_group(code, limit=GROUP_LIMIT):
    """All ``2**N_g`` products of generators.

    Element ``k`` is the product of the generators whose bit is set in ``k``
    (generator 0 is the least significant bit). Phases are exact.
    """
    n_g = code.n_generators
    if n_g > limit:
        raise CapacityError(f"N_g = {n_g} exceeds group enumeration limit {limit}")
    out = [PauliString.identity(code.n_physical)]
    for g in code.generators:
        out = out + [multiply(h, g) for h in out]
    return out


def syndrome(code, e):
    """Bit ``m`` is 1 iff ``e`` anticommutes with generator ``m``."""
    if not code.generators:
        return np.zeros(0, dtype=np.uint8)
    return anticommutation_matrix([e], code.generators)[0].astype(np.uint8)


def syndrome_index(code, e):
    """Syndrome packed as an integer (generator ``m`` in bit ``m``)."""
    return int(sum(int(b) << m for m, b in enumerate(syndrome(code, e))))


def is_detectable(code, e):
    return bool(syndrome(code, e).any())


def penalty_weight(terms, e):
    """Number of Paulis in ``terms`` anticommuting with ``e``."""
    terms = list(terms)
    if not terms:
        return 0
    return int(anticommutation_matrix([e], terms).sum())


def anticommuting_weight(code, e, use_full_group=False):
    """``w_j``: generators (or full-group elements) anticommuting with ``e``."""
    return penalty_weight(code.group if use_full_group else code.generators, e)


def half_group_counts(code, e):
    """(number of group elements anticommuting with ``e``, group size)."""
    group = code.group
    return penalty_weight(group, e), len(group)


def verify_half_group_theorem(code, e):
    """True iff exactly half of the full stabilizer group anticommutes with ``e``.

    Raises :class:`PreconditionError` if ``e`` is not detectable, which is a
    different outcome from the theorem failing.
    """
    if not is_detectable(code, e):
        raise PreconditionError(f"error {e} is not detectable by code {code.label or ''}".rstrip())
    n_anti, size = half_group_counts(code, e)
    return 2 * n_anti == size


# -------------------------------------------------------------- error sets

_AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class ErrorSet:
    """Detectable single-qubit Pauli errors embedded in ``N`` qubits."""

    errors: tuple
    labels: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "errors", tuple(self.errors))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(_label_of(e) for e in self.errors))
        else:
            object.__setattr__(self, "labels", tuple(tuple(l) for l in self.labels))
        if len(self.labels) != len(self.errors):
            raise CodeValidationError("error set: labels and errors differ in length")

    def __len__(self):
        return len(self.errors)

    def __iter__(self):
        return iter(self.errors)

    def __getitem__(self, i):
        return self.errors[i]

    def names(self):
        return [f"{axis}{q}" for q, axis in self.labels]


def _label_of(e):
    if e.weight != 1:
        raise CodeValidationError(f"error set: {e} is not a single-qubit Pauli")
    for q, (bx, bz) in enumerate(zip(e.x_bits, e.z_bits)):
        if bx or bz:
            return (q, {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[(bx, bz)])


def make_error_set(code, errors):
    """Validate ``errors`` (PauliStrings or text) as a detectable error set."""
    paulis = [PauliString.from_label(e) if isinstance(e, str) else e for e in errors]
    for e in paulis:
        if e.n_qubits != code.n_physical:
            raise CodeValidationError(f"error set: {e} acts on {e.n_qubits} qubits")
        if not e.is_hermitian or e.phase != 0:
            raise CodeValidationError(f"error set: {e} must have phase +1")
        if not is_detectable(code, e):
            raise CodeValidationError(f"error set: {e} is not detectable")
    return ErrorSet(tuple(p.unsigned() for p in paulis))


def single_qubit_errors(code, axes="XYZ", detectable_only=True):
    """All single-qubit Paulis on the given axes, qubit-major order.

    With ``detectable_only`` undetectable ones are dropped; otherwise they
    raise :class:`CodeValidationError`.
    """
    out = []
    for q in range(code.n_physical):
        for axis in _AXES:
            if axis not in axes.upper():
                continue
            e = PauliString.single(code.n_physical, q, axis)
            if detectable_only and not is_detectable(code, e):
                continue
            out.append(e)
    return make_error_set(code, out)


# ------------------------------------------------------------- projectors

def _check_dense(code, limit):
    if code.n_physical > limit:
        raise CapacityError(f"{code.n_physical} qubits exceeds dense limit {limit}")


def sector_projector(code, syndrome_bits, limit=DENSE_LIMIT):
    """Projector onto the joint eigenspace with ``S_m = (-1)**syndrome_bits[m]``."""
    _check_dense(code, limit)
    dim = 1 << code.n_physical
    proj = np.eye(dim, dtype=np.complex128)
    for g, bit in zip(code.generators, syndrome_bits):
        sign = -1.0 if bit else 1.0
        proj = proj @ (0.5 * (np.eye(dim) + sign * to_dense(g)))
    return proj


def sector_projectors(code, limit=DENSE_LIMIT):
    """All ``2**N_g`` syndrome-sector projectors, indexed by packed syndrome."""
    n_g = code.n_generators
    return [
        sector_projector(code, [(k >> m) & 1 for m in range(n_g)], limit)
        for k in range(1 << n_g)
    ]


def codespace_projector(code, limit=DENSE_LIMIT):
    """``P = prod_m (I + S_m)/2``."""
    return sector_projector(code, [0] * code.n_generators, limit)


def one_error_projector(code, errs, limit=DENSE_LIMIT, tol=1e-10):
    """Projector onto ``span{E_j v : v in codespace, E_j in errs}``."""
    _check_dense(code, limit)
    dim = 1 << code.n_physical
    if len(errs) == 0:
        return np.zeros((dim, dim), dtype=np.complex128)
    proj = codespace_projector(code, limit)
    cols = np.hstack([to_dense(e, limit) @ proj for e in errs])
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    basis = u[:, s > tol * max(1.0, s[0])]
    return basis @ basis.conj().T


def codespace_basis(code, limit=DENSE_LIMIT, tol=1e-10):
    """Orthonormal columns spanning the codespace."""
    vals, vecs = np.linalg.eigh(codespace_projector(code, limit))
    return vecs[:, vals > 0.5]
