import numpy as np
import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from encaqc.codes import (
    PRESET_NAMES,
    anticommuting_weight,
    code_from_mapping,
    codespace_basis,
    codespace_projector,
    dump_code,
    full_group,
    is_detectable,
    load_code_file,
    make_code,
    make_error_set,
    one_error_projector,
    preset,
    sector_projectors,
    single_qubit_errors,
    syndrome,
    verify_half_group_theorem,
)
from encaqc.errors import CodeValidationError, PreconditionError
from encaqc.pauli import PauliString, multiply, parse_pauli, to_dense


def _dense_anticommutes(a, b):
    da, db = to_dense(a), to_dense(b)
    return np.allclose(da @ db, -db @ da)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_validate_and_round_trip(name, tmp_path):
    code = preset(name)
    path = tmp_path / "code.yaml"
    path.write_text(yaml.safe_dump(dump_code(code)))
    again = load_code_file(path)
    assert again.generators == code.generators
    assert again.logical_x == code.logical_x and again.logical_z == code.logical_z


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_half_group_theorem_dense_oracle(name):
    code = preset(name)
    group = full_group(code)
    assert len(group) == 2 ** code.n_generators
    for e in single_qubit_errors(code):
        n_anti = sum(_dense_anticommutes(g, e) for g in group)
        assert n_anti == 2 ** (code.n_generators - 1)
        assert verify_half_group_theorem(code, e)


def test_full_group_elements_are_exact_products(c422):
    group = full_group(c422)
    assert [str(g) for g in group] == ["IIII", "XXXX", "ZZZZ", "YYYY"]
    for g in group:
        np.testing.assert_allclose(to_dense(g) @ codespace_projector(c422), codespace_projector(c422), atol=1e-12)


def test_undetectable_error_precondition(bitflip3):
    with pytest.raises(PreconditionError):
        verify_half_group_theorem(bitflip3, parse_pauli("ZII"))


@pytest.mark.parametrize("name,expected", [("bitflip3", 6), ("c422", 12), ("c513", 15)])
def test_default_error_sets(name, expected):
    code = preset(name)
    errs = single_qubit_errors(code)
    assert len(errs) == expected
    assert all(is_detectable(code, e) for e in errs)


def test_full_group_weight(c422, c513):
    for code in (c422, c513):
        expect = 2 ** (code.n_physical - code.n_logical - 1)
        assert {anticommuting_weight(code, e, use_full_group=True) for e in single_qubit_errors(code)} == {expect}


@st.composite
def error_pairs(draw):
    code = preset(draw(st.sampled_from(PRESET_NAMES)))
    n = code.n_physical
    a = PauliString(draw(st.integers(0, 2 ** n - 1)), draw(st.integers(0, 2 ** n - 1)), 0, n)
    b = PauliString(draw(st.integers(0, 2 ** n - 1)), draw(st.integers(0, 2 ** n - 1)), 0, n)
    return code, a, b


@given(error_pairs())
def test_syndrome_is_additive(args):
    code, a, b = args
    np.testing.assert_array_equal(syndrome(code, multiply(a, b)), syndrome(code, a) ^ syndrome(code, b))


def test_projectors(c422, bitflip3, c513):
    P = codespace_projector(c422)
    assert np.isclose(np.trace(P).real, 4)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    sectors = sector_projectors(c422)
    np.testing.assert_allclose(sum(sectors), np.eye(16), atol=1e-12)
    Q1 = one_error_projector(c422, single_qubit_errors(c422))
    assert np.linalg.matrix_rank(Q1, tol=1e-8) == 12
    np.testing.assert_allclose(P @ Q1, 0, atol=1e-12)
    Qb = one_error_projector(bitflip3, single_qubit_errors(bitflip3))
    assert np.linalg.matrix_rank(Qb, tol=1e-8) == 6
    assert codespace_basis(c513).shape == (32, 2)


@pytest.mark.parametrize("gens,lx,lz,needle", [
    (["XXXX", "ZIII"], ["XXII"], ["ZIZI"], "generators 0 (XXXX) and 1 (ZIII) do not commute"),
    (["XXXX", "XXXX"], ["XXII", "XIXI"], ["ZIZI", "ZZII"], "independence"),
    (["XXXX", "ZZZZ"], ["XIII", "XIXI"], ["ZIZI", "ZZII"], "logical commutation"),
    (["XXXX", "ZZZZ"], ["XXII", "XIXI"], ["ZZII", "ZIZI"], "logical algebra"),
    (["XXXX", "-ZZZZ"], ["XXII", "XIXI"], ["ZIZI", "ZZII"], "generator phase"),
    (["XXXX"], ["XXII", "XIXI"], ["ZIZI", "ZZII"], "generator count"),
    (["ZZI", "IZZ"], ["XXX"], ["ZIII"], "qubit count"),
])
def test_code_validation_names_invariant(gens, lx, lz, needle):
    with pytest.raises(CodeValidationError, match=needle.replace("(", r"\(").replace(")", r"\)")):
        make_code(gens, lx, lz)


def test_code_file_rejects_unknown_keys():
    with pytest.raises(CodeValidationError):
        code_from_mapping({"generators": ["ZZ"], "stabilisers": []})


def test_error_set_validation(bitflip3, c422):
    with pytest.raises(CodeValidationError, match="not detectable"):
        make_error_set(bitflip3, ["ZII"])
    with pytest.raises(CodeValidationError, match="phase"):
        make_error_set(c422, ["-XIII"])
    with pytest.raises(CodeValidationError):
        make_error_set(c422, ["XXII"])
    errs = make_error_set(c422, ["XIII", "IIIZ"])
    assert errs.names() == ["X0", "Z3"]
    assert len(make_error_set(c422, [])) == 0
