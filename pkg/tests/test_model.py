import logging
import math

import numpy as np
import pytest

from encaqc.codes import codespace_projector, single_qubit_errors
from encaqc.errors import ModelValidationError, UndefinedBoundError
from encaqc.model import (
    AnnealSchedule,
    HamiltonianTermList,
    build_encoded_aqc,
    codespace_ground,
    correction_timescale_bound,
    decompose_against_error,
    landau_zener_model,
)
from encaqc.pauli import parse_pauli, to_dense


def test_encoded_hamiltonian_commutes_with_stabilizers(c422):
    h = landau_zener_model(c422, 10.0)
    for t in np.linspace(0, 10, 7):
        H = h.dense(t)
        np.testing.assert_allclose(H, H.conj().T, atol=1e-14)
        for g in c422.generators:
            S = to_dense(g)
            np.testing.assert_allclose(H @ S, S @ H, atol=1e-12)


def test_linear_schedule_endpoints(c422):
    h = landau_zener_model(c422, 4.0)
    np.testing.assert_allclose(h.dense(0.0), -to_dense(parse_pauli("XXII")), atol=0)
    np.testing.assert_allclose(h.dense(4.0), -to_dense(parse_pauli("ZIZI")), atol=0)


def test_non_logical_term_rejected_by_name(c422):
    sched = AnnealSchedule.linear(1.0, [(1.0, "XIII")], [(1.0, "ZIZI")])
    with pytest.raises(ModelValidationError, match=r"h_initial\[0\] \(XIII\).*generator 1 \(ZZZZ\)"):
        build_encoded_aqc(c422, sched)


def test_tabulated_schedule(c422):
    sched = AnnealSchedule.tabulated(2.0, [0, 0.5, 1], [1, 0.2, 0], [0, 0.7, 1], [(1.0, "XXII")], [(1.0, "ZIZI")])
    h = build_encoded_aqc(c422, sched)
    coefs = [c for c, _ in h.at(0.5)]
    assert coefs == pytest.approx([0.6, 0.35])
    with pytest.raises(ModelValidationError):
        AnnealSchedule.tabulated(1.0, [0, 0, 1], [1, 1, 1], [0, 0, 0], [], [])


@pytest.mark.parametrize("err", ["ZIII", "XIII", "YIII", "IIZI"])
def test_decomposition_against_error(c422, err):
    h = landau_zener_model(c422, 3.0)
    e = to_dense(parse_pauli(err))
    for t in (0.0, 1.1, 3.0):
        plus, minus = decompose_against_error(h, parse_pauli(err), t)
        np.testing.assert_allclose(plus + minus, h.dense(t), atol=1e-14)
        np.testing.assert_allclose(plus @ e - e @ plus, 0, atol=1e-14)
        np.testing.assert_allclose(minus @ e + e @ minus, 0, atol=1e-14)


def test_effective_hamiltonian_is_error_conjugate(c422):
    h = landau_zener_model(c422, 3.0)
    for err in single_qubit_errors(c422):
        E = to_dense(err)
        for t in (0.3, 2.0):
            np.testing.assert_allclose(h.effective(err).dense(t), E @ h.dense(t) @ E, atol=1e-14)


def test_correction_timescale(c422, caplog):
    h = landau_zener_model(c422, 5.0)
    grid = np.linspace(0, 5, 11)
    # Z on qubit 0 anticommutes with XXII only, whose largest weight is 1 at s = 0
    assert correction_timescale_bound(h, [parse_pauli("ZIII")], grid) == pytest.approx(1.0)
    # X on qubit 3 commutes with both XXII and ZIZI
    with caplog.at_level(logging.INFO):
        assert correction_timescale_bound(h, [parse_pauli("IIIX")], grid) == math.inf
    assert "no scrambling" in caplog.text
    with pytest.raises(UndefinedBoundError):
        correction_timescale_bound(h, [], grid)
    with pytest.raises(UndefinedBoundError):
        correction_timescale_bound(h, [parse_pauli("ZIII")], [])


def test_codespace_ground(c422):
    h = landau_zener_model(c422, 5.0)
    energy, proj, vec = codespace_ground(h, c422, 0.0)
    assert energy == pytest.approx(-1.0)
    # logical qubit 1 is idle, so the ground space is two-dimensional
    assert np.trace(proj).real == pytest.approx(2.0)
    P = codespace_projector(c422)
    np.testing.assert_allclose(P @ vec, vec, atol=1e-12)
    np.testing.assert_allclose(h.dense(0.0) @ vec, energy * vec, atol=1e-12)
    again = codespace_ground(h, c422, 0.0)[2]
    np.testing.assert_array_equal(vec, again)


def test_zero_hamiltonian(c422):
    h = HamiltonianTermList.zero(4)
    assert h.is_zero
    np.testing.assert_array_equal(h.dense(1.0), np.zeros((16, 16)))
