import math

import numpy as np
import pytest
from scipy import integrate, linalg

from encaqc.codes import single_qubit_errors, syndrome_index
from encaqc.control import (
    DDProtocol,
    EGPProtocol,
    NoControl,
    WeightFunction,
    control_unitary,
    dd_parity,
    dd_parity_array,
    egp_from_dd,
    egp_toggled_error,
    egp_toggled_error_left,
    matched_egp_alpha,
    modulation,
    modulation_function,
    penalty_sector_signs,
    toggled_error,
    udd_pulse_times,
    uniform_pulse_times,
)
from encaqc.errors import CodeValidationError, DomainError
from encaqc.pauli import parse_pauli, to_dense

GRID = np.linspace(0.0, 5.0, 50)


def _egp_unitary_oracle(protocol, t):
    gen = sum(float(w.accumulated(t)) * to_dense(p) for p, w in zip(protocol.penalty, protocol.weights))
    return linalg.expm(1j * gen)


def _dd_unitary_oracle(protocol, code, t):
    u = np.eye(1 << code.n_physical, dtype=complex)
    for tk, n in zip(protocol.pulse_times, protocol.ordering):
        if tk < t:
            u = to_dense(code.generators[n]) @ u
    return u


@pytest.mark.parametrize("weights", ["constant", "table", "udd", "full_group"])
def test_egp_toggling_identity(c422, weights):
    if weights == "constant":
        proto = EGPProtocol.constant(c422, 0.7)
    elif weights == "full_group":
        proto = EGPProtocol.constant(c422, 0.4, "full_group")
    elif weights == "table":
        w = WeightFunction.table([0, 2, 5], [0.1, 1.3, 0.4])
        proto = EGPProtocol.from_weights(c422, [w, WeightFunction.constant(0.2)])
    else:
        proto = EGPProtocol.from_weights(c422, [WeightFunction.udd(5.0, 3)] * 2)
    for e in single_qubit_errors(c422):
        E = to_dense(e)
        for t in GRID:
            u = _egp_unitary_oracle(proto, t)
            lhs = u.conj().T @ E @ u
            np.testing.assert_allclose(egp_toggled_error(proto, c422, e, t), lhs, atol=1e-10)
            np.testing.assert_allclose(egp_toggled_error_left(proto, c422, e, t), lhs, atol=1e-10)
            np.testing.assert_allclose(control_unitary(proto, c422, t), u, atol=1e-10)


def test_dd_toggling_identity(c422):
    proto = DDProtocol.build(c422, uniform_pulse_times(5.0, 13), ordering=[0, 1, 1])
    for e in single_qubit_errors(c422):
        E = to_dense(e)
        p_arr = dd_parity_array(proto, c422, e, GRID)
        for k, t in enumerate(GRID):
            u = _dd_unitary_oracle(proto, c422, t)
            lhs = u.conj().T @ E @ u
            p = dd_parity(proto, c422, e, t)
            assert p == p_arr[k]
            np.testing.assert_allclose(lhs, (-1.0) ** p * E, atol=1e-12)
            np.testing.assert_allclose(toggled_error(proto, c422, e, t), lhs, atol=1e-12)


def test_dd_pulse_is_left_continuous(c422):
    proto = DDProtocol.build(c422, [1.0], ordering=[1])
    e = parse_pauli("XIII")
    assert dd_parity(proto, c422, e, 1.0) == 0
    assert dd_parity(proto, c422, e, 1.0 + 1e-12) == 1


def test_dd_equals_egp_impulses(c422):
    dd = DDProtocol.build(c422, uniform_pulse_times(5.0, 11))
    egp = egp_from_dd(dd, c422)
    for e in single_qubit_errors(c422):
        m_dd, m_egp = modulation_function(dd, c422, e), modulation_function(egp, c422, e)
        for t in (0.7, 2.3, 5.0):
            tau = np.linspace(0, t, 41)
            for a, b in zip([0.0, *m_dd.discontinuities(t)], [*m_dd.discontinuities(t), t]):
                ref = t - 0.5 * (a + b)
                mid = np.linspace(a, b, 5)[1:-1]
                np.testing.assert_allclose(m_dd(t, mid, ref), m_egp(t, mid, ref), atol=1e-12)
            np.testing.assert_allclose(m_dd(t, tau), m_egp(t, tau), atol=1e-12)
            np.testing.assert_allclose(toggled_error(dd, c422, e, t), toggled_error(egp, c422, e, t), atol=1e-12)


def test_modulation_forms(c422):
    proto = EGPProtocol.constant(c422, 0.9)
    for e in single_qubit_errors(c422):
        w = sum(not np.allclose(to_dense(g) @ to_dense(e), to_dense(e) @ to_dense(g)) for g in c422.generators)
        tau = np.linspace(0, 2.0, 9)
        np.testing.assert_allclose(modulation(proto, c422, e, 2.0, tau), np.exp(2j * 0.9 * tau * w), atol=1e-14)
        np.testing.assert_allclose(modulation(NoControl(), c422, e, 2.0, tau), 1.0)
    with pytest.raises(DomainError):
        modulation(proto, c422, parse_pauli("XIII"), 1.0, 1.5)
    with pytest.raises(DomainError):
        modulation(proto, c422, parse_pauli("XIII"), 1.0, -0.1)


def test_general_egp_modulation_matches_quadrature(c422):
    w = WeightFunction.table([0, 1, 3], [0.2, 1.5, 0.5])
    proto = EGPProtocol.from_weights(c422, [w, w])
    e = parse_pauli("YIII")  # anticommutes with both generators
    t = 2.5
    for tau in (0.3, 1.7, 2.5):
        chi = integrate.quad(lambda s: float(w.smooth_rate(s)), t - tau, t)[0]
        assert modulation(proto, c422, e, t, tau) == pytest.approx(np.exp(2j * 2 * chi), abs=1e-10)


def test_sector_modulation_conjugates(c422):
    proto = EGPProtocol.constant(c422, 0.6, "full_group")
    signs = penalty_sector_signs(proto, c422)
    assert np.all(signs[0] == 1)
    for e in single_qubit_errors(c422):
        s = syndrome_index(c422, e)
        back = modulation_function(proto, c422, e, signs[s])
        fwd = modulation_function(proto, c422, e)
        tau = np.linspace(0, 1, 7)
        np.testing.assert_allclose(back(1.0, tau), np.conj(fwd(1.0, tau)), atol=1e-14)


def test_weight_integrals():
    table = WeightFunction.table([0, 1, 4], [2.0, 0.5, 1.0])
    for t in (0.3, 1.0, 2.5, 4.0, 6.0):
        ref = integrate.quad(lambda s: float(table.smooth_rate(s)), 0, t, points=[1, 4], limit=200)[0]
        assert float(table.smooth_integral(t)) == pytest.approx(ref, abs=1e-10)
    udd = WeightFunction.udd(3.0, 2)
    for t in (0.5, 1.5, 2.9):
        ref = integrate.quad(lambda s: float(udd.smooth_rate(s)), 0, t, limit=200)[0]
        assert float(udd.smooth_integral(t)) == pytest.approx(ref, rel=1e-8)
    imp = WeightFunction.pulses([1.0, 2.0])
    assert imp.accumulated(1.0) == 0.0
    assert imp.accumulated(1.5) == pytest.approx(math.pi / 2)
    assert imp.accumulated(1.5, ref=2.5) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        WeightFunction.constant(-1.0)
    with pytest.raises(ValueError):
        WeightFunction.table([0, 1], [1.0, -0.5])


def test_pulse_schedules():
    assert udd_pulse_times(1.0, 2) == pytest.approx([0.5, math.sqrt(3) / 2])
    times = udd_pulse_times(10.0, 7)
    assert all(0 <= a < b <= 10 for a, b in zip(times, times[1:]))
    assert uniform_pulse_times(4.0, 4) == pytest.approx([0.5, 1.5, 2.5, 3.5])
    assert matched_egp_alpha(0.25, 2) * 2 * 2 == pytest.approx(math.pi / 0.25)


def test_protocol_validation(c422):
    with pytest.raises(CodeValidationError, match="not an element of the stabilizer group"):
        EGPProtocol.constant(c422, 1.0, ["XXII"])
    with pytest.raises(CodeValidationError):
        DDProtocol.build(c422, [1.0], ordering=[2])
    with pytest.raises(ValueError):
        DDProtocol((0, 1), (2.0, 1.0))
    full = EGPProtocol.constant(c422, 1.0, "full_group")
    assert [str(p) for p in full.penalty] == ["XXXX", "ZZZZ", "YYYY"]
