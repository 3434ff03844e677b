"""Bath correlation functions and codespace leakage rates.

Two baths: a classical exponentially correlated one, ``C(t) = c exp(-gamma t)``,
and a damped harmonic bath with Ohmic Lorentz-Drude spectral density
``J(w) = 2 E_R gamma w / (w^2 + gamma^2)``, whose correlation function is

    C(t) = 2i E_R gamma / (exp(i beta gamma) - 1) * exp(-gamma t)
           - sum_{k=1}^{K} (4 E_R gamma / beta) nu_k / (gamma^2 - nu_k^2) exp(-nu_k t),

with Matsubara frequencies ``nu_k = 2 pi k / beta``. Units have hbar = 1.

Rates are ``r(t) = 2 Re int_0^t C(tau) m(t, tau) dtau`` (sign ``+``) or the
same with ``conj(m)`` (sign ``-``).
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureError, SingularityError


class TruncationWarning(UserWarning):
    """The Matsubara sum was truncated before its terms became negligible."""


@dataclass(frozen=True)
class ClassicalExponential:
    """``C(t) = c exp(-gamma t)``; ``c`` has units of rate squared."""

    c: float
    gamma: float
    kind: str = "classical"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.c < 0:
            raise ValueError("c must be non-negative")


@dataclass(frozen=True)
class OhmicLorentzDrude:
    """Ohmic bath with Lorentz-Drude cutoff, truncated after ``K`` Matsubara terms."""

    E_R: float
    gamma: float
    beta: float
    K: int = 50
    kind: str = "ohmic"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.K < 0:
            raise ValueError("K must be non-negative")
        if self.E_R < 0:
            raise ValueError("E_R must be non-negative")

    @property
    def matsubara(self):
        return 2.0 * np.pi * np.arange(1, self.K + 1) / self.beta

    def check_resonance(self):
        """Raise :class:`SingularityError` when ``gamma`` hits a Matsubara frequency."""
        x = self.beta * self.gamma / (2.0 * np.pi)
        k = int(round(x))
        if k >= 1 and abs(x - k) <= 1e-12 * max(1.0, x):
            raise SingularityError(
                f"gamma = {self.gamma} coincides with Matsubara frequency nu_{k}", kappa=k
            )

    @property
    def leading_amplitude(self):
        """``2i E_R gamma / (exp(i beta gamma) - 1)``, equal to ``E_R gamma (cot(beta gamma/2) - i)``."""
        self.check_resonance()
        return 2j * self.E_R * self.gamma / (np.exp(1j * self.beta * self.gamma) - 1.0)

    @property
    def matsubara_amplitudes(self):
        self.check_resonance()
        nu = self.matsubara
        return -(4.0 * self.E_R * self.gamma / self.beta) * nu / (self.gamma ** 2 - nu ** 2)


def correlation(bath, t):
    """``C(t)`` for ``t >= 0`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("correlation needs t >= 0")
    if bath.kind == "classical":
        out = bath.c * np.exp(-bath.gamma * t)
        return out if t.ndim else float(out)
    out = bath.leading_amplitude * np.exp(-bath.gamma * t)
    nu = bath.matsubara
    if nu.size:
        out = out + np.exp(-np.multiply.outer(t, nu)) @ bath.matsubara_amplitudes
    return out if t.ndim else complex(out)


def spectral_density(bath, omega):
    """``J(w) = 2 E_R gamma w / (w^2 + gamma^2)``."""
    omega = np.asarray(omega, dtype=float)
    out = 2.0 * bath.E_R * bath.gamma * omega / (omega ** 2 + bath.gamma ** 2)
    return out if omega.ndim else float(out)


def matsubara_tail_ratio(bath, t):
    """``|last Matsubara term| / |leading term|`` at time ``t``."""
    if bath.kind != "ohmic" or bath.K == 0:
        return 0.0
    last = abs(bath.matsubara_amplitudes[-1]) * math.exp(-bath.matsubara[-1] * t)
    lead = abs(bath.leading_amplitude) * math.exp(-bath.gamma * t)
    return last / lead


def check_truncation(bath, t, tol=1e-12):
    """Warn (never raise) when the truncated Matsubara tail is not negligible at ``t``."""
    ratio = matsubara_tail_ratio(bath, t)
    if ratio >= tol:
        warnings.warn(
            f"Matsubara truncation K={bath.K}: last term is {ratio:.3g} of the leading term "
            f"at t={t:.4g}", TruncationWarning, stacklevel=2,
        )
    return ratio


def default_tau_max(bath):
    """Memory cutoff: 10 correlation times of the slowest decaying component."""
    if bath.kind == "ohmic" and bath.K > 0:
        return 10.0 / min(bath.gamma, bath.matsubara[0])
    return 10.0 / bath.gamma


def steady_rate(bath, mu):
    """``t -> infinity`` classical rate ``2 c gamma / (mu^2 + gamma^2)``."""
    return 2.0 * bath.c * bath.gamma / (np.asarray(mu, dtype=float) ** 2 + bath.gamma ** 2)


# --------------------------------------------------------------- rates

def rate_closed_form(bath, mu, t, sign="-"):
    """Classical-bath rate for modulation ``exp(i mu tau)``.

    ``2c [gamma (1 - e^{-gamma t} cos mu t) + mu e^{-gamma t} sin mu t] / (mu^2 + gamma^2)``;
    the same for both signs because ``C`` is real.
    """
    if bath.kind != "classical":
        raise TypeError("rate_closed_form needs a ClassicalExponential bath")
    _check_sign(sign)
    t = np.asarray(t, dtype=float)
    g = bath.gamma
    decay = np.exp(-g * t)
    num = g * (1.0 - decay * np.cos(mu * t)) + mu * decay * np.sin(mu * t)
    out = 2.0 * bath.c * num / (mu * mu + g * g)
    return out if t.ndim else float(out)


def ohmic_rate_constants(bath, mu, sign="-"):
    """Constants of the closed-form Ohmic rate.

    The rate is written as

        a_0 [b_0 - gamma e^{-gamma t} cos(psi) + s mu e^{-gamma t} sin(psi)] / (mu^2 + gamma^2)
        - sum_k a_k [b_k - nu_k e^{-nu_k t} cos(mu t) + mu e^{-nu_k t} sin(mu t)] / (mu^2 + nu_k^2)

    with ``s = +1`` for sign ``+`` and ``-1`` for sign ``-``, and
    ``psi = s mu t - beta gamma / 2``. Matching against the correlation
    function term by term fixes ``a_0 = 2 E_R gamma / sin(beta gamma / 2)``,
    ``b_0 = gamma cos(beta gamma / 2) + s mu sin(beta gamma / 2)``,
    ``a_k = (8 E_R gamma / beta) nu_k / (gamma^2 - nu_k^2)`` and ``b_k = nu_k``.
    """
    s = _check_sign(sign)
    bath.check_resonance()
    half = 0.5 * bath.beta * bath.gamma
    if abs(math.sin(half)) < 1e-300:
        raise SingularityError("sin(beta gamma / 2) vanishes", kappa=int(round(half / math.pi)))
    nu = bath.matsubara
    return {
        "a0": 2.0 * bath.E_R * bath.gamma / math.sin(half),
        "b0": bath.gamma * math.cos(half) + s * mu * math.sin(half),
        "a": (8.0 * bath.E_R * bath.gamma / bath.beta) * nu / (bath.gamma ** 2 - nu ** 2),
        "b": nu.copy(),
    }


def rate_ohmic_closed_form(bath, mu, t, sign="-"):
    """Closed-form Ohmic leakage rate for modulation ``exp(i mu tau)``."""
    if bath.kind != "ohmic":
        raise TypeError("rate_ohmic_closed_form needs an OhmicLorentzDrude bath")
    s = _check_sign(sign)
    k = ohmic_rate_constants(bath, mu, sign)
    t = np.asarray(t, dtype=float)
    g = bath.gamma
    psi = s * mu * t - 0.5 * bath.beta * g
    decay = np.exp(-g * t)
    lead = k["a0"] * (k["b0"] - g * decay * np.cos(psi) + s * mu * decay * np.sin(psi)) / (mu * mu + g * g)
    total = lead
    if bath.K:
        nu = k["b"]
        tt = t[..., None]
        dk = np.exp(-nu * tt)
        bracket = k["b"] - nu * dk * np.cos(mu * tt) + mu * dk * np.sin(mu * tt)
        total = lead - np.sum(k["a"] * bracket / (mu * mu + nu * nu), axis=-1)
    return total if t.ndim else float(total)


def _check_sign(sign):
    if sign in ("+", 1, "plus"):
        return 1
    if sign in ("-", -1, "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def rate_quadrature(bath, m, t, sign="-", epsabs=1e-13, epsrel=1e-12, limit=400, target=1e-10):
    """``2 Re int_0^t C(tau) m(t, tau) dtau`` (or with ``conj(m)`` for sign ``-``).

    ``m`` is a :class:`~encaqc.control.ModulationFunction` or any callable
    ``m(t, tau)``; an optional ``m.discontinuities(t)`` splits the
    integration range. Each segment is integrated by adaptive
    Gauss-Kronrod quadrature and the modulation's piecewise-constant part is
    pinned to the segment midpoint.
    """
    s = _check_sign(sign)
    t = float(t)
    if t < 0:
        raise ValueError("rate needs t >= 0")
    if t == 0:
        return 0.0
    cuts = list(m.discontinuities(t)) if hasattr(m, "discontinuities") else []
    edges = [0.0] + [c for c in cuts if 0.0 < c < t] + [t]
    pinned = hasattr(m, "discontinuities")
    total = 0.0 + 0.0j
    err_total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        ref = t - 0.5 * (a + b)

        def integrand(tau, ref=ref):
            mv = m(t, tau, ref) if pinned else m(t, tau)
            if s < 0:
                mv = np.conj(mv)
            return correlation(bath, tau) * mv

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err, *_ = integrate.quad(
                integrand, a, b, complex_func=True, epsabs=epsabs / len(edges),
                epsrel=epsrel, limit=limit, full_output=1,
            )
        total += val
        err_total += abs(err)
    value = 2.0 * total.real
    if 2.0 * err_total > target:
        raise QuadratureError(
            f"rate quadrature error estimate {2 * err_total:.3g} exceeds {target:.1g}",
            estimate=value, error=2.0 * err_total,
        )
    return float(value)


def exponential_modulation(mu):
    """Modulation ``m(t, tau) = exp(i mu tau)`` (constant-weight EGP)."""

    def m(t, tau):
        return np.exp(1j * mu * np.asarray(tau))

    return m
