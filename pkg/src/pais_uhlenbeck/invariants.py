"""Quadratic integrals of motion, the beta-Hamiltonian, and the extra integral
available when the two oscillatory frequencies are commensurate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regime import (
    JetState,
    Parameters,
    Regime,
    UnsupportedRegime,
    as_vector,
    classify_regime,
    companion_matrix,
    fit_linear_coefficients,
    mode_frequencies,
)

RATIO_RTOL = 1e-9
PHASE_AMPLITUDE_TOL = 1e-13


@dataclass(frozen=True)
class IntegralPair:
    """Two commuting quadratic integrals.

    (i): J1, J2.  (iii), (iv): I1, I2.  (v): real and imaginary part of J1.
    """

    k1: float
    k2: float


@dataclass(frozen=True)
class RationalRatio:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1 or self.l < 1 or math.gcd(self.k, self.l) != 1:
            raise ValueError(f"need coprime positive integers, got {self.k}/{self.l}")


def wrap_beta(beta: float) -> float:
    """Map an angle into [-pi, pi); values already there pass through untouched."""
    beta = float(beta)
    if -math.pi <= beta < math.pi:
        return beta
    w = (beta + math.pi) % (2.0 * math.pi) - math.pi
    return -math.pi if w >= math.pi else w


def _require(params: Parameters, *allowed: Regime) -> Regime:
    regime = classify_regime(params)
    if regime not in allowed:
        raise UnsupportedRegime(
            f"operation needs regime {'/'.join(r.roman for r in allowed)}, got ({regime.roman})"
        )
    return regime


def _pair_forms(m: float, w1, w2):
    """Coefficient matrices of J1, J2 built from a (possibly complex) root pair."""
    norm = m / (math.sqrt(2.0) * (w1 * w1 - w2 * w2))

    def form(wa, wb):
        vel = np.array([0.0, wa, 0.0, 1.0])  # q''' + wa q'
        pos = np.array([wa, 0.0, 1.0, 0.0])  # q'' + wa q
        return norm * (np.outer(vel, vel) + wb * np.outer(pos, pos))

    return form(w1, w2), form(w2, w1)


def _degenerate_forms(m: float, w2: float):
    vel = np.array([0.0, 2.0 * w2, 0.0, 1.0])
    pos = np.array([2.0 * w2, 0.0, 1.0, 0.0])
    i1 = (m / w2**2) * (np.outer(vel, vel) + 2.0 * w2 * np.outer(pos, pos))
    i2 = np.zeros((4, 4))
    i2[1, 3] = i2[3, 1] = 1.0
    i2[1, 1] = 4.0 * w2
    i2[2, 2] = -1.0
    i2[0, 0] = 4.0 * w2**2
    return i1, (m / w2) * i2


def integral_forms(params: Parameters) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric matrices A1, A2 with k_i = x^T A_i x on the jet x."""
    regime = _require(params, Regime.OSCILLATORY, Regime.HYPERBOLIC, Regime.DEGENERATE, Regime.COMPLEX)
    md = mode_frequencies(params)
    if regime is Regime.DEGENERATE:
        return _degenerate_forms(params.m, params.omega_sq)
    a1, a2 = _pair_forms(params.m, *md.pair)
    if regime is Regime.COMPLEX:
        return a1.real.copy(), a1.imag.copy()
    return a1, a2


def hamiltonian_form(params: Parameters, beta: float) -> np.ndarray:
    """Coefficient matrix of H(beta) on jet space (no admissibility check)."""
    a1, a2 = integral_forms(params)
    beta = wrap_beta(beta)
    c, s = math.cos(beta), math.sin(beta)
    if classify_regime(params) is Regime.COMPLEX:
        # H = i(e^{ib} J1 + e^{-ib} J2) = -2 Im(e^{ib} J1)
        return -2.0 * (s * a1 + c * a2)
    return c * a1 + s * a2


def integrals_of_motion(params: Parameters, jet) -> IntegralPair | np.ndarray:
    """Evaluate the regime's integral pair.

    A :class:`JetState` gives an :class:`IntegralPair`; an ``(..., 4)`` array
    gives an ``(..., 2)`` array.
    """
    regime = _require(params, Regime.OSCILLATORY, Regime.HYPERBOLIC, Regime.DEGENERATE, Regime.COMPLEX)
    x = as_vector(jet)
    q, dq, d2q, d3q = np.moveaxis(x, -1, 0)
    m = params.m
    if regime is Regime.DEGENERATE:
        w2 = params.omega_sq
        vel = d3q + 2.0 * w2 * dq
        k1 = (m / w2**2) * (vel**2 + 2.0 * w2 * (d2q + 2.0 * w2 * q) ** 2)
        k2 = (m / w2) * (2.0 * vel * dq - d2q**2 + 4.0 * w2**2 * q**2)
    else:
        w1, w2 = mode_frequencies(params).pair
        norm = m / (math.sqrt(2.0) * (w1 * w1 - w2 * w2))
        j1 = norm * ((d3q + w1 * dq) ** 2 + w2 * (d2q + w1 * q) ** 2)
        if regime is Regime.COMPLEX:
            k1, k2 = np.real(j1), np.imag(j1)
        else:
            k1 = j1
            k2 = norm * ((d3q + w2 * dq) ** 2 + w1 * (d2q + w2 * q) ** 2)
    if isinstance(jet, JetState):
        return IntegralPair(float(k1), float(k2))
    return np.stack([k1, k2], axis=-1)


def hamiltonian_value(params: Parameters, beta: float, jet):
    """H(beta) at a jet state (array input evaluates a batch)."""
    from .poisson import sector_of  # admissibility lives with the bracket family

    regime = classify_regime(params)
    beta = wrap_beta(beta)
    sector_of(beta, regime)
    k = integrals_of_motion(params, as_vector(jet))
    c, s = math.cos(beta), math.sin(beta)
    if regime is Regime.COMPLEX:
        h = -2.0 * (s * k[..., 0] + c * k[..., 1])
    else:
        h = c * k[..., 0] + s * k[..., 1]
    return float(h) if np.ndim(h) == 0 else h


def rational_ratio(params: Parameters, max_denominator: int = 50) -> RationalRatio | None:
    """Smallest k/l (l <= max_denominator) matching w1/w2 to RATIO_RTOL, or None."""
    _require(params, Regime.OSCILLATORY)
    md = mode_frequencies(params)
    r = math.sqrt(md.w1_sq / md.w2_sq)
    for l in range(1, int(max_denominator) + 1):
        k = round(r * l)
        if k >= 1 and abs(r - k / l) <= RATIO_RTOL * r:
            return RationalRatio(k, l)
    return None


def mode_phases(params: Parameters, jet) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Instantaneous (amplitude1, phase1, amplitude2, phase2) in regime (i)."""
    _require(params, Regime.OSCILLATORY)
    c = fit_linear_coefficients(params, as_vector(jet))
    a1, b1, a2, b2 = np.moveaxis(c, -1, 0)
    return np.hypot(a1, b1), np.arctan2(-b1, a1), np.hypot(a2, b2), np.arctan2(-b2, a2)


def third_integral(params: Parameters, ratio: RationalRatio, jet):
    """sin(l*phi1 - k*phi2) from the instantaneous mode phases.

    Zero by convention where either mode amplitude is below 1e-13 (phase undefined).
    """
    amp1, ph1, amp2, ph2 = mode_phases(params, jet)
    val = np.sin(ratio.l * ph1 - ratio.k * ph2)
    val = np.where((amp1 < PHASE_AMPLITUDE_TOL) | (amp2 < PHASE_AMPLITUDE_TOL), 0.0, val)
    return float(val) if np.ndim(val) == 0 else val


def noether_operator(params: Parameters, sign: int) -> np.ndarray:
    """Linear map on jets induced by q -> q''' + sign*(w1^2 - w2^2) q'."""
    _require(params, Regime.OSCILLATORY)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    md = mode_frequencies(params)
    a = companion_matrix(params)
    return np.linalg.matrix_power(a, 3) + sign * (md.w1_sq - md.w2_sq) * a


def noether_variation(params: Parameters, jet, sign: int, epsilon: float):
    x = as_vector(jet)
    y = x + epsilon * (x @ noether_operator(params, sign).T)
    return JetState.from_array(y) if isinstance(jet, JetState) else y
