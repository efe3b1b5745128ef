"""Linear Darboux coordinates for every regime and sector.

Canonical coordinates are ordered (q1, p1, q2, p2).  The maps for the
sectors (0, pi/2) and (-pi/2, 0) in regimes (i)/(iii), (0, pi) in regime
(iv) and the single complex-regime sector are written out explicitly; the
remaining sectors follow from beta -> beta -/+ pi, which flips the sign of
both the bracket and H, combined with the swap q_i <-> p_i.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .invariants import wrap_beta
from .poisson import HALF_PI, Sector, bracket_matrix, sector_of
from .regime import JetState, Parameters, Regime, UnsupportedRegime, as_vector, classify_regime, mode_frequencies

STANDARD_FORM = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)
_SWAP = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)


@dataclass(frozen=True)
class CanonicalState:
    q1: float
    p1: float
    q2: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.p1, self.q2, self.p2])

    @classmethod
    def from_array(cls, x) -> "CanonicalState":
        return cls(*(float(v) for v in np.asarray(x, dtype=float).reshape(4)))


@dataclass(frozen=True)
class DarbouxMap:
    forward: np.ndarray  # jet -> canonical
    inverse: np.ndarray  # canonical -> jet
    delta: complex | float
    sector: Sector
    hamiltonian_form: np.ndarray  # H = z^T A z on canonical z
    swapped: bool = False  # obtained from the mirror sector via q <-> p

    @property
    def q_row(self) -> np.ndarray:
        """Coefficients of q in terms of (q1, p1, q2, p2)."""
        return self.inverse[0]


def _pair_rows(w: float, scale: float, mom_scale: float) -> tuple[np.ndarray, np.ndarray]:
    return scale * np.array([w, 0.0, 1.0, 0.0]), mom_scale * np.array([0.0, w, 0.0, 1.0])


def _oscillatory_map(params: Parameters, beta: float):
    """Printed maps for sectors (0, pi/2) and (-pi/2, 0); valid for (i) and (iii)."""
    m = params.m
    w1, w2 = mode_frequencies(params).pair
    delta = math.sqrt(math.sqrt(2.0) * params.lam / (w1 - w2))
    c, s = math.cos(beta), math.sin(beta)
    q1, p1 = _pair_rows(w1, delta * math.sqrt(c), m * delta * math.sqrt(c))
    if s > 0:
        q2, p2 = _pair_rows(w2, delta * math.sqrt(s), m * delta * math.sqrt(s))
        sign = 1.0
    else:
        q2, p2 = _pair_rows(w2, delta * math.sqrt(-s), -m * delta * math.sqrt(-s))
        sign = -1.0
    form = np.diag([m * w2 / 2.0, 1.0 / (2.0 * m), sign * m * w1 / 2.0, sign / (2.0 * m)])
    return np.array([q1, p1, q2, p2]), form, delta


def _degenerate_map(params: Parameters, beta: float):
    """Printed map for sector (0, pi); cos*(1 + tan) is written as cos + sin."""
    m, w2 = params.m, params.omega_sq
    c, s = math.cos(beta), math.sin(beta)
    rs = math.sqrt(s)
    q1 = (rs / w2) * np.array([2.0 * w2, 0.0, 1.0, 0.0])
    q2 = (1.0 / (rs * w2)) * np.array([2.0 * (c + s) * w2, 0.0, c, 0.0])
    p1 = (m / (rs * w2)) * np.array([0.0, 2.0 * (c + s) * w2, 0.0, c])
    p2 = (m * rs / w2) * np.array([0.0, 2.0 * w2, 0.0, 1.0])
    form = np.zeros((4, 4))
    form[1, 3] = form[3, 1] = 1.0 / (2.0 * m)  # p1 p2 / m
    form[0, 2] = form[2, 0] = m * w2  # 2 m w^2 q1 q2
    form[0, 0] = -m * w2  # -m w^2 q1^2
    return np.array([q1, p1, q2, p2]), form, 1.0 / w2


def complex_epsilon(params: Parameters, beta: float) -> complex:
    """Principal root of eps^2 = -i m gamma (w0^2 - conj w0^2)^2 e^{-i beta}."""
    z = mode_frequencies(params).w0_sq
    gamma = 1.0 / (math.sqrt(2.0) * params.m * params.lam * (z - z.conjugate()))
    eps = cmath.sqrt(-1j * params.m * gamma * (z - z.conjugate()) ** 2 * cmath.exp(-1j * beta))
    if eps.real < 0 or (eps.real == 0 and eps.imag < 0):
        eps = -eps
    return eps


def _complex_map(params: Parameters, beta: float):
    m = params.m
    z = mode_frequencies(params).w0_sq
    eps = complex_epsilon(params, beta)
    q1 = np.array([z, 0.0, 1.0, 0.0]) / eps
    p1 = m * np.array([0.0, z, 0.0, 1.0]) / eps
    r2 = math.sqrt(2.0)
    # q1 = (Q1 + iQ2)/sqrt2, p1 = (P1 - iP2)/sqrt2 and q2, p2 are the conjugates
    rows = np.array([r2 * q1.real, r2 * p1.real, r2 * q1.imag, -r2 * p1.imag])
    u, v = z.real, z.imag
    form = np.zeros((4, 4))
    form[0, 0] = m * u / 2.0
    form[1, 1] = 1.0 / (2.0 * m)
    form[2, 2] = -m * u / 2.0
    form[3, 3] = -1.0 / (2.0 * m)
    form[0, 2] = form[2, 0] = m * v / 2.0  # (i m/2)(conj z - z) Q1 Q2 = m v Q1 Q2
    return rows, form, eps


def darboux_map(params: Parameters, beta: float) -> DarbouxMap:
    regime = classify_regime(params)
    if regime is Regime.HARMONIC:
        raise UnsupportedRegime("the harmonic regime carries no beta family")
    beta = wrap_beta(beta)
    sector = sector_of(beta, regime)
    swapped = False
    if regime in (Regime.OSCILLATORY, Regime.HYPERBOLIC):
        if abs(beta) < HALF_PI:
            fwd, form, delta = _oscillatory_map(params, beta)
        else:
            mirror = beta - math.pi if beta > 0 else beta + math.pi
            fwd, form, delta = _oscillatory_map(params, mirror)
            swapped = True
    elif regime is Regime.DEGENERATE:
        if beta > 0:
            fwd, form, delta = _degenerate_map(params, beta)
        else:
            fwd, form, delta = _degenerate_map(params, beta + math.pi)
            swapped = True
    else:
        fwd, form, delta = _complex_map(params, beta)
    if swapped:
        fwd = _SWAP @ fwd
        form = -(_SWAP @ form @ _SWAP)
    return DarbouxMap(fwd, np.linalg.inv(fwd), delta, sector, form, swapped)


def to_canonical(params: Parameters, beta: float, jet):
    x = as_vector(jet)
    z = x @ darboux_map(params, beta).forward.T
    return CanonicalState.from_array(z) if isinstance(jet, JetState) else z


def from_canonical(params: Parameters, beta: float, canon):
    z = as_vector(canon)
    x = z @ darboux_map(params, beta).inverse.T
    return JetState.from_array(x) if isinstance(canon, CanonicalState) else x


def canonical_hamiltonian(params: Parameters, beta: float, canon):
    z = as_vector(canon)
    form = darboux_map(params, beta).hamiltonian_form
    h = np.einsum("...i,ij,...j->...", z, form, z)
    return float(h) if np.ndim(h) == 0 else h


def printed_q_row(params: Parameters, beta: float) -> np.ndarray:
    """q as a combination of (q1, p1, q2, p2) from the closed-form reconstruction lines.

    Only the explicitly written sectors are covered; this serves as an
    independent check on the numerically inverted map.  In the hyperbolic
    regime the written line carries the opposite overall sign to the map it
    accompanies; the row is returned as written.
    """
    regime = classify_regime(params)
    beta = wrap_beta(beta)
    c, s = math.cos(beta), math.sin(beta)
    if regime in (Regime.OSCILLATORY, Regime.HYPERBOLIC) and 0 < abs(beta) < HALF_PI:
        w1, w2 = mode_frequencies(params).pair
        pref = 1.0 / math.sqrt(math.sqrt(2.0) * params.lam * (w1 - w2))
        return pref * np.array([1.0 / math.sqrt(c), 0.0, -1.0 / math.sqrt(abs(s)), 0.0])
    if regime is Regime.DEGENERATE and 0 < beta < math.pi:
        rs = math.sqrt(s)
        return np.array([-c / (2.0 * rs * s), 0.0, 1.0 / (2.0 * rs), 0.0])
    if regime is Regime.COMPLEX:
        z = mode_frequencies(params).w0_sq
        eps = complex_epsilon(params, beta)
        # q = (eps q1 - conj(eps) q2)/(z - conj z) with q1 = (Q1 + iQ2)/sqrt2
        denom = (z - z.conjugate()) * math.sqrt(2.0)
        return np.array([((eps - eps.conjugate()) / denom).real, 0.0,
                         (1j * (eps + eps.conjugate()) / denom).real, 0.0])
    raise UnsupportedRegime(f"no printed reconstruction for beta={beta} in regime ({regime.roman})")


@dataclass(frozen=True)
class CanonicityReport:
    transformed: np.ndarray  # M Pi M^T
    residual: float
    ok: bool
    scale: float  # max_ij sum_kl |M_ik Pi_kl M_jl|, the size of the cancelling terms

    @property
    def relative(self) -> float:
        return self.residual / self.scale


def exact_congruence(m: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """M Pi M^T with every float entry treated as an exact rational."""
    mf = [[Fraction(float(v)) for v in row] for row in m]
    pf = [[Fraction(float(v)) for v in row] for row in pi]
    n = len(mf)
    mp = [[sum(mf[i][k] * pf[k][l] for k in range(n) if pf[k][l]) for l in range(n)] for i in range(n)]
    return np.array([[float(sum(mp[i][l] * mf[j][l] for l in range(n))) for j in range(n)] for i in range(n)])


def verify_canonicity(params: Parameters, beta: float, tol: float = 1e-12, exact: bool = True) -> CanonicityReport:
    """Compare M Pi M^T with the standard form.

    With ``exact`` the product is accumulated in rational arithmetic, so the
    residual measures the rounding of the map and tensor entries only.
    """
    dm = darboux_map(params, beta)
    pi = bracket_matrix(params, beta).pi
    m = dm.forward
    t = exact_congruence(m, pi) if exact else m @ pi @ m.T
    res = float(np.max(np.abs(t - STANDARD_FORM)))
    scale = float(np.max(np.abs(m) @ np.abs(pi) @ np.abs(m).T))
    return CanonicityReport(t, res, res < tol, scale)


def hamiltonian_signature(form: np.ndarray) -> str:
    """Signs of the eigenvalues of a quadratic form, e.g. '++--'."""
    ev = np.linalg.eigvalsh(0.5 * (form + form.T))
    return "".join("+" if e > 0 else "-" if e < 0 else "0" for e in sorted(ev, reverse=True))
