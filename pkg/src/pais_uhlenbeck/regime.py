"""Parameters, regime classification and closed-form solutions.

The oscillator is ``lam * q'''' + q'' + omega_sq * q = 0``.  Depending on
``4 * lam * omega_sq`` the characteristic roots fall in one of five regimes;
every other module dispatches on :class:`Regime`.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Union

import numpy as np

DEGENERACY_TOL = 1e-12
NEAR_DEGENERACY_WARN = 1e-9
ZERO_AMPLITUDE_RTOL = 1e-14


class InvalidParameters(ValueError):
    pass


class UnsupportedRegime(ValueError):
    """Raised when an operation has no meaning in the given regime."""


class ConditioningWarning(UserWarning):
    pass


class Regime(str, Enum):
    OSCILLATORY = "oscillatory"  # (i)   0 < lam < 1/(4 w^2)
    HARMONIC = "harmonic"  # (ii)  lam == 0
    HYPERBOLIC = "hyperbolic"  # (iii) lam < 0
    DEGENERATE = "degenerate"  # (iv)  lam == 1/(4 w^2)
    COMPLEX = "complex"  # (v)   lam > 1/(4 w^2)

    @property
    def roman(self) -> str:
        return {
            "oscillatory": "i",
            "harmonic": "ii",
            "hyperbolic": "iii",
            "degenerate": "iv",
            "complex": "v",
        }[self.value]


@dataclass(frozen=True)
class Parameters:
    m: float
    omega_sq: float
    lam: float

    def __post_init__(self):
        for name in ("m", "omega_sq", "lam"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise InvalidParameters(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.m <= 0:
            raise InvalidParameters(f"mass must be positive, got m={self.m}")
        if self.omega_sq <= 0:
            raise InvalidParameters(f"omega_sq must be positive, got {self.omega_sq}")

    @property
    def discriminant(self) -> float:
        """``1 - 4 lam omega_sq``; zero at degeneracy."""
        return 1.0 - 4.0 * self.lam * self.omega_sq


def params_from_frequencies(m: float, w1_sq: float, w2_sq: float) -> Parameters:
    """Invert the sum/product identities: lam = 1/(w1+w2), omega_sq = lam*w1*w2."""
    lam = 1.0 / (w1_sq + w2_sq)
    return Parameters(m=m, omega_sq=lam * w1_sq * w2_sq, lam=lam)


@dataclass(frozen=True)
class JetState:
    """Position and its first three time derivatives."""

    q: float
    dq: float
    d2q: float
    d3q: float

    def __post_init__(self):
        for name in ("q", "dq", "d2q", "d3q"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"jet component {name} is not finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.q, self.dq, self.d2q, self.d3q])

    @classmethod
    def from_array(cls, x) -> "JetState":
        x = np.asarray(x, dtype=float).reshape(4)
        return cls(*x)


def as_vector(x) -> np.ndarray:
    """Accept a JetState/CanonicalState-like object or an array with trailing size 4."""
    if hasattr(x, "as_array"):
        return x.as_array()
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"expected trailing dimension 4, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ModeData:
    """Squared mode frequencies.

    ``w1_sq``/``w2_sq`` follow the ``+``/``-`` root labelling, so in the
    hyperbolic regime ``w1_sq`` is negative.  In the complex regime
    ``w0_sq`` holds the root with positive imaginary part and ``w1_sq``,
    ``w2_sq`` are None.  In the harmonic regime only ``omega_sq`` is set.
    """

    regime: Regime
    w1_sq: float | None = None
    w2_sq: float | None = None
    w0_sq: complex | None = None
    omega_sq: float | None = None

    @property
    def pair(self) -> tuple:
        """(w1^2, w2^2) as signed reals, or (w0^2, conj(w0^2)) in the complex regime."""
        if self.regime is Regime.COMPLEX:
            return self.w0_sq, self.w0_sq.conjugate()
        if self.regime is Regime.HARMONIC:
            raise UnsupportedRegime("harmonic regime has a single frequency")
        return self.w1_sq, self.w2_sq

    @property
    def abs_w1_sq(self) -> float:
        return abs(self.w1_sq)


def classify_regime(params: Parameters) -> Regime:
    if params.lam == 0.0:
        return Regime.HARMONIC
    if params.lam < 0.0:
        return Regime.HYPERBOLIC
    disc = params.discriminant
    if abs(disc) < DEGENERACY_TOL:
        return Regime.DEGENERATE
    if abs(disc) < NEAR_DEGENERACY_WARN:
        warnings.warn(
            f"parameters are within {abs(disc):.2e} of the degenerate point; "
            "quantities scaling like 1/(w1^2 - w2^2) are ill-conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    return Regime.OSCILLATORY if disc > 0 else Regime.COMPLEX


def mode_frequencies(params: Parameters) -> ModeData:
    regime = classify_regime(params)
    lam, w2 = params.lam, params.omega_sq
    if regime is Regime.HARMONIC:
        return ModeData(regime, omega_sq=w2)
    if regime is Regime.DEGENERATE:
        return ModeData(regime, w1_sq=2.0 * w2, w2_sq=2.0 * w2)
    if regime is Regime.COMPLEX:
        root = math.sqrt(-params.discriminant)
        return ModeData(regime, w0_sq=complex(1.0, root) / (2.0 * lam))
    # (i) and (iii): the minus root is written as 2 w^2 / (1 + s) to avoid cancellation
    s = math.sqrt(params.discriminant)
    return ModeData(regime, w1_sq=(1.0 + s) / (2.0 * lam), w2_sq=2.0 * w2 / (1.0 + s))


def companion_matrix(params: Parameters) -> np.ndarray:
    """First-order form of the equation of motion on (q, q', q'', q''')."""
    if params.lam == 0.0:
        raise UnsupportedRegime("no fourth-order companion system when lam == 0")
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 2] = a[2, 3] = 1.0
    a[3, 0] = -params.omega_sq / params.lam
    a[3, 2] = -1.0 / params.lam
    return a


def el_residual(params: Parameters, jet, d4q: float) -> float:
    x = as_vector(jet)
    return params.lam * d4q + x[..., 2] + params.omega_sq * x[..., 0]


# ---------------------------------------------------------------------------
# mode basis: every basis function is Re or Im of t**k * exp(z t)


@dataclass(frozen=True)
class _Basis:
    z: complex
    k: int
    imag: bool


def _basis(params: Parameters) -> list[_Basis]:
    md = mode_frequencies(params)
    r = md.regime
    if r is Regime.HARMONIC:
        w = math.sqrt(md.omega_sq)
        return [_Basis(1j * w, 0, False), _Basis(1j * w, 0, True)]
    if r is Regime.OSCILLATORY:
        w1, w2 = math.sqrt(md.w1_sq), math.sqrt(md.w2_sq)
        return [_Basis(1j * w1, 0, False), _Basis(1j * w1, 0, True),
                _Basis(1j * w2, 0, False), _Basis(1j * w2, 0, True)]
    if r is Regime.HYPERBOLIC:
        kappa, w2 = math.sqrt(-md.w1_sq), math.sqrt(md.w2_sq)
        return [_Basis(kappa, 0, False), _Basis(-kappa, 0, False),
                _Basis(1j * w2, 0, False), _Basis(1j * w2, 0, True)]
    if r is Regime.DEGENERATE:
        w = math.sqrt(md.w1_sq)
        return [_Basis(1j * w, 0, False), _Basis(1j * w, 0, True),
                _Basis(1j * w, 1, False), _Basis(1j * w, 1, True)]
    w0 = cmath.sqrt(md.w0_sq)
    return [_Basis(1j * w0, 0, False), _Basis(1j * w0, 0, True),
            _Basis(-1j * w0, 0, False), _Basis(-1j * w0, 0, True)]


def _basis_derivative(b: _Basis, n: int, t: np.ndarray) -> np.ndarray:
    e = np.exp(b.z * t)
    val = b.z**n * e
    if b.k == 1:
        val = val * t + (n * b.z ** (n - 1) * e if n > 0 else 0.0)
    return val.imag if b.imag else val.real


def mode_matrix(params: Parameters, t, orders: int = 4) -> np.ndarray:
    """Matrix whose column j holds derivatives 0..orders-1 of basis function j at t.

    For array ``t`` the result has shape ``t.shape + (orders, n_basis)``.
    """
    t = np.asarray(t, dtype=float)
    basis = _basis(params)
    out = np.empty(t.shape + (orders, len(basis)))
    for j, b in enumerate(basis):
        for n in range(orders):
            out[..., n, j] = _basis_derivative(b, n, t)
    return out


# ---------------------------------------------------------------------------
# amplitude/phase payloads


def _wrap_phase(a: float) -> float:
    w = (a + math.pi) % (2.0 * math.pi) - math.pi
    return -math.pi if w >= math.pi else w


def _amp_phase(a: float, b: float, scale: float) -> tuple[float, float]:
    """(a, b) are the cos/sin coefficients of A cos(x + alpha)."""
    amp = math.hypot(a, b)
    if amp <= ZERO_AMPLITUDE_RTOL * scale:
        return 0.0, 0.0
    return amp, _wrap_phase(math.atan2(-b, a))


@dataclass(frozen=True)
class OscillatoryCoeffs:
    """q = a1 cos(w1 t + alpha1) + a2 cos(w2 t + alpha2)."""

    a1: float
    alpha1: float
    a2: float
    alpha2: float
    regime: ClassVar[Regime] = Regime.OSCILLATORY

    def to_linear(self) -> np.ndarray:
        return np.array([self.a1 * math.cos(self.alpha1), -self.a1 * math.sin(self.alpha1),
                         self.a2 * math.cos(self.alpha2), -self.a2 * math.sin(self.alpha2)])

    @classmethod
    def from_linear(cls, c):
        scale = max(1.0, float(np.max(np.abs(c))))
        a1, al1 = _amp_phase(c[0], c[1], scale)
        a2, al2 = _amp_phase(c[2], c[3], scale)
        return cls(a1, al1, a2, al2)


@dataclass(frozen=True)
class DegenerateCoeffs(OscillatoryCoeffs):
    """q = a1 cos(W t + alpha1) + a2 t cos(W t + alpha2), W = sqrt(2) omega."""

    regime: ClassVar[Regime] = Regime.DEGENERATE


@dataclass(frozen=True)
class HarmonicCoeffs:
    a: float
    alpha: float
    regime: ClassVar[Regime] = Regime.HARMONIC

    def to_linear(self) -> np.ndarray:
        return np.array([self.a * math.cos(self.alpha), -self.a * math.sin(self.alpha)])

    @classmethod
    def from_linear(cls, c):
        return cls(*_amp_phase(c[0], c[1], max(1.0, float(np.max(np.abs(c))))))


@dataclass(frozen=True)
class HyperbolicCoeffs:
    """q = a exp(k t) + a_prime exp(-k t) + b cos(w2 t + phase), k = |w1|."""

    a: float
    a_prime: float
    b: float
    phase: float
    regime: ClassVar[Regime] = Regime.HYPERBOLIC

    def to_linear(self) -> np.ndarray:
        return np.array([self.a, self.a_prime,
                         self.b * math.cos(self.phase), -self.b * math.sin(self.phase)])

    @classmethod
    def from_linear(cls, c):
        b, ph = _amp_phase(c[2], c[3], max(1.0, float(np.max(np.abs(c)))))
        return cls(float(c[0]), float(c[1]), b, ph)


@dataclass(frozen=True)
class ComplexCoeffs:
    """q = Re(c_plus exp(i w0 t)) + Re(c_minus exp(-i w0 t)), Im w0 > 0.

    ``c_plus`` multiplies the decaying pair, ``c_minus`` the growing one.
    """

    c_plus: complex
    c_minus: complex
    regime: ClassVar[Regime] = Regime.COMPLEX

    def to_linear(self) -> np.ndarray:
        return np.array([self.c_plus.real, -self.c_plus.imag,
                         self.c_minus.real, -self.c_minus.imag])

    @classmethod
    def from_linear(cls, c):
        return cls(complex(c[0], -c[1]), complex(c[2], -c[3]))


ModeCoeffs = Union[OscillatoryCoeffs, DegenerateCoeffs, HarmonicCoeffs, HyperbolicCoeffs, ComplexCoeffs]

_COEFF_TYPES = {
    Regime.OSCILLATORY: OscillatoryCoeffs,
    Regime.DEGENERATE: DegenerateCoeffs,
    Regime.HARMONIC: HarmonicCoeffs,
    Regime.HYPERBOLIC: HyperbolicCoeffs,
    Regime.COMPLEX: ComplexCoeffs,
}


def coeffs_type(regime: Regime):
    return _COEFF_TYPES[regime]


def exact_solution(params: Parameters, coeffs: ModeCoeffs, t) -> JetState | np.ndarray:
    """Jet of the closed-form solution at time ``t``.

    Returns a :class:`JetState` for scalar ``t`` and an ``(..., 4)`` array otherwise.
    """
    regime = classify_regime(params)
    if type(coeffs) is not _COEFF_TYPES[regime]:
        raise TypeError(f"{type(coeffs).__name__} does not match regime {regime.value}")
    c = coeffs.to_linear()
    jets = mode_matrix(params, t) @ c
    if np.ndim(t) == 0:
        return JetState.from_array(jets)
    return jets


def mode_map_condition(params: Parameters) -> float:
    return float(np.linalg.cond(mode_matrix(params, 0.0, orders=len(_basis(params)))))


def fit_linear_coefficients(params: Parameters, jet) -> np.ndarray:
    """Coefficients of the real mode basis reproducing ``jet`` at t=0.

    Works on batches (trailing dimension 4).  In the harmonic regime only
    (q, q') are used.
    """
    x = as_vector(jet)
    n = len(_basis(params))
    m0 = mode_matrix(params, 0.0, orders=n)
    cond = np.linalg.cond(m0)
    if cond > 1e12:
        warnings.warn(f"mode map condition number {cond:.2e}", ConditioningWarning, stacklevel=2)
    return np.linalg.solve(m0, x[..., :n, None])[..., 0]


def fit_mode_coefficients(params: Parameters, jet) -> ModeCoeffs:
    c = fit_linear_coefficients(params, as_vector(jet).reshape(4))
    return _COEFF_TYPES[classify_regime(params)].from_linear(c)
