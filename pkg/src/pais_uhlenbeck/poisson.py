"""Constant Poisson tensors on jet space parametrised by the angle beta.

Basis ordering is (q, q', q'', q''').  For every regime the tensor has the
pattern {q, q''} = {q', q'''} = 0 and {q', q''} = -{q, q'''}; it is fixed by
three entries a = {q, q'}, b = -{q, q'''}, d = {q'', q'''} and its
determinant is the square of the Pfaffian a*d - b**2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .invariants import hamiltonian_form, integral_forms, wrap_beta
from .regime import (
    Parameters,
    Regime,
    UnsupportedRegime,
    as_vector,
    classify_regime,
    companion_matrix,
    mode_frequencies,
)

BETA_TOL = 1e-12
HALF_PI = 0.5 * math.pi


class SingularBeta(ValueError):
    """beta sits on a point where the bracket family degenerates."""

    def __init__(self, beta: float, regime: Regime, excluded: tuple[float, ...]):
        self.beta = beta
        self.regime = regime
        self.excluded = excluded
        pts = ", ".join(f"{e:+.6f}" for e in excluded)
        super().__init__(
            f"beta={beta:+.15g} is excluded in regime ({regime.roman}); "
            f"excluded points: {pts}; sectors: {', '.join(s.label for s in sectors(regime))}"
        )


@dataclass(frozen=True)
class Sector:
    lower: float
    upper: float
    regime: Regime

    @property
    def label(self) -> str:
        return f"({_angle_name(self.lower)}, {_angle_name(self.upper)})"

    def contains(self, beta: float) -> bool:
        return self.lower < beta < self.upper or (
            self.lower == -math.pi and self.upper == math.pi and -math.pi <= beta < math.pi
        )

    def grid(self, n: int) -> np.ndarray:
        """``n`` interior points, midpoints of an even partition."""
        return self.lower + (self.upper - self.lower) * (np.arange(n) + 0.5) / n


def _angle_name(x: float) -> str:
    names = {-math.pi: "-pi", -HALF_PI: "-pi/2", 0.0: "0", HALF_PI: "pi/2", math.pi: "pi"}
    return names.get(x, f"{x:g}")


def excluded_points(regime: Regime) -> tuple[float, ...]:
    if regime in (Regime.OSCILLATORY, Regime.HYPERBOLIC):
        return (-math.pi, -HALF_PI, 0.0, HALF_PI)
    if regime is Regime.DEGENERATE:
        return (-math.pi, 0.0)
    if regime is Regime.COMPLEX:
        return ()
    raise UnsupportedRegime("the harmonic regime carries no beta family")


def sectors(regime: Regime) -> list[Sector]:
    if regime is Regime.COMPLEX:
        return [Sector(-math.pi, math.pi, regime)]
    pts = list(excluded_points(regime)) + [math.pi]
    return [Sector(lo, hi, regime) for lo, hi in zip(pts[:-1], pts[1:])]


def sector_of(beta: float, regime: Regime) -> Sector:
    b = wrap_beta(beta)
    excl = excluded_points(regime)
    for e in excl:
        d = abs(b - e)
        if min(d, 2.0 * math.pi - d) < BETA_TOL:
            raise SingularBeta(b, regime, excl)
    for s in sectors(regime):
        if s.contains(b):
            return s
    raise AssertionError("unreachable: sectors cover the circle")


@dataclass(frozen=True)
class BracketMatrix:
    pi: np.ndarray
    gamma: complex | float | None
    regime: Regime
    beta: float

    @property
    def a(self) -> float:
        return float(self.pi[0, 1])

    @property
    def b(self) -> float:
        return float(-self.pi[0, 3])

    @property
    def d(self) -> float:
        return float(self.pi[2, 3])


def _from_entries(a: float, b: float, d: float) -> np.ndarray:
    p = np.zeros((4, 4))
    p[0, 1] = a
    p[0, 3] = -b
    p[1, 2] = b
    p[2, 3] = d
    return p - p.T


def bracket_parts(params: Parameters) -> tuple[float, np.ndarray, np.ndarray]:
    """(gamma, P_cos, P_sin) with Pi = gamma * (P_cos / cos(beta) + P_sin / sin(beta)).

    Regimes (i) and (iii) share this form with the signed root w1^2.
    """
    regime = classify_regime(params)
    if regime not in (Regime.OSCILLATORY, Regime.HYPERBOLIC):
        raise UnsupportedRegime(f"no 1/cos, 1/sin decomposition in regime ({regime.roman})")
    w1, w2 = mode_frequencies(params).pair
    gamma = 1.0 / (math.sqrt(2.0) * params.m * params.lam * (w1 - w2))
    return gamma, _from_entries(1.0, w2, w2 * w2), _from_entries(1.0, w1, w1 * w1)


def bracket_matrix(params: Parameters, beta: float) -> BracketMatrix:
    regime = classify_regime(params)
    beta = wrap_beta(beta)
    sector_of(beta, regime)
    c, s = math.cos(beta), math.sin(beta)
    m = params.m
    if regime in (Regime.OSCILLATORY, Regime.HYPERBOLIC):
        gamma, pc, ps = bracket_parts(params)
        return BracketMatrix(gamma * (pc / c + ps / s), gamma, regime, beta)
    if regime is Regime.DEGENERATE:
        w2 = params.omega_sq
        s2 = s * s
        pi = _from_entries(
            -c / (2.0 * m * s2),
            -(2.0 * c + s) * w2 / (2.0 * m * s2),
            -2.0 * (c + s) * w2**2 / (m * s2),
        )
        return BracketMatrix(pi, None, regime, beta)
    # (v): gamma = -i g is pure imaginary, every entry below is -i*gamma*(real) = real
    z = mode_frequencies(params).w0_sq
    u, v = z.real, z.imag
    g = 1.0 / (2.0 * math.sqrt(2.0) * m * params.lam * v)
    pi = _from_entries(
        -2.0 * g * c,
        -2.0 * g * (u * c - v * s),
        -2.0 * g * ((u * u - v * v) * c - 2.0 * u * v * s),
    )
    return BracketMatrix(pi, complex(0.0, -g), regime, beta)


@dataclass(frozen=True)
class DeterminantCheck:
    numeric: float
    closed_form: float
    printed: float | None
    discrepancy: bool

    @property
    def ratio_to_printed(self) -> float | None:
        return None if self.printed is None else self.numeric / self.printed


def bracket_determinant(matrix: BracketMatrix, params: Parameters | None = None) -> DeterminantCheck:
    """Numeric determinant, the Pfaffian-squared closed form, and (for regimes
    (i)/(iii) when ``params`` is given) the textbook value ((w1^2-w2^2)/(cos sin))^2."""
    numeric = float(np.linalg.det(matrix.pi))
    closed = (matrix.a * matrix.d - matrix.b**2) ** 2
    printed = None
    if params is not None and matrix.regime in (Regime.OSCILLATORY, Regime.HYPERBOLIC):
        w1, w2 = mode_frequencies(params).pair
        printed = ((w1 - w2) / (math.cos(matrix.beta) * math.sin(matrix.beta))) ** 2
    disc = printed is not None and abs(printed - numeric) > 1e-10 * abs(numeric)
    return DeterminantCheck(numeric, closed, printed, disc)


@dataclass(frozen=True)
class QuadraticObservable:
    """f(x) = x^T A x + b^T x + c on jet space."""

    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))

    @classmethod
    def linear(cls, coeffs) -> "QuadraticObservable":
        return cls(np.zeros((4, 4)), np.asarray(coeffs, dtype=float))

    @classmethod
    def quadratic(cls, A) -> "QuadraticObservable":
        return cls(A, np.zeros(4))

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.A @ x + self.b @ x + self.c)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * (self.A @ np.asarray(x, dtype=float)) + self.b


def poisson_bracket(matrix: BracketMatrix, f: QuadraticObservable, g: QuadraticObservable, at) -> float:
    x = as_vector(at)
    return float(f.gradient(x) @ matrix.pi @ g.gradient(x))


def integral_observables(params: Parameters) -> tuple[QuadraticObservable, QuadraticObservable]:
    a1, a2 = integral_forms(params)
    return QuadraticObservable.quadratic(a1), QuadraticObservable.quadratic(a2)


def hamiltonian_observable(params: Parameters, beta: float) -> QuadraticObservable:
    return QuadraticObservable.quadratic(hamiltonian_form(params, beta))


MODE_COMBINATION_PAIRS = (
    ("pos1", "pos2"),
    ("vel1", "vel2"),
    ("pos1", "vel2"),
    ("pos2", "vel1"),
)


def mode_combination_vectors(params: Parameters) -> dict[str, np.ndarray]:
    """Linear forms q''+w_i^2 q ("pos") and q'''+w_i^2 q' ("vel") for both roots."""
    w1, w2 = mode_frequencies(params).pair
    dtype = complex if isinstance(w1, complex) else float
    out = {}
    for tag, w in (("1", w1), ("2", w2)):
        out["pos" + tag] = np.array([w, 0.0, 1.0, 0.0], dtype=dtype)
        out["vel" + tag] = np.array([0.0, w, 0.0, 1.0], dtype=dtype)
    return out


def _exact_bilinear(u, p, v) -> tuple[Fraction, Fraction]:
    """u^T P v in exact rational arithmetic; u, v may be complex."""
    def frac(z):
        z = complex(z)
        return Fraction(z.real), Fraction(z.imag)

    re = im = Fraction(0)
    for i in range(4):
        ur, ui = frac(u[i])
        for j in range(4):
            if p[i][j] == 0:
                continue
            vr, vi = frac(v[j])
            re += p[i][j] * (ur * vr - ui * vi)
            im += p[i][j] * (ur * vi + ui * vr)
    return re, im


def _exact_entries(a, b, d):
    z = Fraction(0)
    return [[z, a, z, -b], [-a, z, b, z], [z, -b, z, d], [b, z, -d, z]]


def mode_combination_brackets(params: Parameters, beta: float, exact: bool = True) -> np.ndarray:
    """The four brackets between the mode combinations, all expected zero:

    {q''+w1 q, q''+w2 q}, {q'''+w1 q', q'''+w2 q'},
    {q''+w1 q, q'''+w2 q'}, {q''+w2 q, q'''+w1 q'}.

    The tensor is affine in a few beta-dependent weights (1/cos and 1/sin in
    regimes (i)/(iii), cos and sin for the realified complex regime).  With
    ``exact=True`` each weight's coefficient is evaluated in rational
    arithmetic on the floating-point roots, so the result is free of
    round-off; ``exact=False`` contracts the assembled float tensor.
    Complex-regime values are moduli.
    """
    regime = classify_regime(params)
    if regime not in (Regime.OSCILLATORY, Regime.HYPERBOLIC, Regime.COMPLEX):
        raise UnsupportedRegime(f"mode combinations need distinct roots, regime ({regime.roman})")
    beta = wrap_beta(beta)
    pi = bracket_matrix(params, beta).pi
    vec = mode_combination_vectors(params)
    if not exact:
        return np.array([abs(vec[f] @ pi @ vec[g]) for f, g in MODE_COMBINATION_PAIRS])
    c, s = math.cos(beta), math.sin(beta)
    F = Fraction
    if regime is Regime.COMPLEX:
        z = mode_frequencies(params).w0_sq
        u, v = F(z.real), F(z.imag)
        g = 1.0 / (2.0 * math.sqrt(2.0) * params.m * params.lam * z.imag)
        # Pi = -2g (cos * P_c + sin * P_s)
        parts = [(-2.0 * g * c, _exact_entries(F(1), u, u * u - v * v)),
                 (-2.0 * g * s, _exact_entries(F(0), -v, -2 * u * v))]
    else:
        w1, w2 = (F(w) for w in mode_frequencies(params).pair)
        gamma, _, _ = bracket_parts(params)
        parts = [(gamma / c, _exact_entries(F(1), w2, w2 * w2)),
                 (gamma / s, _exact_entries(F(1), w1, w1 * w1))]
    out = []
    for f, g in MODE_COMBINATION_PAIRS:
        total = 0j
        for weight, p in parts:
            re, im = _exact_bilinear(vec[f], p, vec[g])
            total += weight * complex(float(re), float(im))
        out.append(abs(total))
    return np.array(out)


def hamiltonian_flow_field(params: Parameters, beta: float, jet) -> np.ndarray:
    """Pi * grad H at the state (batch-capable)."""
    x = as_vector(jet)
    pi = bracket_matrix(params, beta).pi
    return x @ (pi @ (2.0 * hamiltonian_form(params, beta))).T


def companion_field(params: Parameters, jet) -> np.ndarray:
    return as_vector(jet) @ companion_matrix(params).T
