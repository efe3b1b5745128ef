"""Numeric certification of printed transformations.

Every quadratic object is checked by exact matrix congruence.  When a
printed Hamiltonian disagrees with the pull-back, its coefficients are
re-fitted on the printed monomial basis only; a nonzero fit residual means
the printed structure itself is wrong and the entry is marked failed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .darboux import STANDARD_FORM, CanonicalState, complex_epsilon, darboux_map
from .invariants import hamiltonian_form, hamiltonian_value, wrap_beta
from .poisson import HALF_PI, bracket_determinant, bracket_matrix, sector_of
from .regime import (
    JetState,
    Parameters,
    Regime,
    UnsupportedRegime,
    as_vector,
    classify_regime,
    mode_frequencies,
    mode_matrix,
)

CANONICITY_TOL = 1e-13
PULLBACK_TOL = 1e-12
FIT_TOL = 1e-10
EXTRA_MODE_TOL = 1e-12


class AuditStatus(str, Enum):
    VERIFIED = "Verified"
    CORRECTED = "CorrectedCoefficients"
    FAILED = "Failed"


@dataclass(frozen=True)
class AuditEntry:
    id: str
    status: AuditStatus
    residual: float
    printed: dict | None = None
    corrected: dict | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable({
            "id": self.id,
            "status": self.status.value,
            "residual": self.residual,
            "printed": self.printed,
            "corrected": self.corrected,
            "details": self.details,
        })


@dataclass(frozen=True)
class AuditReport:
    entries: tuple[AuditEntry, ...]

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate audit ids in {ids}")

    def __getitem__(self, key: str) -> AuditEntry:
        for e in self.entries:
            if e.id == key:
                return e
        raise KeyError(key)

    def __contains__(self, key: str) -> bool:
        return any(e.id == key for e in self.entries)

    @property
    def failed(self) -> list[AuditEntry]:
        return [e for e in self.entries if e.status is AuditStatus.FAILED]

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "ok": self.ok}


def _max_abs(x) -> float:
    return float(np.max(np.abs(x), initial=0.0))


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _form_bracket(a: np.ndarray, b: np.ndarray, j: np.ndarray = STANDARD_FORM) -> np.ndarray:
    """Symmetric matrix of {x^T A x, x^T B x} under the constant tensor ``j``."""
    return 2.0 * (a @ j @ b - b @ j @ a)


def _monomial(i: int, j: int) -> np.ndarray:
    """Symmetric form of the monomial z_i z_j."""
    e = np.zeros((4, 4))
    e[i, j] += 0.5
    e[j, i] += 0.5
    return e


def _fit_on_basis(target: np.ndarray, basis: dict[str, np.ndarray]) -> tuple[dict[str, float], float]:
    names = list(basis)
    design = np.stack([basis[n].ravel() for n in names], axis=1)
    tgt = np.asarray(target).ravel()
    if np.iscomplexobj(design) or np.iscomplexobj(tgt):
        design = design.astype(complex)
    coef, *_ = np.linalg.lstsq(design, tgt, rcond=None)
    resid = _max_abs(design @ coef - tgt)
    return {n: _clean(c) for n, c in zip(names, coef)}, resid


def _clean(c):
    c = complex(c)
    return c.real if abs(c.imag) <= 1e-14 * max(1.0, abs(c)) else c


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _verdict(residual: float, tol: float, corrected: bool = False) -> AuditStatus:
    if not residual < tol:
        return AuditStatus.FAILED
    return AuditStatus.CORRECTED if corrected else AuditStatus.VERIFIED


# ---------------------------------------------------------------------------
# Ostrogradski variables


@dataclass(frozen=True)
class TildeState:
    """Ostrogradski-form coordinates; ``as_array`` follows field order."""

    tq1: float
    tq2: float
    tp1: float
    tp2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.tq1, self.tq2, self.tp1, self.tp2])

    @classmethod
    def from_array(cls, x) -> "TildeState":
        return cls(*(float(v) for v in np.asarray(x, dtype=float).reshape(4)))


# (tq1, tp1, tq2, tp2) <-> (tq1, tq2, tp1, tp2)
_TILDE_FIELDS = [0, 2, 1, 3]


def _require_lam(params: Parameters) -> None:
    if params.lam == 0.0:
        raise UnsupportedRegime("Ostrogradski variables need lam != 0")


def ostrogradski_matrix(params: Parameters) -> np.ndarray:
    """Jet -> (tq1, tp1, tq2, tp2) for the standard higher-derivative construction."""
    _require_lam(params)
    m, lam = params.m, params.lam
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, m, 0.0, m * lam],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, -m * lam, 0.0],
    ])


def ostrogradski_from_jet(params: Parameters, jet) -> TildeState | np.ndarray:
    z = as_vector(jet) @ ostrogradski_matrix(params).T
    z = z[..., _TILDE_FIELDS]
    return TildeState.from_array(z) if isinstance(jet, JetState) else z


def ostrogradski_hamiltonian_form(params: Parameters) -> np.ndarray:
    """p1 q2 - p2^2/(2 m lam) - m q2^2/2 + m w^2 q1^2/2 on (tq1, tp1, tq2, tp2)."""
    _require_lam(params)
    m = params.m
    return (_monomial(1, 2) - _monomial(3, 3) / (2.0 * m * params.lam)
            - 0.5 * m * _monomial(2, 2) + 0.5 * m * params.omega_sq * _monomial(0, 0))


def _require_negative_sector(params: Parameters, beta: float) -> float:
    regime = classify_regime(params)
    if regime is not Regime.OSCILLATORY:
        raise UnsupportedRegime(f"needs regime (i), got ({regime.roman})")
    beta = wrap_beta(beta)
    sector_of(beta, regime)
    if not -HALF_PI < beta < 0.0:
        raise UnsupportedRegime(f"beta={beta:.6g} is outside the sector (-pi/2, 0)")
    return beta


def tilde_matrix(params: Parameters) -> np.ndarray:
    """Normal coordinates (q1, p1, q2, p2) -> (tq1, tp1, tq2, tp2)."""
    m, lam = params.m, params.lam
    w1, w2 = mode_frequencies(params).pair
    r = math.sqrt(lam * (w1 - w2))
    k = math.sqrt(lam / (w1 - w2))
    return np.array([
        [1.0 / r, 0.0, -1.0 / r, 0.0],
        [0.0, k * w1, 0.0, k * w2],
        [0.0, 1.0 / (m * r), 0.0, 1.0 / (m * r)],
        [m * k * w2, 0.0, -m * k * w1, 0.0],
    ])


def tilde_transform(params: Parameters, beta: float, canon) -> TildeState | np.ndarray:
    _require_negative_sector(params, beta)
    z = as_vector(canon) @ tilde_matrix(params).T
    z = z[..., _TILDE_FIELDS]
    return TildeState.from_array(z) if isinstance(canon, CanonicalState) else z


def audit_tilde_canonicity(params: Parameters) -> AuditEntry:
    t = tilde_matrix(params)
    res = _max_abs(t @ STANDARD_FORM @ t.T - STANDARD_FORM)
    return AuditEntry("tilde-map-canonicity", _verdict(res, CANONICITY_TOL), res)


def audit_ostrogradski_hamiltonian(params: Parameters, beta: float = -0.25 * math.pi) -> AuditEntry:
    """Pull H(beta) in normal coordinates back to the tilde variables and fit
    the printed four-monomial form."""
    beta = _require_negative_sector(params, beta)
    m, lam, w = params.m, params.lam, params.omega_sq
    dm = darboux_map(params, beta)
    tinv = np.linalg.inv(tilde_matrix(params))
    pulled = _sym(tinv.T @ dm.hamiltonian_form @ tinv)
    basis = {
        "tp1*tq2": _monomial(1, 2),
        "tp2^2": _monomial(3, 3),
        "tq2^2": _monomial(2, 2),
        "tq1^2": _monomial(0, 0),
    }
    printed = {"tp1*tq2": 1.0, "tp2^2": -1.0 / (m * lam), "tq2^2": -0.5 * m, "tq1^2": 0.5 * m * w}
    fitted, fit_res = _fit_on_basis(pulled, basis)
    term_ok = {k: abs(fitted[k] - printed[k]) <= 1e-12 * max(1.0, abs(printed[k])) for k in basis}
    printed_res = _max_abs(pulled - sum(printed[k] * basis[k] for k in basis))
    corrected = not all(term_ok.values())
    # composition with the jet map: tilde variables as functions of (q, q', q'', q''')
    composed = tilde_matrix(params) @ dm.forward
    ostro = ostrogradski_matrix(params)
    jets = np.random.default_rng(0).standard_normal((64, 4))
    h_beta = hamiltonian_value(params, beta, jets)
    h_ostr = np.einsum("bi,ij,bj->b", jets @ ostro.T, ostrogradski_hamiltonian_form(params), jets @ ostro.T)
    details = {
        "pullback_residual": fit_res,
        "printed_residual": printed_res,
        "terms_matching_printed": term_ok,
        "tq1_in_jet_coordinates": composed[0].tolist(),
        "composed_minus_ostrogradski": _max_abs(composed - ostro),
        "h_beta_over_h_ostrogradski": float(np.median(h_beta / h_ostr)),
        "beta": beta,
    }
    status = _verdict(fit_res, PULLBACK_TOL, corrected)
    return AuditEntry("ostrogradski-hamiltonian", status, fit_res, printed,
                      fitted if corrected else None, details)


# ---------------------------------------------------------------------------
# beta-Lagrangian in terms of q alone


@dataclass(frozen=True)
class QuarticLagrangianCoeffs:
    """L = c3 q'''^2 + c2 q''^2 + c1 q'^2 + c0 q^2."""

    c3: float
    c2: float
    c1: float
    c0: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3])

    def characteristic_polynomial(self) -> np.ndarray:
        """Coefficients (highest first) of the Euler-Lagrange operator in x = d^2/dt^2, halved."""
        return np.array([-self.c3, self.c2, -self.c1, self.c0])


def _delta_sq(params: Parameters) -> float:
    w1, w2 = mode_frequencies(params).pair
    return math.sqrt(2.0) * params.lam / (w1 - w2)


def beta_lagrangian(params: Parameters, beta: float) -> QuarticLagrangianCoeffs:
    beta = _require_negative_sector(params, beta)
    w1, w2 = mode_frequencies(params).pair
    c, s = math.cos(beta), math.sin(beta)
    k = params.m * _delta_sq(params)
    return QuarticLagrangianCoeffs(
        c3=0.5 * k * (c + s),
        c2=-k * (w1 * (c + 0.5 * s) + w2 * (s + 0.5 * c)),
        c1=0.5 * k * ((w1 + 2.0 * w2) * w1 * c + (w2 + 2.0 * w1) * w2 * s),
        c0=-0.5 * k * w1 * w2 * (w1 * c + w2 * s),
    )


def reduce_total_derivatives(s: np.ndarray) -> np.ndarray:
    """Diagonal coefficients of x^T S x on jets after dropping total derivatives.

    Uses q^(i) q^(j) ~ -q^(i+1) q^(j-1): odd gaps vanish and a gap 2k becomes
    (-1)^k times a square.
    """
    s = _sym(np.asarray(s, dtype=float))
    n = s.shape[0]
    out = np.zeros(n)
    for i in range(n):
        for j in range(n):
            gap = abs(i - j)
            if gap % 2 == 0:
                out[min(i, j) + gap // 2] += (-1) ** (gap // 2) * s[i, j]
    return out


def normal_lagrangian_on_jets(params: Parameters, beta: float) -> np.ndarray:
    """Symmetric form on (q, q', q'', q''') of the two-oscillator Lagrangian in the sector (-pi/2, 0)."""
    beta = _require_negative_sector(params, beta)
    w1, w2 = mode_frequencies(params).pair
    m = params.m
    d = math.sqrt(_delta_sq(params))
    a = d * math.sqrt(math.cos(beta))
    b = d * math.sqrt(-math.sin(beta))
    q1 = a * np.array([w1, 0, 1, 0])
    v1 = a * np.array([0, w1, 0, 1])
    q2 = b * np.array([w2, 0, 1, 0])
    v2 = b * np.array([0, w2, 0, 1])
    return 0.5 * m * (np.outer(v1, v1) - w2 * np.outer(q1, q1) - np.outer(v2, v2) + w1 * np.outer(q2, q2))


def audit_beta_lagrangian(params: Parameters, beta: float) -> AuditEntry:
    printed = beta_lagrangian(params, beta)
    reduced = reduce_total_derivatives(normal_lagrangian_on_jets(params, beta))
    res = _max_abs(reduced - printed.as_array())
    scale = max(1.0, _max_abs(reduced))
    return AuditEntry(
        "beta-lagrangian", _verdict(res / scale, PULLBACK_TOL), res,
        printed={"c3": printed.c3, "c2": printed.c2, "c1": printed.c1, "c0": printed.c0},
        details={"reduced": reduced[::-1].tolist(), "beta": wrap_beta(beta)},
    )


@dataclass(frozen=True)
class ExtraModeCheck:
    omega_sq: float | None
    remainder: float
    quotient: np.ndarray  # linear factor, highest power first
    leading: float  # cos(beta) + sin(beta)


def extra_mode_check(params: Parameters, beta: float) -> ExtraModeCheck:
    """Factor the characteristic polynomial by (x + w1^2)(x + w2^2)."""
    beta = _require_negative_sector(params, beta)
    w1, w2 = mode_frequencies(params).pair
    poly = beta_lagrangian(params, beta).characteristic_polynomial()
    scale = np.max(np.abs(poly))
    quot, rem = np.polydiv(poly / scale, np.polymul([1.0, w1], [1.0, w2]))
    c, s = math.cos(beta), math.sin(beta)
    lead = c + s
    omega = None if abs(lead) < EXTRA_MODE_TOL else (w1 * c + w2 * s) / lead
    return ExtraModeCheck(omega, _max_abs(rem), quot * scale, lead)


def extra_mode_frequency(params: Parameters, beta: float) -> float | None:
    """Squared frequency of the additional mode, or None where it is absent (beta = -pi/4)."""
    return extra_mode_check(params, beta).omega_sq


def audit_extra_mode(params: Parameters, beta: float) -> AuditEntry:
    chk = extra_mode_check(params, beta)
    beta = wrap_beta(beta)
    w1, w2 = mode_frequencies(params).pair
    c, s = math.cos(beta), math.sin(beta)
    # the quotient must be proportional to (cos+sin) x + (w1^2 cos + w2^2 sin)
    target = np.array([c + s, w1 * c + w2 * s])
    k = params.m * _delta_sq(params) / 2.0
    ratio_res = _max_abs(chk.quotient + k * target) / max(1.0, k)
    res = max(chk.remainder, ratio_res)
    return AuditEntry(
        "extra-mode-factorization", _verdict(res, FIT_TOL), res,
        details={"omega_sq_extra": chk.omega_sq, "remainder": chk.remainder, "beta": beta},
    )


# ---------------------------------------------------------------------------
# embedding identity


@dataclass(frozen=True)
class TrigPath:
    """q(t) = sum_n a_n cos(n nu t) + b_n sin(n nu t), n = 1..degree."""

    a: np.ndarray
    b: np.ndarray
    nu: float = 0.25

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 12, nu: float = 0.25) -> "TrigPath":
        return cls(rng.standard_normal(degree), rng.standard_normal(degree), nu)

    def derivatives(self, t, orders: int = 7) -> np.ndarray:
        """Array of shape (orders,) + t.shape holding q, q', ... analytically."""
        t = np.asarray(t, dtype=float)
        k = self.nu * np.arange(1, len(self.a) + 1)
        ph = np.multiply.outer(t, k)
        out = np.empty((orders,) + t.shape)
        for n in range(orders):
            # d^n cos(kt) = k^n cos(kt + n pi/2)
            shift = n * HALF_PI
            out[n] = (np.cos(ph + shift) * k**n) @ self.a + (np.sin(ph + shift) * k**n) @ self.b
        return out


def onshell_derivatives(params: Parameters, coeffs: np.ndarray, t, orders: int = 7) -> np.ndarray:
    """Derivatives of the exact solution with linear mode coefficients ``coeffs``."""
    mm = mode_matrix(params, t, orders=orders)
    return np.moveaxis(mm @ np.asarray(coeffs, dtype=float), -1, 0)


def embedding_lagrangian(params: Parameters, alpha1: float, alpha2: float) -> np.ndarray:
    """Symmetric S with L = y^T S y / 2 on y = (q, q', q'', q''') after the substitution."""
    w1, w2 = mode_frequencies(params).pair
    m = params.m
    s = np.zeros((4, 4))
    for alpha, wa, wb in ((alpha1, w1, w2), (alpha2, w2, w1)):
        pos = np.array([wb, 0.0, 1.0, 0.0])  # q'' + w_other q
        vel = np.array([0.0, wb, 0.0, 1.0])
        s += alpha * m * (np.outer(vel, vel) - wa * np.outer(pos, pos))
    return s


def euler_lagrange(s: np.ndarray, derivs: np.ndarray) -> np.ndarray:
    """sum_k (-1)^k d^k/dt^k (dL/dq^(k)) for L = y^T S y / 2."""
    out = np.zeros_like(derivs[0])
    for k in range(4):
        for j in range(4):
            if s[k, j]:
                out = out + (-1) ** k * s[k, j] * derivs[j + k]
    return out


@dataclass(frozen=True)
class EmbeddingCheck:
    residual: float
    scale: float
    sixth_order_coefficient: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale else self.residual


def embedding_identity_check(params: Parameters, alpha1: float, alpha2: float, path, t=None) -> EmbeddingCheck:
    """Compare the Euler-Lagrange expression of the substituted Lagrangian
    with the factored form sum_i (d^2 + w_other^2) EL_i."""
    if alpha1 * alpha2 == 0:
        raise ValueError("both alpha coefficients must be nonzero")
    if classify_regime(params) is not Regime.OSCILLATORY:
        raise UnsupportedRegime("the embedding identity is set up for regime (i)")
    t = np.linspace(0.0, 8.0 * math.pi, 97) if t is None else np.asarray(t, dtype=float)
    d = path.derivatives(t) if hasattr(path, "derivatives") else np.asarray(path)
    s = embedding_lagrangian(params, alpha1, alpha2)
    lhs = euler_lagrange(s, d)
    w1, w2 = mode_frequencies(params).pair
    m = params.m
    rhs = np.zeros_like(lhs)
    for alpha, wa, wb in ((alpha1, w1, w2), (alpha2, w2, w1)):
        # EL_i = -alpha m (q_i'' + w_i q_i) with q_i = q'' + w_other q
        el = [-alpha * m * (d[n + 4] + (wa + wb) * d[n + 2] + wa * wb * d[n]) for n in (0, 2)]
        rhs = rhs + el[1] + wb * el[0]
    scale = float(np.max(np.abs(lhs), initial=0.0)) + float(np.max(np.abs(rhs), initial=0.0))
    return EmbeddingCheck(_max_abs(lhs - rhs), scale, -float(s[3, 3]))


def embedding_identity_residual(params: Parameters, alpha1: float, alpha2: float, path, t=None) -> float:
    return embedding_identity_check(params, alpha1, alpha2, path, t).residual


def onshell_el_residual(params: Parameters, alpha1: float, alpha2: float, coeffs, t=None) -> float:
    t = np.linspace(0.0, 20.0, 101) if t is None else np.asarray(t, dtype=float)
    d = onshell_derivatives(params, coeffs, t)
    return _max_abs(euler_lagrange(embedding_lagrangian(params, alpha1, alpha2), d))


def audit_embedding(params: Parameters, n_paths: int = 20, seed: int = 0) -> AuditEntry:
    rng = np.random.default_rng(seed)
    worst, rel = 0.0, 0.0
    for _ in range(n_paths):
        a1, a2 = rng.uniform(0.5, 2.0, 2) * rng.choice([-1.0, 1.0], 2)
        chk = embedding_identity_check(params, a1, a2, TrigPath.random(rng))
        worst, rel = max(worst, chk.residual), max(rel, chk.relative)
    sixth = embedding_identity_check(params, 1.0, -1.0, TrigPath.random(rng)).sixth_order_coefficient
    onshell = max(onshell_el_residual(params, *rng.uniform(-2, 2, 2), rng.standard_normal(4)) for _ in range(5))
    status = _verdict(max(worst, onshell), 1e-8) if abs(sixth) < EXTRA_MODE_TOL else AuditStatus.FAILED
    return AuditEntry("embedding-identity", status, worst,
                      details={"relative": rel, "sixth_order_coefficient_opposite_alphas": sixth,
                               "onshell_residual": onshell, "paths": n_paths})


# ---------------------------------------------------------------------------
# separation of variables


def separation_map_degenerate(params: Parameters, kappa: float | None = None) -> np.ndarray:
    """Primed -> unprimed coordinates for the degenerate-case map; kappa defaults to m*w."""
    kappa = params.m * math.sqrt(params.omega_sq) if kappa is None else kappa
    # columns: (q1', p1', q2', p2')
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, -kappa, 0.0],
        [1.0, 0.0, 0.0, -1.0 / kappa],
        [0.0, 0.0, kappa, 0.0],
    ])


def _rotation_form() -> np.ndarray:
    """q1 p2 - q2 p1."""
    return _monomial(0, 3) - _monomial(2, 1)


def _dilatation_form() -> np.ndarray:
    """q1 p1 + q2 p2."""
    return _monomial(0, 1) + _monomial(2, 3)


def _radius_form() -> np.ndarray:
    return _monomial(0, 0) + _monomial(2, 2)


def _momentum_shear(sigma: float) -> np.ndarray:
    t = np.eye(4)
    t[1, 2] = t[3, 0] = sigma
    return t


def _uniform_scale(s: float) -> np.ndarray:
    return np.diag([s, 1.0 / s, s, 1.0 / s])


def _require(params: Parameters, regime: Regime) -> None:
    got = classify_regime(params)
    if got is not regime:
        raise UnsupportedRegime(f"needs regime ({regime.roman}), got ({got.roman})")


def audit_separation(params: Parameters) -> list[AuditEntry]:
    regime = classify_regime(params)
    if regime is Regime.DEGENERATE:
        return _audit_separation_degenerate(params)
    if regime is Regime.COMPLEX:
        return _audit_separation_complex(params)
    raise UnsupportedRegime(f"separation audit needs regime (iv) or (v), got ({regime.roman})")


def _audit_separation_degenerate(params: Parameters) -> list[AuditEntry]:
    _require(params, Regime.DEGENERATE)
    m, w = params.m, math.sqrt(params.omega_sq)
    h = darboux_map(params, HALF_PI).hamiltonian_form
    t = separation_map_degenerate(params)
    can = _max_abs(t @ STANDARD_FORM @ t.T - STANDARD_FORM)
    entries = [AuditEntry("degenerate-separation-canonicity", _verdict(can, CANONICITY_TOL), can)]

    pulled = _sym(t.T @ h @ t)
    basis = {"q1'p2'": _monomial(0, 3), "q2'p1'": _monomial(2, 1), "q1'^2": _monomial(0, 0), "q2'^2": _monomial(2, 2)}
    printed = {"q1'p2'": -w, "q2'p1'": w, "q1'^2": -m * w * w, "q2'^2": -m * w * w}
    fitted, fit_res = _fit_on_basis(pulled, basis)
    matches = all(abs(fitted[k] - printed[k]) <= 1e-12 * max(1.0, abs(printed[k])) for k in basis)
    entries.append(AuditEntry(
        "degenerate-separated-hamiltonian", _verdict(fit_res, PULLBACK_TOL, not matches), fit_res,
        printed, None if matches else fitted,
        {"separates_as_printed": matches, "rotation_plus_radial": _is_rotation_plus_radial(fitted)},
    ))
    entries.append(_degenerate_ansatz(params, h))
    return entries


def _is_rotation_plus_radial(c: dict) -> bool:
    vals = list(c.values())
    return abs(vals[0] + vals[1]) < 1e-12 and abs(vals[2] - vals[3]) < 1e-12


def _degenerate_ansatz(params: Parameters, h: np.ndarray) -> AuditEntry:
    """Certify a rotation + isotropic-potential form reachable from the printed map.

    Diagonal rescalings cannot do it: after the map the two potential
    coefficients are m w^2 and -kappa^2/m, of opposite sign.  Allowing
    kappa to vary, a symmetric momentum shear and a uniform scale does.
    """
    m, w2 = params.m, params.omega_sq
    w = math.sqrt(w2)
    kappa = math.sqrt(2.0) * m * w  # balances the two angular-momentum terms
    sigma = 3.0 * m * w / (2.0 * math.sqrt(2.0))  # equalises the potential
    scale = 2.0
    t = separation_map_degenerate(params, kappa) @ _momentum_shear(sigma) @ _uniform_scale(scale)
    can = _max_abs(t @ STANDARD_FORM @ t.T - STANDARD_FORM)
    pulled = _sym(t.T @ h @ t)
    big_w = math.sqrt(2.0) * w  # the degenerate mode frequency
    rot, rad = -big_w * _rotation_form(), -m * big_w**2 * _radius_form()
    res = _max_abs(pulled - rot - rad)
    comm = _max_abs(_form_bracket(rot, rad))
    diag_obstruction = {"potential_q1'^2": m * w2, "potential_q2'^2": -m * w2}
    worst = max(can, res, comm)
    return AuditEntry(
        "degenerate-separated-form", _verdict(worst, PULLBACK_TOL, corrected=True), worst,
        printed={"frequency": w},
        corrected={"frequency": big_w, "form": "-W (q1'p2' - q2'p1') - m W^2 (q1'^2 + q2'^2)"},
        details={"kappa": kappa, "shear": sigma, "scale": scale, "canonicity": can,
                 "pullback_residual": res, "summands_bracket": comm,
                 "diagonal_rescaling_obstruction": diag_obstruction},
    )


def complex_canonical_map(params: Parameters, beta: float) -> np.ndarray:
    """Jet -> complex canonical (q1, p1, q2, p2) with q2, p2 the conjugates of q1, p1."""
    _require(params, Regime.COMPLEX)
    z = mode_frequencies(params).w0_sq
    eps = complex_epsilon(params, beta)
    m = params.m
    return np.array([
        np.array([z, 0.0, 1.0, 0.0]) / eps,
        m * np.array([0.0, z, 0.0, 1.0]) / eps,
        np.array([z.conjugate(), 0.0, 1.0, 0.0]) / eps.conjugate(),
        m * np.array([0.0, z.conjugate(), 0.0, 1.0]) / eps.conjugate(),
    ])


def complex_canonical_hamiltonian_form(params: Parameters) -> np.ndarray:
    z = mode_frequencies(params).w0_sq
    m = params.m
    return np.diag([m * z.conjugate() / 2.0, 1.0 / (2.0 * m), m * z / 2.0, 1.0 / (2.0 * m)])


def separation_map_complex(params: Parameters, branch: int = 1) -> np.ndarray:
    """Tilde (tq1, tp1, tq2, tp2) -> complex canonical coordinates.

    ``branch`` picks the sign of the square root of w0^2.  A mass rescaling
    q -> q / sqrt(m), p -> sqrt(m) p is applied first so the printed
    mass-free ansatz applies for every m.
    """
    _require(params, Regime.COMPLEX)
    w0 = branch * cmath.sqrt(mode_frequencies(params).w0_sq)
    wb = w0.conjugate()
    r = [cmath.sqrt(wb), cmath.sqrt(w0)]
    ansatz = np.array([
        np.array([1, -1j, 1j, -1]) / (2 * r[0]),
        0.5 * r[0] * np.array([-1j, 1, 1, -1j]),
        np.array([1, 1j, -1j, -1]) / (2 * r[1]),
        0.5 * r[1] * np.array([1j, 1, 1, 1j]),
    ])
    rm = math.sqrt(params.m)
    return np.diag([1.0 / rm, rm, 1.0 / rm, rm]) @ ansatz


def _audit_separation_complex(params: Parameters, beta: float = 0.25 * math.pi) -> list[AuditEntry]:
    _require(params, Regime.COMPLEX)
    fwd = complex_canonical_map(params, beta)
    pi = bracket_matrix(params, beta).pi
    hc = complex_canonical_hamiltonian_form(params)
    res_can = _max_abs(fwd @ pi @ fwd.T - STANDARD_FORM)
    res_h = _max_abs(fwd.T @ hc @ fwd - hamiltonian_form(params, beta))
    worst = max(res_can, res_h)
    entries = [AuditEntry("complex-canonical-coordinates", _verdict(worst, PULLBACK_TOL), worst,
                          details={"canonicity": res_can, "hamiltonian": res_h, "beta": beta})]
    can, pull, fits = {}, {}, {}
    for branch in (1, -1):
        t = separation_map_complex(params, branch)
        can[branch] = _max_abs(t @ STANDARD_FORM @ t.T - STANDARD_FORM)
        w0 = branch * cmath.sqrt(mode_frequencies(params).w0_sq)
        printed = -0.5 * (w0 + w0.conjugate()) * _rotation_form() + 0.5j * (w0 - w0.conjugate()) * _dilatation_form()
        pulled = t.T @ hc @ t
        pull[branch] = _max_abs(pulled - printed)
        fitted, fres = _fit_on_basis(pulled, {"L": _rotation_form(), "D": _dilatation_form()})
        fits[branch] = {"coefficients": _jsonable(fitted), "fit_residual": fres}
    worst_can = max(can.values())
    entries.append(AuditEntry("complex-separation-canonicity", _verdict(worst_can, CANONICITY_TOL), worst_can,
                              details={"branch+": can[1], "branch-": can[-1]}))
    best = min(pull.values())
    entries.append(AuditEntry(
        "complex-separated-hamiltonian", _verdict(best, PULLBACK_TOL), best,
        details={"branch+": pull[1], "branch-": pull[-1], "fits": {str(k): v for k, v in fits.items()},
                 "mass_rescaled": params.m != 1.0},
    ))
    comm = _max_abs(_form_bracket(_rotation_form(), _dilatation_form()))
    entries.append(AuditEntry("complex-rotation-dilatation-commute", _verdict(comm, PULLBACK_TOL), comm))
    return entries


# ---------------------------------------------------------------------------


def audit_determinant(params: Parameters, beta: float) -> AuditEntry:
    """Compare det Pi with the closed form ((w1^2 - w2^2) / (cos sin))^2."""
    chk = bracket_determinant(bracket_matrix(params, beta), params)
    closed_res = abs(chk.numeric - chk.closed_form) / abs(chk.closed_form)
    if chk.printed is None:
        return AuditEntry("bracket-determinant", _verdict(closed_res, 1e-10), closed_res,
                          details={"numeric": chk.numeric, "pfaffian_squared": chk.closed_form})
    w1, w2 = mode_frequencies(params).pair
    factor = 1.0 / (4.0 * params.m**4 * params.lam**4 * (w1 - w2) ** 2)
    factor_res = abs(chk.numeric / chk.printed - factor) / factor
    return AuditEntry(
        "bracket-determinant",
        _verdict(max(closed_res, factor_res), 1e-10, corrected=chk.discrepancy),
        max(closed_res, factor_res),
        printed={"determinant": chk.printed},
        corrected={"determinant": chk.numeric, "factor": factor} if chk.discrepancy else None,
        details={"pfaffian_squared": chk.closed_form, "ratio": chk.ratio_to_printed, "beta": wrap_beta(beta)},
    )


def run_audit(params: Parameters, beta: float = 0.25 * math.pi) -> AuditReport:
    """All audits that apply to the regime of ``params``.

    ``beta`` feeds the determinant check; the normal-coordinate audits use
    ``-pi/4`` (and ``-pi/3`` for the extra mode) since they live in the
    sector (-pi/2, 0).
    """
    regime = classify_regime(params)
    if regime is Regime.HARMONIC:
        return AuditReport(())
    entries = [audit_determinant(params, beta)]
    if regime is Regime.OSCILLATORY:
        entries += [
            audit_tilde_canonicity(params),
            audit_ostrogradski_hamiltonian(params, -0.25 * math.pi),
            audit_beta_lagrangian(params, -math.pi / 3.0),
            audit_extra_mode(params, -math.pi / 3.0),
            audit_embedding(params),
        ]
    elif regime in (Regime.DEGENERATE, Regime.COMPLEX):
        entries += audit_separation(params)
    return AuditReport(tuple(entries))
