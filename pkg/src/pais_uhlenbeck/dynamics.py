"""Time evolution in jet space and in Darboux coordinates.

The system is linear, so every one-step method used here is itself a fixed
linear map.  Integrators build that one-step matrix once and apply it
repeatedly; this is the same arithmetic as stepping the vector field, minus
the Python overhead per stage.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .darboux import STANDARD_FORM, darboux_map
from .invariants import hamiltonian_form, hamiltonian_value, integral_forms, integrals_of_motion, rational_ratio, third_integral
from .poisson import sector_of
from .regime import (
    JetState,
    Parameters,
    Regime,
    UnsupportedRegime,
    as_vector,
    classify_regime,
    companion_matrix,
    mode_matrix,
)

DEFAULT_DT = 1e-3
DEFAULT_SAMPLE_EVERY = 10

# fourth-order triple-jump weights
_Y1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_Y0 = -(2.0 ** (1.0 / 3.0)) * _Y1


class Method(str, Enum):
    RK4 = "rk4"
    LEAPFROG = "leapfrog"
    YOSHIDA4 = "yoshida4"
    IMPLICIT_MIDPOINT = "implicit_midpoint"
    EXACT = "exact"


class IncompatibleMethod(ValueError):
    """The requested integrator cannot be used with this Hamiltonian."""


@dataclass(frozen=True)
class Trajectory:
    """Sampled states on a uniform time grid.

    ``states`` has shape ``(len(times),) + batch + (4,)``.  ``kind`` is
    ``"jet"`` or ``"canonical"``; canonical trajectories remember ``beta``.
    """

    times: np.ndarray
    states: np.ndarray
    method: Method
    dt: float
    kind: str = "jet"
    beta: float | None = None
    wall_time: float = 0.0

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states have different lengths")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be increasing")

    def __len__(self) -> int:
        return self.times.shape[0]

    def jet_states(self) -> list[JetState]:
        if self.kind != "jet" or self.states.ndim != 2:
            raise ValueError("only single jet trajectories convert to JetState lists")
        return [JetState.from_array(x) for x in self.states]


@dataclass(frozen=True)
class DriftReport:
    """Maximum drift of each monitored quantity.

    ``drift`` is relative to the initial value (absolute where that value is
    zero).  ``scaled_drift`` divides by ``|A| * max|x(t)|^2`` instead, which
    stays meaningful when the state grows exponentially.
    """

    drift: dict[str, float]
    scaled_drift: dict[str, float]
    series: dict[str, np.ndarray] = field(repr=False)
    wall_time: float = 0.0

    @property
    def max_drift(self) -> float:
        return max(self.drift.values(), default=0.0)


def _check_horizon(t_end: float, dt: float, sample_every: int) -> int:
    if not (math.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if int(sample_every) < 1:
        raise ValueError("sample_every must be >= 1")
    return max(1, int(math.ceil(t_end / dt - 1e-9)))


def _jet_dynamics(params: Parameters) -> np.ndarray:
    if classify_regime(params) is Regime.HARMONIC:
        raise UnsupportedRegime("the harmonic regime has no fourth-order jet dynamics")
    return companion_matrix(params)


def exact_propagator(params: Parameters, dt: float) -> np.ndarray:
    """Matrix advancing any jet exactly by ``dt``, built from the mode functions."""
    _jet_dynamics(params)
    if not math.isfinite(dt):
        raise ValueError("dt must be finite")
    m0 = mode_matrix(params, 0.0)
    return np.linalg.solve(m0.T, mode_matrix(params, dt).T).T


def rk4_step_matrix(a: np.ndarray, h: float) -> np.ndarray:
    ha = h * a
    eye = np.eye(a.shape[0])
    return eye + ha @ (eye + ha @ (eye / 2.0 + ha @ (eye / 6.0 + ha / 24.0)))


def _cayley(a: np.ndarray, h: float) -> np.ndarray:
    eye = np.eye(a.shape[0])
    return np.linalg.solve(eye - 0.5 * h * a, eye + 0.5 * h * a)


def _sample_indices(n: int, sample_every: int) -> np.ndarray:
    idx = list(range(0, n + 1, sample_every))
    if idx[-1] != n:
        idx.append(n)
    return np.asarray(idx)


def _run(step: np.ndarray, x0: np.ndarray, n: int, sample_every: int) -> tuple[np.ndarray, np.ndarray]:
    idx = _sample_indices(n, sample_every)
    out = np.empty((len(idx),) + x0.shape)
    out[0] = x0
    x = x0.copy()
    st = step.T
    j = 1
    for k in range(1, n + 1):
        x = x @ st
        if k == idx[j]:
            out[j] = x
            j += 1
    return idx, out


def integrate_jet(
    params: Parameters,
    jet0,
    t_end: float,
    dt: float = DEFAULT_DT,
    method: Method | str = Method.RK4,
    sample_every: int = DEFAULT_SAMPLE_EVERY,
) -> Trajectory:
    """Integrate the fourth-order equation on (q, q', q'', q''').

    ``jet0`` may be a :class:`JetState` or an array with trailing dimension 4
    (a batch is integrated in lockstep).  The step is shrunk slightly so that
    the grid lands exactly on ``t_end``.  ``method`` is ``rk4`` or ``exact``;
    the exact route evaluates the propagator at each sample time directly.
    """
    method = Method(method)
    a = _jet_dynamics(params)
    n = _check_horizon(t_end, dt, sample_every)
    h = t_end / n
    x0 = as_vector(jet0).astype(float)
    start = time.perf_counter()
    if method is Method.RK4:
        idx, states = _run(rk4_step_matrix(a, h), x0, n, sample_every)
    elif method is Method.EXACT:
        idx = _sample_indices(n, sample_every)
        m0 = mode_matrix(params, 0.0)
        coeffs = np.linalg.solve(m0, x0.reshape(-1, 4).T)  # (4, batch)
        mt = mode_matrix(params, idx * h)  # (samples, 4, 4)
        states = np.einsum("sij,jb->sbi", mt, coeffs).reshape((len(idx),) + x0.shape)
        states[0] = x0
    else:
        raise IncompatibleMethod(f"jet-space integration supports rk4 and exact, not {method.value}")
    return Trajectory(idx * h, states, method, h, "jet", None, time.perf_counter() - start)


def canonical_generator(params: Parameters, beta: float) -> np.ndarray:
    """Matrix B with dz/dt = B z for the quadratic Hamiltonian in Darboux coordinates."""
    form = darboux_map(params, beta).hamiltonian_form
    return STANDARD_FORM @ (form + form.T)


def is_separable(form: np.ndarray) -> bool:
    """True when the form has no position-momentum products."""
    qi, pi = [0, 2], [1, 3]
    return not np.any(form[np.ix_(qi, pi)]) and not np.any(form[np.ix_(pi, qi)])


def _leapfrog_matrix(form: np.ndarray, h: float) -> np.ndarray:
    # kick-drift-kick on z = (q1, p1, q2, p2)
    sym = form + form.T
    qi, pi = [0, 2], [1, 3]
    kick = np.eye(4)
    kick[np.ix_(pi, qi)] = -0.5 * h * sym[np.ix_(qi, qi)]
    drift = np.eye(4)
    drift[np.ix_(qi, pi)] = h * sym[np.ix_(pi, pi)]
    return kick @ drift @ kick


def integrate_canonical(
    params: Parameters,
    beta: float,
    canon0,
    t_end: float,
    dt: float = DEFAULT_DT,
    method: Method | str | None = None,
    sample_every: int = DEFAULT_SAMPLE_EVERY,
) -> Trajectory:
    """Integrate Hamilton's equations for H(beta) in Darboux coordinates.

    The default is leapfrog when the Hamiltonian is separable, implicit
    midpoint otherwise.  Leapfrog and its fourth-order composition refuse
    non-separable forms.  ``exact`` conjugates the jet propagator by the
    Darboux map.
    """
    regime = classify_regime(params)
    sector_of(beta, regime)
    dm = darboux_map(params, beta)
    separable = is_separable(dm.hamiltonian_form)
    if method is None:
        method = Method.LEAPFROG if separable else Method.IMPLICIT_MIDPOINT
    method = Method(method)
    n = _check_horizon(t_end, dt, sample_every)
    h = t_end / n
    z0 = as_vector(canon0).astype(float)
    start = time.perf_counter()
    if method in (Method.LEAPFROG, Method.YOSHIDA4) and not separable:
        raise IncompatibleMethod(f"{method.value} needs a separable Hamiltonian")
    if method is Method.EXACT:
        idx = _sample_indices(n, sample_every)
        x0 = z0 @ dm.inverse.T
        jets = integrate_jet(params, x0, t_end, dt, Method.EXACT, sample_every).states
        states = jets @ dm.forward.T
        states[0] = z0
        return Trajectory(idx * h, states, method, h, "canonical", beta, time.perf_counter() - start)
    if method is Method.LEAPFROG:
        step = _leapfrog_matrix(dm.hamiltonian_form, h)
    elif method is Method.YOSHIDA4:
        f = dm.hamiltonian_form
        outer = _leapfrog_matrix(f, _Y1 * h)
        step = outer @ _leapfrog_matrix(f, _Y0 * h) @ outer
    elif method is Method.IMPLICIT_MIDPOINT:
        step = _cayley(canonical_generator(params, beta), h)
    else:
        step = rk4_step_matrix(canonical_generator(params, beta), h)
    idx, states = _run(step, z0, n, sample_every)
    return Trajectory(idx * h, states, method, h, "canonical", beta, time.perf_counter() - start)


def cross_check(
    params: Parameters,
    beta: float,
    jet0,
    t_end: float,
    dt: float = DEFAULT_DT,
    method: Method | str = Method.RK4,
    sample_every: int = DEFAULT_SAMPLE_EVERY,
) -> float:
    """Sup-norm gap between the jet flow and the mapped-back canonical flow."""
    method = Method(method)
    jet_method = Method.EXACT if method is Method.EXACT else Method.RK4
    dm = darboux_map(params, beta)
    x0 = as_vector(jet0).astype(float)
    jt = integrate_jet(params, x0, t_end, dt, jet_method, sample_every)
    ct = integrate_canonical(params, beta, x0 @ dm.forward.T, t_end, dt, method, sample_every)
    back = ct.states @ dm.inverse.T
    return float(np.max(np.abs(back - jt.states), initial=0.0))


def integral_names(params: Parameters) -> tuple[str, str]:
    return {
        Regime.OSCILLATORY: ("J1", "J2"),
        Regime.HYPERBOLIC: ("I1", "I2"),
        Regime.DEGENERATE: ("I1", "I2"),
        Regime.COMPLEX: ("ReJ1", "ImJ1"),
    }[classify_regime(params)]


def trajectory_jets(params: Parameters, trajectory: Trajectory) -> np.ndarray:
    if trajectory.kind == "jet":
        return trajectory.states
    return trajectory.states @ darboux_map(params, trajectory.beta).inverse.T


def monitored_series(params: Parameters, beta: float | None, jets: np.ndarray) -> dict[str, np.ndarray]:
    """Integrals, H(beta) and, for commensurate frequencies, the phase integral C."""
    regime = classify_regime(params)
    k = integrals_of_motion(params, jets)
    n1, n2 = integral_names(params)
    out = {n1: k[..., 0], n2: k[..., 1]}
    if beta is not None:
        out["H"] = np.asarray(hamiltonian_value(params, beta, jets))
    if regime is Regime.OSCILLATORY:
        ratio = rational_ratio(params)
        if ratio is not None:
            out["C"] = np.asarray(third_integral(params, ratio, jets))
    return out


def _relative(series: np.ndarray) -> float:
    v0 = series[0]
    dev = np.abs(series - v0)
    denom = np.where(np.abs(v0) > 0, np.abs(v0), 1.0)
    return float(np.max(dev / denom, initial=0.0))


def drift_report(params: Parameters, beta: float | None, trajectory: Trajectory) -> DriftReport:
    """Drift of every monitored quantity along ``trajectory``.

    The phase integral C is bounded by one, so its drift is reported in
    absolute terms.
    """
    jets = trajectory_jets(params, trajectory)
    series = monitored_series(params, beta, jets)
    a1, a2 = integral_forms(params)
    forms = dict(zip(integral_names(params), (a1, a2)))
    if "H" in series:
        forms["H"] = hamiltonian_form(params, beta)
    size = np.max(np.sum(jets**2, axis=-1), axis=0)
    drift, scaled = {}, {}
    for name, s in series.items():
        dev = np.abs(s - s[0])
        if name == "C":
            drift[name] = float(np.max(dev, initial=0.0))
            scaled[name] = drift[name]
            continue
        drift[name] = _relative(s)
        norm = np.linalg.norm(forms[name], 2) * size
        scaled[name] = float(np.max(np.max(dev, axis=0) / np.where(norm > 0, norm, 1.0), initial=0.0))
    return DriftReport(drift, scaled, series, trajectory.wall_time)
