"""Alternative Hamiltonian structures for the fourth-order oscillator
lam q'''' + q'' + w^2 q = 0: regimes, integrals, brackets, Darboux maps,
time evolution and numeric audits of the printed transformations."""
from .audit import AuditReport, AuditStatus, run_audit
from .darboux import CanonicalState, darboux_map, from_canonical, to_canonical
from .dynamics import Method, Trajectory, cross_check, drift_report, exact_propagator, integrate_canonical, integrate_jet
from .invariants import hamiltonian_value, integrals_of_motion, rational_ratio, third_integral
from .poisson import SingularBeta, bracket_matrix, sector_of, sectors
from .regime import (
    InvalidParameters,
    JetState,
    Parameters,
    Regime,
    UnsupportedRegime,
    classify_regime,
    exact_solution,
    fit_mode_coefficients,
    mode_frequencies,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport", "AuditStatus", "CanonicalState", "InvalidParameters", "JetState", "Method",
    "Parameters", "Regime", "SingularBeta", "Trajectory", "UnsupportedRegime", "bracket_matrix",
    "classify_regime", "cross_check", "darboux_map", "drift_report", "exact_propagator",
    "exact_solution", "fit_mode_coefficients", "from_canonical", "hamiltonian_value",
    "integrals_of_motion", "integrate_canonical", "integrate_jet", "mode_frequencies",
    "rational_ratio", "run_audit", "sector_of", "sectors", "third_integral", "to_canonical",
]
