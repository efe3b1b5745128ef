"""Command-line entry point ``pu-osc``.

Exit codes: 0 ok, 1 usage, 2 invalid parameters, 3 inadmissible beta,
4 audit failure.  Every number printed comes from a library call.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .audit import extra_mode_frequency, run_audit
from .darboux import canonical_hamiltonian, darboux_map, hamiltonian_signature, to_canonical, verify_canonicity
from .dynamics import Method, cross_check, drift_report, integral_names, integrate_jet, monitored_series
from .invariants import hamiltonian_value, integrals_of_motion, rational_ratio, third_integral
from .poisson import (
    SingularBeta,
    bracket_determinant,
    bracket_matrix,
    mode_combination_brackets,
    sector_of,
    sectors,
)
from .regime import (
    InvalidParameters,
    Parameters,
    Regime,
    UnsupportedRegime,
    classify_regime,
    mode_frequencies,
)

EXIT_OK, EXIT_USAGE, EXIT_PARAMS, EXIT_BETA, EXIT_AUDIT = 0, 1, 2, 3, 4
OUTPUT_DIR_ENV = "PAIS_UHLENBECK_OUTPUT_DIR"
DEFAULT_BETA = math.pi / 4
FLOAT_FMT = "%.17g"

_SCENARIO_ALIASES = {"omega2": "omega_sq", "lambda": "lam", "omega_sq": "omega_sq", "lam": "lam", "m": "m"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return FLOAT_FMT % x


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True) + "\n"


def load_scenario(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("scenario must be a JSON object")
    params = data.get("parameters", {})
    flat = dict(data)
    for k, v in params.items():
        flat.setdefault(k, v)
    return flat


def _resolve(args, scenario: dict) -> dict:
    """Merge scenario fields with command-line flags (flags win)."""
    cfg = {}
    for key, val in scenario.items():
        cfg[_SCENARIO_ALIASES.get(key, key)] = val
    for key in ("m", "omega_sq", "lam", "beta", "t_end", "dt", "method", "sample_every", "n", "jet"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _params(cfg: dict) -> Parameters:
    missing = [k for k in ("m", "omega_sq", "lam") if k not in cfg]
    if missing:
        raise UsageError(f"missing parameters: {', '.join(missing)}")
    try:
        return Parameters(float(cfg["m"]), float(cfg["omega_sq"]), float(cfg["lam"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameters):
            raise
        raise InvalidParameters(str(exc)) from exc


def _beta(cfg: dict) -> float:
    return float(cfg.get("beta", DEFAULT_BETA))


def _jet(cfg: dict) -> np.ndarray:
    jet = cfg.get("jet", cfg.get("initial"))
    if jet is None:
        raise UsageError("an initial jet (q, dq, d2q, d3q) is required")
    arr = np.asarray(jet, dtype=float).reshape(-1)
    if arr.shape != (4,):
        raise UsageError("the jet needs exactly four components")
    return arr


def _output_dir(args, cfg: dict) -> Path:
    chosen = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or cfg.get("output_dir") or "."
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _mode_summary(params: Parameters) -> dict:
    md = mode_frequencies(params)
    out = {"regime": md.regime.value, "case": md.regime.roman}
    if md.w0_sq is not None:
        out["w0_sq"] = {"re": md.w0_sq.real, "im": md.w0_sq.imag}
    if md.w1_sq is not None:
        out["w1_sq"] = md.w1_sq
        out["w2_sq"] = md.w2_sq
    if params.lam != 0.0 and md.w1_sq is not None:
        out["sum_identity_residual"] = abs(params.lam * (md.w1_sq + md.w2_sq) - 1.0)
        out["product_identity_residual"] = abs(params.lam * md.w1_sq * md.w2_sq - params.omega_sq)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args, cfg) -> int:
    params = _params(cfg)
    sys.stdout.write(_dump({"parameters": vars(params), **_mode_summary(params)}))
    return EXIT_OK


def cmd_integrals(args, cfg) -> int:
    params = _params(cfg)
    x = _jet(cfg)
    k = integrals_of_motion(params, x)
    out = dict(zip(integral_names(params), map(float, k)))
    if "beta" in cfg:
        out["H"] = hamiltonian_value(params, _beta(cfg), x)
        out["beta"] = _beta(cfg)
    if classify_regime(params) is Regime.OSCILLATORY:
        ratio = rational_ratio(params)
        if ratio is not None:
            out["C"] = third_integral(params, ratio, x)
            out["ratio"] = [ratio.k, ratio.l]
    sys.stdout.write(_dump(out))
    return EXIT_OK


def cmd_brackets(args, cfg) -> int:
    params = _params(cfg)
    beta = _beta(cfg)
    bm = bracket_matrix(params, beta)
    det = bracket_determinant(bm, params)
    out = {
        "beta": bm.beta,
        "sector": sector_of(beta, bm.regime).label,
        "tensor": bm.pi,
        "q_dq": bm.a,
        "q_d3q": -bm.b,
        "d2q_d3q": bm.d,
        "determinant": {"numeric": det.numeric, "pfaffian_squared": det.closed_form, "closed_form_printed": det.printed},
    }
    if bm.regime is not Regime.DEGENERATE:
        out["mode_combination_brackets"] = mode_combination_brackets(params, beta)
    sys.stdout.write(_dump(out))
    return EXIT_OK


def cmd_darboux(args, cfg) -> int:
    params = _params(cfg)
    beta = _beta(cfg)
    dm = darboux_map(params, beta)
    out = {
        "beta": beta,
        "sector": dm.sector.label,
        "forward": dm.forward,
        "hamiltonian_form": dm.hamiltonian_form,
        "signature": hamiltonian_signature(dm.hamiltonian_form),
        "canonicity_residual": verify_canonicity(params, beta).residual,
    }
    if "jet" in cfg or "initial" in cfg:
        x = _jet(cfg)
        z = to_canonical(params, beta, x)
        out["canonical"] = z
        out["H_jet"] = hamiltonian_value(params, beta, x)
        out["H_canonical"] = canonical_hamiltonian(params, beta, z)
    sys.stdout.write(_dump(out))
    return EXIT_OK


def cmd_simulate(args, cfg) -> int:
    params = _params(cfg)
    beta = _beta(cfg)
    sector_of(beta, classify_regime(params))
    x0 = _jet(cfg)
    t_end = float(cfg.get("t_end", 10.0))
    dt = float(cfg.get("dt", 1e-3))
    method = Method(cfg.get("method", "rk4"))
    every = int(cfg.get("sample_every", 10))
    traj = integrate_jet(params, x0, t_end, dt, method, every)
    report = drift_report(params, beta, traj)
    check = cross_check(params, beta, x0, t_end, dt, method, every)
    series = monitored_series(params, beta, traj.states)

    outdir = _output_dir(args, cfg)
    stem = cfg.get("name", "trajectory")
    csv_path = outdir / f"{stem}.csv"
    json_path = outdir / f"{stem}_drift.json"
    names = list(series)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "q", "dq", "d2q", "d3q", *names])
        for i, t in enumerate(traj.times):
            w.writerow([_fmt(t), *(_fmt(v) for v in traj.states[i]), *(_fmt(series[n][i]) for n in names)])
    summary = {
        "parameters": vars(params),
        "regime": classify_regime(params).value,
        "beta": beta,
        "method": method.value,
        "dt": traj.dt,
        "t_end": t_end,
        "samples": len(traj),
        "drift": report.drift,
        "scaled_drift": report.scaled_drift,
        "cross_check": check,
        "files": {"trajectory": csv_path.name},
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(_dump(summary))
    sys.stdout.write(_dump({"trajectory": str(csv_path), "report": str(json_path), "max_drift": report.max_drift}))
    return EXIT_OK


def _grid_checks(params: Parameters, n: int) -> dict:
    regime = classify_regime(params)
    canon, mc, det = 0.0, 0.0, 0.0
    for s in sectors(regime):
        for b in s.grid(n):
            canon = max(canon, verify_canonicity(params, b).residual)
            chk = bracket_determinant(bracket_matrix(params, b))
            det = max(det, abs(chk.numeric - chk.closed_form) / abs(chk.closed_form))
            if regime is not Regime.DEGENERATE:
                mc = max(mc, float(np.max(mode_combination_brackets(params, b))))
    out = {"canonicity": canon, "determinant_vs_pfaffian": det}
    if regime is not Regime.DEGENERATE:
        out["mode_combination_brackets"] = mc
    rng = np.random.default_rng(0)
    x = rng.standard_normal((100, 4))
    b0 = sectors(regime)[0].grid(3)[1]
    h1 = hamiltonian_value(params, b0, x)
    h2 = canonical_hamiltonian(params, b0, to_canonical(params, b0, x))
    out["energy_consistency"] = float(np.max(np.abs(h1 - h2) / np.maximum(1.0, np.abs(h1))))
    return out


_CHECK_TOL = {"canonicity": 1e-12, "determinant_vs_pfaffian": 1e-10,
              "mode_combination_brackets": 1e-14, "energy_consistency": 1e-12}


def cmd_verify(args, cfg) -> int:
    params = _params(cfg)
    regime = classify_regime(params)
    if regime is Regime.HARMONIC:
        raise UnsupportedRegime("nothing to verify in the harmonic regime")
    beta = _beta(cfg)
    sector_of(beta, regime)
    checks = _grid_checks(params, int(cfg.get("n", 50)))
    passed = {k: v < _CHECK_TOL[k] for k, v in checks.items()}
    report = run_audit(params, beta)
    out = {"parameters": vars(params), "regime": regime.value, "checks": checks,
           "checks_passed": passed, "audit": report.to_dict()}
    sys.stdout.write(_dump(out))
    return EXIT_OK if report.ok else EXIT_AUDIT


def scan_rows(params: Parameters, n: int) -> list[dict]:
    regime = classify_regime(params)
    rows = []
    for k in range(n):
        beta = -math.pi + 2.0 * math.pi * k / n
        row = {"beta": beta}
        try:
            dm = darboux_map(params, beta)
        except SingularBeta:
            row["status"] = "excluded"
            rows.append(row)
            continue
        bm = bracket_matrix(params, beta)
        delta = complex(dm.delta)
        row.update(status="ok", sector=dm.sector.label, q_dq=bm.a, q_d3q=-bm.b, d2q_d3q=bm.d,
                   delta_re=delta.real, delta_im=delta.imag,
                   signature=hamiltonian_signature(dm.hamiltonian_form))
        if regime is Regime.OSCILLATORY and -math.pi / 2 < beta < 0:
            extra = extra_mode_frequency(params, beta)
            if extra is not None:
                row["extra_mode_sq"] = extra
        rows.append(row)
    return rows


_SCAN_COLUMNS = ["beta", "status", "sector", "q_dq", "q_d3q", "d2q_d3q", "delta_re", "delta_im",
                 "extra_mode_sq", "signature"]


def cmd_scan_beta(args, cfg) -> int:
    params = _params(cfg)
    n = int(cfg.get("n", 100))
    if n < 1:
        raise UsageError("the beta grid is empty")
    rows = scan_rows(params, n)
    outdir = _output_dir(args, cfg)
    stem = f"{cfg['name']}_beta_scan" if "name" in cfg else "beta_scan"
    path = outdir / f"{stem}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_SCAN_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) if isinstance(r.get(c), float) else r.get(c, "") for c in _SCAN_COLUMNS])
    sys.stdout.write(_dump({"scan": str(path), "rows": len(rows),
                            "excluded_rows": sum(r["status"] == "excluded" for r in rows)}))
    return EXIT_OK


_COMMANDS = {
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "scan-beta": cmd_scan_beta,
    "integrals": cmd_integrals,
    "brackets": cmd_brackets,
    "darboux": cmd_darboux,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pu-osc", description="Hamiltonian structures of the quartic oscillator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", help="JSON scenario file; flags override its fields")
        p.add_argument("--m", type=float)
        p.add_argument("--omega2", dest="omega_sq", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        if name != "classify":
            p.add_argument("--beta", type=float)
        if name in ("integrals", "darboux", "simulate"):
            p.add_argument("--jet", type=float, nargs=4, metavar=("Q", "DQ", "D2Q", "D3Q"))
        if name == "simulate":
            p.add_argument("--t-end", dest="t_end", type=float)
            p.add_argument("--dt", type=float)
            p.add_argument("--method", choices=["rk4", "exact"])
            p.add_argument("--sample-every", dest="sample_every", type=int)
        if name in ("simulate", "scan-beta"):
            p.add_argument("--output-dir", dest="output_dir")
        if name in ("scan-beta", "verify"):
            p.add_argument("--n", type=int, help="grid size")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args, load_scenario(args.scenario))
        return _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"pu-osc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularBeta as exc:
        print(f"pu-osc: inadmissible beta: {exc}", file=sys.stderr)
        return EXIT_BETA
    except (InvalidParameters, UnsupportedRegime) as exc:
        print(f"pu-osc: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except ValueError as exc:
        print(f"pu-osc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
