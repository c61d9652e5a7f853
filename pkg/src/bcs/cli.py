"""Command-line front end.

Each subcommand reads a JSON run config, dispatches to the library, and
prints a RunReport as JSON with stable key order.  ``--out`` writes the
command's primary artifact: a CSV table where the contract names one
(m3-profile, tc0, criterion mu sweeps), otherwise a copy of the report.
Exit code 0 means every enforced check passed; 1 means at least one
failed; 2 means the config never validated.  Observational checks are
reported but never affect the exit code.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from . import __version__
from .boundary3d import (NEUMANN, TABLE1_REFERENCE, criterion, m3_profile,
                         normalize_bc, table1_values)
from .bs_solver import SolverError, tc0
from .diagnostics import dt_form_d1, dt_form_d2, fit_growth
from .kernels import KernelParams, m_mu
from .potentials import RadialPotential, e_mu, from_config, to_config, vmu_spectrum
from .quad import QuadratureError


class ConfigError(ValueError):
    """A run configuration failed schema validation."""


@dataclass
class RunReport:
    """Outcome of one CLI command: inputs echoed, results, checks, timing.

    Everything except wall_time_s is a pure function of the config and the
    library version.
    """

    command: str
    inputs: dict
    results: dict
    checks: list
    error_estimates: dict
    wall_time_s: float
    version: str = __version__

    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks if c["enforced"])

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def _check(name: str, passed: bool, enforced: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "enforced": enforced,
            "detail": detail}


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt17(c) for c in row])


def _write_json(path: str, report: RunReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())


def _fanout(fn, items, threads: int) -> list:
    """Map fn over items, optionally through a thread pool, in input order."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# Per-command config schema: (required keys, command-specific optional keys).
# "out", "tol" and "threads" are accepted everywhere.
_COMMON_KEYS = ("out", "tol", "threads")
_SCHEMAS = {
    "table1": ((), ()),
    "m3-profile": (("bc", "x_max", "step"), ()),
    "criterion": (("potential", "bc"), ("mu", "mu_sweep")),
    "tc0": (("potential", "mu", "lambdas"), ("t_min_factor", "t_max_factor")),
    "dt-growth": (("potential", "mu", "t_factors"), ()),
    "vmu-spectrum": (("potential", "mu", "ell_max"), ()),
}


def _checked_keys(command: str, cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    required, optional = _SCHEMAS[command]
    allowed = set(required) | set(optional) | set(_COMMON_KEYS)
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {unknown}")
    missing = sorted(set(required) - set(cfg))
    if missing:
        raise ConfigError(f"missing config keys for {command}: {missing}")


def _real(cfg: dict, key: str, *, positive: bool = False,
          nonnegative: bool = False, default=None):
    if key not in cfg or cfg[key] is None:
        return default
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) \
            or not math.isfinite(val):
        raise ConfigError(f"config key {key!r} must be a finite number")
    val = float(val)
    if positive and not val > 0.0:
        raise ConfigError(f"config key {key!r} must be positive")
    if nonnegative and val < 0.0:
        raise ConfigError(f"config key {key!r} must be nonnegative")
    return val


def _real_list(cfg: dict, key: str, *, positive: bool = False) -> list:
    val = cfg.get(key)
    if not isinstance(val, (list, tuple)) or not val:
        raise ConfigError(f"config key {key!r} must be a nonempty list of numbers")
    out = []
    for x in val:
        if isinstance(x, bool) or not isinstance(x, (int, float)) \
                or not math.isfinite(x):
            raise ConfigError(f"config key {key!r} must hold finite numbers")
        if positive and not x > 0.0:
            raise ConfigError(f"config key {key!r} must hold positive numbers")
        out.append(float(x))
    return out


def _threads(cfg: dict) -> int:
    val = cfg.get("threads", 1)
    if isinstance(val, bool) or not isinstance(val, int) or val < 1:
        raise ConfigError("config key 'threads' must be a positive integer")
    return val


def _bc(cfg: dict) -> str:
    try:
        return normalize_bc(cfg["bc"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _potential(cfg: dict) -> RadialPotential:
    sub = cfg.get("potential")
    if not isinstance(sub, dict):
        raise ConfigError("config key 'potential' must be an object")
    try:
        return from_config(sub)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_table1(config: dict | None = None, funcs=None) -> RunReport:
    """Recompute every populated profile-table cell and compare to reference.

    ``tol`` is the tolerance on values; first and second derivatives get
    10x and 100x.  ``funcs`` substitutes the four term functions, letting
    the self-test inject a corrupted term and watch the right cells fail.
    """
    cfg = dict(config or {})
    _checked_keys("table1", cfg)
    tol = _real(cfg, "tol", positive=True, default=1e-6)
    threads = _threads(cfg)
    out = cfg.get("out")
    start = time.perf_counter()

    computed = table1_values(funcs)
    slot_tol = {"value": tol, "d1": 10.0 * tol, "d2": 100.0 * tol}
    cells = {}
    checks = []
    diffs = []
    for row, refs in TABLE1_REFERENCE.items():
        got = computed[row]
        cells[row] = {}
        for slot, ref, val in zip(("value", "d1", "d2"), refs, got):
            if ref is None:
                continue
            diff = abs(val - ref)
            diffs.append(diff)
            ok = diff <= slot_tol[slot]
            cells[row][slot] = {"computed": val, "reference": ref,
                                "abs_diff": diff, "tol": slot_tol[slot],
                                "passed": ok}
            checks.append(_check(f"{row}:{slot}", ok, True,
                                 f"|computed - reference| = {diff:.3e}"))

    inputs = {"tol": tol, "threads": threads, "out": out}
    report = RunReport("table1", inputs, {"cells": cells}, checks,
                       {"max_abs_diff": max(diffs)},
                       time.perf_counter() - start)
    if out:
        _write_json(out, report)
    return report


def cmd_m3_profile(config: dict) -> RunReport:
    """Sample the boundary profile on a uniform grid and write `x,m3` CSV.

    Neumann runs enforce the value 4 at x = 0 and a strictly negative
    sample beyond; the Dirichlet nonnegativity check only warns.  ``tol``
    is the slack on both (default 1e-6).
    """
    cfg = dict(config or {})
    _checked_keys("m3-profile", cfg)
    bc = _bc(cfg)
    x_max = _real(cfg, "x_max", positive=True)
    step = _real(cfg, "step", positive=True)
    tol = _real(cfg, "tol", positive=True, default=1e-6)
    threads = _threads(cfg)
    out = cfg.get("out")
    start = time.perf_counter()

    rows = m3_profile(x_max, step, bc, threads=threads)
    vals = [v for _, v in rows]
    checks = []
    if bc == NEUMANN:
        checks.append(_check(
            "neumann_value_at_zero", abs(vals[0] - 4.0) <= tol, True,
            f"m3(0) = {vals[0]!r}"))
        tail_min = min(vals[1:]) if len(vals) > 1 else math.inf
        checks.append(_check(
            "neumann_attains_negative", tail_min < 0.0, True,
            f"min over (0, x_max] = {tail_min!r}"))
    else:
        low = min(vals)
        checks.append(_check(
            "dirichlet_nonnegative", low >= -tol, False, f"min = {low!r}"))

    if out:
        _write_csv(out, ("x", "m3"), rows)
    inputs = {"bc": bc, "x_max": x_max, "step": step, "tol": tol,
              "threads": threads, "out": out}
    results = {"rows": [[x, v] for x, v in rows], "n_rows": len(rows)}
    return RunReport("m3-profile", inputs, results, checks, {},
                     time.perf_counter() - start)


def cmd_criterion(config: dict) -> RunReport:
    """Evaluate the half-space pairing criterion at one mu or over a sweep.

    Sweeps write a `mu,value,sign` CSV to ``out``; a single-mu run writes
    the report itself.  The sign verdict (including "inconclusive" for a
    value inside its own error bar) is a result, not a check, so the exit
    code stays 0.
    """
    cfg = dict(config or {})
    _checked_keys("criterion", cfg)
    V = _potential(cfg)
    if V.d != 3:
        raise ConfigError("the boundary criterion needs a d=3 potential")
    bc = _bc(cfg)
    if ("mu" in cfg) == ("mu_sweep" in cfg):
        raise ConfigError("criterion needs exactly one of 'mu' or 'mu_sweep'")
    tol = _real(cfg, "tol", positive=True)
    threads = _threads(cfg)
    out = cfg.get("out")
    inputs = {"potential": to_config(V), "bc": bc, "tol": tol,
              "threads": threads, "out": out}
    start = time.perf_counter()

    if "mu" in cfg:
        mu = _real(cfg, "mu", positive=True)
        rep = criterion(V, mu, bc)
        inputs["mu"] = mu
        results = {"mu": mu, "value": rep.value, "sign": rep.sign,
                   "per_term": dict(rep.per_term)}
        estimates = {"value_error_estimate": rep.error_estimate}
        report = RunReport("criterion", inputs, results, [], estimates,
                           time.perf_counter() - start)
        if out:
            _write_json(out, report)
        return report

    mus = _real_list(cfg, "mu_sweep", positive=True)
    reps = _fanout(lambda m: criterion(V, m, bc), mus, threads)
    inputs["mu_sweep"] = mus
    results = {"sweep": [{"mu": m, "value": r.value, "sign": r.sign}
                         for m, r in zip(mus, reps)]}
    estimates = {"max_value_error_estimate":
                 max(r.error_estimate for r in reps)}
    if out:
        _write_csv(out, ("mu", "value", "sign"),
                   [(m, r.value, r.sign) for m, r in zip(mus, reps)])
    return RunReport("criterion", inputs, results, [], estimates,
                     time.perf_counter() - start)


def cmd_tc0(config: dict) -> RunReport:
    """Critical temperatures over a coupling list, one CSV row per lambda.

    Solver failures are recorded per row and fail the run; so does any
    violation of monotonicity (larger lambda must give larger Tc).  ``tol``
    is the closure tolerance |lambda a_T - 1| passed to the solver.
    """
    cfg = dict(config or {})
    _checked_keys("tc0", cfg)
    V = _potential(cfg)
    if not V.is_nonnegative():
        raise ConfigError("tc0 needs a nonnegative potential")
    mu = _real(cfg, "mu", positive=True)
    lambdas = _real_list(cfg, "lambdas", positive=True)
    tol = _real(cfg, "tol", positive=True, default=1e-8)
    t_min_factor = _real(cfg, "t_min_factor", positive=True, default=1e-8)
    t_max_factor = _real(cfg, "t_max_factor", positive=True, default=1e3)
    threads = _threads(cfg)
    out = cfg.get("out")
    start = time.perf_counter()

    em = e_mu(V, mu)

    def solve(lam: float) -> dict:
        try:
            r = tc0(V, mu, V.d, lam, t_min_factor=t_min_factor,
                    t_max_factor=t_max_factor, tol=tol)
        except SolverError as exc:
            return {"lambda": lam, "error": str(exc)}
        emm = em * m_mu(KernelParams(T=r.T_c, mu=mu), V.d) * lam
        return {"lambda": lam, "Tc": r.T_c, "residual": r.closure,
                "e_mu_m_mu_lambda": emm}

    rows = _fanout(solve, lambdas, threads)
    checks = []
    for row in rows:
        checks.append(_check(f"solved:lambda={row['lambda']:g}",
                             "error" not in row, True,
                             row.get("error", "converged")))
    solved = [r for r in rows if "error" not in r]
    mono = all(a["Tc"] < b["Tc"]
               for i, a in enumerate(solved) for b in solved[i + 1:]
               if a["lambda"] < b["lambda"])
    checks.append(_check("tc_monotone_in_lambda", mono, True,
                         "larger coupling must raise Tc"))

    if out:
        _write_csv(out, ("lambda", "Tc", "residual", "e_mu_m_mu_lambda"),
                   [(r["lambda"], r["Tc"], r["residual"],
                     r["e_mu_m_mu_lambda"]) for r in solved])
    inputs = {"potential": to_config(V), "mu": mu, "lambdas": lambdas,
              "tol": tol, "t_min_factor": t_min_factor,
              "t_max_factor": t_max_factor, "threads": threads, "out": out}
    results = {"rows": rows, "e_mu": em}
    estimates = {"max_closure_residual":
                 max((r["residual"] for r in solved), default=None)}
    return RunReport("tc0", inputs, results, checks, estimates,
                     time.perf_counter() - start)


def cmd_dt_growth(config: dict) -> RunReport:
    """Boundary pairing form over a temperature sweep plus its growth fit.

    d = 1 potentials fit value ~ C/T, d = 2 fit C ln(mu/T)^3.  The fit
    quality check (worst relative deviation <= tol, default 0.25) is
    observational; the numbers themselves are the point.
    """
    cfg = dict(config or {})
    _checked_keys("dt-growth", cfg)
    V = _potential(cfg)
    if V.d not in (1, 2):
        raise ConfigError("dt-growth needs a d=1 or d=2 potential")
    mu = _real(cfg, "mu", positive=True)
    t_factors = _real_list(cfg, "t_factors", positive=True)
    if len(t_factors) < 3:
        raise ConfigError("config key 't_factors' needs at least three values")
    if len(set(t_factors)) != len(t_factors):
        raise ConfigError("config key 't_factors' must not repeat values")
    if V.d == 2 and max(t_factors) >= 1.0:
        raise ConfigError("d=2 growth fits need t_factors below 1 (T < mu)")
    tol = _real(cfg, "tol", positive=True, default=0.25)
    threads = _threads(cfg)
    out = cfg.get("out")
    start = time.perf_counter()

    form = dt_form_d1 if V.d == 1 else dt_form_d2
    model = "inverse_T" if V.d == 1 else "log_cubed"
    temps = [f * mu for f in t_factors]
    values = _fanout(lambda T: form(V, T, mu), temps, threads)
    fit = fit_growth(tuple(zip(temps, values)), model, mu=mu)

    checks = [_check("growth_fit_within_tol",
                     fit.max_relative_deviation <= tol, False,
                     f"max relative deviation {fit.max_relative_deviation:.3e}")]
    inputs = {"potential": to_config(V), "mu": mu, "t_factors": t_factors,
              "tol": tol, "threads": threads, "out": out}
    results = {"samples": [{"T": t, "value": v}
                           for t, v in zip(temps, values)],
               "fit": {"model": fit.model,
                       "fitted_constant": fit.fitted_constant,
                       "max_relative_deviation": fit.max_relative_deviation}}
    estimates = {"fit_max_relative_deviation": fit.max_relative_deviation}
    report = RunReport("dt-growth", inputs, results, checks, estimates,
                       time.perf_counter() - start)
    if out:
        _write_json(out, report)
    return report


def cmd_vmu_spectrum(config: dict) -> RunReport:
    """Angular components of the interaction on the Fermi surface.

    Reports v_0..v_ell_max and whether the ground component strictly
    dominates (margin ``tol``, default 0).  The verdict is observational:
    a potential is allowed to violate it.  ell_max = 0 leaves nothing to
    compare against and is rejected.
    """
    cfg = dict(config or {})
    _checked_keys("vmu-spectrum", cfg)
    V = _potential(cfg)
    if V.d not in (2, 3):
        raise ConfigError("vmu-spectrum needs a d=2 or d=3 potential")
    mu = _real(cfg, "mu", positive=True)
    ell_max = cfg.get("ell_max")
    if isinstance(ell_max, bool) or not isinstance(ell_max, int) or ell_max < 0:
        raise ConfigError("config key 'ell_max' must be a nonnegative integer")
    if ell_max == 0:
        raise ConfigError("insufficient data for the dominance verdict: "
                          "ell_max must be at least 1")
    tol = _real(cfg, "tol", nonnegative=True, default=0.0)
    threads = _threads(cfg)
    out = cfg.get("out")
    start = time.perf_counter()

    values = [float(v) for v in vmu_spectrum(V, mu, ell_max)]
    highest = max(values[1:])
    dominant = values[0] - highest > tol
    checks = [_check("ground_component_dominates", dominant, False,
                     f"v0 = {values[0]!r}, max higher = {highest!r}")]
    inputs = {"potential": to_config(V), "mu": mu, "ell_max": ell_max,
              "tol": tol, "threads": threads, "out": out}
    results = {"eigenvalues": values, "v0": values[0],
               "max_higher": highest, "nondegenerate": dominant}
    report = RunReport("vmu-spectrum", inputs, results, checks, {},
                       time.perf_counter() - start)
    if out:
        _write_json(out, report)
    return report


_COMMANDS = {
    "table1": cmd_table1,
    "m3-profile": cmd_m3_profile,
    "criterion": cmd_criterion,
    "tc0": cmd_tc0,
    "dt-growth": cmd_dt_growth,
    "vmu-spectrum": cmd_vmu_spectrum,
}

_HELP = {
    "table1": "check the profile-table values and derivatives",
    "m3-profile": "sample the boundary profile to CSV",
    "criterion": "evaluate the half-space pairing criterion",
    "tc0": "critical temperatures over a coupling sweep",
    "dt-growth": "boundary pairing form growth diagnostics",
    "vmu-spectrum": "Fermi-surface angular components of the interaction",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcs",
        description="Boundary superconductivity diagnostics for BCS kernels.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", help="path to a JSON run config")
        p.add_argument("--out", help="write the primary artifact here")
        p.add_argument("--tol", type=float,
                       help="override the command's tolerance")
        p.add_argument("--threads", type=int,
                       help="worker threads for sweeps")
    return parser


def _load_config(args: argparse.Namespace) -> dict:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    else:
        cfg = {}
    if args.out is not None:
        cfg["out"] = args.out
    if args.tol is not None:
        cfg["tol"] = args.tol
    if args.threads is not None:
        cfg["threads"] = args.threads
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _COMMANDS[args.command](_load_config(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(report.to_json())
    return 0 if report.passed() else 1


if __name__ == "__main__":
    sys.exit(main())
