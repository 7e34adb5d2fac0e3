"""``stockwise`` command line: solve, eval, simulate, fit.

Exit codes: 0 success, 2 input error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .config import ConfigError, load_config
from .constrained import solve_continuous, solve_discrete_lattice
from .demand import DemandHistoryError, fit_empirical, read_demand_history
from .exceptions import (
    BudgetExceeded,
    DomainError,
    Infeasible,
    LengthMismatch,
    NotContinuous,
    QuadratureFailure,
    StockwiseError,
    UnboundedQuantile,
)
from .fractile import critical_fractile, solve
from .oracle import brute_force_argmax_discrete, grid_argmax_continuous, simulate_profit
from .profit import Catalog, as_plan, expected_profit, expected_profit_terms

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3

SOLVER_ERRORS = (UnboundedQuantile, Infeasible, BudgetExceeded, QuadratureFailure)
ORACLE_LEVEL = 1 - 1e-6


class InputError(StockwiseError):
    pass


def _number(value: float):
    """Integers stay integers in the report; everything else is a float."""
    if isinstance(value, int):
        return value
    return float(value)


def _per_product(catalog: Catalog, plan, terms=None) -> list[dict]:
    rows = []
    for k, ((p, d), n) in enumerate(zip(catalog, plan)):
        row = {
            "name": p.name,
            "n_opt": _number(n),
            "fractile": critical_fractile(p),
            "cdf_at_n": float(d.cdf(n)),
        }
        if terms is not None:
            row["expected_term"] = terms[k]
        rows.append(row)
    return rows


def _lattice_bounds(catalog: Catalog, constraint) -> list[int]:
    bounds = []
    positive = all(a > 0 for a in constraint.coeffs)
    for (p, d), a in zip(catalog, constraint.coeffs):
        limit = d.support_max
        if positive:
            limit = min(limit, math.floor(constraint.rhs / a + 1e-9))
        if not math.isfinite(limit):
            raise InputError(
                f"product {p.name!r}: cannot bound the lattice search; "
                "use positive constraint coefficients or bounded demand"
            )
        bounds.append(max(int(limit), 0))
    return bounds


def _oracle_bounds(catalog: Catalog, plan, constraint) -> list[float]:
    bounds = []
    for k, ((p, d), n) in enumerate(zip(catalog, plan)):
        limit = d.support_max if d.bounded else d.quantile(ORACLE_LEVEL)
        if constraint is not None and all(a > 0 for a in constraint.coeffs):
            limit = min(limit, constraint.rhs / constraint.coeffs[k])
        bounds.append(max(float(limit), float(n)))
    return bounds


def run_solve(catalog: Catalog, constraint, grid_step: float | None = None) -> dict:
    report: dict = {"command": "solve"}
    notes: list[str] = []
    if constraint is None:
        result = solve(catalog)
        plan, method = result.plan, result.method
        notes.extend(result.notes)
    elif catalog.all_continuous:
        result = solve_continuous(catalog, constraint)
        plan, method = result.plan, result.method
        report["constraint_active"] = result.active
        report["lagrange_multiplier"] = result.multiplier
    elif catalog.all_discrete:
        result = solve_discrete_lattice(catalog, constraint, _lattice_bounds(catalog, constraint))
        plan, method = result.plan, result.method
        report["constraint_active"] = result.active
    else:
        raise InputError("constrained catalogs must be all continuous or all discrete")

    report.update(
        plan=[_number(n) for n in plan],
        expected_profit=expected_profit(catalog, plan),
        method=method,
        per_product=_per_product(catalog, plan),
    )
    if grid_step is not None:
        report["oracle"] = _oracle(catalog, plan, constraint, grid_step, notes)
    if notes:
        report["notes"] = notes
    # keep the documented key order
    order = ["command", "plan", "expected_profit", "method", "per_product"]
    return {k: report[k] for k in order} | {k: v for k, v in report.items() if k not in order}


def _oracle(catalog, plan, constraint, grid_step, notes):
    if catalog.all_continuous:
        bounds = _oracle_bounds(catalog, plan, constraint)
        found = grid_argmax_continuous(catalog, bounds, grid_step, constraint)
        return {
            "plan": [float(v) for v in found],
            "expected_profit": expected_profit(catalog, found),
            "method": "grid_search",
            "grid_step": grid_step,
        }
    if catalog.all_discrete:
        if constraint is not None:
            bounds = _lattice_bounds(catalog, constraint)
            found = solve_discrete_lattice(catalog, constraint, bounds).plan
            notes.append("discrete constrained plans are already found by exhaustive search")
        else:
            bounds = _oracle_bounds(catalog, plan, None)
            found = brute_force_argmax_discrete(catalog, [int(b) + 1 for b in bounds])
        return {
            "plan": [int(v) for v in found],
            "expected_profit": expected_profit(catalog, found),
            "method": "brute_force",
        }
    raise InputError("--grid-step needs an all-continuous or all-discrete catalog")


def run_eval(catalog: Catalog, plan_values) -> dict:
    plan = as_plan(plan_values, catalog)
    terms = expected_profit_terms(catalog, plan)
    return {
        "command": "eval",
        "plan": [_number(n) for n in plan],
        "expected_profit": math.fsum(terms),
        "method": "expected_value",
        "per_product": _per_product(catalog, plan, terms),
    }


def run_simulate(catalog: Catalog, plan_values, samples: int, seed: int) -> dict:
    plan = as_plan(plan_values, catalog)
    sim = simulate_profit(catalog, plan, samples, seed)
    return {
        "command": "simulate",
        "plan": [_number(n) for n in plan],
        "expected_profit": expected_profit(catalog, plan),
        "method": "monte_carlo",
        "per_product": _per_product(catalog, plan),
        "simulation": {
            "mean": sim.mean,
            "std_error": sim.std_error,
            "seed": sim.seed,
            "samples": sim.n_samples,
        },
    }


def run_fit(csv_path, unit_profit: float = 1.0, unit_loss: float = 1.0) -> dict:
    history = read_demand_history(csv_path)
    products = []
    for name, column in history.items():
        table = fit_empirical(column)
        products.append(
            {
                "name": name,
                "unit_profit": unit_profit,
                "unit_loss": unit_loss,
                "demand": {"kind": "table", "mass": {str(k): v for k, v in table.mass.items()}},
            }
        )
    return {"products": products}


def render_table(report: dict) -> str:
    header = ("product", "n_opt", "fractile", "cdf_at_n")
    rows = [
        (r["name"], f"{r['n_opt']:.6g}", f"{r['fractile']:.6g}", f"{r['cdf_at_n']:.6g}")
        for r in report["per_product"]
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    lines.append("")
    lines.append(f"expected profit: {report['expected_profit']:.10g}")
    lines.append(f"method:          {report['method']}")
    if "constraint_active" in report:
        lines.append(f"constraint:      {'active' if report['constraint_active'] else 'inactive'}")
    if "simulation" in report:
        sim = report["simulation"]
        lines.append(
            f"simulated mean:  {sim['mean']:.10g} +/- {sim['std_error']:.3g} "
            f"(n={sim['samples']}, seed={sim['seed']})"
        )
    if "oracle" in report:
        oracle = report["oracle"]
        plan = ", ".join(f"{v:.6g}" for v in oracle["plan"])
        lines.append(f"oracle plan:     [{plan}] ({oracle['method']})")
    for note in report.get("notes", []):
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def _parse_plan(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--plan must be comma-separated numbers, got {text!r}") from None
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise InputError("--plan values must be finite and >= 0")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stockwise", description="Profit-maximising order quantities under random demand."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="plan configuration (JSON)")
        p.add_argument("--csv", help="demand-history CSV for empirical demand")
        p.add_argument("--format", choices=("json", "table"), default="table")
        p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("solve", help="optimal order quantities")
    common(p)
    p.add_argument("--grid-step", type=_positive_float, help="cross-check with a grid/brute-force oracle")

    p = sub.add_parser("eval", help="expected profit of a given plan")
    common(p)
    p.add_argument("--plan", required=True, help="order quantities v1,v2,...")

    p = sub.add_parser("simulate", help="Monte-Carlo estimate of a plan's profit")
    common(p)
    p.add_argument("--plan", required=True, help="order quantities v1,v2,...")
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=_positive_int, default=0)

    p = sub.add_parser("fit", help="empirical demand tables from a demand-history CSV")
    p.add_argument("--csv", required=True, help="demand-history CSV")
    p.add_argument("--out", help="write the configuration here instead of stdout")
    p.add_argument("--unit-profit", type=_positive_float, default=1.0)
    p.add_argument("--unit-loss", type=float, default=1.0)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dispatch(args) -> tuple[dict, str]:
    if args.command == "fit":
        if args.unit_loss < 0:
            raise InputError("--unit-loss must be >= 0")
        try:
            doc = run_fit(args.csv, args.unit_profit, args.unit_loss)
        except DemandHistoryError as exc:
            raise ConfigError(str(args.csv), None, str(exc)) from None
        return doc, json.dumps(doc, indent=2) + "\n"

    catalog, constraint = load_config(args.config, args.csv)
    if args.command == "solve":
        report = run_solve(catalog, constraint, args.grid_step)
    elif args.command == "eval":
        report = run_eval(catalog, _parse_plan(args.plan))
    else:
        if args.samples < 2:
            raise InputError("--samples must be at least 2")
        report = run_simulate(catalog, _parse_plan(args.plan), args.samples, args.seed)
    if args.format == "json":
        return report, json.dumps(report, indent=2) + "\n"
    return report, render_table(report)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _, text = _dispatch(args)
    except SOLVER_ERRORS as exc:
        print(f"stockwise: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, DemandHistoryError, InputError, LengthMismatch, DomainError, NotContinuous) as exc:
        print(f"stockwise: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"stockwise: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(text, getattr(args, "out", None))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
