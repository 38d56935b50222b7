"""Command-line interface: ``nestedwalk spectral|triangle|cost|verify``.

Every command prints one JSON document (sorted keys) to stdout, or a
plain table with ``--pretty``.  Exit codes: 0 success, 1 failed
verification, 2 capacity exceeded, 3 unreadable or invalid input,
4 infeasible constraints.
"""
from __future__ import annotations

import json
import os
import sys
import time
from fractions import Fraction

import click
import numpy as np

from . import _rng
from .algorithms import (
    TriangleParams,
    mss_spec,
    nested_3527_spec,
    nested_97_spec,
    run_walk,
)
from .costmodel import (
    DEFAULT_GRID,
    edge_local_cost_comparison,
    fit_exponent,
    mss_constraints,
    mss_expr,
    mss_numeric,
    nested_3527_constraints,
    nested_3527_expr,
    nested_3527_numeric,
    nested_97_constraints,
    nested_97_expr,
    nested_97_numeric,
    optimize_exponents,
    optimize_program,
    parse_program,
)
from .exceptions import CapacityError, InfeasibleError, InputError, ParseError
from .graphs import has_triangle, parse_graph
from .markov import johnson_chain, spectral_gap
from .oracle import QueryOracle
from .validation import SUITES, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_CAPACITY, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3, 4

FORMULAS = {
    "mss": (mss_expr, mss_constraints, mss_numeric, [Fraction(3, 5)], None),
    "t3527": (nested_3527_expr, nested_3527_constraints, nested_3527_numeric,
              [Fraction(2, 3), Fraction(-1, 27)], [(0.0, 1.0), (-1.0, 0.0)]),
    "t97": (nested_97_expr, nested_97_constraints, nested_97_numeric,
            [Fraction(4, 7), Fraction(5, 7)], None),
}


class _Failure(Exception):
    def __init__(self, code, report):
        super().__init__(code)
        self.code = code
        self.report = report


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(report, pretty):
    if pretty:
        for key in sorted(report):
            val = report[key]
            if isinstance(val, (dict, list)):
                val = json.dumps(val, sort_keys=True, default=_jsonable)
            click.echo(f"{key:<22} {val}")
    else:
        click.echo(json.dumps(report, sort_keys=True, indent=2, default=_jsonable))


@click.group()
@click.option("--cap", type=int, envvar="NESTEDWALK_CAP", default=None,
              help="Ceiling on simulated Hilbert-space dimension (env NESTEDWALK_CAP).")
@click.option("--pretty", is_flag=True, help="Plain table instead of JSON.")
@click.option("--timing", is_flag=True, help="Include wall time (output is then not reproducible).")
@click.pass_context
def cli(ctx, cap, pretty, timing):
    """Nested quantum walks: simulation, verification and cost exponents."""
    if cap is not None:
        os.environ["NESTEDWALK_CAP"] = str(cap)
    ctx.obj = {"pretty": pretty, "timing": timing, "start": time.perf_counter()}


def _finish(ctx, report):
    if ctx.obj["timing"]:
        report["wall_time"] = time.perf_counter() - ctx.obj["start"]
    _emit(report, ctx.obj["pretty"])


@cli.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--r", "r", type=int, required=True)
@click.pass_context
def spectral(ctx, n, r):
    """Spectral gap of the Johnson graph J(n, r) against n / (r (n - r))."""
    delta = spectral_gap(johnson_chain(n, r))
    closed = n / (r * (n - r))
    _finish(ctx, {
        "command": "spectral", "parameters": {"n": n, "r": r},
        "delta": delta, "closed_form": closed, "difference": delta - closed,
    })


def _spec_for(algo, n, params, oracle):
    if algo == "mss":
        return mss_spec(n, params.r, oracle, m=params.m)
    if algo == "nested3527":
        return nested_3527_spec(n, params, oracle)
    return nested_97_spec(n, params, oracle)


@cli.command()
@click.option("--graph", "graph_file", type=click.Path(dir_okay=False), required=True,
              help="Edge-list file: vertex count, then one 'u v' per line.")
@click.option("--algo", type=click.Choice(["mss", "nested3527", "nested97"]), default="mss")
@click.option("--r", "r", type=int, default=3)
@click.option("--s", "s", type=str, default="1/3", help="Sparsification fraction, e.g. 1/3.")
@click.option("--r1", type=int, default=2)
@click.option("--r2", type=int, default=2)
@click.option("--m", "m", type=int, default=None, help="Graph-collision set size.")
@click.option("--trials", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--target-error", type=float, default=None,
              help="Boost each trial by majority vote to this error.")
@click.option("--backend", type=click.Choice(["exact", "pe"]), default="exact")
@click.pass_context
def triangle(ctx, graph_file, algo, r, s, r1, r2, m, trials, seed, target_error, backend):
    """Run a triangle-finding walk repeatedly and compare with brute force."""
    try:
        with open(graph_file) as fh:
            G = parse_graph(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read graph file: {exc}") from None
    try:
        s_val = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad value for --s: {s!r}") from None
    if backend == "pe" and algo != "mss":
        raise InputError("the phase-estimation backend supports only the flat mss walk")
    params = TriangleParams(r=r, s=s_val, r1=r1, r2=r2, m=m)
    truth = has_triangle(G) is not None
    oracle = QueryOracle(G.bits)
    spec = _spec_for(algo, G.n, params, oracle)
    rng = _rng.stream(seed, "triangle")
    verdicts, queries = [], []
    prob = None
    for _ in range(trials):
        res = run_walk(spec, oracle, rng, target_error, backend)
        verdicts.append(res.verdict)
        queries.append(res.queries)
        prob = res.probability_true
    correct = sum(v == truth for v in verdicts)
    _finish(ctx, {
        "command": "triangle",
        "parameters": {"graph": os.path.basename(graph_file), "n": G.n, "algo": algo, "r": r, "s": str(s_val),
                       "r1": r1, "r2": r2, "m": m, "trials": trials, "target_error": target_error,
                       "backend": backend},
        "seed": seed,
        "truth": truth,
        "verdicts_true": sum(verdicts),
        "success_rate": correct / trials if trials else None,
        "probability_true": prob,
        "query_count": {"total": oracle.count, "per_trial": queries[0] if queries else 0,
                        "setup": spec.setup_queries, "update": spec.update_queries,
                        "check": spec.check_queries},
        "metadata": {k: v for k, v in spec.meta.items() if k not in ("inner", "marked")},
    })


@cli.command()
@click.argument("formula")
@click.option("--fit", is_flag=True, help="Cross-check the exponent by numeric minimisation.")
@click.option("--compare", is_flag=True, help="For programs, compare both edge-local conventions.")
@click.pass_context
def cost(ctx, formula, fit, compare):
    """Optimal exponent of FORMULA: mss, t3527, t97 or program:FILE."""
    report = {"command": "cost", "parameters": {"formula": formula, "fit": fit}}
    if formula.startswith("program:"):
        path = formula.split(":", 1)[1]
        try:
            with open(path) as fh:
                prog = parse_program(fh.read())
        except OSError as exc:
            raise ParseError(f"cannot read program file: {exc}") from None
        opt = optimize_program(prog)
        if compare:
            report["edge_local_comparison"] = edge_local_cost_comparison(prog)
        if fit:
            report["fit"] = None
    elif formula in FORMULAS:
        build, constraints, numeric, start, bounds = FORMULAS[formula]
        opt = optimize_exponents(build(), constraints())
        if fit:
            seed = [float(opt.assignment[v]) for v in build().variables] if opt.assignment else start
            slope = fit_exponent(numeric, DEFAULT_GRID, seed, bounds)
            report["fit"] = {"slope": slope, "difference": slope - float(opt.value),
                             "n_values": list(DEFAULT_GRID)}
    else:
        raise InputError(f"unknown formula {formula!r}; use mss, t3527, t97 or program:FILE")
    report.update(opt.as_dict())
    report["feasible"] = True
    _finish(ctx, report)


@cli.command()
@click.argument("suite", type=click.Choice(sorted(SUITES) + ["all"]))
@click.option("--seed", type=int, default=0)
@click.pass_context
def verify(ctx, suite, seed):
    """Run an invariant suite; exit status 1 if any check fails."""
    checks = run_suite(suite, seed)
    failed = [c for c in checks if not c.passed]
    report = {
        "command": "verify", "parameters": {"suite": suite}, "seed": seed,
        "passed": len(checks) - len(failed), "total": len(checks),
        "checks": [c.as_dict() for c in checks],
    }
    _finish(ctx, report)
    if failed:
        ctx.exit(EXIT_VERIFY)


def main(argv=None):
    """Entry point with the documented exit codes."""
    try:
        rv = cli.main(args=argv, prog_name="nestedwalk", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_INPUT
    except click.Abort:
        return EXIT_INPUT
    except CapacityError as exc:
        click.echo(json.dumps({"error": "capacity", "message": str(exc)}), err=True)
        return EXIT_CAPACITY
    except InfeasibleError as exc:
        click.echo(json.dumps({"error": "infeasible", "message": str(exc), "feasible": False,
                               "violated": exc.violated}, sort_keys=True), err=False)
        return EXIT_INFEASIBLE
    except (ParseError, InputError) as exc:
        click.echo(json.dumps({"error": "input", "message": str(exc)}), err=True)
        return EXIT_INPUT
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
