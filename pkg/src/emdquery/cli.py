"""Command-line interface: ``emdquery query|emd|gen|bench|cover``.

Exit codes: 0 success (the verdict is in the output), 2 unreadable input or
bad arguments, 3 unbalanced weights or mismatched dimensions, 4 solver failure.
"""

from __future__ import annotations

import json
import sys
import time
from contextlib import contextmanager

import click
import numpy as np

from emdquery.bench import parse_theta_range, run_bench
from emdquery.cover import dump_level_csv, iter_levels
from emdquery.datagen import ManifoldSpec, sample_manifold
from emdquery.errors import ImbalanceError, SolverError
from emdquery.geometry import approx_radius
from emdquery.io import FormatError, read_points, write_points
from emdquery.query import QueryParams, emd_query
from emdquery.transport import TransportInstance, solve_exact, solve_sinkhorn

EXIT_PARSE = 2
EXIT_IMBALANCE = 3
EXIT_SOLVER = 4


@contextmanager
def _exit_codes():
    try:
        yield
    except (FormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    except ImbalanceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IMBALANCE)
    except SolverError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_SOLVER)


def _load_pair(a_path, b_path, weighted):
    a = read_points(a_path, weighted)
    b = read_points(b_path, weighted)
    if a.dim != b.dim:
        raise ImbalanceError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return a, b


def _solver_options(f):
    f = click.option("--tol", type=float, default=1e-6, show_default=True, help="Sinkhorn marginal tolerance (fraction of W).")(f)
    f = click.option("--max-iter", type=int, default=10_000, show_default=True, help="Sinkhorn iteration cap.")(f)
    f = click.option("--eta", type=float, default=None, help="Sinkhorn regularization (default 0.02 * max distance).")(f)
    f = click.option("--solver", type=click.Choice(["exact", "sinkhorn"]), default="exact", show_default=True)(f)
    return f


def _input_options(f):
    f = click.option("--weighted", is_flag=True, help="CSV inputs carry the weight in the first column.")(f)
    f = click.option("--b", "b_path", required=True, type=click.Path(dir_okay=False), help="Second point set.")(f)
    f = click.option("--a", "a_path", required=True, type=click.Path(dir_okay=False), help="First point set.")(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Threshold queries on the earth mover's distance."""


@main.command("query")
@_input_options
@click.option("--threshold", "-T", type=float, required=True, help="Threshold T >= 0.")
@click.option("--eps", type=float, default=0.05, show_default=True, help="Error parameter in (0, 1).")
@_solver_options
@click.option("--mode", type=click.Choice(["adaptive", "fixed"]), default="adaptive", show_default=True)
@click.option("--rho", type=int, default=None, help="Doubling dimension for --mode fixed.")
@click.option("--json", "as_json", is_flag=True, help="Print the outcome as one JSON object.")
def cmd_query(a_path, b_path, weighted, threshold, eps, solver, eta, max_iter, tol, mode, rho, as_json):
    """Decide whether EMD(A, B) is above (CASE1) or below (CASE2) T."""
    if mode == "fixed" and rho is None:
        raise click.UsageError("--mode fixed needs --rho")
    with _exit_codes():
        a, b = _load_pair(a_path, b_path, weighted)
        try:
            params = QueryParams(threshold, eps, solver, eta, max_iter, tol, rho if mode == "fixed" else None)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        if solver == "sinkhorn":
            click.echo("warning: with the Sinkhorn sub-solver the verdict is heuristic", err=True)
        outcome = emd_query(a, b, params)
    if as_json:
        click.echo(json.dumps(outcome.to_dict()))
        return
    click.echo(f"verdict: {outcome.verdict.value}")
    click.echo(f"delta_tilde: {outcome.delta_tilde:.10g}")
    click.echo(f"h_max: {outcome.h_max}")
    if outcome.direct_emd is not None:
        click.echo(f"emd (coincident sets): {outcome.direct_emd:.10g}")
    click.echo("level  nodes  |A_i|  |B_i|  estimate  band  time_s")
    for t in outcome.levels:
        click.echo(
            f"{t.level:5d}  {t.node_count:5d}  {t.surplus_sources:5d}  {t.surplus_sinks:5d}  "
            f"{t.estimate:.6g}  {t.band:.6g}  {t.elapsed_s:.4f}"
        )


@main.command("emd")
@_input_options
@_solver_options
def cmd_emd(a_path, b_path, weighted, solver, eta, max_iter, tol):
    """Compute EMD(A, B) = optimal cost / W on the full instance."""
    with _exit_codes():
        a, b = _load_pair(a_path, b_path, weighted)
        inst = TransportInstance(a, b)
        t0 = time.perf_counter()
        if solver == "exact":
            plan = solve_exact(inst)
        else:
            if eta is not None and eta <= 0:
                raise click.UsageError("--eta must be positive")
            plan = solve_sinkhorn(inst, eta, max_iter, tol)
        dt = time.perf_counter() - t0
    click.echo(f"emd: {plan.emd(inst.mass):.12g}")
    click.echo(f"time_s: {dt:.4f}")
    if solver == "sinkhorn":
        click.echo(f"converged: {plan.diagnostics['converged']}")


@main.command("gen")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--n", "n_points", type=int, required=True)
@click.option("--d", "ambient_dim", type=int, default=500, show_default=True)
@click.option("--m", "intrinsic_dim", type=int, default=2, show_default=True)
@click.option("--degree", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale", "coef_scale", type=float, default=1.0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "bin"]), default=None, help="Default: from the file extension (.csv, else binary).")
def cmd_gen(out, n_points, ambient_dim, intrinsic_dim, degree, seed, coef_scale, fmt):
    """Sample a synthetic point set from a random polynomial manifold."""
    try:
        spec = ManifoldSpec(n_points, ambient_dim, intrinsic_dim, degree, seed, coef_scale)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    with _exit_codes():
        write_points(out, sample_manifold(spec), fmt)


@main.command("bench")
@_input_options
@click.option("--theta-range", default="-10..10", show_default=True, help="LO..HI (integers) or a comma list.")
@click.option("--eps", "eps_list", default="0.01,0.03,0.05", show_default=True, help="Comma-separated error parameters.")
@click.option("--repeat", type=int, default=1, show_default=True)
@click.option("--baselines", default="net,sin", show_default=True, help="Comma list from {net, sin}; net is always run.")
@_solver_options
@click.option("--rho", type=int, default=None, help="Use fixed-rho splitting.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="CSV report path.")
def cmd_bench(a_path, b_path, weighted, theta_range, eps_list, repeat, baselines, solver, eta, max_iter, tol, rho, out):
    """Sweep T = 2^theta * EMD and record query time against full solves."""
    try:
        thetas = parse_theta_range(theta_range)
        eps_values = [float(x) for x in eps_list.split(",") if x.strip()]
    except ValueError as exc:
        raise click.UsageError(str(exc))
    base = {x.strip() for x in baselines.split(",") if x.strip()}
    if not base <= {"net", "sin"}:
        raise click.UsageError(f"unknown baseline in {baselines!r}")
    with _exit_codes():
        a, b = _load_pair(a_path, b_path, weighted)
        try:
            report = run_bench(a, b, thetas, eps_values, repeat, tuple(base), solver, eta, max_iter, tol, rho)
        except ValueError as exc:
            if isinstance(exc, ImbalanceError):
                raise
            raise click.UsageError(str(exc))
        with open(out, "w", newline="") as fh:
            report.write_csv(fh)
    click.echo(f"emd: {report.emd:.10g}")
    click.echo(f"rows: {len(report.rows)}")
    click.echo(f"precision: {report.precision:.4f}")


@main.command("cover")
@click.option("--a", "a_path", required=True, type=click.Path(dir_okay=False))
@click.option("--b", "b_path", default=None, type=click.Path(dir_okay=False), help="Optional second set; covers A u B.")
@click.option("--weighted", is_flag=True)
@click.option("--levels", type=int, default=6, show_default=True)
@click.option("--rho", type=int, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_cover(a_path, b_path, weighted, levels, rho, out):
    """Dump the per-level cover nodes as CSV."""
    with _exit_codes():
        a = read_points(a_path, weighted)
        pts = a.points
        radius = approx_radius(a)[0]
        if b_path is not None:
            b = read_points(b_path, weighted)
            if b.dim != a.dim:
                raise ImbalanceError(f"dimension mismatch: {a.dim} vs {b.dim}")
            pts = np.vstack((a.points, b.points))
            radius = max(radius, approx_radius(b)[0])
        if radius == 0:
            raise click.UsageError("all points coincide; nothing to cover")
        targets = [radius / 2.0**i for i in range(levels)]
        with open(out, "w", newline="") as fh:
            for k, lv in enumerate(iter_levels(pts, targets, rho)):
                dump_level_csv(lv, fh, header=k == 0)


if __name__ == "__main__":
    main()
