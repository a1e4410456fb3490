"""Threshold-sweep benchmark: query time against full EMD solves."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from emdquery.geometry import WeightedPointSet
from emdquery.query import QueryParams, Verdict, emd_query, expected_verdicts
from emdquery.transport import TransportInstance, solve_exact, solve_sinkhorn

CSV_COLUMNS = [
    "theta",
    "eps",
    "n",
    "verdict",
    "truth_case",
    "levels",
    "time_our_s",
    "time_net_s",
    "time_sin_s",
    "ratio_net",
    "ratio_sin",
]


@dataclass(frozen=True)
class BenchRow:
    theta: float
    eps: float
    n: int
    verdict: Verdict
    truth_case: str
    correct: bool
    levels: int
    time_our_s: float
    time_net_s: float
    time_sin_s: Optional[float]

    @property
    def ratio_net(self) -> float:
        return self.time_our_s / self.time_net_s

    @property
    def ratio_sin(self) -> Optional[float]:
        return None if self.time_sin_s is None else self.time_our_s / self.time_sin_s

    def as_csv(self) -> list:
        def fmt(x):
            return "" if x is None else f"{x:.6g}"

        return [
            f"{self.theta:g}",
            f"{self.eps:g}",
            self.n,
            self.verdict.value,
            self.truth_case,
            self.levels,
            fmt(self.time_our_s),
            fmt(self.time_net_s),
            fmt(self.time_sin_s),
            fmt(self.ratio_net),
            fmt(self.ratio_sin),
        ]


@dataclass
class BenchReport:
    emd: float
    emd_sinkhorn: Optional[float]
    delta_tilde: float
    rows: list = field(default_factory=list)

    @property
    def precision(self) -> float:
        return sum(r.correct for r in self.rows) / len(self.rows) if self.rows else float("nan")

    def write_csv(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.as_csv())


def truth_label(emd: float, threshold: float, eps: float, delta_tilde: float) -> str:
    allowed = expected_verdicts(emd, threshold, eps, delta_tilde)
    return "|".join(v.value for v in sorted(allowed, key=lambda v: v.value))


def _median_time(fn, repeat: int):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def run_bench(
    a: WeightedPointSet,
    b: WeightedPointSet,
    thetas: Iterable[float],
    eps_list: Sequence[float],
    repeat: int = 1,
    baselines: Sequence[str] = ("net", "sin"),
    solver: str = "exact",
    sinkhorn_reg: Optional[float] = None,
    sinkhorn_max_iter: int = 10_000,
    sinkhorn_tol: float = 1e-6,
    rho: Optional[int] = None,
    progress=None,
) -> BenchReport:
    """Sweep ``T = 2**theta * EMD`` and time the query against the baselines.

    The ground-truth EMD comes from the exact solver, which is always run;
    ``baselines`` only controls whether the Sinkhorn solve is timed as well.
    Every time is the median over ``repeat`` runs.
    """
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    inst = TransportInstance(a, b)
    w = a.total_weight
    t_net, plan = _median_time(lambda: solve_exact(inst), repeat)
    emd = plan.cost / w
    t_sin = emd_sin = None
    if "sin" in baselines:
        t_sin, splan = _median_time(lambda: solve_sinkhorn(inst, sinkhorn_reg, sinkhorn_max_iter, sinkhorn_tol), repeat)
        emd_sin = splan.cost / w

    report = BenchReport(emd, emd_sin, 0.0)
    n = a.n + b.n
    for eps in eps_list:
        for theta in thetas:
            threshold = 2.0**theta * emd
            params = QueryParams(threshold, eps, solver, sinkhorn_reg, sinkhorn_max_iter, sinkhorn_tol, rho)
            t_our, outcome = _median_time(lambda: emd_query(a, b, params), repeat)
            report.delta_tilde = outcome.delta_tilde
            allowed = expected_verdicts(emd, threshold, eps, outcome.delta_tilde)
            row = BenchRow(
                theta,
                eps,
                n,
                outcome.verdict,
                truth_label(emd, threshold, eps, outcome.delta_tilde),
                outcome.verdict in allowed,
                outcome.height,
                t_our,
                t_net,
                t_sin,
            )
            report.rows.append(row)
            if progress is not None:
                progress(row)
    return report


def parse_theta_range(text: str) -> list:
    """``"-3..3"`` -> integers -3..3; ``"-4,4"`` -> listed values."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if lo_i > hi_i:
            raise ValueError(f"empty theta range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return [float(x) for x in text.split(",") if x.strip()]
