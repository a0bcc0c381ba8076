"""Critical curves of the SIG model by first-crossing grid scans with warm starts.

For each white-knight intensity ``rho`` the control parameter (infection
rate, or the upper end of the patch window) is scanned upward until the
conditioned survival fraction exceeds the threshold. Because the critical
value can only grow with ``rho``, the scan for the next ``rho`` starts at
the previous critical value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import ParameterError, PercolationError, check_fraction, check_positive
from .engine import WaitingTimeModel
from .estimators import estimate_survival
from .experiment import run_replicas
from .seeds import SCHEME

INFECTION_RATE = "infection_rate"
PATCH_MAX = "patch_max"


@dataclass(frozen=True)
class SweepPlan:
    rho_grid: tuple
    control: str
    control_grid: tuple
    u: float
    environments: int = 100
    dynamics_per_environment: int = 10
    threshold: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "rho_grid", tuple(float(x) for x in self.rho_grid))
        object.__setattr__(self, "control_grid", tuple(float(x) for x in self.control_grid))
        if self.control not in (INFECTION_RATE, PATCH_MAX):
            raise ParameterError(f"unknown control {self.control!r}")
        for name, grid in (("rho_grid", self.rho_grid), ("control_grid", self.control_grid)):
            if len(grid) == 0 or np.any(np.diff(grid) <= 0):
                raise ParameterError(f"{name} must be non-empty and strictly increasing")
        check_fraction(self.threshold, "threshold")
        check_positive(self.u, "u")
        if self.environments < 1 or self.dynamics_per_environment < 1:
            raise ParameterError("replica counts must be >= 1")

    @property
    def replicas(self):
        return self.environments * self.dynamics_per_environment


@dataclass
class PhasePoint:
    rho: float
    critical_value: float | None
    tested: list = field(default_factory=list)
    warm_start_from: float | None = None

    @property
    def evaluations(self):
        return len(self.tested)


def apply_control(params, control, value):
    """Model parameters with the scanned control set to ``value``."""
    if control == INFECTION_RATE:
        return params.replace(infection=WaitingTimeModel.exponential(value))
    if params.patch is None or params.patch.markovian:
        raise ParameterError("patch_max control needs a uniform patch window")
    return params.replace(patch=WaitingTimeModel.uniform(params.patch.low, value))


def survival_fraction(params, control_value, plan, master_seed, workers=1, cache=None):
    """Conditioned survival estimate at one control value (``params.rho`` fixed)."""
    p = apply_control(params, plan.control, control_value)
    runs = run_replicas(p, plan.u, master_seed, plan.environments,
                        plan.dynamics_per_environment, workers=workers, cache=cache)
    est = estimate_survival(runs, plan.u)
    if est.n_connected == 0:
        raise PercolationError(
            f"none of {est.n_total} environments connects patient zero to radius {plan.u} km"
        )
    return est


def find_critical(params, plan, rho, lower_bound, master_seed, evaluate=None, workers=1):
    """Scan the control grid upward from ``lower_bound`` to the first threshold crossing.

    ``evaluate(params, value)`` returns the survival estimate (anything with a
    ``probability`` attribute) and defaults to a fresh simulation.
    """
    p = params.replace(rho=float(rho))
    grid = plan.control_grid
    start = 0
    if lower_bound is not None:
        start = int(np.searchsorted(grid, lower_bound - 1e-12))
        if start >= len(grid) or abs(grid[start] - lower_bound) > 1e-9:
            raise ParameterError(f"lower bound {lower_bound} is not a grid value")
    if evaluate is None:
        cache = {}

        def evaluate(q, value):
            return survival_fraction(q, value, plan, master_seed, workers=workers, cache=cache)

    point = PhasePoint(rho=float(rho), critical_value=None, warm_start_from=lower_bound)
    for value in grid[start:]:
        est = evaluate(p, value)
        point.tested.append((value, est))
        if est.probability > plan.threshold:
            point.critical_value = value
            break
    return point


def sweep_curve(params, plan, master_seed, evaluate=None, workers=1, on_point=None):
    """Critical values for every rho in ``plan.rho_grid``, ascending, warm-started.

    If a scan exhausts the grid, later rho values restart from the last grid
    value. ``on_point`` is called with each finished PhasePoint.
    """
    points = []
    lower = None
    for rho in plan.rho_grid:
        point = find_critical(params, plan, rho, lower, master_seed, evaluate=evaluate,
                              workers=workers)
        points.append(point)
        if on_point is not None:
            on_point(point)
        lower = point.critical_value if point.critical_value is not None else plan.control_grid[-1]
    return points


TESTED_HEADER = ["rho", "control", "control_value", "survival_fraction", "n_survived",
                 "n_connected", "n_total", "is_critical", "master_seed", "seed_scheme"]
SUMMARY_HEADER = ["rho", "critical_value"]


def tested_rows(point, plan, master_seed):
    for value, est in point.tested:
        yield [
            f"{point.rho:.9g}", plan.control, f"{value:.9g}", f"{est.probability:.9g}",
            est.n_survived, est.n_connected, est.n_total,
            int(point.critical_value is not None and value == point.critical_value),
            master_seed, SCHEME,
        ]


def summary_row(point):
    crit = "" if point.critical_value is None else f"{point.critical_value:.9g}"
    return [f"{point.rho:.9g}", crit]


def write_phase_csvs(points, plan, master_seed, tested_path, summary_path):
    with open(tested_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TESTED_HEADER)
        for point in points:
            writer.writerows(tested_rows(point, plan, master_seed))
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(summary_row(p) for p in points)
    return Path(tested_path), Path(summary_path)
