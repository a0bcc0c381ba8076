"""Replica statistics: propagation speed, spread of 1/tau_u, conditioned survival."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import ParameterError
from .engine import min_hitting_time


class CorruptRunError(ValueError):
    """A run claims to reach radius u without being connected to it."""


@dataclass(frozen=True)
class SpeedEstimate:
    u: float
    n: int
    alpha_u: float
    variance: float
    rel_deviation: float | None
    zero_fraction: float
    std_error: float

    @property
    def mean_inverse_tau(self):
        return self.alpha_u / self.u


@dataclass(frozen=True)
class SurvivalEstimate:
    u: float
    n_total: int
    n_connected: int
    n_survived: int

    @property
    def probability(self):
        if self.n_connected == 0:
            return None
        return self.n_survived / self.n_connected


def _check_runs(runs, u):
    if len(runs) == 0:
        raise ParameterError("no runs to aggregate")
    for run in runs:
        if not math.isclose(run.u, u, rel_tol=0, abs_tol=1e-12):
            raise ParameterError(f"run has u={run.u}, expected {u}")
        if run.reached_radius and not run.connected_to_boundary:
            raise CorruptRunError("run reached radius u but is not connected to the boundary")


def speed_from_inverse_times(x, u):
    """Speed statistics from per-replica ``x_i = 1/tau_u`` (0 when tau_u is infinite).

    ``variance`` is the plain second central moment ``mean(x^2) - mean(x)^2``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        raise ParameterError("no replicas")
    m = x.mean()
    var = max(float(np.mean(x * x) - m * m), 0.0)
    rel = math.sqrt(var) / m if m > 0 else None
    return SpeedEstimate(
        u=float(u),
        n=n,
        alpha_u=float(u * m),
        variance=var,
        rel_deviation=rel,
        zero_fraction=float(np.mean(x == 0)),
        std_error=float(u * math.sqrt(var / n)),
    )


def estimate_speed(runs, u):
    """Speed estimate ``alpha_u = u * mean(1/tau_u)`` over replicas.

    Unreached and censored runs contribute ``1/tau_u = 0``.
    """
    _check_runs(runs, u)
    if any(run.censored and run.connected_to_boundary for run in runs):
        warnings.warn(
            "a run connected to the boundary hit the time cap; raise time_cap",
            RuntimeWarning,
            stacklevel=2,
        )
    x = [0.0 if (run.censored or not run.reached_radius) else run.inverse_tau for run in runs]
    return speed_from_inverse_times(x, u)


def saturation_bound(runs, u, r, low):
    """Upper bound on ``alpha_u`` when every hop takes at least ``low`` minutes.

    Uses each run's patient-zero offset from the origin, so it is exact for
    the sampled geometry rather than assuming patient zero sits at the origin.
    """
    inv = []
    for run in runs:
        t_min = min_hitting_time(u, r, low, run.origin_offset)
        inv.append(math.inf if t_min == 0 else 1.0 / t_min)
    return u * float(np.mean(inv))


def estimate_survival(runs, u):
    """Fraction of boundary-connected replicas in which the malware reached radius ``u``."""
    _check_runs(runs, u)
    n_connected = sum(run.connected_to_boundary for run in runs)
    n_survived = sum(run.reached_radius for run in runs)
    return SurvivalEstimate(
        u=float(u), n_total=len(runs), n_connected=int(n_connected), n_survived=int(n_survived)
    )
