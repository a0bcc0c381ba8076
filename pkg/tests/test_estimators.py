import math
import numpy as np
import pytest

from d2dmalware import ParameterError
from d2dmalware.engine import EpidemicRun
from d2dmalware.estimators import (
    CorruptRunError,
    estimate_speed,
    estimate_survival,
    saturation_bound,
    speed_from_inverse_times,
)


def make_run(tau, u=2.0, connected=True, censored=False, offset=0.0):
    reached = math.isfinite(tau)
    return EpidemicRun(
        tau_u=tau, reached_radius=reached, extinct_at=None, connected_to_boundary=connected,
        censored=censored, status="reached" if reached else "extinct", stop_time=0.0, u=u,
        final_counts={}, peak_infected=1, event_count=0, origin_offset=offset,
    )


def test_worked_example():
    est = speed_from_inverse_times([0.5, 0.25, 0.25, 0.0], 2.0)
    assert est.alpha_u == pytest.approx(0.5)
    assert est.variance == pytest.approx(0.03125)
    assert est.rel_deviation == pytest.approx(math.sqrt(0.5))
    assert est.zero_fraction == 0.25


def test_runs_map_infinite_tau_to_zero():
    runs = [make_run(t) for t in (2.0, 4.0, 4.0, math.inf)]
    est = estimate_speed(runs, 2.0)
    assert est.alpha_u == pytest.approx(0.5)
    assert est.n == 4


def test_all_unreached_gives_zero_speed():
    est = estimate_speed([make_run(math.inf) for _ in range(5)], 2.0)
    assert est.alpha_u == 0.0 and est.rel_deviation is None


def test_speed_is_invariant_to_joint_rescaling():
    taus = np.random.default_rng(0).exponential(1.0, 50) + 0.1
    a = speed_from_inverse_times(1 / taus, 2.0).alpha_u
    b = speed_from_inverse_times(1 / (2 * taus), 4.0).alpha_u
    assert a == pytest.approx(b)


def test_censored_connected_run_warns_and_counts_zero():
    runs = [make_run(2.0), make_run(math.inf, censored=True)]
    with pytest.warns(RuntimeWarning):
        est = estimate_speed(runs, 2.0)
    assert est.alpha_u == pytest.approx(0.5)


def test_corrupt_run_rejected():
    with pytest.raises(CorruptRunError):
        estimate_speed([make_run(1.0, connected=False)], 2.0)
    with pytest.raises(CorruptRunError):
        estimate_survival([make_run(1.0, connected=False)], 2.0)


def test_mismatched_radius_and_empty_rejected():
    with pytest.raises(ParameterError):
        estimate_speed([make_run(1.0, u=3.0)], 2.0)
    with pytest.raises(ParameterError):
        estimate_speed([], 2.0)
    with pytest.raises(ParameterError):
        estimate_survival([], 2.0)


def test_survival_conditions_on_connectivity():
    runs = ([make_run(1.0) for _ in range(5)]
            + [make_run(math.inf) for _ in range(3)]
            + [make_run(math.inf, connected=False) for _ in range(2)])
    est = estimate_survival(runs, 2.0)
    assert (est.n_total, est.n_connected, est.n_survived) == (10, 8, 5)
    assert est.probability == pytest.approx(0.625)


def test_survival_undefined_without_connected_runs():
    est = estimate_survival([make_run(math.inf, connected=False)], 2.0)
    assert est.probability is None


def test_saturation_bound():
    # u = 2.5, r = 0.3, low = 2/3: nine hops needed from the origin
    bound = saturation_bound([make_run(1.0, u=2.5)], 2.5, 0.3, 2 / 3)
    assert bound == pytest.approx(2.5 / 6.0)
    # patient zero 0.1 km out leaves 2.4 km, i.e. eight hops
    offset = saturation_bound([make_run(1.0, u=2.5, offset=0.1)], 2.5, 0.3, 2 / 3)
    assert offset == pytest.approx(2.5 / (16 / 3))
