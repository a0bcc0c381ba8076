"""Replicated trajectories: environments, seeds and the worker pool."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ._validation import check_nonnegative, check_positive
from .devices import build_device_set
from .engine import DEFAULT_TIME_CAP, DynamicsSpec, WaitingTimeModel, run_epidemic
from .graph import build_graph
from .seeds import stream
from .streets import Window, generate_streets


@dataclass(frozen=True)
class ModelParams:
    """Everything that defines one point of the model, in km and minutes."""

    gamma: float
    lam: float
    r: float
    infection: WaitingTimeModel
    rho: float = 0.0
    patch: WaitingTimeModel | None = None
    half_width: float | None = None
    time_cap: float = DEFAULT_TIME_CAP

    def __post_init__(self):
        check_positive(self.gamma, "gamma")
        check_positive(self.lam, "lambda")
        check_positive(self.r, "r")
        check_nonnegative(self.rho, "rho")

    @property
    def spec(self):
        return DynamicsSpec(self.infection, self.patch)

    def window_for(self, u):
        return Window(self.half_width if self.half_width is not None else u + self.r)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class Environment:
    index: int
    streets: object
    devices: object
    graph: object


def build_environment(params, u, master_seed, index):
    """Streets, devices and graph for environment ``index``.

    Streets and ordinary devices depend only on ``(master_seed, index)``;
    knights additionally on ``rho``, so sweeps over rho or the dynamics
    reuse the same street network and devices.
    """
    streets = generate_streets(params.gamma, params.window_for(u),
                               stream(master_seed, "streets", index))
    devices = build_device_set(
        streets, params.lam, params.rho,
        stream(master_seed, "devices", index),
        knight_rng=stream(master_seed, "knights", index, float(params.rho)),
    )
    return Environment(index, streets, devices, build_graph(devices, params.r))


def strip(run):
    """Drop per-device arrays so runs are cheap to keep and to pickle."""
    run.infected_at = None
    run.patched_at = None
    return run


def run_environment(params, u, master_seed, index, n_dynamics, env=None, keep_arrays=False):
    if env is None:
        env = build_environment(params, u, master_seed, index)
    runs = []
    for j in range(n_dynamics):
        run = run_epidemic(env.graph, env.devices, params.spec, u, params.time_cap,
                           stream(master_seed, "dynamics", index, j))
        runs.append(run if keep_arrays else strip(run))
    return runs


def _task(args):
    return run_environment(*args)


def run_replicas(params, u, master_seed, environments, dynamics_per_environment=1,
                 workers=1, cache=None):
    """All ``environments * dynamics_per_environment`` runs, in replica order.

    ``cache`` (a dict) keeps built environments across calls with the same
    geometry; it is only used in-process (``workers <= 1``).
    """
    params.window_for(u).check_observable(u, params.r)
    if workers is None or workers <= 1:
        out = []
        for i in range(environments):
            env = None
            if cache is not None:
                key = (params.gamma, params.lam, params.rho, params.r,
                       params.window_for(u).half_width, master_seed, i)
                env = cache.get(key)
                if env is None:
                    env = cache[key] = build_environment(params, u, master_seed, i)
            out.extend(run_environment(params, u, master_seed, i, dynamics_per_environment, env))
        return out
    tasks = [(params, u, master_seed, i, dynamics_per_environment) for i in range(environments)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(_task, tasks))
    return [run for chunk in chunks for run in chunk]
