"""Discrete-event simulation of SI and SIG malware dynamics on a Gilbert graph.

Every directed edge ``i -> j`` carries its own clock. An infection clock
starts when ``i`` becomes infected while ``j`` is susceptible; a patch clock
starts when a knight ``g`` and an infected ``j`` first become neighbours in
states (G, I). Exponential clocks give the Markovian generators; uniform
windows give the renewal (non-Markovian) variants. Times are in minutes.

A clock whose pair stopped being active (source patched, target no longer
susceptible / infected) is discarded when it is popped. States only move
forward (S -> I -> G), so a pair that lapsed can never become active again
and no renewal needs to be scheduled for it.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from ._validation import (
    EventCapExceeded,
    InvariantViolation,
    ParameterError,
    check_nonnegative,
    check_positive,
)
from .devices import Role
from .graph import reaches_radius

S, I, G = 0, 1, 2
STATE_NAMES = ("S", "I", "G")

REACHED, EXTINCT, CENSORED, EXHAUSTED, CAPPED = 0, 1, 2, 3, 4
STATUS_NAMES = ("reached", "extinct", "censored", "exhausted", "capped")

DEFAULT_TIME_CAP = 1e4
DEFAULT_MAX_EVENTS = 200_000_000


@dataclass(frozen=True)
class WaitingTimeModel:
    """Either ``Exponential(rate)`` or ``UniformWindow(low, high)`` waiting times.

    An exponential rate of 0 is accepted and means a clock that never rings.
    """

    kind: str
    rate: float = 0.0
    low: float = 0.0
    high: float = 0.0

    @classmethod
    def exponential(cls, rate):
        return cls("exponential", rate=check_nonnegative(rate, "rate"))

    @classmethod
    def uniform(cls, low, high):
        low = check_positive(low, "low")
        high = float(high)
        if not high >= low:
            raise ParameterError(f"uniform window needs low <= high, got [{low}, {high}]")
        return cls("uniform", low=low, high=high)

    @property
    def markovian(self):
        return self.kind == "exponential"

    @property
    def min_delay(self):
        return 0.0 if self.markovian else self.low

    def delays(self, uniforms):
        """Map iid U[0, 1) variates to waiting times."""
        if self.markovian:
            if self.rate == 0:
                return np.full(len(uniforms), np.inf)
            return -np.log1p(-uniforms) / self.rate
        return self.low + (self.high - self.low) * uniforms

    def describe(self):
        if self.markovian:
            return f"Exp(rate={self.rate:g}/min)"
        return f"U[{self.low:g}, {self.high:g}] min"


@dataclass(frozen=True)
class DynamicsSpec:
    """Infection waiting times plus optional patch waiting times (absent = SI)."""

    infection: WaitingTimeModel
    patch: WaitingTimeModel | None = None

    @property
    def model(self):
        return "SI" if self.patch is None else "SIG"


@dataclass
class EpidemicRun:
    tau_u: float
    reached_radius: bool
    extinct_at: float | None
    connected_to_boundary: bool
    censored: bool
    status: str
    stop_time: float
    u: float
    final_counts: dict
    peak_infected: int
    event_count: int
    origin_offset: float = 0.0
    infected_at: np.ndarray = field(default=None, repr=False)
    patched_at: np.ndarray = field(default=None, repr=False)
    snapshots: dict = field(default_factory=dict, repr=False)

    @property
    def inverse_tau(self):
        return 0.0 if not math.isfinite(self.tau_u) else (
            math.inf if self.tau_u == 0 else 1.0 / self.tau_u
        )


@numba.njit(cache=True)
def _edge_index(indptr, indices, i, j):
    lo = indptr[i]
    pos = lo + np.searchsorted(indices[lo:indptr[i + 1]], j)
    return pos


@numba.njit(cache=True)
def _kernel(indptr, indices, radial, state0, seeds, inf_delay, patch_delay, has_patch,
            u, time_cap, max_events, low):
    n = radial.shape[0]
    state = state0.copy()
    infected_at = np.full(n, np.inf)
    patched_at = np.full(n, np.inf)
    depth = np.zeros(n, dtype=np.int64)
    for k in range(n):
        if state[k] == 2:
            patched_at[k] = 0.0
    n_inf = 0
    hop_violation = -1

    heap = [(0.0, np.int64(0), np.int64(0), np.int64(0), np.int64(0))]
    heap.pop()
    seq = 0
    status = -1
    tau = np.inf
    stop_time = 0.0

    for s in seeds:
        state[s] = 1
        infected_at[s] = 0.0
        n_inf += 1
        if radial[s] >= u:
            status = 0
            tau = 0.0
    peak = n_inf
    if status < 0:
        for s in seeds:
            for e in range(indptr[s], indptr[s + 1]):
                k = indices[e]
                if state[k] == 0:
                    t_fire = inf_delay[e]
                    if t_fire < np.inf:
                        heapq.heappush(heap, (t_fire, np.int64(seq), np.int64(0), np.int64(s), np.int64(e)))
                        seq += 1
                elif state[k] == 2 and has_patch:
                    ek = _edge_index(indptr, indices, k, s)
                    heapq.heappush(heap, (patch_delay[ek], np.int64(seq), np.int64(1), np.int64(k), np.int64(ek)))
                    seq += 1

    events = 0
    t = 0.0
    while status < 0:
        if len(heap) == 0:
            status = 3
            stop_time = t
            break
        t_ev, _, kind, src, e = heapq.heappop(heap)
        if t_ev > time_cap:
            status = 2
            stop_time = time_cap
            break
        t = t_ev
        events += 1
        if events > max_events:
            status = 4
            stop_time = t
            break
        dst = indices[e]
        if kind == 0:
            if state[src] != 1 or state[dst] != 0:
                continue
            state[dst] = 1
            infected_at[dst] = t
            depth[dst] = depth[src] + 1
            if low > 0 and t < depth[dst] * low * (1.0 - 1e-12) and hop_violation < 0:
                hop_violation = dst
            n_inf += 1
            if n_inf > peak:
                peak = n_inf
            if radial[dst] >= u:
                status = 0
                tau = t
                stop_time = t
                break
            for e2 in range(indptr[dst], indptr[dst + 1]):
                k = indices[e2]
                if state[k] == 0:
                    t_fire = t + inf_delay[e2]
                    if t_fire < np.inf:
                        heapq.heappush(heap, (t_fire, np.int64(seq), np.int64(0), np.int64(dst), np.int64(e2)))
                        seq += 1
                elif state[k] == 2 and has_patch:
                    ek = _edge_index(indptr, indices, k, dst)
                    heapq.heappush(heap, (t + patch_delay[ek], np.int64(seq), np.int64(1), np.int64(k), np.int64(ek)))
                    seq += 1
        else:
            if state[dst] != 1:
                continue
            state[dst] = 2
            patched_at[dst] = t
            n_inf -= 1
            if n_inf == 0:
                status = 1
                stop_time = t
                break
            for e2 in range(indptr[dst], indptr[dst + 1]):
                k = indices[e2]
                if state[k] == 1:
                    heapq.heappush(heap, (t + patch_delay[e2], np.int64(seq), np.int64(1), np.int64(dst), np.int64(e2)))
                    seq += 1

    counts = np.zeros(3, dtype=np.int64)
    for k in range(n):
        counts[state[k]] += 1
    return (status, stop_time, tau, infected_at, patched_at, events, peak, counts,
            hop_violation)


def simulate(graph, spec, u, rng, initial_infected=(0,), initial_knights=(),
             time_cap=DEFAULT_TIME_CAP, max_events=DEFAULT_MAX_EVENTS, snapshot_times=None):
    """One trajectory on ``graph`` from an arbitrary initial configuration.

    ``u`` is the stop radius around the origin. ``connected_to_boundary`` is
    computed from the first initially infected device.
    """
    u = check_positive(u, "u")
    time_cap = check_positive(time_cap, "time_cap")
    seeds = np.asarray(initial_infected, dtype=np.int64)
    if len(seeds) == 0:
        raise ParameterError("need at least one initially infected device")
    knights = np.asarray(initial_knights, dtype=np.int64)
    n = graph.n_nodes
    state0 = np.zeros(n, dtype=np.int8)
    state0[knights] = G
    if np.any(state0[seeds] == G):
        raise ParameterError("a device cannot start both infected and patched")

    nnz = len(graph.indices)
    inf_delay = spec.infection.delays(rng.random(nnz))
    has_patch = spec.patch is not None and len(knights) > 0
    if has_patch:
        patch_delay = spec.patch.delays(rng.random(nnz))
    else:
        patch_delay = np.empty(0)

    radial = np.hypot(graph.positions[:, 0], graph.positions[:, 1])
    low = spec.infection.min_delay
    (status, stop_time, tau, infected_at, patched_at, events, peak, counts,
     hop_violation) = _kernel(
        graph.indptr, graph.indices, radial, state0, seeds, inf_delay, patch_delay,
        has_patch, u, time_cap, int(max_events), low,
    )
    if status == CAPPED:
        raise EventCapExceeded(
            f"trajectory exceeded {max_events} events by t={stop_time:.6g} min"
        )
    if hop_violation >= 0:
        raise InvariantViolation(
            f"device {hop_violation} infected at t={infected_at[hop_violation]:.9g} "
            f"faster than one hop per {low:.9g} min"
        )
    reached = status == REACHED
    origin_offset = float(radial[seeds[0]])
    if reached and low > 0 and tau < min_hitting_time(u, graph.r, low, origin_offset) * (1 - 1e-12):
        raise InvariantViolation(f"tau_u={tau} below the hop-speed bound")

    run = EpidemicRun(
        tau_u=float(tau),
        reached_radius=bool(reached),
        extinct_at=float(stop_time) if status == EXTINCT else None,
        connected_to_boundary=reaches_radius(graph, int(seeds[0]), u),
        censored=status == CENSORED,
        status=STATUS_NAMES[status],
        stop_time=float(stop_time),
        u=u,
        final_counts={"S": int(counts[S]), "I": int(counts[I]), "G": int(counts[G])},
        peak_infected=int(peak),
        event_count=int(events),
        origin_offset=origin_offset,
        infected_at=infected_at,
        patched_at=patched_at,
    )
    if run.reached_radius and not run.connected_to_boundary:
        raise InvariantViolation("malware reached radius u outside the cluster of patient zero")
    for t in snapshot_times or ():
        run.snapshots[float(t)] = snapshot(run, t)
    return run


def run_epidemic(graph, devices, spec, u, time_cap, rng, max_events=DEFAULT_MAX_EVENTS,
                 snapshot_times=None):
    """One SI/SIG trajectory started from patient zero (device 0) at t = 0."""
    devices.streets.window.check_observable(u, graph.r)
    if len(devices) == 0 or devices.roles[0] != Role.PATIENT_ZERO:
        raise ParameterError("device set has no patient zero")
    return simulate(
        graph, spec, u, rng,
        initial_infected=(0,),
        initial_knights=devices.knights,
        time_cap=time_cap,
        max_events=max_events,
        snapshot_times=snapshot_times,
    )


def min_hitting_time(u, r, low, origin_offset=0.0):
    """Smallest possible tau_u when every hop spans <= r km and takes >= low min."""
    hops = max(0, math.ceil((u - origin_offset) / r - 1e-12))
    return hops * low


def states_at(run, t):
    """Array of state codes (0=S, 1=I, 2=G) at time ``t``."""
    state = np.zeros(len(run.infected_at), dtype=np.int8)
    state[run.infected_at <= t] = I
    state[run.patched_at <= t] = G
    return state


def snapshot(run, t):
    """``[(id, state), ...]`` for every device at time ``t`` in ``[0, stop_time]``."""
    t = float(t)
    if not 0.0 <= t <= run.stop_time:
        raise ParameterError(f"snapshot time {t} outside [0, {run.stop_time}]")
    return [(i, STATE_NAMES[s]) for i, s in enumerate(states_at(run, t).tolist())]


def write_snapshot_csv(run, t, path):
    """``id,state,time`` rows; ``time`` is when the device entered its state (empty for S)."""
    state = states_at(run, t)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "state", "time"])
        for i, s in enumerate(state.tolist()):
            since = {S: "", I: run.infected_at[i], G: run.patched_at[i]}[s]
            writer.writerow([i, STATE_NAMES[s], since if since == "" else f"{since:.9g}"])
    return path
