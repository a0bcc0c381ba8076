"""Cox point processes on a street system: ordinary devices, white knights, patient zero."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import SimulationEnvironmentError, check_nonnegative, check_positive


class Role(enum.IntEnum):
    ORDINARY = 0
    KNIGHT = 1
    PATIENT_ZERO = 2


ROLE_CODES = {Role.ORDINARY: "O", Role.KNIGHT: "K", Role.PATIENT_ZERO: "Z"}


@dataclass(frozen=True)
class Device:
    id: int
    position: tuple
    initial_role: Role
    segment_id: int


def sample_on_streets(streets, intensity, rng):
    """Poisson process with intensity ``intensity`` per km of street.

    Returns ``(points, segment_ids)``: an ``(N, 2)`` array and the host
    segment of every point, with ``N ~ Poisson(intensity * total_length)``.
    """
    intensity = check_nonnegative(intensity, "intensity")
    total = streets.total_length
    n = int(rng.poisson(intensity * total)) if total > 0 else 0
    if n == 0:
        return np.empty((0, 2)), np.empty(0, dtype=np.int64)
    cum = np.cumsum(streets.lengths)
    seg = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
    np.minimum(seg, len(cum) - 1, out=seg)
    t = rng.random(n)
    pts = streets.a[seg] + t[:, None] * (streets.b[seg] - streets.a[seg])
    return pts, seg.astype(np.int64)


def nearest_street_point(streets, q):
    """Point of the street system closest to ``q`` and its segment id.

    Ties go to the lowest segment id.
    """
    if len(streets) == 0:
        raise SimulationEnvironmentError("street system has no segments")
    q = np.asarray(q, dtype=float)
    a, b = streets.a, streets.b
    d = b - a
    denom = np.einsum("ij,ij->i", d, d)
    t = np.clip(np.einsum("ij,ij->i", q - a, d) / denom, 0.0, 1.0)
    foot = a + t[:, None] * d
    dist2 = np.einsum("ij,ij->i", foot - q, foot - q)
    k = int(np.argmin(dist2))
    return (float(foot[k, 0]), float(foot[k, 1])), k


@dataclass(eq=False)
class DeviceSet:
    """All devices of one environment, indexed by id.

    Id 0 is patient zero; ordinary devices follow in sampling order, then
    the initial white knights.
    """

    streets: object
    positions: np.ndarray
    roles: np.ndarray
    segment_ids: np.ndarray
    lam: float
    rho: float

    def __post_init__(self):
        for arr in (self.positions, self.roles, self.segment_ids):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.positions)

    def __getitem__(self, i):
        return Device(
            id=int(i),
            position=tuple(self.positions[i].tolist()),
            initial_role=Role(int(self.roles[i])),
            segment_id=int(self.segment_ids[i]),
        )

    @property
    def devices(self):
        return [self[i] for i in range(len(self))]

    @property
    def patient_zero(self):
        return 0

    @property
    def n_ordinary(self):
        return int(np.count_nonzero(self.roles == Role.ORDINARY))

    @property
    def n_knights(self):
        return int(np.count_nonzero(self.roles == Role.KNIGHT))

    @property
    def knights(self):
        return np.flatnonzero(self.roles == Role.KNIGHT)

    def to_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "x", "y", "role", "segment_id"])
            for i, ((x, y), role, seg) in enumerate(
                zip(self.positions.tolist(), self.roles.tolist(), self.segment_ids.tolist())
            ):
                writer.writerow([i, f"{x:.9g}", f"{y:.9g}", ROLE_CODES[Role(role)], seg])
        return path


def build_device_set(streets, lam, rho, rng, knight_rng=None):
    """Sample ordinary devices (intensity ``lam``) and knights (``rho``) independently.

    Patient zero is an extra device at the street point nearest the origin.
    ``knight_rng`` lets callers keep the ordinary devices fixed while the
    knight intensity varies; it defaults to ``rng``.
    """
    lam = check_positive(lam, "lambda")
    rho = check_nonnegative(rho, "rho")
    if len(streets) == 0 or streets.total_length <= 0:
        raise SimulationEnvironmentError("cannot place devices on an empty street system")
    z_pos, z_seg = nearest_street_point(streets, (0.0, 0.0))
    ord_pts, ord_seg = sample_on_streets(streets, lam, rng)
    kn_pts, kn_seg = sample_on_streets(streets, rho, rng if knight_rng is None else knight_rng)

    positions = np.vstack([np.array([z_pos]), ord_pts, kn_pts])
    roles = np.concatenate(
        [
            [Role.PATIENT_ZERO],
            np.full(len(ord_pts), Role.ORDINARY),
            np.full(len(kn_pts), Role.KNIGHT),
        ]
    ).astype(np.int8)
    segment_ids = np.concatenate([[z_seg], ord_seg, kn_seg]).astype(np.int64)
    return DeviceSet(streets, positions, roles, segment_ids, lam, rho)


def build_device_set_thinned(streets, lam, rho, rng):
    """Alternative construction: one process at ``lam + rho``, each point a knight w.p. ``rho / (lam + rho)``."""
    lam = check_positive(lam, "lambda")
    rho = check_nonnegative(rho, "rho")
    z_pos, z_seg = nearest_street_point(streets, (0.0, 0.0))
    pts, seg = sample_on_streets(streets, lam + rho, rng)
    is_knight = rng.random(len(pts)) < rho / (lam + rho)
    order = np.concatenate([np.flatnonzero(~is_knight), np.flatnonzero(is_knight)])
    positions = np.vstack([np.array([z_pos]), pts[order]])
    roles = np.concatenate(
        [[Role.PATIENT_ZERO], np.where(is_knight[order], Role.KNIGHT, Role.ORDINARY)]
    ).astype(np.int8)
    segment_ids = np.concatenate([[z_seg], seg[order]]).astype(np.int64)
    return DeviceSet(streets, positions, roles, segment_ids, lam, rho)
