"""Random street systems: Poisson-Voronoi tessellations clipped to a square window.

The only street parameter is ``gamma``, the expected street length per unit
area (km^-1). Units are kilometres throughout.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import QhullError, Voronoi

from ._validation import ParameterError, SimulationEnvironmentError, check_positive

# padding around the window, in units of the mean seed spacing 1/sqrt(mu)
PAD_SPACINGS = 4.0
MAX_RESAMPLES = 100
_MIN_LENGTH = 1e-12


@dataclass(frozen=True)
class Window:
    """Axis-aligned square ``[-half_width, half_width]^2`` centred at the origin."""

    half_width: float

    def __post_init__(self):
        check_positive(self.half_width, "half_width")

    @property
    def bounds(self):
        h = self.half_width
        return (-h, -h, h, h)

    @property
    def area(self):
        return (2.0 * self.half_width) ** 2

    def check_observable(self, u, r):
        """Raise unless an epidemic can be observed out to radius ``u``."""
        if u + r > self.half_width + 1e-12:
            raise ParameterError(
                f"window half_width={self.half_width} km is smaller than u + r = {u + r} km"
            )


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple

    @property
    def length(self):
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])


@dataclass(eq=False)
class StreetSystem:
    """Clipped Voronoi edges inside ``window``.

    Segment ``k`` runs from ``a[k]`` to ``b[k]``; ``generators[k]`` holds the
    indices into ``seed_points`` of the two seeds whose cells it separates
    (``-1`` when the system was imported without generator information).
    """

    window: Window
    a: np.ndarray
    b: np.ndarray
    gamma_target: float
    seed_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    generators: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        self.a = np.ascontiguousarray(self.a, dtype=float).reshape(-1, 2)
        self.b = np.ascontiguousarray(self.b, dtype=float).reshape(-1, 2)
        if self.generators is None:
            self.generators = np.full((len(self.a), 2), -1, dtype=np.int64)
        self.lengths = np.hypot(*(self.b - self.a).T)
        for arr in (self.a, self.b, self.lengths, self.seed_points, self.generators):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.a)

    def __eq__(self, other):
        if not isinstance(other, StreetSystem):
            return NotImplemented
        return (
            self.window == other.window
            and self.gamma_target == other.gamma_target
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.seed_points, other.seed_points)
            and np.array_equal(self.generators, other.generators)
        )

    @property
    def total_length(self):
        return float(self.lengths.sum())

    @property
    def segments(self):
        return [Segment(tuple(p), tuple(q)) for p, q in zip(self.a.tolist(), self.b.tolist())]


def calibrate_seed_intensity(gamma):
    """Seed intensity (per km^2) whose Voronoi skeleton has ``gamma`` km of edge per km^2.

    A Poisson-Voronoi tessellation with seed intensity ``mu`` has edge-length
    intensity ``2 * sqrt(mu)``, hence ``mu = (gamma / 2) ** 2``.
    """
    gamma = check_positive(gamma, "gamma")
    return (gamma / 2.0) ** 2


def clip_segments(a, b, rect):
    """Liang-Barsky clipping of segments ``a -> b`` against ``rect = (x0, y0, x1, y1)``.

    Returns the clipped endpoints and a boolean mask of segments that keep a
    non-empty part. Rows where the mask is False carry meaningless endpoints.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    x0, y0, x1, y1 = rect
    d = b - a
    t0 = np.zeros(len(a))
    t1 = np.ones(len(a))
    keep = np.ones(len(a), dtype=bool)
    for p, q in (
        (-d[:, 0], a[:, 0] - x0),
        (d[:, 0], x1 - a[:, 0]),
        (-d[:, 1], a[:, 1] - y0),
        (d[:, 1], y1 - a[:, 1]),
    ):
        parallel = p == 0
        keep &= ~(parallel & (q < 0))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.where(parallel, 0.0, q / np.where(parallel, 1.0, p))
        entering = (p < 0) & ~parallel
        leaving = (p > 0) & ~parallel
        t0 = np.where(entering, np.maximum(t0, ratio), t0)
        t1 = np.where(leaving, np.minimum(t1, ratio), t1)
    keep &= t0 <= t1
    ca = a + t0[:, None] * d
    cb = a + t1[:, None] * d
    # pin endpoints exactly onto the rectangle against round-off
    ca[:, 0] = np.clip(ca[:, 0], x0, x1)
    cb[:, 0] = np.clip(cb[:, 0], x0, x1)
    ca[:, 1] = np.clip(ca[:, 1], y0, y1)
    cb[:, 1] = np.clip(cb[:, 1], y0, y1)
    return ca, cb, keep


def _voronoi_edges(points, reach):
    """All Voronoi ridges of ``points`` as finite segments, with generator pairs.

    Unbounded ridges are cut at distance ``reach`` beyond their finite vertex,
    which must exceed the distance to anything they could still intersect.
    """
    vor = Voronoi(points)
    center = points.mean(axis=0)
    ridge_points = np.asarray(vor.ridge_points, dtype=np.int64)
    ridge_vertices = np.asarray(vor.ridge_vertices, dtype=np.int64)
    finite = (ridge_vertices >= 0).all(axis=1)

    a = np.empty((len(ridge_points), 2))
    b = np.empty((len(ridge_points), 2))
    a[finite] = vor.vertices[ridge_vertices[finite, 0]]
    b[finite] = vor.vertices[ridge_vertices[finite, 1]]

    inf_idx = np.flatnonzero(~finite)
    if len(inf_idx):
        pts = ridge_points[inf_idx]
        verts = ridge_vertices[inf_idx].max(axis=1)
        t = points[pts[:, 1]] - points[pts[:, 0]]
        t /= np.hypot(t[:, 0], t[:, 1])[:, None]
        normal = np.column_stack([-t[:, 1], t[:, 0]])
        midpoint = points[pts].mean(axis=1)
        sign = np.sign(np.einsum("ij,ij->i", midpoint - center, normal))
        sign[sign == 0] = 1.0
        start = vor.vertices[verts]
        a[inf_idx] = start
        b[inf_idx] = start + (sign[:, None] * normal) * reach
    return a, b, ridge_points


def generate_streets(gamma, window, rng):
    """Sample a Poisson-Voronoi street system with edge intensity ``gamma`` in ``window``.

    Seeds are drawn on the window padded by ``PAD_SPACINGS / sqrt(mu)`` on each
    side so that clipping does not bias edge lengths near the border.
    """
    mu = calibrate_seed_intensity(gamma)
    if not isinstance(window, Window):
        window = Window(float(window))
    pad = PAD_SPACINGS / math.sqrt(mu)
    outer = window.half_width + pad
    reach = 8.0 * outer

    for _ in range(MAX_RESAMPLES):
        n = rng.poisson(mu * (2.0 * outer) ** 2)
        points = rng.uniform(-outer, outer, size=(n, 2))
        if n < 3:
            continue
        try:
            a, b, gens = _voronoi_edges(points, reach)
        except QhullError:
            continue
        ca, cb, keep = clip_segments(a, b, window.bounds)
        lengths = np.hypot(*(cb - ca).T)
        keep &= lengths > _MIN_LENGTH
        if not keep.any():
            continue
        return StreetSystem(
            window=window,
            a=ca[keep],
            b=cb[keep],
            gamma_target=float(gamma),
            seed_points=points,
            generators=gens[keep],
        )
    raise SimulationEnvironmentError(
        f"no street crosses the window after {MAX_RESAMPLES} resamples "
        f"(gamma={gamma}, half_width={window.half_width})"
    )


def measure_length(streets, region):
    """Total street length inside the rectangle ``region = (x0, y0, x1, y1)``."""
    if len(streets) == 0:
        return 0.0
    ca, cb, keep = clip_segments(streets.a, streets.b, region)
    return float(np.hypot(*(cb - ca)[keep].T).sum())


def save_streets_csv(streets, path, seed=None):
    """Write one ``ax,ay,bx,by`` row per segment plus a ``.meta.json`` sidecar."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ax", "ay", "bx", "by"])
        for row in np.hstack([streets.a, streets.b]):
            writer.writerow([f"{v:.9f}" for v in row])
    meta = {
        "gamma_target": streets.gamma_target,
        "half_width": streets.window.half_width,
        "seed": streets.seed if seed is None else seed,
    }
    sidecar = path.with_suffix(".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path, sidecar


def load_streets_csv(path):
    path = Path(path)
    meta = json.loads(path.with_suffix(".meta.json").read_text())
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.size == 0:
        rows = np.empty((0, 4))
    return StreetSystem(
        window=Window(float(meta["half_width"])),
        a=rows[:, :2],
        b=rows[:, 2:],
        gamma_target=float(meta["gamma_target"]),
        seed=meta.get("seed"),
    )


def grid_streets(spacing, window):
    """Deterministic Manhattan grid with lines every ``spacing`` km, for tests."""
    check_positive(spacing, "spacing")
    h = window.half_width
    ticks = np.arange(-math.floor(h / spacing), math.floor(h / spacing) + 1) * spacing
    a = [(-h, y) for y in ticks] + [(x, -h) for x in ticks]
    b = [(h, y) for y in ticks] + [(x, h) for x in ticks]
    return StreetSystem(window=window, a=np.array(a), b=np.array(b), gamma_target=2.0 / spacing)
