"""Gilbert graph over device positions, built with a uniform-grid spatial index."""

from __future__ import annotations

import csv
from pathlib import Path

import numba
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from ._validation import ParameterError, check_positive

# cells are inflated by this relative amount so that floating round-off in
# the cell index can never separate two points at distance exactly r by more
# than one ring
_CELL_SLACK = 1e-9


@numba.njit(cache=True)
def _grid_adjacency(x, y, r, cell):
    n = x.shape[0]
    r2 = r * r
    indptr = np.zeros(n + 1, dtype=np.int64)
    if n == 0:
        return indptr, np.empty(0, dtype=np.int64)
    x0 = x.min()
    y0 = y.min()
    cx = np.empty(n, dtype=np.int64)
    cy = np.empty(n, dtype=np.int64)
    for i in range(n):
        cx[i] = np.int64((x[i] - x0) / cell)
        cy[i] = np.int64((y[i] - y0) / cell)
    ny = cy.max() + 3
    keys = (cx + 1) * ny + (cy + 1)
    order = np.argsort(keys, kind="mergesort")
    skeys = keys[order]
    # run-length encode occupied cells
    n_cells = 1
    for k in range(1, n):
        if skeys[k] != skeys[k - 1]:
            n_cells += 1
    ukeys = np.empty(n_cells, dtype=np.int64)
    ustart = np.empty(n_cells + 1, dtype=np.int64)
    c = 0
    ukeys[0] = skeys[0]
    ustart[0] = 0
    for k in range(1, n):
        if skeys[k] != skeys[k - 1]:
            c += 1
            ukeys[c] = skeys[k]
            ustart[c] = k
    ustart[n_cells] = n

    counts = np.zeros(n, dtype=np.int64)
    indices = np.empty(0, dtype=np.int64)
    for pass_ in range(2):
        for i in range(n):
            base = keys[i]
            fill = indptr[i]
            for dxc in range(-1, 2):
                for dyc in range(-1, 2):
                    key = base + dxc * ny + dyc
                    pos = np.searchsorted(ukeys, key)
                    if pos >= n_cells or ukeys[pos] != key:
                        continue
                    for s in range(ustart[pos], ustart[pos + 1]):
                        j = order[s]
                        if j == i:
                            continue
                        dx = x[i] - x[j]
                        dy = y[i] - y[j]
                        if dx * dx + dy * dy <= r2:
                            if pass_ == 0:
                                counts[i] += 1
                            else:
                                indices[fill] = j
                                fill += 1
        if pass_ == 0:
            for i in range(n):
                indptr[i + 1] = indptr[i] + counts[i]
            indices = np.empty(indptr[n], dtype=np.int64)
    for i in range(n):
        indices[indptr[i]:indptr[i + 1]] = np.sort(indices[indptr[i]:indptr[i + 1]])
    return indptr, indices


class GilbertGraph:
    """Undirected graph joining every pair of devices at distance <= ``r``.

    Adjacency is stored in CSR form: the neighbours of ``i`` are
    ``indices[indptr[i]:indptr[i + 1]]``, sorted ascending.
    """

    def __init__(self, positions, r, indptr, indices):
        self.positions = np.asarray(positions, dtype=float)
        self.r = float(r)
        self.indptr = indptr
        self.indices = indices
        for arr in (self.positions, self.indptr, self.indices):
            arr.setflags(write=False)
        self._csr = None

    @property
    def n_nodes(self):
        return len(self.positions)

    @property
    def n_edges(self):
        return len(self.indices) // 2

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self):
        return [self.neighbors(i).tolist() for i in range(self.n_nodes)]

    def edges(self):
        """``(i, j)`` pairs with ``i < j`` as an ``(E, 2)`` array."""
        src = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def to_scipy(self):
        if self._csr is None:
            n = self.n_nodes
            data = np.ones(len(self.indices), dtype=np.int8)
            self._csr = csr_matrix((data, self.indices, self.indptr), shape=(n, n))
        return self._csr

    def to_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["i", "j"])
            writer.writerows(self.edges().tolist())
        return path


def build_graph(devices, r):
    """Gilbert graph of radius ``r`` over a DeviceSet or an ``(n, 2)`` position array.

    Each device only inspects the 3x3 block of grid cells (side ``r``)
    around its own cell.
    """
    r = check_positive(r, "r")
    positions = getattr(devices, "positions", devices)
    positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, 2)
    indptr, indices = _grid_adjacency(
        positions[:, 0].copy(), positions[:, 1].copy(), r, r * (1.0 + _CELL_SLACK)
    )
    return GilbertGraph(positions, r, indptr, indices)


def brute_force_adjacency(positions, r):
    """All-pairs reference adjacency (same ``dx^2 + dy^2 <= r^2`` rule)."""
    positions = np.asarray(positions, dtype=float)
    diff = positions[:, None, :] - positions[None, :, :]
    d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    close = d2 <= r * r
    np.fill_diagonal(close, False)
    return [np.flatnonzero(row).tolist() for row in close]


def degree(graph, i):
    if not (isinstance(i, (int, np.integer)) and 0 <= i < graph.n_nodes):
        raise ParameterError(f"unknown device id {i!r}")
    return int(graph.indptr[i + 1] - graph.indptr[i])


def cluster_of(graph, source):
    """Ids of the connected component containing ``source``."""
    return breadth_first_order(graph.to_scipy(), int(source), directed=False,
                               return_predecessors=False)


def reaches_radius(graph, source, u):
    """Whether the cluster of ``source`` contains a device at distance >= ``u`` from the origin."""
    u = check_positive(u, "u")
    members = cluster_of(graph, source)
    pos = graph.positions[members]
    return bool(np.any(np.hypot(pos[:, 0], pos[:, 1]) >= u))


def hop_distances(graph, source):
    """BFS hop counts from ``source``; -1 for unreachable devices."""
    n = graph.n_nodes
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [int(source)]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for i in frontier:
            for j in graph.neighbors(i):
                if dist[j] < 0:
                    dist[j] = d
                    nxt.append(int(j))
        frontier = nxt
    return dist
