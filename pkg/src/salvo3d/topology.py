"""Communication graphs, their spectra, and the switching schedule.

Graphs are undirected, unweighted, and validated connected at construction
(the consensus law needs a strictly positive algebraic connectivity on every
topology in the set). The switched network pairs a finite graph family with a
piecewise-constant, right-continuous schedule selecting the active graph.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAX_VERTICES = 64  # the dense Jacobi eigensolver assumes small graphs


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices 0..n-1 with normalized edge tuples."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 1 or self.n > MAX_VERTICES:
            raise ValidationError(f"vertex count {self.n} outside [1, {MAX_VERTICES}]")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValidationError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i}, {j}) outside vertex range")
            if i > j:
                raise ValidationError(f"edge ({i}, {j}) not normalized as i < j")
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if not self._connected():
            raise ValidationError("graph is disconnected")

    def _connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.neighbor_lists()
        stack, seen = [0], {0}
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n

    def neighbor_lists(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj


def graph_from_edges(n: int, edges) -> Graph:
    """Build a Graph from any iterable of (i, j) pairs, normalizing order."""
    norm = sorted((min(i, j), max(i, j)) for i, j in edges)
    return Graph(n=n, edges=tuple(norm))


def laplacian(g: Graph) -> np.ndarray:
    """Dense Laplacian: degree on the diagonal, -1 per edge."""
    lap = np.zeros((g.n, g.n))
    for i, j in g.edges:
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    return lap


def incidence(g: Graph) -> np.ndarray:
    """Vertex-by-edge incidence matrix F with F @ F.T == laplacian.

    Orientation is fixed deterministically: the lower-index endpoint of each
    edge gets +1, the higher-index endpoint -1. The consensus analysis uses
    only F F^T, which is invariant under column sign flips.
    """
    f = np.zeros((g.n, len(g.edges)))
    for col, (i, j) in enumerate(g.edges):
        f[i, col] = 1.0
        f[j, col] = -1.0
    return f


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 64) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Iterates full upper-triangle sweeps until the off-diagonal Frobenius norm
    falls below tol relative to the matrix scale.
    """
    m = np.array(a, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValidationError("matrix must be square")
    if n > MAX_VERTICES:
        raise ValidationError(f"matrix order {n} exceeds {MAX_VERTICES}")
    if not np.allclose(m, m.T, atol=1e-12):
        raise ValidationError("matrix must be symmetric")
    scale = max(1.0, float(np.abs(m).max()))
    for _ in range(max_sweeps):
        off = math.sqrt(float((m**2).sum() - (np.diag(m) ** 2).sum()))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (m[q, q] - m[p, p]) / apq
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * m[:, p] - s * m[:, q]
                rot_q = s * m[:, p] + c * m[:, q]
                m[:, p], m[:, q] = rot_p, rot_q
                rot_p = c * m[p, :] - s * m[q, :]
                rot_q = s * m[p, :] + c * m[q, :]
                m[p, :], m[q, :] = rot_p, rot_q
                m[p, q] = m[q, p] = 0.0
    return np.sort(np.diag(m))


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest Laplacian eigenvalue; > 0 iff the graph is connected."""
    return float(jacobi_eigenvalues(laplacian(g))[1]) if g.n > 1 else 0.0


@dataclass(frozen=True)
class TopologyBounds:
    """Worst-case quantities over a graph set, consumed by the gain bounds."""

    min_edges: int
    min_lambda2: float


@dataclass(frozen=True)
class SwitchedNetwork:
    """A finite graph family plus a right-continuous switching schedule.

    schedule entries are (switch time in s, graph index); times strictly
    increase and there are finitely many of them, so chattering between
    topologies cannot accumulate.
    """

    graphs: tuple[Graph, ...]
    schedule: tuple[tuple[float, int], ...]

    def __post_init__(self) -> None:
        if not self.graphs:
            raise ValidationError("graph set is empty")
        n = self.graphs[0].n
        for k, g in enumerate(self.graphs):
            if g.n != n:
                raise ValidationError(f"graph {k} has {g.n} vertices, expected {n}")
        if not self.schedule:
            raise ValidationError("schedule is empty")
        prev = -math.inf
        for t, idx in self.schedule:
            if t <= prev:
                raise ValidationError("schedule times must be strictly increasing")
            prev = t
            if not (0 <= idx < len(self.graphs)):
                raise ValidationError(f"schedule references unknown graph {idx}")

    @property
    def n(self) -> int:
        return self.graphs[0].n

    def switch_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.schedule)


def active_graph(net: SwitchedNetwork, t: float) -> int:
    """Index of the active graph at time t (right-continuous lookup)."""
    times = net.switch_times()
    if t < times[0]:
        raise ValidationError(f"time {t} precedes first schedule entry {times[0]}")
    pos = bisect_right(times, t) - 1
    return net.schedule[pos][1]


def topology_bounds(net: SwitchedNetwork) -> TopologyBounds:
    """Minimum edge count and minimum algebraic connectivity over the set."""
    lambda2s = [algebraic_connectivity(g) for g in net.graphs]
    min_l2 = min(lambda2s)
    if min_l2 <= 0.0:
        bad = lambda2s.index(min_l2)
        raise ValidationError(f"graph {bad} is disconnected (lambda2 = 0)")
    return TopologyBounds(
        min_edges=min(len(g.edges) for g in net.graphs),
        min_lambda2=min_l2,
    )


def random_schedule(
    n_graphs: int,
    horizon: float,
    dwell_min: float = 0.5,
    dwell_max: float = 2.0,
    seed: int = 0,
    t0: float = 0.0,
) -> tuple[tuple[float, int], ...]:
    """Seeded switching schedule with uniform dwell times over [t0, horizon].

    Each switch moves to a graph different from the current one (a "switch"
    to the same topology would be a no-op), except in the single-graph case.
    """
    if n_graphs < 1:
        raise ValidationError("need at least one graph")
    if not (0.0 < dwell_min <= dwell_max):
        raise ValidationError("dwell bounds must satisfy 0 < dwell_min <= dwell_max")
    rng = np.random.default_rng(seed)
    entries: list[tuple[float, int]] = []
    t = t0
    current = int(rng.integers(n_graphs))
    while t < horizon:
        entries.append((t, current))
        t += float(rng.uniform(dwell_min, dwell_max))
        if n_graphs > 1:
            step = int(rng.integers(1, n_graphs))
            current = (current + step) % n_graphs
    return tuple(entries)
