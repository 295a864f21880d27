"""Simple undirected graphs, BFS balls and degree-sequence profiling."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import (
    DuplicateEdgeError,
    EdgeListFormatError,
    GraphError,
    NoEffectiveDegreeError,
    SelfLoopError,
    VertexRangeError,
)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph stored in CSR form with sorted neighbour lists."""

    n: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        deg = np.diff(self.indptr)
        if deg.sum() % 2:
            raise GraphError("odd degree sum: adjacency is not symmetric")

    @property
    def m(self) -> int:
        return int(self.indices.size // 2)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.setflags(write=False)
        return d

    def neighbours(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def padded(self) -> np.ndarray:
        """(n, max_degree) neighbour table, -1 in unused slots."""
        width = max(self.max_degree, 1)
        table = np.full((self.n, width), -1, dtype=np.int64)
        rows = np.repeat(np.arange(self.n), self.degrees)
        cols = np.arange(self.indices.size) - np.repeat(self.indptr[:-1], self.degrees)
        table[rows, cols] = self.indices
        table.setflags(write=False)
        return table

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.int32)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, in lexicographic order."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbours(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    @cached_property
    def degree_histogram(self) -> dict[int, int]:
        values, counts = np.unique(self.degrees, return_counts=True)
        return {int(j): int(c) for j, c in zip(values, counts)}

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return bool((bfs_distances(self, [0]) >= 0).all())

    def relabel(self, perm) -> "Graph":
        """Graph in which old vertex v becomes perm[v]."""
        perm = np.asarray(perm)
        e = perm[self.edges()]
        return build_graph(self.n, e)

    def induced(self, vertices) -> tuple["Graph", np.ndarray]:
        """Induced subgraph on ``vertices``; returns it with the old ids."""
        vertices = np.unique(np.asarray(vertices, dtype=np.int64))
        pos = np.full(self.n, -1)
        pos[vertices] = np.arange(vertices.size)
        e = self.edges()
        keep = (pos[e[:, 0]] >= 0) & (pos[e[:, 1]] >= 0)
        return build_graph(vertices.size, pos[e[keep]]), vertices


def build_graph(n: int, edges) -> Graph:
    """Validate an edge list and build the graph.

    Raises SelfLoopError, DuplicateEdgeError or VertexRangeError.
    """
    if n < 0:
        raise GraphError(f"negative vertex count {n}")
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size:
        bad = (e < 0) | (e >= n)
        if bad.any():
            i = int(np.argwhere(bad.any(axis=1))[0, 0])
            raise VertexRangeError(f"edge {tuple(e[i])} has a vertex outside [0, {n})")
        loops = e[:, 0] == e[:, 1]
        if loops.any():
            raise SelfLoopError(f"self-loop at vertex {int(e[loops][0, 0])}")
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    key = np.sort(lo * max(n, 1) + hi)
    dup = key[1:] == key[:-1]
    if dup.any():
        k = int(key[1:][dup][0])
        raise DuplicateEdgeError(f"duplicate edge ({k // n}, {k % n})")
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, indptr, dst[order].astype(np.int64))


def complete_graph(n: int) -> Graph:
    iu = np.triu_indices(n, 1)
    return build_graph(n, np.column_stack(iu))


def regular_tree(d: int, depth: int) -> Graph:
    """Ball of radius ``depth`` in the infinite d-regular tree, rooted at 0."""
    edges = []
    frontier = [0]
    nxt = 1
    for level in range(depth):
        new = []
        for x in frontier:
            for _ in range(d if level == 0 else d - 1):
                edges.append((x, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return build_graph(nxt, edges)


# ---------------------------------------------------------------- edge lists

def parse_edge_list(text: str) -> Graph:
    """Parse the "n m" header + "u v" lines format (0-indexed, u < v)."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise EdgeListFormatError("empty input: missing 'n m' header")

    def ints(lineno, line):
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListFormatError(f"line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            return int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListFormatError(f"line {lineno}: non-integer field in {line!r}") from None

    n, m = ints(1, lines[0])
    if n < 0 or m < 0:
        raise EdgeListFormatError("line 1: n and m must be non-negative")
    if len(lines) - 1 != m:
        raise EdgeListFormatError(f"header declares {m} edges, found {len(lines) - 1}")
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        u, v = ints(lineno, line)
        if u == v:
            raise SelfLoopError(f"line {lineno}: self-loop at {u}")
        if u > v:
            raise EdgeListFormatError(f"line {lineno}: expected u < v, got {u} {v}")
        edges.append((u, v))
    return build_graph(n, edges)


def format_edge_list(g: Graph) -> str:
    e = g.edges()
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in e.tolist())
    return "\n".join(out) + "\n"


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


# ---------------------------------------------------------------- profiling

@dataclass(frozen=True)
class DegreeSequenceProfile:
    n: int
    histogram: dict[int, int]
    min_degree: int
    max_degree: int
    average_degree: float
    effective_degree: int
    kappa_hat: float
    gamma: float
    c: float
    kappa_min: float
    connected: bool
    # condition label -> (measured, threshold, verdict)
    conditions: dict[str, tuple[float, float, bool]]

    @property
    def verdicts(self) -> dict[str, bool]:
        return {k: v[2] for k, v in self.conditions.items()}

    @property
    def is_nice(self) -> bool:
        return all(self.verdicts.values())

    def as_dict(self) -> dict:
        return {
            "n": self.n, "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "min_degree": self.min_degree, "max_degree": self.max_degree,
            "average_degree": self.average_degree, "effective_degree": self.effective_degree,
            "kappa_hat": self.kappa_hat, "gamma": self.gamma, "c": self.c,
            "kappa_min": self.kappa_min, "connected": self.connected,
            "conditions": {k: {"measured": m, "threshold": t, "verdict": v}
                           for k, (m, t, v) in self.conditions.items()},
        }


def degree_profile(g: Graph, c: float = 0.1, kappa_min: float = 0.25) -> DegreeSequenceProfile:
    """Profile the degree sequence against finite-n versions of (i)-(vii).

    Asymptotic conditions are replaced by explicit inequalities:

    * (i)   average degree <= sqrt(log n)
    * (ii)  minimum degree >= 3
    * (iii) n_d >= kappa_min * n for the effective minimum degree d
    * (iv)  number of little vertices <= n ** (c (d - 1) / d)
    * (v)   maximum degree <= n ** (c (d - 1) / d)
    * (vi)  number of vertices of degree >= gamma * theta <= 10 * max degree
    * (vii) d >= 5
    """
    if g.n == 0:
        raise GraphError("cannot profile an empty graph")
    if not 0 < c < 0.125:
        raise ValueError(f"c must lie in (0, 1/8), got {c}")
    if not 0 < kappa_min <= 1:
        raise ValueError(f"kappa_min must lie in (0, 1], got {kappa_min}")
    n = g.n
    hist = g.degree_histogram
    delta, Delta = min(hist), max(hist)
    theta = 2 * g.m / n
    eff = next((j for j in sorted(hist) if hist[j] >= kappa_min * n), None)
    if eff is None:
        raise NoEffectiveDegreeError(
            f"no effective minimum degree: no degree class holds {kappa_min:.3g} of the vertices")
    logn = math.log(n) if n > 1 else 0.0
    gamma = (math.sqrt(logn) / theta) ** (1 / 3) if theta > 0 else math.inf
    power = n ** (c * (eff - 1) / eff) if eff > 0 else 1.0
    little = sum(cnt for j, cnt in hist.items() if j < eff)
    upper_tail = sum(cnt for j, cnt in hist.items() if j >= gamma * theta)
    conditions = {
        "i": (theta, math.sqrt(logn), theta <= math.sqrt(logn)),
        "ii": (delta, 3, delta >= 3),
        "iii": (hist[eff] / n, kappa_min, hist[eff] >= kappa_min * n),
        "iv": (little, power, little <= power),
        "v": (Delta, power, Delta <= power),
        "vi": (upper_tail, 10 * Delta, upper_tail <= 10 * Delta),
        "vii": (eff, 5, eff >= 5),
    }
    return DegreeSequenceProfile(
        n=n, histogram=dict(hist), min_degree=delta, max_degree=Delta,
        average_degree=theta, effective_degree=eff, kappa_hat=hist[eff] / n,
        gamma=gamma, c=c, kappa_min=kappa_min, connected=g.is_connected(),
        conditions=conditions,
    )


# ---------------------------------------------------------------- balls

def bfs_distances(g: Graph, sources, limit: int | None = None, allowed=None) -> np.ndarray:
    """Hop distance from the nearest source; -1 where unreachable or beyond ``limit``.

    ``allowed`` optionally restricts which vertices the search may enter.
    """
    dist = np.full(g.n, -1, dtype=np.int64)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    dist[frontier] = 0
    level = 0
    indptr, indices = g.indptr, g.indices
    while frontier.size and (limit is None or level < limit):
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        total = int(lens.sum())
        if total == 0:
            break
        idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
        nb = np.unique(indices[idx])
        nb = nb[dist[nb] < 0]
        if allowed is not None:
            nb = nb[allowed[nb]]
        level += 1
        dist[nb] = level
        frontier = nb
    return dist


@dataclass(frozen=True)
class BallView:
    """G[v, s]: the subgraph induced by the vertices within ``radius`` of ``root``."""

    root: int
    radius: int
    vertices: tuple[int, ...]          # BFS order
    depth: dict[int, int]
    parent: dict[int, int]             # BFS parent of every non-root member
    degree: dict[int, int]             # degree in the host graph
    edges: tuple[tuple[int, int], ...]  # induced edges, u < v

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @property
    def is_tree(self) -> bool:
        return len(self.edges) == len(self.vertices) - 1

    @property
    def leaf_set(self) -> frozenset[int]:
        return frozenset(x for x in self.vertices if self.depth[x] == self.radius)

    def __contains__(self, x) -> bool:
        return x in self.depth

    def __len__(self) -> int:
        return len(self.vertices)

    def level(self, i: int) -> list[int]:
        return [x for x in self.vertices if self.depth[x] == i]


def ball(g: Graph, v: int, s: int) -> BallView:
    if not 0 <= v < g.n:
        raise VertexRangeError(f"vertex {v} outside [0, {g.n})")
    if s < 0:
        raise ValueError(f"radius must be non-negative, got {s}")
    depth = {v: 0}
    parent: dict[int, int] = {}
    order = [v]
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if depth[x] == s:
            continue
        for y in g.neighbours(x).tolist():
            if y not in depth:
                depth[y] = depth[x] + 1
                parent[y] = x
                order.append(y)
                queue.append(y)
    edges = tuple((x, y) for x in order for y in g.neighbours(x).tolist() if x < y and y in depth)
    degree = {x: g.degree(x) for x in order}
    return BallView(v, s, tuple(order), depth, parent, degree, edges)


def is_tree_like(b: BallView, d: int, h: int) -> bool:
    """True iff G[root, h] is a d-regular tree: a tree whose levels 0..h-1 have degree d."""
    if b.radius < h:
        raise ValueError(f"ball radius {b.radius} is smaller than the depth {h}")
    inner = [x for x in b.vertices if b.depth[x] <= h]
    if any(b.degree[x] != d for x in inner if b.depth[x] < h):
        return False
    m = sum(1 for x, y in b.edges if b.depth[x] <= h and b.depth[y] <= h)
    return m == len(inner) - 1
