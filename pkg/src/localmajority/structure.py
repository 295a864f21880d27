"""Typicality audit: thresholds, short cycles, properties (a)-(f), tree-regular
vertices and the T-BUILD exploration tree.

Conventions used throughout the audit:

* hop counts use the integer ceilings of the real thresholds (at least 1);
* a cycle or path is *small* when it has at most ``2*omega + 1`` vertices, so a
  small path has at most ``2*omega`` edges;
* in (a) the joining path must be light (all vertices light); in (c) and (d)
  path vertices are unrestricted, and a little/heavy vertex counts whether it
  sits on the cycle, at a path endpoint or in a path interior.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import DegreeSequenceProfile, Graph, ball, bfs_distances
from .protocol import choose_subsets
from .tape import RandomnessTape
from .theory import nu_of, time_constant, tree_population

DEFAULT_C = 1.0
DEFAULT_B = 1.0
DEFAULT_EPS1 = 0.02      # 100 * L1 = 11.45 at n = 1e4, d = 5
DEFAULT_EPS = 0.1
DEFAULT_ETA = 0.5
MAX_WITNESSES = 10
MAX_PATHS = 20_000_000

AUDIT_NOTES = (
    "small = at most 2*omega+1 vertices (2*omega edges); hop thresholds use integer ceilings; "
    "(a) joining paths are light, (c)/(d) paths unrestricted; little/heavy vertices flagged "
    "as cycle members, path endpoints or path interiors; (e) uses n**(1-eta)."
)


def _ceil_hops(x: float) -> int:
    return max(1, math.ceil(x))


@dataclass(frozen=True)
class ThresholdSet:
    n: int
    d: int
    theta: float
    C: float
    B: float
    eps1: float
    eps: float
    omega: float
    ell: float
    h: float
    omega_prime: float
    L1: float
    nu: int
    A: float
    h_clamped: bool

    @property
    def omega_hops(self) -> int:
        return _ceil_hops(self.omega)

    @property
    def h_hops(self) -> int:
        return _ceil_hops(self.h)

    @property
    def omega_prime_hops(self) -> int:
        return _ceil_hops(self.omega_prime)

    @property
    def L1_hops(self) -> int:
        return _ceil_hops(self.L1)

    @property
    def horizon(self) -> float:
        """A * omega', the upper-bound time scale."""
        return self.A * self.omega_prime

    @property
    def horizon_rounds(self) -> int:
        return _ceil_hops(self.horizon)

    @property
    def K(self) -> int:
        return tree_population(self.d, self.h_hops)

    @property
    def small_len(self) -> int:
        return 2 * self.omega_hops + 1

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update(omega_hops=self.omega_hops, h_hops=self.h_hops,
                   omega_prime_hops=self.omega_prime_hops, L1_hops=self.L1_hops,
                   horizon=self.horizon, horizon_rounds=self.horizon_rounds, K=self.K)
        return out


def thresholds(n: int, d: int, theta: float, C: float = DEFAULT_C, B: float = DEFAULT_B,
               eps1: float = DEFAULT_EPS1, eps: float = DEFAULT_EPS) -> ThresholdSet:
    """Evaluate omega, ell, h, omega', L1, nu, A (natural logs unless base d)."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if d < 5:
        raise ValueError(f"need d >= 5, got {d}")
    if theta < 2:
        raise ValueError(f"need average degree >= 2, got {theta}")
    if min(C, B, eps1, eps) <= 0:
        raise ValueError("constants C, B, eps1, eps must be positive")
    logn = math.log(n)
    loglogn = math.log(logn)
    ratio = logn / (loglogn * math.log(theta)) if loglogn > 0 else 0.0
    h = math.log(ratio) / math.log(d) if ratio > 0 else -math.inf
    return ThresholdSet(
        n=n, d=d, theta=theta, C=C, B=B, eps1=eps1, eps=eps,
        omega=C * loglogn, ell=B * logn ** 2, h=h,
        omega_prime=math.log(logn / math.log(d)) / math.log(d),
        L1=eps1 * logn / math.log(d), nu=nu_of(d), A=time_constant(d, eps),
        h_clamped=h <= 0,
    )


# ---------------------------------------------------------------- short cycles

def _extend_paths(g: Graph, paths: np.ndarray) -> np.ndarray:
    """Extend each path by one edge to a fresh vertex larger than its start."""
    table = g.padded
    nxt = table[paths[:, -1]]
    ok = nxt > paths[:, :1]
    for col in range(1, paths.shape[1]):
        ok &= nxt != paths[:, col:col + 1]
    rows, cols = np.nonzero(ok)
    return np.column_stack([paths[rows], nxt[rows, cols]])


def _disjoint(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ok = np.ones(a.shape[0], dtype=bool)
    for i in range(a.shape[1]):
        for j in range(b.shape[1]):
            ok &= a[:, i] != b[:, j]
    return ok


def _cycles_from_paths(g: Graph, paths: np.ndarray, odd: bool) -> list[tuple[int, ...]]:
    """Join pairs of equal-length paths from the same minimal start into cycles."""
    r = paths.shape[1] - 1
    if paths.shape[0] == 0 or (not odd and r < 2):
        return []
    key = paths[:, 0] * g.n + paths[:, -1]
    order = np.argsort(key, kind="stable")
    paths, key = paths[order], key[order]
    if odd:
        table = g.padded
        target = paths[:, :1] * g.n + table[paths[:, -1]]
        target[table[paths[:, -1]] < 0] = -1
        lo = np.searchsorted(key, target, side="left")
        hi = np.searchsorted(key, target, side="right")
        cnt = (hi - lo).ravel()
        i = np.repeat(np.repeat(np.arange(paths.shape[0]), table.shape[1]), cnt)
        j = np.repeat(lo.ravel(), cnt) + (np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt))
        a, b = paths[i], paths[j]
        keep = (a[:, 1] < b[:, 1]) & _disjoint(a[:, 1:], b[:, 1:])
    else:
        i_list, j_list = [], []
        for off in range(1, paths.shape[0]):
            same = np.flatnonzero(key[off:] == key[:-off])
            if same.size == 0:
                break
            i_list.append(same)
            j_list.append(same + off)
        if not i_list:
            return []
        i, j = np.concatenate(i_list), np.concatenate(j_list)
        a, b = paths[i], paths[j]
        swap = a[:, 1] > b[:, 1]
        a[swap], b[swap] = b[swap], a[swap].copy()
        keep = _disjoint(a[:, 1:-1], b[:, 1:-1])
        b = b[:, :-1]
    a, b = a[keep], b[keep]
    cyc = np.concatenate([a, b[:, :0:-1]], axis=1)
    return [tuple(c) for c in cyc.tolist()]


def enumerate_cycles(g: Graph, max_len: int):
    """Yield lists of all simple cycles of length 3..max_len, one length at a time.

    Each cycle appears once, starting at its smallest vertex and continuing to
    the smaller of that vertex's two cycle neighbours.
    """
    if max_len < 3:
        return
    paths = np.column_stack([np.arange(g.n)])
    for r in range(1, max_len // 2 + 1):
        paths = _extend_paths(g, paths)
        if paths.shape[0] > MAX_PATHS:
            raise MemoryError(f"{paths.shape[0]} candidate paths of length {r}; horizon too large")
        if 2 * r <= max_len and r >= 2:
            yield 2 * r, sorted(_cycles_from_paths(g, paths, odd=False))
        if 2 * r + 1 <= max_len:
            yield 2 * r + 1, sorted(_cycles_from_paths(g, paths, odd=True))


def find_small_cycles(g: Graph, omega: int) -> list[tuple[int, ...]]:
    """All cycles with at most 2*omega + 1 vertices, shortest first."""
    if omega < 1:
        raise ValueError(f"omega must be at least 1, got {omega}")
    out: list[tuple[int, ...]] = []
    for _, cycles in enumerate_cycles(g, 2 * omega + 1):
        out.extend(cycles)
    return out


# ---------------------------------------------------------------- witnesses

@dataclass(frozen=True)
class Witness:
    prop: str
    cycles: tuple[tuple[int, ...], ...] = ()
    path: tuple[int, ...] = ()
    vertex: int | None = None

    def as_dict(self) -> dict:
        return {"property": self.prop, "cycles": [list(c) for c in self.cycles],
                "path": list(self.path), "vertex": self.vertex}


def _path_back(g: Graph, dist: np.ndarray, start: int, allowed=None) -> tuple[int, ...]:
    """Walk down a BFS distance field from ``start`` to a source."""
    path = [start]
    x = start
    while dist[x] > 0:
        for y in g.neighbours(x).tolist():
            if dist[y] == dist[x] - 1 and (allowed is None or allowed[y]):
                x = y
                break
        path.append(x)
    return tuple(path)


def is_cycle(g: Graph, cyc) -> bool:
    cyc = list(cyc)
    if len(cyc) < 3 or len(set(cyc)) != len(cyc):
        return False
    return all(g.has_edge(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc)))


def is_path(g: Graph, path) -> bool:
    path = list(path)
    if not path or len(set(path)) != len(path):
        return False
    return all(g.has_edge(a, b) for a, b in zip(path, path[1:]))


def verify_witness(g: Graph, w: Witness, t: ThresholdSet, d_eff: int) -> bool:
    """Independently re-check, on ``g``, that ``w`` violates its property."""
    small = t.small_len
    light = lambda xs: all(g.degree(x) <= t.ell for x in xs)  # noqa: E731
    bad = lambda x: g.degree(x) > t.ell or g.degree(x) < d_eff  # noqa: E731
    cycles_ok = all(is_cycle(g, c) and len(c) <= small for c in w.cycles)
    if w.prop == "a":
        c1, c2 = w.cycles
        return (cycles_ok and light(c1) and light(c2) and not set(c1) & set(c2)
                and is_path(g, w.path) and len(w.path) <= small and light(w.path)
                and w.path[0] in c2 and w.path[-1] in c1)
    if w.prop == "b":
        c1, c2 = w.cycles
        return (cycles_ok and set(c1) != set(c2) and light(c1) and light(c2)
                and w.vertex in c1 and w.vertex in c2)
    if w.prop == "c":
        (c,) = w.cycles
        return (cycles_ok and is_path(g, w.path) and len(w.path) <= small
                and w.path[0] in c and bad(w.path[-1]))
    if w.prop == "d":
        return (is_path(g, w.path) and 2 <= len(w.path) <= small
                and bad(w.path[0]) and bad(w.path[-1]))
    if w.prop == "f":
        c1, c2 = w.cycles
        limit = max(1, math.ceil(100 * t.L1))
        if not (all(is_cycle(g, c) and len(c) <= limit for c in w.cycles) and set(c1) != set(c2)):
            return False
        dist = bfs_distances(g, list(c1), limit=limit)
        return bool((dist[list(c2)] >= 0).any())
    raise ValueError(f"unknown property {w.prop!r}")


# ---------------------------------------------------------------- tree-regular vertices

def _reach_stats(g: Graph, radii, indicators: dict[str, np.ndarray]):
    """Per-vertex ball sizes, induced edge counts and indicator counts for each radius."""
    A = g.adjacency_matrix.astype(bool).astype(np.int32)
    R = sp.identity(g.n, dtype=np.int32, format="csr")
    out = {}
    for s in range(0, max(radii) + 1):
        if s:
            R = ((R + R @ A) > 0).astype(np.int32)
        if s in radii:
            size = np.asarray(R.sum(axis=1)).ravel()
            twice = np.asarray((R @ A).multiply(R).sum(axis=1)).ravel()
            counts = {name: R @ ind.astype(np.int32) for name, ind in indicators.items()}
            out[s] = (size, twice // 2, counts)
    return out


def _tree_regular_mask_bfs(g: Graph, d: int, h: int, omega: int, ell: float) -> np.ndarray:
    deg = g.degrees
    ok = np.zeros(g.n, dtype=bool)
    for v in range(g.n):
        bw = ball(g, v, max(h, omega))
        if any(bw.depth[x] <= omega and not d <= deg[x] <= ell for x in bw.vertices):
            continue
        if any(bw.depth[x] < h and deg[x] != d for x in bw.vertices):
            continue
        inner_w = sum(1 for x in bw.vertices if bw.depth[x] <= omega)
        inner_h = sum(1 for x in bw.vertices if bw.depth[x] <= h)
        e_w = sum(1 for x, y in bw.edges if bw.depth[x] <= omega and bw.depth[y] <= omega)
        e_h = sum(1 for x, y in bw.edges if bw.depth[x] <= h and bw.depth[y] <= h)
        ok[v] = e_w == inner_w - 1 and e_h == inner_h - 1
    return ok


def tree_regular_mask(g: Graph, d: int, h: int, omega: int, ell: float) -> np.ndarray:
    """Boolean mask of d-tree-regular vertices (depth h, compliance radius omega)."""
    if g.n == 0:
        return np.zeros(0, dtype=bool)
    deg = g.degrees
    radius = max(h, omega)
    est = g.n * min(g.n, float(np.mean(deg) + 1) ** radius)
    if est > 5e7:
        return _tree_regular_mask_bfs(g, d, h, omega, ell)
    radii = {omega, h} | ({h - 1} if h >= 1 else set())
    stats = _reach_stats(g, radii, {
        "not_d": deg != d, "little": deg < d, "heavy": deg > ell,
    })
    size_w, edges_w, cnt_w = stats[omega]
    size_h, edges_h, _ = stats[h]
    ok = (edges_w == size_w - 1) & (edges_h == size_h - 1)
    ok &= (cnt_w["little"] == 0) & (cnt_w["heavy"] == 0)
    if h >= 1:
        ok &= stats[h - 1][2]["not_d"] == 0
    return ok


def count_tree_regular(g: Graph, d: int, h: int, omega: int, ell: float) -> tuple[int, list[int]]:
    mask = tree_regular_mask(g, d, h, omega, ell)
    return int(mask.sum()), np.flatnonzero(mask).tolist()


# ---------------------------------------------------------------- typicality

@dataclass
class TypicalityReport:
    verdicts: dict[str, bool]
    witnesses: dict[str, list[Witness]]
    tree_regular_count: int
    tree_regular_threshold: float
    small_cycles: list[tuple[int, ...]]
    light_count: int
    heavy_count: int
    little_count: int
    thresholds: ThresholdSet
    effective_degree: int
    notes: str = AUDIT_NOTES
    regular: dict | None = field(default=None)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def as_dict(self) -> dict:
        return {
            "notes": self.notes,
            "verdicts": dict(self.verdicts),
            "witnesses": {k: [w.as_dict() for w in ws] for k, ws in self.witnesses.items()},
            "thresholds": self.thresholds.as_dict(),
            "counts": {
                "n": self.thresholds.n,
                "effective_degree": self.effective_degree,
                "tree_regular": self.tree_regular_count,
                "tree_regular_threshold": self.tree_regular_threshold,
                "small_cycles": len(self.small_cycles),
                "light": self.light_count,
                "heavy": self.heavy_count,
                "little": self.little_count,
            },
            "small_cycles": [list(c) for c in self.small_cycles],
            "regular": self.regular,
        }


def _check_a(g, cycles, light_mask, omega, cap):
    found = []
    light_cycles = [c for c in cycles if light_mask[list(c)].all()]
    member = {}
    for idx, c in enumerate(light_cycles):
        for x in c:
            member.setdefault(x, []).append(idx)
    for idx, c in enumerate(light_cycles):
        dist = bfs_distances(g, list(c), limit=2 * omega, allowed=light_mask)
        cset = set(c)
        best = None
        for x in np.flatnonzero(dist >= 0).tolist():
            for j in member.get(x, ()):
                if j > idx and not cset & set(light_cycles[j]):
                    if best is None or dist[x] < best[0]:
                        best = (int(dist[x]), x, j)
        if best is not None:
            _, x, j = best
            path = _path_back(g, dist, x, allowed=light_mask)
            found.append(Witness("a", cycles=(c, light_cycles[j]), path=path))
            if len(found) >= cap:
                break
    return found


def _check_b(cycles, light_mask, cap):
    found = []
    seen: dict[int, tuple] = {}
    for c in cycles:
        if not light_mask[list(c)].all():
            continue
        for x in c:
            if x in seen:
                found.append(Witness("b", cycles=(seen[x], c), vertex=x))
                if len(found) >= cap:
                    return found
            else:
                seen[x] = c
    return found


def _check_c(g, cycles, bad, omega, cap):
    found = []
    if not bad.size:
        return found
    dist = bfs_distances(g, bad, limit=2 * omega)
    for c in cycles:
        dc = dist[list(c)]
        if (dc >= 0).any():
            start = c[int(np.argmin(np.where(dc >= 0, dc, np.iinfo(np.int64).max)))]
            found.append(Witness("c", cycles=(c,), path=_path_back(g, dist, start)))
            if len(found) >= cap:
                break
    return found


def _check_d(g, bad, omega, cap):
    found = []
    bad_set = np.zeros(g.n, dtype=bool)
    bad_set[bad] = True
    for b in bad.tolist():
        dist = bfs_distances(g, [b], limit=2 * omega)
        hits = np.flatnonzero((dist > 0) & bad_set)
        hits = hits[hits > b]
        if hits.size:
            x = int(hits[np.argmin(dist[hits])])
            found.append(Witness("d", path=_path_back(g, dist, x)))
            if len(found) >= cap:
                break
    return found


def check_typicality(g: Graph, t: ThresholdSet, profile: DegreeSequenceProfile,
                     eta: float = DEFAULT_ETA, max_witnesses: int = MAX_WITNESSES) -> TypicalityReport:
    """Audit (a)-(e).  Failures are verdicts, never exceptions."""
    omega = t.omega_hops
    deg = g.degrees
    d_eff = profile.effective_degree
    light_mask = deg <= t.ell
    bad = np.flatnonzero((deg > t.ell) | (deg < d_eff))
    cycles = find_small_cycles(g, omega)
    witnesses = {
        "a": _check_a(g, cycles, light_mask, omega, max_witnesses),
        "b": _check_b(cycles, light_mask, max_witnesses),
        "c": _check_c(g, cycles, bad, omega, max_witnesses),
        "d": _check_d(g, bad, omega, max_witnesses),
    }
    count = int(tree_regular_mask(g, d_eff, t.h_hops, omega, t.ell).sum())
    need = g.n ** (1 - eta)
    verdicts = {k: not ws for k, ws in witnesses.items()}
    verdicts["e"] = count >= need
    witnesses["e"] = []
    return TypicalityReport(
        verdicts=verdicts, witnesses=witnesses, tree_regular_count=count,
        tree_regular_threshold=need, small_cycles=cycles,
        light_count=int(light_mask.sum()), heavy_count=int((deg > t.ell).sum()),
        little_count=int((deg < d_eff).sum()), thresholds=t, effective_degree=d_eff,
    )


@dataclass(frozen=True)
class RegularVerdict:
    passed: bool
    limit: int
    witness: Witness | None = None


def check_regular_typicality(g: Graph, L1: float) -> RegularVerdict:
    """(f): no two cycles of length <= 100*L1 within distance 100*L1 of each other.

    Cycles are enumerated shortest first and the scan stops at the first
    offending pair.
    """
    limit = max(1, math.ceil(100 * L1))
    seen: list[tuple[int, ...]] = []
    owner: dict[int, int] = {}
    for _, cycles in enumerate_cycles(g, limit):
        for c in cycles:
            hit = next((owner[x] for x in c if x in owner), None)
            if hit is None and seen:
                dist = bfs_distances(g, list(c), limit=limit)
                near = [owner[x] for x in np.flatnonzero(dist >= 0).tolist() if x in owner]
                hit = near[0] if near else None
            if hit is not None:
                return RegularVerdict(False, limit, Witness("f", cycles=(seen[hit], c)))
            for x in c:
                owner[x] = len(seen)
            seen.append(c)
    return RegularVerdict(True, limit)


# ---------------------------------------------------------------- T-BUILD

@dataclass(frozen=True)
class ExplorationTree:
    root: int
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]      # multiset, in insertion order
    level: dict[int, int]                   # the algorithm's map
    cycle_count: int
    parent_returns: int                     # revisits of the picker's own tree parent

    @property
    def excess(self) -> int:
        return len(self.edges) - len(self.vertices) + 1


def t_build(g: Graph, v: int, depth: int, d: int, tape: RandomnessTape) -> ExplorationTree:
    """Level-by-level exploration along the protocol's own subset choices.

    Level-i vertices expand with N_x(depth - i), the subsets MP^d draws at
    round depth - i.  A pick that is already in the tree increments
    ``cycle_count``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if d % 2 == 0:
        raise ValueError(f"subset size must be odd, got {d}")
    verts = [v]
    in_tree = {v}
    level = {v: 0}
    parent = {v: None}
    edges: list[tuple[int, int]] = []
    cycles = returns = 0
    for i in range(depth):
        t = depth - i
        pos = 0
        while pos < len(verts):          # the vertex list may grow while scanning
            x = verts[pos]
            pos += 1
            if level[x] != i:
                continue
            chosen, mask = choose_subsets(g, d, tape, t, [x])
            for y in chosen[0][mask[0]].tolist():
                if y in in_tree:
                    cycles += 1
                    returns += parent.get(x) == y
                else:
                    in_tree.add(y)
                    verts.append(y)
                    parent[y] = x
                level[y] = i + 1
                edges.append((x, y))
    return ExplorationTree(v, tuple(verts), tuple(edges), level, cycles, returns)
