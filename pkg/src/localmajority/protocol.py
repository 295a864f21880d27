"""Synchronous local majority dynamics driven by a keyed randomness tape.

Colourings are uint8 arrays with 1 = blue and 0 = red.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoEffectiveDegreeError, ScopeError
from .graph import BallView, Graph, ball, degree_profile
from .tape import Purpose, RandomnessTape
from .theory import default_max_rounds

BLUE, RED = 1, 0
_NO_KEY = np.iinfo(np.uint64).max


def k_of(k, d_v):
    """min(k, largest odd integer <= d_v); vectorises over ``d_v``."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"k must be a positive odd integer, got {k}")
    d_v = np.asarray(d_v)
    out = np.minimum(k, 2 * ((d_v - 1) // 2) + 1)
    return int(out) if out.ndim == 0 else out


def initial_colouring(n: int, alpha: float, tape: RandomnessTape) -> np.ndarray:
    """Each vertex is red independently with probability alpha."""
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    u = tape.vertex_uniform(Purpose.INITIAL_COLOUR, np.arange(n))
    return (u >= alpha).astype(np.uint8)


def choose_subsets(g: Graph, k: int, tape: RandomnessTape, t: int, vertices=None):
    """N_v(t) for each requested vertex.

    Returns ``(chosen, mask)``: ``chosen[i, j]`` is a neighbour id where
    ``mask[i, j]`` holds.  The subset is the k(v) neighbours with the smallest
    keys, so it is uniform over all k(v)-subsets and depends only on the key
    (seed, subset-choice, v, t, w).
    """
    vertices = np.arange(g.n) if vertices is None else np.asarray(vertices, dtype=np.int64)
    table = g.padded[vertices]
    deg = g.degrees[vertices]
    kv = k_of(k, deg)
    if vertices.size == 0:
        return table[:, :0], np.zeros((0, 0), dtype=bool)
    width = int(kv.max()) if kv.size else 0
    if np.array_equal(kv, deg) and (deg == table.shape[1]).all():
        return table, np.ones(table.shape, dtype=bool)
    keys = tape.subset_keys(vertices, t, np.maximum(table, 0))
    keys[table < 0] = _NO_KEY
    if width < table.shape[1]:
        part = np.argpartition(keys, width - 1, axis=1)[:, :width] if width else table[:, :0]
    else:
        part = np.broadcast_to(np.arange(table.shape[1]), table.shape)
    chosen = np.take_along_axis(table, part, axis=1)
    mask = np.arange(width)[None, :] < kv[:, None]
    if width:
        # argpartition leaves order inside the first `width` unspecified; rank by key
        rank = np.argsort(np.take_along_axis(keys, part, axis=1), axis=1)
        chosen = np.take_along_axis(chosen, rank, axis=1)
    return chosen[:, :width], mask


def _blue_votes(chosen, mask, colouring):
    return np.where(mask, colouring[np.maximum(chosen, 0)], 0).sum(axis=1)


def step_mp(g: Graph, colouring, k: int, tape: RandomnessTape, t: int) -> np.ndarray:
    """One synchronous MP^k round producing the colouring at time t."""
    colouring = np.asarray(colouring, dtype=np.uint8)
    chosen, mask = choose_subsets(g, k, tape, t)
    kv = k_of(k, g.degrees)
    return (2 * _blue_votes(chosen, mask, colouring) > kv).astype(np.uint8)


@dataclass(frozen=True)
class MMPScope:
    """The tree G[root, radius] inside which parents are assumed red."""

    root: int
    radius: int
    tree: BallView

    def parent_array(self, n: int) -> np.ndarray:
        par = np.full(n, -1, dtype=np.int64)
        for child, p in self.tree.parent.items():
            par[child] = p
        return par


def mmp_scope(g: Graph, root: int, radius: int) -> MMPScope:
    b = ball(g, root, radius)
    if not b.is_tree:
        raise ScopeError(f"G[{root}, {radius}] is not a tree")
    return MMPScope(root, radius, b)


def step_mmp(g: Graph, colouring, k: int, scope: MMPScope, tape: RandomnessTape, t: int) -> np.ndarray:
    """One MMP^k(v, s) round: as MP, but a sampled tree parent always votes red."""
    if not scope.tree.is_tree:
        raise ScopeError("scope ball is not a tree")
    colouring = np.asarray(colouring, dtype=np.uint8)
    chosen, mask = choose_subsets(g, k, tape, t)
    kv = k_of(k, g.degrees)
    votes = _blue_votes(chosen, mask, colouring)
    par = scope.parent_array(g.n)
    picked_parent = ((chosen == par[:, None]) & mask).any(axis=1) & (par >= 0)
    votes = votes - (picked_parent & (colouring[np.maximum(par, 0)] == BLUE))
    return (2 * votes > kv).astype(np.uint8)


# ---------------------------------------------------------------- runs

@dataclass(frozen=True)
class MP:
    k: int

    def step(self, g, colouring, tape, t):
        return step_mp(g, colouring, self.k, tape, t)

    def describe(self) -> str:
        return f"MP^{self.k}"


@dataclass(frozen=True)
class MMP:
    k: int
    scope: MMPScope

    def step(self, g, colouring, tape, t):
        return step_mmp(g, colouring, self.k, self.scope, tape, t)

    def describe(self) -> str:
        return f"MMP^{self.k}({self.scope.root},{self.scope.radius})"


@dataclass(frozen=True)
class ProtocolRun:
    protocol: str
    alpha: float
    red_counts: tuple[int, ...]
    consensus_time: int | None
    consensus_colour: str | None
    initial_majority: str | None
    colourings: tuple[np.ndarray, ...] | None = None

    @property
    def majority_correct(self) -> bool | None:
        if self.consensus_time is None:
            return None
        return self.consensus_colour == self.initial_majority

    @property
    def rounds(self) -> int:
        return len(self.red_counts) - 1


def _consensus(colouring) -> str | None:
    if colouring.all():
        return "blue"
    if not colouring.any():
        return "red"
    return None


def _majority(colouring) -> str | None:
    blue = int(colouring.sum())
    red = colouring.size - blue
    if blue == red:
        return None
    return "blue" if blue > red else "red"


def effective_degree_or_min(g: Graph) -> int:
    try:
        return degree_profile(g).effective_degree
    except NoEffectiveDegreeError:
        return int(g.degrees.min())


def run(g: Graph, protocol, alpha: float, tape: RandomnessTape, max_rounds: int | None = None,
        initial=None, keep_colourings: bool = False) -> ProtocolRun:
    """Iterate ``protocol`` from the tape's initial colouring until consensus.

    ``initial`` overrides the starting colouring (used for planted
    configurations).  Non-consensus within ``max_rounds`` is a valid outcome.
    """
    if max_rounds is None:
        max_rounds = default_max_rounds(g.n, effective_degree_or_min(g))
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    x = initial_colouring(g.n, alpha, tape) if initial is None else np.asarray(initial, dtype=np.uint8)
    majority = _majority(x)
    reds = [g.n - int(x.sum())]
    kept = [x] if keep_colourings else None
    t, state = 0, _consensus(x)
    while state is None and t < max_rounds:
        t += 1
        x = protocol.step(g, x, tape, t)
        reds.append(g.n - int(x.sum()))
        if kept is not None:
            kept.append(x)
        state = _consensus(x)
    return ProtocolRun(
        protocol=protocol.describe(), alpha=alpha, red_counts=tuple(reds),
        consensus_time=t if state else None, consensus_colour=state,
        initial_majority=majority, colourings=tuple(kept) if kept is not None else None,
    )


@dataclass(frozen=True)
class CoupledRun:
    mp: np.ndarray        # (T+1, n)
    mmp: np.ndarray       # (T+1, n)
    violation: tuple[int, int] | None   # first (t, x) with MMP blue but MP red

    @property
    def dominated(self) -> bool:
        return self.violation is None


def coupled_run(g: Graph, k: int, scope: MMPScope, tape: RandomnessTape, T: int,
                alpha: float = 0.25, initial=None) -> CoupledRun:
    """Run MP^k and MMP^k(v, s) in lockstep on one sample point."""
    if not scope.tree.is_tree:
        raise ScopeError("scope ball is not a tree")
    x = initial_colouring(g.n, alpha, tape) if initial is None else np.asarray(initial, dtype=np.uint8)
    mp, mmp = [x], [x.copy()]
    for t in range(1, T + 1):
        mp.append(step_mp(g, mp[-1], k, tape, t))
        mmp.append(step_mmp(g, mmp[-1], k, scope, tape, t))
    mp_arr, mmp_arr = np.array(mp), np.array(mmp)
    bad = np.argwhere(mmp_arr > mp_arr)
    violation = (int(bad[0, 0]), int(bad[0, 1])) if bad.size else None
    return CoupledRun(mp_arr, mmp_arr, violation)


# ---------------------------------------------------------------- local stability

StepFunction = Callable[[Graph, np.ndarray, RandomnessTape, int], np.ndarray]


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    vertex: int | None = None
    seed: int | None = None
    checked_vertices: int = 0


def local_stable_check(step: StepFunction, g: Graph, colouring, n_tapes: int = 100,
                       first_seed: int = 0, t: int = 1) -> StabilityVerdict:
    """Sampled check that monochromatic closed neighbourhoods keep their colour."""
    x = np.asarray(colouring, dtype=np.uint8)
    table = g.padded
    same = np.where(table >= 0, x[np.maximum(table, 0)] == x[:, None], True).all(axis=1)
    watched = np.flatnonzero(same)
    for seed in range(first_seed, first_seed + n_tapes):
        y = np.asarray(step(g, x, RandomnessTape(seed), t), dtype=np.uint8)
        moved = watched[y[watched] != x[watched]]
        if moved.size:
            return StabilityVerdict(False, int(moved[0]), seed, watched.size)
    return StabilityVerdict(True, checked_vertices=watched.size)
