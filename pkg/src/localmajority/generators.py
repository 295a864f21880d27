"""Random graph families: configuration model, random regular, G(n, p)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import AttemptsExhaustedError, ConfigError, OddDegreeSumError
from .graph import Graph, build_graph
from .tape import _GOLDEN, _mix, Purpose, RandomnessTape, hash_keys

log = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 10_000
FAMILIES = ("degree-sequence", "regular", "gnp")


@dataclass(frozen=True)
class GenSpec:
    family: str
    seed: int = 0
    degrees: tuple[int, ...] | None = None
    n: int | None = None
    d: int | None = None
    p: float | None = None
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    require_connected: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be positive")
        if self.family == "degree-sequence":
            if not self.degrees:
                raise ConfigError("degree-sequence family needs a degree list")
            if sum(self.degrees) % 2:
                raise OddDegreeSumError(f"degree sum {sum(self.degrees)} is odd")
        elif self.family == "regular":
            if self.n is None or self.d is None:
                raise ConfigError("regular family needs n and d")
            if (self.n * self.d) % 2:
                raise OddDegreeSumError(f"n*d = {self.n * self.d} is odd")
            if not self.d < self.n:
                raise ConfigError(f"need d < n, got d={self.d}, n={self.n}")
        else:
            if self.n is None or self.p is None:
                raise ConfigError("gnp family needs n and p")
            if not 0 <= self.p <= 1:
                raise ConfigError(f"p must lie in [0, 1], got {self.p}")

    def tape(self) -> RandomnessTape:
        return RandomnessTape(self.seed)


def generate(spec: GenSpec, tape: RandomnessTape | None = None) -> Graph:
    tape = tape or spec.tape()
    if spec.family == "degree-sequence":
        return gen_configuration(spec.degrees, tape, spec.max_attempts, spec.require_connected)
    if spec.family == "regular":
        return gen_regular(spec.n, spec.d, tape, spec.max_attempts, spec.require_connected)
    return gen_gnp(spec.n, spec.p, tape)


def gen_configuration(degrees, tape: RandomnessTape, max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                      require_connected: bool = True) -> Graph:
    """Uniform simple graph with the given degrees, by whole-sample rejection.

    Each attempt pairs all half-edges uniformly at random; a pairing with any
    loop or parallel edge is discarded entirely (and, if ``require_connected``,
    so is a disconnected one).  Accepted graphs are therefore uniform over the
    simple (connected) graphs with this degree sequence.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.sum() % 2:
        raise OddDegreeSumError(f"degree sum {int(degrees.sum())} is odd")
    if degrees.size and degrees.min() < 1:
        raise ValueError("every degree must be at least 1")
    n = degrees.size
    stubs = np.repeat(np.arange(n), degrees)
    for attempt in range(max_attempts):
        pairs = tape.generator(Purpose.PAIRING, attempt).permutation(stubs).reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        a, b = pairs[:, 0], pairs[:, 1]
        key = np.minimum(a, b) * n + np.maximum(a, b)
        key.sort()
        if (key[1:] == key[:-1]).any():
            continue
        g = build_graph(n, pairs)
        if require_connected and not g.is_connected():
            continue
        log.debug("configuration model accepted on attempt %d", attempt + 1)
        return g
    raise AttemptsExhaustedError(
        f"no simple{' connected' if require_connected else ''} pairing in {max_attempts} attempts")


def gen_regular(n: int, d: int, tape: RandomnessTape, max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                require_connected: bool = True) -> Graph:
    if (n * d) % 2:
        raise OddDegreeSumError(f"n*d = {n * d} is odd")
    if not 3 <= d < n:
        raise ValueError(f"need 3 <= d < n, got d={d}, n={n}")
    return gen_configuration(np.full(n, d), tape, max_attempts, require_connected)


def gen_gnp(n: int, p: float, tape: RandomnessTape) -> Graph:
    """Erdos-Renyi G(n, p) with one keyed draw per pair, pairs in lexicographic order.

    Pair (u, v) is kept iff ``tape.uniform(EDGE_INCLUSION, u, v) < p``.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    # uniform < p  <=>  top-53-bit integer < ceil(p * 2**53)
    cut = np.uint64(math.ceil(p * 2 ** 53))
    row = hash_keys(np.uint64(tape.seed), int(Purpose.EDGE_INCLUSION), np.arange(n))
    with np.errstate(over="ignore"):
        col = _mix(np.arange(n).astype(np.uint64) + _GOLDEN * np.uint64(3))
    src, dst = [], []
    for u in range(n - 1):
        words = _mix(row[u] ^ col[u + 1:])
        hit = np.flatnonzero((words >> np.uint64(11)) < cut)
        if hit.size:
            src.append(np.full(hit.size, u))
            dst.append(hit + u + 1)
    if not src:
        return build_graph(n, np.empty((0, 2), dtype=np.int64))
    return build_graph(n, np.column_stack([np.concatenate(src), np.concatenate(dst)]))


def gnp_probability(n: int, c: float) -> float:
    """p = c log n / n, clipped to 1."""
    return min(1.0, c * math.log(n) / n)
