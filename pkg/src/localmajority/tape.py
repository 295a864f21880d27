"""Counter-based randomness keyed by (seed, purpose, vertex, round, ...).

Every draw is a pure function of its key, so two protocols that ask for the
same key see the same value no matter in which order they ask.  This is what
lets MP and MMP be coupled on one sample point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0 ** -53


class Purpose(IntEnum):
    INITIAL_COLOUR = 1
    SUBSET_CHOICE = 2
    EDGE_INCLUSION = 3
    PAIRING = 4
    RUN = 5


def _mix(z):
    # splitmix64 finaliser
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _absorb(h, position: int, x):
    x = np.asarray(x).astype(np.uint64)
    with np.errstate(over="ignore"):
        return _mix(h ^ _mix(x + _GOLDEN * np.uint64(position)))


def hash_keys(seed, *fields) -> np.ndarray:
    """Hash broadcastable integer fields into uint64 words.

    ``seed`` may itself be an array, which lets tests vectorise over seeds.
    """
    with np.errstate(over="ignore"):
        h = _mix(np.asarray(seed, dtype=np.uint64) ^ _GOLDEN)
    for i, f in enumerate(fields, start=1):
        h = _absorb(h, i, f)
    return h


def to_unit(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to floats in [0, 1) using the top 53 bits."""
    return (words >> _S11).astype(np.float64) * _TWO_M53


def derive_seed(master: int, *fields: int) -> int:
    """Derive a child 64-bit seed, e.g. one per campaign run."""
    return int(hash_keys(np.uint64(master & MASK64), Purpose.RUN, *fields))


@dataclass(frozen=True)
class RandomnessTape:
    """The sample point: initial colours plus every subset choice.

    ``labels`` maps vertex ids to the ids used in keys.  It defaults to the
    identity; a relabelled graph paired with ``relabelled(perm)`` reproduces
    the original draws vertex for vertex.
    """

    seed: int
    labels: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) <= MASK64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")

    def label(self, v):
        if self.labels is None:
            return np.asarray(v)
        return self.labels[np.asarray(v)]

    def words(self, purpose: Purpose, *fields) -> np.ndarray:
        return hash_keys(np.uint64(self.seed), int(purpose), *fields)

    def uniform(self, purpose: Purpose, *fields) -> np.ndarray:
        return to_unit(self.words(purpose, *fields))

    def vertex_uniform(self, purpose: Purpose, vertices, *fields) -> np.ndarray:
        """Uniform draws keyed on vertex labels."""
        return self.uniform(purpose, self.label(vertices), *fields)

    def subset_keys(self, vertices, t: int, candidates) -> np.ndarray:
        """Sort keys for the candidates of ``vertices`` at round ``t``.

        ``candidates`` broadcasts against ``vertices[:, None]``; the k
        smallest keys form the uniformly random k-subset.
        """
        v = self.label(np.asarray(vertices))[..., None]
        w = self.label(np.asarray(candidates))
        return self.words(Purpose.SUBSET_CHOICE, v, t, w)

    def generator(self, purpose: Purpose, *fields: int) -> np.random.Generator:
        """A sequential stream for a keyed bulk task (e.g. one pairing attempt)."""
        entropy = [int(self.seed), int(purpose), *(int(f) for f in fields)]
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def relabelled(self, perm) -> "RandomnessTape":
        """Tape for the graph whose vertex ``perm[v]`` is the old vertex ``v``."""
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        base = np.arange(perm.size) if self.labels is None else self.labels
        return RandomnessTape(self.seed, labels=base[inverse])
