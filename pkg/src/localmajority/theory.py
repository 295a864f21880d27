"""Analytical side: the bias condition, the red-probability recursion and its
closed-form bound, planted-tree populations, and an exact Markov chain for
MP^k on the complete graph (used as a test oracle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNDERFLOW = 1e-300


def nu_of(d: int) -> int:
    return (d - 1) // 2


def amplification(nu: int) -> float:
    """[(1 + 1/sqrt(2 nu)) * 2] ** (1 / (nu - 1))."""
    if nu < 2:
        raise ValueError(f"nu must be at least 2, got {nu}")
    return ((1 + 1 / math.sqrt(2 * nu)) * 2) ** (1 / (nu - 1))


def time_constant(d: int, eps: float = 0.1) -> float:
    """A = (1 + eps) / log_d(nu), nu = floor((d - 1) / 2)."""
    nu = nu_of(d)
    if nu < 2:
        raise ValueError(f"time constant needs d >= 5, got {d}")
    return (1 + eps) / (math.log(nu) / math.log(d))


def omega_prime(n: int, d: int) -> float:
    """log_d log_d n."""
    return math.log(math.log(n) / math.log(d)) / math.log(d)


def default_max_rounds(n: int, d: int, eps: float = 0.1, floor: int = 50) -> int:
    """max(floor, 10 * ceil(A * omega')); just ``floor`` when d < 5."""
    if d < 5 or n < 3 or math.log(n) <= math.log(d):
        return floor
    horizon = time_constant(d, eps) * omega_prime(n, d)
    return max(floor, 10 * max(1, math.ceil(horizon)))


@dataclass(frozen=True)
class BiasCondition:
    alpha: float
    d: int
    nu: int
    beta: float
    lhs: float
    satisfied: bool
    alpha_max: float | None

    @property
    def margin(self) -> float:
        return self.beta - self.lhs


def check_condition(alpha: float, d: int, beta: float) -> BiasCondition:
    """Evaluate [(1 + 1/sqrt(2nu)) 2]^(1/(nu-1)) * 4 alpha (1 - alpha) < beta."""
    if d < 5:
        raise ValueError(f"the bias condition needs d >= 5, got {d}")
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    nu = nu_of(d)
    f = amplification(nu)
    lhs = f * 4 * alpha * (1 - alpha)
    target = beta / f
    # smaller root of 4a(1-a) = target
    alpha_max = (1 - math.sqrt(1 - target)) / 2 if target < 1 else None
    return BiasCondition(alpha, d, nu, beta, lhs, lhs < beta, alpha_max)


def recursion_step(p: float, nu: int) -> float:
    """Pr(Bin(2 nu, p) >= nu): the chance a tree vertex is red one level up."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if nu < 1:
        raise ValueError(f"nu must be positive, got {nu}")
    q = 1 - p
    return math.fsum(math.comb(2 * nu, i) * p ** i * q ** (2 * nu - i) for i in range(nu, 2 * nu + 1))


def closed_form_bound(alpha: float, nu: int, t: int) -> float:
    """(1/4) * ([(1 + 1/sqrt(2nu)) 2]^(1/(nu-1)) * 4 alpha (1 - alpha)) ** (nu ** t)."""
    base = amplification(nu) * 4 * alpha * (1 - alpha)
    try:
        return 0.25 * base ** (nu ** t)
    except OverflowError:
        return math.inf


def first_step_bound(alpha: float, nu: int) -> float:
    """(1/2)(1 + 1/sqrt(2nu)) (4 alpha (1 - alpha)) ** nu."""
    return 0.5 * (1 + 1 / math.sqrt(2 * nu)) * (4 * alpha * (1 - alpha)) ** nu


@dataclass(frozen=True)
class RecursionTrace:
    alpha: float
    nu: int
    p: tuple[float, ...]
    bound: tuple[float, ...]
    dominated: tuple[bool, ...]
    clamped: tuple[bool, ...]
    first_step_bound: float

    @property
    def first_step_ok(self) -> bool:
        return self.p[1] <= self.first_step_bound

    def rows(self):
        for t, (p, b, ok) in enumerate(zip(self.p, self.bound, self.dominated)):
            yield t, p, b, ok


def recursion_trace(alpha: float, nu: int, T: int) -> RecursionTrace:
    if T < 1:
        raise ValueError("T must be at least 1")
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    ps, clamped = [alpha], [False]
    for _ in range(T):
        nxt = recursion_step(ps[-1], nu)
        # a positive p whose successor is tiny (or has already underflowed to 0.0)
        small = ps[-1] > 0 and nxt < UNDERFLOW
        ps.append(0.0 if small else nxt)
        clamped.append(small)
    bounds = [closed_form_bound(alpha, nu, t) for t in range(T + 1)]
    return RecursionTrace(
        alpha=alpha, nu=nu, p=tuple(ps), bound=tuple(bounds),
        dominated=tuple(p <= b for p, b in zip(ps, bounds)),
        clamped=tuple(clamped), first_step_bound=first_step_bound(alpha, nu),
    )


def tree_population(d: int, h: int) -> int:
    """Vertices of the depth-h d-regular tree: 1 + d((d-1)^h - 1)/(d-2)."""
    if d <= 2:
        raise ValueError(f"tree population needs d >= 3, got {d}")
    if h < 0:
        raise ValueError(f"depth must be non-negative, got {h}")
    return 1 + d * ((d - 1) ** h - 1) // (d - 2)


# ---------------------------------------------------------------- complete graph

MAX_CHAIN_N = 25


def red_poll_probability(n: int, k: int, others_red: int) -> float:
    """Pr(a uniform k-subset of the n-1 other vertices has a red majority)."""
    total = math.comb(n - 1, k)
    need = k // 2 + 1
    hits = sum(math.comb(others_red, i) * math.comb(n - 1 - others_red, k - i)
               for i in range(need, k + 1))
    return hits / total


def _binomial_pmf(n: int, q: float) -> np.ndarray:
    return np.array([math.comb(n, i) * q ** i * (1 - q) ** (n - i) for i in range(n + 1)])


@dataclass(frozen=True)
class CompleteGraphChain:
    n: int
    k: int
    alpha: float
    transition: np.ndarray          # (n+1, n+1), state = number of red vertices
    absorb_blue: np.ndarray         # Pr(all blue eventually | r)
    expected_time: np.ndarray       # E[absorption time | r]
    initial: np.ndarray             # Binomial(n, alpha) law of r

    @property
    def blue_probability(self) -> float:
        return float(self.initial @ self.absorb_blue)

    @property
    def mean_time(self) -> float:
        return float(self.initial @ self.expected_time)


def complete_graph_chain(n: int, k: int, alpha: float) -> CompleteGraphChain:
    """Exact chain on the red count for MP^k on K_n."""
    if k % 2 == 0 or k < 1:
        raise ValueError(f"k must be a positive odd integer, got {k}")
    if not k < n:
        raise ValueError(f"need k < n, got k={k}, n={n}")
    if n > MAX_CHAIN_N:
        raise ValueError(f"n={n} exceeds the exact-chain limit {MAX_CHAIN_N}")
    P = np.zeros((n + 1, n + 1))
    for r in range(n + 1):
        stay_red = red_poll_probability(n, k, r - 1) if r else 0.0
        turn_red = red_poll_probability(n, k, r) if r < n else 0.0
        P[r] = np.convolve(_binomial_pmf(r, stay_red), _binomial_pmf(n - r, turn_red))
    transient = np.arange(1, n)
    Q = P[np.ix_(transient, transient)]
    eye = np.eye(n - 1)
    absorb = np.zeros(n + 1)
    absorb[0] = 1.0
    absorb[transient] = np.linalg.solve(eye - Q, P[transient, 0])
    times = np.zeros(n + 1)
    times[transient] = np.linalg.solve(eye - Q, np.ones(n - 1))
    return CompleteGraphChain(n, k, alpha, P, absorb, times, _binomial_pmf(n, alpha))
