"""Deterministic definite-causal-order strategies and the exact classical bound.

A hidden-variable model with a definite order of the two instruments, a remote
party whose outcome may depend only on her own setting, and a final party in
the common future assigns, per hidden variable:

    order: which instrument acts first (0: party 1 first, 1: party 2 first);
    f1:    the first party's outcome from her own setting            (2 bits);
    f2:    the second party's outcome from (own setting, first's
           setting, first's outcome)                                 (8 bits);
    h:     b from y alone (the remote party is spacelike separated)  (2 bits);
    k:     c from (z, x1, x2) (everything in the final party's past) (8 bits).

Truth tables are indexed with the first tuple element as the least significant
bit, so f2[own | first_x << 1 | first_a << 2] and k[z | x1 << 1 | x2 << 2].
A strategy packs into a 21-bit integer, fields from least significant upward:
order | f1 | f2 | h | k.  The VBC functional of a deterministic strategy is a
count of satisfied (setting, event) pairs, so the enumeration works in exact
integer arithmetic: 8 * total = c1 + c2 + 2 * c3, and the classical bound is
the exact fraction max(8 * total) / 8.

By linearity of the functional, convex mixtures of deterministic strategies
cannot exceed the deterministic maximum, so the enumerated value bounds the
full stochastic class.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .switch import CorrelationTable, Outcome, Setting, all_settings

STRATEGY_BITS = 21
N_STRATEGIES = 1 << STRATEGY_BITS  # 2,097,152 = 2 * 4 * 256 * 4 * 256

_DEFAULT_CHUNK = 1 << 18


@dataclass(frozen=True)
class DeterministicStrategy:
    order: int
    f1: tuple[int, int]
    f2: tuple[int, int, int, int, int, int, int, int]
    h: tuple[int, int]
    k: tuple[int, int, int, int, int, int, int, int]

    def __post_init__(self):
        bits = (self.order, *self.f1, *self.f2, *self.h, *self.k)
        if len(bits) != STRATEGY_BITS or any(bit not in (0, 1) for bit in bits):
            raise ValueError("strategy fields must be bits of sizes 1, 2, 8, 2, 8")

    def encode(self) -> int:
        index = self.order
        shift = 1
        for table in (self.f1, self.f2, self.h, self.k):
            for bit in table:
                index |= bit << shift
                shift += 1
        return index

    @classmethod
    def decode(cls, index: int) -> "DeterministicStrategy":
        if not 0 <= index < N_STRATEGIES:
            raise ValueError(f"strategy index must be in [0, {N_STRATEGIES}), got {index}")
        order = index & 1
        f1 = tuple((index >> (1 + i)) & 1 for i in range(2))
        f2 = tuple((index >> (3 + i)) & 1 for i in range(8))
        h = tuple((index >> (11 + i)) & 1 for i in range(2))
        k = tuple((index >> (13 + i)) & 1 for i in range(8))
        return cls(order, f1, f2, h, k)


def strategy_outcomes(strategy: DeterministicStrategy, setting: Setting) -> Outcome:
    """Evaluate the deterministic response functions at one setting."""
    if strategy.order == 0:
        a1 = strategy.f1[setting.x1]
        a2 = strategy.f2[setting.x2 | (setting.x1 << 1) | (a1 << 2)]
    else:
        a2 = strategy.f1[setting.x2]
        a1 = strategy.f2[setting.x1 | (setting.x2 << 1) | (a2 << 2)]
    b = strategy.h[setting.y]
    c = strategy.k[setting.z | (setting.x1 << 1) | (setting.x2 << 2)]
    return Outcome(a1, a2, b, c)


def strategy_table(strategy: DeterministicStrategy) -> CorrelationTable:
    """The deterministic 0/1 correlation table of a strategy."""
    probs = np.zeros((16, 16))
    for setting in all_settings():
        probs[setting.index, strategy_outcomes(strategy, setting).index] = 1.0
    return CorrelationTable(probs)


def satisfied_counts(strategy: DeterministicStrategy) -> tuple[int, int, int]:
    """Counts of satisfied (setting, event) pairs behind the three VBC terms.

    term1 = c1/8, term2 = c2/8, term3 = c3/4; all exact integers.
    """
    c1 = c2 = c3 = 0
    for x1 in (0, 1):
        for x2 in (0, 1):
            for z in (0, 1):
                outcome = strategy_outcomes(strategy, Setting(x1, x2, 0, z))
                if outcome.b == 0 and outcome.a2 == x1:
                    c1 += 1
                if outcome.b == 1 and outcome.a1 == x2:
                    c2 += 1
    for y in (0, 1):
        for z in (0, 1):
            outcome = strategy_outcomes(strategy, Setting(0, 0, y, z))
            if outcome.b ^ outcome.c == (y & z):
                c3 += 1
    return c1, c2, c3


def score_eighths(strategy: DeterministicStrategy) -> int:
    """8 times the VBC total, exactly."""
    c1, c2, c3 = satisfied_counts(strategy)
    return c1 + c2 + 2 * c3


def _chunk_scores(start: int, stop: int, restricted: bool) -> np.ndarray:
    """Vectorized exact scores (eighths) for a contiguous index range."""
    idx = np.arange(start, stop, dtype=np.uint32)
    order = (idx & 1).astype(np.uint8)
    f1 = ((idx >> 1) & 0b11).astype(np.uint8)
    f2 = ((idx >> 3) & 0xFF).astype(np.uint8)
    h = ((idx >> 11) & 0b11).astype(np.uint8)
    k = ((idx >> 13) & 0xFF).astype(np.uint8)

    h0 = h & 1
    n1 = np.zeros(idx.shape, dtype=np.uint8)
    n2 = np.zeros(idx.shape, dtype=np.uint8)
    for x1 in (0, 1):
        for x2 in (0, 1):
            x_first = np.where(order == 0, x1, x2).astype(np.uint8)
            a_first = (f1 >> x_first) & 1
            x_second = np.where(order == 0, x2, x1).astype(np.uint8)
            f2_index = x_second | (x_first << 1) | (a_first << 2)
            a_second = (f2 >> f2_index) & 1
            a1 = np.where(order == 0, a_first, a_second)
            a2 = np.where(order == 0, a_second, a_first)
            n1 += a2 == x1
            n2 += a1 == x2
    c1 = np.where(h0 == 0, 2 * n1, 0).astype(np.int64)  # the z sum contributes a factor 2
    c2 = np.where(h0 == 1, 2 * n2, 0).astype(np.int64)

    c3 = np.zeros(idx.shape, dtype=np.int64)
    for y in (0, 1):
        h_y = (h >> y) & 1
        for z in (0, 1):
            k_z = (k >> z) & 1  # k at (z, x1=0, x2=0)
            c3 += (h_y ^ k_z) == (y & z)

    scores = c1 + c2 + 2 * c3
    if restricted:
        constant_b = ((h & 1) == ((h >> 1) & 1))
        blind_f2 = np.ones(idx.shape, dtype=bool)
        for i in range(8):
            blind_f2 &= ((f2 >> i) & 1) == ((f2 >> (i & 1)) & 1)
        scores = np.where(constant_b & blind_f2, scores, -1)
    return scores


@dataclass(frozen=True)
class ClassicalBound:
    """Result of the exhaustive scan: exact maximum and every argmax index."""

    value: Fraction
    optimal_indices: np.ndarray
    strategies_scanned: int

    @property
    def optimal_count(self) -> int:
        return int(self.optimal_indices.size)


def classical_max(restricted: bool = False, threads: int = 1, chunk_size: int = _DEFAULT_CHUNK) -> ClassicalBound:
    """Exhaustive maximum of the VBC functional over all 2^21 strategies.

    ``restricted`` keeps only strategies whose b does not depend on y and whose
    f2 ignores the first party's setting and outcome.  The scan is chunked over
    the index space; chunks are independent and merged by (max, argmax-union).
    """
    starts = list(range(0, N_STRATEGIES, chunk_size))

    def scan(start: int) -> tuple[int, np.ndarray]:
        stop = min(start + chunk_size, N_STRATEGIES)
        scores = _chunk_scores(start, stop, restricted)
        best = int(scores.max())
        where = np.nonzero(scores == best)[0] + start
        return best, where

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(scan, starts))
    else:
        results = [scan(start) for start in starts]

    best = max(score for score, _ in results)
    optima = np.concatenate([where for score, where in results if score == best])
    optima.sort()
    return ClassicalBound(Fraction(best, 8), optima, N_STRATEGIES)
