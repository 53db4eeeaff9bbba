"""Finite statistics for the switch experiment: sampling, estimation,
significance, and spacetime-separation checks.

Trials draw a setting from configurable weights and then an outcome from the
corresponding table row; counts are reproducible from a 64-bit seed via
numpy's PCG64 generator.  Estimation follows the weighted-sum structure of the
three inequality terms with plug-in multinomial errors.  The first two terms
condition on the same y = 0 subsample and the third shares its x1 = x2 = 0,
y = 0 settings with them, so the total's error uses the full 3 x 3 covariance
of the terms rather than assuming independence; for near-ideal data the
(term1, term2) covariance is strongly negative and the total's error collapses
almost to the third term's.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .switch import CorrelationTable, Outcome, Setting, all_outcomes, all_settings

SPEED_OF_LIGHT = 299_792_458.0  # m/s

_BLOCK_SIZE = 1 << 18  # trials per sampling block, fixed so results do not depend on worker count

_TERM_WEIGHT = {1: 1.0 / 8.0, 2: 1.0 / 8.0, 3: 1.0 / 4.0}


class EstimationError(ValueError):
    """A term's conditional probability cannot be estimated from the counts."""


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float

    def __post_init__(self):
        if self.std_error < 0.0 or not math.isfinite(self.std_error):
            raise ValueError(f"std_error must be finite and >= 0, got {self.std_error}")


@dataclass(frozen=True)
class VbcEstimate:
    """Estimated inequality terms and their covariance-aware total."""

    term1: Estimate
    term2: Estimate
    term3: Estimate
    total: Estimate


@dataclass(frozen=True)
class SpacetimeEvent:
    t: float
    position: tuple[float, float, float]
    name: str = ""

    def __post_init__(self):
        position = tuple(float(x) for x in self.position)
        if len(position) != 3 or not all(math.isfinite(x) for x in position + (self.t,)):
            raise ValueError("events need a finite time and a finite 3-vector position")
        object.__setattr__(self, "position", position)


def is_spacelike(event_a: SpacetimeEvent, event_b: SpacetimeEvent) -> bool:
    """True iff the spatial separation exceeds light travel over the time gap.

    Lightlike separation counts as not spacelike.
    """
    delta = np.subtract(event_a.position, event_b.position)
    distance = float(np.linalg.norm(delta))
    return distance > SPEED_OF_LIGHT * abs(event_a.t - event_b.t)


@dataclass(frozen=True, eq=False)
class CountsTable:
    """Integer event counts per (setting, outcome) with sampling provenance."""

    counts: np.ndarray
    n_trials: int
    seed: int
    setting_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (16, 16):
            raise ValueError(f"counts must be 16x16, got {counts.shape}")
        if counts.min() < 0:
            raise ValueError("counts must be nonnegative")
        if counts.sum() != self.n_trials:
            raise ValueError(f"counts sum to {counts.sum()}, expected n_trials = {self.n_trials}")
        weights = self.setting_weights
        weights = np.full(16, 1.0 / 16.0) if weights is None else np.array(weights, dtype=float)
        if weights.shape != (16,) or weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("setting_weights must be 16 nonnegative reals summing to 1")
        counts.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "setting_weights", weights)

    def setting_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    # -- serialization: CSV rows with a JSON provenance header ---------------

    def to_csv(self) -> str:
        header = json.dumps(
            {
                "n_trials": int(self.n_trials),
                "seed": int(self.seed),
                "setting_weights": [float(w) for w in self.setting_weights],
            }
        )
        out = io.StringIO()
        out.write(f"# {header}\n")
        out.write("x1,x2,y,z,a1,a2,b,c,count\n")
        for setting in all_settings():
            for outcome in all_outcomes():
                out.write(
                    f"{setting.x1},{setting.x2},{setting.y},{setting.z},"
                    f"{outcome.a1},{outcome.a2},{outcome.b},{outcome.c},"
                    f"{int(self.counts[setting.index, outcome.index])}\n"
                )
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountsTable":
        lines = text.strip().splitlines()
        meta = json.loads(lines[0].lstrip("# "))
        counts = np.zeros((16, 16), dtype=np.int64)
        for line in lines[2:]:
            x1, x2, y, z, a1, a2, b, c, n = (int(v) for v in line.split(","))
            counts[Setting(x1, x2, y, z).index, Outcome(a1, a2, b, c).index] = n
        return cls(counts, meta["n_trials"], meta["seed"], np.array(meta["setting_weights"]))


def sample_counts(
    table: CorrelationTable,
    n_trials: int,
    seed: int,
    setting_weights=None,
    threads: int = 1,
) -> CountsTable:
    """Draw ``n_trials`` (setting, outcome) events from the table.

    Trials are split into fixed-size blocks with independently derived seeds;
    the block layout depends only on ``n_trials``, so the counts are identical
    for any worker count and are merged by plain addition.
    """
    if n_trials < 0:
        raise ValueError(f"n_trials must be >= 0, got {n_trials}")
    weights = np.full(16, 1.0 / 16.0) if setting_weights is None else np.asarray(setting_weights, dtype=float)
    if weights.shape != (16,) or weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("setting_weights must be 16 nonnegative reals summing to 1")
    table.validate()

    rows = np.clip(table.probs, 0.0, None)
    rows = rows / rows.sum(axis=1, keepdims=True)

    block_sizes = [_BLOCK_SIZE] * (n_trials // _BLOCK_SIZE)
    if n_trials % _BLOCK_SIZE:
        block_sizes.append(n_trials % _BLOCK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(block_sizes))

    def sample_block(args) -> np.ndarray:
        block_n, block_seed = args
        rng = np.random.default_rng(block_seed)
        counts = np.zeros((16, 16), dtype=np.int64)
        per_setting = rng.multinomial(block_n, weights)
        for s_index, n_s in enumerate(per_setting):
            if n_s > 0:
                counts[s_index] = rng.multinomial(n_s, rows[s_index])
        return counts

    jobs = list(zip(block_sizes, seeds))
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(sample_block, jobs))
    else:
        blocks = [sample_block(job) for job in jobs]

    total = np.zeros((16, 16), dtype=np.int64)
    for block in blocks:
        total += block
    return CountsTable(total, n_trials, seed, weights)


def expected_counts(table: CorrelationTable, per_setting: int) -> CountsTable:
    """Deterministic counts closest to ``per_setting`` times each table row.

    Largest-remainder rounding per setting keeps every row total exact; used to
    check that estimation recovers the underlying terms without sampling noise.
    """
    counts = np.zeros((16, 16), dtype=np.int64)
    for s_index in range(16):
        exact = per_setting * table.probs[s_index]
        floors = np.floor(exact).astype(np.int64)
        remainder = int(per_setting - floors.sum())
        order = np.argsort(-(exact - floors), kind="stable")
        floors[order[:remainder]] += 1
        counts[s_index] = floors
    return CountsTable(counts, int(counts.sum()), 0)


# -- estimation ---------------------------------------------------------------


def _term_events() -> dict[int, list[tuple[int, np.ndarray]]]:
    """Per setting index, the (term, outcome mask) pairs estimated there."""
    events: dict[int, list[tuple[int, np.ndarray]]] = {i: [] for i in range(16)}
    outcomes = all_outcomes()
    for setting in all_settings():
        if setting.y == 0:
            mask1 = np.array([o.b == 0 and o.a2 == setting.x1 for o in outcomes])
            mask2 = np.array([o.b == 1 and o.a1 == setting.x2 for o in outcomes])
            events[setting.index].append((1, mask1))
            events[setting.index].append((2, mask2))
        if setting.x1 == 0 and setting.x2 == 0:
            mask3 = np.array([o.b ^ o.c == (setting.y & setting.z) for o in outcomes])
            events[setting.index].append((3, mask3))
    return events


def estimate_vbc(counts: CountsTable) -> VbcEstimate:
    """Estimate the three inequality terms and the total from counts.

    Each conditional probability is a count ratio with plug-in multinomial
    variance p(1-p)/n; events sharing a setting contribute their multinomial
    covariance (p_ij - p_i p_j)/n, so terms that condition on overlapping
    settings are combined correctly in the total's error.
    """
    totals = counts.setting_totals()
    values = {1: 0.0, 2: 0.0, 3: 0.0}
    covariance = np.zeros((3, 3))

    for s_index, event_list in _term_events().items():
        if not event_list:
            continue
        n_s = int(totals[s_index])
        if n_s == 0:
            terms = sorted({term for term, _ in event_list})
            setting = Setting.from_index(s_index)
            raise EstimationError(
                f"no counts for setting {setting.key}; cannot estimate term(s) {terms}"
            )
        row = counts.counts[s_index]
        for term, mask in event_list:
            values[term] += _TERM_WEIGHT[term] * float(row[mask].sum()) / n_s
        for i, (term_i, mask_i) in enumerate(event_list):
            p_i = float(row[mask_i].sum()) / n_s
            for j in range(i, len(event_list)):
                term_j, mask_j = event_list[j]
                p_j = float(row[mask_j].sum()) / n_s
                p_ij = float(row[mask_i & mask_j].sum()) / n_s
                cov = _TERM_WEIGHT[term_i] * _TERM_WEIGHT[term_j] * (p_ij - p_i * p_j) / n_s
                covariance[term_i - 1, term_j - 1] += cov
                if j != i:
                    covariance[term_j - 1, term_i - 1] += cov

    def estimate(term: int) -> Estimate:
        return Estimate(values[term], math.sqrt(max(covariance[term - 1, term - 1], 0.0)))

    total = Estimate(values[1] + values[2] + values[3], math.sqrt(max(covariance.sum(), 0.0)))
    return VbcEstimate(estimate(1), estimate(2), estimate(3), total)


def significance(estimate: Estimate, bound: float) -> float:
    """Distance of the estimate above the bound in standard errors."""
    if estimate.std_error <= 0.0:
        raise ValueError("significance is undefined for zero standard error")
    return (estimate.value - bound) / estimate.std_error
