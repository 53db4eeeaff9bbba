"""Entangled-control quantum switch: exact statistics and the VBC functional.

Two measure-and-reprepare instruments act on a target qubit prepared in |0>.
Instrument i measures the incoming target in the computational basis (outcome
a_i) and emits the fresh state |x_i>; its Kraus operators are |x_i><a_i|.
The order of the two instruments is coherently controlled by qubit C: control
|0> means instrument 1 acts first.  C is entangled with a remote qubit B.

After the switch the target is discarded.  B is measured along z (y = 0) or
x (y = 1); the control along (z+x)/sqrt2 (z = 0) or (z-x)/sqrt2 (z = 1).  The
resulting conditional distribution p(a1 a2 b c | x1 x2 y z) feeds the VBC
causal-inequality functional

    p(b=0, a2=x1 | y=0) + p(b=1, a1=x2 | y=0) + p(b xor c = y z | x1=x2=0),

whose value over all definite-causal-order models is bounded by 7/4 while the
switch reaches 3/2 + sqrt(2)/4.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .quantum import (
    ATOL_EXACT,
    Effect,
    LinearOperator,
    bloch_projector,
    ket_projector,
    partial_trace,
    tensor_product,
)

BOB_ANGLE = {0: 0.0, 1: math.pi / 2.0}
CHARLIE_ANGLE = {0: math.pi / 4.0, 1: -math.pi / 4.0}

IDEAL_TOTAL = 1.5 + math.sqrt(2.0) / 4.0
CLASSICAL_BOUND = 7.0 / 4.0

NO_SIGNALING_ATOL = 1e-10


@dataclass(frozen=True, order=True)
class Setting:
    """One joint choice of inputs (x1, x2, y, z), each a bit."""

    x1: int
    x2: int
    y: int
    z: int

    def __post_init__(self):
        for name in ("x1", "x2", "y", "z"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be a bit, got {getattr(self, name)}")

    @property
    def index(self) -> int:
        return (self.x1 << 3) | (self.x2 << 2) | (self.y << 1) | self.z

    @property
    def key(self) -> str:
        return f"{self.x1}{self.x2}{self.y}{self.z}"

    @classmethod
    def from_index(cls, index: int) -> "Setting":
        return cls((index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1)


@dataclass(frozen=True, order=True)
class Outcome:
    """One joint outcome (a1, a2, b, c), each a bit."""

    a1: int
    a2: int
    b: int
    c: int

    def __post_init__(self):
        for name in ("a1", "a2", "b", "c"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be a bit, got {getattr(self, name)}")

    @property
    def index(self) -> int:
        return (self.a1 << 3) | (self.a2 << 2) | (self.b << 1) | self.c

    @classmethod
    def from_index(cls, index: int) -> "Outcome":
        return cls((index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1)


def all_settings() -> list[Setting]:
    return [Setting.from_index(i) for i in range(16)]


def all_outcomes() -> list[Outcome]:
    return [Outcome.from_index(i) for i in range(16)]


@dataclass(frozen=True)
class VbcBreakdown:
    """The three VBC terms; the total is their sum by construction."""

    term1: float
    term2: float
    term3: float

    def __post_init__(self):
        for name in ("term1", "term2", "term3"):
            value = getattr(self, name)
            if not -ATOL_EXACT <= value <= 1.0 + ATOL_EXACT:
                raise ValueError(f"{name} = {value} is not a probability")

    @property
    def total(self) -> float:
        return self.term1 + self.term2 + self.term3


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Conditional probabilities p(a1 a2 b c | x1 x2 y z), 16 settings x 16 outcomes.

    Rows are indexed by ``Setting.index``, columns by ``Outcome.index``.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (16, 16):
            raise ValueError(f"table must be 16x16, got {probs.shape}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def prob(self, setting: Setting, outcome: Outcome) -> float:
        return float(self.probs[setting.index, outcome.index])

    def row(self, setting: Setting) -> np.ndarray:
        return self.probs[setting.index]

    def validate(self, atol: float = NO_SIGNALING_ATOL) -> None:
        if self.probs.min() < -ATOL_EXACT:
            raise ValueError(f"negative probability {self.probs.min()}")
        sums = self.probs.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > atol:
            raise ValueError(f"rows must sum to 1, worst deviation {np.max(np.abs(sums - 1.0))}")

    def no_signaling_deviation(self) -> float:
        """Largest violation of the marginal-independence conditions.

        Checked marginals: p(b|y) must not depend on (x1, x2, z); p(a1 a2|x1 x2)
        must not depend on (y, z); p(a1 a2 c|x1 x2 z) must not depend on y.
        """
        grid = self.probs.reshape(2, 2, 2, 2, 2, 2, 2, 2)  # x1 x2 y z a1 a2 b c
        worst = 0.0
        marg_b = grid.sum(axis=(4, 5, 7))  # x1 x2 y z b
        worst = max(worst, _marginal_spread(marg_b, forbidden_axes=(0, 1, 3)))
        marg_a = grid.sum(axis=(6, 7))  # x1 x2 y z a1 a2
        worst = max(worst, _marginal_spread(marg_a, forbidden_axes=(2, 3)))
        marg_ac = grid.sum(axis=6)  # x1 x2 y z a1 a2 c
        worst = max(worst, _marginal_spread(marg_ac, forbidden_axes=(2,)))
        return worst

    def assert_no_signaling(self, atol: float = NO_SIGNALING_ATOL) -> None:
        deviation = self.no_signaling_deviation()
        if deviation > atol:
            raise ValueError(f"no-signaling violated by {deviation}")

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        """Nested JSON: setting key "x1x2yz" -> 16 outcome probabilities.

        Outcomes are ordered by the big-endian bit index a1 a2 b c.  Floats are
        written with 12 significant digits so output bytes are reproducible.
        """
        rows = []
        for setting in all_settings():
            values = ", ".join(_fmt(p) for p in self.row(setting))
            rows.append(f'  "{setting.key}": [{values}]')
        return "{\n" + ",\n".join(rows) + "\n}"

    @classmethod
    def from_json(cls, text: str) -> "CorrelationTable":
        data = json.loads(text)
        probs = np.zeros((16, 16))
        for key, values in data.items():
            x1, x2, y, z = (int(ch) for ch in key)
            probs[Setting(x1, x2, y, z).index] = values
        return cls(probs)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("x1,x2,y,z,a1,a2,b,c,p\n")
        for setting in all_settings():
            for outcome in all_outcomes():
                out.write(
                    f"{setting.x1},{setting.x2},{setting.y},{setting.z},"
                    f"{outcome.a1},{outcome.a2},{outcome.b},{outcome.c},"
                    f"{_fmt(self.prob(setting, outcome))}\n"
                )
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CorrelationTable":
        probs = np.zeros((16, 16))
        lines = text.strip().splitlines()
        for line in lines[1:]:
            x1, x2, y, z, a1, a2, b, c, p = line.split(",")
            s = Setting(int(x1), int(x2), int(y), int(z))
            o = Outcome(int(a1), int(a2), int(b), int(c))
            probs[s.index, o.index] = float(p)
        return cls(probs)


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def _marginal_spread(marginal: np.ndarray, forbidden_axes: tuple[int, ...]) -> float:
    """Max spread of a marginal over the setting axes it must not depend on.

    ``marginal`` has the four setting axes (x1, x2, y, z) first; the spread is
    taken over ``forbidden_axes`` and maximized over everything else.
    """
    spread = marginal.max(axis=forbidden_axes) - marginal.min(axis=forbidden_axes)
    return float(spread.max())


# -- switch dynamics --------------------------------------------------------


def measure_reprepare_kraus(x: int, a: int) -> LinearOperator:
    """Kraus operator |x><a| of the computational-basis measure-and-reprepare step."""
    if x not in (0, 1) or a not in (0, 1):
        raise ValueError(f"x and a must be bits, got ({x}, {a})")
    ket_x = np.zeros(2, dtype=complex)
    ket_x[x] = 1.0
    bra_a = np.zeros(2, dtype=complex)
    bra_a[a] = 1.0
    return LinearOperator(np.outer(ket_x, bra_a), (2,))


def switch_branch_operator(x1: int, x2: int, a1: int, a2: int) -> LinearOperator:
    """Branch operator on C (x) T for joint instrument outcome (a1, a2).

    Control |0> applies instrument 1 first, |1> applies instrument 2 first;
    both orders are kept coherent in a single operator.
    """
    k1 = measure_reprepare_kraus(x1, a1).entries
    k2 = measure_reprepare_kraus(x2, a2).entries
    first_1 = np.kron(ket_projector(0).entries, k2 @ k1)
    first_2 = np.kron(ket_projector(1).entries, k1 @ k2)
    return LinearOperator(first_1 + first_2, (2, 2))


_LIFTED_BRANCH: dict[tuple[int, int, int, int], np.ndarray] = {}


def _lifted_branch(x1: int, x2: int, a1: int, a2: int) -> np.ndarray:
    """Branch operator extended by identity on B: acts on B (x) C (x) T."""
    key = (x1, x2, a1, a2)
    if key not in _LIFTED_BRANCH:
        s = switch_branch_operator(x1, x2, a1, a2)
        _LIFTED_BRANCH[key] = np.kron(np.eye(2), s.entries)
    return _LIFTED_BRANCH[key]


def branch_states(bc_state: LinearOperator, x1: int, x2: int) -> dict[tuple[int, int], LinearOperator]:
    """Unnormalized post-switch BC operators, one per instrument outcome (a1, a2).

    The target starts in |0> and is traced out after the switch; the trace of
    each returned operator is the probability of that (a1, a2) branch.
    """
    target = ket_projector(0)
    full_in = np.kron(bc_state.entries, target.entries)
    branches = {}
    for a1 in (0, 1):
        for a2 in (0, 1):
            op = _lifted_branch(x1, x2, a1, a2)
            post = op @ full_in @ op.conj().T
            bct = LinearOperator(post, (2, 2, 2))
            branches[(a1, a2)] = partial_trace(bct, keep=(0, 1))
    return branches


def measurement_effects(setting: Setting) -> dict[tuple[int, int], LinearOperator]:
    """Joint BC effects Pi_b (x) Pi_c for Bob's and Charlie's directions."""
    effects = {}
    for b in (0, 1):
        pi_b = bloch_projector(BOB_ANGLE[setting.y], b)
        for c in (0, 1):
            pi_c = bloch_projector(CHARLIE_ANGLE[setting.z], c)
            effects[(b, c)] = tensor_product(pi_b.operator, pi_c.operator)
    return effects


def joint_distribution(bc_state: LinearOperator, setting: Setting) -> np.ndarray:
    """Probabilities of the 16 outcomes (a1 a2 b c) for one setting.

    p(a1 a2 b c) = Tr[(Pi_b (x) Pi_c) S_{a1 a2} (rho_BC (x) |0><0|_T) S_{a1 a2}^dag],
    with the target traced out inside the branch states.
    """
    if bc_state.dims != (2, 2):
        raise ValueError(f"bc_state must be a two-qubit operator, got dims {bc_state.dims}")
    bc_state.validate_density()
    branches = branch_states(bc_state, setting.x1, setting.x2)
    effects = measurement_effects(setting)
    probs = np.zeros(16)
    for (a1, a2), sigma in branches.items():
        for (b, c), effect in effects.items():
            p = float(np.trace(sigma.entries @ effect.entries).real)
            probs[Outcome(a1, a2, b, c).index] = max(p, 0.0)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"outcome probabilities sum to {total}, expected 1")
    return probs


def full_table(bc_state: LinearOperator) -> CorrelationTable:
    """The complete 16 x 16 conditional probability table for one BC state."""
    probs = np.zeros((16, 16))
    for setting in all_settings():
        probs[setting.index] = joint_distribution(bc_state, setting)
    return CorrelationTable(probs)


def vbc_terms(table: CorrelationTable) -> VbcBreakdown:
    """Evaluate the three causal-inequality terms on a correlation table.

    The first two terms average p(b=0, a2=x1) and p(b=1, a1=x2) over the eight
    y=0 settings with weight 1/8; the third averages p(b xor c = y z) over the
    four x1=x2=0 settings with weight 1/4.
    """
    term1 = 0.0
    term2 = 0.0
    for x1 in (0, 1):
        for x2 in (0, 1):
            for z in (0, 1):
                setting = Setting(x1, x2, 0, z)
                for outcome in all_outcomes():
                    p = table.prob(setting, outcome)
                    if outcome.b == 0 and outcome.a2 == x1:
                        term1 += p
                    if outcome.b == 1 and outcome.a1 == x2:
                        term2 += p
    term1 /= 8.0
    term2 /= 8.0

    term3 = 0.0
    for y in (0, 1):
        for z in (0, 1):
            setting = Setting(0, 0, y, z)
            for outcome in all_outcomes():
                if outcome.b ^ outcome.c == (y & z):
                    term3 += table.prob(setting, outcome)
    term3 /= 4.0

    return VbcBreakdown(term1, term2, term3)
