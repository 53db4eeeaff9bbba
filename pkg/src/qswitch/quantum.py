"""Exact linear algebra for few-qubit states, channels, and projective effects.

Dense complex matrices carrying explicit subsystem dimensions.  All operators
in this project are at most 8x8, so the implementation favours clarity and
exact checking over performance.  One global ordering convention is used
throughout: subsystems are listed left to right as B (remote qubit), C
(control qubit), T (target qubit), and index 0 is the leftmost tensor factor.

Outcome bit 0 always labels the +1 eigenvalue of a measured direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Exactness tolerance (hermiticity, traces, completeness) and the slightly
# looser positivity floor that absorbs accumulated rounding in eigenvalues.
ATOL_EXACT = 1e-12
ATOL_POSITIVE = 1e-10


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A complex square matrix together with its subsystem dimensions.

    Houses states, Kraus operators, projectors and effects alike; density
    operators additionally satisfy ``validate_density``.
    """

    entries: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {entries.shape}")
        if any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must be >= 2, got {dims}")
        if math.prod(dims) != entries.shape[0]:
            raise ValueError(f"dims {dims} do not multiply to matrix dimension {entries.shape[0]}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.entries.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_hermitian(self, atol: float = ATOL_EXACT) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, atol=atol, rtol=0.0))

    def validate_density(self) -> None:
        """Check hermiticity, unit trace and positivity of a density operator."""
        if not self.is_hermitian(ATOL_EXACT):
            raise ValueError("density operator must be Hermitian")
        if abs(self.trace() - 1.0) > ATOL_EXACT:
            raise ValueError(f"density operator must have unit trace, got {self.trace()}")
        eigenvalues = np.linalg.eigvalsh(self.entries)
        if eigenvalues.min() < -ATOL_POSITIVE:
            raise ValueError(f"density operator has negative eigenvalue {eigenvalues.min()}")


@dataclass(frozen=True, eq=False)
class Effect:
    """A measurement effect 0 <= E <= I tagged with its binary outcome label."""

    operator: LinearOperator
    outcome_label: int

    def __post_init__(self):
        if self.outcome_label not in (0, 1):
            raise ValueError(f"outcome label must be a bit, got {self.outcome_label}")
        if not self.operator.is_hermitian(ATOL_POSITIVE):
            raise ValueError("effect must be Hermitian")
        eigenvalues = np.linalg.eigvalsh(self.operator.entries)
        if eigenvalues.min() < -ATOL_POSITIVE or eigenvalues.max() > 1.0 + ATOL_POSITIVE:
            raise ValueError(f"effect eigenvalues must lie in [0, 1], got {eigenvalues}")


def identity(dims: tuple[int, ...]) -> LinearOperator:
    return LinearOperator(np.eye(math.prod(dims)), dims)


SIGMA_X = LinearOperator(np.array([[0.0, 1.0], [1.0, 0.0]]), (2,))
SIGMA_Z = LinearOperator(np.array([[1.0, 0.0], [0.0, -1.0]]), (2,))
IDENTITY_2 = identity((2,))

KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)


def ket_projector(bit: int) -> LinearOperator:
    """Rank-one projector |bit><bit| on a single qubit."""
    ket = KET_0 if bit == 0 else KET_1
    return LinearOperator(np.outer(ket, ket.conj()), (2,))


def phi_plus() -> LinearOperator:
    """The maximally entangled two-qubit state (|00> + |11>)/sqrt(2) as a density operator."""
    ket = (np.kron(KET_0, KET_0) + np.kron(KET_1, KET_1)) / math.sqrt(2.0)
    return LinearOperator(np.outer(ket, ket.conj()), (2, 2))


def tensor_product(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """Kronecker product; subsystem lists are concatenated left to right."""
    return LinearOperator(np.kron(a.entries, b.entries), a.dims + b.dims)


def partial_trace(state: LinearOperator, keep) -> LinearOperator:
    """Trace out every subsystem not in ``keep``, preserving the original order.

    ``keep`` is a subsystem index or an iterable of indices into ``state.dims``.
    """
    if isinstance(keep, int):
        keep = (keep,)
    keep = tuple(sorted(set(int(i) for i in keep)))
    n = state.n_subsystems
    if any(i < 0 or i >= n for i in keep):
        raise IndexError(f"subsystem index out of range for {n} subsystems: {keep}")
    dims = state.dims
    tensor = state.entries.reshape(dims + dims)
    # Row axis k gets label k, column axis k gets label n+k; traced subsystems
    # share the row label so einsum contracts them.
    col_labels = [n + k if k in keep else k for k in range(n)]
    out_labels = list(keep) + [n + k for k in keep]
    reduced = np.einsum(tensor, list(range(n)) + col_labels, out_labels)
    kept_dims = tuple(dims[k] for k in keep)
    size = math.prod(kept_dims)
    return LinearOperator(reduced.reshape(size, size), kept_dims)


def bloch_projector(theta: float, outcome: int) -> Effect:
    """Projector onto the XZ-plane direction at angle ``theta`` from the z axis.

    theta = 0 is the z axis, theta = pi/2 the x axis.  Outcome 0 projects onto
    the +1 eigenvector, outcome 1 onto the -1 eigenvector.
    """
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be a bit, got {outcome}")
    sign = 1.0 if outcome == 0 else -1.0
    direction = math.sin(theta) * SIGMA_X.entries + math.cos(theta) * SIGMA_Z.entries
    return Effect(LinearOperator((np.eye(2) + sign * direction) / 2.0, (2,)), outcome)


def measurement_pair(theta: float) -> tuple[Effect, Effect]:
    """Both effects of the binary XZ-plane measurement at angle ``theta``."""
    return bloch_projector(theta, 0), bloch_projector(theta, 1)


def born_probability(state: LinearOperator, effect) -> float:
    """Tr[rho E], validated to be a probability and clamped to [0, 1]."""
    operator = effect.operator if isinstance(effect, Effect) else effect
    if state.dims != operator.dims:
        raise ValueError(f"dimension mismatch: state {state.dims} vs effect {operator.dims}")
    value = np.trace(state.entries @ operator.entries)
    p = float(value.real)
    if p < -ATOL_EXACT or p > 1.0 + ATOL_EXACT:
        raise ValueError(f"Born probability {p} outside [0, 1] beyond tolerance")
    return min(max(p, 0.0), 1.0)
