"""Imperfection models for the switch protocol and their closed-form oracles.

Three knobs cover the dominant experimental imperfections:

    visibility v:        Werner mixing of the source, v*phi+ + (1-v)*I/4;
    control_dephasing g: damping of the control's off-diagonal blocks after
                         the switch (loss of coherence between the orders);
    angle_jitter s:      Gaussian jitter of the measurement directions,
                         averaged by scrambled-Sobol quasi-Monte Carlo.

With no jitter the degraded functional has a closed form, derived by writing
the Werner state as v * ideal + (1-v) * (uncorrelated control).  The first two
terms ignore Charlie, so dephasing leaves them alone: each equals
v/2 + (1-v) * 3/8 = 3/8 + v/8.  The third term is a Bell correlation whose
z-side contribution survives dephasing while the x-side is damped by (1-g):

    term3 = 1/2 + v * sqrt(2) * (2 - g) / 8,

so total(v, g) = 5/4 + v/4 + v*sqrt(2)*(2-g)/8.  The pipeline must reproduce
this oracle exactly; the oracle never feeds the pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

from .quantum import LinearOperator, bloch_projector, identity, ket_projector, phi_plus, tensor_product
from .switch import (
    BOB_ANGLE,
    CHARLIE_ANGLE,
    CLASSICAL_BOUND,
    CorrelationTable,
    Outcome,
    Setting,
    VbcBreakdown,
    all_settings,
    branch_states,
    vbc_terms,
)

JITTER_SAMPLES = 1024  # scrambled Sobol, power of two for balance
_JITTER_SEED = 20240917


class NoCrossingError(ValueError):
    """The degraded total never reaches the classical bound on v in [0, 1]."""


@dataclass(frozen=True)
class NoiseParams:
    visibility: float = 1.0
    control_dephasing: float = 0.0
    angle_jitter: float = 0.0
    jitter_seed: int = _JITTER_SEED

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not 0.0 <= self.control_dephasing <= 1.0:
            raise ValueError(f"control_dephasing must lie in [0, 1], got {self.control_dephasing}")
        if self.angle_jitter < 0.0:
            raise ValueError(f"angle_jitter must be >= 0, got {self.angle_jitter}")


def werner_state(v: float) -> LinearOperator:
    """v * phi+ + (1 - v) * I/4 on the BC pair."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    mixed = identity((2, 2)).entries / 4.0
    return LinearOperator(v * phi_plus().entries + (1.0 - v) * mixed, (2, 2))


def visibility_from_fidelity(fidelity: float) -> float:
    """Invert F = (1 + 3v)/4, the phi+ fidelity of a Werner state."""
    if not 0.25 <= fidelity <= 1.0:
        raise ValueError(f"no Werner state has fidelity {fidelity}; need [0.25, 1]")
    return (4.0 * fidelity - 1.0) / 3.0


def dephase_control(state: LinearOperator, gamma: float) -> LinearOperator:
    """Multiply the control's off-diagonal blocks by (1 - gamma).

    Acts on any two-qubit B (x) C operator, normalized or not; trace and
    positivity are preserved.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if state.dims != (2, 2):
        raise ValueError(f"expected a two-qubit BC operator, got dims {state.dims}")
    blocks = state.entries.reshape(2, 2, 2, 2).copy()  # b, c, b', c'
    for c in (0, 1):
        blocks[:, c, :, 1 - c] *= 1.0 - gamma
    return LinearOperator(blocks.reshape(4, 4), (2, 2))


def noise_oracle_terms(v: float, gamma: float) -> VbcBreakdown:
    """Closed-form degraded terms; independent target for the pipeline."""
    term3 = 0.5 + v * math.sqrt(2.0) * (2.0 - gamma) / 8.0
    return VbcBreakdown(0.375 + v / 8.0, 0.375 + v / 8.0, term3)


def noise_oracle_total(v: float, gamma: float) -> float:
    return noise_oracle_terms(v, gamma).total


def order_mixture_table() -> CorrelationTable:
    """Oracle table for a completely uncorrelated control (Werner v = 0).

    Built from elementary classical reasoning, not from the switch operators:
    each order occurs with probability 1/2; the first instrument reads the
    fresh target |0| so its outcome is 0 and the second reads the first's
    re-preparation; b is uniform; c follows a projective measurement of the
    definite control state |order|.
    """
    probs = np.zeros((16, 16))
    for setting in all_settings():
        for order in (0, 1):
            if order == 0:
                a1, a2 = 0, setting.x1
            else:
                a1, a2 = setting.x2, 0
            control = ket_projector(order)
            for b in (0, 1):
                for c in (0, 1):
                    effect = bloch_projector(CHARLIE_ANGLE[setting.z], c)
                    p_c = float(np.trace(control.entries @ effect.operator.entries).real)
                    outcome = Outcome(a1, a2, b, c)
                    probs[setting.index, outcome.index] += 0.5 * 0.5 * p_c
    return CorrelationTable(probs)


# -- pipeline ----------------------------------------------------------------


def _jitter_offsets(params: NoiseParams) -> np.ndarray:
    """Quasi-Monte-Carlo Gaussian offsets for the four measurement directions.

    Columns: Bob's y=0 and y=1 angles, Charlie's z=0 and z=1 angles.
    """
    sampler = qmc.Sobol(d=4, scramble=True, seed=params.jitter_seed)
    uniforms = sampler.random(JITTER_SAMPLES)
    uniforms = np.clip(uniforms, 1e-12, 1.0 - 1e-12)
    return params.angle_jitter * norm.ppf(uniforms)


def _measured_probs(branches, y_angle: float, z_angle: float) -> np.ndarray:
    probs = np.zeros(16)
    effects = {}
    for b in (0, 1):
        pi_b = bloch_projector(y_angle, b).operator
        for c in (0, 1):
            pi_c = bloch_projector(z_angle, c).operator
            effects[(b, c)] = tensor_product(pi_b, pi_c).entries
    for (a1, a2), sigma in branches.items():
        for (b, c), effect in effects.items():
            p = float(np.trace(sigma.entries @ effect).real)
            probs[Outcome(a1, a2, b, c).index] = max(p, 0.0)
    return probs


def _projector_stack(angles: np.ndarray) -> np.ndarray:
    """Projector pairs for a batch of angles, shape (samples, outcome, 2, 2)."""
    direction = (
        np.sin(angles)[:, None, None] * np.array([[0.0, 1.0], [1.0, 0.0]])
        + np.cos(angles)[:, None, None] * np.array([[1.0, 0.0], [0.0, -1.0]])
    )
    stack = np.empty((angles.size, 2, 2, 2))
    stack[:, 0] = (np.eye(2) + direction) / 2.0
    stack[:, 1] = (np.eye(2) - direction) / 2.0
    return stack


def _jitter_averaged_probs(branches, y_angles: np.ndarray, z_angles: np.ndarray) -> np.ndarray:
    """Outcome probabilities averaged over jittered measurement directions."""
    bob = _projector_stack(y_angles)
    charlie = _projector_stack(z_angles)
    # kron over (b, c) per sample: eff[s, b, c, i*2+k, j*2+l] = bob[s,b,i,j] charlie[s,c,k,l]
    eff = np.einsum("sbij,sckl->sbcikjl", bob, charlie).reshape(-1, 2, 2, 4, 4)
    probs = np.zeros(16)
    for (a1, a2), sigma in branches.items():
        p_bc = np.einsum("sbcij,ji->sbc", eff, sigma.entries).real.mean(axis=0)
        for b in (0, 1):
            for c in (0, 1):
                probs[Outcome(a1, a2, b, c).index] = max(float(p_bc[b, c]), 0.0)
    return probs


def noisy_table(params: NoiseParams) -> CorrelationTable:
    """Full degraded table: Werner source, post-switch control dephasing,
    and optional jitter-averaged measurement directions."""
    source = werner_state(params.visibility)
    dephased_branches = {}
    for x1 in (0, 1):
        for x2 in (0, 1):
            branches = branch_states(source, x1, x2)
            dephased_branches[(x1, x2)] = {
                a: dephase_control(sigma, params.control_dephasing) for a, sigma in branches.items()
            }

    probs = np.zeros((16, 16))
    if params.angle_jitter == 0.0:
        for setting in all_settings():
            branches = dephased_branches[(setting.x1, setting.x2)]
            probs[setting.index] = _measured_probs(
                branches, BOB_ANGLE[setting.y], CHARLIE_ANGLE[setting.z]
            )
        return CorrelationTable(probs)

    offsets = _jitter_offsets(params)
    for setting in all_settings():
        branches = dephased_branches[(setting.x1, setting.x2)]
        y_angles = BOB_ANGLE[setting.y] + offsets[:, setting.y]
        z_angles = CHARLIE_ANGLE[setting.z] + offsets[:, 2 + setting.z]
        probs[setting.index] = _jitter_averaged_probs(branches, y_angles, z_angles)
    return CorrelationTable(probs)


def vbc_under_noise(params: NoiseParams) -> VbcBreakdown:
    """Degraded VBC terms through the full simulation pipeline."""
    return vbc_terms(noisy_table(params))


def threshold_visibility(gamma: float, tol: float = 1e-6) -> float:
    """Bisection for the visibility where the degraded total crosses 7/4.

    The total is affine and increasing in v at fixed gamma, so the crossing is
    unique when it exists; raises NoCrossingError when even v = 1 stays below
    the bound.
    """
    def total(v: float) -> float:
        return vbc_under_noise(NoiseParams(visibility=v, control_dephasing=gamma)).total

    lo, hi = 0.0, 1.0
    if total(hi) < CLASSICAL_BOUND:
        raise NoCrossingError(
            f"total at v=1, gamma={gamma} is {total(hi):.6f} < {CLASSICAL_BOUND}; no crossing in [0, 1]"
        )
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if total(mid) < CLASSICAL_BOUND:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def sweep_rows(
    visibilities, gammas, angle_jitter: float = 0.0, include_thresholds: bool = True
) -> list[dict]:
    """Grid sweep of the degraded terms, one dict per row.

    When thresholds are included, each gamma whose crossing exists contributes
    one extra row evaluated exactly at the threshold visibility.
    """
    rows = []
    for gamma in gammas:
        for v in visibilities:
            breakdown = vbc_under_noise(
                NoiseParams(visibility=v, control_dephasing=gamma, angle_jitter=angle_jitter)
            )
            rows.append(_sweep_row(v, gamma, angle_jitter, breakdown))
    if include_thresholds:
        for gamma in gammas:
            try:
                v_star = threshold_visibility(gamma)
            except NoCrossingError:
                continue
            breakdown = vbc_under_noise(NoiseParams(visibility=v_star, control_dephasing=gamma))
            rows.append(_sweep_row(v_star, gamma, 0.0, breakdown))
    return rows


def _sweep_row(v, gamma, sigma, breakdown: VbcBreakdown) -> dict:
    return {
        "v": float(v),
        "gamma": float(gamma),
        "sigma_theta": float(sigma),
        "term1": breakdown.term1,
        "term2": breakdown.term2,
        "term3": breakdown.term3,
        "total": breakdown.total,
    }
