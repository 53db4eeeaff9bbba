"""Shared hypothesis strategies and independent oracles.

The table oracle below is deliberately NOT built from the switch branch
operators.  It uses the collapse argument instead: with both re-preparations
set to |0> the instruments act trivially and B, C are measured directly;
for any other re-preparation pair the two traversal orders decohere exactly,
the first instrument always reads 0, the second reads the first's setting,
and the control leaves the switch in the definite state matching the order.
"""

import math

import numpy as np
from hypothesis import strategies as st

from qswitch.quantum import LinearOperator, bloch_projector
from qswitch.switch import BOB_ANGLE, CHARLIE_ANGLE, Outcome, Setting, all_settings


def density_operator_strategy(n: int = 4, dims: tuple[int, ...] = (2, 2)):
    """Random density operators rho = G G^dag / tr(G G^dag)."""

    entry = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, width=32)

    @st.composite
    def build(draw):
        real = np.array(draw(st.lists(entry, min_size=n * n, max_size=n * n))).reshape(n, n)
        imag = np.array(draw(st.lists(entry, min_size=n * n, max_size=n * n))).reshape(n, n)
        g = real + 1j * imag + 0.05 * np.eye(n)  # keep the trace away from zero
        rho = g @ g.conj().T
        rho = rho / np.trace(rho).real
        rho = (rho + rho.conj().T) / 2.0
        return LinearOperator(rho, dims)

    return build()


def collapse_oracle_row(bc_state: LinearOperator, setting: Setting) -> np.ndarray:
    """Outcome distribution for one setting via the collapse argument."""
    rho = bc_state.entries
    pi_b = {b: bloch_projector(BOB_ANGLE[setting.y], b).operator.entries for b in (0, 1)}
    pi_c = {c: bloch_projector(CHARLIE_ANGLE[setting.z], c).operator.entries for c in (0, 1)}
    probs = np.zeros(16)

    if setting.x1 == 0 and setting.x2 == 0:
        for b in (0, 1):
            for c in (0, 1):
                p = float(np.trace(np.kron(pi_b[b], pi_c[c]) @ rho).real)
                probs[Outcome(0, 0, b, c).index] = p
        return probs

    kets = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    for order in (0, 1):
        a1, a2 = (0, setting.x1) if order == 0 else (setting.x2, 0)
        ket = kets[order]
        control_proj = np.outer(ket, ket)
        for b in (0, 1):
            p_ob = float(np.trace(np.kron(pi_b[b], control_proj) @ rho).real)
            for c in (0, 1):
                p_c = float((ket @ pi_c[c] @ ket).real)
                probs[Outcome(a1, a2, b, c).index] += p_ob * p_c
    return probs


def closed_form_werner_row(v: float, gamma: float, setting: Setting) -> np.ndarray:
    """Fully algebraic outcome distribution for a dephased Werner source."""
    theta_b = BOB_ANGLE[setting.y]
    theta_c = CHARLIE_ANGLE[setting.z]
    probs = np.zeros(16)

    if setting.x1 == 0 and setting.x2 == 0:
        correlation = v * (
            math.cos(theta_b) * math.cos(theta_c)
            + (1.0 - gamma) * math.sin(theta_b) * math.sin(theta_c)
        )
        for b in (0, 1):
            for c in (0, 1):
                sign = 1.0 if b == c else -1.0
                probs[Outcome(0, 0, b, c).index] = (1.0 + sign * correlation) / 4.0
        return probs

    for order in (0, 1):
        a1, a2 = (0, setting.x1) if order == 0 else (setting.x2, 0)
        for b in (0, 1):
            sign_ob = 1.0 if b == order else -1.0
            p_ob = v * (1.0 + sign_ob * math.cos(theta_b)) / 4.0 + (1.0 - v) / 4.0
            for c in (0, 1):
                sign_oc = 1.0 if c == order else -1.0
                p_c = (1.0 + sign_oc * math.cos(theta_c)) / 2.0
                probs[Outcome(a1, a2, b, c).index] += p_ob * p_c
    return probs


def closed_form_werner_table(v: float, gamma: float = 0.0) -> np.ndarray:
    return np.stack([closed_form_werner_row(v, gamma, s) for s in all_settings()])
