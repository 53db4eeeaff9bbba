"""Polarization-and-path simulation of the switch interferometer.

The photon's path encodes the control qubit and its polarization the target
(|0| = H, |1| = V).  An input PBS sends H into the right path R (instrument 1
acts first) and V into the upper path U (instrument 2 first).  Half-wave
plates then initialize the target to H in both paths.  Each instrument is a
beam displacer that sorts polarization into spatial modes labelled by its
outcome -- instrument 1 deflects V downward (rows, a1 = 1), instrument 2
deflects H sideways (columns, a2 = 0) -- followed by a half-wave plate at 0 or
45 degrees that re-prepares the target as |x_i|.  The R and U traversals visit
the two displacers in opposite order, and their four terminal loops form a
2 x 2 array labelled by (a1, a2).  A final half-wave plate plus PBS per loop
returns every branch to a single output mode, erasing the target and mapping
the path back to polarization (R -> H, U -> V).

The control measurement applies the rotation diag(1,-i) . EOM(2t) . diag(1,i)
(a quarter-wave plate at 0, an electro-optic modulator, and a quarter-wave
plate at 90 degrees) and resolves the result on a PBS; port H is outcome 0.
The remote qubit B never enters the interferometer and is measured abstractly.

The whole module exists to check one statement: for every two-qubit BC state
and every setting, the network reproduces the abstract switch distribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .quantum import LinearOperator, bloch_projector
from .switch import BOB_ANGLE, CHARLIE_ANGLE, Outcome, Setting

H, V = 0, 1
_POL_NAME = {H: "H", V: "V"}

WAVEPLATE_KINDS = ("HWP", "QWP", "EOM")
ROUTING_KINDS = ("PBS", "BD")


@dataclass(frozen=True)
class OpticalElement:
    """One network element: a waveplate on a set of modes, or a routing map.

    Waveplates (HWP, QWP, EOM) carry an angle and act on the polarization of
    every listed mode.  PBS and BD are lossless permutations of (mode, pol)
    pairs that preserve polarization: ``routing[(mode, pol)] = destination``.
    """

    kind: str
    label: str
    modes: tuple[str, ...] = ()
    angle: float = 0.0
    routing: tuple[tuple[str, int, str], ...] = ()

    def __post_init__(self):
        if self.kind not in WAVEPLATE_KINDS + ROUTING_KINDS:
            raise ValueError(f"unknown element kind {self.kind}")
        if self.kind in ROUTING_KINDS and not self.routing:
            raise ValueError(f"{self.kind} element needs a routing map")

    def routing_map(self) -> dict[tuple[str, int], str]:
        return {(mode, pol): dest for mode, pol, dest in self.routing}


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def jones_matrix(element: OpticalElement) -> np.ndarray:
    """2x2 polarization action of a waveplate element."""
    theta = element.angle
    if element.kind == "HWP":
        c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
        return np.array([[c2, s2], [s2, -c2]], dtype=complex)
    if element.kind == "QWP":
        return _rotation(theta) @ np.diag([1.0, 1.0j]) @ _rotation(-theta)
    if element.kind == "EOM":
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, 1.0j * s], [1.0j * s, c]], dtype=complex)
    raise ValueError(f"{element.kind} elements route modes and have no Jones matrix")


def measurement_rotation(theta: float) -> np.ndarray:
    """The QWP(0) / EOM(2 theta) / QWP(90) composite used before a PBS.

    QWP(90) equals diag(1, -i) up to a dropped global phase i; the product
    reduces exactly to the real rotation [[cos t, -sin t], [sin t, cos t]].
    """
    eom = jones_matrix(OpticalElement("EOM", "composite_eom", angle=2 * theta))
    return np.diag([1.0, -1.0j]) @ eom @ np.diag([1.0, 1.0j])


@dataclass
class ModeState:
    """Amplitudes over (spatial mode, polarization); absent modes are zero.

    Arrays have shape (..., 2); a leading axis may carry the basis of the
    abstractly simulated remote qubit.  Branches may be subnormalized, but the
    total squared norm never exceeds 1.
    """

    amplitudes: dict[str, np.ndarray] = field(default_factory=dict)

    def norm_squared(self) -> float:
        return float(sum(np.sum(np.abs(a) ** 2) for a in self.amplitudes.values()))

    def validate(self, atol: float = 1e-12) -> None:
        if self.norm_squared() > 1.0 + atol:
            raise ValueError(f"squared norm {self.norm_squared()} exceeds 1")

    def amplitude(self, mode: str, batch_shape: tuple[int, ...] = ()) -> np.ndarray:
        if mode not in self.amplitudes:
            return np.zeros(batch_shape + (2,), dtype=complex)
        return self.amplitudes[mode]


def _apply_waveplate(state: ModeState, element: OpticalElement) -> ModeState:
    jones = jones_matrix(element)
    new = dict(state.amplitudes)
    for mode in element.modes:
        if mode in new:
            new[mode] = new[mode] @ jones.T
    return ModeState(new)


def _apply_routing(state: ModeState, element: OpticalElement) -> ModeState:
    routing = element.routing_map()
    touched = {mode for mode, _ in routing}
    new: dict[str, np.ndarray] = {m: a.copy() for m, a in state.amplitudes.items() if m not in touched}
    for (mode, pol), dest in routing.items():
        if mode not in state.amplitudes:
            continue
        amp = state.amplitudes[mode][..., pol]
        if dest not in new:
            new[dest] = np.zeros(amp.shape + (2,), dtype=complex)
        new[dest][..., pol] += amp
    return ModeState(new)


@dataclass(frozen=True)
class SwitchNetwork:
    """Ordered element list plus the mode topology for one (x1, x2)."""

    x1: int
    x2: int
    elements: tuple[OpticalElement, ...]
    input_mode: str
    loop_modes: dict[tuple[int, int], str]
    dump_modes: tuple[str, ...]

    def to_json(self) -> str:
        payload = {
            "x1": self.x1,
            "x2": self.x2,
            "input_mode": self.input_mode,
            "loops": {f"{a1}{a2}": mode for (a1, a2), mode in sorted(self.loop_modes.items())},
            "dump_modes": list(self.dump_modes),
            "elements": [
                {
                    "label": e.label,
                    "kind": e.kind,
                    "modes": list(e.modes),
                    "angle_degrees": round(math.degrees(e.angle), 9) if e.kind in WAVEPLATE_KINDS else None,
                    "routing": [[m, _POL_NAME[p], d] for m, p, d in e.routing] or None,
                }
                for e in self.elements
            ],
        }
        return json.dumps(payload, indent=2)


def _reprep_hwp(pol_in: int, target: int) -> float:
    """Re-preparation plate angle: 0 keeps the polarization, 45 deg swaps it."""
    return 0.0 if pol_in == target else math.pi / 4


def _recombine_hwp(pol_in: int, pol_out: int) -> float:
    """Recombination plate angle mapping a pure branch onto the PBS port.

    90 degrees (not 0) keeps V so no branch picks up a stray sign relative to
    the coherently recombined x1 = x2 = 0 loop.
    """
    if pol_in == pol_out:
        return 0.0 if pol_in == H else math.pi / 2
    return math.pi / 4


def build_switch_network(x1: int, x2: int, hwp_offset: float = 0.0) -> SwitchNetwork:
    """Assemble the interferometer for re-preparation settings (x1, x2).

    ``hwp_offset`` mis-sets every half-wave plate by a fixed angle; zero builds
    the faithful network.
    """
    if x1 not in (0, 1) or x2 not in (0, 1):
        raise ValueError(f"x1 and x2 must be bits, got ({x1}, {x2})")

    def hwp(label: str, mode: str, angle: float) -> OpticalElement:
        return OpticalElement("HWP", label, modes=(mode,), angle=angle + hwp_offset)

    elements: list[OpticalElement] = [
        OpticalElement("PBS", "input_pbs", routing=(("in", H, "R"), ("in", V, "U"))),
        # Target initialization: both paths leave horizontally polarized.
        hwp("init_hwp_R", "R", 0.0),
        hwp("init_hwp_U", "U", math.pi / 4),
        # First instrument on each traversal: sort polarization into modes.
        OpticalElement("BD", "alice1_bd_R", routing=(("R", H, "R:r0"), ("R", V, "R:r1"))),
        OpticalElement("BD", "alice2_bd_U", routing=(("U", H, "U:c0"), ("U", V, "U:c1"))),
        hwp("reprep1_hwp_R:r0", "R:r0", _reprep_hwp(H, x1)),
        hwp("reprep1_hwp_R:r1", "R:r1", _reprep_hwp(V, x1)),
        hwp("reprep2_hwp_U:c0", "U:c0", _reprep_hwp(H, x2)),
        hwp("reprep2_hwp_U:c1", "U:c1", _reprep_hwp(V, x2)),
        # Second instrument: the displacement axes are orthogonal, closing the
        # 2 x 2 loop array.
        OpticalElement(
            "BD",
            "alice2_bd_R",
            routing=(
                ("R:r0", H, "R:r0c0"),
                ("R:r0", V, "R:r0c1"),
                ("R:r1", H, "R:r1c0"),
                ("R:r1", V, "R:r1c1"),
            ),
        ),
        OpticalElement(
            "BD",
            "alice1_bd_U",
            routing=(
                ("U:c0", H, "U:r0c0"),
                ("U:c0", V, "U:r1c0"),
                ("U:c1", H, "U:r0c1"),
                ("U:c1", V, "U:r1c1"),
            ),
        ),
    ]

    loops = [(a1, a2) for a1 in (0, 1) for a2 in (0, 1)]
    for a1, a2 in loops:
        r_mode, u_mode = f"R:r{a1}c{a2}", f"U:r{a1}c{a2}"
        elements.append(hwp(f"reprep2_hwp_{r_mode}", r_mode, _reprep_hwp(a2, x2)))
        elements.append(hwp(f"reprep1_hwp_{u_mode}", u_mode, _reprep_hwp(a1, x1)))

    loop_modes = {}
    dump_modes = []
    for a1, a2 in loops:
        r_mode, u_mode = f"R:r{a1}c{a2}", f"U:r{a1}c{a2}"
        out_mode, dump_mode = f"out:r{a1}c{a2}", f"dump:r{a1}c{a2}"
        elements.append(hwp(f"recomb_hwp_{r_mode}", r_mode, _recombine_hwp(x2, H)))
        elements.append(hwp(f"recomb_hwp_{u_mode}", u_mode, _recombine_hwp(x1, V)))
        elements.append(
            OpticalElement(
                "PBS",
                f"recomb_pbs_r{a1}c{a2}",
                routing=(
                    (r_mode, H, out_mode),
                    (r_mode, V, dump_mode),
                    (u_mode, V, out_mode),
                    (u_mode, H, dump_mode),
                ),
            )
        )
        loop_modes[(a1, a2)] = out_mode
        dump_modes.append(dump_mode)

    return SwitchNetwork(x1, x2, tuple(elements), "in", loop_modes, tuple(dump_modes))


def propagate(
    network: SwitchNetwork,
    state: ModeState,
    stop_before: str | None = None,
    loop_phases: dict[tuple[int, int], complex] | None = None,
) -> ModeState:
    """Run a mode state through the network elements in order.

    ``stop_before`` halts just before the element with that label.  When
    ``loop_phases`` is given, each loop's R and U branches are multiplied by
    the loop's phase right before recombination, mimicking a different but
    equally valid choice of internal path-length conventions.
    """
    phases_pending = loop_phases is not None
    for element in network.elements:
        if stop_before is not None and element.label == stop_before:
            break
        if phases_pending and element.label.startswith("recomb_"):
            new = dict(state.amplitudes)
            for (a1, a2), phase in loop_phases.items():
                for mode in (f"R:r{a1}c{a2}", f"U:r{a1}c{a2}"):
                    if mode in new:
                        new[mode] = new[mode] * phase
            state = ModeState(new)
            phases_pending = False
        if element.kind in WAVEPLATE_KINDS:
            state = _apply_waveplate(state, element)
        else:
            state = _apply_routing(state, element)
    return state


def network_transfer_matrix(network: SwitchNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Columns are the network images of the H and V input basis states.

    Returns (matrix over loop-output amplitudes, matrix over dump amplitudes);
    a faithful network is an isometry into the loop outputs with empty dumps.
    """
    out_rows = []
    dump_rows = []
    loop_order = sorted(network.loop_modes)
    for pol in (H, V):
        amp = np.zeros(2, dtype=complex)
        amp[pol] = 1.0
        final = propagate(network, ModeState({network.input_mode: amp}))
        out_rows.append(np.concatenate([final.amplitude(network.loop_modes[l]) for l in loop_order]))
        dump_rows.append(np.concatenate([final.amplitude(m) for m in network.dump_modes]))
    return np.stack(out_rows, axis=1), np.stack(dump_rows, axis=1)


def simulate_network(
    bc_state: LinearOperator,
    setting: Setting,
    hwp_offset: float = 0.0,
    loop_phases: dict[tuple[int, int], complex] | None = None,
) -> np.ndarray:
    """Outcome probabilities of the optical implementation for one setting.

    The BC state is decomposed into pure components; each component enters the
    interferometer with the control on polarization and the remote qubit
    carried along as a passive amplitude index.  Probabilities come from
    squared amplitudes per (loop, Charlie PBS port) cell combined with the
    remote qubit's projector.
    """
    if bc_state.dims != (2, 2):
        raise ValueError(f"bc_state must be a two-qubit operator, got dims {bc_state.dims}")
    bc_state.validate_density()

    network = build_switch_network(setting.x1, setting.x2, hwp_offset=hwp_offset)
    rotation = measurement_rotation(-CHARLIE_ANGLE[setting.z] / 2.0)
    bob = {b: bloch_projector(BOB_ANGLE[setting.y], b).operator.entries for b in (0, 1)}

    weights, vectors = np.linalg.eigh(bc_state.entries)
    probs = np.zeros(16)
    for weight, vector in zip(weights, vectors.T):
        if weight < 1e-14:
            continue
        # amplitude[beta, pol]: remote-qubit basis index times control polarization
        entry = ModeState({network.input_mode: vector.reshape(2, 2).astype(complex)})
        final = propagate(network, entry, loop_phases=loop_phases)
        for (a1, a2), mode in network.loop_modes.items():
            rotated = final.amplitude(mode, batch_shape=(2,)) @ rotation.T
            for c in (0, 1):
                branch = rotated[:, c]
                for b in (0, 1):
                    p = float((branch.conj() @ bob[b] @ branch).real)
                    probs[Outcome(a1, a2, b, c).index] += weight * max(p, 0.0)
    return probs
