"""Fiber model: collective unitary noise, photon loss, and contrast modes.

The realistic regime applies one unknown unitary to every photon of a
multiplet (the photons travel close together, the fiber drifts slowly).
Two collective modes cover the two ends of that regime: a fresh Haar draw
per multiplet (fast drift between multiplets) and a bounded random walk on
SU(2) (slow drift across rounds). The independent_per_photon mode breaks the
collective assumption on purpose so tests can show the encoding does not
protect against it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qmath import (
    DensityMatrix,
    QubitUnitary,
    State,
    StateVector,
    apply_collective,
    apply_product,
    haar_su2,
    partial_trace,
)

NOISE_MODES = ("none", "collective_per_multiplet", "collective_random_walk", "independent_per_photon")


@dataclass(frozen=True)
class ChannelConfig:
    noise_mode: str = "collective_per_multiplet"
    walk_step: float = 0.0
    loss_probability: float = 0.0

    def __post_init__(self):
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}, got {self.noise_mode!r}")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError("loss_probability must lie in [0, 1]")
        if self.walk_step < 0.0:
            raise ValueError("walk_step must be non-negative")


@dataclass(frozen=True)
class MultipletPayload:
    """One round's quantum signal: a trio or quartet, with per-photon loss flags.

    ``lost`` indexes the photons as originally sent; ``state`` covers only
    the surviving photons, in their original order. A fully lost multiplet
    carries state None.
    """

    state: State | None
    photon_count: int
    lost: tuple[bool, ...] = field(default=())
    round_id: int = 0

    def __post_init__(self):
        if self.photon_count not in (3, 4):
            raise ValueError("photon_count must be 3 or 4")
        lost = tuple(bool(x) for x in self.lost) or (False,) * self.photon_count
        if len(lost) != self.photon_count:
            raise ValueError("lost flags must match photon_count")
        object.__setattr__(self, "lost", lost)
        surviving = self.photon_count - sum(lost)
        if surviving == 0:
            if self.state is not None:
                raise ValueError("fully lost payload must carry state None")
        else:
            if self.state is None or self.state.n_qubits != surviving:
                raise ValueError(f"state must cover the {surviving} surviving photons")

    @property
    def surviving_positions(self) -> tuple[int, ...]:
        return tuple(p for p, gone in enumerate(self.lost, start=1) if not gone)

    @property
    def complete(self) -> bool:
        return not any(self.lost)


def fresh_payload(state: State, round_id: int = 0) -> MultipletPayload:
    return MultipletPayload(state=state, photon_count=state.n_qubits, round_id=round_id)


def loss_mask(payload: MultipletPayload) -> frozenset[int]:
    """Positions (1-based, transmission order) of the lost photons."""
    return frozenset(p for p, gone in enumerate(payload.lost, start=1) if gone)


def axis_angle_su2(axis: np.ndarray, angle: float) -> QubitUnitary:
    """Rotation by `angle` about the Bloch-sphere axis (unit 3-vector)."""
    nx, ny, nz = axis
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return QubitUnitary(np.array([
        [c - 1j * s * nz, -s * (ny + 1j * nx)],
        [s * (ny - 1j * nx), c + 1j * s * nz],
    ]))


class Channel:
    """Applies one ChannelConfig; owns the random-walk state, if any.

    A Channel instance belongs to one session (one thread). All other modes
    are stateless, so a throwaway instance per call is also fine; the
    module-level transmit() does exactly that.
    """

    def __init__(self, cfg: ChannelConfig):
        self.cfg = cfg
        self._walk_u: QubitUnitary | None = None

    def _walk_unitary(self, rng: np.random.Generator) -> QubitUnitary:
        if self._walk_u is None:
            self._walk_u = haar_su2(rng)  # unknown initial fiber rotation
        else:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            step = axis_angle_su2(axis, self.cfg.walk_step)
            self._walk_u = QubitUnitary(step.matrix @ self._walk_u.matrix)
        return self._walk_u

    def _apply_noise(self, state: State, rng: np.random.Generator) -> State:
        mode = self.cfg.noise_mode
        if mode == "none":
            return state
        if mode == "collective_per_multiplet":
            return apply_collective(haar_su2(rng), state)
        if mode == "collective_random_walk":
            return apply_collective(self._walk_unitary(rng), state)
        # independent_per_photon: i.i.d. rotation per photon, deliberately
        # outside the collective model.
        return apply_product([haar_su2(rng) for _ in range(state.n_qubits)], state)

    def transmit(self, payload: MultipletPayload, rng: np.random.Generator) -> MultipletPayload:
        state = payload.state
        if state is not None:
            state = self._apply_noise(state, rng)

        lost = list(payload.lost)
        p = self.cfg.loss_probability
        if p > 0.0 and state is not None:
            survivors = [pos for pos, gone in enumerate(lost, start=1) if not gone]
            kept_state_positions = []
            for state_pos, original_pos in enumerate(survivors, start=1):
                if rng.random() < p:
                    lost[original_pos - 1] = True
                else:
                    kept_state_positions.append(state_pos)
            if not kept_state_positions:
                state = None
            elif len(kept_state_positions) < len(survivors):
                state = partial_trace(state, kept_state_positions)

        return MultipletPayload(
            state=state,
            photon_count=payload.photon_count,
            lost=tuple(lost),
            round_id=payload.round_id,
        )


def transmit(payload: MultipletPayload, cfg: ChannelConfig, rng: np.random.Generator) -> MultipletPayload:
    """One-shot transmit; random-walk state does not persist across calls."""
    return Channel(cfg).transmit(payload, rng)
