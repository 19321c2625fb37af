"""Codeword states built from singlet pairings.

The two-photon singlet (|01> - |10>)/sqrt(2) is unchanged when both photons
are rotated identically, so any multi-photon state assembled purely from
singlet pairings survives collective channel noise. Four photons admit three
pairings, giving three quartet codewords; discarding one photon of a quartet
leaves a three-photon mixed codeword (one singlet plus one maximally mixed
photon), of which there are again three.

Photon positions are 1-based throughout, matching the outcome-string
convention of qmath.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qmath import DensityMatrix, StateVector, bit_string, partial_trace

_SQRT_HALF = 1.0 / np.sqrt(2.0)

# Pairing structure of each quartet codeword. Quartet 1 pairs photons
# (1,2)(3,4); quartet 2 pairs (1,3)(2,4); quartet 3 pairs (1,4)(2,3).
QUARTET_PAIRING = {
    1: ((1, 2), (3, 4)),
    2: ((1, 3), (2, 4)),
    3: ((1, 4), (2, 3)),
}

# Singlet position pair of each trio codeword; the remaining photon is
# maximally mixed.
TRIO_SINGLET_PAIR = {1: (1, 2), 2: (1, 3), 3: (2, 3)}


@dataclass(frozen=True)
class PairingDiagram:
    """Which photon positions are singlet-paired and which are mixed."""

    pairs: tuple[tuple[int, int], ...]
    mixed_positions: tuple[int, ...]

    def __post_init__(self):
        seen: set[int] = set()
        for pair in self.pairs:
            if len(pair) != 2 or pair[0] == pair[1]:
                raise ValueError(f"invalid pair {pair}")
            if seen & set(pair):
                raise ValueError("pairs must be disjoint")
            seen |= set(pair)
        if seen & set(self.mixed_positions):
            raise ValueError("mixed positions overlap a pair")
        positions = seen | set(self.mixed_positions)
        if positions != set(range(1, len(positions) + 1)):
            raise ValueError("positions must cover 1..N without gaps")


def quartet_pairing(i: int) -> PairingDiagram:
    _check_index(i)
    return PairingDiagram(pairs=QUARTET_PAIRING[i], mixed_positions=())


def trio_pairing(i: int) -> PairingDiagram:
    _check_index(i)
    pair = TRIO_SINGLET_PAIR[i]
    mixed = ({1, 2, 3} - set(pair)).pop()
    return PairingDiagram(pairs=(pair,), mixed_positions=(mixed,))


def _check_index(i: int) -> int:
    if i not in (1, 2, 3):
        raise ValueError(f"codeword index must be 1, 2 or 3, got {i!r}")
    return i


@lru_cache(maxsize=None)
def singlet() -> StateVector:
    """The antisymmetric two-photon state (|01> - |10>)/sqrt(2)."""
    amps = np.zeros(4, dtype=complex)
    amps[0b01] = _SQRT_HALF
    amps[0b10] = -_SQRT_HALF
    return StateVector(amps)


@lru_cache(maxsize=None)
def abc_states() -> tuple[StateVector, StateVector, StateVector]:
    """The three orthonormal weight-2 superpositions the quartets live on.

    a = (|0101> + |1010>)/sqrt(2)
    b = (|0110> + |1001>)/sqrt(2)
    c = (|0011> + |1100>)/sqrt(2)
    """
    def pair_state(first: str, second: str) -> StateVector:
        amps = np.zeros(16, dtype=complex)
        amps[int(first, 2)] = _SQRT_HALF
        amps[int(second, 2)] = _SQRT_HALF
        return StateVector(amps)

    return (
        pair_state("0101", "1010"),
        pair_state("0110", "1001"),
        pair_state("0011", "1100"),
    )


@lru_cache(maxsize=None)
def quartet_state(i: int) -> StateVector:
    """Quartet codeword i as a 4-photon state vector.

    The canonical amplitudes are fixed by the decomposition over the a/b/c
    states: quartet 1 = (a-b)/sqrt(2), quartet 2 = (c-b)/sqrt(2),
    quartet 3 = (a-c)/sqrt(2), so quartet 3 = quartet 1 - quartet 2 exactly.
    Each equals (up to global sign) the product of singlets over its pairing
    diagram.
    """
    _check_index(i)
    a, b, c = abc_states()
    combos = {
        1: a.amplitudes - b.amplitudes,
        2: c.amplitudes - b.amplitudes,
        3: a.amplitudes - c.amplitudes,
    }
    return StateVector(_SQRT_HALF * combos[i])


@lru_cache(maxsize=None)
def trio_state(i: int) -> DensityMatrix:
    """Trio codeword i: singlet projector on its pair, I/2 on the third photon.

    Built directly from the pairing, independently of any quartet, so the
    quartet-discard route can be checked against it.
    """
    _check_index(i)
    pair = TRIO_SINGLET_PAIR[i]
    mixed = ({1, 2, 3} - set(pair)).pop()
    singlet_amp = {"01": _SQRT_HALF, "10": -_SQRT_HALF}
    rho = np.zeros((8, 8), dtype=complex)
    for row in range(8):
        rbits = bit_string(row, 3)
        amp_row = singlet_amp.get(rbits[pair[0] - 1] + rbits[pair[1] - 1])
        if amp_row is None:
            continue
        for col in range(8):
            cbits = bit_string(col, 3)
            amp_col = singlet_amp.get(cbits[pair[0] - 1] + cbits[pair[1] - 1])
            if amp_col is None or rbits[mixed - 1] != cbits[mixed - 1]:
                continue
            rho[row, col] = amp_row * np.conj(amp_col) * 0.5
    return DensityMatrix(rho)


def surviving_trio_index(i: int, discarded: int) -> int:
    """Trio codeword label left after dropping one photon of quartet i.

    The pair not containing the discarded photon survives as a singlet; its
    positions are relabeled 1..3 in order over the three remaining photons.
    """
    _check_index(i)
    if discarded not in (1, 2, 3, 4):
        raise ValueError(f"discarded position must be 1..4, got {discarded!r}")
    pair_a, pair_b = QUARTET_PAIRING[i]
    surviving_pair = pair_b if discarded in pair_a else pair_a
    survivors = [p for p in (1, 2, 3, 4) if p != discarded]
    relabel = {old: new for new, old in enumerate(survivors, start=1)}
    new_pair = tuple(sorted(relabel[p] for p in surviving_pair))
    for index, pair in TRIO_SINGLET_PAIR.items():
        if pair == new_pair:
            return index
    raise AssertionError(f"no trio pairing matches {new_pair}")


def discard_photon(i: int, discarded: int) -> tuple[DensityMatrix, int]:
    """Trace one photon out of quartet i.

    Returns the reduced three-photon state (survivors relabeled 1..3 in
    order) together with the trio codeword index it equals.
    """
    trio_index = surviving_trio_index(i, discarded)
    keep = [p for p in (1, 2, 3, 4) if p != discarded]
    reduced = partial_trace(quartet_state(i), keep)
    return reduced, trio_index
