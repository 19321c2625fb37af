"""Receiver side: common-basis product measurement and verdict rules.

Every photon of a multiplet is measured in the same randomly chosen
polarization basis. Because the codewords are invariant under collective
rotations, the outcome statistics do not depend on that choice, and the
verdict functions consume only the outcome string plus the announced
codeword pair:

* quartets: a weight other than 2 is impossible for every codeword, so it
  signals tampering; otherwise the outcome falls in the support of exactly
  one of the three two-string classes, which rules out at most one of the
  announced pair.
* trios: all-equal outcomes are impossible; otherwise a parallel result on a
  codeword's singlet positions rules that codeword out.

A conclusive verdict is therefore error-free: the excluded codeword has
exactly zero probability of producing the observed string.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import MultipletPayload
from .codewords import TRIO_SINGLET_PAIR
from .qmath import IDENTITY, QubitUnitary, measure_product_basis, weight

BASIS_KINDS = ("rectilinear", "diagonal")

# 45-degree polarization rotation, mapping the rectilinear axes onto the
# diagonal ones.
_DIAGONAL = QubitUnitary(np.array([
    [np.cos(np.pi / 4), -np.sin(np.pi / 4)],
    [np.sin(np.pi / 4), np.cos(np.pi / 4)],
]))


@dataclass(frozen=True)
class BasisChoice:
    kind: str
    as_unitary: QubitUnitary

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"basis kind must be one of {BASIS_KINDS}")

    @staticmethod
    def rectilinear() -> "BasisChoice":
        return BasisChoice("rectilinear", IDENTITY)

    @staticmethod
    def diagonal() -> "BasisChoice":
        return BasisChoice("diagonal", _DIAGONAL)

    @staticmethod
    def of(kind: str) -> "BasisChoice":
        return BasisChoice.rectilinear() if kind == "rectilinear" else BasisChoice.diagonal()

    @staticmethod
    def random(rng: np.random.Generator) -> "BasisChoice":
        return BasisChoice.of(BASIS_KINDS[int(rng.integers(2))])


CONCLUSIVE = "conclusive"
INCONCLUSIVE = "inconclusive"
TAMPER = "tamper"


@dataclass(frozen=True)
class Classification:
    verdict: str
    bit: int | None = None

    def __post_init__(self):
        if self.verdict not in (CONCLUSIVE, INCONCLUSIVE, TAMPER):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if (self.verdict == CONCLUSIVE) != (self.bit in (0, 1)):
            raise ValueError("conclusive verdicts carry exactly one bit, others none")

    @property
    def is_conclusive(self) -> bool:
        return self.verdict == CONCLUSIVE


def conclusive(bit: int) -> Classification:
    return Classification(CONCLUSIVE, bit)


INCONCLUSIVE_RESULT = Classification(INCONCLUSIVE)
TAMPER_RESULT = Classification(TAMPER)

# The three announced quartet pairs; within a pair the first codeword
# encodes bit 0 and the second bit 1.
QUARTET_PAIRS = ((1, 2), (2, 3), (3, 1))

# Support class ('a', 'b' or 'c') of each weight-2 outcome string, and the
# class each quartet codeword never produces.
SUPPORT_CLASS = {
    "0101": "a", "1010": "a",
    "0110": "b", "1001": "b",
    "0011": "c", "1100": "c",
}
ABSENT_SUPPORT = {1: "c", 2: "a", 3: "b"}


def _check_outcome(outcome: str, length: int) -> str:
    if len(outcome) != length or any(ch not in "01" for ch in outcome):
        raise ValueError(f"expected a {length}-bit outcome string, got {outcome!r}")
    return outcome


def classify_quartet(outcome: str, pair: tuple[int, int]) -> Classification:
    """Verdict for a 4-photon outcome given the announced codeword pair."""
    _check_outcome(outcome, 4)
    if tuple(pair) not in QUARTET_PAIRS:
        raise ValueError(f"pair must be one of {QUARTET_PAIRS}, got {pair!r}")
    if weight(outcome) != 2:
        return TAMPER_RESULT
    first, second = pair
    support = SUPPORT_CLASS[outcome]
    if support == ABSENT_SUPPORT[second]:
        return conclusive(0)  # second codeword cannot produce this string
    if support == ABSENT_SUPPORT[first]:
        return conclusive(1)
    return INCONCLUSIVE_RESULT


def _parallel(outcome: str, positions: tuple[int, int]) -> bool:
    return outcome[positions[0] - 1] == outcome[positions[1] - 1]


def classify_trio(outcome: str, pair: tuple[int, int]) -> Classification:
    """Verdict for a 3-photon outcome given the announced trio codeword pair.

    Any ordered pair of distinct trio indices is accepted: when a trio round
    derives from a quartet discard, the announced pairing normalizes to
    pairs outside the three canonical ones.
    """
    _check_outcome(outcome, 3)
    first, second = pair
    if first not in (1, 2, 3) or second not in (1, 2, 3) or first == second:
        raise ValueError(f"pair must be two distinct trio indices, got {pair!r}")
    if outcome in ("000", "111"):
        return TAMPER_RESULT
    if _parallel(outcome, TRIO_SINGLET_PAIR[second]):
        return conclusive(0)  # a singlet never comes out parallel
    if _parallel(outcome, TRIO_SINGLET_PAIR[first]):
        return conclusive(1)
    return INCONCLUSIVE_RESULT


def classify(outcome: str, pair: tuple[int, int]) -> Classification:
    """Dispatch on outcome length: 4 photons to quartet rules, 3 to trio."""
    if len(outcome) == 4:
        return classify_quartet(outcome, pair)
    return classify_trio(outcome, pair)


def measure_multiplet(payload: MultipletPayload, basis: BasisChoice, rng: np.random.Generator) -> str:
    """Measure every photon of a complete multiplet in the chosen basis."""
    if not payload.complete:
        raise ValueError("multiplet has lost photons and cannot be measured as a round")
    return measure_product_basis(payload.state, basis.as_unitary, rng)
