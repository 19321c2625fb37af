"""Attack strategies applied to multiplets in transit.

Every strategy replaces the fiber between the parties with a perfect
segment (worst case for the honest parties: any disturbance Bob sees is
pure attack, and Eve can hide suppressions inside the loss budget the
parties already expect).

* intercept_resend: Eve measures every photon in a common basis of her
  choosing and resends the corresponding product state. Whenever her basis
  differs from the receiver's, the resent state produces illegal outcome
  strings with finite probability, so the attack is detectable.
* usd: the discrimination attack. It requires the codeword pair to be
  public at interception time (the early-announcement protocol variant).
  Eve runs the same error-free discrimination the receiver uses; on a
  conclusive result she knows the codeword and forwards a fresh copy, on an
  inconclusive one she suppresses the round, which the parties see as loss.
* pair_guess_usd: the same procedure when the pair is secret. Eve guesses
  one of the three pairings; wrong guesses make her forward wrong
  codewords, which shows up as key errors.

Each record tracks what Eve could later know with certainty, so a session
can account for her information on the final key exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import MultipletPayload, fresh_payload
from .codewords import quartet_state, trio_state
from .decoder import BasisChoice, classify
from .qmath import apply_collective, basis_state, measure_product_basis

ATTACK_KINDS = ("none", "intercept_resend", "usd", "pair_guess_usd")
INTERCEPT_POLICIES = ("rectilinear", "diagonal", "random")

# Canonical ordering of each unordered codeword pairing, shared by both
# multiplet sizes; used when Eve only needs to discriminate, not to map a
# verdict onto the announced bit convention.
_CANONICAL_PAIR = {
    frozenset({1, 2}): (1, 2),
    frozenset({2, 3}): (2, 3),
    frozenset({1, 3}): (3, 1),
}


@dataclass(frozen=True)
class AttackConfig:
    kind: str = "none"
    intercept_policy: str = "random"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"attack kind must be one of {ATTACK_KINDS}, got {self.kind!r}")
        if self.intercept_policy not in INTERCEPT_POLICIES:
            raise ValueError(f"intercept policy must be one of {INTERCEPT_POLICIES}")


@dataclass
class EveRecord:
    round_id: int
    basis_kind: str | None = None
    outcome: str | None = None
    suppressed: bool = False
    resent_codeword: int | None = None
    guessed_pair: tuple[int, int] | None = None
    known_pair: tuple[int, int] | None = None
    certain: bool = False
    inferred_bit: int | None = None


def _suppressed(payload: MultipletPayload) -> MultipletPayload:
    return MultipletPayload(
        state=None,
        photon_count=payload.photon_count,
        lost=(True,) * payload.photon_count,
        round_id=payload.round_id,
    )


def _fresh_codeword(index: int, photon_count: int, round_id: int) -> MultipletPayload:
    state = quartet_state(index) if photon_count == 4 else trio_state(index)
    payload = fresh_payload(state, round_id=round_id)
    return payload


def intercept_resend(payload: MultipletPayload, policy: str, rng: np.random.Generator) -> tuple[MultipletPayload, EveRecord]:
    """Measure-and-resend in a common basis chosen by policy."""
    if policy == "random":
        basis = BasisChoice.random(rng)
    else:
        basis = BasisChoice.of(policy)
    outcome = measure_product_basis(payload.state, basis.as_unitary, rng)
    resent = apply_collective(basis.as_unitary, basis_state(outcome))
    record = EveRecord(round_id=payload.round_id, basis_kind=basis.kind, outcome=outcome)
    return fresh_payload(resent, round_id=payload.round_id), record


def usd_attack(
    payload: MultipletPayload,
    known_pair: tuple[int, int],
    loss_budget: float,
    rng: np.random.Generator,
) -> tuple[MultipletPayload, EveRecord]:
    """Discrimination attack with the codeword pair known to Eve.

    Conclusive rounds are forwarded as ideal codewords, inconclusive ones
    suppressed. The natural suppression rate is exactly 1/2; when the
    parties expect even more loss, Eve additionally drops conclusive rounds
    at random so the total matches the budget.
    """
    if known_pair is None:
        raise ValueError("the discrimination attack needs the codeword pair at interception time")
    basis = BasisChoice.rectilinear()  # any fixed common basis works equally well
    outcome = measure_product_basis(payload.state, basis.as_unitary, rng)
    verdict = classify(outcome, tuple(known_pair))
    record = EveRecord(
        round_id=payload.round_id,
        basis_kind=basis.kind,
        outcome=outcome,
        known_pair=tuple(known_pair),
    )
    if not verdict.is_conclusive:
        record.suppressed = True
        return _suppressed(payload), record

    record.inferred_bit = verdict.bit
    record.resent_codeword = known_pair[verdict.bit]
    record.certain = True
    extra_drop = max(0.0, 2.0 * loss_budget - 1.0)
    if extra_drop > 0.0 and rng.random() < extra_drop:
        record.suppressed = True
        return _suppressed(payload), record
    return _fresh_codeword(record.resent_codeword, payload.photon_count, payload.round_id), record


def pair_guess_usd(payload: MultipletPayload, rng: np.random.Generator) -> tuple[MultipletPayload, EveRecord]:
    """Discrimination attack mounted blind: Eve guesses the pairing.

    Discrimination only needs the unordered candidate set, so Eve draws one
    of the three pairings uniformly. A conclusive result identifies one
    candidate of the guessed pair, which she forwards; when the guess was
    wrong that codeword can disagree with what Alice sent.
    """
    pairings = list(_CANONICAL_PAIR.values())
    guess = pairings[int(rng.integers(3))]
    basis = BasisChoice.rectilinear()
    outcome = measure_product_basis(payload.state, basis.as_unitary, rng)
    verdict = classify(outcome, guess)
    record = EveRecord(
        round_id=payload.round_id,
        basis_kind=basis.kind,
        outcome=outcome,
        guessed_pair=guess,
    )
    if not verdict.is_conclusive:
        record.suppressed = True
        return _suppressed(payload), record
    record.resent_codeword = guess[verdict.bit]
    return _fresh_codeword(record.resent_codeword, payload.photon_count, payload.round_id), record


class Eavesdropper:
    """Per-session attack state: strategy dispatch plus Eve's records.

    The discrimination attack refuses to run unless the pairing is public
    at interception time; the session then falls back to the blind
    pair-guessing variant, and ``effective_kind`` records which strategy
    actually ran.
    """

    def __init__(self, cfg: AttackConfig, pairing_public_early: bool, loss_budget: float):
        self.cfg = cfg
        self.requested_kind = cfg.kind
        if cfg.kind == "usd" and not pairing_public_early:
            self.effective_kind = "pair_guess_usd"
        else:
            self.effective_kind = cfg.kind
        self.loss_budget = float(loss_budget)
        self.records: dict[int, EveRecord] = {}

    def process(self, payload: MultipletPayload, known_pair: tuple[int, int] | None, rng: np.random.Generator) -> MultipletPayload:
        kind = self.effective_kind
        if kind == "none":
            return payload
        if kind == "intercept_resend":
            out, record = intercept_resend(payload, self.cfg.intercept_policy, rng)
        elif kind == "usd":
            out, record = usd_attack(payload, known_pair, self.loss_budget, rng)
        else:
            out, record = pair_guess_usd(payload, rng)
        self.records[payload.round_id] = record
        return out

    def resolve(self, round_id: int, true_pair: tuple[int, int]) -> None:
        """Settle what Eve knows once the pairing for a round is public."""
        record = self.records.get(round_id)
        if record is None:
            return
        record.known_pair = tuple(true_pair)
        if self.effective_kind == "pair_guess_usd" and record.resent_codeword is not None:
            # Only a correct guess lets Eve be sure the codeword she
            # identified (and forwarded) is what the receiver will decode.
            if frozenset(record.guessed_pair) == frozenset(true_pair):
                record.certain = True
                record.inferred_bit = 0 if record.resent_codeword == true_pair[0] else 1
        elif self.effective_kind == "intercept_resend" and record.outcome is not None:
            # Her own string classifies like any outcome, but the receiver's
            # string generally differs, so this is a guess, never certain.
            verdict = classify(record.outcome, tuple(true_pair))
            if verdict.is_conclusive:
                record.inferred_bit = verdict.bit

    def known_bit(self, round_id: int) -> int | None:
        record = self.records.get(round_id)
        if record is not None and record.certain:
            return record.inferred_bit
        return None
