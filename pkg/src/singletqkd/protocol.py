"""Full key-distribution sessions over the singlet-pairing codewords.

A session walks both parties through the whole exchange: random bits and
pairing trits, state preparation, transmission (with optional attack),
common-basis measurement, pairing announcement, verdict-based sifting,
error estimation on a sacrificed subset, parity-bisection reconciliation,
and universal-hash privacy amplification. Aborts are normal, reported
outcomes, not errors.

All randomness derives from one master seed through independent per-purpose
streams, so a session is fully reproducible and rounds can be audited in
any order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adversary import AttackConfig, Eavesdropper
from .channel import Channel, ChannelConfig, MultipletPayload, fresh_payload
from .codewords import quartet_state, surviving_trio_index, trio_state, discard_photon
from .decoder import BasisChoice, Classification, TAMPER, classify, measure_multiplet
from .seeding import derive_rng, derive_seed
from .transcript import (
    Abort,
    BitReveal,
    PairingAnnouncement,
    Received,
    TestSubset,
    Transcript,
    Verdicts,
)

VARIANTS = ("quartet", "trio", "trio_via_discard")

# Trit value -> ordered codeword pair; the first member encodes bit 0.
PAIR_FOR_TRIT = {0: (1, 2), 1: (2, 3), 2: (3, 1)}

# Stream domains hanging off the master seed.
_D_BITS, _D_TRITS, _D_PREPARE, _D_CHANNEL, _D_EVE = 0, 1, 2, 3, 4
_D_BOB_BASIS, _D_BOB_MEASURE, _D_TEST, _D_RECONCILE, _D_PA = 5, 6, 7, 8, 9

FINAL_CHECK_SUBSETS = 20  # residual-error escape probability 2**-20
FINAL_CHECK_ROUNDS = 3


@dataclass(frozen=True)
class ProtocolConfig:
    variant: str = "quartet"
    n: int = 200
    delta: float = 0.5
    error_threshold: float = 0.05
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    announce_pairing_early: bool = False
    security_margin: int = 64

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not 0.0 <= self.error_threshold < 1.0:
            raise ValueError("error_threshold must lie in [0, 1)")
        if self.security_margin < 0:
            raise ValueError("security_margin must be non-negative")

    @property
    def total_rounds(self) -> int:
        return math.ceil((4.0 + self.delta) * self.n)


@dataclass
class RoundRecord:
    round_id: int
    trit: int
    alice_bit: int
    discard_position: int | None = None
    lost: bool = False
    basis_kind: str | None = None
    outcome: str | None = None
    classification: Classification | None = None


@dataclass(frozen=True)
class KeyMaterial:
    bits: str

    def __post_init__(self):
        if any(b not in "01" for b in self.bits):
            raise ValueError("key bits must be '0'/'1' characters")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class SessionReport:
    variant: str
    n: int
    requested_attack: str
    effective_attack: str
    rounds_sent: int = 0
    rounds_lost: int = 0
    conclusive_count: int = 0
    inconclusive_count: int = 0
    tamper_count: int = 0
    sifted_length: int = 0
    test_qber: float | None = None
    aborted: bool = False
    abort_reason: str | None = None
    reconciliation_leakage: int = 0
    final_key_length: int = 0
    eve_information: int = 0

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n": self.n,
            "requested_attack": self.requested_attack,
            "effective_attack": self.effective_attack,
            "rounds_sent": self.rounds_sent,
            "rounds_lost": self.rounds_lost,
            "conclusive_count": self.conclusive_count,
            "inconclusive_count": self.inconclusive_count,
            "tamper_count": self.tamper_count,
            "sifted_length": self.sifted_length,
            "test_qber": self.test_qber,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason or "-",
            "reconciliation_leakage": self.reconciliation_leakage,
            "final_key_length": self.final_key_length,
            "eve_information": self.eve_information,
        }


@dataclass
class SessionResult:
    report: SessionReport
    alice_key: KeyMaterial
    bob_key: KeyMaterial
    transcript: Transcript


def announced_pair(variant: str, trit: int, discard_position: int | None = None) -> tuple[int, int]:
    """Ordered codeword pair a round's verdict is judged against.

    For the quartet-then-discard variant the quartet pair is normalized to
    the trio labels left over after the announced discard.
    """
    base = PAIR_FOR_TRIT[trit]
    if variant == "trio_via_discard":
        if discard_position is None:
            raise ValueError("discard position required to normalize the pair")
        return (
            surviving_trio_index(base[0], discard_position),
            surviving_trio_index(base[1], discard_position),
        )
    return base


def alice_prepare_round(
    bit: int,
    trit: int,
    variant: str,
    rng: np.random.Generator,
    round_id: int = 0,
) -> tuple[MultipletPayload, RoundRecord]:
    """Encode one key bit as the multiplet selected by (bit, trit)."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    if trit not in (0, 1, 2):
        raise ValueError("trit must be 0, 1 or 2")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    index = PAIR_FOR_TRIT[trit][bit]
    record = RoundRecord(round_id=round_id, trit=trit, alice_bit=bit)
    if variant == "quartet":
        payload = fresh_payload(quartet_state(index), round_id=round_id)
    elif variant == "trio":
        payload = fresh_payload(trio_state(index), round_id=round_id)
    else:
        discard = int(rng.integers(1, 5))
        reduced, _ = discard_photon(index, discard)
        record.discard_position = discard
        payload = fresh_payload(reduced, round_id=round_id)
    return payload, record


@dataclass
class SiftResult:
    alice_bits: np.ndarray
    bob_bits: np.ndarray
    round_ids: tuple[int, ...]
    tamper_count: int
    inconclusive_count: int


def sift(records: list[RoundRecord]) -> SiftResult:
    """Keep exactly the conclusive rounds, in round order."""
    alice, bob, kept = [], [], []
    tampered = inconclusive = 0
    for record in sorted(records, key=lambda r: r.round_id):
        verdict = record.classification
        if verdict is None:
            continue
        if verdict.is_conclusive:
            alice.append(record.alice_bit)
            bob.append(verdict.bit)
            kept.append(record.round_id)
        elif verdict.verdict == TAMPER:
            tampered += 1
        else:
            inconclusive += 1
    return SiftResult(
        alice_bits=np.array(alice, dtype=np.uint8),
        bob_bits=np.array(bob, dtype=np.uint8),
        round_ids=tuple(kept),
        tamper_count=tampered,
        inconclusive_count=inconclusive,
    )


def estimate_error(
    alice_bits: np.ndarray,
    bob_bits: np.ndarray,
    test_indices: np.ndarray,
    threshold: float,
) -> tuple[float, bool]:
    """Mismatch fraction on the sacrificed subset; abort on strict excess."""
    subset = np.asarray(test_indices, dtype=int)
    mismatches = int(np.sum(alice_bits[subset] != bob_bits[subset]))
    qber = mismatches / subset.size
    return qber, qber > threshold


@dataclass
class ReconcileResult:
    corrected: np.ndarray
    leakage: int
    verified: bool
    corrections: int


def _parity(bits: np.ndarray, indices: np.ndarray) -> int:
    return int(np.bitwise_xor.reduce(bits[indices])) if indices.size else 0


def reconcile(
    alice_bits: np.ndarray,
    bob_bits: np.ndarray,
    rng: np.random.Generator,
    qber_hint: float | None = None,
    max_passes: int = 10,
) -> ReconcileResult:
    """Interactive parity bisection over random permutations.

    Each pass permutes the string, splits it into blocks, and compares
    block parities; a mismatching block is bisected down to one flipped
    bit. Blocks double each pass until a pass comes back clean. The final
    whole-string check then exchanges FINAL_CHECK_SUBSETS random-subset
    parities; a failing subset is itself bisected (blocks of any size can
    hide an even residue, random subsets cannot hide it twenty times in a
    row), and verification requires one fully clean round within
    FINAL_CHECK_ROUNDS. A surviving mismatch therefore escapes with
    probability at most 2**-FINAL_CHECK_SUBSETS. Leakage counts every
    parity bit disclosed anywhere.
    """
    alice = np.asarray(alice_bits, dtype=np.uint8)
    bob = np.asarray(bob_bits, dtype=np.uint8).copy()
    n = alice.size
    if bob.size != n:
        raise ValueError("strings must have equal length")
    leakage = 0
    corrections = 0

    def bisect_and_fix(chunk: np.ndarray) -> int:
        nonlocal leakage, corrections
        while chunk.size > 1:
            half = chunk[: chunk.size // 2]
            leakage += 1
            if _parity(alice, half) != _parity(bob, half):
                chunk = half
            else:
                chunk = chunk[chunk.size // 2:]
        bob[chunk[0]] ^= 1
        corrections += 1
        return int(chunk[0])

    if n > 0:
        if qber_hint is None or qber_hint <= 0.0:
            block = n
        else:
            block = min(n, max(8, math.ceil(0.73 / qber_hint)))
        for _ in range(max_passes):
            order = rng.permutation(n)
            mismatched = 0
            for start in range(0, n, block):
                chunk = order[start:start + block]
                leakage += 1
                if _parity(alice, chunk) != _parity(bob, chunk):
                    mismatched += 1
                    bisect_and_fix(chunk)
            if mismatched == 0:
                break
            block = min(n, block * 2)

    verified = False
    for _ in range(FINAL_CHECK_ROUNDS):
        clean = True
        for _ in range(FINAL_CHECK_SUBSETS):
            subset = np.flatnonzero(rng.random(n) < 0.5)
            leakage += 1
            if subset.size and _parity(alice, subset) != _parity(bob, subset):
                clean = False
                bisect_and_fix(subset)
        if clean:
            verified = True
            break
    return ReconcileResult(corrected=bob, leakage=leakage, verified=verified, corrections=corrections)


def binary_entropy(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return float(-q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q))


def final_key_length(n_bits: int, qber: float, leakage: int, security_margin: int) -> int:
    """Shannon-style distillable length minus disclosed bits and a margin.

    This is a simulation statistic, not a composable finite-key bound.
    """
    value = n_bits * (1.0 - binary_entropy(qber)) - leakage - security_margin
    return max(0, math.floor(value))


def privacy_amplify(bits: np.ndarray, qber: float, leakage: int, security_margin: int, seed: int) -> KeyMaterial:
    """Compress by a seeded random binary matrix (a universal hash family)."""
    bits = np.asarray(bits, dtype=np.uint8)
    out_len = final_key_length(bits.size, qber, leakage, security_margin)
    if out_len <= 0:
        raise ValueError("privacy amplification exhausted the key")
    matrix = derive_rng(seed).integers(0, 2, size=(out_len, bits.size), dtype=np.uint8)
    hashed = (matrix @ bits.astype(np.int64)) % 2
    return KeyMaterial("".join("1" if b else "0" for b in hashed))


def run_session(cfg: ProtocolConfig, seed: int) -> SessionResult:
    """Execute one full session; every abort path returns a normal report."""
    rounds = cfg.total_rounds
    alice_bits_all = derive_rng(seed, _D_BITS).integers(0, 2, size=rounds)
    trits_all = derive_rng(seed, _D_TRITS).integers(0, 3, size=rounds)

    transcript = Transcript()
    attack_active = cfg.attack.kind != "none"
    eve = (
        Eavesdropper(cfg.attack, cfg.announce_pairing_early, cfg.channel.loss_probability)
        if attack_active
        else None
    )
    channel = Channel(cfg.channel)
    report = SessionReport(
        variant=cfg.variant,
        n=cfg.n,
        requested_attack=cfg.attack.kind,
        effective_attack=eve.effective_kind if eve else "none",
        rounds_sent=rounds,
    )
    empty = KeyMaterial("")

    def aborted(party: str, reason: str) -> SessionResult:
        transcript.append(Abort(party, reason))
        report.aborted = True
        report.abort_reason = reason
        return SessionResult(report, empty, empty, transcript)

    # Preparation and transmission. An active attack replaces the fiber
    # with Eve plus a perfect segment; suppressed rounds surface as loss.
    records: list[RoundRecord] = []
    payloads: list[MultipletPayload] = []
    for r in range(rounds):
        payload, record = alice_prepare_round(
            int(alice_bits_all[r]), int(trits_all[r]), cfg.variant,
            derive_rng(seed, _D_PREPARE, r), round_id=r,
        )
        if eve is not None:
            known = (
                announced_pair(cfg.variant, record.trit, record.discard_position)
                if cfg.announce_pairing_early
                else None
            )
            payload = eve.process(payload, known, derive_rng(seed, _D_EVE, r))
        else:
            payload = channel.transmit(payload, derive_rng(seed, _D_CHANNEL, r))
        record.lost = not payload.complete
        records.append(record)
        payloads.append(payload)

    received_ids = tuple(r.round_id for r in records if not r.lost)
    lost_ids = tuple(r.round_id for r in records if r.lost)
    report.rounds_lost = len(lost_ids)

    def pairing_message(round_ids: tuple[int, ...]) -> PairingAnnouncement:
        return PairingAnnouncement(
            round_ids=round_ids,
            trits=tuple(int(trits_all[r]) for r in round_ids),
            discards=(
                tuple(records[r].discard_position for r in round_ids)
                if cfg.variant == "trio_via_discard"
                else None
            ),
        )

    # The insecure variant announces the pairing while the photons are
    # still in flight, before the receipt note; Eve already used it above.
    if cfg.announce_pairing_early:
        transcript.append(pairing_message(tuple(range(rounds))))
        transcript.append(Received(received_ids, lost_ids))
    else:
        transcript.append(Received(received_ids, lost_ids))
        transcript.append(pairing_message(received_ids))

    # Measurement in a per-round random common basis, then verdicts.
    for r in received_ids:
        record = records[r]
        basis = BasisChoice.random(derive_rng(seed, _D_BOB_BASIS, r))
        outcome = measure_multiplet(payloads[r], basis, derive_rng(seed, _D_BOB_MEASURE, r))
        record.basis_kind = basis.kind
        record.outcome = outcome
        record.classification = classify(
            outcome, announced_pair(cfg.variant, record.trit, record.discard_position)
        )

    if eve is not None:
        for record in records:
            eve.resolve(record.round_id, announced_pair(cfg.variant, record.trit, record.discard_position))

    sifted = sift(records)
    report.conclusive_count = sifted.alice_bits.size
    report.tamper_count = sifted.tamper_count
    report.inconclusive_count = sifted.inconclusive_count
    report.sifted_length = sifted.alice_bits.size

    transcript.append(Verdicts(
        conclusive_ids=sifted.round_ids,
        tamper_ids=tuple(
            r.round_id for r in records
            if r.classification is not None and r.classification.verdict == TAMPER
        ),
    ))

    if sifted.alice_bits.size < 2 * cfg.n:
        return aborted("bob", "insufficient-sifted")

    # Error estimation on a sacrificed subset of size n.
    test_positions = np.sort(
        derive_rng(seed, _D_TEST).choice(sifted.alice_bits.size, size=cfg.n, replace=False)
    )
    transcript.append(TestSubset(tuple(int(i) for i in test_positions)))
    alice_test = "".join(str(int(b)) for b in sifted.alice_bits[test_positions])
    bob_test = "".join(str(int(b)) for b in sifted.bob_bits[test_positions])
    indices = tuple(int(i) for i in test_positions)
    transcript.append(BitReveal("alice", indices, alice_test))
    transcript.append(BitReveal("bob", indices, bob_test))

    qber, over_threshold = estimate_error(
        sifted.alice_bits, sifted.bob_bits, test_positions, cfg.error_threshold
    )
    report.test_qber = qber
    if over_threshold:
        return aborted("alice", "error-rate")

    keep_mask = np.ones(sifted.alice_bits.size, dtype=bool)
    keep_mask[test_positions] = False
    alice_key_bits = sifted.alice_bits[keep_mask]
    bob_key_bits = sifted.bob_bits[keep_mask]
    key_round_ids = tuple(rid for rid, keep in zip(sifted.round_ids, keep_mask) if keep)

    rec = reconcile(alice_key_bits, bob_key_bits, derive_rng(seed, _D_RECONCILE), qber_hint=qber)
    report.reconciliation_leakage = rec.leakage
    if not rec.verified:
        return aborted("bob", "reconciliation-failed")

    key_len = final_key_length(alice_key_bits.size, qber, rec.leakage, cfg.security_margin)
    if key_len <= 0:
        return aborted("alice", "key-exhausted")
    pa_seed = derive_seed(seed, _D_PA)
    alice_key = privacy_amplify(alice_key_bits, qber, rec.leakage, cfg.security_margin, pa_seed)
    bob_key = privacy_amplify(rec.corrected, qber, rec.leakage, cfg.security_margin, pa_seed)
    report.final_key_length = key_len

    if eve is not None:
        known = 0
        for rid, bit in zip(key_round_ids, alice_key_bits):
            inferred = eve.known_bit(rid)
            if inferred is not None and inferred == int(bit):
                known += 1
        # Full certain coverage of the reconciled key means Eve can follow
        # the public reconciliation and hashing, i.e. total compromise.
        report.eve_information = key_len if known == alice_key_bits.size else known

    return SessionResult(report, alice_key, bob_key, transcript)
