"""Attack strategies against the exact enumeration oracles."""
import numpy as np
import pytest

import oracles
from singletqkd import qmath
from singletqkd.adversary import (
    AttackConfig,
    Eavesdropper,
    intercept_resend,
    pair_guess_usd,
    usd_attack,
)
from singletqkd.channel import fresh_payload, loss_mask
from singletqkd.codewords import quartet_state, trio_state
from singletqkd.decoder import BasisChoice, classify
from singletqkd.protocol import PAIR_FOR_TRIT

PAIRS = ((1, 2), (2, 3), (3, 1))


def _simulate_intercept(photons, policy, rounds, seed):
    rng = np.random.default_rng(seed)
    tallies = {"tamper": 0, "conclusive_correct": 0, "conclusive_error": 0, "inconclusive": 0}
    for _ in range(rounds):
        pair = PAIRS[int(rng.integers(3))]
        bit = int(rng.integers(2))
        state = quartet_state(pair[bit]) if photons == 4 else trio_state(pair[bit])
        payload, _ = intercept_resend(fresh_payload(state), policy, rng)
        outcome = qmath.measure_product_basis(payload.state, BasisChoice.random(rng).as_unitary, rng)
        verdict = classify(outcome, pair)
        if verdict.verdict == "tamper":
            tallies["tamper"] += 1
        elif not verdict.is_conclusive:
            tallies["inconclusive"] += 1
        elif verdict.bit == bit:
            tallies["conclusive_correct"] += 1
        else:
            tallies["conclusive_error"] += 1
    return tallies


def _assert_within_5_sigma(tallies, rates, rounds):
    for key, p in rates.items():
        if key not in tallies:
            continue
        sigma = np.sqrt(rounds * p * (1 - p))
        assert abs(tallies[key] - rounds * p) <= 5 * max(sigma, 1.0), (key, tallies[key], rounds * p)


class TestInterceptResend:
    def test_same_basis_gives_eve_bobs_exact_string(self):
        rng = np.random.default_rng(60)
        basis = BasisChoice.diagonal()
        for _ in range(200):
            payload, record = intercept_resend(fresh_payload(quartet_state(1)), "diagonal", rng)
            bob_outcome = qmath.measure_product_basis(payload.state, basis.as_unitary, rng)
            assert bob_outcome == record.outcome

    def test_oracle_rates_are_the_frozen_fractions(self):
        rates = oracles.intercept_resend_rates(4, policy="random")
        assert abs(rates["tamper"] - 5 / 16) < 1e-12
        assert abs(rates["conclusive_error"] - 1 / 16) < 1e-12
        assert abs(rates["conclusive_correct"] - 5 / 16) < 1e-12
        assert abs(rates["inconclusive"] - 5 / 16) < 1e-12
        trio_rates = oracles.intercept_resend_rates(3, policy="random")
        assert abs(trio_rates["tamper"] - 1 / 8) < 1e-12
        assert abs(trio_rates["conclusive_error"] - 1 / 8) < 1e-12

    def test_empirical_rates_match_oracle_random_policy(self):
        rounds = 20_000
        tallies = _simulate_intercept(4, "random", rounds, seed=61)
        _assert_within_5_sigma(tallies, oracles.intercept_resend_rates(4, "random"), rounds)
        assert tallies["tamper"] > 0 and tallies["conclusive_error"] > 0

    def test_empirical_rates_match_oracle_fixed_policy(self):
        rounds = 20_000
        tallies = _simulate_intercept(4, "rectilinear", rounds, seed=62)
        _assert_within_5_sigma(tallies, oracles.intercept_resend_rates(4, "rectilinear"), rounds)

    def test_trio_rates_match_oracle(self):
        rounds = 20_000
        tallies = _simulate_intercept(3, "random", rounds, seed=63)
        _assert_within_5_sigma(tallies, oracles.intercept_resend_rates(3, "random"), rounds)


class TestUsdAttack:
    def test_requires_known_pair(self):
        with pytest.raises(ValueError):
            usd_attack(fresh_payload(quartet_state(1)), None, 0.5, np.random.default_rng(0))

    def test_conclusive_rate_is_half_and_forwards_truth(self):
        rng = np.random.default_rng(64)
        rounds = 20_000
        conclusive = 0
        for _ in range(rounds):
            pair = PAIRS[int(rng.integers(3))]
            bit = int(rng.integers(2))
            payload, record = usd_attack(fresh_payload(quartet_state(pair[bit])), pair, 0.5, rng)
            if record.suppressed:
                assert payload.state is None
                assert loss_mask(payload) == frozenset({1, 2, 3, 4})
            else:
                conclusive += 1
                assert record.certain and record.inferred_bit == bit
                assert record.resent_codeword == pair[bit]
        sigma = np.sqrt(rounds * 0.25)
        assert abs(conclusive - rounds / 2) <= 5 * sigma

    def test_zero_budget_shows_excess_loss(self):
        rng = np.random.default_rng(65)
        rounds = 5000
        suppressed = sum(
            usd_attack(fresh_payload(quartet_state(1)), (1, 2), 0.0, rng)[1].suppressed
            for _ in range(rounds)
        )
        sigma = np.sqrt(rounds * 0.25)
        assert abs(suppressed - rounds / 2) <= 5 * sigma  # cannot hide below 1/2

    def test_large_budget_adds_extra_suppression(self):
        rng = np.random.default_rng(66)
        rounds = 8000
        budget = 0.75
        suppressed = sum(
            usd_attack(fresh_payload(quartet_state(1)), (1, 2), budget, rng)[1].suppressed
            for _ in range(rounds)
        )
        sigma = np.sqrt(rounds * budget * (1 - budget))
        assert abs(suppressed - rounds * budget) <= 5 * sigma

    def test_works_on_trio_payloads(self):
        rng = np.random.default_rng(67)
        payload, record = usd_attack(fresh_payload(trio_state(1)), (1, 2), 0.5, rng)
        if not record.suppressed:
            assert payload.state.n_qubits == 3


class TestPairGuess:
    def test_empirical_rates_match_oracle(self):
        rng = np.random.default_rng(68)
        rounds = 20_000
        tallies = {"suppressed": 0, "tamper": 0, "conclusive_correct": 0,
                   "conclusive_error": 0, "inconclusive": 0}
        for _ in range(rounds):
            pair = PAIRS[int(rng.integers(3))]
            bit = int(rng.integers(2))
            payload, record = pair_guess_usd(fresh_payload(quartet_state(pair[bit])), rng)
            if record.suppressed:
                tallies["suppressed"] += 1
                continue
            outcome = qmath.measure_product_basis(payload.state, BasisChoice.random(rng).as_unitary, rng)
            verdict = classify(outcome, pair)
            if verdict.verdict == "tamper":
                tallies["tamper"] += 1
            elif not verdict.is_conclusive:
                tallies["inconclusive"] += 1
            elif verdict.bit == bit:
                tallies["conclusive_correct"] += 1
            else:
                tallies["conclusive_error"] += 1
        rates = oracles.pair_guess_rates(4)
        _assert_within_5_sigma(tallies, rates, rounds)
        assert tallies["conclusive_error"] > 0

    def test_correct_guess_reduces_to_usd(self):
        rng = np.random.default_rng(69)
        seen_correct_guess = 0
        for _ in range(300):
            pair = PAIRS[int(rng.integers(3))]
            bit = int(rng.integers(2))
            payload, record = pair_guess_usd(fresh_payload(quartet_state(pair[bit])), rng)
            if record.resent_codeword is None:
                continue
            if frozenset(record.guessed_pair) == frozenset(pair):
                seen_correct_guess += 1
                assert record.resent_codeword == pair[bit]  # error-free on a correct guess
        assert seen_correct_guess > 20


class TestEavesdropper:
    def test_none_kind_passes_payload_through(self):
        eve = Eavesdropper(AttackConfig(kind="none"), pairing_public_early=False, loss_budget=0.0)
        payload = fresh_payload(quartet_state(1))
        assert eve.process(payload, None, np.random.default_rng(0)) is payload

    def test_usd_falls_back_without_early_announcement(self):
        eve = Eavesdropper(AttackConfig(kind="usd"), pairing_public_early=False, loss_budget=0.5)
        assert eve.requested_kind == "usd"
        assert eve.effective_kind == "pair_guess_usd"

    def test_usd_keeps_kind_with_early_announcement(self):
        eve = Eavesdropper(AttackConfig(kind="usd"), pairing_public_early=True, loss_budget=0.5)
        assert eve.effective_kind == "usd"

    def test_pair_guess_certainty_marked_only_on_matching_pair(self):
        rng = np.random.default_rng(70)
        eve = Eavesdropper(AttackConfig(kind="pair_guess_usd"), pairing_public_early=False, loss_budget=0.0)
        certain = uncertain = 0
        for round_id in range(2000):
            trit = int(rng.integers(3))
            bit = int(rng.integers(2))
            pair = PAIR_FOR_TRIT[trit]
            payload = fresh_payload(quartet_state(pair[bit]), round_id=round_id)
            eve.process(payload, None, rng)
            eve.resolve(round_id, pair)
            known = eve.known_bit(round_id)
            record = eve.records[round_id]
            if known is not None:
                certain += 1
                assert frozenset(record.guessed_pair) == frozenset(pair)
                assert known == bit  # certainty is always correct
            elif record.resent_codeword is not None:
                uncertain += 1
        assert certain > 0 and uncertain > 0

    def test_intercept_records_never_certain(self):
        rng = np.random.default_rng(71)
        eve = Eavesdropper(AttackConfig(kind="intercept_resend"), pairing_public_early=False, loss_budget=0.0)
        for round_id in range(200):
            pair = PAIRS[int(rng.integers(3))]
            payload = fresh_payload(quartet_state(pair[0]), round_id=round_id)
            eve.process(payload, None, rng)
            eve.resolve(round_id, pair)
            assert eve.known_bit(round_id) is None
