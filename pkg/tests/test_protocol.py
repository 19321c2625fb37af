"""Session machinery: preparation, sifting, estimation, reconciliation,
privacy amplification, and full end-to-end runs."""
import numpy as np
import pytest

import oracles
from singletqkd.adversary import AttackConfig
from singletqkd.channel import ChannelConfig
from singletqkd.codewords import trio_state
from singletqkd.decoder import Classification
from singletqkd.protocol import (
    PAIR_FOR_TRIT,
    KeyMaterial,
    ProtocolConfig,
    RoundRecord,
    alice_prepare_round,
    announced_pair,
    binary_entropy,
    estimate_error,
    final_key_length,
    privacy_amplify,
    reconcile,
    run_session,
    sift,
)


class TestConfig:
    def test_round_count(self):
        assert ProtocolConfig(n=200, delta=0.5).total_rounds == 900
        assert ProtocolConfig(n=3, delta=0.1).total_rounds == 13  # ceil(12.3)

    def test_validation(self):
        with pytest.raises(ValueError):
            ProtocolConfig(n=0)
        with pytest.raises(ValueError):
            ProtocolConfig(delta=-1)
        with pytest.raises(ValueError):
            ProtocolConfig(error_threshold=1.0)
        with pytest.raises(ValueError):
            ProtocolConfig(variant="quintet")


class _FixedRng:
    """Duck-typed generator returning a scripted integer."""

    def __init__(self, value):
        self.value = value

    def integers(self, low, high=None):
        return self.value


class TestPrepareRound:
    def test_quartet_encoding(self):
        rng = np.random.default_rng(0)
        payload, record = alice_prepare_round(0, 0, "quartet", rng)
        np.testing.assert_allclose(payload.state.amplitudes, oracles.QUARTET[1], atol=1e-15)
        payload, record = alice_prepare_round(1, 1, "quartet", rng)
        np.testing.assert_allclose(payload.state.amplitudes, oracles.QUARTET[3], atol=1e-15)
        assert record.discard_position is None

    def test_trio_encoding(self):
        rng = np.random.default_rng(0)
        payload, _ = alice_prepare_round(1, 0, "trio", rng)
        np.testing.assert_allclose(payload.state.matrix, oracles.TRIO[2], atol=1e-12)

    def test_discard_variant_with_scripted_position(self):
        payload, record = alice_prepare_round(0, 0, "trio_via_discard", _FixedRng(4))
        assert record.discard_position == 4
        np.testing.assert_allclose(payload.state.matrix, oracles.TRIO[1], atol=1e-12)

    def test_input_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            alice_prepare_round(2, 0, "quartet", rng)
        with pytest.raises(ValueError):
            alice_prepare_round(0, 3, "quartet", rng)
        with pytest.raises(ValueError):
            alice_prepare_round(0, 0, "sextet", rng)


class TestAnnouncedPair:
    def test_plain_variants_use_trit_table(self):
        for trit, pair in PAIR_FOR_TRIT.items():
            assert announced_pair("quartet", trit) == pair
            assert announced_pair("trio", trit) == pair

    def test_discard_variant_normalizes(self):
        for trit, (x, y) in PAIR_FOR_TRIT.items():
            for d in (1, 2, 3, 4):
                expected = (oracles.DISCARD_TABLE[(x, d)], oracles.DISCARD_TABLE[(y, d)])
                assert announced_pair("trio_via_discard", trit, d) == expected
                assert expected[0] != expected[1]

    def test_discard_variant_requires_position(self):
        with pytest.raises(ValueError):
            announced_pair("trio_via_discard", 0)


class TestSift:
    def _record(self, rid, bit, verdict, vbit=None):
        record = RoundRecord(round_id=rid, trit=0, alice_bit=bit)
        record.classification = Classification(verdict, vbit)
        return record

    def test_keeps_conclusive_in_round_order(self):
        records = [
            self._record(3, 1, "conclusive", 1),
            self._record(0, 0, "conclusive", 0),
            self._record(2, 1, "conclusive", 1),
            self._record(1, 0, "conclusive", 0),
        ]
        result = sift(records)
        assert result.round_ids == (0, 1, 2, 3)
        np.testing.assert_array_equal(result.alice_bits, [0, 0, 1, 1])
        np.testing.assert_array_equal(result.bob_bits, [0, 0, 1, 1])

    def test_tamper_rounds_counted_and_excluded(self):
        records = [
            self._record(0, 0, "conclusive", 0),
            self._record(1, 1, "tamper"),
            self._record(2, 0, "inconclusive"),
        ]
        result = sift(records)
        assert result.round_ids == (0,)
        assert result.tamper_count == 1
        assert result.inconclusive_count == 1

    def test_unclassified_rounds_skipped(self):
        record = RoundRecord(round_id=0, trit=0, alice_bit=0)  # lost round
        result = sift([record])
        assert result.alice_bits.size == 0


class TestEstimateError:
    def test_zero_and_full_mismatch(self):
        a = np.array([0, 1, 0, 1], dtype=np.uint8)
        assert estimate_error(a, a.copy(), np.arange(4), 0.05) == (0.0, False)
        qber, abort = estimate_error(a, 1 - a, np.arange(4), 0.05)
        assert qber == 1.0 and abort

    def test_strict_threshold_boundary(self):
        n = 1000
        a = np.zeros(n, dtype=np.uint8)
        b = a.copy()
        b[:49] = 1
        qber, abort = estimate_error(a, b, np.arange(n), 0.05)
        assert abs(qber - 0.049) < 1e-12 and not abort
        b[:50] = 1
        qber, abort = estimate_error(a, b, np.arange(n), 0.05)
        assert qber == 0.05 and not abort  # equality continues
        b[:51] = 1
        _, abort = estimate_error(a, b, np.arange(n), 0.05)
        assert abort


class TestReconcile:
    def test_identical_strings_leak_only_the_checks(self):
        rng = np.random.default_rng(80)
        bits = rng.integers(0, 2, 512, dtype=np.uint8)
        result = reconcile(bits, bits.copy(), np.random.default_rng(81))
        assert result.verified and result.corrections == 0
        # one whole-string pass parity plus the 20-subset final check
        assert result.leakage == 21
        np.testing.assert_array_equal(result.corrected, bits)

    def test_single_error_located_with_logarithmic_leakage(self):
        rng = np.random.default_rng(82)
        alice = rng.integers(0, 2, 256, dtype=np.uint8)
        bob = alice.copy()
        bob[137] ^= 1
        result = reconcile(alice, bob, np.random.default_rng(83))
        assert result.verified and result.corrections == 1
        np.testing.assert_array_equal(result.corrected, alice)
        assert result.leakage <= 2 * 8 + 24  # 2*log2(256) plus pass/check overhead

    def test_random_strings_fail_final_check(self):
        rng = np.random.default_rng(84)
        for _ in range(50):
            alice = rng.integers(0, 2, 256, dtype=np.uint8)
            bob = rng.integers(0, 2, 256, dtype=np.uint8)
            result = reconcile(alice, bob, np.random.default_rng(int(rng.integers(2**32))))
            assert not result.verified

    def test_corrects_at_five_percent_error_rate(self):
        rng = np.random.default_rng(85)
        for _ in range(100):
            alice = rng.integers(0, 2, 512, dtype=np.uint8)
            flips = rng.random(512) < 0.05
            bob = alice ^ flips.astype(np.uint8)
            result = reconcile(alice, bob, np.random.default_rng(int(rng.integers(2**32))), qber_hint=0.05)
            assert result.verified
            np.testing.assert_array_equal(result.corrected, alice)

    def test_empty_input(self):
        result = reconcile(np.array([], dtype=np.uint8), np.array([], dtype=np.uint8),
                           np.random.default_rng(0))
        assert result.verified and result.corrected.size == 0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            reconcile(np.zeros(4, dtype=np.uint8), np.zeros(5, dtype=np.uint8),
                      np.random.default_rng(0))


class TestPrivacyAmplification:
    def test_entropy_values(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(0.5) == 1.0
        assert abs(binary_entropy(0.11) - 0.4999) < 1e-3

    def test_length_formula(self):
        assert final_key_length(1000, 0.0, 0, 64) == 936
        assert final_key_length(1000, 0.5, 0, 64) == 0
        assert final_key_length(100, 0.0, 200, 0) == 0

    def test_same_seed_same_key(self):
        bits = np.random.default_rng(86).integers(0, 2, 300, dtype=np.uint8)
        k1 = privacy_amplify(bits, 0.0, 10, 64, seed=7)
        k2 = privacy_amplify(bits, 0.0, 10, 64, seed=7)
        assert k1 == k2
        assert len(k1) == final_key_length(300, 0.0, 10, 64)

    def test_different_inputs_differ(self):
        bits = np.random.default_rng(87).integers(0, 2, 300, dtype=np.uint8)
        other = bits.copy()
        other[0] ^= 1
        assert privacy_amplify(bits, 0.0, 0, 64, seed=7) != privacy_amplify(other, 0.0, 0, 64, seed=7)

    def test_exhausted_budget_raises(self):
        bits = np.zeros(10, dtype=np.uint8)
        with pytest.raises(ValueError):
            privacy_amplify(bits, 0.5, 0, 0, seed=1)

    def test_key_material_validation(self):
        with pytest.raises(ValueError):
            KeyMaterial("01x")


class TestEndToEnd:
    def test_collective_noise_sessions_are_clean(self):
        cfg = ProtocolConfig(variant="quartet", n=100, delta=0.5)
        for seed in range(20):
            result = run_session(cfg, seed)
            report = result.report
            assert not report.aborted, report.abort_reason
            assert report.test_qber == 0.0
            assert report.tamper_count == 0
            assert report.conclusive_count == report.sifted_length
            assert report.final_key_length <= report.sifted_length - cfg.n
            assert result.alice_key == result.bob_key
            assert len(result.alice_key) == report.final_key_length > 0

    @pytest.mark.parametrize("variant", ["trio", "trio_via_discard"])
    def test_trio_variants_are_clean(self, variant):
        cfg = ProtocolConfig(variant=variant, n=100, delta=0.5)
        for seed in range(8):
            result = run_session(cfg, seed)
            assert not result.report.aborted
            assert result.report.test_qber == 0.0
            assert result.alice_key == result.bob_key

    def test_random_walk_noise_is_also_clean(self):
        cfg = ProtocolConfig(
            variant="quartet", n=100, delta=0.5,
            channel=ChannelConfig(noise_mode="collective_random_walk", walk_step=0.4),
        )
        result = run_session(cfg, 5)
        assert not result.report.aborted and result.report.test_qber == 0.0

    @pytest.mark.parametrize("variant", ["quartet", "trio", "trio_via_discard"])
    def test_sift_rate_near_half(self, variant):
        cfg = ProtocolConfig(variant=variant, n=200, delta=0.5)
        report = run_session(cfg, 17).report
        received = report.rounds_sent - report.rounds_lost
        sigma = np.sqrt(received * 0.25)
        assert abs(report.conclusive_count - received / 2) <= 5 * sigma

    def test_deterministic_given_seed(self):
        cfg = ProtocolConfig(variant="quartet", n=60, delta=1.0,
                             channel=ChannelConfig(loss_probability=0.1))
        a = run_session(cfg, 123)
        b = run_session(cfg, 123)
        assert a.report.as_dict() == b.report.as_dict()
        assert a.alice_key == b.alice_key
        assert a.transcript.lines() == b.transcript.lines()


class TestAbortPaths:
    def test_insufficient_sifted_aborts_before_testing(self):
        cfg = ProtocolConfig(
            variant="quartet", n=50, delta=0.5,
            channel=ChannelConfig(loss_probability=0.9),
        )
        report = run_session(cfg, 0).report
        assert report.aborted and report.abort_reason == "insufficient-sifted"
        assert report.test_qber is None
        assert report.final_key_length == 0

    def test_error_rate_abort_under_attack(self):
        cfg = ProtocolConfig(
            variant="quartet", n=100, delta=3.0, error_threshold=0.01,
            attack=AttackConfig(kind="intercept_resend", intercept_policy="random"),
        )
        report = run_session(cfg, 1).report
        assert report.aborted and report.abort_reason == "error-rate"
        assert report.test_qber is not None and report.test_qber > 0.01

    def test_key_exhaustion_abort_at_tiny_n(self):
        cfg = ProtocolConfig(variant="quartet", n=20, delta=0.5, security_margin=64)
        report = run_session(cfg, 2).report
        assert report.aborted and report.abort_reason == "key-exhausted"

    def test_qber_above_threshold_always_aborts(self):
        cfg = ProtocolConfig(
            variant="quartet", n=60, delta=3.0, error_threshold=0.02,
            attack=AttackConfig(kind="pair_guess_usd"),
        )
        for seed in range(5):
            report = run_session(cfg, seed).report
            assert report.aborted
            if report.test_qber is not None:
                assert report.test_qber > 0.02


class TestTranscriptOrdering:
    def test_normal_order_receipt_before_pairing(self):
        result = run_session(ProtocolConfig(n=60, delta=1.0), 3)
        kinds = result.transcript.kinds()
        assert kinds.index("received") < kinds.index("pairing")
        assert kinds[:3] == ["received", "pairing", "verdicts"]
        assert kinds[3:] == ["test_subset", "bit_reveal", "bit_reveal"]

    def test_early_announcement_inverts_first_two(self):
        cfg = ProtocolConfig(n=60, delta=1.0, announce_pairing_early=True)
        kinds = run_session(cfg, 3).transcript.kinds()
        assert kinds.index("pairing") < kinds.index("received")

    def test_aborted_session_ends_with_abort(self):
        cfg = ProtocolConfig(n=50, delta=0.5, channel=ChannelConfig(loss_probability=0.95))
        kinds = run_session(cfg, 0).transcript.kinds()
        assert kinds[-1] == "abort"


class TestEveAccounting:
    def test_usd_total_compromise(self):
        cfg = ProtocolConfig(
            variant="quartet", n=100, delta=6.0, announce_pairing_early=True,
            channel=ChannelConfig(loss_probability=0.5),
            attack=AttackConfig(kind="usd"),
        )
        for seed in range(3):
            result = run_session(cfg, seed)
            report = result.report
            assert not report.aborted
            assert report.test_qber == 0.0 and report.tamper_count == 0
            assert report.effective_attack == "usd"
            assert report.eve_information == report.final_key_length > 0

    def test_usd_fallback_reported(self):
        cfg = ProtocolConfig(
            variant="quartet", n=100, delta=2.0, announce_pairing_early=False,
            attack=AttackConfig(kind="usd"),
        )
        report = run_session(cfg, 0).report
        assert report.requested_attack == "usd"
        assert report.effective_attack == "pair_guess_usd"

    def test_no_attack_reports_zero(self):
        report = run_session(ProtocolConfig(n=60, delta=1.0), 9).report
        assert report.eve_information == 0

    def test_usd_on_trio_variant(self):
        cfg = ProtocolConfig(
            variant="trio", n=80, delta=6.0, announce_pairing_early=True,
            channel=ChannelConfig(loss_probability=0.5),
            attack=AttackConfig(kind="usd"),
        )
        result = run_session(cfg, 4)
        report = result.report
        assert not report.aborted
        assert report.test_qber == 0.0
        assert report.eve_information == report.final_key_length
