"""Named self-checks of the core physical properties.

Each check returns a CheckResult with the worst deviation it saw, so a
failure names the broken property. The checks accept injected states where
that is useful for fault-injection tests; by default they verify the
canonical codewords. run_all() drives everything from one embedded seed so
the verification is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import codewords as cw
from .decoder import BasisChoice, classify_quartet, classify_trio
from .qmath import (
    ATOL,
    ATOL_ACCUM,
    IDENTITY,
    StateVector,
    apply_collective,
    bit_string,
    haar_su2,
    outcome_distribution,
    overlap,
    trace_distance,
    weight,
)

EMBEDDED_SEED = 20260131

QUARTET_PAIRS = ((1, 2), (2, 3), (3, 1))
TRIO_PAIRS = ((1, 2), (2, 3), (3, 1))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _quartets(states: Sequence[StateVector] | None) -> list[StateVector]:
    return list(states) if states is not None else [cw.quartet_state(i) for i in (1, 2, 3)]


def check_overlap(states: Sequence[StateVector] | None = None) -> CheckResult:
    """All distinct codeword overlaps have magnitude 1/2; norms are 1."""
    q = _quartets(states)
    worst = 0.0
    for i in range(3):
        worst = max(worst, abs(abs(overlap(q[i], q[i])) - 1.0))
        for j in range(i + 1, 3):
            worst = max(worst, abs(abs(overlap(q[i], q[j])) - 0.5))
    return CheckResult("overlap-identity", worst <= ATOL, f"max deviation {worst:.3e}")


def check_quartet_invariance(rng: np.random.Generator, trials: int = 1000,
                             states: Sequence[StateVector] | None = None) -> CheckResult:
    """Collective rotations leave every quartet codeword fixed up to phase."""
    q = _quartets(states)
    worst = 0.0
    for _ in range(trials):
        u = haar_su2(rng)
        for state in q:
            worst = max(worst, abs(abs(overlap(state, apply_collective(u, state))) - 1.0))
    return CheckResult("quartet-collective-invariance", worst <= ATOL_ACCUM,
                       f"max fidelity deviation {worst:.3e} over {trials} rotations")


def check_trio_invariance(rng: np.random.Generator, trials: int = 1000) -> CheckResult:
    """Collective rotations leave every trio codeword fixed as a matrix."""
    trios = [cw.trio_state(i) for i in (1, 2, 3)]
    worst = 0.0
    for _ in range(trials):
        u = haar_su2(rng)
        for state in trios:
            worst = max(worst, trace_distance(state, apply_collective(u, state)))
    return CheckResult("trio-collective-invariance", worst <= ATOL_ACCUM,
                       f"max trace distance {worst:.3e} over {trials} rotations")


def check_weight_support(rng: np.random.Generator, bases: int = 50) -> CheckResult:
    """Quartet outcomes put zero probability outside weight-2 strings."""
    worst = 0.0
    units = [IDENTITY, BasisChoice.diagonal().as_unitary] + [haar_su2(rng) for _ in range(bases)]
    for u in units:
        for i in (1, 2, 3):
            for outcome, p in outcome_distribution(cw.quartet_state(i), u).items():
                if weight(outcome) != 2:
                    worst = max(worst, p)
    return CheckResult("quartet-weight-support", worst < ATOL,
                       f"max illegal-outcome probability {worst:.3e}")


def check_trio_forbidden(rng: np.random.Generator, bases: int = 50) -> CheckResult:
    """Trio outcomes put zero probability on the all-equal strings."""
    worst = 0.0
    units = [IDENTITY, BasisChoice.diagonal().as_unitary] + [haar_su2(rng) for _ in range(bases)]
    for u in units:
        for i in (1, 2, 3):
            dist = outcome_distribution(cw.trio_state(i), u)
            worst = max(worst, dist["000"], dist["111"])
    return CheckResult("trio-forbidden-outcomes", worst < ATOL,
                       f"max all-equal probability {worst:.3e}")


def check_conclusive_rates() -> CheckResult:
    """Exact conclusive probability is 1/2 for every pair, bit, and protocol."""
    worst = 0.0
    for pair in QUARTET_PAIRS:
        for bit in (0, 1):
            dist = outcome_distribution(cw.quartet_state(pair[bit]), IDENTITY)
            rate = sum(p for o, p in dist.items() if classify_quartet(o, pair).is_conclusive)
            worst = max(worst, abs(rate - 0.5))
    for pair in TRIO_PAIRS:
        for bit in (0, 1):
            dist = outcome_distribution(cw.trio_state(pair[bit]), IDENTITY)
            rate = sum(p for o, p in dist.items() if classify_trio(o, pair).is_conclusive)
            worst = max(worst, abs(rate - 0.5))
    return CheckResult("conclusive-rate", worst <= ATOL, f"max deviation from 1/2: {worst:.3e}")


def check_soundness() -> CheckResult:
    """A conclusive verdict excludes a codeword of exactly zero probability."""
    worst = 0.0
    bases = [IDENTITY, BasisChoice.diagonal().as_unitary]
    for pair in QUARTET_PAIRS:
        dists = {k: [outcome_distribution(cw.quartet_state(k), u) for u in bases] for k in pair}
        for index in range(16):
            outcome = bit_string(index, 4)
            verdict = classify_quartet(outcome, pair)
            if verdict.is_conclusive:
                excluded = pair[1 - verdict.bit]
                worst = max(worst, *(d[outcome] for d in dists[excluded]))
    for pair in TRIO_PAIRS:
        dists = {k: [outcome_distribution(cw.trio_state(k), u) for u in bases] for k in pair}
        for index in range(8):
            outcome = bit_string(index, 3)
            verdict = classify_trio(outcome, pair)
            if verdict.is_conclusive:
                excluded = pair[1 - verdict.bit]
                worst = max(worst, *(d[outcome] for d in dists[excluded]))
    return CheckResult("discrimination-soundness", worst < ATOL,
                       f"max excluded-codeword probability {worst:.3e}")


def check_discard_equivalence() -> CheckResult:
    """Dropping any photon of any quartet reproduces the matching trio state."""
    worst = 0.0
    for i in (1, 2, 3):
        for discarded in (1, 2, 3, 4):
            reduced, trio_index = cw.discard_photon(i, discarded)
            worst = max(worst, trace_distance(reduced, cw.trio_state(trio_index)))
    return CheckResult("discard-equivalence", worst <= ATOL, f"max trace distance {worst:.3e}")


def check_span_projector(rng: np.random.Generator, trials: int = 1000) -> CheckResult:
    """The 2-dim codeword span commutes with every collective rotation
    and contains the third codeword."""
    q1, q2, q3 = (cw.quartet_state(i) for i in (1, 2, 3))
    residual = np.abs(q3.amplitudes - (q1.amplitudes - q2.amplitudes)).max()
    e1 = q1.amplitudes
    e2 = q2.amplitudes - overlap(q1, q2) * e1
    e2 = e2 / np.linalg.norm(e2)
    projector = np.outer(e1, e1.conj()) + np.outer(e2, e2.conj())
    worst = residual
    for _ in range(trials):
        u = haar_su2(rng)
        big = np.eye(1, dtype=complex)
        for _ in range(4):
            big = np.kron(big, u.matrix)
        worst = max(worst, np.abs(projector @ big - big @ projector).max())
    return CheckResult("codeword-span-invariance", worst <= ATOL_ACCUM,
                       f"max commutator entry {worst:.3e} over {trials} rotations")


def run_all(seed: int = EMBEDDED_SEED) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks: list[Callable[[], CheckResult]] = [
        check_overlap,
        lambda: check_quartet_invariance(rng),
        lambda: check_trio_invariance(rng),
        lambda: check_weight_support(rng),
        lambda: check_trio_forbidden(rng),
        check_conclusive_rates,
        check_soundness,
        check_discard_equivalence,
        lambda: check_span_projector(rng),
    ]
    return [check() for check in checks]
