import math

import numpy as np
import pytest

from chshlab.analysis import cascade_joint
from chshlab.classical import MINUS, PAIR_OUTCOMES, PLUS, QUADRUPLES, SETTINGS, SettingPair, chsh, pair_marginal
from chshlab.montecarlo import (
    BLOCK_SIZE,
    EmptyCounts,
    EstimateWithError,
    Model,
    TrialCounts,
    derive_seed,
    estimate_chsh,
    estimate_correlator,
    sample_cascade,
    sample_pair_quantum,
)
from chshlab.quantum import TSIRELSON, DirectionConfig, pair_probability_closed

CANON = DirectionConfig.canonical()
N = 10**6


def within(freq, p, n, k=5.0):
    return abs(freq - p) <= k * math.sqrt(p * (1 - p) / n) + 1e-12


def pair_counts(**kw):
    keys = {"pp": (PLUS, PLUS), "pm": (PLUS, MINUS), "mp": (MINUS, PLUS), "mm": (MINUS, MINUS)}
    counts = tuple((o, kw.get(k, 0)) for k, o in keys.items())
    return TrialCounts(sum(kw.values()), counts, SettingPair.AB)


class TestSamplePairQuantum:
    def test_zero_angle(self):
        t = sample_pair_quantum(DirectionConfig(0.3, 0.0, 0.3, 0.0), SettingPair.AB, 50_000, 1)
        assert t.count((PLUS, MINUS)) == 0
        assert t.count((MINUS, PLUS)) == 0
        assert t.count((PLUS, PLUS)) + t.count((MINUS, MINUS)) == 50_000

    def test_frequency(self):
        c = DirectionConfig(0.0, 0.0, math.pi / 8, 0.0)
        t = sample_pair_quantum(c, SettingPair.AB, N, 2024)
        assert within(t.frequency((PLUS, PLUS)), 0.4267766952966369, N)

    def test_deterministic(self):
        a = sample_pair_quantum(CANON, SettingPair.AB_PRIME, 200_001, 9)
        b = sample_pair_quantum(CANON, SettingPair.AB_PRIME, 200_001, 9)
        assert a == b
        assert a != sample_pair_quantum(CANON, SettingPair.AB_PRIME, 200_001, 10)

    def test_worker_count_independent(self):
        n = 3 * BLOCK_SIZE + 17
        seq = sample_pair_quantum(CANON, SettingPair.AB, n, 5, workers=1)
        par = sample_pair_quantum(CANON, SettingPair.AB, n, 5, workers=4)
        assert seq == par

    def test_twenty_random_configs(self):
        rng = np.random.default_rng(77)
        for i, row in enumerate(rng.uniform(-math.pi, math.pi, size=(20, 4))):
            c = DirectionConfig(*row)
            s = SETTINGS[i % 4]
            t = sample_pair_quantum(c, s, N, i)
            for q1, q2 in PAIR_OUTCOMES:
                p = pair_probability_closed(c.setting_angle(s), q1, q2)
                assert within(t.frequency((q1, q2)), p, N)


class TestSampleCascade:
    def test_zero_angles(self):
        t = sample_cascade(DirectionConfig(0, 0, 0, 0), 100_000, 3)
        assert t.count("++++") + t.count("----") == 100_000
        assert within(t.frequency("++++"), 0.5, 100_000)

    def test_canonical_pair(self):
        t = sample_cascade(CANON, N, 11)
        assert within(t.to_pair(SettingPair.AB).frequency((PLUS, PLUS)), 0.25, N)

    def test_deterministic(self):
        assert sample_cascade(CANON, 100_000, 4) == sample_cascade(CANON, 100_000, 4)
        assert sample_cascade(CANON, 100_000, 4, workers=3) == sample_cascade(CANON, 100_000, 4)

    def test_twenty_random_configs(self):
        rng = np.random.default_rng(78)
        for i, row in enumerate(rng.uniform(-math.pi, math.pi, size=(20, 4))):
            c = DirectionConfig(*row)
            t = sample_cascade(c, N, 100 + i)
            d = cascade_joint(c)
            for q in QUADRUPLES:
                assert within(t.frequency(q), d.mass(q), N)

    def test_quadruple_keys(self):
        t = sample_cascade(CANON, 10, 0)
        assert [o for o, _ in t.counts] == list(QUADRUPLES)


class TestEstimateCorrelator:
    def test_all_pp(self):
        e = estimate_correlator(pair_counts(pp=1000))
        assert (e.value, e.stderr, e.n) == (1.0, 0.0, 1000)

    def test_perfect_correlation(self):
        e = estimate_correlator(pair_counts(pp=500, mm=500))
        assert (e.value, e.stderr) == (1.0, 0.0)

    def test_uniform(self):
        e = estimate_correlator(pair_counts(pp=250, pm=250, mp=250, mm=250))
        assert e.value == 0
        assert e.stderr == pytest.approx(1 / math.sqrt(1000), abs=1e-15)
        assert e.stderr == pytest.approx(0.0316, abs=1e-4)

    def test_empty(self):
        with pytest.raises(EmptyCounts):
            estimate_correlator(pair_counts())

    def test_quadruple_needs_setting(self):
        t = sample_cascade(CANON, 1000, 0)
        with pytest.raises(ValueError):
            estimate_correlator(t)
        e = estimate_correlator(t, SettingPair.A_PRIME_B)
        assert abs(e.value) <= 1

    def test_counts_invariant(self):
        with pytest.raises(ValueError):
            TrialCounts(5, (((PLUS, PLUS), 4),))


class TestEstimateChsh:
    def test_quantum(self):
        e = estimate_chsh(CANON, Model.QUANTUM, N, 42)
        assert abs(e.value - TSIRELSON) <= 5 * e.stderr

    def test_cascade(self):
        e = estimate_chsh(CANON, Model.CASCADE, N, 42)
        assert e.value <= 2 + 5 * e.stderr
        assert abs(e.value - chsh(cascade_joint(CANON))) <= 5 * e.stderr

    def test_deterministic(self):
        a = estimate_chsh(CANON, Model.QUANTUM, 100_000, 7)
        assert a == estimate_chsh(CANON, Model.QUANTUM, 100_000, 7)
        assert a == estimate_chsh(CANON, Model.QUANTUM, 100_000, 7, workers=2)

    def test_stderr_rss(self):
        e = estimate_chsh(CANON, Model.QUANTUM, 10_000, 1)
        assert isinstance(e, EstimateWithError)
        assert 0 < e.stderr < 4 / math.sqrt(10_000)
        assert abs(e.value) <= 4


def test_sub_seeds_distinct_and_stable():
    seeds = [derive_seed(42, i) for i in range(4)]
    assert len(set(seeds)) == 4
    assert seeds == [derive_seed(42, i) for i in range(4)]
    assert all(0 <= s < 2**64 for s in seeds)


def test_serialization():
    t = pair_counts(pp=3, mm=1)
    assert t.to_csv() == "outcome,count\r\n++,3\r\n+-,0\r\n-+,0\r\n--,1\r\n"
    assert '"setting": "AB"' in t.to_json()
    e = EstimateWithError(0.5, 0.25, 4)
    assert e.to_json() == '{\n  "n": 4,\n  "stderr": 0.25,\n  "value": 0.5\n}\n'


def test_cascade_marginals_match_joint_exactly_in_expectation():
    # the reduced pair marginal of the cascade joint is what sampling targets
    c = DirectionConfig(0.2, 1.0, -0.4, 0.9)
    t = sample_cascade(c, N, 8)
    for s in SETTINGS:
        target = pair_marginal(cascade_joint(c), s)
        for q1, q2 in PAIR_OUTCOMES:
            assert within(t.to_pair(s).frequency((q1, q2)), target.prob(q1, q2), N)
