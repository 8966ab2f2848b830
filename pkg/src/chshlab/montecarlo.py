"""Seeded sampling of both models and the matching estimators.

Random numbers come from numpy's PCG64.  A sampling call splits its trials
into fixed blocks of ``BLOCK_SIZE``; block ``k`` of a call with seed ``s``
draws from ``PCG64(SeedSequence([s, k]))``.  Counts therefore depend only on
(inputs, seed), never on how many workers processed the blocks.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _fmt
from .classical import (
    CHSH_SIGNS,
    PAIR_OUTCOMES,
    QUADRUPLES,
    SETTINGS,
    OutcomeSign,
    SettingPair,
)
from .quantum import DirectionConfig, pair_probability_closed

BLOCK_SIZE = 1 << 16


class EmptyCounts(ValueError):
    pass


class Model(enum.Enum):
    QUANTUM = "quantum"
    CASCADE = "cascade"


def _key(outcome) -> str:
    return "".join(OutcomeSign(q).symbol for q in outcome)


@dataclass(frozen=True)
class TrialCounts:
    """Outcome counts from ``n`` trials.

    ``counts`` lists every possible outcome (pairs or quadruples, in canonical
    order) with its count, zeros included.  Pair counts remember the setting
    they were measured in.
    """

    n: int
    counts: tuple[tuple[tuple[OutcomeSign, ...], int], ...]
    setting: Optional[SettingPair] = None

    def __post_init__(self):
        if any(c < 0 for _, c in self.counts):
            raise ValueError("counts must be non-negative")
        if sum(c for _, c in self.counts) != self.n:
            raise ValueError("counts must sum to n")

    @property
    def is_pair(self) -> bool:
        return len(self.counts[0][0]) == 2

    def count(self, outcome) -> int:
        outcome = tuple(OutcomeSign.parse(q) for q in outcome)
        for o, c in self.counts:
            if o == outcome:
                return c
        raise KeyError(outcome)

    def frequency(self, outcome) -> float:
        return self.count(outcome) / self.n

    def to_pair(self, s: SettingPair) -> "TrialCounts":
        """Reduce quadruple counts to the pair of variables measured in ``s``."""
        if self.is_pair:
            if self.setting not in (None, s):
                raise ValueError(f"counts were taken in {self.setting.label}, not {s.label}")
            return self
        i, j = s.value
        acc = dict.fromkeys(PAIR_OUTCOMES, 0)
        for q, c in self.counts:
            acc[(q[i], q[j])] += c
        return TrialCounts(self.n, tuple(acc.items()), s)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "setting": self.setting.label if self.setting else None,
            "counts": {_key(o): c for o, c in self.counts},
        }

    def to_json(self) -> str:
        return _fmt.dumps(self.to_dict())

    def to_csv(self) -> str:
        return _fmt.to_csv(["outcome", "count"], ((_key(o), c) for o, c in self.counts))


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    stderr: float
    n: int

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "n": self.n}

    def to_json(self) -> str:
        return _fmt.dumps(self.to_dict())


def derive_seed(seed: int, stream: int) -> int:
    """64-bit child seed for sub-stream ``stream`` of ``seed``."""
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, np.uint64)[0])


def _run_blocks(
    n: int, seed: int, draw: Callable[[np.random.Generator, int], np.ndarray], n_outcomes: int, workers: int
) -> np.ndarray:
    """Sum per-block outcome histograms; ``draw`` returns outcome indices."""
    if n < 1:
        raise ValueError("n must be at least 1")
    sizes = [BLOCK_SIZE] * (n // BLOCK_SIZE)
    if n % BLOCK_SIZE:
        sizes.append(n % BLOCK_SIZE)

    def one(k: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k])))
        return np.bincount(draw(rng, sizes[k]), minlength=n_outcomes)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hists = list(pool.map(one, range(len(sizes))))
    else:
        hists = [one(k) for k in range(len(sizes))]
    # integer addition is exact, so the order of reduction cannot matter
    return np.sum(hists, axis=0)


def _categorical(probs) -> Callable[[np.random.Generator, int], np.ndarray]:
    cum = np.cumsum(probs)
    cum[-1] = 1.0

    def draw(rng, size):
        return np.searchsorted(cum, rng.random(size), side="right")

    return draw


def sample_pair_quantum(
    c: DirectionConfig, s: SettingPair, n: int, seed: int, workers: int = 1
) -> TrialCounts:
    """Draw ``n`` outcome pairs for setting ``s`` from the coherent pair distribution."""
    t = c.setting_angle(s)
    probs = [pair_probability_closed(t, q1, q2) for q1, q2 in PAIR_OUTCOMES]
    hist = _run_blocks(n, seed, _categorical(probs), 4, workers)
    return TrialCounts(n, tuple((o, int(h)) for o, h in zip(PAIR_OUTCOMES, hist)), s)


def sample_cascade(c: DirectionConfig, n: int, seed: int, workers: int = 1) -> TrialCounts:
    """Simulate ``n`` photon pairs through the two-stage splitter cascade.

    Per trial: (q_a', q_b') from the squared initial coefficients, then photon 1
    keeps its sign at the second splitter with probability cos^2(a' - a) and
    photon 2 with probability cos^2(b' - b).
    """
    t0 = c.theta_apbp
    first = _categorical([math.cos(t0) ** 2 / 2, math.sin(t0) ** 2 / 2, math.sin(t0) ** 2 / 2, math.cos(t0) ** 2 / 2])
    flip_a = math.sin(c.theta_apa) ** 2
    flip_b = math.sin(c.theta_bpb) ** 2
    # pair index -> (q_a' is minus, q_b' is minus)
    pair_bits = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])

    def draw(rng, size):
        stage1 = pair_bits[first(rng, size)]
        u = rng.random((size, 2))
        qa = stage1[:, 0] ^ (u[:, 0] < flip_a)
        qb = stage1[:, 1] ^ (u[:, 1] < flip_b)
        # canonical quadruple index: bits (q_a, q_a', q_b, q_b'), minus = 1
        return (qa << 3) | (stage1[:, 0] << 2) | (qb << 1) | stage1[:, 1]

    hist = _run_blocks(n, seed, draw, 16, workers)
    return TrialCounts(n, tuple((tuple(q), int(h)) for q, h in zip(QUADRUPLES, hist)))


def estimate_correlator(t: TrialCounts, s: Optional[SettingPair] = None) -> EstimateWithError:
    """Sample mean of q1*q2 with its binomial standard error."""
    if t.n == 0:
        raise EmptyCounts("no trials")
    if not t.is_pair:
        if s is None:
            raise ValueError("quadruple counts need a setting to reduce to")
        t = t.to_pair(s)
    value = sum(int(q1) * int(q2) * c for (q1, q2), c in t.counts) / t.n
    stderr = math.sqrt(max(0.0, 1.0 - value * value) / t.n)
    return EstimateWithError(value, stderr, t.n)


def simulate_settings(
    c: DirectionConfig, model: Model, n_per_setting: int, seed: int, workers: int = 1
) -> list[TrialCounts]:
    """Raw counts for each of the four settings, one sub-seed per setting."""
    model = Model(model)
    out = []
    for idx, s in enumerate(SETTINGS):
        sub = derive_seed(seed, idx)
        if model is Model.QUANTUM:
            out.append(sample_pair_quantum(c, s, n_per_setting, sub, workers))
        else:
            out.append(sample_cascade(c, n_per_setting, sub, workers))
    return out


def chsh_from_counts(runs: list[TrialCounts]) -> tuple[EstimateWithError, list[EstimateWithError]]:
    parts = [estimate_correlator(t, s) for t, s in zip(runs, SETTINGS)]
    value = sum(sign * p.value for sign, p in zip(CHSH_SIGNS, parts))
    stderr = math.sqrt(sum(p.stderr**2 for p in parts))
    return EstimateWithError(value, stderr, sum(p.n for p in parts)), parts


def estimate_chsh(
    c: DirectionConfig, model: Model, n_per_setting: int, seed: int, workers: int = 1
) -> EstimateWithError:
    return chsh_from_counts(simulate_settings(c, model, n_per_setting, seed, workers))[0]
