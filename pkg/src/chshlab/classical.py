"""Joint distributions over the four binary polarization variables.

A single probability mass function over the 16 outcome quadruples
``(q_a, q_a', q_b, q_b')`` serves every measurement context.  Pair
marginals, correlators and the CHSH combination are all linear functionals
of that one table, which is why the combination can never leave [-2, 2].
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from . import _fmt

NORM_TOL = 1e-9
OR_TOL = 1e-12


class NegativeWeight(ValueError):
    pass


class ZeroTotal(ValueError):
    pass


class ProbabilityOverflow(ValueError):
    pass


class InvalidDistribution(ValueError):
    pass


class OutcomeSign(enum.IntEnum):
    """+1 for the polarization along an analyzer axis, -1 perpendicular to it."""

    PLUS = 1
    MINUS = -1

    @property
    def symbol(self) -> str:
        return "+" if self is OutcomeSign.PLUS else "-"

    @classmethod
    def parse(cls, value: Union[int, str, "OutcomeSign"]) -> "OutcomeSign":
        if isinstance(value, str):
            try:
                return {"+": cls.PLUS, "-": cls.MINUS}[value]
            except KeyError:
                raise ValueError(f"outcome symbol must be '+' or '-', got {value!r}") from None
        return cls(int(value))


PLUS = OutcomeSign.PLUS
MINUS = OutcomeSign.MINUS


class OutcomeQuadruple(NamedTuple):
    q_a: OutcomeSign
    q_a_prime: OutcomeSign
    q_b: OutcomeSign
    q_b_prime: OutcomeSign

    @classmethod
    def of(cls, *signs) -> "OutcomeQuadruple":
        if len(signs) == 1 and not isinstance(signs[0], (int, OutcomeSign)):
            signs = tuple(signs[0])
        if len(signs) != 4:
            raise ValueError(f"a quadruple has exactly four outcomes, got {len(signs)}")
        return cls(*(OutcomeSign.parse(s) for s in signs))

    @property
    def key(self) -> str:
        return "".join(q.symbol for q in self)


# (+,+,+,+), (+,+,+,-), (+,+,-,+), ... , (-,-,-,-)
QUADRUPLES: tuple[OutcomeQuadruple, ...] = tuple(
    OutcomeQuadruple(*s) for s in itertools.product((PLUS, MINUS), repeat=4)
)
_INDEX = {q: i for i, q in enumerate(QUADRUPLES)}
_SIGNS = np.array(QUADRUPLES, dtype=float)  # shape (16, 4)


def quadruple_index(q: Iterable) -> int:
    return _INDEX[OutcomeQuadruple.of(*q)]


class SettingPair(enum.Enum):
    """Which pair of variables is actually measured.

    The value holds the positions of the photon-1 and photon-2 variables
    inside an :class:`OutcomeQuadruple`.
    """

    AB = (0, 2)
    A_PRIME_B = (1, 2)
    AB_PRIME = (0, 3)
    A_PRIME_B_PRIME = (1, 3)

    @property
    def label(self) -> str:
        return _SETTING_LABELS[self]

    @classmethod
    def parse(cls, label: Union[str, "SettingPair"]) -> "SettingPair":
        if isinstance(label, SettingPair):
            return label
        for s, lab in _SETTING_LABELS.items():
            if label in (lab, s.name):
                return s
        raise ValueError(f"unknown setting pair {label!r}")


_SETTING_LABELS = {
    SettingPair.AB: "AB",
    SettingPair.A_PRIME_B: "A'B",
    SettingPair.AB_PRIME: "AB'",
    SettingPair.A_PRIME_B_PRIME: "A'B'",
}

# order used by the CHSH combination and by every report
SETTINGS: tuple[SettingPair, ...] = (
    SettingPair.AB,
    SettingPair.A_PRIME_B,
    SettingPair.AB_PRIME,
    SettingPair.A_PRIME_B_PRIME,
)
CHSH_SIGNS: tuple[int, int, int, int] = (1, 1, -1, 1)

PAIR_OUTCOMES: tuple[tuple[OutcomeSign, OutcomeSign], ...] = (
    (PLUS, PLUS),
    (PLUS, MINUS),
    (MINUS, PLUS),
    (MINUS, MINUS),
)


def _pair_selectors() -> dict[SettingPair, np.ndarray]:
    sel = {}
    for s in SETTINGS:
        i, j = s.value
        m = np.zeros((4, 16))
        for k, q in enumerate(QUADRUPLES):
            m[PAIR_OUTCOMES.index((q[i], q[j])), k] = 1.0
        sel[s] = m
    return sel


# PAIR_SELECTORS[s] @ masses gives (p_pp, p_pm, p_mp, p_mm)
PAIR_SELECTORS = _pair_selectors()
# _PAIR_SLOT[s][k]: which pair outcome quadruple k contributes to
_PAIR_SLOT = {s: tuple(int(np.argmax(m[:, k])) for k in range(16)) for s, m in PAIR_SELECTORS.items()}


@dataclass(frozen=True)
class JointDistribution16:
    """Probability mass over the 16 outcome quadruples, in canonical order."""

    masses: tuple[float, ...]

    def __post_init__(self):
        m = tuple(float(x) for x in self.masses)
        object.__setattr__(self, "masses", m)
        if len(m) != 16:
            raise InvalidDistribution(f"expected 16 masses, got {len(m)}")
        if any(not math.isfinite(x) for x in m):
            raise InvalidDistribution("masses must be finite")
        if min(m) < 0.0 or max(m) > 1.0:
            raise InvalidDistribution("masses must lie in [0, 1]")
        total = math.fsum(m)
        if abs(total - 1.0) > NORM_TOL:
            raise InvalidDistribution(f"masses sum to {total!r}, not 1")

    def mass(self, q: Iterable) -> float:
        return self.masses[quadruple_index(q)]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.masses)

    def mix(self, other: "JointDistribution16", lam: float) -> "JointDistribution16":
        """``lam * self + (1 - lam) * other``."""
        if not 0.0 <= lam <= 1.0:
            raise ValueError("mixing weight must lie in [0, 1]")
        return JointDistribution16(tuple(lam * x + (1.0 - lam) * y for x, y in zip(self.masses, other.masses)))

    def to_dict(self) -> dict[str, float]:
        return {q.key: m for q, m in zip(QUADRUPLES, self.masses)}

    def to_json(self) -> str:
        return _fmt.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "JointDistribution16":
        keys = {q.key for q in QUADRUPLES}
        if set(data) != keys:
            raise InvalidDistribution("JSON joint must have exactly the 16 keys '++++' ... '----'")
        return cls(tuple(float(data[q.key]) for q in QUADRUPLES))

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution16":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PairDistribution:
    setting: SettingPair
    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def __post_init__(self):
        ps = self.probabilities
        if any(not math.isfinite(p) or p < 0.0 for p in ps):
            raise InvalidDistribution(f"pair probabilities must be non-negative: {ps}")
        if abs(math.fsum(ps) - 1.0) > NORM_TOL:
            raise InvalidDistribution(f"pair probabilities sum to {math.fsum(ps)!r}, not 1")

    @property
    def probabilities(self) -> tuple[float, float, float, float]:
        return (self.p_pp, self.p_pm, self.p_mp, self.p_mm)

    def prob(self, q1, q2) -> float:
        return self.probabilities[PAIR_OUTCOMES.index((OutcomeSign.parse(q1), OutcomeSign.parse(q2)))]

    @property
    def correlator(self) -> float:
        return self.p_pp - self.p_pm - self.p_mp + self.p_mm

    def to_dict(self) -> dict:
        return {"setting": self.setting.label, "++": self.p_pp, "+-": self.p_pm, "-+": self.p_mp, "--": self.p_mm}


@dataclass(frozen=True)
class CorrelatorSet:
    e_ab: float
    e_apb: float
    e_abp: float
    e_apbp: float

    def __post_init__(self):
        for e in self.as_tuple():
            if not -1.0 - NORM_TOL <= e <= 1.0 + NORM_TOL:
                raise ValueError(f"correlator {e!r} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e_ab, self.e_apb, self.e_abp, self.e_apbp)

    def signed_sum(self, signs: Sequence[int] = CHSH_SIGNS) -> float:
        return sum(s * e for s, e in zip(signs, self.as_tuple()))

    def to_dict(self) -> dict[str, float]:
        return {lab.label: e for lab, e in zip(SETTINGS, self.as_tuple())}


def joint_from_weights(weights: Union[Mapping, Sequence[float]]) -> JointDistribution16:
    """Normalize 16 non-negative weights into a joint distribution.

    ``weights`` is either a sequence in canonical quadruple order or a mapping
    keyed by quadruples (tuples of signs or strings such as ``"++-+"``);
    missing mapping keys count as zero.
    """
    if isinstance(weights, Mapping):
        w = [0.0] * 16
        for key, val in weights.items():
            q = OutcomeQuadruple.of(key) if isinstance(key, str) else OutcomeQuadruple.of(*key)
            w[_INDEX[q]] = float(val)
    else:
        w = [float(x) for x in weights]
        if len(w) != 16:
            raise ValueError(f"expected 16 weights, got {len(w)}")
    if any(x < 0.0 for x in w):
        raise NegativeWeight("weights must be non-negative")
    total = math.fsum(w)
    if total == 0.0:
        raise ZeroTotal("at least one weight must be positive")
    return JointDistribution16(tuple(x / total for x in w))


def uniform_joint() -> JointDistribution16:
    return JointDistribution16((1.0 / 16,) * 16)


def deterministic_joint(q: Iterable) -> JointDistribution16:
    masses = [0.0] * 16
    masses[quadruple_index(q)] = 1.0
    return JointDistribution16(tuple(masses))


def pair_marginal(d: JointDistribution16, s: SettingPair) -> PairDistribution:
    """Sum the four quadruple masses behind each outcome of the measured pair."""
    acc = [0.0, 0.0, 0.0, 0.0]
    for k, m in zip(_PAIR_SLOT[s], d.masses):
        acc[k] += m
    return PairDistribution(s, *acc)


def single_marginal(d: JointDistribution16, position: int) -> tuple[float, float]:
    """(P(+), P(-)) for the variable at ``position`` of the quadruple."""
    plus = sum(m for q, m in zip(QUADRUPLES, d.masses) if q[position] == PLUS)
    minus = sum(m for q, m in zip(QUADRUPLES, d.masses) if q[position] == MINUS)
    return plus, minus


def correlator(d: JointDistribution16, s: SettingPair) -> float:
    return pair_marginal(d, s).correlator


def correlators(d: JointDistribution16) -> CorrelatorSet:
    # vectorized form of correlator(); the products q_i q_j are fixed per setting
    m = d.array
    return CorrelatorSet(*(float(_SIGNS[:, s.value[0]] * _SIGNS[:, s.value[1]] @ m) for s in SETTINGS))


def chsh(d: JointDistribution16) -> float:
    """E(AB) + E(A'B) - E(AB') + E(A'B')."""
    return (
        correlator(d, SettingPair.AB)
        + correlator(d, SettingPair.A_PRIME_B)
        - correlator(d, SettingPair.AB_PRIME)
        + correlator(d, SettingPair.A_PRIME_B_PRIME)
    )


def chsh_deterministic(q: Iterable) -> int:
    """CHSH value of a point mass, computed in exact integer arithmetic."""
    qa, qap, qb, qbp = (int(x) for x in OutcomeQuadruple.of(*q))
    return qa * qb + qap * qb - qa * qbp + qap * qbp


def max_chsh_deterministic(minimize: bool = False) -> tuple[float, list[OutcomeQuadruple]]:
    """Brute force over all 16 deterministic assignments.

    Returns the extreme CHSH value and every quadruple attaining it; the
    maximum is 2 and the minimum (``minimize=True``) is -2.
    """
    values = [chsh(deterministic_joint(q)) for q in QUADRUPLES]
    best = min(values) if minimize else max(values)
    return best, [q for q, v in zip(QUADRUPLES, values) if v == best]


def kolmogorov_or(p1: float, p2: float) -> float:
    """Probability of either of two mutually exclusive events."""
    if p1 < 0.0 or p2 < 0.0:
        raise ValueError("probabilities must be non-negative")
    if p1 + p2 > 1.0 + OR_TOL:
        raise ProbabilityOverflow(f"{p1!r} + {p2!r} exceeds 1")
    return p1 + p2


def random_joint(seed: int) -> JointDistribution16:
    """Normalized iid uniform(0, 1] weights from a PCG64 stream seeded with ``seed``."""
    rng = np.random.default_rng(seed)
    w = 1.0 - rng.random(16)
    return JointDistribution16(tuple(w / w.sum()))
