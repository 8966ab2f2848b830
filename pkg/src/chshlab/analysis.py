"""Where the Kolmogorov model and the amplitude calculus part ways.

Two lines of evidence live here.  The *cascade* model assigns each
four-outcome history its squared amplitude (a product of Malus-law
transmission factors) and so is an honest joint distribution; its pair
probabilities miss the interference cross terms.  The feasibility check asks
the stronger question of whether *any* joint distribution reproduces a
given set of four pair marginals.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from . import _fmt
from .classical import (
    CHSH_SIGNS,
    PAIR_SELECTORS,
    SETTINGS,
    CorrelatorSet,
    JointDistribution16,
    OutcomeSign,
    PairDistribution,
    SettingPair,
    joint_from_weights,
    kolmogorov_or,
    pair_marginal,
)
from .quantum import DirectionConfig, amplitude_or, branch_amplitudes, interference_term, pair_probability
from .simplex import PIVOT_TOL, phase1

SCREEN_TOL = 1e-9
RESIDUAL_TOL = 1e-7
WITNESS_TOL = 1e-7


class MalformedTargets(ValueError):
    pass


class Status(enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


class CertificateKind(enum.Enum):
    CHSH_SIGN_PATTERN = "ChshSignPattern"
    SOLVER_PHASE1 = "SolverPhase1"


# The eight sign vectors with an odd number of minus signs.  The paper's
# (+, +, -, +) comes first so that it wins ties.
SIGN_PATTERNS: tuple[tuple[int, int, int, int], ...] = (CHSH_SIGNS,) + tuple(
    p for p in itertools.product((1, -1), repeat=4) if math.prod(p) == -1 and p != CHSH_SIGNS
)


def pattern_str(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in signs)


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    sign_pattern: Optional[tuple[int, int, int, int]] = None
    violation: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "sign_pattern": pattern_str(self.sign_pattern) if self.sign_pattern else None,
            "violation": self.violation,
        }


@dataclass(frozen=True)
class FeasibilityResult:
    status: Status
    witness: Optional[JointDistribution16] = None
    certificate: Optional[Certificate] = None

    def __post_init__(self):
        if (self.status is Status.FEASIBLE) != (self.witness is not None):
            raise ValueError("a witness is present exactly when the result is feasible")

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    def to_dict(self) -> dict:
        cert = self.certificate.to_dict() if self.certificate else None
        return {
            "status": self.status.value,
            "witness": self.witness.to_dict() if self.witness else None,
            "certificate": cert,
        }

    def to_json(self) -> str:
        return _fmt.dumps(self.to_dict())


@dataclass(frozen=True)
class DiscrepancyReport:
    config: DirectionConfig
    q_a: OutcomeSign
    q_b: OutcomeSign
    quantum_p: float
    cascade_p: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "outcome": self.q_a.symbol + self.q_b.symbol,
            "quantum_p": self.quantum_p,
            "cascade_p": self.cascade_p,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class OrComparison:
    kolmogorov: float
    quantum: float
    interference: float


def cascade_joint(c: DirectionConfig) -> JointDistribution16:
    """Joint distribution whose mass on each history is its squared branch amplitude."""
    return JointDistribution16(tuple(x * x for x in branch_amplitudes(c).amp))


def discrepancy(c: DirectionConfig, q_a, q_b) -> DiscrepancyReport:
    q_a, q_b = OutcomeSign.parse(q_a), OutcomeSign.parse(q_b)
    quantum_p = pair_probability(c, q_a, q_b)
    cascade_p = pair_marginal(cascade_joint(c), SettingPair.AB).prob(q_a, q_b)
    return DiscrepancyReport(c, q_a, q_b, quantum_p, cascade_p, quantum_p - cascade_p)


def kolmogorov_vs_quantum_or(a1: float, a2: float) -> OrComparison:
    """Compare adding probabilities with adding amplitudes for two alternatives."""
    k = kolmogorov_or(a1 * a1, a2 * a2)
    q = amplitude_or(a1, a2)
    # the cross term is formed directly; q - k would round small products to 0
    return OrComparison(kolmogorov=k, quantum=q, interference=interference_term(a1, a2))


def _normalize_targets(
    targets: Union[Mapping[SettingPair, PairDistribution], Iterable[PairDistribution]],
) -> dict[SettingPair, PairDistribution]:
    items = list(targets.values()) if isinstance(targets, Mapping) else list(targets)
    by_setting: dict[SettingPair, PairDistribution] = {}
    for t in items:
        if not isinstance(t, PairDistribution):
            raise MalformedTargets(f"expected PairDistribution, got {type(t).__name__}")
        if t.setting in by_setting:
            raise MalformedTargets(f"setting {t.setting.label} given more than once")
        by_setting[t.setting] = t
    missing = [s.label for s in SETTINGS if s not in by_setting]
    if missing:
        raise MalformedTargets(f"missing settings: {', '.join(missing)}")
    return by_setting


def chsh_screen(corr: CorrelatorSet) -> tuple[tuple[int, int, int, int], float]:
    """Most violated CHSH sign pattern, oriented so its signed sum is non-negative.

    The signed sum of the returned pattern equals the largest ``|signed sum|``
    over all eight patterns; the first pattern in :data:`SIGN_PATTERNS`
    wins ties.
    """
    best_pattern, best_value = SIGN_PATTERNS[0], -math.inf
    for p in SIGN_PATTERNS:
        v = corr.signed_sum(p)
        if abs(v) > best_value + 1e-15:
            best_pattern, best_value = (p if v >= 0 else tuple(-s for s in p)), abs(v)
    return best_pattern, best_value


def marginal_constraints(by_setting: Mapping[SettingPair, PairDistribution]) -> tuple[np.ndarray, np.ndarray]:
    """Equality system ``A m = b`` over the 16 joint masses (16 marginal rows + normalization)."""
    A = np.vstack([PAIR_SELECTORS[s] for s in SETTINGS] + [np.ones((1, 16))])
    b = np.concatenate([np.array(by_setting[s].probabilities) for s in SETTINGS] + [np.ones(1)])
    return A, b


def marginal_match_feasibility(targets) -> FeasibilityResult:
    """Decide whether some joint distribution has exactly these four pair marginals."""
    by_setting = _normalize_targets(targets)
    corr = CorrelatorSet(*(by_setting[s].correlator for s in SETTINGS))
    pattern, value = chsh_screen(corr)
    if value > 2.0 + SCREEN_TOL:
        return FeasibilityResult(
            Status.INFEASIBLE,
            certificate=Certificate(CertificateKind.CHSH_SIGN_PATTERN, pattern, value),
        )

    A, b = marginal_constraints(by_setting)
    sol = phase1(A, b, tol=PIVOT_TOL)
    if sol.residual > RESIDUAL_TOL:
        return FeasibilityResult(
            Status.INFEASIBLE,
            certificate=Certificate(CertificateKind.SOLVER_PHASE1, violation=sol.residual),
        )
    witness = joint_from_weights(np.clip(sol.x, 0.0, None))
    err = max_marginal_error(witness, by_setting)
    if err > WITNESS_TOL:
        return FeasibilityResult(
            Status.INFEASIBLE,
            certificate=Certificate(CertificateKind.SOLVER_PHASE1, violation=err),
        )
    return FeasibilityResult(Status.FEASIBLE, witness=witness)


def max_marginal_error(d: JointDistribution16, targets) -> float:
    by_setting = _normalize_targets(targets)
    return max(
        abs(x - y)
        for s in SETTINGS
        for x, y in zip(pair_marginal(d, s).probabilities, by_setting[s].probabilities)
    )


def joint_marginals(d: JointDistribution16) -> list[PairDistribution]:
    return [pair_marginal(d, s) for s in SETTINGS]

