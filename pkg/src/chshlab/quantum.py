"""Amplitude calculus for the two-photon polarization state.

Conventions
-----------
* Directions are absolute angles in one plane (radians).  The angle between
  directions ``u`` and ``v`` is ``theta(u, v) = u - v``; only even functions
  of it reach an observable.
* A polarization ket along ``u`` re-expressed in the basis along ``w`` is
  ``|+u> = cos t |+w> + sin t |-w>`` and ``|-u> = -sin t |+w> + cos t |-w>``
  with ``t = u - w``.
* All amplitudes are real.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ._fmt import dumps
from .classical import (
    MINUS,
    PAIR_OUTCOMES,
    PLUS,
    QUADRUPLES,
    SETTINGS,
    CorrelatorSet,
    OutcomeQuadruple,
    OutcomeSign,
    PairDistribution,
    SettingPair,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)
TSIRELSON = 2.0 * math.sqrt(2.0)
KET_NORM_TOL = 1e-12
AMP_TOL = 1e-12


class AmplitudeOverflow(ValueError):
    pass


class InvalidKet(ValueError):
    pass


def theta(u: float, v: float) -> float:
    """Angle from direction ``v`` to direction ``u``."""
    return u - v


@dataclass(frozen=True)
class DirectionConfig:
    """Analyzer orientations a, a' (photon 1) and b, b' (photon 2), in radians."""

    a: float
    a_prime: float
    b: float
    b_prime: float

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"angle {name} must be finite, got {val!r}")
            object.__setattr__(self, name, val)

    @classmethod
    def from_degrees(cls, a, a_prime, b, b_prime) -> "DirectionConfig":
        return cls(*(math.radians(float(x)) for x in (a, a_prime, b, b_prime)))

    @classmethod
    def canonical(cls) -> "DirectionConfig":
        """The standard maximally violating arrangement (0, 45, 22.5, 67.5 degrees)."""
        return cls(0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.a_prime, self.b, self.b_prime)

    def degrees(self) -> tuple[float, float, float, float]:
        return tuple(math.degrees(x) for x in self.as_tuple())

    @property
    def theta_apbp(self) -> float:
        return theta(self.a_prime, self.b_prime)

    @property
    def theta_apa(self) -> float:
        return theta(self.a_prime, self.a)

    @property
    def theta_bpb(self) -> float:
        return theta(self.b_prime, self.b)

    @property
    def theta_ab(self) -> float:
        return theta(self.a, self.b)

    def setting_angle(self, s: SettingPair) -> float:
        """Relative angle between the two analyzers used in setting ``s``."""
        i, j = s.value
        angles = self.as_tuple()
        return theta(angles[i], angles[j])

    def to_dict(self) -> dict[str, float]:
        return {"a": self.a, "a_prime": self.a_prime, "b": self.b, "b_prime": self.b_prime, "unit": "rad"}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "DirectionConfig":
        unit = data.get("unit", "rad")
        vals = [float(data[k]) for k in ("a", "a_prime", "b", "b_prime")]
        if unit == "rad":
            return cls(*vals)
        if unit == "deg":
            return cls.from_degrees(*vals)
        raise ValueError(f"unknown angle unit {unit!r}")

    @classmethod
    def from_json(cls, text: str) -> "DirectionConfig":
        return cls.from_dict(json.loads(text))


def _amp_dict(keys, amps) -> dict:
    # the "im" slot is reserved; amplitudes here are always real
    return {k: {"re": float(x)} for k, x in zip(keys, amps)}


def _amp_from_dict(entry) -> float:
    if isinstance(entry, Mapping):
        if float(entry.get("im", 0.0)) != 0.0:
            raise ValueError("complex amplitudes are not supported")
        return float(entry["re"])
    return float(entry)


@dataclass(frozen=True)
class TwoPhotonKet:
    """Real amplitudes over a product polarization basis.

    ``amp`` is ordered (++, +-, -+, --) where the first sign refers to
    photon 1 in ``basis1`` and the second to photon 2 in ``basis2``.
    """

    basis1: str
    basis2: str
    amp: tuple[float, float, float, float]

    def __post_init__(self):
        amp = tuple(float(x) for x in self.amp)
        if len(amp) != 4:
            raise InvalidKet("a two-photon ket has four amplitudes")
        object.__setattr__(self, "amp", amp)
        norm = math.fsum(x * x for x in amp)
        if abs(norm - 1.0) > KET_NORM_TOL:
            raise InvalidKet(f"squared amplitudes sum to {norm!r}")

    def amplitude(self, q1, q2) -> float:
        return self.amp[PAIR_OUTCOMES.index((OutcomeSign.parse(q1), OutcomeSign.parse(q2)))]

    def to_dict(self) -> dict:
        keys = [p.symbol + q.symbol for p, q in PAIR_OUTCOMES]
        return {"basis1": self.basis1, "basis2": self.basis2, "amplitudes": _amp_dict(keys, self.amp)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "TwoPhotonKet":
        amps = data["amplitudes"]
        keys = [p.symbol + q.symbol for p, q in PAIR_OUTCOMES]
        return cls(data["basis1"], data["basis2"], tuple(_amp_from_dict(amps[k]) for k in keys))


def singlet_ket(theta_apbp: float, basis1: str = "a'", basis2: str = "b'") -> TwoPhotonKet:
    """Two-photon state written in the bases along a' and b'.

    ``theta_apbp`` is the angle a' - b'.
    """
    c, s = math.cos(theta_apbp), math.sin(theta_apbp)
    return TwoPhotonKet(basis1, basis2, (c * INV_SQRT2, s * INV_SQRT2, -s * INV_SQRT2, c * INV_SQRT2))


def rotation_entry(q_old, q_new, t: float) -> float:
    """Coefficient of ``|q_new>`` in the expansion of ``|q_old>`` (old-to-new angle ``t``)."""
    q_old, q_new = OutcomeSign.parse(q_old), OutcomeSign.parse(q_new)
    if q_old == q_new:
        return math.cos(t)
    return math.sin(t) if q_old == PLUS else -math.sin(t)


def rotation_matrix(t: float) -> np.ndarray:
    """R[new, old] in the (+, -) ordering, so that ``amp_new = R @ amp_old``."""
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def rotate_photon_basis(k: TwoPhotonKet, photon: int, t: float, new_label: Optional[str] = None) -> TwoPhotonKet:
    """Re-express photon 1 or 2 of ``k`` in a basis rotated by ``t`` from its current one."""
    if photon not in (1, 2):
        raise ValueError("photon must be 1 or 2")
    m = np.array(k.amp).reshape(2, 2)  # rows: photon 1, columns: photon 2
    r = rotation_matrix(t)
    if photon == 1:
        m = r @ m
        return TwoPhotonKet(new_label or k.basis1 + "*", k.basis2, tuple(m.ravel()))
    m = m @ r.T
    return TwoPhotonKet(k.basis1, new_label or k.basis2 + "*", tuple(m.ravel()))


# per quadruple: 0 for PLUS, 1 for MINUS at each position
_QUAD_BITS = tuple(tuple(0 if x == PLUS else 1 for x in q) for q in QUADRUPLES)


@dataclass(frozen=True)
class BranchAmplitudeTable:
    """The 16 history amplitudes, indexed like :data:`classical.QUADRUPLES`."""

    amp: tuple[float, ...]

    def __post_init__(self):
        amp = tuple(float(x) for x in self.amp)
        if len(amp) != 16:
            raise ValueError("a branch table has 16 amplitudes")
        object.__setattr__(self, "amp", amp)
        norm = math.fsum(x * x for x in amp)
        if abs(norm - 1.0) > KET_NORM_TOL:
            raise ValueError(f"squared branch amplitudes sum to {norm!r}")
        if max(abs(x) for x in amp) > INV_SQRT2 + KET_NORM_TOL:
            raise ValueError("branch amplitude exceeds 1/sqrt(2)")

    def amplitude(self, q) -> float:
        return self.amp[QUADRUPLES.index(OutcomeQuadruple.of(*q))]

    def to_dict(self) -> dict:
        return _amp_dict([q.key for q in QUADRUPLES], self.amp)


def branch_amplitudes(c: DirectionConfig) -> BranchAmplitudeTable:
    """Amplitude of every history (q_a, q_a', q_b, q_b') through both splitter stages.

    Each entry is the initial coefficient of ``(q_a', q_b')`` times the two
    basis-change coefficients ``q_a' -> q_a`` and ``q_b' -> q_b``.
    """
    k = singlet_ket(c.theta_apbp).amp
    r1 = rotation_matrix(c.theta_apa).tolist()  # r[new][old]
    r2 = rotation_matrix(c.theta_bpb).tolist()
    amps = []
    for ia, iap, ib, ibp in _QUAD_BITS:
        amps.append(k[2 * iap + ibp] * r1[ia][iap] * r2[ib][ibp])
    return BranchAmplitudeTable(tuple(amps))


def pair_probability(c: DirectionConfig, q_a, q_b) -> float:
    """Coherent probability of (q_a, q_b): the squared sum over unobserved q_a', q_b'."""
    q_a, q_b = OutcomeSign.parse(q_a), OutcomeSign.parse(q_b)
    table = branch_amplitudes(c)
    total = sum(
        table.amplitude((q_a, qap, q_b, qbp)) for qap, qbp in itertools.product((PLUS, MINUS), repeat=2)
    )
    return total * total


def pair_probability_closed(theta_ab: float, q_a, q_b) -> float:
    q_a, q_b = OutcomeSign.parse(q_a), OutcomeSign.parse(q_b)
    if q_a == q_b:
        return math.cos(theta_ab) ** 2 / 2.0
    return math.sin(theta_ab) ** 2 / 2.0


def quantum_pair_distribution(c: DirectionConfig, s: SettingPair) -> PairDistribution:
    t = c.setting_angle(s)
    return PairDistribution(s, *(pair_probability_closed(t, q1, q2) for q1, q2 in PAIR_OUTCOMES))


def quantum_pair_marginals(c: DirectionConfig) -> list[PairDistribution]:
    return [quantum_pair_distribution(c, s) for s in SETTINGS]


def correlation_quantum(theta_uv: float) -> float:
    """Mean product of the two outcomes for analyzers ``theta_uv`` apart."""
    return math.cos(2.0 * theta_uv)


def quantum_correlators(c: DirectionConfig) -> CorrelatorSet:
    return CorrelatorSet(*(correlation_quantum(c.setting_angle(s)) for s in SETTINGS))


def chsh_quantum(c: DirectionConfig) -> float:
    return (
        correlation_quantum(theta(c.a, c.b))
        + correlation_quantum(theta(c.a_prime, c.b))
        - correlation_quantum(theta(c.a, c.b_prime))
        + correlation_quantum(theta(c.a_prime, c.b_prime))
    )


def amplitude_or(a1: float, a2: float) -> float:
    """Probability of "q1 or q2" when the two alternatives are added as amplitudes."""
    total = a1 + a2
    if abs(total) > 1.0 + AMP_TOL:
        raise AmplitudeOverflow(f"|{a1!r} + {a2!r}| exceeds 1")
    return total * total


def interference_term(a1: float, a2: float) -> float:
    """Cross term by which ``(a1 + a2)**2`` differs from ``a1**2 + a2**2``."""
    # doubling after the product keeps "zero iff a1*a2 == 0" exact under underflow
    return 2.0 * (a1 * a2)


def _chsh_grid(ap: np.ndarray, b: np.ndarray, bp: np.ndarray) -> np.ndarray:
    # a fixed at 0
    return np.cos(2 * (0.0 - b)) + np.cos(2 * (ap - b)) - np.cos(2 * (0.0 - bp)) + np.cos(2 * (ap - bp))


def optimize_chsh(grid_steps: int = 64, refine_iters: int = 40) -> tuple[DirectionConfig, float]:
    """Maximize the quantum CHSH value over analyzer angles.

    ``a`` is pinned to 0.  The remaining three angles are first searched on a
    ``grid_steps``-per-axis grid over [0, pi); the best point (first in
    lexicographic (a', b, b') order on ties) then seeds a coordinate ascent
    whose step starts at one grid cell and halves after every round.
    """
    if grid_steps < 8:
        raise ValueError("grid_steps must be at least 8")
    if refine_iters < 0:
        raise ValueError("refine_iters must be non-negative")
    step = math.pi / grid_steps
    axis = np.arange(grid_steps) * step
    ap, b, bp = np.meshgrid(axis, axis, axis, indexing="ij")
    vals = _chsh_grid(ap, b, bp)
    i, j, k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    x = [float(axis[i]), float(axis[j]), float(axis[k])]

    def f(v):
        return chsh_quantum(DirectionConfig(0.0, v[0], v[1], v[2]))

    best = f(x)
    for _ in range(refine_iters):
        for coord in range(3):
            for direction in (1.0, -1.0):
                trial = list(x)
                trial[coord] += direction * step
                val = f(trial)
                if val > best:
                    x, best = trial, val
                    break
        step /= 2.0
    config = DirectionConfig(0.0, *x)
    return config, chsh_quantum(config)

