"""Normalized threat scores and the base transition weights derived from them.

External assessments arrive either as CVSS base scores (0..10) or as
likelihood/severity cells of the standard 5x5 risk matrix. Both are mapped
onto a single [0, 1] scale that drives the base probability of a forced
fallback one layer down, and base costs are charged in proportion to the
utility lost by a transition.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigurationError, ValidationError


class ThreatSource(Enum):
    CVSS = "cvss"
    NASA_MATRIX = "nasa_matrix"
    DIRECT = "direct"


@dataclass(frozen=True)
class ThreatScore:
    """Normalized threat score in [0, 1] plus the assessment it came from."""

    value: float
    source: ThreatSource = ThreatSource.DIRECT

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(
                f"threat score must lie in [0, 1], got {self.value}"
            )


@dataclass(frozen=True)
class RiskMatrixBin:
    """One cell of the 5x5 likelihood/severity risk matrix."""

    likelihood: int
    severity: int

    def __post_init__(self):
        for name, level in (("likelihood", self.likelihood), ("severity", self.severity)):
            if not isinstance(level, int) or isinstance(level, bool) or not 1 <= level <= 5:
                raise ValidationError(
                    f"{name} level must be an integer in 1..5, got {level!r}"
                )


def normalize_cvss(score: float) -> ThreatScore:
    """Map a CVSS base score onto the normalized [0, 1] scale."""
    if not 0.0 <= score <= 10.0:
        raise ValidationError(f"CVSS base score must lie in [0, 10], got {score}")
    return ThreatScore(score / 10.0, ThreatSource.CVSS)


def nasa_lookup(cell: RiskMatrixBin) -> ThreatScore:
    """Score a risk-matrix cell as likelihood * severity over the 5x5 maximum."""
    return ThreatScore(cell.likelihood * cell.severity / 25.0, ThreatSource.NASA_MATRIX)


def base_transition_probability(score: ThreatScore, max_fallback_prob: float) -> float:
    """Base probability of a forced fallback to the next layer down.

    Scales linearly with the threat score; ``max_fallback_prob`` caps the
    worst-case rate and must lie strictly inside (0, 1).
    """
    if not 0.0 < max_fallback_prob < 1.0:
        raise ConfigurationError(
            f"max_fallback_prob must lie in (0, 1), got {max_fallback_prob}"
        )
    return score.value * max_fallback_prob


def base_cost(utility_from: float, utility_to: float, cost_scale: float) -> float:
    """Base cost of a transition, proportional to the utility it gives up.

    Utility-gaining (recovery) transitions are not free; they carry an
    explicit recovery cost configured per scenario instead of the value
    computed here, so a fallen system cannot climb back at zero cost.
    """
    for name, u in (("utility_from", utility_from), ("utility_to", utility_to)):
        if not 0.0 <= u <= 1.0:
            raise ValidationError(f"{name} must lie in [0, 1], got {u}")
    if cost_scale <= 0.0:
        raise ConfigurationError(f"cost_scale must be positive, got {cost_scale}")
    return cost_scale * max(0.0, utility_from - utility_to)
