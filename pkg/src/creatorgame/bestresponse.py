"""Best-response search over structured deviation sets and ε-Nash certification.

Candidate profiles are checked by exact evaluation: for each producer and each
deviation in a declared set, the exact utility gain of the unilateral move is
computed, and the certificate records the worst case. Punishment permanence
collapses the interesting deviations against punishing policies to "comply
until round s, then stop" plus single-round content replacements, which the
deviation families below cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, GameConfig, StrategyProfile
from .policies import PlatformPolicy
from .simulator import exact_eval_fullinfo
from .welfare import min_norm_meet

EPSILON_NASH = "epsilon_nash"
REFUTED = "refuted"

__all__ = [
    "EPSILON_NASH",
    "REFUTED",
    "BestResponseResult",
    "DeviationSet",
    "NashCertificate",
    "best_response_defect",
    "candidate_row",
    "candidate_profile",
    "defect_row",
    "deviation_gain",
    "punishment_premise",
    "punishuserutility_candidate",
    "verify_epsilon_nash",
]


def _direction(config: GameConfig, g) -> np.ndarray:
    if g is None:
        if config.dimension != 1:
            raise ConfigError("a direction criterion is required when dimension > 1")
        return np.ones(1)
    g = np.asarray(g, dtype=float)
    if g.shape != (config.dimension,):
        raise ConfigError("direction has the wrong dimension")
    return g


def candidate_row(config: GameConfig, q: float, g=None) -> np.ndarray:
    """Comply at threshold effort every round except the last: q*g then 0."""
    g = _direction(config, g)
    row = np.tile(q * g, (config.horizon, 1))
    row[-1] = 0.0
    return row


def candidate_profile(config: GameConfig, q: float, g=None) -> StrategyProfile:
    return StrategyProfile.symmetric(config, candidate_row(config, q, g))


def defect_row(config: GameConfig, q: float, s: int, g=None) -> np.ndarray:
    """Comply through round s-1, then play zero forever (s in 1..T+1)."""
    g = _direction(config, g)
    row = np.tile(q * g, (config.horizon, 1))
    row[s - 1 :] = 0.0
    return row


@dataclass(frozen=True, eq=False)
class DeviationSet:
    """A named family of unilateral strategy deviations.

    kinds: ``zero_one_round`` zeroes the base row at each single round;
    ``defect_at_s`` yields the comply-at-threshold-then-stop family (T+1
    rows); ``stop_at_s`` plays the base row through round s-1 and zero
    afterwards; ``norm_grid`` replaces each round's content with every
    norm-times-direction combination from the given grids; ``custom`` is an
    explicit list.
    """

    kind: str
    q: float | None = None
    g: np.ndarray | None = None
    norms: tuple = ()
    directions: tuple = ()
    rows_: tuple = ()

    @classmethod
    def zero_one_round(cls) -> "DeviationSet":
        return cls(kind="zero_one_round")

    @classmethod
    def defect_at_s(cls, q: float, g=None) -> "DeviationSet":
        return cls(kind="defect_at_s", q=q, g=None if g is None else np.asarray(g, dtype=float))

    @classmethod
    def stop_at_s(cls) -> "DeviationSet":
        return cls(kind="stop_at_s")

    @classmethod
    def norm_grid(cls, norms, directions) -> "DeviationSet":
        dirs = tuple(np.asarray(d, dtype=float) for d in directions)
        return cls(kind="norm_grid", norms=tuple(float(r) for r in norms), directions=dirs)

    @classmethod
    def custom(cls, rows) -> "DeviationSet":
        return cls(kind="custom", rows_=tuple((label, np.asarray(r, dtype=float)) for label, r in rows))

    def rows(self, config: GameConfig, base_row: np.ndarray):
        T = config.horizon
        if self.kind == "zero_one_round":
            for s in range(1, T + 1):
                row = np.array(base_row)
                row[s - 1] = 0.0
                yield f"zero[s={s}]", row
        elif self.kind == "defect_at_s":
            for s in range(1, T + 2):
                yield f"defect[s={s}]", defect_row(config, self.q, s, self.g)
        elif self.kind == "stop_at_s":
            for s in range(1, T + 1):
                row = np.array(base_row)
                row[s - 1 :] = 0.0
                yield f"stop[s={s}]", row
        elif self.kind == "norm_grid":
            for s in range(1, T + 1):
                for r in self.norms:
                    for k, d in enumerate(self.directions):
                        row = np.array(base_row)
                        row[s - 1] = r * d
                        yield f"grid[s={s},r={r:.6g},d={k}]", row
        elif self.kind == "custom":
            for label, row in self.rows_:
                yield label, np.array(row)
        else:
            raise ConfigError(f"unknown deviation kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class NashCertificate:
    """Outcome of exact deviation checking for one profile."""

    verdict: str  # EPSILON_NASH or REFUTED
    epsilon: float
    max_gain: float
    per_producer_gain: np.ndarray  # (P,)
    witness_producer: int | None
    witness_label: str | None
    witness_row: np.ndarray | None
    deviations_checked: int
    premise: dict = field(default_factory=dict)


def deviation_gain(config: GameConfig, policy: PlatformPolicy, profile: StrategyProfile,
                   j: int, row: np.ndarray) -> float:
    """Exact utility gain for producer j of swapping its sequence for ``row``."""
    base = exact_eval_fullinfo(config, policy, profile).utilities[j]
    dev = exact_eval_fullinfo(config, policy, profile.with_row(j, row)).utilities[j]
    return float(dev - base)


def punishment_premise(config: GameConfig, q: float) -> dict:
    """Margin condition under which one-shot overshoots are provably wasteful:
    (1-gamma) * eta * beta / (1-beta) < c * q^(c-1), reported per certificate.
    """
    eta = max(config.learning_rates)
    lhs = (1.0 - config.exploration) * eta * config.discount / (1.0 - config.discount)
    rhs = config.cost_exponent * q ** (config.cost_exponent - 1.0)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs < rhs)}


def verify_epsilon_nash(config: GameConfig, policy: PlatformPolicy,
                        profile: StrategyProfile, deviation_sets, epsilon: float = 1e-9,
                        producers=None) -> NashCertificate:
    """Exact ε-Nash check of ``profile`` against declared deviation families.

    Every deviation is evaluated for every producer (unilateral move, all
    else fixed); the certificate is REFUTED with a witness as soon as any
    exact gain exceeds ε. Witness gains are reproducible via
    :func:`deviation_gain`.
    """
    if isinstance(deviation_sets, DeviationSet):
        deviation_sets = [deviation_sets]
    producers = list(range(config.producers)) if producers is None else list(producers)
    per_gain = np.full(config.producers, -np.inf)
    witness = (None, None, None)
    max_gain = -np.inf
    checked = 0
    for j in producers:
        base = exact_eval_fullinfo(config, policy, profile).utilities[j]
        for devset in deviation_sets:
            for label, row in devset.rows(config, profile.row(j)):
                gain = float(
                    exact_eval_fullinfo(config, policy, profile.with_row(j, row)).utilities[j]
                    - base
                )
                checked += 1
                per_gain[j] = max(per_gain[j], gain)
                if gain > max_gain:
                    max_gain = gain
                    witness = (j, label, row)
    max_gain = float(max_gain)
    premise = punishment_premise(config, policy.q) if hasattr(policy, "q") else {}
    refuted = max_gain > epsilon
    return NashCertificate(
        verdict=REFUTED if refuted else EPSILON_NASH,
        epsilon=epsilon,
        max_gain=max_gain,
        per_producer_gain=per_gain,
        witness_producer=witness[0] if refuted else None,
        witness_label=witness[1] if refuted else None,
        witness_row=witness[2] if refuted else None,
        deviations_checked=checked,
        premise=premise,
    )


@dataclass(frozen=True, eq=False)
class BestResponseResult:
    label: str
    row: np.ndarray
    utility: float
    table: tuple  # ((label, utility), ...) over all evaluated strategies


def best_response_defect(config: GameConfig, policy: PlatformPolicy, q: float,
                         g=None) -> BestResponseResult:
    """Best response within the comply-then-stop family, opponents compliant.

    Opponents play the threshold candidate (q*g until the penultimate round,
    zero at the last); the focal producer's T+1 defect strategies plus the
    candidate itself are evaluated exactly and the argmax returned.
    """
    profile = candidate_profile(config, q, g)
    rows = [("candidate", candidate_row(config, q, g))]
    rows += [(f"defect[s={s}]", defect_row(config, q, s, g)) for s in range(1, config.horizon + 2)]
    table = []
    for label, row in rows:
        report = exact_eval_fullinfo(config, policy, profile.with_row(0, row))
        table.append((label, float(report.utilities[0])))
    best_ix = max(range(len(table)), key=lambda i: table[i][1])
    return BestResponseResult(label=table[best_ix][0], row=rows[best_ix][1],
                              utility=table[best_ix][1], table=tuple(table))


def punishuserutility_candidate(config: GameConfig, criteria: np.ndarray) -> StrategyProfile:
    """Equilibrium candidate under criteria-based punishment.

    Each producer plays the cheapest content meeting its criterion's utility
    on every support atom until the penultimate round, then zero.
    """
    criteria = np.asarray(criteria, dtype=float)
    vectors = np.zeros((config.producers, config.horizon, config.dimension))
    for j in range(config.producers):
        vectors[j, : config.horizon - 1] = min_norm_meet(config.users, criteria[j])
    return StrategyProfile(vectors)
