"""Closed-form bounds, thresholds, and derivative formulas, with checkers
that confront each of them with exact or Monte Carlo simulator output.

Conventions: rounds are 1-based, the bound for effort at round t uses the
round-(t+1) learning rate, and ``eta_{T+1} = 0``. Check functions return one
BoundReport per trial so the CLI can stream them to CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import GameConfig, StrategyProfile, UserDistribution, naive_effort_cap, rng_stream
from .policies import LinExp3, LinHedge
from .simulator import EXACT, exact_eval_fullinfo, first_difference_round, selection_gap

FULLINFO = "FULLINFO"
BANDIT = "BANDIT"

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

__all__ = [
    "BANDIT",
    "FULLINFO",
    "HOLDS",
    "INCONCLUSIVE",
    "VIOLATED",
    "BoundReport",
    "EffortBound",
    "check_appendix_derivatives",
    "check_selection_gap_bound",
    "check_softmax_shift_bound",
    "check_zeroing_deviation",
    "eta_threshold",
    "fd_symmetric_derivatives",
    "mt_bound",
    "random_gap_instance",
    "softmax_shift_bound",
    "symmetric_derivatives",
    "thm31_effort_bound",
    "thm32_effort_bound",
    "weighted_tail_sum",
]


@dataclass(frozen=True, eq=False)
class BoundReport:
    """One bound confronted with one empirical value.

    ``margin = empirical - bound``; the verdict is HOLDS when the empirical
    value respects the bound within 3 standard errors (exact checks carry
    stderr 0), VIOLATED otherwise, INCONCLUSIVE when no error estimate
    exists. Checks of strict-positivity claims set ``direction='gt'``.
    """

    name: str
    params: dict
    bound: float
    empirical: float
    stderr: float = 0.0
    direction: str = "le"

    @property
    def margin(self) -> float:
        return self.empirical - self.bound

    @property
    def verdict(self) -> str:
        if not math.isfinite(self.stderr):
            return INCONCLUSIVE
        if self.direction == "gt":
            floor = self.bound - 3.0 * self.stderr if self.stderr > 0 else self.bound + 1e-12
            return HOLDS if self.empirical > floor else VIOLATED
        slack = 3.0 * self.stderr if self.stderr > 0 else 1e-12
        return HOLDS if self.empirical <= self.bound + slack else VIOLATED


@dataclass(frozen=True)
class EffortBound:
    """Effort bound value, tagged so the c = 1 dichotomy stays finite."""

    kind: str  # "finite", "zero", or "unbounded"
    value: float | None

    @classmethod
    def finite(cls, value: float) -> "EffortBound":
        return cls("finite", float(value))


def thm31_effort_bound(eta_next: float, gamma: float, beta: float, T: int, t: int,
                       c: float) -> EffortBound:
    """Equilibrium effort cap at round t under the full-information hedge rule.

    For c > 1 the cap is ``(eta_{t+1} (1-gamma) beta (1-beta^(T-t)) / (1-beta))
    ^ (1/(c-1))``; for c = 1 effort is zero when the inner factor is below 1
    and unconstrained otherwise.
    """
    inner = eta_next * (1.0 - gamma) * beta * (1.0 - beta ** (T - t)) / (1.0 - beta)
    if c == 1:
        return EffortBound("zero", 0.0) if inner < 1 else EffortBound("unbounded", None)
    return EffortBound.finite(inner ** (1.0 / (c - 1.0)))


def weighted_tail_sum(beta: float, T: int, t: int) -> float:
    """Closed form of ``sum_{k=1}^{T-t} k * beta^(t+k-1)``."""
    n = T - t
    return beta**t * (1.0 - beta**n * (n + 1) + beta ** (n + 1) * n) / (1.0 - beta) ** 2


def thm32_effort_bound(eta_next: float, gamma: float, beta: float, T: int, t: int,
                       c: float, P: int) -> float:
    """Equilibrium effort cap at round t under the bandit hedge rule."""
    n = T - t
    series = 1.0 - beta**n * (n + 1) + beta ** (n + 1) * n
    inner = (
        eta_next * P * (1.0 - gamma)
        * beta ** (1.0 + 1.0 / c) * series / (1.0 - beta) ** (2.0 + 1.0 / c)
    )
    return inner ** (1.0 / c)


def softmax_shift_bound(x1, x2, j: int):
    """Gap between two softmax coordinates and its two closed-form caps.

    Returns ``(lhs, rhs_min)`` where lhs is ``softmax_j(x1) - softmax_j(x2)``
    and rhs_min is the smaller of the recentered absolute-difference cap and
    the nonnegative-mass cap. Requires nonnegative sequences of length >= 2.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape or x1.ndim != 1 or x1.size < 2:
        raise ValueError("need two equal-length sequences with at least 2 entries")
    if np.any(x1 < 0) or np.any(x2 < 0):
        raise ValueError("sequences must be nonnegative")

    def softmax_at(x, k):
        z = np.exp(x - x.max())
        return float(z[k] / z.sum())

    lhs = softmax_at(x1, j) - softmax_at(x2, j)
    others = np.arange(x1.size) != j
    z2 = np.exp(x2[others] - x2[others].max())
    w2 = z2 / z2.sum()
    rhs_abs = abs(x1[j] - x2[j] - float((x1[others] - x2[others]) @ w2))
    rhs_mass = x1[j] + float(x2[others] @ w2)
    return lhs, min(rhs_abs, rhs_mass)


def mt_bound(config: GameConfig, mode: str, profiles, j: int, t: int,
             s_first_diff: int | None = None) -> float:
    """Cap on the round-t selection-probability gap between two sequences of
    producer j (other producers fixed).

    FULLINFO mode charges the summed norm differences of j's own contents up
    to round t-1; BANDIT mode charges every producer's content norms from the
    first differing round onward.
    """
    profile_a, profile_b = profiles
    eta_t = config.eta(t)
    factor = (1.0 - config.exploration) * eta_t
    if mode == FULLINFO:
        diff = profile_a.vectors[j, : t - 1] - profile_b.vectors[j, : t - 1]
        return factor * float(np.linalg.norm(diff, axis=1).sum())
    if mode == BANDIT:
        s = s_first_diff
        if s is None:
            s = first_difference_round(profile_a.vectors[j], profile_b.vectors[j])
        if s is None or t <= s:
            return 0.0
        efforts = profile_a.efforts()[:, s - 1 : t - 1]  # rounds s .. t-1
        own = efforts[j].sum()
        others = efforts.sum() - efforts[j].sum()
        return factor * float(own + others)
    raise ValueError(f"mode must be {FULLINFO} or {BANDIT}")


def eta_threshold(P: int, beta: float, gamma: float, T: int) -> float:
    """Learning rate at which investing at round 1 breaks even:
    P^2 (1-beta) / ((1-gamma)(P-1) beta (1-beta^(T-1))).
    """
    if P < 2:
        raise ValueError("threshold needs at least two producers")
    return P**2 * (1.0 - beta) / ((1.0 - gamma) * (P - 1) * beta * (1.0 - beta ** (T - 1)))


def _require_symmetric_setting(config: GameConfig) -> float:
    if config.dimension != 1 or config.cost_exponent != 1:
        raise ValueError("derivative formulas need dimension 1 and cost exponent 1")
    rates = set(config.learning_rates)
    if len(rates) != 1:
        raise ValueError("derivative formulas need a fixed learning rate")
    return config.learning_rates[0]


def symmetric_derivatives(config: GameConfig, values, s: int) -> tuple[float, float]:
    """Closed-form first and second partials of a producer's exact utility in
    its round-s effort, at a symmetric profile (D=1, c=1, fixed rate).

    Both derivatives are independent of the symmetric profile's actual
    values; the sequence is accepted for interface symmetry with the
    finite-difference checker and validated for shape only.
    """
    eta = _require_symmetric_setting(config)
    values = np.asarray(values, dtype=float)
    if values.shape != (config.horizon,):
        raise ValueError("need one symmetric effort value per round")
    P, beta, gamma, T = (config.producers, config.discount, config.exploration, config.horizon)
    tail = beta * (1.0 - beta ** (T - s)) / (1.0 - beta)
    first = beta ** (s - 1) * ((1.0 - gamma) * eta * (P - 1) / P**2 * tail - 1.0)
    second = (1.0 - gamma) * eta**2 * (P - 1) * (P - 2) / P**3 * beta ** (s - 1) * tail
    return first, second


def fd_symmetric_derivatives(config: GameConfig, values, s: int, *,
                             h: float = 1e-5) -> tuple[float, float]:
    """Central finite differences of the exact utility at a symmetric profile.

    Entries must stay >= h so the perturbed profile remains in the domain.
    """
    values = np.asarray(values, dtype=float)
    if np.any(values[s - 1] < h):
        raise ValueError("round-s effort must be at least the step size")
    policy = LinHedge(config)

    def util(delta: float) -> float:
        row = values.copy()[:, None]
        row[s - 1, 0] += delta
        profile = StrategyProfile.symmetric(config, values[:, None]).with_row(0, row)
        return float(exact_eval_fullinfo(config, policy, profile).utilities[0])

    up, mid, down = util(h), util(0.0), util(-h)
    return (up - down) / (2.0 * h), (up - 2.0 * mid + down) / h**2


# ---------------------------------------------------------------------------
# Empirical checkers
# ---------------------------------------------------------------------------


def _random_unit_direction(rng, dimension: int) -> np.ndarray:
    v = np.abs(rng.standard_normal(dimension)) + 1e-12
    return v / np.linalg.norm(v)


def _random_distribution(rng, dimension: int, support: int) -> UserDistribution:
    atoms = np.abs(rng.standard_normal((support, dimension))) + 1e-9
    weights = rng.dirichlet(np.ones(support))
    return UserDistribution(atoms, weights)


def random_gap_instance(rng, *, bandit: bool = False):
    """Random config plus two sequences for one producer, efforts capped."""
    if bandit:
        P, D = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        T, N = int(rng.integers(3, 6)), int(rng.integers(1, 3))
    else:
        P, D = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        T, N = int(rng.integers(3, 9)), int(rng.integers(1, 4))
    c = float(rng.uniform(1.5, 3.0))
    beta = float(rng.uniform(0.3, 0.9))
    gamma = float(rng.uniform(0.05, 0.3))
    if rng.random() < 0.5:
        rates = (float(rng.uniform(0.05, 0.5)),) * T
    else:
        a = float(rng.uniform(0.2, 1.0))
        rates = tuple(a / math.sqrt(t) for t in range(1, T + 1))
    config = GameConfig(producers=P, dimension=D, horizon=T, cost_exponent=c,
                        discount=beta, exploration=gamma, learning_rates=rates,
                        users=_random_distribution(rng, D, N))
    cap = min(naive_effort_cap(c, beta), 1.5)

    def random_rows(n_rows):
        rows = np.zeros((n_rows, T, D))
        for i in range(n_rows):
            for t in range(T):
                rows[i, t] = rng.uniform(0, cap) * _random_unit_direction(rng, D)
        return rows

    base = StrategyProfile(random_rows(P))
    j = int(rng.integers(0, P))
    row_a, row_b = random_rows(2)
    return config, base, j, row_a, row_b


def check_selection_gap_bound(trials: int, seed: int, *, mode: str = FULLINFO,
                              replications: int = 20_000) -> list[BoundReport]:
    """Confront the selection-gap cap with measured gaps on random instances.

    One report per instance; the empirical value is the gap at the round
    where it comes closest to (or exceeds) its cap.
    """
    rng = rng_stream(seed, 33)
    reports = []
    for i in range(trials):
        config, base, j, row_a, row_b = random_gap_instance(rng, bandit=(mode == BANDIT))
        policy = LinExp3(config) if mode == BANDIT else LinHedge(config)
        gap = selection_gap(config, policy, j, row_a, row_b, base,
                            replications=replications, seed=seed + i)
        profiles = (base.with_row(j, row_a), base.with_row(j, row_b))
        caps = np.array([mt_bound(config, mode, profiles, j, t) for t in range(1, config.horizon + 1)])
        slack = caps - gap.values if gap.mode == EXACT else caps + 3 * gap.stderr - gap.values
        worst = int(np.argmin(slack))
        reports.append(BoundReport(
            name=f"selection_gap_{mode.lower()}",
            params={"instance": i, "round": worst + 1, "producers": config.producers,
                    "horizon": config.horizon},
            bound=float(caps[worst]),
            empirical=float(gap.values[worst]),
            stderr=float(gap.stderr[worst]),
        ))
    return reports


def check_zeroing_deviation(trials: int, seed: int, *, overshoot: float = 1.5) -> list[BoundReport]:
    """Effort above the full-information cap must make zeroing it profitable.

    Each trial builds a random instance, inflates one producer's round-s
    effort to ``overshoot`` times the round-s cap, and reports the exact gain
    of the deviation that zeroes that single round (strictly positive means
    the bound's contrapositive held).
    """
    from .bestresponse import deviation_gain

    rng = rng_stream(seed, 34)
    reports = []
    for i in range(trials):
        config, base, j, row_a, _ = random_gap_instance(rng)
        s = int(rng.integers(1, config.horizon))  # s < T so the cap is positive
        cap = thm31_effort_bound(config.eta(s + 1), config.exploration, config.discount,
                                 config.horizon, s, config.cost_exponent).value
        row = np.array(row_a)
        row[s - 1] = overshoot * cap * _random_unit_direction(rng, config.dimension)
        profile = base.with_row(j, row)
        zeroed = np.array(row)
        zeroed[s - 1] = 0.0
        gain = deviation_gain(config, LinHedge(config), profile, j, zeroed)
        reports.append(BoundReport(
            name="zeroing_deviation_gain",
            params={"instance": i, "round": s, "effort": float(overshoot * cap)},
            bound=0.0,
            empirical=gain,
            direction="gt",
        ))
    return reports


def check_softmax_shift_bound(trials: int, seed: int, *, max_len: int = 6,
                              scale: float = 5.0) -> list[BoundReport]:
    """Random nonnegative sequence pairs against the softmax-gap cap."""
    rng = rng_stream(seed, 35)
    reports = []
    for i in range(trials):
        n = int(rng.integers(2, max_len + 1))
        x1 = rng.uniform(0.0, scale, n)
        x2 = rng.uniform(0.0, scale, n)
        j = int(rng.integers(0, n))
        lhs, rhs = softmax_shift_bound(x1, x2, j)
        reports.append(BoundReport(name="softmax_shift", params={"instance": i, "len": n, "j": j},
                                   bound=rhs, empirical=lhs))
    return reports


def check_appendix_derivatives(P: int, beta: float, gamma: float, T: int,
                               eta_factors=(0.9, 1.1), value: float = 0.25,
                               h: float = 1e-5) -> list[BoundReport]:
    """Closed-form symmetric derivatives against central finite differences.

    Emits |closed - fd| reports for the first and second derivative at s = 1
    for learning rates on both sides of the break-even threshold.
    """
    reports = []
    thr = eta_threshold(P, beta, gamma, T)
    for factor in eta_factors:
        eta = factor * thr
        config = GameConfig(producers=P, dimension=1, horizon=T, cost_exponent=1.0,
                            discount=beta, exploration=gamma, learning_rates=(eta,) * T,
                            users=UserDistribution(np.ones((1, 1)), np.ones(1)))
        values = np.full(T, value)
        first, second = symmetric_derivatives(config, values, 1)
        fd_first, fd_second = fd_symmetric_derivatives(config, values, 1, h=h)
        reports.append(BoundReport(name="symmetric_first_derivative",
                                   params={"P": P, "beta": beta, "eta_factor": factor,
                                           "closed": first, "fd": fd_first},
                                   bound=1e-5, empirical=abs(first - fd_first)))
        reports.append(BoundReport(name="symmetric_second_derivative",
                                   params={"P": P, "beta": beta, "eta_factor": factor,
                                           "closed": second, "fd": fd_second},
                                   bound=1e-4, empirical=abs(second - fd_second)))
    return reports
