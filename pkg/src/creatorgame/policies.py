"""Platform selection policies.

Five policies share one interface: given the evolving state and the arriving
user, produce a selection distribution over producers plus an abstain option,
then fold the round's feedback into a new state. The hedge family scores
producers by exponentiated cumulative (estimated) content utility; the punish
variants additionally maintain a shrinking active set, and the user-utility
variant recommends purely from fixed per-producer criteria vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ConfigError, GameConfig

PROB_SUM_TOL = 1e-12
NORM_PUNISH_TOL = 1e-12  # strict "effort below threshold" test, float-tolerant
DIRECTION_COS_TOL = 1e-9  # cosine >= 1 - tol counts as "same direction"
ARGMAX_TIE_TOL = 1e-12

POLICY_NAMES = ("linhedge", "linexp3", "punishhedge", "punishlindir", "punishuserutility")

__all__ = [
    "POLICY_NAMES",
    "PlatformPolicy",
    "LinHedge",
    "LinExp3",
    "PunishHedge",
    "PunishLinDirectionHedge",
    "PunishUserUtility",
    "PolicyState",
    "SelectionDistribution",
    "linexp3_estimate",
    "linhedge_distribution",
    "make_policy",
]


@dataclass(frozen=True, eq=False)
class SelectionDistribution:
    """Probability per producer plus the probability of recommending nobody."""

    probs: np.ndarray  # (P,)
    none_prob: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < -PROB_SUM_TOL) or self.none_prob < -PROB_SUM_TOL:
            raise ValueError("selection probabilities must be nonnegative")
        total = float(probs.sum()) + self.none_prob
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"selection probabilities sum to {total}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True, eq=False)
class PolicyState:
    """Evolving platform state: cumulative score vectors and the active set.

    ``scores[j]`` is the sum over past rounds of producer j's content (exact
    for full-information policies, accumulated nonnegative estimates for the
    bandit policy). ``t`` is the upcoming 1-based round. Active sets only
    shrink; punished producers never return within an episode.
    """

    t: int
    scores: np.ndarray  # (P, D), componentwise >= 0
    active: np.ndarray  # (P,) bool

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        active = np.asarray(self.active, dtype=bool)
        scores.setflags(write=False)
        active.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "active", active)


def _hedge_probs(scores: np.ndarray, active: np.ndarray, user: np.ndarray,
                 eta_t: float, gamma: float) -> SelectionDistribution:
    """Exploration-mixed softmax of eta * <user, score> over the active set."""
    P = scores.shape[0]
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return SelectionDistribution(np.zeros(P), 1.0)
    logits = eta_t * (scores[idx] @ user)
    z = np.exp(logits - logits.max())
    probs = np.zeros(P)
    probs[idx] = (1.0 - gamma) * z / z.sum() + gamma / idx.size
    return SelectionDistribution(probs, 0.0)


def linhedge_distribution(state: PolicyState, user: np.ndarray, eta_t: float,
                          gamma: float) -> SelectionDistribution:
    """Full-information hedge rule with all producers active; never abstains."""
    if not np.all(state.active):
        raise ValueError("linhedge keeps every producer active")
    return _hedge_probs(state.scores, state.active, user, eta_t, gamma)


def linexp3_estimate(state: PolicyState, user: np.ndarray, arm: int, reward: float,
                     config: GameConfig, *, clip: bool = True) -> np.ndarray:
    """Per-producer content estimates from one bandit observation.

    The pulled arm's estimate is ``pinv(Sigma_arm) @ user * reward`` where
    ``Sigma_j = E_u[pi_j(u) u u^T]`` is computed exactly over the finite user
    support and the selection map ``pi`` implied by ``state``; other arms get
    an exactly-zero estimate. The pseudo-inverse restricts the estimate to the
    span of the support, and clipping zeroes any negative components so the
    accumulated scores stay nonnegative.
    """
    atoms, weights = config.users.atoms, config.users.weights
    eta_t, gamma = config.eta(state.t), config.exploration
    logits = eta_t * (atoms @ state.scores.T)  # (N, P)
    z = np.exp(logits - logits.max(axis=1, keepdims=True))
    pi = (1.0 - gamma) * z / z.sum(axis=1, keepdims=True) + gamma / config.producers
    pi_arm_at_user = float(
        _hedge_probs(state.scores, state.active, user, eta_t, gamma).probs[arm]
    )
    if pi_arm_at_user <= 0:
        raise RuntimeError("pulled an arm with zero selection probability")
    sigma = np.einsum("n,na,nb->ab", weights * pi[:, arm], atoms, atoms)
    estimate = np.linalg.pinv(sigma, rcond=1e-12) @ (user * reward)
    if clip:
        estimate = np.maximum(estimate, 0.0)
    out = np.zeros_like(state.scores)
    out[arm] = estimate
    return out


class PlatformPolicy:
    """Interface shared by all platform policies."""

    name: str = ""
    full_information: bool = True

    def __init__(self, config: GameConfig):
        self.config = config

    def initial_state(self) -> PolicyState:
        P, D = self.config.producers, self.config.dimension
        return PolicyState(t=1, scores=np.zeros((P, D)), active=np.ones(P, dtype=bool))

    def distribution(self, state: PolicyState, user: np.ndarray) -> SelectionDistribution:
        raise NotImplementedError

    def observe(self, state: PolicyState, contents: np.ndarray) -> PolicyState:
        """Fold the round's observed content vectors (P, D) into new state."""
        raise NotImplementedError

    def observe_bandit(self, state: PolicyState, user: np.ndarray, arm: int,
                       reward: float) -> PolicyState:
        raise NotImplementedError(f"{self.name} is a full-information policy")

    def _advance(self, state: PolicyState, contents: np.ndarray,
                 active: np.ndarray) -> PolicyState:
        return PolicyState(t=state.t + 1, scores=state.scores + contents, active=active)


class LinHedge(PlatformPolicy):
    """Exploration-mixed exponential weights on exact cumulative content."""

    name = "linhedge"

    def distribution(self, state, user):
        return linhedge_distribution(state, user, self.config.eta(state.t),
                                     self.config.exploration)

    def observe(self, state, contents):
        return self._advance(state, contents, state.active)


class LinExp3(PlatformPolicy):
    """Bandit analogue of LinHedge running on accumulated content estimates."""

    name = "linexp3"
    full_information = False

    def distribution(self, state, user):
        return _hedge_probs(state.scores, state.active, user,
                            self.config.eta(state.t), self.config.exploration)

    def observe_bandit(self, state, user, arm, reward):
        estimate = linexp3_estimate(state, user, arm, reward, self.config)
        return self._advance(state, estimate, state.active)


class PunishHedge(PlatformPolicy):
    """Hedge over the active set; playing effort below q removes a producer.

    One-dimensional content only. A producer playing exactly q survives; the
    removal test is strict.
    """

    name = "punishhedge"

    def __init__(self, config: GameConfig, q: float):
        if config.dimension != 1:
            raise ConfigError("punishhedge requires dimension 1")
        super().__init__(config)
        self.q = float(q)

    def distribution(self, state, user):
        return _hedge_probs(state.scores, state.active, user,
                            self.config.eta(state.t), self.config.exploration)

    def observe(self, state, contents):
        efforts = np.linalg.norm(contents, axis=1)
        active = state.active & ~(efforts < self.q - NORM_PUNISH_TOL)
        return self._advance(state, contents, active)


class PunishLinDirectionHedge(PlatformPolicy):
    """Hedge with punishment on low effort or any deviation from direction g."""

    name = "punishlindir"

    def __init__(self, config: GameConfig, q: float, g: np.ndarray):
        super().__init__(config)
        g = np.asarray(g, dtype=float)
        if g.shape != (config.dimension,) or np.any(g < 0):
            raise ConfigError("direction criterion must be a nonnegative D-vector")
        if abs(np.linalg.norm(g) - 1.0) > 1e-9:
            raise ConfigError("direction criterion must have unit norm")
        self.q = float(q)
        self.g = g

    def distribution(self, state, user):
        return _hedge_probs(state.scores, state.active, user,
                            self.config.eta(state.t), self.config.exploration)

    def observe(self, state, contents):
        efforts = np.linalg.norm(contents, axis=1)
        low = efforts < self.q - NORM_PUNISH_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            cosines = np.where(efforts > 0, (contents @ self.g) / np.where(efforts > 0, efforts, 1.0), 0.0)
        off_direction = (efforts > 0) & (cosines < 1.0 - DIRECTION_COS_TOL)
        active = state.active & ~(low | off_direction)
        return self._advance(state, contents, active)


class PunishUserUtility(PlatformPolicy):
    """Criteria-driven recommendation with utility-shortfall punishment.

    Recommendation splits uniformly over the active producers whose criterion
    vector maximizes the arriving user's utility; played content never enters
    the recommendation rule. A producer is removed when any support atom
    strictly prefers its criterion to its played content.
    """

    name = "punishuserutility"

    def __init__(self, config: GameConfig, criteria: np.ndarray):
        super().__init__(config)
        criteria = np.asarray(criteria, dtype=float)
        if criteria.shape != (config.producers, config.dimension):
            raise ConfigError("criteria must have shape (producers, dimension)")
        if np.any(criteria < 0):
            raise ConfigError("criteria must be componentwise nonnegative")
        criteria.setflags(write=False)
        self.criteria = criteria

    def distribution(self, state, user):
        P = self.config.producers
        idx = np.flatnonzero(state.active)
        if idx.size == 0:
            return SelectionDistribution(np.zeros(P), 1.0)
        vals = self.criteria[idx] @ user
        winners = idx[vals >= vals.max() - ARGMAX_TIE_TOL]
        probs = np.zeros(P)
        probs[winners] = 1.0 / winners.size
        return SelectionDistribution(probs, 0.0)

    def observe(self, state, contents):
        atoms = self.config.users.atoms
        shortfall = atoms @ contents.T < atoms @ self.criteria.T - ARGMAX_TIE_TOL
        active = state.active & ~shortfall.any(axis=0)
        return self._advance(state, contents, active)


def make_policy(name: str, config: GameConfig, *, q: float | None = None,
                g: np.ndarray | None = None,
                criteria: np.ndarray | None = None) -> PlatformPolicy:
    """Build a policy by CLI name, checking that its parameters are present."""
    if name == "linhedge":
        return LinHedge(config)
    if name == "linexp3":
        return LinExp3(config)
    if name == "punishhedge":
        if q is None:
            raise ConfigError("punishhedge requires the threshold q")
        return PunishHedge(config, q)
    if name == "punishlindir":
        if q is None or g is None:
            raise ConfigError("punishlindir requires the threshold q and direction g")
        return PunishLinDirectionHedge(config, q, g)
    if name == "punishuserutility":
        if criteria is None:
            raise ConfigError("punishuserutility requires criteria vectors")
        return PunishUserUtility(config, criteria)
    raise ConfigError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
