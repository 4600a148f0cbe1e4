"""Domain types and configuration for the recommendation game.

Users and content live in the nonnegative orthant of R^D. A finite-support
distribution of unit-norm user vectors arrives one draw per round; producers
commit to a full sequence of content vectors up front. Everything here is
immutable after construction and safe to share across workers; randomness
flows through generators keyed by integer tuples so runs are reproducible.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-9
ATOM_NORM_TOL = 1e-9

__all__ = [
    "ConfigError",
    "FeedbackMode",
    "GameConfig",
    "HistoryRecord",
    "StrategyProfile",
    "UserDistribution",
    "check_naive_bound",
    "expand_learning_rates",
    "load_config",
    "load_profile",
    "mean_user",
    "naive_effort_cap",
    "rng_stream",
    "sample_user",
    "sample_user_index",
    "serialize_config",
    "serialize_profile",
]


class ConfigError(ValueError):
    """A configuration or profile document failed validation."""


def rng_stream(*key: int) -> np.random.Generator:
    """Deterministic generator for a tuple of nonnegative integer keys.

    Identical keys give identical streams; distinct keys give independent
    streams. Callers key user draws and policy randomness separately, e.g.
    ``rng_stream(seed, episode, round, channel)``.
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def _finite_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must contain only finite values")
    return arr


@dataclass(frozen=True, eq=False)
class UserDistribution:
    """Finite-support distribution over unit-norm nonnegative user vectors."""

    atoms: np.ndarray  # (N, D), rows renormalized to unit length at load time
    weights: np.ndarray  # (N,), positive, renormalized to sum exactly to 1

    def __post_init__(self):
        atoms = np.atleast_2d(_finite_array(self.atoms, "user atoms"))
        weights = _finite_array(self.weights, "user weights").ravel()
        if atoms.shape[0] == 0 or atoms.shape[0] != weights.shape[0]:
            raise ConfigError("user atoms and weights must be nonempty and aligned")
        if np.any(atoms < 0):
            raise ConfigError("user vectors must be componentwise nonnegative")
        if np.any(weights < 0):
            raise ConfigError("user weights must be nonnegative")
        keep = weights > 0  # zero-weight atoms are outside the support; drop them
        atoms, weights = atoms[keep], weights[keep]
        if atoms.shape[0] == 0:
            raise ConfigError("user distribution needs at least one positive weight")
        norms = np.linalg.norm(atoms, axis=1)
        if np.any(norms == 0):
            raise ConfigError("user vectors must be nonzero")
        atoms = atoms / norms[:, None]
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigError(f"user weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total}")
        weights = weights / total
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_cumweights", np.cumsum(weights))

    @property
    def support_size(self) -> int:
        return self.atoms.shape[0]

    @property
    def dimension(self) -> int:
        return self.atoms.shape[1]


def mean_user(dist: UserDistribution) -> tuple[np.ndarray, float]:
    """Exact weighted mean of the user distribution and its Euclidean norm."""
    mean = dist.weights @ dist.atoms
    return mean, float(np.linalg.norm(mean))


def sample_user_index(dist: UserDistribution, rng: np.random.Generator) -> int:
    """Draw an atom index with probability equal to its weight."""
    cum = getattr(dist, "_cumweights")
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(idx, dist.support_size - 1)


def sample_user(dist: UserDistribution, rng: np.random.Generator) -> np.ndarray:
    """Draw a user vector; a pure function of (dist, stream state)."""
    return dist.atoms[sample_user_index(dist, rng)]


def expand_learning_rates(value, horizon: int) -> tuple[float, ...]:
    """Expand a learning-rate schedule to ``horizon`` literals.

    Accepts a literal sequence, ``{"fixed": x}``, or ``{"inverse_sqrt": a}``
    meaning ``a / sqrt(t)`` for rounds t = 1..T.
    """
    if isinstance(value, Mapping):
        if set(value) == {"fixed"}:
            eta = float(value["fixed"])
            return (eta,) * horizon
        if set(value) == {"inverse_sqrt"}:
            a = float(value["inverse_sqrt"])
            return tuple(a / np.sqrt(t) for t in range(1, horizon + 1))
        raise ConfigError(f"unknown learning-rate schedule {sorted(value)}")
    if isinstance(value, (list, tuple)):
        rates = tuple(float(x) for x in value)
        if len(rates) != horizon:
            raise ConfigError(f"learning_rates has {len(rates)} entries, horizon is {horizon}")
        return rates
    raise ConfigError("learning_rates must be a list or a named schedule")


@dataclass(frozen=True, eq=False)
class GameConfig:
    """All scalar game parameters plus the user distribution.

    Rounds are 1-based; ``learning_rates[t-1]`` is the rate used in round t.
    Discounting weights round t by ``discount ** (t - 1)``.
    """

    producers: int
    dimension: int
    horizon: int
    cost_exponent: float
    discount: float
    exploration: float
    learning_rates: tuple[float, ...]
    users: UserDistribution

    def __post_init__(self):
        if not (isinstance(self.producers, int) and self.producers >= 1):
            raise ConfigError(f"producers must be a positive integer, got {self.producers}")
        if not (isinstance(self.dimension, int) and self.dimension >= 1):
            raise ConfigError(f"dimension must be a positive integer, got {self.dimension}")
        if not (isinstance(self.horizon, int) and self.horizon >= 1):
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon}")
        if not self.cost_exponent >= 1:
            raise ConfigError(f"cost_exponent must be >= 1, got {self.cost_exponent}")
        if not 0 < self.discount < 1:
            raise ConfigError(f"discount out of (0,1): {self.discount}")
        if not 0 < self.exploration < 1:
            raise ConfigError(f"exploration out of (0,1): {self.exploration}")
        rates = tuple(float(x) for x in self.learning_rates)
        if len(rates) != self.horizon:
            raise ConfigError("learning_rates must have one entry per round")
        if any(x < 0 for x in rates):
            raise ConfigError("learning_rates must be nonnegative")
        if any(rates[i] < rates[i + 1] - 1e-12 for i in range(len(rates) - 1)):
            raise ConfigError("learning_rates must be non-increasing")
        object.__setattr__(self, "learning_rates", rates)
        if not isinstance(self.users, UserDistribution):
            raise ConfigError("users must be a UserDistribution")
        if self.users.dimension != self.dimension:
            raise ConfigError(
                f"user vectors have dimension {self.users.dimension}, expected {self.dimension}"
            )

    def eta(self, t: int) -> float:
        """Learning rate for 1-based round t; rounds past the horizon get 0."""
        return self.learning_rates[t - 1] if t <= self.horizon else 0.0

    def discount_weights(self) -> np.ndarray:
        return self.discount ** np.arange(self.horizon)


_REQUIRED_FIELDS = (
    "producers",
    "dimension",
    "horizon",
    "cost_exponent",
    "discount",
    "exploration",
    "learning_rates",
    "users",
)


def _users_from_document(entries) -> UserDistribution:
    atoms, weights = [], []
    for entry in entries:
        if isinstance(entry, Mapping):
            vec, w = entry["vector"], entry["weight"]
        else:
            vec, w = entry
        atoms.append(vec)
        weights.append(w)
    return UserDistribution(np.asarray(atoms, dtype=float), np.asarray(weights, dtype=float))


def load_config(source) -> GameConfig:
    """Build a validated GameConfig from a mapping, JSON text, or file path.

    Named learning-rate schedules are expanded to per-round literals and user
    vectors are renormalized. Any missing field, out-of-range scalar,
    non-monotone explicit rate list, or bad weight sum raises ConfigError.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        doc = json.loads(text)
    missing = [f for f in _REQUIRED_FIELDS if f not in doc]
    if missing:
        raise ConfigError(f"missing config fields: {', '.join(missing)}")
    horizon = doc["horizon"]
    if not (isinstance(horizon, int) and horizon >= 1):
        raise ConfigError(f"horizon must be a positive integer, got {horizon}")
    return GameConfig(
        producers=int(doc["producers"]),
        dimension=int(doc["dimension"]),
        horizon=horizon,
        cost_exponent=float(doc["cost_exponent"]),
        discount=float(doc["discount"]),
        exploration=float(doc["exploration"]),
        learning_rates=expand_learning_rates(doc["learning_rates"], horizon),
        users=_users_from_document(doc["users"]),
    )


def serialize_config(config: GameConfig) -> dict:
    """Round-trippable plain-dict form of a config (load_config inverts it)."""
    return {
        "producers": config.producers,
        "dimension": config.dimension,
        "horizon": config.horizon,
        "cost_exponent": config.cost_exponent,
        "discount": config.discount,
        "exploration": config.exploration,
        "learning_rates": list(config.learning_rates),
        "users": [
            [list(map(float, atom)), float(w)]
            for atom, w in zip(config.users.atoms, config.users.weights)
        ],
    }


def naive_effort_cap(cost_exponent: float, discount: float) -> float:
    """Best responses never exceed this effort: (beta / (1 - beta))^(1/c)."""
    if not 0 < discount < 1:
        raise ConfigError(f"discount out of (0,1): {discount}")
    if not cost_exponent >= 1:
        raise ConfigError(f"cost_exponent must be >= 1, got {cost_exponent}")
    return (discount / (1.0 - discount)) ** (1.0 / cost_exponent)


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Pure strategies: ``vectors[j, t-1]`` is producer j's round-t content.

    The implicit round-0 content is the zero vector for every producer.
    """

    vectors: np.ndarray  # (P, T, D), componentwise nonnegative and finite

    def __post_init__(self):
        vectors = _finite_array(self.vectors, "profile vectors")
        if vectors.ndim != 3:
            raise ConfigError("profile vectors must have shape (producers, horizon, dimension)")
        if np.any(vectors < 0):
            raise ConfigError("content vectors must be componentwise nonnegative")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def producers(self) -> int:
        return self.vectors.shape[0]

    @property
    def horizon(self) -> int:
        return self.vectors.shape[1]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[2]

    def efforts(self) -> np.ndarray:
        """Per-producer per-round content norms, shape (P, T)."""
        return np.linalg.norm(self.vectors, axis=2)

    def row(self, j: int) -> np.ndarray:
        return self.vectors[j]

    def with_row(self, j: int, row: np.ndarray) -> "StrategyProfile":
        vectors = np.array(self.vectors)
        vectors[j] = row
        return StrategyProfile(vectors)

    @classmethod
    def zeros(cls, config: GameConfig) -> "StrategyProfile":
        return cls(np.zeros((config.producers, config.horizon, config.dimension)))

    @classmethod
    def symmetric(cls, config: GameConfig, row: np.ndarray) -> "StrategyProfile":
        row = np.asarray(row, dtype=float)
        if row.ndim == 1:  # scalar sequence for D = 1
            row = row[:, None]
        return cls(np.broadcast_to(row, (config.producers,) + row.shape).copy())


def check_naive_bound(profile: StrategyProfile, config: GameConfig, slack: float = 1e-9) -> None:
    """Reject profiles whose effort exceeds the naive best-response cap."""
    cap = naive_effort_cap(config.cost_exponent, config.discount) + slack
    worst = float(profile.efforts().max())
    if worst > cap:
        raise ConfigError(f"profile effort {worst} exceeds naive cap {cap}")


def load_profile(source, config: GameConfig | None = None, *, enforce_naive_bound: bool = False,
                 slack: float = 1e-9) -> StrategyProfile:
    """Read a profile from a mapping/JSON text/path: ``{"vectors": [[[...]]]}``."""
    if isinstance(source, Mapping):
        doc = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        doc = json.loads(text)
    if "vectors" not in doc:
        raise ConfigError("profile document must contain 'vectors'")
    profile = StrategyProfile(np.asarray(doc["vectors"], dtype=float))
    if config is not None:
        expected = (config.producers, config.horizon, config.dimension)
        if profile.vectors.shape != expected:
            raise ConfigError(f"profile shape {profile.vectors.shape} does not match {expected}")
        if enforce_naive_bound:
            check_naive_bound(profile, config, slack)
    return profile


def serialize_profile(profile: StrategyProfile) -> dict:
    return {"vectors": profile.vectors.tolist()}


class FeedbackMode(enum.Enum):
    """What the platform observes at the end of a round."""

    FULL = "full"
    BANDIT = "bandit"


@dataclass(frozen=True, eq=False)
class HistoryRecord:
    """One round of platform history.

    Round 0 is the seed record: arm 0 is charged, every content vector is
    zero, and an arbitrary user draw is stored. Episodes use exactly one
    feedback mode: full records carry all content vectors, bandit records
    only the realized scalar reward.
    """

    round: int
    user: np.ndarray
    arm: int | None
    mode: FeedbackMode
    contents: np.ndarray | None = None  # (P, D), full-information only
    reward: float | None = None  # bandit only

    def __post_init__(self):
        if self.mode is FeedbackMode.FULL and self.contents is None:
            raise ConfigError("full-information records must carry contents")
        if self.mode is FeedbackMode.BANDIT and self.round > 0 and self.reward is None:
            raise ConfigError("bandit records must carry the realized reward")

    @classmethod
    def seed_record(cls, config: GameConfig, mode: FeedbackMode, user: np.ndarray) -> "HistoryRecord":
        contents = np.zeros((config.producers, config.dimension)) if mode is FeedbackMode.FULL else None
        reward = 0.0 if mode is FeedbackMode.BANDIT else None
        return cls(round=0, user=user, arm=0, mode=mode, contents=contents, reward=reward)
