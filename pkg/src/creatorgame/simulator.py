"""Episode evaluation: exact where the policy allows it, Monte Carlo otherwise.

For full-information policies the platform state is a deterministic function
of the committed profile, so per-round selection probabilities, welfare, and
discounted producer utilities are computed exactly by enumerating the user
support. The bandit policy's state depends on realized draws and is evaluated
by a vectorized Monte Carlo engine. All Monte Carlo paths are deterministic
given the seed: user draws and arm draws come from independent streams keyed
by (seed, round, channel), with replications laid out along array axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    FeedbackMode,
    GameConfig,
    HistoryRecord,
    StrategyProfile,
    rng_stream,
    sample_user_index,
)
from .policies import LinExp3, PlatformPolicy, PolicyState

USER_CHANNEL = 0
ARM_CHANNEL = 1

EXACT = "EXACT"
MONTE_CARLO = "MONTE_CARLO"

__all__ = [
    "EXACT",
    "MONTE_CARLO",
    "EvalReport",
    "GapReport",
    "exact_eval_fullinfo",
    "first_difference_round",
    "fullinfo_round_tables",
    "mc_eval",
    "run_episode",
    "selection_gap",
]


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Utilities, welfare, and selection probabilities for one evaluation.

    EXACT reports have zero standard errors; MONTE_CARLO reports carry the
    sample standard error of each estimate (infinite when replications == 1,
    where no error estimate exists).
    """

    mode: str
    utilities: np.ndarray  # (P,) discounted producer utilities
    utility_stderr: np.ndarray
    welfare: np.ndarray  # (T,) expected matched-user utility per round
    welfare_stderr: np.ndarray
    selection_probs: np.ndarray  # (T, P) expected selection probability
    selection_stderr: np.ndarray
    none_probs: np.ndarray  # (T,) probability of recommending nobody
    replications: int | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class GapReport:
    """Per-round selection-probability gap for one producer across two profiles."""

    values: np.ndarray  # (T,)
    stderr: np.ndarray  # (T,), zeros when exact
    mode: str


def _costs(config: GameConfig, profile: StrategyProfile) -> np.ndarray:
    return profile.efforts() ** config.cost_exponent  # (P, T)


def fullinfo_round_tables(config: GameConfig, policy: PlatformPolicy,
                          profile: StrategyProfile):
    """Exact per-round, per-atom selection tables for a full-information policy.

    Returns ``(probs, none, welfare)`` with shapes (T, N, P), (T, N), (T, N):
    entry [t-1, i] conditions on atom i arriving in round t. The platform
    state trajectory is deterministic, so these tables are exact.
    """
    if not policy.full_information:
        raise ValueError(f"{policy.name} state depends on realized arms; use mc_eval")
    atoms = config.users.atoms
    T, N, P = config.horizon, config.users.support_size, config.producers
    probs = np.zeros((T, N, P))
    none = np.zeros((T, N))
    welfare = np.zeros((T, N))
    state = policy.initial_state()
    for t in range(1, T + 1):
        contents = profile.vectors[:, t - 1, :]
        utils = atoms @ contents.T  # (N, P)
        for i in range(N):
            dist = policy.distribution(state, atoms[i])
            probs[t - 1, i] = dist.probs
            none[t - 1, i] = dist.none_prob
            welfare[t - 1, i] = dist.probs @ utils[i]
        state = policy.observe(state, contents)
    return probs, none, welfare


def exact_eval_fullinfo(config: GameConfig, policy: PlatformPolicy,
                        profile: StrategyProfile) -> EvalReport:
    """Zero-error evaluation of a pure profile under a full-information policy."""
    probs, none, welfare = fullinfo_round_tables(config, policy, profile)
    w = config.users.weights
    sel = np.einsum("n,tnp->tp", w, probs)  # (T, P)
    none_probs = none @ w
    welfare_rounds = welfare @ w
    disc = config.discount_weights()
    utilities = (sel.T - _costs(config, profile)) @ disc
    zeros_p = np.zeros(config.producers)
    zeros_t = np.zeros(config.horizon)
    return EvalReport(
        mode=EXACT,
        utilities=utilities,
        utility_stderr=zeros_p,
        welfare=welfare_rounds,
        welfare_stderr=zeros_t,
        selection_probs=sel,
        selection_stderr=np.zeros_like(sel),
        none_probs=none_probs,
        replications=None,
    )


def _stderr(samples: np.ndarray) -> np.ndarray:
    """Standard error along axis 0; infinite for a single sample."""
    n = samples.shape[0]
    if n < 2:
        return np.full(samples.shape[1:], np.inf)
    return samples.std(axis=0, ddof=1) / np.sqrt(n)


def _user_indices(config: GameConfig, replications: int, seed: int) -> np.ndarray:
    """(R, T) atom indices; round t's column comes from stream (seed, t, USER)."""
    cum = np.cumsum(config.users.weights)
    T = config.horizon
    idx = np.empty((replications, T), dtype=np.intp)
    for t in range(1, T + 1):
        v = rng_stream(seed, t, USER_CHANNEL).random(replications)
        idx[:, t - 1] = np.minimum(np.searchsorted(cum, v, side="right"),
                                   config.users.support_size - 1)
    return idx


def _mc_fullinfo(config, policy, profile, replications, seed) -> EvalReport:
    # State is profile-determined, so sampling reduces to drawing which atom
    # arrives each round and reading the exact conditional tables.
    probs, none, welfare = fullinfo_round_tables(config, policy, profile)
    idx = _user_indices(config, replications, seed)
    t_ix = np.arange(config.horizon)[None, :]
    sel = probs[t_ix, idx, :]  # (R, T, P)
    none_r = none[t_ix, idx]  # (R, T)
    welf_r = welfare[t_ix, idx]  # (R, T)
    return _reportify(config, profile, sel, none_r, welf_r, replications)


def _reportify(config, profile, sel, none_r, welf_r, replications,
               diagnostics=None) -> EvalReport:
    disc = config.discount_weights()
    util_r = np.einsum("rtp,t->rp", sel, disc) - _costs(config, profile) @ disc
    return EvalReport(
        mode=MONTE_CARLO,
        utilities=util_r.mean(axis=0),
        utility_stderr=_stderr(util_r),
        welfare=welf_r.mean(axis=0),
        welfare_stderr=_stderr(welf_r),
        selection_probs=sel.mean(axis=0),
        selection_stderr=_stderr(sel),
        none_probs=none_r.mean(axis=0),
        replications=replications,
        diagnostics=diagnostics or {},
    )


def _linexp3_batch(config: GameConfig, profiles: list[StrategyProfile],
                   replications: int, seed: int):
    """Run R bandit episodes per profile with shared user/arm draws.

    Sharing the uniform draws across profiles gives common-random-number
    pairing: paths agree exactly until the profiles first differ. Returns one
    dict per profile with conditional selection probabilities (R, T, P),
    per-round welfare (R, T), and the mean L1 mass removed by estimate
    clipping.
    """
    atoms, weights = config.users.atoms, config.users.weights
    P, D, T, N = config.producers, config.dimension, config.horizon, atoms.shape[0]
    gamma = config.exploration
    R = replications
    cum = np.cumsum(weights)
    outer = np.einsum("na,nb->nab", atoms, atoms)
    runs = [
        {"scores": np.zeros((R, P, D)), "sel": np.zeros((R, T, P)),
         "welfare": np.zeros((R, T)), "clipped": 0.0}
        for _ in profiles
    ]
    rows = np.arange(R)
    for t in range(1, T + 1):
        u_draw = rng_stream(seed, t, USER_CHANNEL).random(R)
        a_draw = rng_stream(seed, t, ARM_CHANNEL).random(R)
        user_idx = np.minimum(np.searchsorted(cum, u_draw, side="right"), N - 1)
        users = atoms[user_idx]  # (R, D)
        eta_t = config.eta(t)
        for run, profile in zip(runs, profiles):
            contents = profile.vectors[:, t - 1, :]  # (P, D)
            logits = eta_t * np.einsum("nd,rpd->rnp", atoms, run["scores"])
            z = np.exp(logits - logits.max(axis=2, keepdims=True))
            pi = (1.0 - gamma) * z / z.sum(axis=2, keepdims=True) + gamma / P  # (R, N, P)
            pi_user = pi[rows, user_idx, :]  # (R, P)
            run["sel"][:, t - 1, :] = pi_user
            run["welfare"][:, t - 1] = np.einsum("rp,rp->r", pi_user, users @ contents.T)
            arms = np.minimum(np.sum(a_draw[:, None] > np.cumsum(pi_user, axis=1), axis=1), P - 1)
            rewards = np.einsum("rd,rd->r", users, contents[arms])
            pi_arm_atoms = np.take_along_axis(pi, arms[:, None, None], axis=2)[:, :, 0]  # (R, N)
            sigma = np.einsum("rn,nab->rab", pi_arm_atoms * weights[None, :], outer)
            raw = np.einsum("rab,rb->ra", np.linalg.pinv(sigma, rcond=1e-12),
                            users * rewards[:, None])
            est = np.maximum(raw, 0.0)
            run["clipped"] += float(np.abs(raw - est).sum())
            run["scores"][rows, arms] = run["scores"][rows, arms] + est
    for run in runs:
        run["clipped"] /= R * T
    return runs


def mc_eval(config: GameConfig, policy: PlatformPolicy, profile: StrategyProfile,
            replications: int, seed: int) -> EvalReport:
    """Unbiased Monte Carlo estimates of the same quantities as exact_eval_fullinfo.

    Arm-level randomness is integrated out analytically (the report averages
    conditional selection probabilities), so only user draws — and, for the
    bandit policy, the arm draws feeding its estimator — contribute noise.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if policy.full_information:
        return _mc_fullinfo(config, policy, profile, replications, seed)
    run = _linexp3_batch(config, [profile], replications, seed)[0]
    none_r = np.zeros((replications, config.horizon))
    return _reportify(config, profile, run["sel"], none_r, run["welfare"],
                      replications, diagnostics={"clip_l1_mean": run["clipped"]})


def first_difference_round(row_a: np.ndarray, row_b: np.ndarray) -> int | None:
    """First 1-based round where two content sequences differ, None if equal."""
    diffs = np.flatnonzero(np.any(np.asarray(row_a) != np.asarray(row_b), axis=1))
    return int(diffs[0]) + 1 if diffs.size else None


def selection_gap(config: GameConfig, policy: PlatformPolicy, j: int,
                  row_a: np.ndarray, row_b: np.ndarray, base: StrategyProfile,
                  *, replications: int = 10_000, seed: int = 0) -> GapReport:
    """Per-round gap in producer j's selection probability between two of its
    content sequences, holding every other producer's sequence fixed.

    Exact for full-information policies; paired Monte Carlo with common random
    numbers for the bandit policy (so rounds before the first difference have
    exactly zero gap and zero error).
    """
    profile_a = base.with_row(j, np.asarray(row_a, dtype=float))
    profile_b = base.with_row(j, np.asarray(row_b, dtype=float))
    if policy.full_information:
        sel_a = exact_eval_fullinfo(config, policy, profile_a).selection_probs
        sel_b = exact_eval_fullinfo(config, policy, profile_b).selection_probs
        values = sel_a[:, j] - sel_b[:, j]
        return GapReport(values=values, stderr=np.zeros_like(values), mode=EXACT)
    run_a, run_b = _linexp3_batch(config, [profile_a, profile_b], replications, seed)
    diff = run_a["sel"][:, :, j] - run_b["sel"][:, :, j]  # (R, T)
    return GapReport(values=diff.mean(axis=0), stderr=_stderr(diff), mode=MONTE_CARLO)


def run_episode(config: GameConfig, policy: PlatformPolicy, profile: StrategyProfile,
                seed: int, episode: int = 0) -> list[HistoryRecord]:
    """Play one seeded episode and return its history, round 0 included.

    The round-0 seed record charges arm 0 with all-zero content. Stream keys
    are (seed, episode, round, channel) so distinct episodes are independent.
    """
    mode = FeedbackMode.FULL if policy.full_information else FeedbackMode.BANDIT
    u0 = config.users.atoms[sample_user_index(config.users, rng_stream(seed, episode, 0, USER_CHANNEL))]
    records = [HistoryRecord.seed_record(config, mode, u0)]
    state = policy.initial_state()
    for t in range(1, config.horizon + 1):
        user = config.users.atoms[
            sample_user_index(config.users, rng_stream(seed, episode, t, USER_CHANNEL))
        ]
        dist = policy.distribution(state, user)
        outcomes = np.append(dist.probs, dist.none_prob)
        draw = rng_stream(seed, episode, t, ARM_CHANNEL).random()
        arm_ix = min(int(np.searchsorted(np.cumsum(outcomes), draw, side="right")),
                     config.producers)
        arm = None if arm_ix == config.producers else arm_ix
        contents = profile.vectors[:, t - 1, :]
        if mode is FeedbackMode.FULL:
            records.append(HistoryRecord(round=t, user=user, arm=arm, mode=mode,
                                         contents=contents))
            state = policy.observe(state, contents)
        else:
            reward = float(contents[arm] @ user) if arm is not None else 0.0
            records.append(HistoryRecord(round=t, user=user, arm=arm, mode=mode,
                                         reward=reward))
            state = policy.observe_bandit(state, user, arm, reward)
    return records
