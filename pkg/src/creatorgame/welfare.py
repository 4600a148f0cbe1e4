"""Welfare optimization: criteria programs, closed forms, and projections.

Two nonconvex programs are solved at desk scale by exhaustive assignment
enumeration plus local search. Assignments map each user atom to a winning
producer; a candidate built from an assignment points each producer at the
weighted mean of its assigned atoms and spends its full norm budget. Every
candidate is then re-scored with its *true* induced argmax and win shares and
discarded if infeasible, so reported objectives are always valid lower bounds
and exact at enumeration scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .core import ConfigError, UserDistribution, mean_user, naive_effort_cap, rng_stream

ARGMAX_TIE_TOL = 1e-12
FEAS_TOL = 1e-9
ENUM_BUDGET = 10**6

EXACT_ENUM = "EXACT_ENUM"
LOCAL_SEARCH_LOWER_BOUND = "LOCAL_SEARCH_LOWER_BOUND"

SHARED_DIRECTION = "SHARED_DIRECTION"
SPECIALIZED = "SPECIALIZED"

__all__ = [
    "EXACT_ENUM",
    "LOCAL_SEARCH_LOWER_BOUND",
    "SHARED_DIRECTION",
    "SPECIALIZED",
    "WelfareSolution",
    "closed_form_2user",
    "criteria_shares",
    "min_norm_meet",
    "naive_effort_bound",
    "solve_G",
    "solve_W",
    "theta_star",
    "welfare_upper_bound",
]


@dataclass(frozen=True, eq=False)
class WelfareSolution:
    """Criteria vectors with their objective, win shares, and certification."""

    criteria: np.ndarray  # (P, D)
    objective: float
    shares: np.ndarray  # (P,) win shares, nonnegative, sum to 1
    residuals: np.ndarray  # (P,) constraint residuals (<= FEAS_TOL when feasible)
    certification: str


def criteria_shares(dist: UserDistribution, p: np.ndarray):
    """True objective and win shares of criteria vectors under argmax matching.

    A user atom indifferent between several producers (utilities within
    1e-12 of the max) splits its weight uniformly among them.
    """
    utils = dist.atoms @ p.T  # (N, P)
    best = utils.max(axis=1)
    win = utils >= best[:, None] - ARGMAX_TIE_TOL
    share = win / win.sum(axis=1, keepdims=True)
    f = dist.weights @ share
    return float(dist.weights @ best), f


def _partitions(n: int, max_blocks: int):
    """Partitions of n items into at most max_blocks unlabeled blocks."""
    labels = np.zeros(n, dtype=int)

    def rec(i: int, used: int):
        if i == n:
            yield labels.copy()
            return
        for b in range(min(used + 1, max_blocks)):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(0, 0)


def _w_norm_cap(c: float, beta: float, f: np.ndarray) -> np.ndarray:
    return beta ** (1.0 / c) * np.maximum(f, 0.0) ** (1.0 / c)


def _block_directions(dist: UserDistribution, labels: np.ndarray, blocks: int) -> np.ndarray:
    d = np.zeros((blocks, dist.dimension))
    for b in range(blocks):
        members = labels == b
        v = dist.weights[members] @ dist.atoms[members]
        d[b] = v / np.linalg.norm(v)
    return d


def _evaluate_w(dist, c, beta, p):
    objective, f = criteria_shares(dist, p)
    residuals = np.linalg.norm(p, axis=1) - _w_norm_cap(c, beta, f)
    return objective, f, residuals


def _lloyd_w(dist, c, beta, p0, iters=40):
    """Fixed-point refinement: realign directions to won users, respend caps."""
    atoms, weights = dist.atoms, dist.weights
    p = np.array(p0)
    best = None
    for _ in range(iters):
        objective, f, residuals = _evaluate_w(dist, c, beta, p)
        if residuals.max() <= FEAS_TOL and (best is None or objective > best[0]):
            best = (objective, p.copy(), f, residuals)
        utils = atoms @ p.T
        win = utils >= utils.max(axis=1)[:, None] - ARGMAX_TIE_TOL
        share = win / win.sum(axis=1, keepdims=True)
        pull = (weights[:, None] * share).T @ atoms  # (P, D)
        norms = np.linalg.norm(pull, axis=1)
        new_p = np.zeros_like(p)
        nz = norms > 0
        new_p[nz] = (_w_norm_cap(c, beta, weights @ share)[nz] / norms[nz])[:, None] * pull[nz]
        if np.array_equal(new_p, p):
            break
        p = new_p
    return best


def _random_partition(rng, n, blocks):
    labels = rng.integers(0, blocks, size=n)
    _, labels = np.unique(labels, return_inverse=True)
    return labels


def solve_W(c: float, beta: float, dist: UserDistribution, P: int, *,
            restarts: int = 32, seed: int = 0) -> WelfareSolution:
    """Welfare-maximizing criteria under the cost-participation constraint
    ``||p_j|| <= beta^(1/c) * f_j(p)^(1/c)``.

    Enumerates every assignment of atoms to winners when the assignment count
    fits the budget (EXACT_ENUM), always followed by local-search refinement;
    over budget, only the local search runs and the result is certified as a
    lower bound.
    """
    if not c >= 1:
        raise ConfigError(f"cost exponent must be >= 1, got {c}")
    if not 0 < beta <= 1:
        raise ConfigError(f"discount out of (0,1]: {beta}")
    if P < 1:
        raise ConfigError("need at least one producer")
    N, D = dist.support_size, dist.dimension
    K = min(P, N)
    best = None  # (objective, p, f, residuals)

    def consider(p):
        nonlocal best
        objective, f, residuals = _evaluate_w(dist, c, beta, p)
        if residuals.max() <= FEAS_TOL and (best is None or objective > best[0]):
            best = (objective, np.array(p), f, residuals)

    enumerated = K**N <= ENUM_BUDGET
    if enumerated:
        for labels in _partitions(N, K):
            blocks = labels.max() + 1
            f_blocks = np.array([dist.weights[labels == b].sum() for b in range(blocks)])
            p = np.zeros((P, D))
            p[:blocks] = _w_norm_cap(c, beta, f_blocks)[:, None] * _block_directions(dist, labels, blocks)
            consider(p)

    rng = rng_stream(seed, 90)
    starts = [] if best is None else [best[1]]
    for _ in range(restarts):
        labels = _random_partition(rng, N, K)
        blocks = labels.max() + 1
        f_blocks = np.array([dist.weights[labels == b].sum() for b in range(blocks)])
        p = np.zeros((P, D))
        p[:blocks] = _w_norm_cap(c, beta, f_blocks)[:, None] * _block_directions(dist, labels, blocks)
        starts.append(p)
    for p0 in starts:
        refined = _lloyd_w(dist, c, beta, p0)
        if refined is not None and (best is None or refined[0] > best[0]):
            best = refined

    if best is None:  # all-zero criteria are always feasible
        consider(np.zeros((P, D)))
    objective, p, f, residuals = best
    return WelfareSolution(criteria=p, objective=objective, shares=f, residuals=residuals,
                           certification=EXACT_ENUM if enumerated else LOCAL_SEARCH_LOWER_BOUND)


def solve_G(dist: UserDistribution, P: int, *, restarts: int = 32,
            seed: int = 0) -> WelfareSolution:
    """Unit-norm variant: maximize expected best utility with ``||p_j|| = 1``.

    Producers not assigned any atom point at the mean user direction, which
    never hurts the objective. Residuals report |norm - 1|.
    """
    if P < 1:
        raise ConfigError("need at least one producer")
    N, D = dist.support_size, dist.dimension
    K = min(P, N)
    mean, mean_norm = mean_user(dist)
    fallback = mean / mean_norm
    best = None

    def consider(p):
        nonlocal best
        objective, f = criteria_shares(dist, p)
        if best is None or objective > best[0]:
            best = (objective, np.array(p), f)

    enumerated = K**N <= ENUM_BUDGET
    if enumerated:
        for labels in _partitions(N, K):
            blocks = labels.max() + 1
            p = np.tile(fallback, (P, 1))
            p[:blocks] = _block_directions(dist, labels, blocks)
            consider(p)

    rng = rng_stream(seed, 91)
    for _ in range(restarts):
        labels = _random_partition(rng, N, K)
        blocks = labels.max() + 1
        p = np.tile(fallback, (P, 1))
        p[:blocks] = _block_directions(dist, labels, blocks)
        for _ in range(40):  # realign each producer to the atoms it wins
            utils = dist.atoms @ p.T
            win = utils >= utils.max(axis=1)[:, None] - ARGMAX_TIE_TOL
            share = win / win.sum(axis=1, keepdims=True)
            pull = (dist.weights[:, None] * share).T @ dist.atoms
            norms = np.linalg.norm(pull, axis=1)
            new_p = np.where(norms[:, None] > 0, pull / np.where(norms[:, None] > 0, norms[:, None], 1.0),
                             fallback[None, :])
            if np.array_equal(new_p, p):
                break
            p = new_p
        consider(p)

    objective, p, f = best
    residuals = np.abs(np.linalg.norm(p, axis=1) - 1.0)
    return WelfareSolution(criteria=p, objective=objective, shares=f, residuals=residuals,
                           certification=EXACT_ENUM if enumerated else LOCAL_SEARCH_LOWER_BOUND)


def theta_star(c: float) -> float:
    """Specialization threshold angle 2*arccos(2^(-1/c))."""
    if not c >= 1:
        raise ConfigError(f"cost exponent must be >= 1, got {c}")
    return 2.0 * math.acos(2.0 ** (-1.0 / c))


def closed_form_2user(c: float, beta: float, theta: float):
    """Optimal welfare for two equal-weight unit users at angle theta.

    Returns ``(value, regime, theta_star(c))``: below the threshold angle both
    producers share the mean-user direction, above it they specialize, one per
    user.
    """
    if not 0 < beta <= 1:
        raise ConfigError(f"discount out of (0,1]: {beta}")
    if not -1e-12 <= theta <= math.pi / 2 + 1e-12:
        raise ConfigError(f"user angle must lie in [0, pi/2], got {theta}")
    ts = theta_star(c)
    if theta < ts:
        return beta ** (1.0 / c) * math.cos(theta / 2.0), SHARED_DIRECTION, ts
    return (beta / 2.0) ** (1.0 / c), SPECIALIZED, ts


def min_norm_meet(dist: UserDistribution, pbar: np.ndarray) -> np.ndarray:
    """Minimum-norm nonnegative vector matching pbar's utility on every atom.

    Solves ``min ||p||  s.t.  <u, p> >= <u, pbar> for all support atoms u,
    p >= 0`` through its dual, a nonnegative least-squares problem in the
    atom multipliers; the recovered optimum is a nonnegative combination of
    atoms, so the sign constraint is automatically satisfied.
    """
    pbar = np.asarray(pbar, dtype=float)
    if pbar.shape != (dist.dimension,) or np.any(pbar < 0):
        raise ConfigError("target must be a nonnegative D-vector")
    U = dist.atoms
    lam, _ = nnls(U.T, pbar)
    p = U.T @ lam
    p[np.abs(p) < 1e-15] = 0.0
    slack = U @ p - U @ pbar
    if slack.min() < -FEAS_TOL or abs(lam @ slack) > FEAS_TOL:
        raise RuntimeError("projection failed its optimality check")
    return p


def welfare_upper_bound(c: float, beta: float) -> float:
    """No algorithm sustains per-round welfare above (beta/(1-beta))^(1/c)."""
    return naive_effort_cap(c, beta)


def naive_effort_bound(c: float, beta: float) -> float:
    """Best responses never exert effort above (beta/(1-beta))^(1/c)."""
    return naive_effort_cap(c, beta)
