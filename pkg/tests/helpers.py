"""Shared construction helpers for the test suite."""

import numpy as np

from creatorgame import GameConfig, UserDistribution


def point_mass(dimension: int = 1) -> UserDistribution:
    atom = np.ones((1, dimension)) / np.sqrt(dimension)
    return UserDistribution(atom, np.ones(1))


def two_users(theta: float, weights=(0.5, 0.5)) -> UserDistribution:
    atoms = np.array([[1.0, 0.0], [np.cos(theta), np.sin(theta)]])
    return UserDistribution(atoms, np.asarray(weights, dtype=float))


def make_config(P=2, D=1, T=3, c=1.0, beta=0.5, gamma=0.1, eta=0.2, users=None) -> GameConfig:
    if users is None:
        users = point_mass(D)
    rates = (float(eta),) * T if np.isscalar(eta) else tuple(float(x) for x in eta)
    return GameConfig(producers=P, dimension=D, horizon=T, cost_exponent=float(c),
                      discount=float(beta), exploration=float(gamma),
                      learning_rates=rates, users=users)


def random_distribution(rng, dimension: int, support: int) -> UserDistribution:
    atoms = np.abs(rng.standard_normal((support, dimension))) + 1e-9
    weights = rng.dirichlet(np.ones(support))
    return UserDistribution(atoms, weights)


def random_unit_direction(rng, dimension: int) -> np.ndarray:
    v = np.abs(rng.standard_normal(dimension)) + 1e-12
    return v / np.linalg.norm(v)
