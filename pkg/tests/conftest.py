import numpy as np
import pytest

from iocut.iomodel import IoConfig, Session


def rank_points(n: int, dist: str, rng: np.random.Generator) -> np.ndarray:
    """Rank-space points ``[id, x, y, z]`` with distinct ranks per axis."""
    ids = np.arange(n)
    if dist == "chain":
        return np.stack([ids, ids, ids, ids], 1)
    if dist == "antichain":
        return np.stack([ids, ids, n - 1 - ids, rng.permutation(n)], 1)
    return np.stack([ids] + [rng.permutation(n) for _ in range(3)], 1)


def rank_queries(nq: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Apex rows ``[id, x, y, z]`` anywhere in ``[-1, n]^3``."""
    q = np.empty((nq, 4), dtype=np.int64)
    q[:, 0] = np.arange(nq)
    q[:, 1:] = rng.integers(-1, n + 1, size=(nq, 3))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_session():
    return Session(IoConfig(16, 4))


@pytest.fixture
def session():
    return Session(IoConfig(1024, 16))
