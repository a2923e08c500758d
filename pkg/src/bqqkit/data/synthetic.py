"""Seeded synthetic matrix sources."""

import numpy as np

from ..errors import MatrixError
from ..matrix import make_rng
from .tsplib import TspInstance

CITY_GRID = 1000.0


def _check_dims(*dims: int):
    if min(dims) < 1:
        msg = f"dimensions must be positive, got {dims}"
        raise MatrixError(msg)


def gen_gaussian(m: int, n: int, seed: int) -> np.ndarray:
    """Independent standard normal entries."""
    _check_dims(m, n)
    return make_rng(seed).standard_normal((m, n))


def gen_lowrank_noise(m: int, n: int, rank: int, noise_std: float, seed: int) -> np.ndarray:
    """Sum of ``rank`` outer products of standard normal vectors plus Gaussian noise."""
    _check_dims(m, n, rank)
    if rank > min(m, n):
        msg = f"rank {rank} exceeds min({m}, {n})"
        raise MatrixError(msg)
    if noise_std < 0:
        msg = f"noise_std must be non-negative, got {noise_std}"
        raise MatrixError(msg)
    rng = make_rng(seed)
    left = rng.standard_normal((m, rank))
    right = rng.standard_normal((rank, n))
    noise = rng.standard_normal((m, n))
    return left @ right + noise_std * noise


def gen_random_cities(n: int, seed: int) -> TspInstance:
    """``n`` cities uniform on a [0, 1000) square."""
    if n < 2:  # noqa: PLR2004
        msg = f"need at least 2 cities, got {n}"
        raise MatrixError(msg)
    coords = make_rng(seed).random((n, 2)) * CITY_GRID
    return TspInstance(name=f"random{n}-{seed}", node_coords=coords)
