"""Seeded random generators for observables, states, and Lipschitz tables.

Every routine takes either an integer seed or a ``numpy.random.Generator``,
so callers that need reproducibility pass a seed once and thread the
generator through.
"""

from __future__ import annotations

import numpy as np

from .functions import FunctionTable
from .linalg import HermitianObservable, UnitaryMap

RngLike = int | np.random.Generator | None


def as_rng(seed: RngLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_hermitian(dim: int, seed: RngLike = None, scale: float = 1.0) -> HermitianObservable:
    rng = as_rng(seed)
    g = complex_gaussian(rng, dim, dim)
    return HermitianObservable(scale * (g + g.conj().T) / 2.0)


def random_unitary(dim: int, seed: RngLike = None, antiunitary: bool = False) -> UnitaryMap:
    """Haar-distributed unitary via QR with the standard phase fix."""
    rng = as_rng(seed)
    q, r = np.linalg.qr(complex_gaussian(rng, dim, dim))
    d = np.diag(r)
    return UnitaryMap(q * (d / np.abs(d)), antiunitary=antiunitary)


def random_pure_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    x = complex_gaussian(rng, dim)
    return x / np.linalg.norm(x)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Wishart-style density matrix ``G G* / tr(G G*)`` as a plain array."""
    g = complex_gaussian(rng, dim, dim)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_lipschitz_values(
    locations, seed: RngLike = None, constant: float = 1.0
) -> np.ndarray:
    """Random values on sorted locations with slopes bounded by ``constant``."""
    rng = as_rng(seed)
    xs = np.asarray(locations, dtype=np.float64)
    vals = np.empty_like(xs)
    vals[0] = rng.uniform(-1.0, 1.0)
    for i in range(1, len(xs)):
        slope = rng.uniform(-constant, constant)
        vals[i] = vals[i - 1] + slope * (xs[i] - xs[i - 1])
    return vals


def random_lipschitz_table(
    locations, seed: RngLike = None, constant: float = 1.0
) -> FunctionTable:
    vals = random_lipschitz_values(locations, seed, constant)
    return FunctionTable.from_values(locations, vals, lipschitz_bound=constant)


def random_spectrum(
    n: int,
    seed: RngLike = None,
    low: float = 0.0,
    high: float = 10.0,
    min_gap: float = 0.05,
    max_tries: int = 1000,
) -> np.ndarray:
    """Sorted distinct points in [low, high] with pairwise gaps >= min_gap."""
    rng = as_rng(seed)
    for _ in range(max_tries):
        pts = np.sort(rng.uniform(low, high, size=n))
        if n < 2 or np.diff(pts).min() >= min_gap:
            return pts
    raise RuntimeError(f"could not draw a spectrum with min gap {min_gap} in {max_tries} tries")


def random_commuting_pair(
    dim: int,
    seed: RngLike = None,
    distinct_a: int | None = None,
) -> tuple[HermitianObservable, HermitianObservable]:
    """Simultaneously diagonalizable pair; A's spectrum may repeat values."""
    rng = as_rng(seed)
    u = random_unitary(dim, rng).matrix
    pool = rng.uniform(-3.0, 3.0, size=distinct_a or max(2, dim - 1))
    a_vals = rng.choice(pool, size=dim)
    b_vals = rng.uniform(-3.0, 3.0, size=dim)
    a = HermitianObservable(u @ np.diag(a_vals.astype(complex)) @ u.conj().T)
    b = HermitianObservable(u @ np.diag(b_vals.astype(complex)) @ u.conj().T)
    return a, b
