"""Seeded random generators shared by the test suites and the CLI verify
subcommands.  All randomness flows through an explicit numpy Generator so
runs are bit-reproducible under a fixed seed."""

from __future__ import annotations

import numpy as np

from ._basis import get_basis
from .jets import Jet
from .lie_algebra import LieAlgebra


def random_jet(rng, n: int, D: int, low_deg: int = 0, high_deg=None,
               scale: float = 1.0) -> Jet:
    """Dense jet with uniform(-1, 1) coefficients on degrees low..high."""
    basis = get_basis(n, D)
    high = D if high_deg is None else min(high_deg, D)
    c = rng.uniform(-1.0, 1.0, size=basis.size) * scale
    mask = (basis.degrees >= low_deg) & (basis.degrees <= high)
    c[~mask] = 0.0
    return Jet(basis, c)


def random_generator_poly(rng, n: int, D: int, degrees=(2, 3), scale: float = 1.0,
                          normalize_norm=None) -> Jet:
    """Hamiltonian generator: zero constant and linear part.

    When ``normalize_norm`` (a NormParams) is given the jet is rescaled to
    unit norm before applying ``scale``, so ``scale`` fixes the size."""
    from .jets import ck_norm

    g = random_jet(rng, n, D, low_deg=min(degrees), high_deg=max(degrees), scale=1.0)
    if normalize_norm is not None:
        nrm = ck_norm(g, normalize_norm)
        if nrm > 0.0:
            g = g * (1.0 / nrm)
    return g * scale


def random_chi(rng, n: int, D: int, scale: float = 1.0, low_deg: int = 2):
    """Componentwise random displacement with zero constant and linear part."""
    return tuple(random_jet(rng, n, D, low_deg=low_deg, scale=scale) for _ in range(n))


def random_cochain(rng, algebra: LieAlgebra, q: int, n: int, D: int,
                   scale: float = 1.0, low_deg: int = 0):
    from itertools import combinations

    from .cohomology import Cochain

    vals = {
        key: random_jet(rng, n, D, low_deg=low_deg, scale=scale)
        for key in combinations(range(algebra.dim), q)
    }
    return Cochain(q, algebra, vals)


def ball_points(rng, n: int, count: int, r: float) -> np.ndarray:
    """Uniform sample of the closed ball of radius r."""
    x = rng.normal(size=(count, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    u = rng.random(count) ** (1.0 / n)
    return x * (r * u)[:, None]
