"""Poisson bivectors, brackets, Hamiltonian vector fields and momentum maps.

Bracket convention, fixed once for the whole package:

    {x_i, x_j} = sum_k c_{ij}^k x_k        (linear structure on the dual)
    {f, g}     = sum_{i<j} Pi_ij (d_i f d_j g - d_j f d_i g)

Momentum maps are stored componentwise in the chosen basis; their norm is
the max of the component norms.
"""

from __future__ import annotations

import numpy as np

from ._basis import get_basis
from .errors import DimensionMismatch
from .jets import Jet, NormParams, ck_norm
from .lie_algebra import LieAlgebra

JACOBI_JET_TOL = 1e-10


class PoissonBivector:
    """Antisymmetric array of jets Pi_ij; only i < j is stored."""

    __slots__ = ("n", "degcap", "_entries")

    def __init__(self, n: int, degcap: int, entries: dict):
        self.n = n
        self.degcap = degcap
        zero = Jet.zero(n, degcap)
        store = {}
        for (i, j), jet in entries.items():
            if not (0 <= i < j < n):
                raise DimensionMismatch(f"entry index ({i},{j}) must satisfy 0 <= i < j < n")
            if jet.nvars != n:
                raise DimensionMismatch("bivector entries must live on the ambient space")
            store[(i, j)] = jet.with_cap(degcap)
        for i in range(n):
            for j in range(i + 1, n):
                store.setdefault((i, j), zero)
        self._entries = store

    def entry(self, i: int, j: int) -> Jet:
        """Pi_ij with antisymmetric extension; Pi_ii = 0."""
        if i == j:
            return Jet.zero(self.n, self.degcap)
        if i < j:
            return self._entries[(i, j)]
        return -self._entries[(j, i)]

    def is_linear(self, tol: float = 0.0) -> bool:
        for jet in self._entries.values():
            off = jet - jet.degree_part(1)
            if off.max_abs() > tol:
                return False
        return True

    def norm(self, params: NormParams) -> float:
        vals = [ck_norm(j, params) for j in self._entries.values()]
        return max(vals) if vals else 0.0

    def jacobi_residual(self) -> float:
        """Max coefficient of the cyclic sum {{x_i,x_j},x_k} over all triples."""
        worst = 0.0
        n, D = self.n, self.degcap
        coords = [Jet.coordinate(n, D, i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    cyc = (
                        bracket(bracket(coords[i], coords[j], self), coords[k], self)
                        + bracket(bracket(coords[j], coords[k], self), coords[i], self)
                        + bracket(bracket(coords[k], coords[i], self), coords[j], self)
                    )
                    worst = max(worst, cyc.max_abs())
        return worst


def linear_poisson(g: LieAlgebra, degcap: int = 6) -> PoissonBivector:
    """Linear structure Pi_ij = sum_k c_ij^k x_k on the dual of the algebra."""
    n = g.dim
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            entries[(i, j)] = Jet.from_terms(
                n, degcap,
                {tuple(int(v == k) for v in range(n)): g.c[i, j, k] for k in range(n)},
            )
    P = PoissonBivector(n, degcap, entries)
    res = P.jacobi_residual()
    if res > JACOBI_JET_TOL:
        raise DimensionMismatch(
            f"linear bivector violates the Jacobi identity (residual {res:.3e}); "
            "structure constants are inconsistent"
        )
    return P


def bracket(f: Jet, g: Jet, P: PoissonBivector) -> Jet:
    """{f, g} truncated at max(f.degcap, g.degcap)."""
    if f.nvars != P.n or g.nvars != P.n:
        raise DimensionMismatch("bracket arguments must live on the bivector's space")
    cap = max(f.degcap, g.degcap)
    basis = get_basis(P.n, cap)
    acc = np.zeros(basis.size)
    fc = f.with_cap(cap)
    gc = g.with_cap(cap)
    dfs = [basis.diff(fc.coeffs, i) for i in range(P.n)]
    dgs = [basis.diff(gc.coeffs, i) for i in range(P.n)]
    for i in range(P.n):
        for j in range(i + 1, P.n):
            pij = P.entry(i, j).with_cap(cap).coeffs
            if not pij.any():
                continue
            term = basis.mul(dfs[i], dgs[j]) - basis.mul(dfs[j], dgs[i])
            if term.any():
                acc += basis.mul(pij, term)
    return Jet(basis, acc)


def hamiltonian_vf(g: Jet, P: PoissonBivector):
    """Components of X_g = {g, .} applied to the coordinates."""
    coords = [Jet.coordinate(P.n, g.degcap, i) for i in range(P.n)]
    return tuple(bracket(g, x, P) for x in coords)


class MomentumMap:
    """Component jets (one per algebra basis element) plus the algebra."""

    __slots__ = ("components", "algebra")

    def __init__(self, components, algebra: LieAlgebra):
        components = tuple(components)
        if len(components) != algebra.dim:
            raise DimensionMismatch(
                f"momentum map needs {algebra.dim} components, got {len(components)}"
            )
        n = components[0].nvars
        cap = max(c.degcap for c in components)
        self.components = tuple(c.with_cap(cap) for c in components)
        for c in self.components:
            if c.nvars != n:
                raise DimensionMismatch("momentum map components must share the ambient space")
        self.algebra = algebra

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    @property
    def degcap(self) -> int:
        return self.components[0].degcap

    def norm(self, params: NormParams) -> float:
        return max(ck_norm(c, params) for c in self.components)

    def diff(self, other: "MomentumMap"):
        """Componentwise difference, as a tuple of jets."""
        return tuple(a - b for a, b in zip(self.components, other.components))

    def is_linear(self, tol: float = 0.0) -> bool:
        return all((c - c.degree_part(1)).max_abs() <= tol for c in self.components)

    def to_dict(self, algebra_ref: str = "") -> dict:
        return {
            "algebra": algebra_ref,
            "components": [c.to_dict() for c in self.components],
        }

    @classmethod
    def from_dict(cls, d: dict, algebra: LieAlgebra) -> "MomentumMap":
        return cls([Jet.from_dict(j) for j in d["components"]], algebra)


def identity_momentum(algebra: LieAlgebra, degcap: int) -> MomentumMap:
    """The reference map with components x_i; equivariant for the linear
    structure built from the same algebra."""
    n = algebra.dim
    return MomentumMap(
        [Jet.coordinate(n, degcap, i) for i in range(n)], algebra
    )


def equivariance_residual(mu: MomentumMap, P: PoissonBivector,
                          params: NormParams = NormParams(0, 1.0)) -> float:
    """Max over i<j of ||{mu_i, mu_j} - sum_p c_ij^p mu_p||."""
    alg = mu.algebra
    worst = 0.0
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            lhs = bracket(mu.components[i], mu.components[j], P)
            for p in range(alg.dim):
                cijp = alg.c[i, j, p]
                if cijp != 0.0:
                    lhs = lhs - cijp * mu.components[p]
            worst = max(worst, ck_norm(lhs, params))
    return worst
