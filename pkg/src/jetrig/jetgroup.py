"""The group of origin-fixing local diffeomorphisms as jet maps Id + chi,
with scaled-radius bookkeeping, time-1 Hamiltonian flows and the right
action on momentum maps.

Composition, inversion and flows are exact through the truncation degree:
for a linear bivector every operation here is compatible with the degree
filtration, so coefficients below the cap never depend on discarded ones.
Residual checks can still be restricted below an explicit trust floor.
"""

from __future__ import annotations

import math

import numpy as np

from ._basis import get_basis
from .errors import (
    DimensionMismatch,
    FlowNotFixingOrigin,
    NotInvertible,
    RadiusExhausted,
    SeriesNotConverged,
    SmallnessViolated,
)
from .jets import Jet, NormParams, ck_norm
from .poisson import MomentumMap, PoissonBivector, bracket

_LINEAR_DET_TOL = 1e-12


class RadiusLedger:
    """Mutable record of the shrinking working radius.

    Every composition charges rho' <= rho (1 - c ||xi||_1) where xi is the
    displacement of the inner map; inversion charges the half-rate version.
    The log keeps one row per shrink event so the budget is auditable."""

    def __init__(self, rho: float = 1.0, c: float = 2.0, floor: float = 0.0):
        if not (0.0 < rho <= 1.0):
            raise ValueError(f"initial radius must be in (0, 1], got {rho}")
        self.rho = rho
        self.c = c
        self.floor = floor
        self.log = []

    def _apply(self, op: str, allowed: float, target=None):
        new = allowed if target is None else target
        if new > allowed + 1e-15:
            raise RadiusExhausted(
                f"{op}: scheduled radius {new:.6f} exceeds the law's allowance {allowed:.6f}"
            )
        if new < self.floor:
            raise RadiusExhausted(
                f"{op}: radius {new:.6f} would fall below the floor {self.floor:.6f}"
            )
        self.log.append({"op": op, "rho_before": self.rho, "rho_after": new})
        self.rho = new
        return new

    def shrink_compose(self, inner_norm1: float, target=None):
        factor = 1.0 - self.c * inner_norm1
        if factor <= 0.0:
            raise RadiusExhausted(
                f"compose: displacement norm {inner_norm1:.3e} exhausts the radius at c={self.c}"
            )
        return self._apply("compose", self.rho * factor, target)

    def shrink_invert(self, chi_norm1: float, target=None):
        if chi_norm1 >= 1.0 / self.c:
            raise SmallnessViolated(
                f"invert: ||phi - Id||_1 = {chi_norm1:.3e} >= 1/c = {1.0 / self.c:.3e}"
            )
        return self._apply("invert", self.rho * (1.0 - 0.5 * self.c * chi_norm1), target)


class JetMap:
    """Local diffeomorphism Id + chi with chi(0) = 0 and invertible linear part."""

    __slots__ = ("chi",)

    def __init__(self, chi):
        chi = tuple(chi)
        n = len(chi)
        cap = max(c.degcap for c in chi)
        chi = tuple(c.with_cap(cap) for c in chi)
        for c in chi:
            if c.nvars != n:
                raise DimensionMismatch("jet map needs one component per variable")
            if c.coeffs[0] != 0.0:
                raise FlowNotFixingOrigin("jet map must fix the origin (chi(0) = 0)")
        if abs(np.linalg.det(np.eye(n) + _linear_matrix(chi))) < _LINEAR_DET_TOL:
            raise NotInvertible("linear part Id + Dchi(0) is singular")
        self.chi = chi

    # ------------------------------------------------------------------

    @classmethod
    def identity(cls, n: int, degcap: int) -> "JetMap":
        return cls(tuple(Jet.zero(n, degcap) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.chi)

    @property
    def degcap(self) -> int:
        return self.chi[0].degcap

    def components(self):
        """Full components x_i + chi_i."""
        return tuple(
            Jet.coordinate(self.n, self.degcap, i) + self.chi[i] for i in range(self.n)
        )

    def displacement_norm(self, params: NormParams) -> float:
        return max(ck_norm(c, params) for c in self.chi)

    def is_identity(self, tol: float = 0.0) -> bool:
        return all(c.max_abs() <= tol for c in self.chi)

    def with_cap(self, degcap: int) -> "JetMap":
        return JetMap(tuple(c.with_cap(degcap) for c in self.chi))

    def to_dict(self) -> dict:
        return {
            "nvars": self.n,
            "degcap": self.degcap,
            "chi": [c.to_dict() for c in self.chi],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JetMap":
        return cls(tuple(Jet.from_dict(j) for j in d["chi"]))


def _linear_matrix(chi) -> np.ndarray:
    n = len(chi)
    L = np.zeros((n, n))
    basis = chi[0].basis
    for i, c in enumerate(chi):
        for j in range(n):
            e = tuple(int(v == j) for v in range(n))
            L[i, j] = c.coeffs[basis.index[e]]
    return L


def substitute(f: Jet, phi: JetMap) -> Jet:
    """f composed with Id + chi, truncated at max(f.degcap, phi.degcap).

    Origin-fixing maps are filtration-compatible, so the result is the exact
    jet of the composition."""
    if f.nvars != phi.n:
        raise DimensionMismatch("substitution needs matching variable counts")
    cap = max(f.degcap, phi.degcap)
    basis = get_basis(f.nvars, cap)
    comps = [
        (Jet.coordinate(f.nvars, cap, i) + phi.chi[i].with_cap(cap)).coeffs
        for i in range(f.nvars)
    ]
    fc = f.with_cap(cap)
    # cache powers of each component as needed
    pows = [{0: None} for _ in range(f.nvars)]
    one = np.zeros(basis.size)
    one[0] = 1.0

    def power(i, e):
        tab = pows[i]
        if e in tab and tab[e] is not None:
            return tab[e]
        if e == 0:
            tab[0] = one
            return one
        prev = power(i, e - 1)
        cur = basis.mul(prev, comps[i])
        tab[e] = cur
        return cur

    out = np.zeros(basis.size)
    for j in np.nonzero(fc.coeffs)[0]:
        exp = basis.exponents[j]
        term = None
        for i, e in enumerate(exp):
            if e == 0:
                continue
            p = power(i, e)
            term = p if term is None else basis.mul(term, p)
        if term is None:
            term = one
        out += fc.coeffs[j] * term
    return Jet(basis, out)


def compose(phi: JetMap, psi: JetMap, ledger: RadiusLedger = None,
            target_radius=None) -> JetMap:
    """phi o psi (psi applied first); ledger charges the inner displacement."""
    if phi.n != psi.n:
        raise DimensionMismatch("jet maps must share the ambient space")
    if ledger is not None:
        ledger.shrink_compose(
            psi.displacement_norm(NormParams(1, ledger.rho)), target_radius
        )
    cap = max(phi.degcap, psi.degcap)
    chi = tuple(
        psi.chi[i].with_cap(cap) + substitute(phi.chi[i], psi).with_cap(cap)
        for i in range(phi.n)
    )
    return JetMap(chi)


def invert(phi: JetMap, ledger: RadiusLedger = None, target_radius=None) -> JetMap:
    """Inverse jet map: compose(phi, invert(phi)) = Id exactly through degcap."""
    n, D = phi.n, phi.degcap
    L = _linear_matrix(phi.chi)
    A = np.eye(n) + L
    if abs(np.linalg.det(A)) < _LINEAR_DET_TOL:
        raise NotInvertible("linear part Id + Dchi(0) is singular")
    if ledger is not None:
        ledger.shrink_invert(
            phi.displacement_norm(NormParams(1, ledger.rho)), target_radius
        )
    Ainv = np.linalg.inv(A)
    coords = [Jet.coordinate(n, D, i) for i in range(n)]

    def linear_image(M, jets):
        return tuple(
            sum((M[i, j] * jets[j] for j in range(n)), Jet.zero(n, D))
            for i in range(n)
        )

    # split phi = A o (Id + eta) with eta of lowest degree >= 2
    Lx = linear_image(L, coords)
    tail = tuple(phi.chi[i] - Lx[i] for i in range(n))
    eta = linear_image(Ainv, tail)

    # (Id + eta)^-1 = Id + zeta via zeta <- -eta o (Id + zeta);
    # each pass fixes one more degree, so D-1 passes are exact
    zeta = tuple(Jet.zero(n, D) for _ in range(n))
    for _ in range(max(D - 1, 1)):
        zmap = JetMap(zeta)
        zeta = tuple(-substitute(eta[i], zmap) for i in range(n))

    # phi^-1 = (Id + zeta) o A^-1
    Ainv_chi = linear_image(Ainv - np.eye(n), coords)
    Ainv_map = JetMap(Ainv_chi)
    inv_chi = tuple(
        Ainv_chi[i] + substitute(zeta[i], Ainv_map) for i in range(n)
    )
    return JetMap(inv_chi)


def time1_flow(g: Jet, P: PoissonBivector, max_terms: int = 80,
               tail_tol: float = 1e-14) -> JetMap:
    """Time-1 flow of the Hamiltonian vector field of g, as the Lie series
    x_i + sum_{k>=1} X_g^k(x_i) / k!.

    For a linear bivector and a generator with vanishing constant and linear
    part the series terminates exactly at the truncation degree; otherwise it
    is cut when the running term drops below ``tail_tol``."""
    n, D = P.n, max(g.degcap, P.degcap)
    field = [bracket(g, Jet.coordinate(n, D, i), P) for i in range(n)]
    for v in field:
        if abs(v.coeffs[0]) > 0.0:
            raise FlowNotFixingOrigin("Hamiltonian field does not vanish at the origin")
    chi = [Jet.zero(n, D) for _ in range(n)]
    cur = list(field)
    fact = 1.0
    for k in range(1, max_terms + 1):
        fact *= k
        contrib = 0.0
        for i in range(n):
            term = cur[i] * (1.0 / fact)
            chi[i] = chi[i] + term
            contrib = max(contrib, term.max_abs())
        if all(c.is_zero() for c in cur):
            break
        if contrib < tail_tol and k > 1:
            break
        cur = [bracket(g, cur[i], P) for i in range(n)]
    else:
        last = max(c.max_abs() for c in cur) / fact
        if last >= tail_tol:
            raise SeriesNotConverged(
                f"flow series still has terms of size {last:.3e} after {max_terms} terms"
            )
    return JetMap(tuple(chi))


def pullback(mu: MomentumMap, phi: JetMap, ledger: RadiusLedger = None,
             target_radius=None) -> MomentumMap:
    """Right action mu . phi = mu o phi, componentwise."""
    if ledger is not None:
        ledger.shrink_compose(
            phi.displacement_norm(NormParams(1, ledger.rho)), target_radius
        )
    return MomentumMap(
        tuple(substitute(c, phi) for c in mu.components), mu.algebra
    )


def pullback_jet(f: Jet, phi: JetMap) -> Jet:
    return substitute(f, phi)


def poisson_map_residual(phi: JetMap, P: PoissonBivector,
                         params: NormParams = NormParams(0, 1.0),
                         floor=None) -> float:
    """Max over i<j of ||{phi_i, phi_j} - Pi_ij o phi||, optionally measured
    only below a trust floor degree."""
    comps = phi.components()
    worst = 0.0
    for i in range(phi.n):
        for j in range(i + 1, phi.n):
            lhs = bracket(comps[i], comps[j], P)
            rhs = substitute(P.entry(i, j), phi)
            diff = lhs - rhs
            if floor is not None:
                diff = Jet(diff.basis, diff.basis.truncate(diff.coeffs, floor))
            worst = max(worst, ck_norm(diff, params))
    return worst
