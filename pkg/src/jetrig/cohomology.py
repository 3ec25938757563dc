"""Chevalley-Eilenberg complex for the representation rho_xi = {lam_xi, .}
and its homotopy operators.

For a linear reference momentum map and a linear bivector the representation
preserves homogeneous polynomial degree, so the complex splits into finite
blocks indexed by degree.  On each block the differentials are assembled as
matrices on the monomial basis and the homotopy operators are built by
Hodge-Laplacian linear algebra with respect to the Sobolev inner product:

    h0 = d0* D1^-1,   h1 = d1* D2^-1,   h2 = d2* D3^+,
    Dq = d_{q-1} d_{q-1}* + d_q* d_q.

Invertibility of D1 and D2 is exactly the vanishing of the first and second
cohomology, which negative-definiteness of the Killing form guarantees; a
singular block raises WhiteheadViolation.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ._basis import get_basis
from .errors import (
    DegreeMismatch,
    DegreeTooHigh,
    EquivarianceViolated,
    IndexOutOfRange,
    NotLinear,
    WhiteheadViolation,
)
from .jets import Jet, NormParams, ck_norm, ball_monomial_integral
from .lie_algebra import LieAlgebra
from .poisson import MomentumMap, PoissonBivector, bracket, equivariance_residual

_SINGULAR_REL_TOL = 1e-8


def _perm_sign_and_sorted(idx):
    """Sort an index tuple, tracking the permutation sign; None if repeated."""
    idx = list(idx)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return None, 0
    return tuple(idx), sign


class Cochain:
    """Alternating q-linear assignment of jets to basis index tuples.

    Values are stored on strictly increasing tuples; evaluation on permuted
    tuples applies the permutation sign.
    """

    __slots__ = ("q", "algebra", "values", "nvars", "degcap")

    def __init__(self, q: int, algebra: LieAlgebra, values: dict):
        if q < 0 or q > 3:
            raise DegreeTooHigh(f"cochain degree must be in 0..3, got {q}")
        self.q = q
        self.algebra = algebra
        slots = list(combinations(range(algebra.dim), q))
        sample = next(iter(values.values()), None)
        if sample is None:
            raise ValueError("cochain needs at least one value to fix the jet space")
        self.nvars = sample.nvars
        self.degcap = sample.degcap
        store = {}
        for key in slots:
            jet = values.get(key)
            store[key] = jet.with_cap(self.degcap) if jet is not None else Jet.zero(self.nvars, self.degcap)
        self.values = store

    @classmethod
    def zero(cls, q: int, algebra: LieAlgebra, nvars: int, degcap: int) -> "Cochain":
        z = Jet.zero(nvars, degcap)
        return cls(q, algebra, {key: z for key in combinations(range(algebra.dim), q)})

    def value(self, idx) -> Jet:
        """Alternating evaluation on an arbitrary index tuple."""
        idx = tuple(idx)
        if len(idx) != self.q:
            raise DegreeMismatch(f"expected {self.q} indices, got {len(idx)}")
        for i in idx:
            if not 0 <= i < self.algebra.dim:
                raise IndexOutOfRange(f"basis index {i} out of range")
        key, sign = _perm_sign_and_sorted(idx)
        if key is None:
            return Jet.zero(self.nvars, self.degcap)
        jet = self.values[key]
        return jet if sign == 1 else -jet

    def norm(self, params: NormParams) -> float:
        return max(ck_norm(j, params) for j in self.values.values())

    def map_values(self, fn) -> "Cochain":
        return Cochain(self.q, self.algebra, {k: fn(v) for k, v in self.values.items()})

    def __add__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.q, self.algebra,
                       {k: v + other.values[k] for k, v in self.values.items()})

    def __sub__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.q, self.algebra,
                       {k: v - other.values[k] for k, v in self.values.items()})

    def __mul__(self, scalar: float) -> "Cochain":
        return self.map_values(lambda j: j * scalar)

    __rmul__ = __mul__


def momentum_diff_cochain(mu: MomentumMap, lam: MomentumMap) -> Cochain:
    """The 1-cochain xi_i -> mu_i - lam_i."""
    diffs = mu.diff(lam)
    return Cochain(1, mu.algebra, {(i,): diffs[i] for i in range(mu.algebra.dim)})


def rho(xi_index: int, h: Jet, lam: MomentumMap, P: PoissonBivector) -> Jet:
    """Representation rho_{xi_i}(h) = {lam_i, h}."""
    if not 0 <= xi_index < lam.algebra.dim:
        raise IndexOutOfRange(f"basis index {xi_index} out of range")
    return bracket(lam.components[xi_index], h, P)


def delta(c: Cochain, lam: MomentumMap, P: PoissonBivector) -> Cochain:
    """Chevalley-Eilenberg differential on cochains of degree 0, 1 or 2."""
    alg = c.algebra
    cs = alg.c
    if c.q == 0:
        f = c.values[()]
        vals = {(i,): rho(i, f, lam, P) for i in range(alg.dim)}
        return Cochain(1, alg, vals)
    if c.q == 1:
        vals = {}
        for i, j in combinations(range(alg.dim), 2):
            out = rho(i, c.value((j,)), lam, P) - rho(j, c.value((i,)), lam, P)
            for p in range(alg.dim):
                if cs[i, j, p] != 0.0:
                    out = out - cs[i, j, p] * c.value((p,))
            vals[(i, j)] = out
        return Cochain(2, alg, vals)
    if c.q == 2:
        vals = {}
        for i, j, k in combinations(range(alg.dim), 3):
            out = (
                rho(i, c.value((j, k)), lam, P)
                - rho(j, c.value((i, k)), lam, P)
                + rho(k, c.value((i, j)), lam, P)
            )
            for p in range(alg.dim):
                if cs[i, j, p] != 0.0:
                    out = out - cs[i, j, p] * c.value((p, k))
                if cs[i, k, p] != 0.0:
                    out = out + cs[i, k, p] * c.value((p, j))
                if cs[j, k, p] != 0.0:
                    out = out - cs[j, k, p] * c.value((p, i))
            vals[(i, j, k)] = out
        return Cochain(3, alg, vals)
    raise DegreeTooHigh(f"differential implemented for degrees 0..2, got {c.q}")


# ----------------------------------------------------------------- blocks


class DegreeBlock:
    """Matrices of the complex restricted to one homogeneous degree."""

    __slots__ = (
        "degree", "dim", "slice", "rho_mats", "delta0", "delta1", "delta2",
        "h0", "h1", "h2", "gram", "ranks", "residuals",
    )

    def __init__(self, **kw):
        for k in self.__slots__:
            setattr(self, k, kw[k])

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "block_dim": self.dim,
            "ranks": self.ranks,
            "residuals": self.residuals,
        }


class HomotopySet:
    """Per-degree differentials and homotopy operators for a fixed linear
    reference momentum map and linear bivector."""

    def __init__(self, lam: MomentumMap, P: PoissonBivector, D: int,
                 equivariance_tol: float = 1e-9):
        if not lam.is_linear(tol=0.0):
            raise NotLinear("reference momentum map must be linear")
        if not P.is_linear(tol=0.0):
            raise NotLinear("bivector must be linear")
        res = equivariance_residual(lam, P)
        if res > equivariance_tol:
            raise EquivarianceViolated(
                f"reference map is not equivariant (residual {res:.3e})"
            )
        self.lam = lam
        self.P = P
        self.D = D
        self.algebra = lam.algebra
        self.blocks = [self._build_block(d) for d in range(D + 1)]

    # -- assembly ------------------------------------------------------

    def _build_block(self, d: int) -> DegreeBlock:
        m = self.algebra.dim
        n = self.lam.nvars
        basis = get_basis(n, self.D)
        lo, hi = int(basis.deg_start[d]), int(basis.deg_start[d + 1])
        B = hi - lo

        rho_mats = []
        for i in range(m):
            M = np.zeros((B, B))
            for col in range(B):
                mono = Jet(basis, _unit_vector(basis.size, lo + col))
                img = rho(i, mono, self.lam, self.P).with_cap(self.D)
                vec = img.coeffs
                outside = vec.copy()
                outside[lo:hi] = 0.0
                if np.abs(outside).max() > 1e-12:
                    raise NotLinear(
                        "representation does not preserve homogeneous degree; "
                        "reference data is not linear"
                    )
                M[:, col] = vec[lo:hi]
            rho_mats.append(M)

        cs = self.algebra.c
        slots2 = list(combinations(range(m), 2))
        slots3 = list(combinations(range(m), 3))

        # delta0 : C0 -> C1, slot-major stacking
        delta0 = np.vstack(rho_mats) if B else np.zeros((m * B, B))

        # delta1 : C1 -> C2
        delta1 = np.zeros((len(slots2) * B, m * B))
        for r_idx, (i, j) in enumerate(slots2):
            row = slice(r_idx * B, (r_idx + 1) * B)
            delta1[row, i * B:(i + 1) * B] += -rho_mats[j]
            delta1[row, j * B:(j + 1) * B] += rho_mats[i]
            for p in range(m):
                if cs[i, j, p] != 0.0:
                    delta1[row, p * B:(p + 1) * B] += -cs[i, j, p] * np.eye(B)

        # delta2 : C2 -> C3
        delta2 = np.zeros((len(slots3) * B, len(slots2) * B))
        for r_idx, (i, j, k) in enumerate(slots3):
            row = slice(r_idx * B, (r_idx + 1) * B)

            def add(colkey, M, row=row):
                skey, sign = _perm_sign_and_sorted(colkey)
                if skey is None:
                    return
                cidx = slots2.index(skey)
                delta2[row, cidx * B:(cidx + 1) * B] += sign * M

            add((j, k), rho_mats[i])
            add((i, k), -rho_mats[j])
            add((i, j), rho_mats[k])
            for p in range(m):
                if cs[i, j, p] != 0.0:
                    add((p, k), -cs[i, j, p] * np.eye(B))
                if cs[i, k, p] != 0.0:
                    add((p, j), cs[i, k, p] * np.eye(B))
                if cs[j, k, p] != 0.0:
                    add((p, i), -cs[j, k, p] * np.eye(B))

        gram = np.array(
            [
                [
                    ball_monomial_integral(
                        tuple(a + b for a, b in zip(basis.exponents[lo + u], basis.exponents[lo + v]))
                    )
                    for v in range(B)
                ]
                for u in range(B)
            ]
        )

        h0, h1, h2, residuals = self._solve_block(d, B, m, delta0, delta1, delta2, gram)

        r0 = np.linalg.matrix_rank(delta0) if delta0.size else 0
        r1 = np.linalg.matrix_rank(delta1) if delta1.size else 0
        r2 = np.linalg.matrix_rank(delta2) if delta2.size else 0
        ranks = {
            "delta0": int(r0), "delta1": int(r1), "delta2": int(r2),
            "dim_C1": m * B, "dim_C2": len(slots2) * B,
            "H1_dim": m * B - r0 - r1,
            "H2_dim": len(slots2) * B - r1 - r2,
        }
        return DegreeBlock(
            degree=d, dim=B, slice=(lo, hi), rho_mats=rho_mats,
            delta0=delta0, delta1=delta1, delta2=delta2,
            h0=h0, h1=h1, h2=h2, gram=gram, ranks=ranks, residuals=residuals,
        )

    def _solve_block(self, d, B, m, delta0, delta1, delta2, gram):
        if B == 0:
            z = np.zeros((0, 0))
            return z, z, z, {"dd0": 0.0, "dd1": 0.0, "hom1": 0.0, "hom2": 0.0}
        # orthonormalize the block coordinates: G = L L^T, v~ = (I x L^T) v
        L = np.linalg.cholesky(gram)
        Lt = L.T
        Lti = np.linalg.inv(Lt)

        def conj(A, s_out, s_in):
            return np.kron(np.eye(s_out), Lt) @ A @ np.kron(np.eye(s_in), Lti)

        n2 = m * (m - 1) // 2
        n3 = m * (m - 1) * (m - 2) // 6
        d0 = conj(delta0, m, 1)
        d1 = conj(delta1, n2, m)
        d2 = conj(delta2, n3, n2)

        lap1 = d0 @ d0.T + d1.T @ d1
        lap2 = d1 @ d1.T + d2.T @ d2
        for name, lap in (("D1", lap1), ("D2", lap2)):
            eigs = np.linalg.eigvalsh(lap)
            if eigs.size and eigs.min() <= _SINGULAR_REL_TOL * max(eigs.max(), 1.0):
                raise WhiteheadViolation(
                    f"degree-{d} block: Laplacian {name} is singular "
                    f"(min eigenvalue {eigs.min():.3e}); H1 = H2 = 0 fails"
                )
        h0t = np.linalg.solve(lap1, d0).T
        h1t = np.linalg.solve(lap2, d1).T
        lap3 = d2 @ d2.T
        h2t = (np.linalg.pinv(lap3, rcond=1e-12, hermitian=True) @ d2).T

        def back(A, s_out, s_in):
            return np.kron(np.eye(s_out), Lti) @ A @ np.kron(np.eye(s_in), Lt)

        h0 = back(h0t, 1, m)
        h1 = back(h1t, m, n2)
        h2 = back(h2t, n2, n3)

        dd0 = float(np.abs(delta1 @ delta0).max()) if delta0.size else 0.0
        dd1 = float(np.abs(delta2 @ delta1).max()) if delta1.size else 0.0
        hom1 = float(np.abs(delta0 @ h0 + h1 @ delta1 - np.eye(m * B)).max())
        hom2 = float(np.abs(delta1 @ h1 + h2 @ delta2 - np.eye(n2 * B)).max())
        residuals = {"dd0": dd0, "dd1": dd1, "hom1": hom1, "hom2": hom2}
        return h0, h1, h2, residuals

    # -- application ----------------------------------------------------

    def _slot_vectors(self, c: Cochain):
        """Per-degree stacked coefficient vectors of a cochain, slot-major."""
        slots = list(combinations(range(self.algebra.dim), c.q))
        out = []
        for blk in self.blocks:
            lo, hi = blk.slice
            vecs = [c.values[s].with_cap(self.D).coeffs[lo:hi] for s in slots]
            out.append(np.concatenate(vecs) if vecs else np.zeros(0))
        return out

    def _assemble(self, q_out: int, per_degree):
        basis = get_basis(self.lam.nvars, self.D)
        slots = list(combinations(range(self.algebra.dim), q_out))
        coeffs = {s: np.zeros(basis.size) for s in slots}
        for blk, vec in zip(self.blocks, per_degree):
            lo, hi = blk.slice
            B = blk.dim
            for s_idx, s in enumerate(slots):
                coeffs[s][lo:hi] = vec[s_idx * B:(s_idx + 1) * B]
        return Cochain(q_out, self.algebra,
                       {s: Jet(basis, coeffs[s]) for s in slots})

    def apply_h(self, c: Cochain) -> Cochain:
        """h0 on 1-cochains, h1 on 2-cochains; linear, degree-preserving."""
        if c.algebra is not self.algebra and c.algebra.dim != self.algebra.dim:
            raise DegreeMismatch("cochain belongs to a different algebra")
        if c.degcap > self.D:
            raise DegreeMismatch(
                f"cochain cap {c.degcap} exceeds the homotopy-set cap {self.D}"
            )
        if c.q == 1:
            mats = [blk.h0 for blk in self.blocks]
            q_out = 0
        elif c.q == 2:
            mats = [blk.h1 for blk in self.blocks]
            q_out = 1
        else:
            raise DegreeMismatch(f"apply_h expects a 1- or 2-cochain, got degree {c.q}")
        vecs = self._slot_vectors(c)
        return self._assemble(q_out, [M @ v for M, v in zip(mats, vecs)])

    def apply_h2(self, c: Cochain) -> Cochain:
        if c.q != 3:
            raise DegreeMismatch(f"apply_h2 expects a 3-cochain, got degree {c.q}")
        vecs = self._slot_vectors(c)
        return self._assemble(2, [blk.h2 @ v for blk, v in zip(self.blocks, vecs)])

    # -- reporting ------------------------------------------------------

    def worst_residuals(self) -> dict:
        keys = ("dd0", "dd1", "hom1", "hom2")
        return {k: max(blk.residuals[k] for blk in self.blocks) for k in keys}

    def whitehead_ok(self) -> bool:
        return all(
            blk.ranks["H1_dim"] == 0 and blk.ranks["H2_dim"] == 0
            for blk in self.blocks
        )

    def summary(self) -> dict:
        """Block dimensions, ranks and residuals, JSON-ready."""
        return {
            "degcap": self.D,
            "algebra_dim": self.algebra.dim,
            "blocks": [blk.summary() for blk in self.blocks],
            "worst_residuals": self.worst_residuals(),
            "whitehead_ok": self.whitehead_ok(),
        }


def _unit_vector(size, idx):
    v = np.zeros(size)
    v[idx] = 1.0
    return v


def build_blocks(lam: MomentumMap, P: PoissonBivector, D: int, **kw) -> HomotopySet:
    return HomotopySet(lam, P, D, **kw)


def homotopy_norm_bound(hs: HomotopySet, trials: int = 300, seed: int = 0,
                        ks=(1, 2, 3), radii=(0.25, 0.5, 1.0)) -> dict:
    """Fit the constants C_k in ||h_j(S)||_{k,r} <= C_k ||S||_{k+s,r} over
    random cochains; reports per-radius sups and their spread.  The shift is
    s = [n/2] + 1."""
    from .sampling import random_cochain  # local import to avoid a cycle

    rng = np.random.default_rng(seed)
    n = hs.lam.nvars
    s = n // 2 + 1
    fits = {}
    for j, q in ((0, 1), (1, 2)):
        for k in ks:
            for r in radii:
                fits[(j, k, r)] = 0.0
    for _ in range(trials):
        for j, q in ((0, 1), (1, 2)):
            c = random_cochain(rng, hs.algebra, q, n, hs.D)
            out = hs.apply_h(c)
            for k in ks:
                for r in radii:
                    den = c.norm(NormParams(k + s, r))
                    if den == 0.0:
                        continue
                    ratio = out.norm(NormParams(k, r)) / den
                    key = (j, k, r)
                    if ratio > fits[key]:
                        fits[key] = ratio
    spread = {}
    for j in (0, 1):
        for k in ks:
            per_r = [fits[(j, k, r)] for r in radii if fits[(j, k, r)] > 0.0]
            if per_r:
                spread[f"h{j}_k{k}"] = max(per_r) / min(per_r)
    return {
        "s": s,
        "constants": {f"h{j}_k{k}_r{r}": fits[(j, k, r)] for (j, k, r) in fits},
        "radius_spread": spread,
    }
