"""Shared monomial-basis infrastructure for truncated polynomial jets.

A basis enumerates the exponent multi-indices of total degree <= D in n
variables, ordered by total degree and then lexicographically, so degree
truncation is a suffix zero-out.  It carries precomputed index tables for
the hot operations: truncated multiplication, partial derivatives and
point evaluation.  Bases are cached per (n, D) and shared by every jet.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np


def _degree_exponents(n, d):
    seen = set()
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        seen.add(tuple(e))
    return sorted(seen)


class MonomialBasis:
    """Exponent enumeration plus index tables for one (nvars, degcap) pair."""

    def __init__(self, n: int, D: int):
        if n < 1 or D < 0:
            raise ValueError("need nvars >= 1 and degcap >= 0")
        self.n = n
        self.D = D
        exps = []
        self.deg_start = np.zeros(D + 2, dtype=np.int64)
        for d in range(D + 1):
            self.deg_start[d] = len(exps)
            exps.extend(_degree_exponents(n, d))
        self.deg_start[D + 1] = len(exps)
        self.exponents = exps
        self.size = len(exps)
        self.index = {e: i for i, e in enumerate(exps)}
        self.degrees = np.array([sum(e) for e in exps], dtype=np.int64)
        self._mul_table = None
        self._diff_tables = None
        self._lifts = {}

    def __repr__(self):
        return f"MonomialBasis(n={self.n}, D={self.D}, size={self.size})"

    # ------------------------------------------------------------------ tables

    @property
    def mul_table(self):
        """Index triples (ia, ib, iout) for every product that survives the cap."""
        if self._mul_table is None:
            ia, ib, io = [], [], []
            for a, ea in enumerate(self.exponents):
                da = int(self.degrees[a])
                for b, eb in enumerate(self.exponents):
                    if da + self.degrees[b] > self.D:
                        continue
                    ia.append(a)
                    ib.append(b)
                    io.append(self.index[tuple(x + y for x, y in zip(ea, eb))])
            self._mul_table = (
                np.asarray(ia, dtype=np.int64),
                np.asarray(ib, dtype=np.int64),
                np.asarray(io, dtype=np.int64),
            )
        return self._mul_table

    @property
    def diff_tables(self):
        if self._diff_tables is None:
            tabs = []
            for i in range(self.n):
                src, dst, fac = [], [], []
                for j, e in enumerate(self.exponents):
                    if e[i] > 0:
                        src.append(j)
                        f = list(e)
                        f[i] -= 1
                        dst.append(self.index[tuple(f)])
                        fac.append(float(e[i]))
                tabs.append(
                    (
                        np.asarray(src, dtype=np.int64),
                        np.asarray(dst, dtype=np.int64),
                        np.asarray(fac),
                    )
                )
            self._diff_tables = tabs
        return self._diff_tables

    # ------------------------------------------------------------------ ops

    def mul(self, ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
        ia, ib, io = self.mul_table
        return np.bincount(io, weights=ca[ia] * cb[ib], minlength=self.size)

    def diff(self, c: np.ndarray, i: int) -> np.ndarray:
        src, dst, fac = self.diff_tables[i]
        out = np.zeros(self.size)
        out[dst] = c[src] * fac
        return out

    def truncate(self, c: np.ndarray, dmax: int) -> np.ndarray:
        out = c.copy()
        cut = min(dmax, self.D)
        if cut < 0:
            out[:] = 0.0
        else:
            out[self.deg_start[cut + 1]:] = 0.0
        return out

    def lift_indices(self, bigger: "MonomialBasis") -> np.ndarray:
        """Positions of this basis's exponents inside a larger-cap basis."""
        key = (bigger.n, bigger.D)
        if key not in self._lifts:
            if bigger.n != self.n or bigger.D < self.D:
                raise ValueError("lift target must share nvars and have cap >= ours")
            self._lifts[key] = np.asarray(
                [bigger.index[e] for e in self.exponents], dtype=np.int64
            )
        return self._lifts[key]

    def monomial_matrix(self, Z: np.ndarray) -> np.ndarray:
        """Matrix M with M[p, j] = z_p ** exponent_j for evaluation points Z."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        P = Z.shape[0]
        pw = []
        for i in range(self.n):
            col = np.ones((P, self.D + 1))
            for e in range(1, self.D + 1):
                col[:, e] = col[:, e - 1] * Z[:, i]
            pw.append(col)
        M = np.ones((P, self.size))
        for j, e in enumerate(self.exponents):
            col = np.ones(P)
            for i, ei in enumerate(e):
                if ei:
                    col = col * pw[i][:, ei]
            M[:, j] = col
        return M


@lru_cache(maxsize=None)
def get_basis(n: int, D: int) -> MonomialBasis:
    return MonomialBasis(n, D)
