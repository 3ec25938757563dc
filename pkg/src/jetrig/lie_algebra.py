"""Compact semisimple Lie algebras given by structure constants.

Validation checks antisymmetry, the Jacobi identity and negative
definiteness of the Killing form; orthonormalization changes basis so the
negative Killing form becomes the identity, after which the structure
constants are totally antisymmetric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    JacobiViolation,
    KillingNotNegativeDefinite,
    NotAntisymmetric,
    UnknownAlgebra,
)

JACOBI_TOL = 1e-12
EIG_THRESHOLD = -1e-10  # largest admissible Killing eigenvalue


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants c[i, j, p] for [xi_i, xi_j] = sum_p c[i,j,p] xi_p."""

    dim: int
    c: np.ndarray = field(repr=False)
    killing: np.ndarray = field(repr=False)
    orthonormal: bool = False

    def bracket(self, u, v) -> np.ndarray:
        """Bracket of coefficient vectors: [u, v]^p = sum c[i,j,p] u_i v_j."""
        return np.einsum("ijp,i,j->p", self.c, np.asarray(u), np.asarray(v))


def killing_form(c: np.ndarray) -> np.ndarray:
    return np.einsum("ikl,jlk->ij", c, c)


def jacobi_residual(c: np.ndarray):
    """Worst Jacobi quadruple (i,j,k,l) and the max residual."""
    t1 = np.einsum("ijm,mkl->ijkl", c, c)
    res = t1 + np.einsum("jkm,mil->ijkl", c, c) + np.einsum("kim,mjl->ijkl", c, c)
    flat = np.argmax(np.abs(res))
    quad = np.unravel_index(flat, res.shape)
    return tuple(int(q) for q in quad), float(np.abs(res).max())


def validate_structure(c) -> LieAlgebra:
    """Validate structure constants and return the algebra with its Killing form.

    Raises NotAntisymmetric, JacobiViolation (worst quadruple reported) or
    KillingNotNegativeDefinite when the compact-semisimple hypothesis fails.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise NotAntisymmetric(f"structure constants must be an m*m*m array, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise NotAntisymmetric("structure constants must be finite")
    m = c.shape[0]
    anti = np.abs(c + np.swapaxes(c, 0, 1)).max()
    if anti > JACOBI_TOL:
        raise NotAntisymmetric(f"c[i,j,p] + c[j,i,p] has max violation {anti:.3e}")
    quad, res = jacobi_residual(c)
    if res > JACOBI_TOL:
        raise JacobiViolation(quad, res)
    K = killing_form(c)
    eigs = np.linalg.eigvalsh(K)
    if eigs.max() > EIG_THRESHOLD:
        raise KillingNotNegativeDefinite(
            "Killing form is not negative definite "
            f"(eigenvalues {np.array2string(eigs, precision=3)}); "
            "the algebra is not semisimple of compact type"
        )
    ortho = np.abs(K + np.eye(m)).max() <= JACOBI_TOL
    return LieAlgebra(dim=m, c=c, killing=K, orthonormal=bool(ortho))


def orthonormalize(g: LieAlgebra) -> LieAlgebra:
    """Basis change making -K the identity; idempotent.

    In the new basis the structure constants of a compact algebra are
    totally antisymmetric in all three indices, which is asserted.
    """
    if g.orthonormal:
        return g
    negK = -g.killing
    L = np.linalg.cholesky(negK)
    T = np.linalg.inv(L).T            # new basis xi'_a = sum_i T[i,a] xi_i
    Tinv = np.linalg.inv(T)
    c2 = np.einsum("ia,jb,ijp,ep->abe", T, T, g.c, Tinv)
    out = validate_structure(c2)
    if not out.orthonormal:
        raise KillingNotNegativeDefinite(
            f"orthonormalization failed: -K' differs from identity by "
            f"{np.abs(out.killing + np.eye(g.dim)).max():.3e}"
        )
    total_anti = max(
        np.abs(c2 + np.swapaxes(c2, 1, 2)).max(),
        np.abs(c2 + np.swapaxes(c2, 0, 2)).max(),
    )
    if total_anti > 1e-10:
        raise JacobiViolation((0, 0, 0, 0), total_anti)
    return out


def so3_raw_constants() -> np.ndarray:
    """Levi-Civita constants: [xi_i, xi_j] = eps_{ijp} xi_p."""
    c = np.zeros((3, 3, 3))
    for (i, j, p), s in (
        ((0, 1, 2), 1.0), ((1, 2, 0), 1.0), ((2, 0, 1), 1.0),
        ((1, 0, 2), -1.0), ((2, 1, 0), -1.0), ((0, 2, 1), -1.0),
    ):
        c[i, j, p] = s
    return c


_BUILTINS = ("so3", "su2")


def builtin(name: str) -> LieAlgebra:
    """Validated, orthonormalized builtin algebra (so3 and its alias su2)."""
    if name in _BUILTINS:
        return orthonormalize(validate_structure(so3_raw_constants()))
    raise UnknownAlgebra(
        f"unknown algebra {name!r}; builtins are {_BUILTINS}, "
        "anything else must be loaded from a structure-constants file"
    )


def load_structure_file(path) -> LieAlgebra:
    """Load {"dim": m, "c": [[[...]]]} (row-major c[i][j][p]) and validate."""
    with open(path) as fh:
        data = json.load(fh)
    c = np.asarray(data["c"], dtype=float)
    if c.shape != (data["dim"],) * 3:
        raise NotAntisymmetric(
            f"file declares dim={data['dim']} but c has shape {c.shape}"
        )
    return validate_structure(c)


def resolve_algebra(name_or_path: str) -> LieAlgebra:
    """Builtin name, or a path to a structure-constants JSON file."""
    if name_or_path in _BUILTINS:
        return builtin(name_or_path)
    if str(name_or_path).endswith(".json"):
        return load_structure_file(name_or_path)
    raise UnknownAlgebra(f"unknown algebra {name_or_path!r}")
