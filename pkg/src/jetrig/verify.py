"""Named verification suites behind the CLI `verify` subcommand.

Suites map onto the library's invariant sections: `algebra` covers the
structure-constant and bracket layers, `jetspace` the norms and smoothing
axioms, `ce` the cohomology solver, `group` the diffeomorphism group and
its action, `estimates` the composition/flow inequalities, `contraction`
the one-step quadratic law and an end-to-end run.  Every fitted constant
lands in the returned report so numbers are traceable.
"""

from __future__ import annotations

import numpy as np

from . import lie_algebra as la
from .cohomology import (
    Cochain,
    HomotopySet,
    delta,
    homotopy_norm_bound,
    momentum_diff_cochain,
    rho,
)
from .errors import EngineError, KillingNotNegativeDefinite, WhiteheadViolation
from .jets import (
    Jet,
    NormParams,
    ball_monomial_integral,
    ck_norm,
    interpolation_residual,
    smooth,
    sobolev_inner,
)
from .jetgroup import (
    JetMap,
    RadiusLedger,
    compose,
    invert,
    poisson_map_residual,
    pullback,
    substitute,
    time1_flow,
)
from .nashmoser import derive_schedule, quadratic_contraction_check, run_iteration
from .poisson import (
    MomentumMap,
    bracket,
    equivariance_residual,
    hamiltonian_vf,
    identity_momentum,
    linear_poisson,
)
from .sampling import ball_points, random_chi, random_generator_poly, random_jet
from .scenarios import RunConfig, generate_scenario, run as run_scenario


def _check(checks, name, passed, **info):
    entry = {"name": name, "passed": bool(passed)}
    entry.update(info)
    checks.append(entry)
    return entry


class _Fit:
    """Running sup of a ratio, with division-by-zero accounting."""

    def __init__(self):
        self.sup = 0.0
        self.skipped = 0
        self.unbounded = 0
        self.count = 0

    def add(self, num, den, tiny=1e-12):
        self.count += 1
        if den <= tiny:
            if num > 1e-9:
                self.unbounded += 1
            else:
                self.skipped += 1
            return
        self.sup = max(self.sup, num / den)

    def report(self):
        return {
            "C": self.sup, "trials": self.count,
            "skipped": self.skipped, "unbounded": self.unbounded,
        }

    @property
    def ok(self):
        return self.unbounded == 0 and np.isfinite(self.sup)


# ------------------------------------------------------------------ algebra


def suite_algebra(seed: int = 0, trials: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    raw = la.validate_structure(la.so3_raw_constants())
    _check(checks, "so3_killing_is_minus_2I",
           np.abs(raw.killing + 2 * np.eye(3)).max() <= 1e-12)
    _check(checks, "killing_symmetric",
           np.abs(raw.killing - raw.killing.T).max() <= 1e-12)
    _, jac = la.jacobi_residual(raw.c)
    _check(checks, "jacobi_residual_small", jac <= 1e-12, residual=jac)
    eigs = np.linalg.eigvalsh(-raw.killing)
    _check(checks, "negative_killing_positive_definite", eigs.min() > 0.0,
           min_eig=float(eigs.min()))

    ortho = la.orthonormalize(raw)
    _check(checks, "orthonormalize_unit_killing",
           np.abs(ortho.killing + np.eye(3)).max() <= 1e-12)
    again = la.orthonormalize(ortho)
    _check(checks, "orthonormalize_idempotent", again is ortho)
    _check(checks, "orthonormal_constants_scaled",
           np.abs(ortho.c - raw.c / np.sqrt(2.0)).max() <= 1e-12)

    # bracket commutes with the basis change on random vector pairs
    negK = -raw.killing
    L = np.linalg.cholesky(negK)
    T = np.linalg.inv(L).T
    Tinv = np.linalg.inv(T)
    worst = 0.0
    for _ in range(trials):
        u, v = rng.normal(size=3), rng.normal(size=3)
        lhs = ortho.bracket(Tinv @ u, Tinv @ v)
        rhs = Tinv @ raw.bracket(u, v)
        worst = max(worst, np.abs(lhs - rhs).max())
    _check(checks, "orthonormalize_preserves_bracket", worst <= 1e-10, worst=worst)

    for name, ctor in (
        ("abelian_rejected", lambda: la.validate_structure(np.zeros((3, 3, 3)))),
        ("sl2_rejected", lambda: la.validate_structure(_sl2_constants())),
    ):
        try:
            ctor()
            _check(checks, name, False)
        except KillingNotNegativeDefinite:
            _check(checks, name, True)

    # linear structure and bracket calculus on the raw constants
    D = 6
    P = linear_poisson(raw, degcap=D)
    x = [Jet.coordinate(3, D, i) for i in range(3)]
    table_ok = (
        (bracket(x[0], x[1], P) - x[2]).max_abs() <= 1e-15
        and (bracket(x[1], x[2], P) - x[0]).max_abs() <= 1e-15
        and (bracket(x[2], x[0], P) - x[1]).max_abs() <= 1e-15
    )
    _check(checks, "linear_poisson_bracket_table", table_ok)
    _check(checks, "linear_poisson_jacobi_zero", P.jacobi_residual() <= 1e-12,
           residual=P.jacobi_residual())

    casimir = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    worst_br = 0.0
    for _ in range(trials // 2):
        f = random_jet(rng, 3, D)
        g = random_jet(rng, 3, D)
        h = random_jet(rng, 3, D)
        worst_br = max(
            worst_br,
            (bracket(f, f, P)).max_abs(),
            (bracket(f, g, P) + bracket(g, f, P)).max_abs(),
            (bracket(casimir, f, P)).max_abs(),
            (bracket(f, g * h, P) - bracket(f, g, P) * h - g * bracket(f, h, P)).max_abs(),
            (
                bracket(bracket(f, g, P), h, P)
                + bracket(bracket(g, h, P), f, P)
                + bracket(bracket(h, f, P), g, P)
            ).max_abs(),
        )
    _check(checks, "bracket_calculus", worst_br <= 1e-9, worst=worst_br)

    lam = identity_momentum(raw, D)
    _check(checks, "identity_map_equivariant",
           equivariance_residual(lam, P) <= 1e-12)
    g = random_generator_poly(rng, 3, D, degrees=(2, 3),
                              normalize_norm=NormParams(3, 1.0)) * 1e-2
    mu = pullback(lam, time1_flow(g, P))
    _check(checks, "flow_pullback_equivariant",
           equivariance_residual(mu, P) <= 1e-9,
           residual=equivariance_residual(mu, P))
    broken = MomentumMap((2.0 * x[0], x[1], x[2]), raw)
    _check(checks, "broken_map_detected", equivariance_residual(broken, P) > 0.5)

    # differential of the error cochain equals minus the component bracket
    f_coch = momentum_diff_cochain(mu, lam)
    dc = delta(f_coch, lam, P)
    worst_id = 0.0
    diffs = mu.diff(lam)
    for i in range(3):
        for j in range(i + 1, 3):
            worst_id = max(
                worst_id,
                (dc.value((i, j)) + bracket(diffs[i], diffs[j], P)).max_abs(),
            )
    _check(checks, "error_differential_identity", worst_id <= 1e-12, worst=worst_id)

    return _suite_report("algebra", checks)


def _sl2_constants():
    # basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h
    c = np.zeros((3, 3, 3))
    c[0, 1, 1], c[1, 0, 1] = 2.0, -2.0
    c[0, 2, 2], c[2, 0, 2] = -2.0, 2.0
    c[1, 2, 0], c[2, 1, 0] = 1.0, -1.0
    return c


# ------------------------------------------------------------------ jetspace


def suite_jetspace(seed: int = 0, trials: int = 200, mc_samples: int = 4_000_000) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    n, D = 3, 8

    # norm axioms: monotone in k and r; triangle; homogeneity
    mono_ok, tri_ok = True, True
    for _ in range(trials // 2):
        f = random_jet(rng, n, D)
        g = random_jet(rng, n, D)
        k2 = int(rng.integers(0, 7))
        k1 = int(rng.integers(k2, 9))
        r2 = float(rng.uniform(0.1, 1.0))
        r1 = float(rng.uniform(r2, 1.0))
        hi = ck_norm(f, NormParams(k1, r1))
        lo = ck_norm(f, NormParams(k2, r2))
        mono_ok &= hi >= lo - 1e-12 * max(1.0, hi)
        p = NormParams(int(rng.integers(0, 5)), float(rng.uniform(0.1, 1.0)))
        tri_ok &= ck_norm(f + g, p) <= ck_norm(f, p) + ck_norm(g, p) + 1e-9
        a = float(rng.normal())
        tri_ok &= abs(ck_norm(a * f, p) - abs(a) * ck_norm(f, p)) <= 1e-9 * (1 + abs(a))
    _check(checks, "norm_monotone_in_k_and_r", mono_ok)
    _check(checks, "norm_triangle_and_homogeneity", tri_ok)

    # the majorant dominates the true sup of derivatives over the ball
    dom_ok = True
    for _ in range(100):
        f = random_jet(rng, n, D)
        k = int(rng.integers(0, 3))
        r = float(rng.uniform(0.1, 1.0))
        bound = ck_norm(f, NormParams(k, r)) * (1 + 1e-12) + 1e-12
        pts = ball_points(rng, n, 1000, r)
        stack = [f]
        for _ in range(k):
            stack = [h.partial(i) for h in stack for i in range(n)]
            for h in stack:
                if np.abs(h(pts)).max() > bound:
                    dom_ok = False
        if np.abs(f(pts)).max() > bound:
            dom_ok = False
    _check(checks, "norm_dominates_pointwise_sup", dom_ok)

    # smoothing is a linear projection
    proj_ok = True
    for t in (2.0, 3.7, 9.0):
        f = random_jet(rng, n, D)
        g = random_jet(rng, n, D)
        sf, sg = smooth(f, t), smooth(g, t)
        proj_ok &= (smooth(sf, t) - sf).max_abs() == 0.0
        proj_ok &= (smooth(f * 2.0 + g * -3.0, t) - (sf * 2.0 + sg * -3.0)).max_abs() <= 1e-14
    _check(checks, "smoothing_linear_projection", proj_ok)

    # smoothing axioms with fitted constants
    fit1, fit2 = _Fit(), _Fit()
    for _ in range(trials):
        f = random_jet(rng, n, D)
        for (q, p) in ((1, 3), (2, 5)):
            for t in (2.0, 4.0, 8.0):
                sf = smooth(f, t)
                for r in (0.25, 0.5, 1.0):
                    fit1.add(ck_norm(sf, NormParams(p, r)),
                             (t ** (p - q)) * ck_norm(f, NormParams(q, r)))
                    fit2.add(ck_norm(f - sf, NormParams(q, r)),
                             (t ** (q - p)) * ck_norm(f, NormParams(p, r)))
    _check(checks, "smoothing_axiom_bound", fit1.ok and fit1.sup <= 10.0, **fit1.report())
    _check(checks, "smoothing_axiom_remainder", fit2.ok and fit2.sup <= 10.0, **fit2.report())

    # interpolation inequality
    mono = Jet.monomial(n, D, (2, 0, 0), 1.3)
    _check(checks, "interpolation_monomial_exact",
           abs(interpolation_residual(mono, 4, 3, 2, 0.5) - 1.0) <= 1e-12)
    _check(checks, "interpolation_zero_convention",
           interpolation_residual(Jet.zero(n, D), 4, 2, 0, 0.5) == 1.0)
    fit3 = _Fit()
    for _ in range(500):
        f = random_jet(rng, n, D)
        fit3.add(interpolation_residual(f, 4, 2, 0, 0.5), 1.0)
    _check(checks, "interpolation_constant", fit3.ok and fit3.sup <= 50.0, **fit3.report())

    # Sobolev pairing: closed-form values, symmetry, positivity
    one = Jet.constant(n, D, 1.0)
    x1 = Jet.coordinate(n, D, 0)
    x2 = Jet.coordinate(n, D, 1)
    vol = 4.0 * np.pi / 3.0
    _check(checks, "sobolev_ball_volume",
           abs(sobolev_inner(one, one, 0, 1.0) - vol) <= 1e-12)
    _check(checks, "flat_pairing_x1",
           abs(sobolev_inner(x1, x1, 0, 1.0) - 4.0 * np.pi / 15.0) <= 1e-12)
    _check(checks, "odd_symmetry_zero", abs(sobolev_inner(x1, x2, 2, 1.0)) <= 1e-15)
    pd_ok = sobolev_inner(Jet.zero(n, D), Jet.zero(n, D), 2, 1.0) == 0.0
    sym_ok = True
    for _ in range(20):
        f = random_jet(rng, n, 4)
        g = random_jet(rng, n, 4)
        pd_ok &= sobolev_inner(f, f, 2, 0.7) > 0.0
        sym_ok &= abs(sobolev_inner(f, g, 2, 0.7) - sobolev_inner(g, f, 2, 0.7)) <= 1e-10
    _check(checks, "sobolev_positive_definite", pd_ok)
    _check(checks, "sobolev_symmetric", sym_ok)

    # closed-form monomial integrals vs Monte-Carlo quadrature
    batches = max(1, mc_samples // 1_000_000)
    per = mc_samples // batches
    acc = np.zeros(3)
    targets = [
        ((2, 0, 0), ball_monomial_integral((2, 0, 0), 1.0)),
        ((2, 2, 0), ball_monomial_integral((2, 2, 0), 1.0)),
        ((0, 0, 4), ball_monomial_integral((0, 0, 4), 1.0)),
    ]
    for _ in range(batches):
        pts = ball_points(rng, n, per, 1.0)
        for idx, (gmm, _) in enumerate(targets):
            vals = np.prod(pts ** np.asarray(gmm), axis=1)
            acc[idx] += vals.sum()
    mc_ok = True
    errs = []
    for idx, (gmm, exact) in enumerate(targets):
        est = vol * acc[idx] / (per * batches)
        errs.append(abs(est - exact))
        mc_ok &= abs(est - exact) <= 1e-3
    _check(checks, "monomial_integral_vs_quadrature", mc_ok, errors=errs)

    return _suite_report("jetspace", checks)


# ------------------------------------------------------------------ ce


def suite_ce(seed: int = 0, degcap: int = 6, trials: int = 300) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    alg = la.builtin("so3")
    P = linear_poisson(alg, degcap=degcap)
    lam = identity_momentum(alg, degcap)
    hs = HomotopySet(lam, P, degcap)

    worst = hs.worst_residuals()
    _check(checks, "complex_squares_to_zero",
           worst["dd0"] <= 1e-12 and worst["dd1"] <= 1e-12, **worst)
    _check(checks, "homotopy_identities",
           worst["hom1"] <= 1e-10 and worst["hom2"] <= 1e-10)
    _check(checks, "whitehead_vanishing", hs.whitehead_ok(),
           blocks=[b.ranks for b in hs.blocks])
    _check(checks, "operators_real",
           all(np.isrealobj(b.h0) and np.isrealobj(b.h1) and np.isrealobj(b.h2)
               for b in hs.blocks))

    # rho preserves homogeneous degree (rebuilt-block assertion made visible)
    deg_ok = True
    for d in range(degcap + 1):
        blk = hs.blocks[d]
        deg_ok &= all(M.shape == (blk.dim, blk.dim) for M in blk.rho_mats)
    _check(checks, "rho_degree_preserving", deg_ok)

    # Casimir on the raw constants: sum of squares of the representation
    # matrices acts as -2 on the linear block
    raw = la.validate_structure(la.so3_raw_constants())
    Praw = linear_poisson(raw, degcap=degcap)
    lraw = identity_momentum(raw, degcap)
    hsraw = HomotopySet(lraw, Praw, 2)
    blk1 = hsraw.blocks[1]
    cas = sum(M @ M for M in blk1.rho_mats)
    _check(checks, "casimir_spin1_eigenvalue",
           np.abs(cas + 2.0 * np.eye(3)).max() <= 1e-12)

    # degree-0 behaviour: constants are invariants, h0 annihilates them
    const_coch = Cochain(1, alg, {(i,): Jet.constant(3, degcap, float(i + 1))
                                  for i in range(3)})
    h0c = hs.apply_h(const_coch)
    _check(checks, "h0_kills_invariant_constants",
           h0c.values[()].max_abs() <= 1e-12,
           delta0_block0=float(np.abs(hs.blocks[0].delta0).max()))

    # defining identity on random cochains, matrix-free
    worst_def = 0.0
    worst_exact = 0.0
    from .sampling import random_cochain

    for _ in range(20):
        c1 = random_cochain(rng, alg, 1, 3, degcap)
        lhs = delta(hs.apply_h(c1), lam, P) + hs.apply_h(delta(c1, lam, P))
        for i in range(3):
            worst_def = max(worst_def, (lhs.value((i,)) - c1.value((i,))).max_abs())
        # exact recovery of a potential with no invariant component
        f = random_jet(rng, 3, degcap)
        f_perp = _project_out_invariants(hs, f)
        rec = hs.apply_h(delta(Cochain(0, alg, {(): f_perp}), lam, P)).values[()]
        worst_exact = max(worst_exact, (rec - f_perp).max_abs())
    _check(checks, "homotopy_identity_on_cochains", worst_def <= 1e-10, worst=worst_def)
    _check(checks, "h0_recovers_noninvariant_potential", worst_exact <= 1e-10,
           worst=worst_exact)

    # cocycle identity through the jet-level differential
    worst_dd = 0.0
    for _ in range(100):
        f = Cochain(0, alg, {(): random_jet(rng, 3, degcap)})
        dd = delta(delta(f, lam, P), lam, P)
        worst_dd = max(worst_dd, max(j.max_abs() for j in dd.values.values()))
    _check(checks, "delta_squared_zero_on_jets", worst_dd <= 1e-12, worst=worst_dd)

    bound = homotopy_norm_bound(hs, trials=trials, seed=seed + 1)
    spread_ok = all(v <= 2.0 for v in bound["radius_spread"].values())
    finite_ok = all(np.isfinite(v) for v in bound["constants"].values())
    _check(checks, "homotopy_norm_bound", finite_ok and spread_ok,
           s=bound["s"], radius_spread=bound["radius_spread"],
           max_constant=max(bound["constants"].values()))

    # non-semisimple input trips the vanishing-cohomology guard
    from .poisson import PoissonBivector

    abelian = la.LieAlgebra(dim=3, c=np.zeros((3, 3, 3)),
                            killing=np.zeros((3, 3)), orthonormal=False)
    try:
        HomotopySet(identity_momentum(abelian, 2), PoissonBivector(3, 2, {}), 2)
        _check(checks, "whitehead_violation_detected", False)
    except WhiteheadViolation:
        _check(checks, "whitehead_violation_detected", True)

    return _suite_report("ce", checks)


def _project_out_invariants(hs: HomotopySet, f: Jet) -> Jet:
    """Remove the kernel-of-delta0 component, blockwise and Gram-orthogonally."""
    out = np.array(f.with_cap(hs.D).coeffs)
    for blk in hs.blocks:
        lo, hi = blk.slice
        if blk.dim == 0 or blk.delta0.size == 0:
            continue
        L = np.linalg.cholesky(blk.gram)
        A = blk.delta0 @ np.linalg.inv(L).T
        # kernel of delta0 in orthonormal coordinates
        u, s, vt = np.linalg.svd(A)
        rank = int((s > 1e-10 * max(s[0], 1.0)).sum()) if s.size else 0
        null = vt[rank:].T
        v = L.T @ out[lo:hi]
        v -= null @ (null.T @ v)
        out[lo:hi] = np.linalg.inv(L.T) @ v
    return Jet(f.with_cap(hs.D).basis, out)


# ------------------------------------------------------------------ group


def suite_group(seed: int = 0, trials: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    n, D = 3, 6
    alg = la.builtin("so3")
    P = linear_poisson(alg, degcap=D)
    lam = identity_momentum(alg, D)
    ident = JetMap.identity(n, D)

    def small_map(scale=1e-2):
        return JetMap(random_chi(rng, n, D, scale=scale))

    # neutral element and hand-checked substitution
    psi = small_map()
    _check(checks, "neutral_element",
           max((a - b).max_abs() for a, b in zip(compose(ident, psi).chi, psi.chi)) == 0.0
           and max((a - b).max_abs() for a, b in zip(compose(psi, ident).chi, psi.chi)) == 0.0)

    phi = JetMap((Jet.monomial(3, 4, (0, 2, 0)), Jet.zero(3, 4), Jet.zero(3, 4)))
    tau = JetMap((Jet.zero(3, 4), Jet.monomial(3, 4, (2, 0, 0)), Jet.zero(3, 4)))
    got = compose(phi, tau)
    want0 = Jet.from_terms(3, 4, {(0, 2, 0): 1.0, (2, 1, 0): 2.0, (4, 0, 0): 1.0})
    ok = (got.chi[0] - want0).max_abs() <= 1e-15
    ok &= (got.chi[1] - Jet.monomial(3, 4, (2, 0, 0))).max_abs() <= 1e-15
    ok &= got.chi[2].max_abs() == 0.0
    _check(checks, "substitution_hand_example", ok)

    worst_assoc = 0.0
    for _ in range(50):
        a, b, c = small_map(), small_map(), small_map()
        lhs = compose(compose(a, b), c)
        rhs = compose(a, compose(b, c))
        worst_assoc = max(worst_assoc,
                          max((u - v).max_abs() for u, v in zip(lhs.chi, rhs.chi)))
    _check(checks, "composition_associative", worst_assoc <= 1e-10, worst=worst_assoc)

    sq = JetMap((Jet.monomial(3, 4, (0, 2, 0)), Jet.zero(3, 4), Jet.zero(3, 4)))
    inv_sq = invert(sq)
    _check(checks, "inverse_hand_example",
           (inv_sq.chi[0] + Jet.monomial(3, 4, (0, 2, 0))).max_abs() <= 1e-15
           and invert(ident).is_identity())

    worst_inv = 0.0
    for _ in range(trials):
        m = small_map(1e-1 if rng.random() < 0.5 else 1e-2)
        mi = invert(m)
        left = compose(m, mi)
        right = compose(mi, m)
        worst_inv = max(
            worst_inv,
            max(c.max_abs() for c in left.chi),
            max(c.max_abs() for c in right.chi),
        )
    _check(checks, "inverse_roundtrip", worst_inv <= 1e-10, worst=worst_inv)

    # flows
    _check(checks, "flow_of_zero", time1_flow(Jet.zero(n, D), P).is_identity())
    x = [Jet.coordinate(n, D, i) for i in range(n)]
    casimir = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    _check(checks, "flow_of_casimir",
           time1_flow(casimir, P).is_identity(tol=1e-15))

    # twist flow of the square of the third coordinate, against the closed form
    raw = la.validate_structure(la.so3_raw_constants())
    Praw = linear_poisson(raw, degcap=D)
    eps = 0.05
    tw = time1_flow(Jet.monomial(n, D, (0, 0, 2), eps), Praw)
    theta = 2.0 * eps
    x3 = Jet.coordinate(n, D, 2)
    # cos(theta x3) and sin(theta x3) as jets
    arg = Jet.constant(n, D, theta) * x3
    cos_t = Jet.constant(n, D, 1.0)
    sin_t = Jet.zero(n, D)
    power = Jet.constant(n, D, 1.0)
    import math

    for kk in range(0, D + 1):
        term = power * (1.0 / math.factorial(kk))
        if kk % 4 == 0:
            cos_t = cos_t + term if kk else cos_t
        elif kk % 4 == 1:
            sin_t = sin_t + term
        elif kk % 4 == 2:
            cos_t = cos_t - term
        else:
            sin_t = sin_t - term
        power = power * arg
    want1 = x[0] * cos_t + x[1] * sin_t
    want2 = x[1] * cos_t - x[0] * sin_t
    got1 = x[0] + tw.chi[0]
    got2 = x[1] + tw.chi[1]
    _check(checks, "twist_flow_closed_form",
           (got1 - want1).max_abs() <= 1e-12 and (got2 - want2).max_abs() <= 1e-12
           and tw.chi[2].max_abs() == 0.0,
           err=float(max((got1 - want1).max_abs(), (got2 - want2).max_abs())))

    rot_inv = substitute(x[0] * x[0] + x[1] * x[1], tw) - (x[0] * x[0] + x[1] * x[1])
    _check(checks, "twist_preserves_plane_radius", rot_inv.max_abs() <= 1e-10,
           err=rot_inv.max_abs())

    # Poisson property of flows, measured below the trust floor
    worst_poisson = 0.0
    for _ in range(trials // 2):
        g = random_generator_poly(rng, n, D, degrees=(2, 3),
                                  normalize_norm=NormParams(3, 1.0)) * 1e-2
        fl = time1_flow(g, P)
        worst_poisson = max(
            worst_poisson,
            poisson_map_residual(fl, P, NormParams(0, 1.0), floor=D - 2),
        )
    _check(checks, "flows_are_poisson_maps", worst_poisson <= 1e-9, worst=worst_poisson)

    # right action laws
    lamP = identity_momentum(alg, D)
    a, b = small_map(), small_map()
    act1 = pullback(pullback(lamP, a), b)
    act2 = pullback(lamP, compose(a, b))
    worst_act = max((u - v).max_abs()
                    for u, v in zip(act1.components, act2.components))
    _check(checks, "right_action_law", worst_act <= 1e-10, worst=worst_act)
    same = pullback(lamP, ident)
    _check(checks, "action_of_identity",
           max((u - v).max_abs() for u, v in zip(same.components, lamP.components)) == 0.0)

    # ledger behaviour: budgeted shrink never exhausts the radius
    k = 8
    c_const = 2.0
    led = RadiusLedger(rho=1.0, c=c_const, floor=0.5)
    amt = 1.0 / (2.0 * c_const * k)
    bump = JetMap((Jet.monomial(n, D, (2, 0, 0), amt / 2.0),
                   Jet.zero(n, D), Jet.zero(n, D)))
    acc = ident
    try:
        for _ in range(k):
            acc = compose(acc, bump, led)
        _check(checks, "shrink_budget_closes", led.rho >= 0.5,
               final_radius=led.rho, events=len(led.log))
    except EngineError as e:
        _check(checks, "shrink_budget_closes", False, error=str(e))

    # scaled group laws with fitted constants
    fits = {"inverse_bound": _Fit(), "product_drift": _Fit(), "product_identity": _Fit()}
    c_law = 2.0
    for _ in range(trials):
        chi_m = small_map(10 ** rng.uniform(-3, -1.3))
        xi_m = small_map(10 ** rng.uniform(-3, -1.3))
        rho0 = 1.0
        k_ord = int(rng.integers(1, 4))
        n1 = xi_m.displacement_norm(NormParams(1, rho0))
        rho1 = rho0 * (1.0 - c_law * n1)
        if rho1 <= 0.05:
            continue
        pr = NormParams(k_ord, rho1)
        p0 = NormParams(k_ord, rho0)
        inv_m = invert(chi_m)
        fits["inverse_bound"].add(
            inv_m.displacement_norm(NormParams(k_ord, (1.0 - c_law * chi_m.displacement_norm(NormParams(1, rho0))) * rho0)),
            chi_m.displacement_norm(p0),
        )
        comp = compose(chi_m, xi_m)
        drift = max((u - v).max_abs() for u, v in zip(comp.chi, chi_m.chi))
        fits["product_drift"].add(
            _chi_norm_diff(comp, chi_m, pr),
            xi_m.displacement_norm(p0)
            * (1.0 + chi_m.displacement_norm(NormParams(k_ord + 1, rho0))),
        )
        fits["product_identity"].add(
            comp.displacement_norm(pr),
            xi_m.displacement_norm(p0)
            + chi_m.displacement_norm(p0) * (1.0 + xi_m.displacement_norm(p0)),
        )
    for name, fit in fits.items():
        _check(checks, f"group_law_{name}", fit.ok, **fit.report())

    # action laws with fitted constants (shift gamma = 1)
    afits = {"action_plain": _Fit(), "action_high": _Fit(), "action_difference": _Fit()}
    for _ in range(trials):
        f = random_jet(rng, n, D)
        chi_m = small_map(10 ** rng.uniform(-3, -1.5))
        xi_m = small_map(10 ** rng.uniform(-3, -1.5))
        k_ord = int(rng.integers(1, 3))
        rho0 = 1.0
        tot = chi_m.displacement_norm(NormParams(1, rho0)) + xi_m.displacement_norm(NormParams(1, rho0))
        rho1 = rho0 * (1.0 - 2.0 * tot)
        if rho1 <= 0.05:
            continue
        fphi = substitute(f, chi_m)
        ratio = ck_norm(fphi, NormParams(k_ord, rho1))
        den = ck_norm(f, NormParams(k_ord, rho0))
        if den > 1e-12:
            excess = max(ratio / den - 1.0, 0.0)
            afits["action_plain"].add(
                excess, chi_m.displacement_norm(NormParams(k_ord + 1, rho0)))
        afits["action_high"].add(
            ck_norm(fphi, NormParams(2 * k_ord - 1, rho1)),
            ck_norm(f, NormParams(2 * k_ord - 1, rho0))
            * (1.0 + chi_m.displacement_norm(NormParams(k_ord + 1, rho0)))
            + chi_m.displacement_norm(NormParams(2 * k_ord, rho0))
            * ck_norm(f, NormParams(k_ord, rho0)),
        )
        sum_map = JetMap(tuple(a + b for a, b in zip(chi_m.chi, xi_m.chi)))
        afits["action_difference"].add(
            ck_norm(substitute(f, sum_map) - fphi, NormParams(k_ord, rho1)),
            xi_m.displacement_norm(NormParams(k_ord + 1, rho0))
            * ck_norm(f, NormParams(k_ord + 1, rho0)),
        )
    for name, fit in afits.items():
        _check(checks, f"action_law_{name}", fit.ok, **fit.report())

    return _suite_report("group", checks)


def _chi_norm_diff(a: JetMap, b: JetMap, params: NormParams) -> float:
    return max((u - v).max_abs() * 0 + ck_norm(u - v, params)
               for u, v in zip(a.chi, b.chi))


# ------------------------------------------------------------------ estimates


def suite_estimates(seed: int = 0, trials: int = 200) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    n, D = 3, 6
    alg = la.builtin("so3")
    P = linear_poisson(alg, degcap=D)
    r, eta = 0.5, 0.5
    r_out = r * (1.0 + eta)

    comp_fit = _Fit()
    diff_fit = _Fit()
    for _ in range(trials):
        f = random_jet(rng, n, D)
        chi = JetMap(random_chi(rng, n, D, scale=10 ** rng.uniform(-3, -1.5), low_deg=1))
        xi = JetMap(random_chi(rng, n, D, scale=10 ** rng.uniform(-3, -1.5), low_deg=1))
        k = int(rng.integers(1, 4))
        fc = substitute(f, chi)
        base = ck_norm(f, NormParams(k, r_out))
        if base > 1e-12:
            comp_fit.add(
                max(ck_norm(fc, NormParams(k, r)) / base - 1.0, 0.0),
                chi.displacement_norm(NormParams(k, r)),
            )
        both = JetMap(tuple(a + b for a, b in zip(chi.chi, xi.chi)))
        diff_fit.add(
            ck_norm(substitute(f, both) - fc, NormParams(k, r)),
            ck_norm(f, NormParams(k + 1, r_out)) * xi.displacement_norm(NormParams(k, r)),
        )
    _check(checks, "composition_bound", comp_fit.ok, **comp_fit.report())
    _check(checks, "composition_difference_bound", diff_fit.ok, **diff_fit.report())

    # flow displacement bounds: C1 control and high-order control with the
    # halved smoothness order l = [L/2] + 1
    flow1 = _Fit()
    flowL = {L: _Fit() for L in (2, 3, 4)}
    eps_r = 0.25
    for _ in range(trials // 2):
        g = random_generator_poly(rng, n, D, degrees=(2, 4),
                                  normalize_norm=NormParams(3, 1.0))
        g = g * (10 ** rng.uniform(-3, -1.5))
        t_scale = float(rng.uniform(0.1, 1.0))
        fl = time1_flow(g * t_scale, P)
        X = hamiltonian_vf(g * t_scale, P)
        xnorm1 = max(ck_norm(v, NormParams(1, r + eps_r)) for v in X)
        flow1.add(fl.displacement_norm(NormParams(1, r)), xnorm1)
        for L, fit in flowL.items():
            fit.add(
                fl.displacement_norm(NormParams(L, r)),
                max(ck_norm(v, NormParams(L, r + eps_r)) for v in X),
            )
    _check(checks, "flow_c1_bound", flow1.ok, **flow1.report())
    for L, fit in flowL.items():
        _check(checks, f"flow_c{L}_bound", fit.ok,
               halved_order=L // 2 + 1, **fit.report())

    # two-flow difference bound
    two_fit = _Fit()
    for _ in range(trials):
        f = random_jet(rng, n, D)
        g1 = random_generator_poly(rng, n, D, degrees=(2, 3),
                                   normalize_norm=NormParams(2, r_out)) * 1e-2
        if rng.random() < 0.5:
            g2 = g1 + random_generator_poly(rng, n, D, degrees=(2, 3),
                                            normalize_norm=NormParams(2, r_out)) * 1e-3
        else:
            g2 = random_generator_poly(rng, n, D, degrees=(2, 3),
                                       normalize_norm=NormParams(2, r_out)) * 1e-2
        k = int(rng.integers(1, 3))
        ph1, ph2 = time1_flow(g1, P), time1_flow(g2, P)
        lhs = ck_norm(substitute(f, ph1) - substitute(f, ph2), NormParams(k, r))
        t1 = (ck_norm(g1 - g2, NormParams(k + 1, r_out))
              * ck_norm(f, NormParams(k + 1, r_out)))
        t2 = (ck_norm(f, NormParams(k + 2, r_out))
              * (ck_norm(g1, NormParams(k + 2, r_out))
                 + ck_norm(g2, NormParams(k + 2, r_out))) ** 2)
        two_fit.add(lhs, t1 + t2)
    _check(checks, "two_flow_difference_bound",
           two_fit.ok and two_fit.sup <= 100.0, **two_fit.report())

    return _suite_report("estimates", checks)


# ------------------------------------------------------------------ contraction


def suite_contraction(seed: int = 0, trials: int = 67, e2e_seeds: int = 3) -> dict:
    checks = []
    alg = la.builtin("so3")
    D = 6
    P = linear_poisson(alg, degcap=D)
    lam = identity_momentum(alg, D)
    hs = HomotopySet(lam, P, D)

    out = quadratic_contraction_check(P, lam, hs, trials=trials, seed=seed)
    _check(checks, "quadratic_slope", out["slope"] >= 1.9, slope=out["slope"],
           per_eps=out["per_eps"])
    ec = out["explicit_constant"]
    _check(checks, "explicit_constant_bound",
           ec["violations"] == 0 and ec["cases"] >= 200, **ec)

    sched = derive_schedule(3, 1, 2)
    conds = sched.conditions()
    _check(checks, "schedule_parameters",
           sched.s == 2 and sched.A == 21 and all(conds.values()),
           s=sched.s, A=sched.A, l=sched.l, epsilon=str(sched.epsilon),
           conditions={k: bool(v) for k, v in conds.items()})

    ok_runs, steps_used, finals = True, [], []
    for k in range(e2e_seeds):
        cfg = RunConfig(seed=1000 + k, epsilon=1e-2, degcap=D)
        rep = run_scenario(cfg)
        finals.append(rep.final["residual_final"])
        steps_used.append(rep.n_steps)
        ok_runs &= rep.converged
        ok_runs &= rep.final["residual_final"] < 1e-9
        ok_runs &= rep.final["ledger_radius"] >= cfg.radius / 2.0
        ok_runs &= rep.final["pi_preservation"] <= 1e-9
        rs = [s.r_d for s in rep.steps]
        rhos = [s.rho_d for s in rep.steps]
        ok_runs &= all(
            rep.schedule and rhos[i] <= rs[i] and rs[i] >= cfg.radius / 2.0
            for i in range(len(rs))
        )
    _check(checks, "end_to_end_rigidity", ok_runs,
           steps=steps_used, final_residuals=finals)

    return _suite_report("contraction", checks)


# ------------------------------------------------------------------ plumbing


def _suite_report(name: str, checks: list) -> dict:
    return {
        "suite": name,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }


SUITES = {
    "algebra": suite_algebra,
    "jetspace": suite_jetspace,
    "ce": suite_ce,
    "group": suite_group,
    "estimates": suite_estimates,
    "contraction": suite_contraction,
}


def run_suite(name: str, seed: int = 0, **kw) -> dict:
    if name not in SUITES:
        raise EngineError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed=seed, **kw)
