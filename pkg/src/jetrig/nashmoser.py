"""Fast-convergence normal-form iteration for momentum maps.

Each step solves the linearized conjugation problem with the homotopy
operator, smooths the correction by degree truncation, flows for time one
and pulls the iterate back:

    g_d   = S(t_d) h0(f_d - lam)
    phi_d = time-1 flow of X_{g_d}
    f_{d+1} = f_d o phi_d

with the parameter ladder t_{d+1} = t_d^{3/2}, r_d = (1 + 1/(d+1)) R/2 and
the intermediate radii rho_d = r_d (1 - (1/2)(d+2)^-2).  The theoretical
parameter set (s, A, epsilon, l) is derived exactly with rational
arithmetic; runs use a small practical smoothness order and report the
monitored inequalities a posteriori.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    EquivarianceViolated,
    InfeasibleParameters,
    MonitorViolated,
    NoConvergence,
    SmallnessViolated,
)
from .jets import Jet, NormParams, ck_norm, smooth
from .jetgroup import (
    JetMap,
    RadiusLedger,
    compose,
    invert,
    poisson_map_residual,
    pullback,
    time1_flow,
)
from .poisson import (
    MomentumMap,
    PoissonBivector,
    equivariance_residual,
)
from .cohomology import HomotopySet, momentum_diff_cochain

CSV_HEADER = ["d", "t_d", "r_d", "rho_d", "res_l", "res_hi", "equiv_drift", "radius_shrink"]


# ------------------------------------------------------------------ schedule


@dataclass(frozen=True)
class Schedule:
    """Iteration parameters: the exact theoretical set plus practical knobs."""

    n: int
    s: int
    A: int
    epsilon: Fraction
    l: int
    l_practical: int
    delta: Fraction
    tau: Fraction
    t0: float = 2.0
    R: float = 1.0
    c: float = 2.0
    max_steps: int = 12
    target_residual: float = 1e-10

    def conditions(self) -> dict:
        """Exact re-check of the four defining inequalities."""
        eps, dlt, tau, A, s, l = self.epsilon, self.delta, self.tau, self.A, self.s, self.l
        return {
            "smoothing_rate": -(1 - eps) + A * eps < Fraction(-4, 5),
            "quadratic_rate": -dlt * (1 - eps) < Fraction(-7, 10),
            "order_vs_eps": Fraction(3 * s + 3, l - 1) * (1 + dlt + tau) < eps,
            "order_vs_A": Fraction(-8, 5) + Fraction(A * s, l - 1) < Fraction(-3, 2),
            "l_floor": l > 6 * s + 1,
            "A_floor": A > 8 * s + 4,
        }

    def t(self, d: int) -> float:
        return self.t0 ** (1.5 ** d)

    def r(self, d: int) -> float:
        return (1.0 + 1.0 / (d + 1)) * self.R / 2.0

    def rho(self, d: int) -> float:
        return self.r(d) * (1.0 - 0.5 / (d + 2) ** 2)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "s": self.s, "A": self.A,
            "epsilon": str(self.epsilon), "epsilon_float": float(self.epsilon),
            "l": self.l, "l_practical": self.l_practical,
            "delta": str(self.delta), "tau": str(self.tau),
            "t0": self.t0, "R": self.R, "c": self.c,
            "max_steps": self.max_steps, "target_residual": self.target_residual,
            "conditions": {k: bool(v) for k, v in self.conditions().items()},
        }


def _strict_ceil(x: Fraction) -> int:
    """Smallest integer strictly greater than x."""
    n = x.numerator // x.denominator
    return n + 1


def derive_schedule(n: int, delta, tau, *, l_practical: int = 3, t0: float = 2.0,
                    R: float = 1.0, c: float = 2.0, max_steps: int = 12,
                    target_residual: float = 1e-10) -> Schedule:
    """Exact minimal parameter set for ambient dimension n.

    s = [n/2] + 1 and A = 8s + 5 are fixed; l is the smallest integer
    admitting some epsilon < 1 with all four rate conditions strict, and
    epsilon is placed at the midpoint of its admissible interval so the
    conditions can be re-checked with exact rational arithmetic.
    """
    if n < 1:
        raise InfeasibleParameters(f"ambient dimension must be positive, got {n}")
    delta = Fraction(delta)
    tau = Fraction(tau)
    if delta <= 0:
        raise InfeasibleParameters(f"quadratic-rate exponent delta must be positive, got {delta}")
    if tau < 0:
        raise InfeasibleParameters(f"polynomial degree tau must be nonnegative, got {tau}")
    if not t0 > 1.0:
        raise InfeasibleParameters(f"t0 must exceed 1, got {t0}")
    if not (0.0 < R <= 1.0):
        raise InfeasibleParameters(f"R must lie in (0, 1], got {R}")
    s = n // 2 + 1
    A = 8 * s + 5
    eps_caps = [Fraction(1, 5 * (A + 1))]
    # -delta (1 - eps) < -7/10  <=>  eps < 1 - 7/(10 delta), needs delta > 7/10
    if delta <= Fraction(7, 10):
        raise InfeasibleParameters(
            f"delta = {delta} cannot satisfy the quadratic-rate condition for any epsilon in (0,1)"
        )
    eps_caps.append(1 - Fraction(7, 10) / delta)
    eps_sup = min(eps_caps)

    bound_eps = Fraction(3 * s + 3) * (1 + delta + tau)   # needs (l-1) > bound_eps / eps
    l_min = max(
        6 * s + 2,
        _strict_ceil(Fraction(10 * A * s)) + 1,           # (l-1) > 10 A s
        _strict_ceil(bound_eps / eps_sup) + 1,            # (l-1) > bound_eps / eps_sup
    )
    epsilon = (bound_eps / (l_min - 1) + eps_sup) / 2
    sched = Schedule(
        n=n, s=s, A=A, epsilon=epsilon, l=l_min, l_practical=l_practical,
        delta=delta, tau=tau, t0=t0, R=R, c=c, max_steps=max_steps,
        target_residual=target_residual,
    )
    bad = [k for k, ok in sched.conditions().items() if not ok]
    if bad:
        raise InfeasibleParameters(f"derived schedule violates {bad}")
    return sched


# ------------------------------------------------------------------ state


@dataclass
class IterationState:
    d: int
    f_d: MomentumMap
    psi: JetMap
    psi_inv: JetMap
    t_d: float
    r_d: float
    rho_d: float
    res_l: float
    res_hi: float
    monitor_C: float
    monitors: dict = field(default_factory=dict)


@dataclass
class StepRecord:
    d: int
    t_d: float
    r_d: float
    rho_d: float
    res_l: float
    res_hi: float
    equiv_drift: float
    radius_shrink: float
    smoothing_cut: int
    chi_norm: float
    monitors: dict

    def row(self):
        return [
            self.d, self.t_d, self.r_d, self.rho_d,
            self.res_l, self.res_hi, self.equiv_drift, self.radius_shrink,
        ]

    def to_dict(self):
        return {
            "d": self.d, "t_d": self.t_d, "r_d": self.r_d, "rho_d": self.rho_d,
            "res_l": self.res_l, "res_hi": self.res_hi,
            "equiv_drift": self.equiv_drift, "radius_shrink": self.radius_shrink,
            "smoothing_cut": self.smoothing_cut, "chi_norm": self.chi_norm,
            "monitors": self.monitors,
        }


@dataclass
class Report:
    config: dict
    schedule: dict
    steps: list
    converged: bool
    n_steps: int
    final: dict
    shrink_log: list
    ground_truth: dict
    generated_at: str

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "schedule": self.schedule,
            "steps": [s.to_dict() if isinstance(s, StepRecord) else s for s in self.steps],
            "converged": self.converged,
            "n_steps": self.n_steps,
            "final": self.final,
            "shrink_log": self.shrink_log,
            "ground_truth": self.ground_truth,
            "generated_at": self.generated_at,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for s in self.steps:
                w.writerow(s.row() if isinstance(s, StepRecord) else s)


# ------------------------------------------------------------------ stepping


def _residuals(f_d: MomentumMap, lam: MomentumMap, sched: Schedule, radius: float):
    l = sched.l_practical
    diff = f_d.diff(lam)
    res_l = max(ck_norm(j, NormParams(l, radius)) for j in diff)
    res_hi = max(ck_norm(j, NormParams(2 * l - 1, radius)) for j in diff)
    return res_l, res_hi


def _check_monitors(state: IterationState, chi_hat_norm: float, sched: Schedule) -> dict:
    """Evaluate the five per-step inequalities of the convergence ladder.

    Under the practical schedule these are a posteriori diagnostics; the
    residual of the affine off-normal part equals the plain distance to the
    reference, which is what res_l and res_hi measure.
    """
    t = state.t_d
    tA = t ** sched.A if sched.A * abs(np.log(max(t, 1.0 + 1e-15))) < 700 else float("inf")
    mon = {
        "m1_chi_small": {"value": chi_hat_norm, "bound": t ** -0.5},
        "m2_low_bounded": {
            "value": state.res_l,
            "bound": state.monitor_C * (state.d + 1) / (state.d + 2),
        },
        "m3_high_growth": {"value": state.res_hi, "bound": tA},
        "m4_zeta_high_growth": {"value": state.res_hi, "bound": tA},
        "m5_zeta_low_decay": {"value": state.res_l, "bound": 1.0 / t},
    }
    for entry in mon.values():
        entry["ok"] = bool(entry["value"] < entry["bound"])
    return mon


def step(state: IterationState, hs: HomotopySet, P: PoissonBivector,
         lam: MomentumMap, sched: Schedule, ledger: RadiusLedger,
         monitor_fatal: bool = False, mu0: MomentumMap = None) -> tuple:
    """One iteration step; returns (new_state, record)."""
    d = state.d
    t_d, r_d, rho_d = sched.t(d), sched.r(d), sched.rho(d)
    for got, want, name in ((state.t_d, t_d, "t_d"), (state.r_d, r_d, "r_d"),
                            (state.rho_d, rho_d, "rho_d")):
        if abs(got - want) > 1e-12 * max(1.0, abs(want)):
            raise MonitorViolated(f"schedule arithmetic drifted: {name} = {got} != {want}")

    diff = momentum_diff_cochain(state.f_d, lam)
    g = hs.apply_h(diff).values[()]
    g_s = smooth(g, t_d)
    cut = int(np.floor(t_d))
    phi_hat = time1_flow(g_s, P)
    chi_hat_norm = phi_hat.displacement_norm(
        NormParams(sched.l_practical + hs.lam.nvars // 2 + 1, rho_d)
    )

    f_next = pullback(state.f_d, phi_hat)

    # radius bookkeeping: invert the correction down to rho_d, extend the
    # accumulated conjugator down to r_{d+1}
    phi_hat_inv = invert(phi_hat, ledger, target_radius=rho_d)
    psi = compose(state.psi, phi_hat, ledger, target_radius=sched.r(d + 1))
    psi_inv = compose(phi_hat_inv, state.psi_inv)

    res_l, res_hi = _residuals(f_next, lam, sched, sched.r(d + 1))
    new_state = IterationState(
        d=d + 1, f_d=f_next, psi=psi, psi_inv=psi_inv,
        t_d=sched.t(d + 1), r_d=sched.r(d + 1), rho_d=sched.rho(d + 1),
        res_l=res_l, res_hi=res_hi, monitor_C=state.monitor_C,
    )
    monitors = _check_monitors(state, chi_hat_norm, sched)
    new_state.monitors = monitors
    if monitor_fatal and not all(m["ok"] for m in monitors.values()):
        bad = [k for k, m in monitors.items() if not m["ok"]]
        raise MonitorViolated(f"step {d}: monitors failed: {bad}")

    if mu0 is not None:
        back = pullback(mu0, psi)
        drift = max(
            (a - b).max_abs() for a, b in zip(back.components, f_next.components)
        )
        if drift > 1e-9:
            raise MonitorViolated(
                f"step {d}: accumulated conjugator does not reproduce the iterate "
                f"(drift {drift:.3e})"
            )

    record = StepRecord(
        d=d, t_d=t_d, r_d=r_d, rho_d=rho_d,
        res_l=res_l, res_hi=res_hi,
        equiv_drift=equivariance_residual(f_next, P),
        radius_shrink=ledger.rho, smoothing_cut=cut,
        chi_norm=chi_hat_norm, monitors=monitors,
    )
    return new_state, record


# ------------------------------------------------------------------ driver


def run_iteration(P: PoissonBivector, lam: MomentumMap, mu: MomentumMap,
                  sched: Schedule, hs: HomotopySet = None, *,
                  equivariance_tol: float = 1e-9,
                  admit_alpha: float = 1.0, admit_beta: float = 0.5,
                  stagnation_window: int = 3, monitor_fatal: bool = False,
                  config_echo: dict = None, ground_truth: dict = None) -> Report:
    """Iterate until the residual drops below the target or raise NoConvergence.

    Admission mirrors the smallness contract: the high norm of mu - lam must
    stay below ``admit_alpha`` and the low norm below ``admit_beta`` (both
    practical stand-ins, reported in the config echo).
    """
    l = sched.l_practical
    for name, m in (("reference", lam), ("input", mu)):
        res = equivariance_residual(m, P)
        if res > equivariance_tol:
            raise EquivarianceViolated(
                f"{name} momentum map violates equivariance (residual {res:.3e} "
                f"> {equivariance_tol:.1e})"
            )
    diff0 = mu.diff(lam)
    hi0 = max(ck_norm(j, NormParams(2 * l - 1, sched.R)) for j in diff0)
    lo0 = max(ck_norm(j, NormParams(l, sched.R)) for j in diff0)
    if hi0 > admit_alpha or lo0 > admit_beta:
        raise SmallnessViolated(
            f"input too far from the reference: high norm {hi0:.3e} (limit {admit_alpha}), "
            f"low norm {lo0:.3e} (limit {admit_beta})"
        )
    if hs is None:
        hs = HomotopySet(lam, P, mu.degcap, equivariance_tol=equivariance_tol)

    n, D = lam.nvars, mu.degcap
    ledger = RadiusLedger(rho=sched.r(0), c=sched.c, floor=sched.R / 2.0)
    state = IterationState(
        d=0, f_d=mu, psi=JetMap.identity(n, D), psi_inv=JetMap.identity(n, D),
        t_d=sched.t(0), r_d=sched.r(0), rho_d=sched.rho(0),
        res_l=lo0, res_hi=hi0,
        monitor_C=2.0 * lo0 * (1.0 + 1e-12) + 1e-30,
    )
    steps = []
    best = state.res_l
    stagnant = 0
    converged = state.res_l < sched.target_residual
    while not converged and state.d < sched.max_steps:
        state, record = step(state, hs, P, lam, sched, ledger,
                             monitor_fatal=monitor_fatal, mu0=mu)
        steps.append(record)
        if state.res_l < sched.target_residual:
            converged = True
            break
        if state.res_l < best * (1.0 - 1e-3):
            best = state.res_l
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= stagnation_window:
                raise NoConvergence(
                    f"residual stagnated at {state.res_l:.3e} for {stagnant} steps",
                    report=_make_report(config_echo, sched, steps, False, state,
                                        None, ledger, ground_truth, P, lam, mu),
                )
    if not converged:
        raise NoConvergence(
            f"residual {state.res_l:.3e} above target {sched.target_residual:.1e} "
            f"after {sched.max_steps} steps",
            report=_make_report(config_echo, sched, steps, False, state, None,
                                ledger, ground_truth, P, lam, mu),
        )
    psi = invert(state.psi_inv)
    return _make_report(config_echo, sched, steps, True, state, psi, ledger,
                        ground_truth, P, lam, mu)


def _make_report(config_echo, sched, steps, converged, state, psi, ledger,
                 ground_truth, P, lam, mu):
    final = {
        "residual_l": state.res_l,
        "residual_hi": state.res_hi,
        "steps": state.d,
        "ledger_radius": ledger.rho,
    }
    if psi is not None:
        half = NormParams(sched.l_practical, sched.R / 2.0)
        back = pullback(mu, psi)
        final["residual_final"] = max(
            ck_norm(a - b, half) for a, b in zip(back.components, lam.components)
        )
        final["pi_preservation"] = poisson_map_residual(
            psi, P, NormParams(0, sched.R / 2.0)
        )
        final["equiv_drift"] = equivariance_residual(state.f_d, P)
        final["psi"] = psi.to_dict()
        final["psi_inv"] = state.psi_inv.to_dict()
    return Report(
        config=config_echo or {},
        schedule=sched.to_dict(),
        steps=steps,
        converged=converged,
        n_steps=state.d,
        final=final,
        shrink_log=list(ledger.log),
        ground_truth=ground_truth or {},
        generated_at=time.strftime("%Y-%m-%dT%H:%M:%S"),
    )


# ------------------------------------------------------- contraction check


def quadratic_contraction_check(P: PoissonBivector, lam: MomentumMap,
                                hs: HomotopySet, trials: int = 20, seed: int = 0,
                                eps_grid=(1e-1, 1e-2, 1e-3)) -> dict:
    """One exact (unsmoothed) step at several perturbation sizes; fits the
    log-log slope of the post-step residual against the size (quadratic
    contraction means slope 2) and checks the explicit-constant bound
    ||delta(mu - lam)|| <= n(n-1) ||Pi|| ||mu - lam||^2 along the way."""
    from .cohomology import delta as ce_delta
    from .sampling import random_generator_poly

    rng = np.random.default_rng(seed)
    n, D = lam.nvars, hs.D
    k_meas = NormParams(3, 0.5)
    slopes_x, slopes_y = [], []
    constant_check = {"violations": 0, "max_ratio": 0.0, "cases": 0}
    results = {}
    for eps in eps_grid:
        rs = []
        for _ in range(trials):
            g = random_generator_poly(rng, n, D, degrees=(2, 3),
                                      normalize_norm=NormParams(3, 1.0)) * eps
            psi_true = time1_flow(g, P)
            mu = pullback(lam, psi_true)
            size = max(
                ck_norm(a - b, NormParams(3, 1.0))
                for a, b in zip(mu.components, lam.components)
            )
            # explicit-constant inequality for the differential of the error
            dc = ce_delta(momentum_diff_cochain(mu, lam), lam, P)
            for k in (0, 1, 2):
                for r in (0.5, 1.0):
                    lhs = dc.norm(NormParams(k, r))
                    rhs = (
                        n * (n - 1)
                        * P.norm(NormParams(k, r))
                        * max(ck_norm(a - b, NormParams(k + 1, r))
                              for a, b in zip(mu.components, lam.components)) ** 2
                    )
                    constant_check["cases"] += 1
                    if rhs > 0:
                        ratio = lhs / rhs
                        constant_check["max_ratio"] = max(constant_check["max_ratio"], ratio)
                        if lhs > rhs * (1 + 1e-12):
                            constant_check["violations"] += 1
            # one exact Newton step, no smoothing
            corr = hs.apply_h(momentum_diff_cochain(mu, lam)).values[()]
            phi = time1_flow(corr, P)
            after = pullback(mu, phi)
            res = max(ck_norm(a - b, k_meas)
                      for a, b in zip(after.components, lam.components))
            rs.append((size, res))
        mean_res = float(np.mean([r for _, r in rs]))
        results[f"eps={eps:g}"] = {"mean_residual": mean_res,
                                   "max_residual": float(np.max([r for _, r in rs]))}
        slopes_x.append(np.log(eps))
        slopes_y.append(np.log(mean_res))
    slope = float(np.polyfit(slopes_x, slopes_y, 1)[0])
    return {
        "slope": slope,
        "per_eps": results,
        "explicit_constant": constant_check,
    }
