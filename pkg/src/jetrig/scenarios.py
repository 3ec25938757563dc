"""Run configuration and seeded scenario generation.

A scenario realizes the engine's hypotheses: the linear structure on the
dual of a compact semisimple algebra, the identity reference map, and a
nearby momentum map manufactured as the pullback of the reference by a
known Hamiltonian time-1 flow.  The generating flow is returned as ground
truth so end-to-end runs can be audited.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EquivarianceViolated
from .jets import Jet, NormParams, ck_norm
from .jetgroup import JetMap, pullback, time1_flow
from .lie_algebra import LieAlgebra, resolve_algebra
from .nashmoser import Report, derive_schedule, run_iteration
from .poisson import (
    MomentumMap,
    PoissonBivector,
    equivariance_residual,
    identity_momentum,
    linear_poisson,
)
from .sampling import random_generator_poly


@dataclass
class RunConfig:
    """Everything a run needs; serializes to/from JSON and is echoed in reports."""

    algebra: str = "so3"
    degcap: int = 6
    radius: float = 1.0
    t0: float = 2.0
    l_practical: int = 3
    max_steps: int = 12
    target_residual: float = 1e-10
    epsilon: float = 1e-2
    generator: object = "random"        # "random" or a list of {"alpha", "coeff"} terms
    generator_degrees: tuple = (2, 3)
    mu_file: str = None
    seed: int = 0
    out_dir: str = None
    c: float = 2.0
    delta: object = 1
    tau: object = 2
    equivariance_tol: float = 1e-9
    admit_alpha: float = 1.0
    admit_beta: float = 0.5
    stagnation_window: int = 3
    monitor_fatal: bool = False

    def __post_init__(self):
        if self.degcap < 3:
            raise ValueError(f"degcap must be at least 3, got {self.degcap}")
        if not (0.0 < self.radius <= 1.0):
            raise ValueError(f"radius must lie in (0, 1], got {self.radius}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator_degrees"] = list(self.generator_degrees)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "generator_degrees" in d:
            d["generator_degrees"] = tuple(d["generator_degrees"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def generate_scenario(cfg: RunConfig):
    """Build (P, lam, mu, psi_true, ground_truth) from a config.

    With an explicit ``mu_file`` the perturbing flow is unknown and
    psi_true is None; otherwise mu = lam o psi_true with psi_true the
    time-1 flow of epsilon times a seeded generator polynomial.
    """
    algebra = resolve_algebra(cfg.algebra)
    P = linear_poisson(algebra, degcap=cfg.degcap)
    lam = identity_momentum(algebra, cfg.degcap)
    n = algebra.dim

    if cfg.mu_file:
        with open(cfg.mu_file) as fh:
            mu = MomentumMap.from_dict(json.load(fh), algebra)
        psi_true = None
        g = None
    else:
        if cfg.epsilon == 0.0:
            g = Jet.zero(n, cfg.degcap)
        elif cfg.generator == "random":
            rng = np.random.default_rng(cfg.seed)
            g = random_generator_poly(
                rng, n, cfg.degcap, degrees=cfg.generator_degrees,
                normalize_norm=NormParams(cfg.l_practical, 1.0),
            ) * cfg.epsilon
        else:
            g = Jet.from_terms(
                n, cfg.degcap,
                [(tuple(t["alpha"]), float(t["coeff"])) for t in cfg.generator],
            ) * cfg.epsilon
        psi_true = time1_flow(g, P)
        mu = pullback(lam, psi_true)

    res = equivariance_residual(mu, P)
    if res > cfg.equivariance_tol:
        raise EquivarianceViolated(
            f"scenario produced a non-equivariant momentum map (residual {res:.3e})"
        )
    params = NormParams(cfg.l_practical, cfg.radius)
    ground_truth = {
        "perturbation_norm_l": max(
            ck_norm(a - b, params) for a, b in zip(mu.components, lam.components)
        ),
        "equivariance_residual": res,
        "generator": g.to_dict() if g is not None else None,
        "psi_true": psi_true.to_dict() if psi_true is not None else None,
    }
    return P, lam, mu, psi_true, ground_truth


def run(cfg: RunConfig) -> Report:
    """Generate the scenario for a config and drive the iteration."""
    P, lam, mu, _, ground_truth = generate_scenario(cfg)
    sched = derive_schedule(
        lam.nvars, cfg.delta, cfg.tau,
        l_practical=cfg.l_practical, t0=cfg.t0, R=cfg.radius, c=cfg.c,
        max_steps=cfg.max_steps, target_residual=cfg.target_residual,
    )
    return run_iteration(
        P, lam, mu, sched,
        equivariance_tol=cfg.equivariance_tol,
        admit_alpha=cfg.admit_alpha, admit_beta=cfg.admit_beta,
        stagnation_window=cfg.stagnation_window,
        monitor_fatal=cfg.monitor_fatal,
        config_echo=cfg.to_dict(),
        ground_truth=ground_truth,
    )
