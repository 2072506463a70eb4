"""Logistic firing-rate nonlinearity and machine checks of its standing assumptions.

f(x) = 1 / (1 + exp(-beta*(x - theta)))    rates in (0, 1)
f'(x) = beta*s*(1-s),  f''(x) = beta^2*s*(1-s)*(1-2s)   with s = f(x)
f^{-1}(s) = theta + log(s/(1-s)) / beta
Phi(s) = integral of f^{-1} from 0 to s
       = theta*s + (s*log(s) + (1-s)*log(1-s)) / beta

Everything is evaluated through the sigmoid value s, which keeps the
formulas stable for large |x|.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, logit, xlogy

__all__ = [
    "FiringRate",
    "SampleSpec",
    "HypothesisCheck",
    "HypothesisReport",
    "f_eval",
    "f_inverse",
    "primitive_of_inverse",
    "check_hypotheses",
]

S_MAX = 1.0


@dataclass(frozen=True)
class FiringRate:
    """Logistic rate with gain beta and threshold theta.

    beta = 1, theta = 0 is the reference sigmoid; there the flow map is a
    contraction (tight Lipschitz constant 1/4) and the equilibrium is
    unique. Steeper gains (beta > 4) admit nonconstant equilibria.
    """

    beta: float = 1.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def k1(self) -> float:
        """Tight Lipschitz constant of f: sup f' = beta/4."""
        return self.beta / 4.0

    @property
    def k2(self) -> float:
        """Intercept in the linear growth bound |f(x)| <= k1*|x| + k2."""
        return 0.5 + self.k1 * abs(self.theta)

    @property
    def s_max(self) -> float:
        return S_MAX

    @property
    def L(self) -> float:
        """Bound on |Phi| over [0, s_max]; log(2)/beta for theta = 0."""
        if self.theta == 0.0:
            return math.log(2.0) / self.beta
        s = np.linspace(0.0, S_MAX, 20001)
        return float(np.max(np.abs(primitive_of_inverse(self, s))))


def f_eval(fr: FiringRate, x, order: int = 0):
    """f, f' or f'' (order 0, 1, 2) at x; scalar in, scalar out.

    Derivatives use the complementary sigmoid, 1 - sigma(z) = sigma(-z),
    so they stay strictly positive up to the double-precision underflow of
    exp (|z| ~ 745) instead of collapsing at the saturation of 1 - s.
    """
    xs = np.asarray(x, dtype=np.float64)
    z = fr.beta * (xs - fr.theta)
    sp = expit(z)
    if order == 0:
        out = sp
    else:
        sm = expit(-z)
        if order == 1:
            out = fr.beta * sp * sm
        elif order == 2:
            out = fr.beta ** 2 * sp * sm * (sm - sp)
        else:
            raise ValueError(f"order must be 0, 1 or 2, got {order}")
    return float(out) if np.isscalar(x) else out


def f_inverse(fr: FiringRate, s):
    """Inverse rate; defined on the open interval (0, s_max)."""
    ss = np.asarray(s, dtype=np.float64)
    if np.any(ss <= 0.0) or np.any(ss >= S_MAX):
        raise ValueError(f"inverse rate requires values in (0, {S_MAX})")
    out = fr.theta + logit(ss) / fr.beta
    return float(out) if np.isscalar(s) else out


def primitive_of_inverse(fr: FiringRate, s):
    """Phi(s): the closed form above, exact limits 0 at both endpoints."""
    ss = np.asarray(s, dtype=np.float64)
    if np.any(ss < 0.0) or np.any(ss > S_MAX):
        raise ValueError(f"primitive is defined on [0, {S_MAX}]")
    out = fr.theta * ss + (xlogy(ss, ss) + xlogy(1.0 - ss, 1.0 - ss)) / fr.beta
    return float(out) if np.isscalar(s) else out


@dataclass(frozen=True)
class SampleSpec:
    """Where and how densely the hypothesis checks sample the real line."""

    lo: float = -50.0
    hi: float = 50.0
    count: int = 10_000
    seed: int = 0
    tol: float = 1e-9


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    measured: dict
    bound: dict
    tolerance: float


@dataclass
class HypothesisReport:
    checks: list[HypothesisCheck]
    sample_count: int
    seed: int
    tolerance: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        payload = {
            "all_passed": self.all_passed,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "checks": [
                {"hypothesis": c.name, "pass": c.passed, "measured": c.measured,
                 "bound": c.bound, "tolerance": c.tolerance}
                for c in self.checks
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _sample_points(spec: SampleSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    xs = np.concatenate([
        np.linspace(spec.lo, spec.hi, spec.count // 2),
        rng.uniform(spec.lo, spec.hi, spec.count - spec.count // 2),
    ])
    return np.sort(xs)


def check_hypotheses(fr: FiringRate | Callable, spec: SampleSpec | None = None) -> HypothesisReport:
    """Sampling-based verification of the rate assumptions.

    H1: f is C^1 with 0 < f' < k1 everywhere.
    H2: f nondecreasing with range in (0, s_max) and |Phi| bounded by L.
    H4: f is C^2 (analytic second derivative consistent with differences).

    Accepts a plain callable as a negative control; derivatives are then
    estimated by central differences and the Phi bound is skipped.
    """
    spec = spec or SampleSpec()
    xs = _sample_points(spec)
    analytic = isinstance(fr, FiringRate)

    if analytic:
        fx = f_eval(fr, xs, 0)
        fpx = f_eval(fr, xs, 1)
        fppx = f_eval(fr, xs, 2)
        k1 = fr.k1
        smax = fr.s_max
    else:
        fx = np.asarray(fr(xs), dtype=np.float64)
        eps = 1e-5
        fpx = (np.asarray(fr(xs + eps)) - np.asarray(fr(xs - eps))) / (2 * eps)
        fppx = (np.asarray(fr(xs + eps)) - 2 * fx + np.asarray(fr(xs - eps))) / eps ** 2
        k1 = float(np.max(fpx))
        smax = float(np.max(np.abs(fx)))

    tol = spec.tol
    checks: list[HypothesisCheck] = []

    sup_fp = float(np.max(fpx))
    h1_pass = bool(np.all(fpx > 0.0) and sup_fp <= k1 + tol)
    h1_measured = {"sup_fprime": sup_fp, "min_fprime": float(np.min(fpx))}
    h1_bound = {"k1_tight": k1}
    if analytic and fr.beta == 1.0:
        # the unit bound is the loose constant conventionally quoted for beta = 1
        h1_bound["k1_loose"] = 1.0
    checks.append(HypothesisCheck("H1", h1_pass, h1_measured, h1_bound, tol))

    nondecreasing = bool(np.all(np.diff(fx) >= -tol))
    # open range verified to tolerance: at double saturation f equals s_max exactly
    in_range = bool(np.all(fx > 0.0) and np.all(fx < smax + tol)) if smax > 0 else False
    h2_measured = {"min_f": float(np.min(fx)), "max_f": float(np.max(fx)),
                   "nondecreasing": nondecreasing}
    h2_bound = {"s_max": smax}
    if analytic:
        s_grid = np.linspace(0.0, fr.s_max, 10001)
        sup_phi = float(np.max(np.abs(primitive_of_inverse(fr, s_grid))))
        phi_ok = sup_phi <= fr.L + tol
        h2_measured["sup_abs_phi"] = sup_phi
        h2_bound["L"] = fr.L
    else:
        phi_ok = True
    checks.append(HypothesisCheck("H2", bool(nondecreasing and in_range and phi_ok),
                                  h2_measured, h2_bound, tol))

    sup_fpp = float(np.max(np.abs(fppx)))
    if analytic:
        eps = 1e-5
        fd = (f_eval(fr, xs + eps, 1) - f_eval(fr, xs - eps, 1)) / (2 * eps)
        fd_defect = float(np.max(np.abs(fd - fppx)))
        h4_pass = bool(np.isfinite(sup_fpp) and fd_defect <= 1e-5 * (1.0 + sup_fpp))
        h4_measured = {"sup_abs_fsecond": sup_fpp, "fd_consistency_defect": fd_defect}
    else:
        h4_pass = bool(np.isfinite(sup_fpp))
        h4_measured = {"sup_abs_fsecond": sup_fpp}
    checks.append(HypothesisCheck("H4", h4_pass, h4_measured,
                                  {"fsecond_finite": True}, tol))

    return HypothesisReport(checks=checks, sample_count=len(xs),
                            seed=spec.seed, tolerance=tol)
