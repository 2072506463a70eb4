"""Energy functional of the flow and verification of its dissipation.

E(u) = integral over the circle of
         -1/2 * S * (J*S) + Phi(S) - h*S,      S = f(u),
with Phi the primitive of the inverse rate. E is nonincreasing along
trajectories of the flow; this module evaluates it and checks discrete
monotonicity to a relative tolerance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dynamics import FlowParams, Trajectory
from .firing import primitive_of_inverse
from .grid import GridFunction
from .kernel import convolve_values

__all__ = ["EnergyReport", "lyapunov", "dissipation_check"]


def lyapunov(p: FlowParams, u) -> float:
    """Energy of a state (GridFunction or raw sample vector)."""
    values = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=np.float64)
    fr = p.firing
    from scipy.special import expit

    s = expit(fr.beta * (values - fr.theta))
    integrand = -0.5 * s * convolve_values(p.kernel, s) + primitive_of_inverse(fr, s) - p.h * s
    return float(p.grid.weight * np.sum(integrand))


@dataclass
class EnergyReport:
    """Monotonicity report for the energy along one trajectory."""

    values: np.ndarray
    max_increase: float
    passed: bool
    tolerance: float

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def max(self) -> float:
        return float(np.max(self.values))

    def to_json(self) -> str:
        return json.dumps({
            "min": self.min,
            "max": self.max,
            "max_increase": self.max_increase,
            "pass": self.passed,
            "tolerance": self.tolerance,
        }, indent=2, sort_keys=True)


def dissipation_check(p: FlowParams, traj: Trajectory, tol: float = 1e-9) -> EnergyReport:
    """Check that the energy never rises by more than tol*(1 + |E|) per step.

    Uses the per-step lyapunov column when the trajectory carries one,
    otherwise evaluates the energy on the stored snapshots.
    """
    if traj.has_energy:
        values = traj.lyapunov
    else:
        if not traj.states:
            raise ValueError("trajectory holds no states")
        values = np.array([lyapunov(p, s) for s in traj.states])
    increases = np.diff(values)
    allowed = tol * (1.0 + np.abs(values[:-1]))
    max_increase = float(np.max(increases)) if len(increases) else 0.0
    passed = bool(np.all(increases <= allowed))
    return EnergyReport(values=values, max_increase=max_increase,
                        passed=passed, tolerance=tol)


def energy_lower_bound(p: FlowParams) -> float:
    """Coarse lower bound for E on the absorbing ball.

    |E| <= 2*tau*(s_max^2/2 + L + h*s_max) since |J*S| <= ||J||_L1 * s_max
    pointwise and ||J||_L1 = 1.
    """
    fr = p.firing
    tau = p.grid.tau
    return -2.0 * tau * (0.5 * fr.s_max ** 2 + fr.L + p.h * fr.s_max)
