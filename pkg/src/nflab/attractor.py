"""Attractor sampling, Hausdorff semidistances and kernel-continuity sweeps.

The global attractor is approximated by a finite point cloud pooled from
three sources: the equilibria themselves (with rotation orbits expanded),
states collected along trajectories seeded from unstable eigendirections
of the equilibria, and tails of long trajectories from random initial
conditions inside the absorbing ball. All points satisfy the ball bound.

Continuity in the kernel is probed empirically: for a family of profiles
approaching a base profile, equilibria are re-solved (warm-started from
the base representatives) and attractor samples are re-drawn, and the
directed Hausdorff distances between base and member sets are tabulated
together with a sampling floor measured from two independently seeded
samples at the base parameters.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import FlowParams, Trajectory, absorbing_radius, simulate
from .equilibria import (Equilibrium, MultistartSpec, find_equilibria,
                         newton_solve, spectrum)
from .grid import CircleGrid, GridFunction, l2_norm
from .kernel import Kernel, KernelProfile, l1_distance, make_kernel

__all__ = [
    "SampleSpec",
    "SweepSpec",
    "AttractorSample",
    "ContinuityReport",
    "semidistance",
    "semidistance_bruteforce",
    "stack_states",
    "random_state_in_ball",
    "sample_attractor",
    "trace_unstable_manifold",
    "equilibrium_set_distance",
    "continuity_sweep",
]

BALL_SLACK = 1e-6


def stack_states(states: list[GridFunction]) -> np.ndarray:
    return np.stack([s.values for s in states])


def _as_points(obj, grid: CircleGrid | None) -> tuple[np.ndarray, CircleGrid]:
    if isinstance(obj, AttractorSample):
        return obj.points, obj.grid
    if isinstance(obj, np.ndarray):
        if grid is None:
            raise ValueError("grid required when passing raw arrays")
        return obj, grid
    if len(obj) == 0:
        raise ValueError("empty point set")
    return stack_states(list(obj)), obj[0].grid


def semidistance(a, b, grid: CircleGrid | None = None) -> float:
    """Directed Hausdorff distance sup_{x in a} inf_{y in b} ||x - y||_L2.

    Accepts lists of GridFunctions, AttractorSamples, or (m, n) arrays with
    an explicit grid. Row-vectorized over the second set; agrees bit for
    bit with the brute-force double loop.
    """
    pa, ga = _as_points(a, grid)
    pb, gb = _as_points(b, grid)
    if ga != gb:
        raise ValueError("grid mismatch")
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise ValueError("empty point set")
    w = ga.weight
    worst = -np.inf
    for x in pa:
        d = np.sqrt(w * ((x[None, :] - pb) ** 2).sum(axis=1))
        nearest = d.min()
        if nearest > worst:
            worst = float(nearest)
    return worst


def semidistance_bruteforce(a, b, grid: CircleGrid | None = None) -> float:
    """The definition, as an explicit double loop; reference for the fast path."""
    pa, ga = _as_points(a, grid)
    pb, gb = _as_points(b, grid)
    if ga != gb:
        raise ValueError("grid mismatch")
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise ValueError("empty point set")
    w = ga.weight
    return max(min(float(np.sqrt(w * np.sum((x - y) ** 2))) for y in pb) for x in pa)


def _semidistance_both(pa: np.ndarray, pb: np.ndarray, w: float) -> tuple[float, float]:
    """Both directed distances from one pass over the pair matrix."""
    fwd = -np.inf
    mins_b = np.full(pb.shape[0], np.inf)
    for x in pa:
        d = np.sqrt(w * ((x[None, :] - pb) ** 2).sum(axis=1))
        nearest = d.min()
        if nearest > fwd:
            fwd = float(nearest)
        np.minimum(mins_b, d, out=mins_b)
    return fwd, float(mins_b.max())


def random_state_in_ball(grid: CircleGrid, rng: np.random.Generator,
                         radius: float, kmax: int = 16) -> GridFunction:
    """Smooth random state with L2 norm uniformly drawn below radius.

    Random Fourier series with 1/(1+k)^2 amplitude decay, rescaled. Smooth
    draws keep pointwise values moderate, matching states the flow itself
    produces inside the ball.
    """
    x = grid.points
    u = np.zeros(grid.n)
    for k in range(kmax + 1):
        amp = 1.0 / (1.0 + k) ** 2
        u += amp * rng.normal() * np.cos(np.pi * k * x / grid.tau)
        if k:
            u += amp * rng.normal() * np.sin(np.pi * k * x / grid.tau)
    norm = l2_norm(u, grid.weight)
    target = radius * rng.uniform()
    return GridFunction(grid, u * (target / norm) if norm > 0 else u)


@dataclass(frozen=True)
class SampleSpec:
    """Sampling plan for one attractor approximation."""

    n_ic: int = 64
    burn_in: float = 60.0
    tail_len: int = 20
    tail_stride: float = 0.5
    seed: int = 0
    ic_kmax: int = 16
    trace_time: float = 40.0
    trace_eps: float | None = None     # default min(1e-3 * R_l2, 0.1 * gap)
    trace_min_spacing: float = 0.01
    hyp_tol: float = 1e-3


@dataclass
class AttractorSample:
    """Finite point cloud approximating the attractor, with provenance."""

    grid: CircleGrid
    points: np.ndarray = field(repr=False)
    provenance: list[str] = field(repr=False)
    fingerprint: str = ""

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def max_l2(self) -> float:
        w = self.grid.weight
        return float(np.sqrt(w * (self.points ** 2).sum(axis=1).max()))


def _params_fingerprint(p: FlowParams) -> str:
    k = p.kernel
    return (f"kind={k.profile.kind},a={k.profile.a:.6g},tau={p.grid.tau:.6g},"
            f"n={p.grid.n},beta={p.firing.beta:.6g},theta={p.firing.theta:.6g},"
            f"h={p.h:.6g},dt={p.dt:.6g}")


def _thin_by_spacing(states: list[np.ndarray], weight: float,
                     min_spacing: float) -> list[np.ndarray]:
    """Keep a state only once it is min_spacing away (L2) from the last kept one."""
    kept: list[np.ndarray] = []
    for s in states:
        if not kept or l2_norm(s - kept[-1], weight) >= min_spacing:
            kept.append(s)
    return kept


def trace_unstable_manifold(p: FlowParams, eq: Equilibrium, eps: float | None = None,
                            T: float = 40.0, *, min_spacing: float = 0.01,
                            hyp_tol: float = 1e-3) -> list[GridFunction]:
    """Forward trajectories seeded along each unstable eigendirection.

    Returns states collected along the traces, thinned to min_spacing in
    L2. A stable equilibrium contributes nothing (empty list).
    """
    rep = eq.spectrum if eq.spectrum is not None else spectrum(p, eq.state, hyp_tol=hyp_tol)
    unstable = rep.unstable(hyp_tol)
    if not unstable:
        return []
    _, r_l2 = absorbing_radius(p)
    if eps is None:
        gap = min(abs(rep.eigenvalues[i]) for i in unstable)
        eps = min(1e-3 * r_l2, 0.1 * gap)
    w = p.grid.weight
    out: list[GridFunction] = []
    for idx in unstable:
        phi = rep.vectors[:, idx]
        phi = phi / l2_norm(phi, w)
        for sign in (1.0, -1.0):
            u0 = GridFunction(p.grid, eq.state.values + sign * eps * phi)
            traj = simulate(p, u0, T, stride=1)
            raw = [s.values for s in traj.states]
            for s in _thin_by_spacing(raw, w, min_spacing):
                out.append(GridFunction(p.grid, s))
    return out


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("NFLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_indexed(fn, count: int) -> list:
    """Run fn(i) for i in range(count); results ordered by index regardless
    of scheduling. Worker count is capped by NFLAB_THREADS (default 1)."""
    workers = _worker_count()
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def sample_attractor(p: FlowParams, spec: SampleSpec | None = None,
                     equilibria: list[Equilibrium] | None = None,
                     multistart: MultistartSpec | None = None) -> AttractorSample:
    """Pool equilibrium orbits, unstable-manifold traces and trajectory tails."""
    spec = spec or SampleSpec()
    if equilibria is None:
        equilibria = find_equilibria(p, multistart or MultistartSpec(seed=spec.seed),
                                     hyp_tol=spec.hyp_tol)
    _, r_l2 = absorbing_radius(p)
    points: list[np.ndarray] = []
    provenance: list[str] = []

    for eq in equilibria:
        if eq.is_constant:
            points.append(eq.state.values.copy())
            provenance.append(f"equilibrium(orbit={eq.orbit_id})")
        else:
            for k in range(p.grid.n):
                points.append(np.roll(eq.state.values, -k))
                provenance.append(f"equilibrium(orbit={eq.orbit_id},shift={k})")

    for eq in equilibria:
        traces = trace_unstable_manifold(p, eq, eps=spec.trace_eps, T=spec.trace_time,
                                         min_spacing=spec.trace_min_spacing,
                                         hyp_tol=spec.hyp_tol)
        for j, s in enumerate(traces):
            points.append(s.values)
            provenance.append(f"trace(orbit={eq.orbit_id},state={j})")

    tail_steps = max(1, int(round(spec.tail_stride / p.dt)))
    total_T = spec.burn_in + spec.tail_len * spec.tail_stride

    def run_ic(i: int) -> list[np.ndarray]:
        rng = np.random.default_rng([spec.seed, i])
        u0 = random_state_in_ball(p.grid, rng, r_l2, kmax=spec.ic_kmax)
        traj = simulate(p, u0, total_T, stride=1)
        first_tail = int(round(spec.burn_in / p.dt))
        return [traj.states[j].values
                for j in range(first_tail, len(traj.states), tail_steps)][:spec.tail_len]

    for i, tail in enumerate(_map_indexed(run_ic, spec.n_ic)):
        for j, s in enumerate(tail):
            points.append(s)
            provenance.append(f"tail(ic={i},state={j})")

    cloud = np.stack(points)
    sample = AttractorSample(grid=p.grid, points=cloud, provenance=provenance,
                             fingerprint=_params_fingerprint(p))
    if sample.max_l2() > r_l2 + BALL_SLACK:
        raise RuntimeError("sampled point escapes the absorbing ball; "
                           f"max l2 = {sample.max_l2():.6g} > {r_l2:.6g}")
    return sample


def _expand_orbits(equilibria: list[Equilibrium]) -> np.ndarray:
    pts: list[np.ndarray] = []
    for eq in equilibria:
        if eq.is_constant:
            pts.append(eq.state.values)
        else:
            n = eq.state.grid.n
            pts.extend(np.roll(eq.state.values, -k) for k in range(n))
    if not pts:
        raise ValueError("empty equilibrium set")
    return np.stack(pts)


def equilibrium_set_distance(e0: list[Equilibrium],
                             e1: list[Equilibrium]) -> tuple[float, float]:
    """Both directed distances between equilibrium sets, orbits expanded."""
    p0 = _expand_orbits(e0)
    p1 = _expand_orbits(e1)
    w = e0[0].state.grid.weight
    return _semidistance_both(p0, p1, w)


@dataclass(frozen=True)
class SweepSpec:
    """Plan for a kernel-continuity sweep."""

    sample: SampleSpec = SampleSpec()
    multistart: MultistartSpec = MultistartSpec()
    newton_tol: float = 1e-10
    floor_seed_offset: int = 7919    # seed shift for the independent floor sample


@dataclass
class SweepRow:
    s: float
    l1_dist: float
    dE_fwd: float
    dE_bwd: float
    dA_fwd: float
    dA_bwd: float
    n_orbits_found: int
    failed: bool = False


@dataclass
class ContinuityReport:
    """Distance table for a kernel family, plus sampling floors.

    floor_A / floor_E are self-distances of independently seeded attractor
    samples / equilibrium searches at the base parameters; distances below
    the floor are indistinguishable from sampling noise. Floors are clipped
    from below at the solver tolerance since equilibria are only located to
    that accuracy.
    """

    rows: list[SweepRow]
    floor_A: float
    floor_E: float
    monotone: dict[str, bool]

    def to_csv(self, header_comment: str | None = None) -> str:
        lines = []
        if header_comment:
            lines.append(f"# {header_comment}")
        lines.append(f"# floor_A={self.floor_A:.17g} floor_E={self.floor_E:.17g}")
        lines.append("s,l1_dist,dE_fwd,dE_bwd,dA_fwd,dA_bwd,n_orbits_found")
        for r in self.rows:
            lines.append(f"{r.s:.17g},{r.l1_dist:.17g},{r.dE_fwd:.17g},{r.dE_bwd:.17g},"
                         f"{r.dA_fwd:.17g},{r.dA_bwd:.17g},{r.n_orbits_found}")
        return "\n".join(lines) + "\n"


def _monotone_nonincreasing(values: list[float]) -> bool:
    return all(values[i] >= values[i + 1] for i in range(len(values) - 1))


def continuity_sweep(base: FlowParams, family: list[KernelProfile],
                     spec: SweepSpec | None = None) -> ContinuityReport:
    """Tabulate equilibrium and attractor distances for a kernel family.

    The family must end with the base profile (the self-comparison row).
    Equilibria of each member are warm-started from the base
    representatives; members whose warm starts fail to converge are
    recorded as failed rows and skipped.
    """
    spec = spec or SweepSpec()
    if not family:
        raise ValueError("empty kernel family")
    grid = base.grid
    base_kernel = make_kernel(family[-1], grid)
    if float(np.max(np.abs(base_kernel.samples.values
                           - base.kernel.samples.values))) > 1e-12:
        raise ValueError("family must include the base kernel as its last element")

    e_base = find_equilibria(base, spec.multistart, newton_tol=spec.newton_tol,
                             hyp_tol=spec.sample.hyp_tol)
    a_base = sample_attractor(base, spec.sample, equilibria=e_base)

    # sampling floor: independent seeds, identical parameters
    floor_sample_spec = replace(spec.sample, seed=spec.sample.seed + spec.floor_seed_offset)
    a_floor = sample_attractor(base, floor_sample_spec, equilibria=e_base)
    fa_fwd, fa_bwd = _semidistance_both(a_base.points, a_floor.points, grid.weight)
    floor_multistart = replace(spec.multistart, seed=spec.multistart.seed + spec.floor_seed_offset)
    e_floor = find_equilibria(base, floor_multistart, newton_tol=spec.newton_tol,
                              hyp_tol=spec.sample.hyp_tol)
    fe_fwd, fe_bwd = equilibrium_set_distance(e_base, e_floor)
    floor_a = max(fa_fwd, fa_bwd, spec.newton_tol)
    floor_e = max(fe_fwd, fe_bwd, spec.newton_tol)

    rows: list[SweepRow] = []
    for idx, profile in enumerate(family):
        member_kernel = make_kernel(profile, grid)
        member = replace(base, kernel=member_kernel)
        l1 = l1_distance(member_kernel, base.kernel)
        s_param = profile.sweep_param
        warm = [eq.state for eq in e_base]
        member_ms = replace(spec.multistart, seed=spec.multistart.seed + 1000 + idx)
        e_member = find_equilibria(member, member_ms, newton_tol=spec.newton_tol,
                                   hyp_tol=spec.sample.hyp_tol, warm_starts=warm)
        if not e_member:
            rows.append(SweepRow(s=s_param, l1_dist=l1, dE_fwd=float("nan"),
                                 dE_bwd=float("nan"), dA_fwd=float("nan"),
                                 dA_bwd=float("nan"), n_orbits_found=0, failed=True))
            continue
        de_fwd, de_bwd = equilibrium_set_distance(e_base, e_member)
        member_sample_spec = replace(spec.sample, seed=spec.sample.seed + 500 + idx)
        a_member = sample_attractor(member, member_sample_spec, equilibria=e_member)
        da_fwd, da_bwd = _semidistance_both(a_base.points, a_member.points, grid.weight)
        rows.append(SweepRow(s=s_param, l1_dist=l1, dE_fwd=de_fwd, dE_bwd=de_bwd,
                             dA_fwd=da_fwd, dA_bwd=da_bwd,
                             n_orbits_found=len(e_member)))

    ok_rows = [r for r in rows if not r.failed]
    monotone = {
        col: _monotone_nonincreasing([getattr(r, col) for r in ok_rows])
        for col in ("l1_dist", "dE_fwd", "dE_bwd", "dA_fwd", "dA_bwd")
    }
    return ContinuityReport(rows=rows, floor_A=floor_a, floor_E=floor_e,
                            monotone=monotone)
