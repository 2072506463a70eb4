"""Command-line entry point.

    nflab <command> --config <path> [--out <dir>] [--seed <int>]

Commands: simulate, equilibria, spectrum, lyapunov, attractor, sweep,
check-hypotheses. Outputs are deterministic for a fixed config and seed;
every emitted file carries the config fingerprint (CSV: leading comment
line; JSON: top-level field). Exit status is nonzero on hard invariant
violations, convergence shortfalls are reported as warnings.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import attractor as attractor_mod
from . import energy as energy_mod
from .config import RunConfig, config_fingerprint, parse_config
from .dynamics import absorbing_radius, simulate
from .equilibria import find_equilibria, solve_constant, spectrum
from .firing import check_hypotheses
from .grid import GridFunction, load_gridfunction_csv, save_gridfunction_csv
from .kernel import class_checks

COMMANDS = ("simulate", "equilibria", "spectrum", "lyapunov", "attractor",
            "sweep", "check-hypotheses")


def _write_json(path: Path, payload: dict, fingerprint: str) -> None:
    payload = {"config_fingerprint": fingerprint, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _echo_config(cfg: RunConfig, out: Path, fingerprint: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_effective.txt").write_text(
        f"# config {fingerprint}\n" + cfg.to_text())


def _initial_state(cfg: RunConfig, params) -> GridFunction:
    if cfg.sim_ic == "zero":
        return GridFunction.constant(params.grid, 0.0)
    rng = np.random.default_rng([cfg.sim_seed, 0])
    _, r_l2 = absorbing_radius(params)
    return attractor_mod.random_state_in_ball(params.grid, rng, r_l2)


def _run_simulate(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    params = cfg.build_params()
    u0 = _initial_state(cfg, params)
    traj = simulate(params, u0, cfg.sim_T, stride=cfg.sim_stride,
                    energy_fn=lambda v: energy_mod.lyapunov(params, v))
    lines = [f"# config: {fingerprint}", "t,l2_norm,lyapunov,min_u,max_u"]
    for i in range(len(traj.times)):
        lines.append(f"{traj.times[i]:.17g},{traj.l2_norm[i]:.17g},"
                     f"{traj.lyapunov[i]:.17g},{traj.min_u[i]:.17g},{traj.max_u[i]:.17g}")
    (out / "traj.csv").write_text("\n".join(lines) + "\n")
    if cfg.sim_snapshots:
        for idx, state in zip(traj.state_indices, traj.states):
            t = traj.times[idx]
            save_gridfunction_csv(state, out / f"state_{t:.6g}.csv",
                                  header_comment=f"config: {fingerprint}")
    report = energy_mod.dissipation_check(params, traj, tol=cfg.energy_tol)
    _write_json(out / "energy_report.json", json.loads(report.to_json()), fingerprint)
    if not report.passed:
        print(f"error: energy increased by {report.max_increase:.3e} "
              f"(tolerance {cfg.energy_tol:g})", file=sys.stderr)
        return 1
    return 0


def _spectrum_payload(rep, kmax: int = 16) -> dict:
    return {
        "eigenvalues": [float(v) for v in rep.eigenvalues[:kmax + 1]],
        "zero_index": rep.zero_index,
        "zero_is_simple": rep.zero_is_simple,
        "eigvec_alignment": rep.eigvec_alignment,
        "hyperbolic": rep.hyperbolic,
    }


def _run_equilibria(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    params = cfg.build_params()
    found = find_equilibria(params, cfg.build_multistart(), newton_tol=cfg.newton_tol,
                            zero_tol=cfg.spec_zero_tol, gap_tol=cfg.spec_gap_tol,
                            hyp_tol=cfg.spec_hyp_tol)
    orbits = []
    for eq in found:
        orbits.append({
            "orbit_id": eq.orbit_id,
            "kind": eq.kind,
            "residual": eq.residual,
            "lyapunov_value": energy_mod.lyapunov(params, eq.state),
            **_spectrum_payload(eq.spectrum),
        })
        save_gridfunction_csv(eq.state, out / f"orbit_{eq.orbit_id}.csv",
                              header_comment=f"config: {fingerprint}")
    _write_json(out / "equilibria.json", {"orbits": orbits}, fingerprint)
    return 0


def _run_spectrum(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    params = cfg.build_params()
    eq = solve_constant(params)
    rep = spectrum(params, eq.state, zero_tol=cfg.spec_zero_tol,
                   gap_tol=cfg.spec_gap_tol, hyp_tol=cfg.spec_hyp_tol)
    from .equilibria import constant_mode_eigenvalues
    analytic = constant_mode_eigenvalues(params, float(eq.state.values[0]), kmax=16)
    payload = {
        "constant": float(eq.state.values[0]),
        "residual": eq.residual,
        "analytic_mode_eigenvalues": [float(v) for v in analytic],
        **_spectrum_payload(rep),
    }
    _write_json(out / "spectrum.json", payload, fingerprint)
    return 0


def _run_lyapunov(cfg: RunConfig, out: Path, fingerprint: str,
                  state_path: str | None) -> int:
    params = cfg.build_params()
    if state_path:
        state = load_gridfunction_csv(state_path)
        value = energy_mod.lyapunov(params, state)
        _write_json(out / "lyapunov.json", {"value": value}, fingerprint)
        return 0
    u0 = _initial_state(cfg, params)
    traj = simulate(params, u0, cfg.sim_T, stride=cfg.sim_stride,
                    energy_fn=lambda v: energy_mod.lyapunov(params, v))
    report = energy_mod.dissipation_check(params, traj, tol=cfg.energy_tol)
    _write_json(out / "lyapunov.json", json.loads(report.to_json()), fingerprint)
    return 0 if report.passed else 1


def _run_attractor(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    params = cfg.build_params()
    spec = attractor_mod.SampleSpec(n_ic=cfg.sim_n_ic, burn_in=cfg.sim_burn_in,
                                    tail_len=cfg.sim_tail, tail_stride=cfg.sim_tail_stride,
                                    seed=cfg.sim_seed, hyp_tol=cfg.spec_hyp_tol)
    sample = attractor_mod.sample_attractor(params, spec,
                                            multistart=cfg.build_multistart())
    _, r_l2 = absorbing_radius(params)
    kinds: dict[str, int] = {}
    for tag in sample.provenance:
        kind = tag.split("(", 1)[0]
        kinds[kind] = kinds.get(kind, 0) + 1
    payload = {
        "n_points": sample.n_points,
        "max_l2": sample.max_l2(),
        "ball_radius_l2": r_l2,
        "inside_ball": sample.max_l2() <= r_l2 + 1e-6,
        "provenance_counts": kinds,
        "params": sample.fingerprint,
    }
    _write_json(out / "attractor.json", payload, fingerprint)
    if cfg.sim_snapshots:
        points_dir = out / "attractor_points"
        points_dir.mkdir(exist_ok=True)
        for i in range(sample.n_points):
            save_gridfunction_csv(GridFunction(params.grid, sample.points[i]),
                                  points_dir / f"point_{i:05d}.csv",
                                  header_comment=f"config: {fingerprint}")
    return 0 if payload["inside_ball"] else 1


def _run_sweep(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    params = cfg.build_params()
    if cfg.sweep_values[-1] != 1.0 or cfg.kernel_kind not in ("bump", "scaled_bump"):
        print("warning: sweep expects a bump-family base with final value 1.0",
              file=sys.stderr)
    family = cfg.sweep_profiles()
    sample = attractor_mod.SampleSpec(n_ic=cfg.sim_n_ic, burn_in=cfg.sim_burn_in,
                                      tail_len=cfg.sim_tail, tail_stride=cfg.sim_tail_stride,
                                      seed=cfg.sim_seed, hyp_tol=cfg.spec_hyp_tol)
    spec = attractor_mod.SweepSpec(sample=sample, multistart=cfg.build_multistart(),
                                   newton_tol=cfg.newton_tol)
    report = attractor_mod.continuity_sweep(params, family, spec)
    (out / "sweep.csv").write_text(report.to_csv(header_comment=f"config: {fingerprint}"))
    _write_json(out / "sweep_floors.json", {
        "floor_A": report.floor_A,
        "floor_E": report.floor_E,
        "monotone": report.monotone,
        "n_failed": sum(1 for r in report.rows if r.failed),
    }, fingerprint)
    return 0


def _run_check_hypotheses(cfg: RunConfig, out: Path, fingerprint: str) -> int:
    fr = cfg.build_firing()
    firing_report = check_hypotheses(fr)
    kernel = cfg.build_kernel()
    kode = class_checks(kernel)
    tau = cfg.grid_tau
    tau_ok = 2.0 * tau / math.e < 1.0
    payload = {
        "firing": json.loads(firing_report.to_json()),
        "kernel": kode,
        "tau_condition": {"value": 2.0 * tau / math.e, "satisfied": tau_ok,
                          "statement": "2*tau/e < 1"},
        "all_pass": bool(firing_report.all_passed and kode["all_ok"] and tau_ok),
    }
    _write_json(out / "hypotheses.json", payload, fingerprint)
    return 0 if payload["all_pass"] else 1


def run_command(cmd: str, cfg: RunConfig, out_dir: str | None = None,
                state_path: str | None = None) -> int:
    """Dispatch one command; returns the process exit status."""
    if cmd not in COMMANDS:
        raise ValueError(f"unknown command {cmd!r}; choose from {COMMANDS}")
    out = Path(out_dir or cfg.out_dir)
    fingerprint = config_fingerprint(cfg)
    _echo_config(cfg, out, fingerprint)
    if cmd == "simulate":
        return _run_simulate(cfg, out, fingerprint)
    if cmd == "equilibria":
        return _run_equilibria(cfg, out, fingerprint)
    if cmd == "spectrum":
        return _run_spectrum(cfg, out, fingerprint)
    if cmd == "lyapunov":
        return _run_lyapunov(cfg, out, fingerprint, state_path)
    if cmd == "attractor":
        return _run_attractor(cfg, out, fingerprint)
    if cmd == "sweep":
        return _run_sweep(cfg, out, fingerprint)
    return _run_check_hypotheses(cfg, out, fingerprint)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="nflab",
                                     description="neural-field numerical laboratory")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="config file path (defaults apply)")
    parser.add_argument("--out", default=None, help="output directory (overrides out.dir)")
    parser.add_argument("--seed", type=int, default=None, help="override sim.seed")
    parser.add_argument("--state", default=None,
                        help="state CSV for the lyapunov command")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = replace(cfg, sim_seed=args.seed)
    try:
        return run_command(args.command, cfg, out_dir=args.out, state_path=args.state)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
