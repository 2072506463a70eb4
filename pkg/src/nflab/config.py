"""Run configuration: flat key-value files with dotted sections.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored. Unknown keys are rejected. Every value has a documented default;
an empty (or missing) file yields the default run. See docs/config.md.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .dynamics import FlowParams
from .equilibria import MultistartSpec
from .firing import FiringRate
from .grid import CircleGrid, build_grid
from .kernel import (Kernel, KernelProfile, bump_profile, make_kernel,
                     mexican_hat_profile, scaled_bump_profile, table_profile)

__all__ = ["RunConfig", "parse_config", "parse_config_text", "config_fingerprint"]


@dataclass(frozen=True)
class RunConfig:
    grid_tau: float = 1.2
    grid_n: int = 256
    kernel_kind: str = "bump"
    kernel_a: float = 1.0
    kernel_b1: float = 8.0
    kernel_b2: float = 2.0
    kernel_table_path: str = ""
    firing_beta: float = 1.0
    firing_theta: float = 0.0
    dynamics_h: float = 0.5
    dynamics_dt: float = 0.05
    dynamics_integrator: str = "etd1"
    sim_T: float = 40.0
    sim_stride: int = 10
    sim_n_ic: int = 64
    sim_seed: int = 0
    sim_burn_in: float = 60.0
    sim_tail: int = 20
    sim_tail_stride: float = 0.5
    sim_ic: str = "zero"
    sim_snapshots: bool = False
    spec_zero_tol: float = 1e-6
    spec_gap_tol: float = 1e-3
    spec_hyp_tol: float = 1e-3
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    energy_tol: float = 1e-9
    sweep_family: str = "scaled_bump"
    sweep_values: tuple[float, ...] = (0.90, 0.95, 0.99, 1.0)
    out_dir: str = "out"

    def validate(self) -> None:
        if not self.grid_tau > 1.0:
            raise ValueError("grid.tau: tau must exceed 1")
        if self.grid_n < 8 or self.grid_n % 2:
            raise ValueError("grid.n: must be an even integer >= 8")
        if not self.dynamics_h > 0:
            raise ValueError("dynamics.h: must be positive")
        if not self.dynamics_dt > 0:
            raise ValueError("dynamics.dt: must be positive")
        if not self.firing_beta > 0:
            raise ValueError("firing.beta: must be positive")
        if self.dynamics_integrator not in ("etd1", "rk4"):
            raise ValueError("dynamics.integrator: must be etd1 or rk4")
        if self.kernel_kind not in ("bump", "scaled_bump", "mexican_hat", "table"):
            raise ValueError("kernel.kind: unknown kind")
        if self.sim_ic not in ("zero", "random"):
            raise ValueError("sim.ic: must be zero or random")
        if not 0.0 < self.kernel_a <= 1.0:
            raise ValueError("kernel.a: must lie in (0, 1]")

    # builders -----------------------------------------------------------

    def build_grid(self) -> CircleGrid:
        return build_grid(self.grid_tau, self.grid_n)

    def build_profile(self, a: float | None = None) -> KernelProfile:
        kind = self.kernel_kind
        if kind == "bump":
            return bump_profile()
        if kind == "scaled_bump":
            return scaled_bump_profile(self.kernel_a if a is None else a)
        if kind == "mexican_hat":
            return mexican_hat_profile(self.kernel_b1, self.kernel_b2, self.kernel_a)
        xs, vals = [], []
        with open(self.kernel_table_path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.startswith("x,"):
                    continue
                sx, sv = line.split(",")
                xs.append(float(sx))
                vals.append(float(sv))
        return table_profile(np.asarray(xs), np.asarray(vals))

    def build_kernel(self, grid: CircleGrid | None = None) -> Kernel:
        return make_kernel(self.build_profile(), grid or self.build_grid())

    def build_firing(self) -> FiringRate:
        return FiringRate(beta=self.firing_beta, theta=self.firing_theta)

    def build_params(self) -> FlowParams:
        return FlowParams(kernel=self.build_kernel(), firing=self.build_firing(),
                          h=self.dynamics_h, dt=self.dynamics_dt,
                          integrator=self.dynamics_integrator)

    def build_multistart(self) -> MultistartSpec:
        return MultistartSpec(seed=self.sim_seed)

    def sweep_profiles(self) -> list[KernelProfile]:
        if self.sweep_family != "scaled_bump":
            raise ValueError("sweep.family: only scaled_bump is supported")
        return [scaled_bump_profile(a) for a in self.sweep_values]

    # serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for key, val in sorted(_KEYMAP.items()):
            raw = getattr(self, val)
            if isinstance(raw, tuple):
                raw = ",".join(f"{v:g}" for v in raw)
            elif isinstance(raw, bool):
                raw = "true" if raw else "false"
            elif isinstance(raw, float):
                raw = f"{raw:.17g}"
            lines.append(f"{key} = {raw}")
        return "\n".join(lines) + "\n"


_KEYMAP = {
    "grid.tau": "grid_tau",
    "grid.n": "grid_n",
    "kernel.kind": "kernel_kind",
    "kernel.a": "kernel_a",
    "kernel.b1": "kernel_b1",
    "kernel.b2": "kernel_b2",
    "kernel.table_path": "kernel_table_path",
    "firing.beta": "firing_beta",
    "firing.theta": "firing_theta",
    "dynamics.h": "dynamics_h",
    "dynamics.dt": "dynamics_dt",
    "dynamics.integrator": "dynamics_integrator",
    "sim.T": "sim_T",
    "sim.stride": "sim_stride",
    "sim.n_ic": "sim_n_ic",
    "sim.seed": "sim_seed",
    "sim.burn_in": "sim_burn_in",
    "sim.tail": "sim_tail",
    "sim.tail_stride": "sim_tail_stride",
    "sim.ic": "sim_ic",
    "sim.snapshots": "sim_snapshots",
    "spec.zero_tol": "spec_zero_tol",
    "spec.gap_tol": "spec_gap_tol",
    "spec.hyp_tol": "spec_hyp_tol",
    "newton.tol": "newton_tol",
    "newton.max_iter": "newton_max_iter",
    "energy.tol": "energy_tol",
    "sweep.family": "sweep_family",
    "sweep.values": "sweep_values",
    "out.dir": "out_dir",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, attr: str, raw: str):
    ftype = _FIELD_TYPES[attr]
    try:
        if ftype == "int":
            return int(raw)
        if ftype == "float":
            return float(raw)
        if ftype == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if ftype.startswith("tuple"):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError as exc:
        raise ValueError(f"{key}: cannot parse {raw!r}") from exc


def parse_config_text(text: str) -> RunConfig:
    cfg = RunConfig()
    seen = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEYMAP:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        attr = _KEYMAP[key]
        seen[attr] = _convert(key, attr, raw)
    cfg = replace(cfg, **seen)
    cfg.validate()
    return cfg


def parse_config(path: str | None) -> RunConfig:
    """Load and validate a config file; None or empty file means defaults."""
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    with open(path) as fh:
        return parse_config_text(fh.read())


def config_fingerprint(cfg: RunConfig) -> str:
    """Stable short hash of the effective configuration."""
    return hashlib.sha256(cfg.to_text().encode()).hexdigest()[:16]
