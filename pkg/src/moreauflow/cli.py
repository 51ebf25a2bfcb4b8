"""Command-line front end: simulate | figure | check | rates.

Config files are flat JSON objects whose keys match ExperimentConfig
field names exactly; unknown keys are rejected (catches sweep-script
typos). Exit codes: 0 ok, 1 invalid input, 2 integration failed
(divergence or stiffness; partial CSV still written), 3 conditions fail.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import RATE_QUANTITIES, check_conditions_polynomial, fit_rate
from .dynamics import DivergenceError, StiffnessError, SystemConfig, Trajectory, integrate
from .objectives import diag_quadratic, elastic_abs, l1
from .presets import figure_presets
from .schedules import PolynomialSchedule, default_b0

__all__ = ["ConfigError", "ExperimentConfig", "main", "write_trajectory_csv"]

_OBJECTIVES = ("l1", "elastic_abs", "diag_quadratic")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    """Flat experiment description, one key per field."""

    objective: str = "l1"
    dimension: int = 1
    weights: Optional[list] = None   # diag_quadratic only
    center: Optional[list] = None    # diag_quadratic only
    alpha: float = 9.0
    t0: float = 1.0
    lambda0: float = 1.0
    l: float = 1.0
    beta0: float = 0.0
    m: float = 0.0
    n: float = 0.0
    b0: object = "auto"              # positive number or "auto"
    x0: object = 10.0                # scalar or list
    u0: object = 0.0
    t_end: float = 100.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    sample_count: int = 600
    max_steps: int = 20_000_000
    method: str = "auto"
    out: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        return cls(**data)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                v = v.tolist()
            out[f.name] = v
        return out

    def _vector(self, name: str, raw) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(raw, dtype=float))
        if arr.size == 1 and self.dimension > 1:
            arr = np.full(self.dimension, float(arr[0]))
        if arr.size != self.dimension:
            raise ConfigError(name, f"length {arr.size} does not match dimension {self.dimension}")
        return arr

    def build(self) -> SystemConfig:
        """Validate into a SystemConfig; raises ConfigError naming the field."""
        if self.objective not in _OBJECTIVES:
            raise ConfigError("objective", f"must be one of {_OBJECTIVES}")
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ConfigError("dimension", "must be a positive integer")
        try:
            if self.objective == "l1":
                obj = l1(self.dimension)
            elif self.objective == "elastic_abs":
                obj = elastic_abs(self.dimension)
            else:
                if self.weights is None or self.center is None:
                    raise ConfigError("weights", "diag_quadratic needs weights and center")
                obj = diag_quadratic(self.weights, self.center)
                if obj.dimension != self.dimension:
                    raise ConfigError("weights", f"length {obj.dimension} does not match dimension")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("weights", str(exc)) from exc

        if self.b0 == "auto":
            try:
                b0 = default_b0(self.alpha, self.m, self.n, self.beta0, self.t0)
            except ValueError as exc:
                raise ConfigError("b0", str(exc)) from exc
        else:
            try:
                b0 = float(self.b0)
            except (TypeError, ValueError):
                raise ConfigError("b0", f"must be a number or 'auto', got {self.b0!r}")

        for name in ("alpha", "t0", "lambda0", "l", "beta0", "m", "n",
                     "t_end", "rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not np.isfinite(v):
                raise ConfigError(name, f"must be a finite number, got {v!r}")
        try:
            sch = PolynomialSchedule(alpha=self.alpha, t0=self.t0, lambda0=self.lambda0,
                                     l=self.l, beta0=self.beta0, m=self.m, b0=b0, n=self.n)
        except ValueError as exc:
            msg = str(exc)
            name = msg.split()[0] if msg.split()[0] in ("alpha", "t0", "lambda0", "b0", "beta0") else "alpha"
            raise ConfigError(name, msg) from exc

        x0 = self._vector("x0", self.x0)
        u0 = self._vector("u0", self.u0)
        if not self.t_end > self.t0:
            raise ConfigError("t_end", f"must exceed t0 = {self.t0}")
        if not isinstance(self.sample_count, int) or self.sample_count < 2:
            raise ConfigError("sample_count", "must be an integer >= 2")
        if not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ConfigError("max_steps", "must be a positive integer")
        if self.method not in ("auto", "dp54", "sdirk4"):
            raise ConfigError("method", "must be auto, dp54 or sdirk4")
        try:
            return SystemConfig(objective=obj, schedule=sch, x0=x0, u0=u0,
                                t_end=self.t_end, rel_tol=self.rel_tol,
                                abs_tol=self.abs_tol, sample_count=self.sample_count,
                                max_steps=self.max_steps, method=self.method)
        except ValueError as exc:
            raise ConfigError("t_end", str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"not a readable file: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return ExperimentConfig.from_dict(data)


def csv_columns(dimension: int) -> list:
    cols = ["t"]
    cols += [f"x_{i}" for i in range(dimension)]
    cols += [f"v_{i}" for i in range(dimension)]
    cols += ["envelope_gap", "grad_norm", "prox_dist", "prox_gap",
             "velocity_norm", "energy_c_alpha_minus_1", "dist_to_minimizer",
             "t2b_times_gap"]
    return cols


def write_trajectory_csv(traj: Trajectory, path) -> int:
    """Write one row per sample, 17 significant digits; returns row count."""
    d = traj.x.shape[1]
    lines = [",".join(csv_columns(d))]
    for k in range(len(traj)):
        vals = ([traj.t[k]] + list(traj.x[k]) + list(traj.v[k]) +
                [traj.envelope_gap[k], traj.grad_norm[k], traj.prox_dist[k],
                 traj.prox_gap[k], traj.velocity_norm[k], traj.energy[k],
                 traj.dist_to_minimizer[k], traj.t2b_times_gap[k]])
        lines.append(",".join(f"{v:.17g}" for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")
    return len(traj)


def _print_condition_report(report, out=None):
    out = out or sys.stdout
    print(f"setting: {report.setting.value}", file=out)
    for name in ("I", "II", "III", "IV", "V", "VI", "VII"):
        ok, witness = report.per_condition[name]
        print(f"  ({name:>3}) {'pass' if ok else 'FAIL'}  {witness}", file=out)
    if report.epsilon_witness is not None:
        print(f"  epsilon witness: {report.epsilon_witness:.9g}", file=out)
    print(f"overall: {'pass' if report.overall else 'FAIL'}", file=out)
    machine = {
        "setting": report.setting.value,
        "overall": report.overall,
        "epsilon_witness": report.epsilon_witness,
        "per_condition": {k: {"pass": ok, "witness": w}
                          for k, (ok, w) in report.per_condition.items()},
    }
    print("conditions-json: " + json.dumps(machine, sort_keys=True), file=out)


def _apply_overrides(exp: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "t_end", None) is not None:
        exp.t_end = args.t_end
    if getattr(args, "samples", None) is not None:
        exp.sample_count = args.samples
    if getattr(args, "rel_tol", None) is not None:
        exp.rel_tol = args.rel_tol
    if getattr(args, "abs_tol", None) is not None:
        exp.abs_tol = args.abs_tol
    if getattr(args, "out", None) is not None:
        exp.out = args.out
    return exp


def _rate_table(traj: Trajectory, window) -> list:
    rows = []
    for q in RATE_QUANTITIES:
        try:
            ft = fit_rate(traj, q, window)
            rows.append(f"  {q:<20} exponent {ft.exponent:+8.3f}   r^2 {ft.r_squared:.4f}")
        except ValueError as exc:
            rows.append(f"  {q:<20} not fittable ({exc})")
    return rows


def _simulate_common(exp: ExperimentConfig, out_path: Path):
    """Shared run/emit logic; returns (exit_code, trajectory or None)."""
    cfg = exp.build()
    report = check_conditions_polynomial(cfg.schedule)
    code = 0
    try:
        traj = integrate(cfg)
    except (DivergenceError, StiffnessError) as exc:
        kind = "divergence" if isinstance(exc, DivergenceError) else "stiffness"
        print(f"integration failed ({kind}): {exc}")
        traj = exc.trajectory
        code = 2
    if traj is not None and len(traj) > 0:
        rows = write_trajectory_csv(traj, out_path)
        print(f"wrote {out_path} ({rows} rows)")
    else:
        print("no samples collected; nothing written")
    print(f"conditions: {'pass' if report.overall else 'FAIL'} "
          f"({report.setting.value}"
          + (f", eps = {report.epsilon_witness:.6g}" if report.epsilon_witness else "")
          + ")")
    if traj is not None and len(traj) > 1:
        print(f"final t = {traj.t[-1]:.6g}")
        print(f"final envelope_gap = {traj.envelope_gap[-1]:.6e}")
        print(f"final dist_to_minimizer = {traj.dist_to_minimizer[-1]:.6e}")
        window = (traj.t[-1] / 10.0, traj.t[-1])
        print(f"fitted log-log exponents over [{window[0]:.6g}, {window[1]:.6g}]:")
        for row in _rate_table(traj, window):
            print(row)
    return code, traj


def cmd_simulate(args) -> int:
    exp = _apply_overrides(load_config(args.config), args)
    out_path = Path(exp.out) if exp.out else Path("trajectory.csv")
    code, _ = _simulate_common(exp, out_path)
    return code


def cmd_rates(args) -> int:
    exp = _apply_overrides(load_config(args.config), args)
    cfg = exp.build()
    try:
        traj = integrate(cfg)
    except (DivergenceError, StiffnessError) as exc:
        print(f"integration failed: {exc}")
        return 2
    window = (args.window[0], args.window[1]) if args.window else (cfg.t_end / 10.0, cfg.t_end)
    print(f"fitted log-log exponents over [{window[0]:.6g}, {window[1]:.6g}]:")
    for row in _rate_table(traj, window):
        print(row)
    return 0


def cmd_check(args) -> int:
    exp = _apply_overrides(load_config(args.config), args)
    cfg = exp.build()  # full field validation
    report = check_conditions_polynomial(cfg.schedule)
    _print_condition_report(report)
    return 0 if report.overall else 3


_SUBFIGURE_MAP = {
    "a": "trajectory (x columns)",
    "b": "Moreau envelope values (envelope_gap column)",
    "c": "Moreau envelope gradient (grad_norm column)",
}


def _preset_to_experiment(preset) -> ExperimentConfig:
    cfg = preset.config
    sch = cfg.schedule
    return ExperimentConfig(
        objective=cfg.objective.kind.value,
        dimension=cfg.objective.dimension,
        alpha=sch.alpha, t0=sch.t0, lambda0=sch.lambda0, l=sch.l,
        beta0=sch.beta0, m=sch.m, n=sch.n, b0=sch.b0,
        x0=cfg.x0.tolist(), u0=cfg.u0.tolist(),
        t_end=cfg.t_end, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
        sample_count=cfg.sample_count, max_steps=cfg.max_steps,
        method=cfg.method,
    )


def cmd_figure(args) -> int:
    try:
        presets = figure_presets(args.id)
    except KeyError as exc:
        print(exc.args[0])
        return 1
    out_dir = Path(args.out) if args.out else Path(f"figure{args.id}")
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = []
    for preset in presets:
        exp = _apply_overrides(_preset_to_experiment(preset), args)
        exp.out = None
        cfg = exp.build()
        report = check_conditions_polynomial(cfg.schedule)
        status = "ok"
        fail_time = None
        try:
            traj = integrate(cfg)
        except DivergenceError as exc:
            traj, status, fail_time = exc.trajectory, "diverged", exc.time
        except StiffnessError as exc:
            traj, status, fail_time = exc.trajectory, "stiff", exc.time
        fname = f"figure{args.id}_{preset.param_name}={preset.param_value:g}.csv"
        rows = 0
        if traj is not None and len(traj) > 0:
            rows = write_trajectory_csv(traj, out_dir / fname)
        diverging = status != "ok" or (
            traj is not None and len(traj) > 1
            and traj.dist_to_minimizer[-1] > traj.dist_to_minimizer[0]
        )
        curves.append({
            "file": fname,
            "param": preset.param_name,
            "value": preset.param_value,
            "rows": rows,
            "status": status,
            "fail_time": fail_time,
            "diverging": bool(diverging),
            "conditions_pass": report.overall,
            "config": exp.to_dict(),
        })
        print(f"{fname}: status={status} rows={rows} conditions="
              f"{'pass' if report.overall else 'FAIL'}")
    manifest = {
        "figure": args.id,
        "subfigures": _SUBFIGURE_MAP,
        "note": "swept values are this artifact's choice; the reference "
                "captions fix only the non-swept parameters",
        "curves": curves,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {out_dir / 'manifest.json'} ({len(curves)} curves)")
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="moreauflow",
        description="Simulate inertial Moreau-envelope dynamics and check "
                    "convergence guarantees",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output file or directory")
        sp.add_argument("--t-end", dest="t_end", type=float, help="override t_end")
        sp.add_argument("--samples", type=int, help="override sample_count")
        sp.add_argument("--rel-tol", dest="rel_tol", type=float, help="override rel_tol")
        sp.add_argument("--abs-tol", dest="abs_tol", type=float, help="override abs_tol")

    sp = sub.add_parser("simulate", help="run one configuration, write CSV")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("figure", help="reproduce a figure-family sweep")
    sp.add_argument("id", help="figure id: 1, 2, 3, 4a or 4b")
    common(sp, needs_config=False)
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("check", help="parameter feasibility report")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("rates", help="fitted convergence exponents")
    common(sp)
    sp.add_argument("--window", nargs=2, type=float, metavar=("T_LO", "T_HI"))
    sp.set_defaults(func=cmd_rates)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
