"""Integration of the inertial envelope dynamics via first-order lifts.

The second-order system

    x'' + (alpha/t) x' + beta(t) d/dt[grad Phi_lam(t)(x)] + b(t) grad Phi_lam(t)(x) = 0

is lifted to first order so the nonsmooth time derivative of the
gradient term never appears. The public right-hand sides expose the
(x, y) lift with its two branches (beta > 0 and beta identically 0);
the integrator itself runs in the equivalent pre-elimination chart
x' = -beta g - z, z' = -(alpha/t) z + (b - beta' - alpha beta/t) g,
whose coefficients stay O(b(t)) for any beta >= 0 (see _integrators).
Trajectories are sampled at log-spaced times and carry the full set of
monitored quantities; velocities are always recovered algebraically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from . import _integrators as cores
from .objectives import Kind, ProxFunction, moreau, value
from .schedules import PolynomialSchedule

__all__ = [
    "SystemConfig",
    "State",
    "Trajectory",
    "DivergenceError",
    "StiffnessError",
    "rhs_beta_positive",
    "rhs_beta_zero",
    "initial_lift",
    "velocity_reconstruct",
    "integrate",
    "ode_residual",
    "estimate_explicit_steps",
]

_KIND_CODE = {Kind.L1: 0, Kind.ELASTIC_ABS: 1, Kind.DIAG_QUADRATIC: 2}


class DivergenceError(RuntimeError):
    """State left the finite range; carries the partial trajectory."""

    def __init__(self, message, time, trajectory):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class StiffnessError(RuntimeError):
    """Step size underflow or step budget exhausted; carries partials."""

    def __init__(self, message, time, trajectory):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


@dataclass
class SystemConfig:
    objective: ProxFunction
    schedule: PolynomialSchedule
    x0: np.ndarray
    u0: np.ndarray
    t_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    sample_count: int = 600
    max_steps: int = 20_000_000
    method: str = "auto"  # auto | dp54 | sdirk4

    def __post_init__(self):
        d = self.objective.dimension
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=float))
        if self.x0.size != d:
            raise ValueError(f"x0 has length {self.x0.size}, expected {d}")
        if self.u0.size != d:
            raise ValueError(f"u0 has length {self.u0.size}, expected {d}")
        if not self.t_end > self.schedule.t0:
            raise ValueError(
                f"t_end = {self.t_end} must exceed t0 = {self.schedule.t0}"
            )
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.sample_count < 2:
            raise ValueError("sample_count must be at least 2")
        if self.method not in ("auto", "dp54", "sdirk4"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class State:
    t: float
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Log-spaced samples with all monitored quantities (read-only arrays)."""

    t: np.ndarray
    x: np.ndarray  # (N, d)
    v: np.ndarray  # (N, d)
    envelope_gap: np.ndarray
    grad_norm: np.ndarray
    prox_dist: np.ndarray
    prox_gap: np.ndarray
    velocity_norm: np.ndarray
    energy: np.ndarray  # E_{alpha-1}
    dist_to_minimizer: np.ndarray
    t2b_times_gap: np.ndarray
    config: SystemConfig = field(repr=False, compare=False)

    def __len__(self):
        return self.t.size

    def state(self, i: int) -> State:
        return State(float(self.t[i]), self.x[i].copy(), self.v[i].copy())


def _require_branch(cfg: SystemConfig, positive: bool):
    if cfg.schedule.beta_positive != positive:
        want = "beta(t) > 0" if positive else "beta identically 0"
        raise ValueError(f"wrong branch: this operation requires {want}")


def rhs_beta_positive(cfg: SystemConfig, t: float, x, y):
    """Right-hand side of the lifted system for the beta(t) > 0 branch."""
    _require_branch(cfg, True)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = cfg.schedule.eval(t)
    g = moreau(cfg.objective, float(s.lam), x).gradient
    A = -((s.dbeta - s.b) / s.beta + cfg.schedule.alpha / t)
    dx = -s.beta * g + A * x - y / s.beta
    D = -(
        s.ddbeta
        + (3 * s.b * s.dbeta - 2 * s.dbeta**2 - s.b**2) / s.beta
        + (cfg.schedule.alpha / t) * (s.b - s.dbeta - s.beta / t)
        - s.db
    )
    dy = D * x - ((s.b - 2 * s.dbeta) / s.beta) * y
    return dx, dy


def rhs_beta_zero(cfg: SystemConfig, t: float, x, y):
    """Right-hand side for beta identically 0: dx = y, dy = -(alpha/t) y - b grad."""
    _require_branch(cfg, False)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = cfg.schedule.eval(t)
    g = moreau(cfg.objective, float(s.lam), x).gradient
    return y.copy(), -(cfg.schedule.alpha / t) * y - s.b * g


def initial_lift(cfg: SystemConfig):
    """Lift (x0, u0) into the (x, y) chart of the active branch."""
    sch = cfg.schedule
    if not sch.beta_positive:
        return cfg.x0.copy(), cfg.u0.copy()
    s = sch.eval(sch.t0)
    g0 = moreau(cfg.objective, float(s.lam), cfg.x0).gradient
    y0 = -s.beta * (cfg.u0 + s.beta * g0) + (s.b - s.dbeta - sch.alpha * s.beta / sch.t0) * cfg.x0
    return cfg.x0.copy(), y0


def velocity_reconstruct(cfg: SystemConfig, t: float, x, y):
    """Recover the physical velocity x'(t) from a lifted state."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not cfg.schedule.beta_positive:
        return y.copy()
    dx, _ = rhs_beta_positive(cfg, t, x, y)
    return dx


def estimate_explicit_steps(cfg: SystemConfig) -> float:
    """A-priori stability-limited step count of an explicit method.

    Integrates a spectral-radius bound of the integration chart's
    Jacobian over the horizon: oscillation sqrt(curv*(b - beta')) plus
    the Hessian-damping friction beta*curv (curvature of the envelope
    is at most 1/lam for any convex objective).
    """
    sch = cfg.schedule
    ts = np.geomspace(sch.t0, cfg.t_end, 257)
    s = sch.eval(ts)
    curv = 1.0 / s.lam
    if cfg.objective.kind is Kind.DIAG_QUADRATIC:
        curv = np.minimum(curv, float(np.max(cfg.objective.weights)))
    radius = (np.sqrt(curv * np.maximum(s.b - s.dbeta, 0.0))
              + s.beta * curv + sch.alpha / ts)
    return float(np.trapezoid(radius, ts)) / 2.5


def _choose_method(cfg: SystemConfig) -> str:
    if cfg.method != "auto":
        return cfg.method
    return "dp54" if estimate_explicit_steps(cfg) <= 1.0e6 else "sdirk4"


def _sample_times(cfg: SystemConfig) -> np.ndarray:
    ts = np.geomspace(cfg.schedule.t0, cfg.t_end, cfg.sample_count)
    ts[0] = cfg.schedule.t0
    ts[-1] = cfg.t_end
    return ts


def _instrument(cfg: SystemConfig, ts: np.ndarray, Z: np.ndarray) -> Trajectory:
    """Turn sampled integration-chart states (x, z) into a monitored trajectory.

    The velocity is algebraic in the chart: x' = -beta(t) grad - z.
    """
    from .analysis import energy  # late import: analysis has no import cycle back

    sch = cfg.schedule
    f = cfg.objective
    d = f.dimension
    n = ts.size
    x = Z[:, :d].copy()
    v = np.empty_like(x)
    env_gap = np.empty(n)
    grad_norm = np.empty(n)
    prox_dist = np.empty(n)
    prox_gap = np.empty(n)
    ener = np.empty(n)
    s = sch.eval(ts)
    for k in range(n):
        t = float(ts[k])
        ev = moreau(f, float(s.lam[k]), x[k])
        v[k] = -s.beta[k] * ev.gradient - Z[k, d:]
        env_gap[k] = ev.envelope_value - f.optimal_value
        grad_norm[k] = float(np.linalg.norm(ev.gradient))
        prox_dist[k] = float(np.linalg.norm(x[k] - ev.prox_point))
        prox_gap[k] = value(f, ev.prox_point) - f.optimal_value
        ener[k] = energy(cfg, t, x[k], v[k], sch.alpha - 1.0)
    vel_norm = np.linalg.norm(v, axis=1)
    dist = np.linalg.norm(x - f.minimizer[None, :], axis=1)
    t2b_gap = ts**2 * s.b * env_gap
    arrays = dict(
        t=ts.copy(), x=x, v=v, envelope_gap=env_gap, grad_norm=grad_norm,
        prox_dist=prox_dist, prox_gap=prox_gap, velocity_norm=vel_norm,
        energy=ener, dist_to_minimizer=dist, t2b_times_gap=t2b_gap,
    )
    for a in arrays.values():
        a.setflags(write=False)
    return Trajectory(config=cfg, **arrays)


def _lift_chart(cfg: SystemConfig):
    """Initial (x, z) state of the integration chart: z0 = -(u0 + beta(t0) g0)."""
    sch = cfg.schedule
    s = sch.eval(sch.t0)
    g0 = moreau(cfg.objective, float(s.lam), cfg.x0).gradient
    return cfg.x0.copy(), -(cfg.u0 + float(s.beta) * g0)


def _python_rhs(cfg: SystemConfig):
    d = cfg.objective.dimension
    sch = cfg.schedule

    def rhs(t, state):
        x, z = state[:d], state[d:]
        s = sch.eval(t)
        g = moreau(cfg.objective, float(s.lam), x).gradient
        dx = -s.beta * g - z
        dz = -(sch.alpha / t) * z + (s.b - s.dbeta - sch.alpha * s.beta / t) * g
        return np.concatenate([dx, dz])

    return rhs


def integrate(cfg: SystemConfig) -> Trajectory:
    """Run the dynamics over [t0, t_end] and return the sampled trajectory.

    Raises DivergenceError when the state leaves the finite range and
    StiffnessError on step-size underflow or step-budget exhaustion;
    both carry the partial trajectory collected so far.
    """
    sch = cfg.schedule
    f = cfg.objective
    d = f.dimension
    x0, zc0 = _lift_chart(cfg)
    z0 = np.concatenate([x0, zc0])
    ts = _sample_times(cfg)
    method = _choose_method(cfg)

    use_numba = cores.HAVE_NUMBA and f.kind in _KIND_CODE
    if use_numba:
        kind = _KIND_CODE[f.kind]
        q = f.weights.astype(float) if f.weights is not None else np.zeros(d)
        c = f.center.astype(float) if f.center is not None else np.zeros(d)
        out = np.full((ts.size, 2 * d), np.nan)
        driver = cores._drive_sdirk4_nb if method == "sdirk4" else cores._drive_dp54_nb
        status, t_reached, z_last, steps, filled = driver(
            kind, q, c, sch.alpha, sch.lambda0, sch.l, sch.beta0,
            sch.m, sch.b0, sch.n, sch.t0, cfg.t_end, z0,
            cfg.rel_tol, cfg.abs_tol, cfg.max_steps, ts, out,
        )
        if status == cores.STIFF_DETECTED:
            if cfg.method == "dp54":
                raise StiffnessError(
                    f"requested dp54 flagged stiffness at t = {t_reached:.6g}; "
                    "use method='sdirk4'", t_reached, None,
                )
            # auto mode: restart on the L-stable pair
            out = np.full((ts.size, 2 * d), np.nan)
            status, t_reached, z_last, steps, filled = cores._drive_sdirk4_nb(
                kind, q, c, sch.alpha, sch.lambda0, sch.l, sch.beta0,
                sch.m, sch.b0, sch.n, sch.t0, cfg.t_end, z0,
                cfg.rel_tol, cfg.abs_tol, cfg.max_steps, ts, out,
            )
    else:
        if method == "sdirk4":
            raise NotImplementedError(
                "the implicit core needs a closed-form objective; "
                "use a smaller horizon or a catalog objective"
            )
        status, t_reached, z_last, steps, out, filled = cores.drive_python_dp54(
            _python_rhs(cfg), sch.t0, cfg.t_end, z0,
            cfg.rel_tol, cfg.abs_tol, cfg.max_steps, ts,
        )

    if status == cores.OK:
        return _instrument(cfg, ts, out)
    partial = _instrument(cfg, ts[:filled], out[:filled]) if filled else None
    if status == cores.DIVERGED:
        raise DivergenceError(
            f"state left the finite range at t = {t_reached:.6g}", t_reached, partial
        )
    reason = (
        "step size underflow" if status == cores.STIFF_HMIN
        else f"step budget ({cfg.max_steps}) exhausted"
    )
    raise StiffnessError(
        f"{reason} at t = {t_reached:.6g} after {steps} steps", t_reached, partial
    )


def ode_residual(cfg: SystemConfig, traj: Trajectory, t: float) -> float:
    """Finite-difference residual of the second-order equation at sample t.

    An integration self-check on smooth segments: x'' and the gradient's
    time derivative come from central differences over adjacent samples,
    everything else is evaluated exactly.
    """
    ts = traj.t
    k = int(np.argmin(np.abs(ts - t)))
    if k <= 0 or k >= ts.size - 1:
        raise ValueError("t must lie strictly inside the sample range")
    hm = ts[k] - ts[k - 1]
    hp = ts[k + 1] - ts[k]
    if max(hm, hp) > 1e-2 * ts[k]:
        raise ValueError(
            f"sample spacing {max(hm, hp):.3g} too coarse at t = {ts[k]:.6g} "
            "(needs <= 1e-2 * t)"
        )
    sch = cfg.schedule
    s = sch.eval(ts[k])
    grads = []
    for idx in (k - 1, k, k + 1):
        si = sch.eval(ts[idx])
        grads.append(moreau(cfg.objective, float(si.lam), traj.x[idx]).gradient)
    ddx = (traj.v[k + 1] - traj.v[k - 1]) / (hm + hp)
    dgrad = (grads[2] - grads[0]) / (hm + hp)
    res = ddx + (sch.alpha / ts[k]) * traj.v[k] + s.beta * dgrad + s.b * grads[1]
    return float(np.linalg.norm(res))
