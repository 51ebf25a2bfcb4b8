"""Energy bookkeeping, parameter feasibility checks, and rate estimation.

The energy functional

    E_c(t) = (t^2 w + (alpha-1-c) t beta) (Phi_lam(x) - Phi*)
             + (1/2) ||c (x - z) + t x' + t beta grad Phi_lam(x)||^2
             + (c (alpha-1-c) / 2) ||x - z||^2

is nonincreasing along admissible trajectories; the seven parameter
conditions (I)-(VII) are decided in closed form for the polynomial
schedule family and by grid evidence for caller-supplied callables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .objectives import moreau
from .schedules import PolynomialSchedule

__all__ = [
    "Setting",
    "ConditionReport",
    "RateFit",
    "energy",
    "check_conditions_polynomial",
    "check_conditions_grid",
    "accumulate_decay_integrals",
    "fit_rate",
    "energy_monotonicity_report",
    "RATE_QUANTITIES",
]

CONDITIONS = ("I", "II", "III", "IV", "V", "VI", "VII")

RATE_QUANTITIES = (
    "envelope_gap",
    "prox_gap",
    "grad_norm",
    "prox_dist",
    "velocity_norm",
    "dist_to_minimizer",
)


class Setting(Enum):
    SETTING1 = "Setting1"  # beta identically 0
    SETTING2 = "Setting2"  # beta > 0
    NOT_POLYNOMIAL = "NotPolynomial"


@dataclass(frozen=True)
class ConditionReport:
    per_condition: Dict[str, Tuple[bool, str]]  # name -> (pass, witness)
    epsilon_witness: Optional[float]
    overall: bool
    setting: Setting

    def failed(self):
        return [k for k, (ok, _) in self.per_condition.items() if not ok]


@dataclass(frozen=True)
class RateFit:
    exponent: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]


def energy(cfg, t: float, x, v, c: float) -> float:
    """Evaluate E_c(t) at a state; requires 0 <= c <= alpha - 1."""
    sch = cfg.schedule
    if not 0.0 <= c <= sch.alpha - 1.0 + 1e-12:
        raise ValueError(f"c = {c} outside [0, alpha - 1] = [0, {sch.alpha - 1}]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    s = sch.eval(t)
    ev = moreau(cfg.objective, float(s.lam), x)
    gap = ev.envelope_value - cfg.objective.optimal_value
    z = cfg.objective.minimizer
    mom = c * (x - z) + t * v + t * s.beta * ev.gradient
    return float(
        (t**2 * s.w + (sch.alpha - 1 - c) * t * s.beta) * gap
        + 0.5 * float(mom @ mom)
        + 0.5 * c * (sch.alpha - 1 - c) * float((x - z) @ (x - z))
    )


def _report(per, eps, setting) -> ConditionReport:
    overall = all(ok for ok, _ in per.values())
    return ConditionReport(per, eps if per["I"][0] else None, overall, setting)


def check_conditions_polynomial(s: PolynomialSchedule) -> ConditionReport:
    """Decide conditions (I)-(VII) in closed form for the monomial family."""
    a, t0, l, m, n = s.alpha, s.t0, s.l, s.m, s.n
    lam0, beta0, b0 = s.lambda0, s.beta0, s.b0
    per: Dict[str, Tuple[bool, str]] = {}
    setting = Setting.SETTING1 if beta0 == 0 else Setting.SETTING2

    # (I): exists eps in (0, alpha-1) with (alpha-3) w - t w' >= eps b on [t0, oo).
    # For monomials: (alpha-3-n-eps) b0 t^(n-m+1) >= beta0 (m+1)(alpha-m-2) =: K.
    K = beta0 * (m + 1.0) * (a - m - 2.0)
    p = n - m + 1.0

    def admissible(eps: float) -> bool:
        coef = (a - 3.0 - n - eps) * b0
        if p > 0:
            inf_val = coef * t0**p if coef >= 0 else -np.inf
        elif p == 0:
            inf_val = coef
        else:
            inf_val = coef * t0**p if coef <= 0 else 0.0
        return inf_val >= K

    eps_witness = None
    if admissible(0.0):
        # largest admissible eps, then take half of it (deterministic rule)
        if K <= 0 and p != 0:
            eps_max = a - 3.0 - n if p > 0 else np.inf
        elif p > 0:
            eps_max = (a - 3.0 - n) - K / (b0 * t0**p)
        elif p == 0:
            eps_max = (a - 3.0 - n) - K / b0
        else:  # p < 0, K <= 0 handled above; K > 0 cannot be admissible
            eps_max = -np.inf
        eps_max = min(eps_max, a - 1.0)
        preferred = (a - 3.0 - n) / 2.0
        boundary_case = beta0 > 0 and m == n + 1.0
        if not boundary_case and 0 < preferred < a - 1.0 and admissible(preferred):
            eps_witness = preferred
        elif eps_max > 0:
            eps_witness = eps_max / 2.0
    ok_i = eps_witness is not None and 0 < eps_witness < a - 1.0
    if ok_i:
        per["I"] = (True, f"eps = {eps_witness:.6g} certifies (alpha-3) w - t w' >= eps b")
    elif a - 3.0 - n <= 0:
        per["I"] = (False, f"alpha - 3 > n violated ({a - 3:.6g} <= {n:.6g})")
    else:
        bound = K / ((a - 3.0 - n) * t0**p) if p >= 0 else np.inf
        per["I"] = (False, f"b0 = {b0:.6g} below the (I)-threshold {bound:.6g}")

    # (II): lambda and beta nondecreasing.
    ok_ii = l >= 0 and (beta0 == 0 or m >= 0)
    wit = "l >= 0" + ("" if beta0 == 0 else " and m >= 0")
    per["II"] = (ok_ii, wit if ok_ii else f"violated (l = {l:.6g}, m = {m:.6g})")

    # (III): b(t) > beta'(t) + beta(t)/t, i.e. b0 t^(n-m+1) > (m+1) beta0.
    rhs = (m + 1.0) * beta0
    if rhs <= 0:
        per["III"] = (True, "beta'(t) + beta(t)/t <= 0 < b(t)")
    elif p > 0:
        ok = b0 * t0**p > rhs
        per["III"] = (ok, "holds from t0 on" if ok
                      else f"fails at t = t0 (b0 t0^{p:.3g} = {b0 * t0**p:.6g} <= {rhs:.6g})")
    elif p == 0:
        ok = b0 > rhs
        per["III"] = (ok, f"constant margin b0 - (m+1) beta0 = {b0 - rhs:.6g}"
                      if ok else f"b0 = {b0:.6g} <= (m+1) beta0 = {rhs:.6g}")
    else:
        per["III"] = (False, f"m <= n+1 violated (m = {m:.6g} > n+1 = {n + 1:.6g})")

    # (IV): integral of the positive part; three-way split on n + l vs 2m.
    if beta0 == 0 or l == 0:
        per["IV"] = (True, "integrand vanishes (beta = 0 or lambda constant)")
    elif l < 0:
        # lambda' < 0: the -lambda' t^2 b / (2 lambda^2) term is positive and grows
        per["IV"] = (False, f"lambda decreasing (l = {l:.6g}) makes the integrand diverge")
    elif 2 * m < n + l:
        per["IV"] = (True, f"2m = {2 * m:.6g} < n + l = {n + l:.6g}")
    elif 2 * m == n + l:
        thresh = 2.0 * l * beta0**2 / lam0
        ok = b0 >= thresh
        per["IV"] = (ok, f"boundary case 2m = n + l with b0 >= 2 l beta0^2/lambda0 = {thresh:.6g}"
                     if ok else f"boundary case fails (b0 = {b0:.6g} < {thresh:.6g})")
    else:
        ok = 2 * m - 2 * l + 1 < -1.0
        per["IV"] = (ok, f"2m > n + l but tail exponent {2 * m - 2 * l + 1:.6g} < -1 integrable"
                     if ok else f"2m < n + l violated (2m = {2 * m:.6g} > n + l = {n + l:.6g})")

    # (V): d/dt(t^2 b) = (n+2) t b <= C t b for monomials.
    per["V"] = (True, f"monomial b: C = {n + 2:.6g}")

    # (VI): sup beta / (t w) < oo. Fails only if w has a zero in [t0, oo).
    if beta0 == 0:
        per["VI"] = (True, "beta = 0")
    else:
        crossing = None
        if p != 0 and rhs > 0:
            t_star = (rhs / b0) ** (1.0 / p)
            if t_star >= t0 * (1 - 1e-12):
                crossing = t_star
        if p == 0 and b0 == rhs:
            crossing = t0  # w identically zero
        if crossing is None:
            per["VI"] = (True, "w has no zero on [t0, oo); ratio bounded")
        else:
            per["VI"] = (False, f"w vanishes near t = {crossing:.6g}; beta/(t w) unbounded")

    # (VII): sup lambda(t)/t < oo, i.e. l <= 1.
    per["VII"] = (l <= 1, f"l = {l:.6g} <= 1" if l <= 1 else f"l = {l:.6g} > 1")

    return _report(per, eps_witness, setting)


def check_conditions_grid(
    alpha: float,
    lambda_fns,
    beta_fns,
    b_fns,
    t0: float,
    t_max: float,
    grid: int = 10_000,
) -> ConditionReport:
    """Grid evidence for (I)-(VII) with caller-supplied callables.

    ``lambda_fns`` and ``b_fns`` are (value, derivative) pairs; ``beta_fns``
    is (value, first, second). This is necessary-evidence checking on a
    log grid over [t0, t_max], not a proof.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    ts = np.geomspace(t0, t_max, int(grid))
    lam, dlam = (np.broadcast_to(np.asarray(f(ts), float), ts.shape) for f in lambda_fns)
    beta, dbeta, ddbeta = (np.broadcast_to(np.asarray(f(ts), float), ts.shape) for f in beta_fns)
    b, db = (np.broadcast_to(np.asarray(f(ts), float), ts.shape) for f in b_fns)
    for name, arr in (("lambda", lam), ("beta", beta), ("b", b),
                      ("lambda'", dlam), ("beta'", dbeta), ("beta''", ddbeta), ("b'", db)):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} callable returned non-finite values")

    w = b - dbeta - beta / ts
    dw = db - ddbeta - dbeta / ts + beta / ts**2
    last = ts >= t_max / 10.0  # last decade of the grid
    per: Dict[str, Tuple[bool, str]] = {}

    # (I)
    ratio = ((alpha - 3.0) * w - ts * dw) / b
    eps_min = float(np.min(ratio))
    k_min = int(np.argmin(ratio))
    ok_i = alpha > 1 and eps_min > 0
    eps_witness = min(eps_min, (alpha - 1.0) * 0.999999) if ok_i else None
    per["I"] = (ok_i, f"min ((alpha-3) w - t w')/b = {eps_min:.6g} at t = {ts[k_min]:.6g}")

    # (II)
    bad_l = np.where(dlam < -1e-12)[0]
    bad_b = np.where(dbeta < -1e-12)[0]
    ok_ii = bad_l.size == 0 and bad_b.size == 0
    wit = "lambda' >= 0 and beta' >= 0 on the grid"
    if bad_l.size:
        wit = f"lambda decreasing at t = {ts[bad_l[0]]:.6g}"
    elif bad_b.size:
        wit = f"beta decreasing at t = {ts[bad_b[0]]:.6g}"
    per["II"] = (ok_ii, wit)

    # (III)
    slack = b - dbeta - beta / ts
    bad = np.where(slack <= 0)[0]
    per["III"] = (bad.size == 0,
                  "b > beta' + beta/t on the grid" if bad.size == 0
                  else f"violated at t = {ts[bad[0]]:.6g}")

    # (IV): trapezoid of the positive part; tail of the last decade < 1%.
    integrand = np.maximum(beta**2 * dlam**2 * ts**3 / lam**4 - dlam * ts**2 * b / (2 * lam**2), 0.0)
    total = float(np.trapezoid(integrand, ts))
    tail = float(np.trapezoid(integrand[last], ts[last]))
    ok_iv = total == 0.0 or tail < 0.01 * total
    per["IV"] = (ok_iv, f"tail share {0.0 if total == 0 else tail / total:.3g} over the last decade")

    # (V): 2 + t b'/b stabilized.
    growth = 2.0 + ts * db / b
    ok_v, wit = _stabilized(growth, last, "d/dt(t^2 b)/(t b)")
    per["V"] = (ok_v, wit)

    # (VI): beta/(t w) finite and stabilized.
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio6 = beta / (ts * w)
    if not np.all(np.isfinite(ratio6)):
        per["VI"] = (False, "beta/(t w) non-finite on the grid (w vanishes)")
    elif np.any(w <= 0) and np.any(w > 0):
        k = int(np.where(w <= 0)[0][0])
        per["VI"] = (False, f"w changes sign near t = {ts[k]:.6g}")
    else:
        ok_vi, wit = _stabilized(ratio6, last, "beta/(t w)")
        per["VI"] = (ok_vi, wit)

    # (VII): lambda/t stabilized.
    ok_vii, wit = _stabilized(lam / ts, last, "lambda/t")
    per["VII"] = (ok_vii, wit)

    return _report(per, eps_witness, Setting.NOT_POLYNOMIAL)


def _stabilized(vals: np.ndarray, last_mask: np.ndarray, label: str):
    """Grid-max stabilization: the last decade must not push the sup up."""
    head = float(np.max(vals[~last_mask])) if np.any(~last_mask) else float(np.max(vals))
    tail = float(np.max(vals[last_mask]))
    ok = tail <= head * (1 + 1e-6) + 1e-9
    return ok, (f"sup {label} stabilized at {max(head, tail):.6g}" if ok
                else f"sup {label} still growing ({tail:.6g} > {head:.6g} in the last decade)")


def accumulate_decay_integrals(cfg, traj) -> Dict[str, np.ndarray]:
    """Cumulative trapezoid integrals of the five decay integrands.

    Keys: gradient_weighted (iii), gap_weighted (iv), velocity (v),
    gap_time_scaled (vii), gradient_pairing (Lemma-3 style).
    """
    ts = traj.t
    s = cfg.schedule.eval(ts)
    z = cfg.objective.minimizer
    g2 = traj.grad_norm**2
    gap = traj.envelope_gap
    pairing = np.empty(ts.size)
    for k in range(ts.size):
        ev = moreau(cfg.objective, float(s.lam[k]), traj.x[k])
        pairing[k] = float(ev.gradient @ (traj.x[k] - z))
    integrands = {
        "gradient_weighted": (ts**2 * s.w * s.dlam / 2.0 + ts**2 * s.beta * s.w) * g2,
        "gap_weighted": ((cfg.schedule.alpha - 3.0) * ts * s.w - ts**2 * s.dw) * gap,
        "velocity": ts * traj.velocity_norm**2,
        "gap_time_scaled": ts * s.b * gap,
        "gradient_pairing": ts * s.w * pairing,
    }
    return {
        name: cumulative_trapezoid(vals, ts, initial=0.0)
        for name, vals in integrands.items()
    }


def fit_rate(traj, quantity: str, window: Tuple[float, float]) -> RateFit:
    """Least-squares log-log slope of a monitored quantity over a window."""
    if quantity not in RATE_QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {RATE_QUANTITIES}")
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    vals = getattr(traj, quantity)
    mask = (traj.t >= t_lo) & (traj.t <= t_hi) & (vals > 1e-14)
    if int(mask.sum()) < 10:
        raise ValueError(f"only {int(mask.sum())} usable samples in the window (need >= 10)")
    lt = np.log(traj.t[mask])
    lv = np.log(vals[mask])
    slope, intercept = np.polyfit(lt, lv, 1)
    pred = slope * lt + intercept
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - np.mean(lv)) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(float(slope), float(intercept), min(1.0, r2), (t_lo, t_hi))


def energy_monotonicity_report(cfg, traj, c: float):
    """(max_uphill, pass) for E_c over consecutive samples.

    max_uphill is the largest relative increase (E_{k+1} - E_k)/max(1, E_k);
    the decay statement passes when it stays below 1e-6.
    """
    e = np.array([
        energy(cfg, float(traj.t[k]), traj.x[k], traj.v[k], c)
        for k in range(len(traj))
    ])
    diffs = (e[1:] - e[:-1]) / np.maximum(1.0, e[:-1])
    max_uphill = float(np.max(diffs)) if diffs.size else 0.0
    max_uphill = max(max_uphill, 0.0)
    return max_uphill, max_uphill <= 1e-6
