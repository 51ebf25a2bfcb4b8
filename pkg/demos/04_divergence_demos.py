"""What happens outside the admissible parameter region.

Two deliberately infeasible schedules: one breaks the Hessian-damping
growth limits (m > n + 1 and 2m > n + l), the other the viscous-damping
requirement (alpha - 3 > n, plus lambda growing superlinearly). Both
trajectories leave the minimizer instead of converging.
"""

import numpy as np

import moreauflow as mf
from moreauflow.analysis import check_conditions_polynomial

print("=== run the two divergence demos (|x| + x^2/2, x0 = 10) ===")
demos = {
    "m = 12 (n = 9, alpha = 13, l = 1)": mf.PolynomialSchedule(
        alpha=13, t0=1, lambda0=1, l=1, beta0=1, m=12, b0=1.0, n=9),
    "alpha = 2 (n = 4, l = 4, m = 6)": mf.PolynomialSchedule(
        alpha=2, t0=1, lambda0=1, l=4, beta0=1, m=6,
        b0=mf.default_b0(2, 6, 4, 1, 1), n=4),
}
for name, sch in demos.items():
    cfg = mf.SystemConfig(objective=mf.elastic_abs(1), schedule=sch,
                          x0=[10.0], u0=[0.0], t_end=100.0)
    rep = check_conditions_polynomial(sch)
    try:
        traj = mf.integrate(cfg)
        outcome = (f"dist to minimizer grew {traj.dist_to_minimizer[0]:.1f} -> "
                   f"{traj.dist_to_minimizer[-1]:.1f}")
        tail = traj
    except mf.DivergenceError as exc:
        outcome = f"state overflow at t = {exc.time:.2f}"
        tail = exc.trajectory
    print(f"\n  {name}")
    print(f"    conditions: FAIL ({', '.join(rep.failed())})")
    print(f"    outcome:    {outcome}")
    ts = np.array([1.0, 3.0, 10.0, 30.0, 100.0])
    idx = [int(np.argmin(np.abs(tail.t - t))) for t in ts if t <= tail.t[-1]]
    samples = "  ".join(f"x({tail.t[i]:.0f}) = {tail.x[i, 0]:9.3g}" for i in idx)
    print(f"    trajectory: {samples}")

print("\nBoth runs write complete sample sets, so the growth itself can be")
print("plotted from the CSV output of `moreauflow figure 4a` / `4b`.")
