"""Integrate the inertial envelope dynamics and measure convergence rates.

Sweeps the time-scaling exponent n for the |x| objective (alpha = 9,
m = 0, l = 1, x0 = 10): larger n accelerates the decay of the envelope
gap, its gradient, and the trajectory itself. Fitted log-log exponents
are compared with the guaranteed orders -(n+2), -(n/2 + 1 + l/2), -1.
"""

import numpy as np

import moreauflow as mf

print("=== n-sweep: |x|, alpha = 9, m = 0, l = 1, t in [1, 100] ===")
print(f"{'n':>5} {'b0':>6} {'gap(10)':>10} {'gap(100)':>10} "
      f"{'slope(gap)':>11} {'guarantee':>10} {'slope(|xdot|)':>13}")
trajectories = {}
for n in (0.0, 2.0, 4.0):
    b0 = mf.default_b0(9.0, 0.0, n, 1.0, 1.0)
    sch = mf.PolynomialSchedule(alpha=9.0, t0=1.0, lambda0=1.0, l=1.0,
                                beta0=1.0, m=0.0, b0=b0, n=n)
    cfg = mf.SystemConfig(objective=mf.l1(1), schedule=sch, x0=[10.0],
                          u0=[0.0], t_end=100.0, rel_tol=1e-9, abs_tol=1e-13)
    traj = mf.integrate(cfg)
    trajectories[n] = (cfg, traj)
    i10 = int(np.argmin(np.abs(traj.t - 10.0)))
    gap_fit = mf.fit_rate(traj, "envelope_gap", (10.0, 100.0))
    vel_fit = mf.fit_rate(traj, "velocity_norm", (10.0, 100.0))
    print(f"{n:5.1f} {b0:6.2f} {traj.envelope_gap[i10]:10.2e} "
          f"{traj.envelope_gap[-1]:10.2e} {gap_fit.exponent:11.2f} "
          f"{-(n + 2):10.1f} {vel_fit.exponent:13.2f}")

print("\nThe guarantees are upper bounds on the decay order; the strong")
print("Hessian damping of this family makes the measured decay faster.")

print("\n=== all monitored quantities for n = 2 ===")
cfg, traj = trajectories[2.0]
for q in ("envelope_gap", "prox_gap", "grad_norm", "prox_dist",
          "velocity_norm", "dist_to_minimizer"):
    try:
        fit = mf.fit_rate(traj, q, (10.0, 100.0))
        print(f"  {q:<18} exponent {fit.exponent:+7.2f}   r^2 = {fit.r_squared:.3f}")
    except ValueError:
        # prox_gap is exactly 0 once the prox point reaches the minimizer
        print(f"  {q:<18} identically ~0 in the window (already converged)")

print("\n=== integrator self-check: second-order residual at samples ===")
sch = mf.PolynomialSchedule(alpha=9.0, t0=1.0, lambda0=1.0, l=1.0,
                            beta0=1.0, m=0.0, b0=2.75, n=2.0)
cfg = mf.SystemConfig(objective=mf.l1(1), schedule=sch, x0=[10.0], u0=[0.0],
                      t_end=100.0, sample_count=2000)
traj = mf.integrate(cfg)
for t in (20.0, 50.0, 80.0):
    print(f"  residual at t = {t:4.0f}: {mf.ode_residual(cfg, traj, t):.2e}")
