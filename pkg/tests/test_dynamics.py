"""Lifted-system right-hand sides, the integrator, and trajectory checks."""

import numpy as np
import pytest

import moreauflow as mf
from moreauflow import _integrators as cores
from moreauflow.dynamics import estimate_explicit_steps


def fig1_config(n=4.0, t_end=100.0, x0=10.0, u0=0.0, **kw):
    sch = mf.PolynomialSchedule(alpha=9, t0=1, lambda0=1, l=1, beta0=1, m=0,
                                b0=mf.default_b0(9, 0, n, 1, 1), n=n)
    kw.setdefault("rel_tol", 1e-9)
    kw.setdefault("abs_tol", 1e-12)
    return mf.SystemConfig(objective=mf.l1(1), schedule=sch, x0=[x0], u0=[u0],
                           t_end=t_end, **kw)


def setting1_config(n=2.0, b0=1.0, t_end=100.0, **kw):
    sch = mf.PolynomialSchedule(alpha=9, t0=1, lambda0=1, l=1, beta0=0, m=0,
                                b0=b0, n=n)
    return mf.SystemConfig(objective=mf.l1(1), schedule=sch, x0=[10.0],
                           u0=[0.0], t_end=t_end, **kw)


# --- Butcher tableaux -------------------------------------------------


def test_dp54_order_conditions():
    A, b, c = cores.DP_A, cores.DP_B, cores.DP_C
    assert np.allclose(A.sum(axis=1), c)
    assert b.sum() == pytest.approx(1.0)
    assert b @ c == pytest.approx(1 / 2)
    assert b @ c**2 == pytest.approx(1 / 3)
    assert b @ (A @ c) == pytest.approx(1 / 6)
    assert b @ c**3 == pytest.approx(1 / 4)
    assert (b * c) @ (A @ c) == pytest.approx(1 / 8)
    assert b @ (A @ c**2) == pytest.approx(1 / 12)
    assert b @ (A @ (A @ c)) == pytest.approx(1 / 24)
    # 5th-order quadrature moments
    assert b @ c**4 == pytest.approx(1 / 5)
    # embedded weights (order 4): bhat = b - E
    bh = b - cores.DP_E
    assert bh.sum() == pytest.approx(1.0)
    assert bh @ c == pytest.approx(1 / 2)
    assert bh @ c**2 == pytest.approx(1 / 3)
    assert bh @ (A @ c) == pytest.approx(1 / 6)


def test_sdirk4_order_conditions():
    A, b, c = cores.SD_A, cores.SD_B, cores.SD_C
    assert np.allclose(A.sum(axis=1), c)
    assert np.allclose(np.diag(A), cores.SD_GAMMA)
    assert b.sum() == pytest.approx(1.0)
    assert b @ c == pytest.approx(1 / 2)
    assert b @ c**2 == pytest.approx(1 / 3)
    assert b @ (A @ c) == pytest.approx(1 / 6)
    assert b @ c**3 == pytest.approx(1 / 4)
    assert (b * c) @ (A @ c) == pytest.approx(1 / 8)
    assert b @ (A @ c**2) == pytest.approx(1 / 12)
    assert b @ (A @ (A @ c)) == pytest.approx(1 / 24)
    # stiffly accurate; embedded weights at least order 2
    assert np.allclose(A[-1], b)
    bh = b - cores.SD_E
    assert bh.sum() == pytest.approx(1.0)
    assert bh @ c == pytest.approx(1 / 2)
    assert bh @ c**2 == pytest.approx(1 / 3)


def test_sdirk4_l_stability():
    # |R(z)| for z -> -inf must vanish: R(z) = 1 + z b^T (I - z A)^-1 1
    A, b = cores.SD_A, cores.SD_B
    for z in (-1e6, -1e12):
        R = 1.0 + z * b @ np.linalg.solve(np.eye(5) - z * A, np.ones(5))
        assert abs(R) < 1e-5
    for y in (0.5, 2.0, 10.0, 1e4):
        z = 1j * y
        R = 1.0 + z * b @ np.linalg.solve(np.eye(5) - z * A, np.ones(5))
        assert abs(R) <= 1.0 + 1e-12


# --- lifts, right-hand sides ------------------------------------------


def test_initial_lift_beta_zero_is_velocity():
    cfg = setting1_config()
    x0, y0 = mf.initial_lift(cfg)
    assert np.array_equal(x0, cfg.x0)
    assert np.array_equal(y0, cfg.u0)


def test_initial_lift_figure1_value():
    cfg = fig1_config()
    _, y0 = mf.initial_lift(cfg)
    # -beta(1)*(u0 + beta(1)*grad) + (b(1) - beta'(1) - alpha*beta(1)/1)*x0
    assert y0 == pytest.approx([-1.0 * (0.0 + 1.0) + (4.5 - 0.0 - 9.0) * 10.0])
    assert y0 == pytest.approx([-46.0])


def test_initial_lift_at_minimizer():
    cfg = fig1_config(x0=0.0)
    _, y0 = mf.initial_lift(cfg)
    assert y0 == pytest.approx([0.0])


def test_velocity_reconstruct_matches_u0():
    for cfg in (fig1_config(), fig1_config(u0=3.5), setting1_config()):
        x0, y0 = mf.initial_lift(cfg)
        v0 = mf.velocity_reconstruct(cfg, cfg.schedule.t0, x0, y0)
        assert v0 == pytest.approx(cfg.u0, abs=1e-10)


def test_velocity_reconstruct_beta_zero_returns_y():
    cfg = setting1_config()
    y = np.array([2.75])
    assert np.array_equal(mf.velocity_reconstruct(cfg, 3.0, [1.0], y), y)


def test_rhs_beta_zero_example():
    sch = mf.PolynomialSchedule(alpha=9, t0=1, lambda0=1, l=1, beta0=0, m=0,
                                b0=1.0, n=5)
    cfg = mf.SystemConfig(objective=mf.l1(1), schedule=sch, x0=[10.0],
                          u0=[0.0], t_end=10.0)
    dx, dy = mf.rhs_beta_zero(cfg, 1.0, [10.0], [0.0])
    assert dx == pytest.approx([0.0])
    assert dy == pytest.approx([-1.0])  # -(9/1)*0 - 1*grad, grad = 1


def test_rhs_equilibrium_is_fixed_point():
    cfg = fig1_config(x0=0.0)
    dx, dy = mf.rhs_beta_positive(cfg, 2.0, [0.0], [0.0])
    assert dx == pytest.approx([0.0]) and dy == pytest.approx([0.0])
    cfg0 = setting1_config()
    dx, dy = mf.rhs_beta_zero(cfg0, 2.0, [0.0], [0.0])
    assert dx == pytest.approx([0.0]) and dy == pytest.approx([0.0])


def test_rhs_wrong_branch_rejected():
    with pytest.raises(ValueError, match="branch"):
        mf.rhs_beta_zero(fig1_config(), 1.0, [1.0], [0.0])
    with pytest.raises(ValueError, match="branch"):
        mf.rhs_beta_positive(setting1_config(), 1.0, [1.0], [0.0])


def test_rhs_deterministic():
    cfg = fig1_config()
    a = mf.rhs_beta_positive(cfg, 3.0, [2.0], [-5.0])
    b = mf.rhs_beta_positive(cfg, 3.0, [2.0], [-5.0])
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_rhs_finite_on_figure1_initial_state():
    cfg = fig1_config()
    x0, y0 = mf.initial_lift(cfg)
    dx, dy = mf.rhs_beta_positive(cfg, 1.0, x0, y0)
    assert np.all(np.isfinite(dx)) and np.all(np.isfinite(dy))
    # pinned after checking the lift consistency (dx = u0 = 0) and the
    # coefficient arithmetic by hand: dy = 6.75*10 - 4.5*(-46)
    assert dx == pytest.approx([0.0], abs=1e-12)
    assert dy == pytest.approx([274.5], abs=1e-10)


# --- integrate ---------------------------------------------------------


def test_sample_times_cover_range():
    cfg = fig1_config(t_end=50.0, sample_count=100)
    traj = mf.integrate(cfg)
    assert traj.t[0] == cfg.schedule.t0
    assert traj.t[-1] == cfg.t_end
    assert np.all(np.diff(traj.t) > 0)
    assert len(traj) == 100


def test_equilibrium_stays_put():
    cfg = fig1_config(x0=0.0, t_end=100.0)
    traj = mf.integrate(cfg)
    assert np.max(traj.dist_to_minimizer) <= 10 * cfg.abs_tol
    assert np.max(traj.envelope_gap) <= 1e-8


def test_figure1_decay_factor():
    cfg = fig1_config(n=4.0)
    traj = mf.integrate(cfg)
    i10 = int(np.argmin(np.abs(traj.t - 10.0)))
    assert traj.envelope_gap[i10] / traj.envelope_gap[-1] >= 1e3
    assert np.all(traj.envelope_gap >= -1e-9)
    assert np.all(traj.prox_gap >= -1e-9)


def test_prox_envelope_identity_at_samples():
    traj = mf.integrate(fig1_config(n=2.0, t_end=30.0))
    lam = traj.config.schedule.eval(traj.t).lam
    lhs = traj.envelope_gap
    rhs = traj.prox_gap + traj.prox_dist**2 / (2 * lam)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-300)


def test_envelope_time_derivative_identity():
    # d/dt envelope_gap = <grad, xdot> - (lam'/2)||grad||^2 on smooth spans
    cfg = fig1_config(n=2.0, t_end=5.0, sample_count=2000)
    traj = mf.integrate(cfg)
    sch = cfg.schedule
    mask = (traj.t > 1.2) & (traj.t < 2.0)
    idx = np.where(mask)[0][1:-1]
    checked = 0
    for k in idx[::10]:
        fd = (traj.envelope_gap[k + 1] - traj.envelope_gap[k - 1]) / (
            traj.t[k + 1] - traj.t[k - 1]
        )
        s = sch.eval(traj.t[k])
        ev = mf.moreau(cfg.objective, float(s.lam), traj.x[k])
        expected = float(ev.gradient @ traj.v[k]) - 0.5 * float(s.dlam) * float(
            ev.gradient @ ev.gradient
        )
        assert fd == pytest.approx(expected, rel=1e-3, abs=1e-9)
        checked += 1
    assert checked >= 10


def test_odd_symmetry_for_even_objective():
    base = fig1_config(n=2.0, t_end=20.0)
    neg = fig1_config(n=2.0, t_end=20.0, x0=-10.0)
    a, b = mf.integrate(base), mf.integrate(neg)
    assert b.x == pytest.approx(-a.x, rel=1e-6, abs=1e-9)


def test_branch_continuity_in_beta():
    sch0 = mf.PolynomialSchedule(alpha=9, t0=1, lambda0=1, l=1, beta0=0,
                                 m=1, b0=2.75, n=2)
    sch1 = mf.PolynomialSchedule(alpha=9, t0=1, lambda0=1, l=1, beta0=1e-8,
                                 m=1, b0=2.75, n=2)
    mk = lambda sch: mf.SystemConfig(objective=mf.l1(1), schedule=sch,
                                     x0=[10.0], u0=[0.0], t_end=20.0,
                                     rel_tol=1e-10, abs_tol=1e-12,
                                     sample_count=200)
    t0, t1 = mf.integrate(mk(sch0)), mf.integrate(mk(sch1))
    assert np.max(np.abs(t0.x - t1.x)) < 1e-4


def test_tolerance_halving_convergence():
    cfg = fig1_config(n=2.0, t_end=3.0, rel_tol=1e-8, abs_tol=1e-11)
    half = fig1_config(n=2.0, t_end=3.0, rel_tol=5e-9, abs_tol=5e-12)
    xa = mf.integrate(cfg).x[-1]
    xb = mf.integrate(half).x[-1]
    assert np.linalg.norm(xa - xb) < 10 * cfg.rel_tol * np.linalg.norm(xa)


def test_numba_and_python_drivers_agree():
    cfg = fig1_config(n=2.0, t_end=10.0, sample_count=50)
    fast = mf.integrate(cfg)
    assert cores.HAVE_NUMBA
    cores.HAVE_NUMBA = False
    try:
        slow = mf.integrate(fig1_config(n=2.0, t_end=10.0, sample_count=50))
    finally:
        cores.HAVE_NUMBA = True
    # two independent adaptive step sequences; agreement at global-error level
    assert slow.x == pytest.approx(fast.x, rel=1e-4, abs=1e-6)
    assert slow.v == pytest.approx(fast.v, rel=1e-4, abs=1e-5)


def test_integrate_numeric_separable_short():
    f = mf.numeric_separable(lambda y: np.exp(y) - y, (-50.0, 50.0),
                             minimizer_value=0.0, optimal_value=1.0)
    sch = mf.PolynomialSchedule(alpha=9, t0=1, lambda0=1, l=1, beta0=1, m=0,
                                b0=2.0, n=1)
    cfg = mf.SystemConfig(objective=f, schedule=sch, x0=[3.0], u0=[0.0],
                          t_end=3.0, rel_tol=1e-7, abs_tol=1e-9,
                          sample_count=40)
    traj = mf.integrate(cfg)
    assert traj.envelope_gap[-1] < traj.envelope_gap[0]
    assert np.all(np.isfinite(traj.x))


def test_divergence_figure4b():
    sch = mf.PolynomialSchedule(alpha=2, t0=1, lambda0=1, l=4, beta0=1, m=6,
                                b0=mf.default_b0(2, 6, 4, 1, 1), n=4)
    cfg = mf.SystemConfig(objective=mf.elastic_abs(1), schedule=sch,
                          x0=[10.0], u0=[0.0], t_end=100.0)
    try:
        traj = mf.integrate(cfg)
        assert traj.dist_to_minimizer[-1] > traj.dist_to_minimizer[0]
    except mf.DivergenceError as exc:
        assert exc.trajectory is not None and len(exc.trajectory) > 0
        assert np.all(np.isfinite(exc.trajectory.x))


def test_stiffness_budget_carries_partial_trajectory():
    cfg = fig1_config(n=4.0, t_end=100.0, max_steps=5_000)
    with pytest.raises(mf.StiffnessError) as err:
        mf.integrate(cfg)
    partial = err.value.trajectory
    assert partial is not None and 0 < len(partial) < cfg.sample_count
    assert partial.t[-1] <= err.value.time


def test_trajectory_arrays_read_only():
    traj = mf.integrate(fig1_config(n=2.0, t_end=5.0, sample_count=30))
    with pytest.raises(ValueError):
        traj.envelope_gap[0] = 0.0
    st = traj.state(3)
    assert st.t == traj.t[3]


def test_method_auto_selection():
    assert estimate_explicit_steps(fig1_config(n=2.0)) < 1e6
    sch = mf.PolynomialSchedule(alpha=13, t0=1, lambda0=1, l=1, beta0=1, m=2,
                                b0=28.0, n=9)
    cfg = mf.SystemConfig(objective=mf.elastic_abs(1), schedule=sch,
                          x0=[10.0], u0=[0.0], t_end=100.0)
    assert estimate_explicit_steps(cfg) > 1e6


# --- ode_residual -------------------------------------------------------


def test_ode_residual_equilibrium_zero():
    cfg = fig1_config(x0=0.0, t_end=50.0, sample_count=1200)
    traj = mf.integrate(cfg)
    assert mf.ode_residual(cfg, traj, 20.0) <= 1e-10


def test_ode_residual_smooth_segments():
    cfg = fig1_config(n=2.0, t_end=100.0, sample_count=2000)
    traj = mf.integrate(cfg)
    for t in (20.0, 50.0, 80.0):
        assert mf.ode_residual(cfg, traj, t) <= 1e-3


def test_ode_residual_rejects_sparse_sampling():
    cfg = fig1_config(n=2.0, t_end=100.0, sample_count=40)
    traj = mf.integrate(cfg)
    with pytest.raises(ValueError, match="spacing"):
        mf.ode_residual(cfg, traj, 50.0)


def test_config_validation():
    with pytest.raises(ValueError, match="t_end"):
        fig1_config(t_end=0.5)
    with pytest.raises(ValueError, match="x0"):
        mf.SystemConfig(objective=mf.l1(2),
                        schedule=fig1_config().schedule,
                        x0=[1.0], u0=[0.0, 0.0], t_end=10.0)
