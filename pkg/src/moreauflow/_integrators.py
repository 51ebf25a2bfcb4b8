"""Adaptive ODE cores for the lifted first-order systems.

Two embedded pairs share one driver skeleton:

* Dormand-Prince 5(4), explicit, the default for non-stiff runs.
* SDIRK4 (Hairer-Wanner, 5 stages, gamma = 1/4, L-stable, embedded
  order 3), for schedules whose gradient coefficient b(t) makes the
  dynamics oscillatory-stiff. Its stage systems decouple into 2x2
  blocks per coordinate because the objectives are separable.

Both cores are numba-jitted and fill log-spaced samples on the fly via
cubic Hermite interpolation inside each accepted step. A pure-Python
Dormand-Prince mirror handles objectives without a closed-form gradient
(NumericSeparable) and environments without numba.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# status codes returned by the drivers
OK = 0
DIVERGED = 1
STIFF_HMIN = 2
STIFF_BUDGET = 3
STIFF_DETECTED = 4  # explicit pair flagged h*rho(J) persistently beyond its stability bound

_HUGE = 1e100

# Dormand-Prince 5(4) tableau
DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
DP_A = np.zeros((7, 7))
DP_A[1, 0] = 1 / 5
DP_A[2, :2] = (3 / 40, 9 / 40)
DP_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
DP_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
DP_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
DP_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
DP_B = DP_A[6].copy()  # FSAL: last row doubles as the 5th-order weights
DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

# SDIRK4 tableau (Hairer & Wanner, L-stable, stiffly accurate)
SD_GAMMA = 0.25
SD_C = np.array([1 / 4, 3 / 4, 11 / 20, 1 / 2, 1.0])
SD_A = np.array(
    [
        [1 / 4, 0.0, 0.0, 0.0, 0.0],
        [1 / 2, 1 / 4, 0.0, 0.0, 0.0],
        [17 / 50, -1 / 25, 1 / 4, 0.0, 0.0],
        [371 / 1360, -137 / 2720, 15 / 544, 1 / 4, 0.0],
        [25 / 24, -49 / 48, 125 / 16, -85 / 12, 1 / 4],
    ]
)
SD_B = SD_A[4].copy()
SD_E = np.array([-3 / 16, -27 / 32, 25 / 32, 0.0, 1 / 4])


@njit(cache=True)
def _grad_curv(kind, qi, ci, lam, xi):
    """(grad Phi_lam, a.e. curvature) of one separable coordinate."""
    if kind == 0:  # |x|
        if abs(xi) <= lam:
            return xi / lam, 1.0 / lam
        return (1.0 if xi > 0.0 else -1.0), 0.0
    elif kind == 1:  # |x| + x^2/2
        if abs(xi) <= lam:
            return xi / lam, 1.0 / lam
        s = 1.0 if xi > 0.0 else -1.0
        return (xi + s) / (1.0 + lam), 1.0 / (1.0 + lam)
    else:  # (q/2)(x - c)^2
        den = 1.0 + lam * qi
        return qi * (xi - ci) / den, qi / den


@njit(cache=True)
def _coeffs(alpha, lambda0, l, beta0, m, b0, n, t):
    """Integration-chart coefficients (lam, beta, W, alpha/t) at time t.

    The cores integrate the pre-elimination lift

        x' = -beta(t) g(x) - z,   z' = -(alpha/t) z + W(t) g(x),

    with W = b - beta' - alpha*beta/t and g = grad Phi_lam. Its
    coefficients stay O(b) and it degenerates smoothly to the beta = 0
    system (z = -x'), unlike the final (x, y) form whose coefficients
    carry b^2/beta and whose y component scales like b(t) * x.
    """
    lam = lambda0 * t**l
    b = b0 * t**n
    beta = beta0 * t**m
    dbeta = beta0 * m * t ** (m - 1.0)
    W = b - dbeta - alpha * beta / t
    return lam, beta, W, alpha / t


@njit(cache=True)
def _rhs_nb(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t, z, dz):
    d = z.size // 2
    lam, beta, W, aot = _coeffs(alpha, lambda0, l, beta0, m, b0, n, t)
    for i in range(d):
        g, _ = _grad_curv(kind, q[i], c[i], lam, z[i])
        dz[i] = -beta * g - z[d + i]
        dz[d + i] = -aot * z[d + i] + W * g
    return 0


@njit(cache=True)
def _err_norm(e, z0, z1, atol, rtol):
    s = 0.0
    for i in range(e.size):
        sc = atol + rtol * max(abs(z0[i]), abs(z1[i]))
        r = e[i] / sc
        s += r * r
    return math.sqrt(s / e.size)


@njit(cache=True)
def _finite(z):
    for i in range(z.size):
        if not math.isfinite(z[i]) or abs(z[i]) > _HUGE:
            return False
    return True


@njit(cache=True)
def _hermite_fill(t, h, z, f, z1, f1, sample_ts, out, j):
    """Fill out[j] for every sample time in (t, t+h]; return new j."""
    nsamp = sample_ts.size
    while j < nsamp and sample_ts[j] <= t + h:
        th = (sample_ts[j] - t) / h
        h00 = (1.0 + 2.0 * th) * (1.0 - th) ** 2
        h10 = th * (1.0 - th) ** 2
        h01 = th * th * (3.0 - 2.0 * th)
        h11 = th * th * (th - 1.0)
        for i in range(z.size):
            out[j, i] = h00 * z[i] + h * h10 * f[i] + h01 * z1[i] + h * h11 * f1[i]
        j += 1
    return j


@njit(cache=True)
def _initial_step(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t0, z0, f0, atol, rtol):
    nz = z0.size
    d0 = 0.0
    d1 = 0.0
    for i in range(nz):
        sc = atol + rtol * abs(z0[i])
        d0 += (z0[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = math.sqrt(d0 / nz)
    d1 = math.sqrt(d1 / nz)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    z1 = np.empty(nz)
    f1 = np.empty(nz)
    for i in range(nz):
        z1[i] = z0[i] + h0 * f0[i]
    _rhs_nb(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t0 + h0, z1, f1)
    d2 = 0.0
    for i in range(nz):
        sc = atol + rtol * abs(z0[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = math.sqrt(d2 / nz) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1)


@njit(cache=True)
def _drive_dp54_nb(
    kind, q, c, alpha, lambda0, l, beta0, m, b0, n,
    t0, t_end, z0, rtol, atol, max_steps, sample_ts, out,
):
    """Adaptive Dormand-Prince 5(4) with FSAL and Hermite sampling.

    Returns (status, t_reached, z_last, steps, samples_filled).
    """
    nz = z0.size
    z = z0.copy()
    t = t0
    K = np.empty((7, nz))
    zs = np.empty(nz)
    z6 = np.empty(nz)
    z1 = np.empty(nz)
    e = np.empty(nz)
    j = 0
    if sample_ts[0] <= t0:
        for i in range(nz):
            out[0, i] = z[i]
        j = 1
    _rhs_nb(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t, z, K[0])
    if not _finite(K[0]):
        return DIVERGED, t, z, 0, j
    h = _initial_step(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t, z, K[0], atol, rtol)
    h = min(h, t_end - t0)
    steps = 0
    stiff_votes = 0
    while t < t_end:
        if steps >= max_steps:
            return STIFF_BUDGET, t, z, steps, j
        if h < 1e-12 * t:
            if _finite(z):
                return STIFF_HMIN, t, z, steps, j
            return DIVERGED, t, z, steps, j
        if t + h > t_end:
            h = t_end - t
        for s in range(1, 7):
            for i in range(nz):
                acc = 0.0
                for r in range(s):
                    acc += DP_A[s, r] * K[r, i]
                zs[i] = z[i] + h * acc
            if s == 5:
                for i in range(nz):
                    z6[i] = zs[i]
            _rhs_nb(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t + DP_C[s] * h, zs, K[s])
        # stage 6 state IS the 5th-order solution (A row 7 == B)
        for i in range(nz):
            z1[i] = zs[i]
            acc = 0.0
            for r in range(7):
                acc += DP_E[r] * K[r, i]
            e[i] = h * acc
        bad = not _finite(z1)
        if bad:
            err = 2.0
        else:
            err = _err_norm(e, z, z1, atol, rtol)
        steps += 1
        if err <= 1.0:
            # Hairer's stiffness indicator: h * rho(J) from the two c = 1 stages
            num = 0.0
            den = 0.0
            for i in range(nz):
                num += (K[6, i] - K[5, i]) ** 2
                den += (z1[i] - z6[i]) ** 2
            if den > 0.0:
                if h * math.sqrt(num / den) > 3.25:
                    stiff_votes += 1
                    if stiff_votes >= 25:
                        return STIFF_DETECTED, t, z, steps, j
                elif stiff_votes > 0:
                    stiff_votes -= 1
            j = _hermite_fill(t, h, z, K[0], z1, K[6], sample_ts, out, j)
            t = t + h
            for i in range(nz):
                z[i] = z1[i]
                K[0, i] = K[6, i]  # FSAL
            if not _finite(z):
                return DIVERGED, t, z, steps, j
            if err == 0.0:
                fac = 10.0
            else:
                fac = min(10.0, max(0.2, 0.9 * err**-0.2))
            h = h * fac
        else:
            if bad or not math.isfinite(err):
                h = h * 0.25
            else:
                h = h * max(0.2, min(1.0, 0.9 * err**-0.2))
    return OK, t, z, steps, j


@njit(cache=True)
def _sdirk_stage(kind, q, c, lam, beta, W, aot, hg, R, Y, atol, rtol):
    """Solve the decoupled 2x2 stage systems Y = R + h*gamma*f(t, Y) by Newton.

    f is the (x, z) chart: f1 = -beta g(u) - v, f2 = -aot v + W g(u).
    Returns 0 on convergence, 1 on failure. Y holds the stage state.
    """
    d = R.size // 2
    for i in range(d):
        u = R[i]
        v = R[d + i]
        ok = False
        for _ in range(14):
            g, gp = _grad_curv(kind, q[i], c[i], lam, u)
            f1 = -beta * g - v
            f2 = -aot * v + W * g
            j11 = 1.0 + hg * beta * gp
            j12 = hg
            j21 = -hg * W * gp
            j22 = 1.0 + hg * aot
            F1 = u - hg * f1 - R[i]
            F2 = v - hg * f2 - R[d + i]
            det = j11 * j22 - j12 * j21
            if det == 0.0 or not math.isfinite(det):
                return 1
            du = (-F1 * j22 + F2 * j12) / det
            dv = (-F2 * j11 + F1 * j21) / det
            u += du
            v += dv
            if not (math.isfinite(u) and math.isfinite(v)):
                return 1
            su = atol + rtol * abs(u)
            sv = atol + rtol * abs(v)
            if abs(du) < 0.03 * su and abs(dv) < 0.03 * sv:
                ok = True
                break
        if not ok:
            return 1
        Y[i] = u
        Y[d + i] = v
    return 0


@njit(cache=True)
def _drive_sdirk4_nb(
    kind, q, c, alpha, lambda0, l, beta0, m, b0, n,
    t0, t_end, z0, rtol, atol, max_steps, sample_ts, out,
):
    """Adaptive L-stable SDIRK4 with Hermite sampling.

    Same contract as the Dormand-Prince driver.
    """
    nz = z0.size
    z = z0.copy()
    t = t0
    K = np.empty((5, nz))
    R = np.empty(nz)
    Y = np.empty(nz)
    f0 = np.empty(nz)
    f1 = np.empty(nz)
    e = np.empty(nz)
    z1 = np.empty(nz)
    j = 0
    if sample_ts[0] <= t0:
        for i in range(nz):
            out[0, i] = z[i]
        j = 1
    _rhs_nb(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t, z, f0)
    if not _finite(f0):
        return DIVERGED, t, z, 0, j
    h = _initial_step(kind, q, c, alpha, lambda0, l, beta0, m, b0, n, t, z, f0, atol, rtol)
    h = min(h, t_end - t0)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return STIFF_BUDGET, t, z, steps, j
        if h < 1e-12 * t:
            if _finite(z):
                return STIFF_HMIN, t, z, steps, j
            return DIVERGED, t, z, steps, j
        if t + h > t_end:
            h = t_end - t
        hg = h * SD_GAMMA
        failed = False
        for s in range(5):
            ts = t + SD_C[s] * h
            lam, beta, W, aot = _coeffs(alpha, lambda0, l, beta0, m, b0, n, ts)
            for i in range(nz):
                acc = 0.0
                for r in range(s):
                    acc += SD_A[s, r] * K[r, i]
                R[i] = z[i] + h * acc
            if _sdirk_stage(kind, q, c, lam, beta, W, aot, hg, R, Y, atol, rtol) != 0:
                failed = True
                break
            for i in range(nz):
                K[s, i] = (Y[i] - R[i]) / hg
        steps += 1
        if failed:
            h = h * 0.25
            continue
        for i in range(nz):
            z1[i] = Y[i]  # stiffly accurate: last stage is the solution
            acc = 0.0
            for r in range(5):
                acc += SD_E[r] * K[r, i]
            e[i] = h * acc
        if not _finite(z1):
            h = h * 0.25
            continue
        err = _err_norm(e, z, z1, atol, rtol)
        if err <= 1.0:
            for i in range(nz):
                f1[i] = K[4, i]  # c5 = 1: last stage derivative is f(t+h, z1)
            j = _hermite_fill(t, h, z, f0, z1, f1, sample_ts, out, j)
            t = t + h
            for i in range(nz):
                z[i] = z1[i]
                f0[i] = f1[i]
            if not _finite(z):
                return DIVERGED, t, z, steps, j
            if err == 0.0:
                fac = 6.0
            else:
                fac = min(6.0, max(0.2, 0.9 * err**-0.25))
            h = h * fac
        else:
            if not math.isfinite(err):
                h = h * 0.25
            else:
                h = h * max(0.2, min(1.0, 0.9 * err**-0.25))
    return OK, t, z, steps, j


def drive_python_dp54(rhs, t0, t_end, z0, rtol, atol, max_steps, sample_ts):
    """Pure-Python Dormand-Prince mirror for arbitrary rhs callables.

    Used for NumericSeparable objectives and as a cross-check of the
    jitted driver. Returns (status, t_reached, z_last, steps, out, filled).
    """
    nz = z0.size
    out = np.full((sample_ts.size, nz), np.nan)
    z = z0.astype(float).copy()
    t = float(t0)
    j = 0
    if sample_ts[0] <= t0:
        out[0] = z
        j = 1
    K = np.empty((7, nz))
    K[0] = rhs(t, z)
    if not np.all(np.isfinite(K[0])):
        return DIVERGED, t, z, 0, out, j

    scale = atol + rtol * np.abs(z)
    d0 = math.sqrt(float(np.mean((z / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((K[0] / scale) ** 2)))
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, t_end - t0)

    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return STIFF_BUDGET, t, z, steps, out, j
        if h < 1e-12 * t:
            status = STIFF_HMIN if np.all(np.isfinite(z)) else DIVERGED
            return status, t, z, steps, out, j
        if t + h > t_end:
            h = t_end - t
        for s in range(1, 7):
            zs = z + h * (DP_A[s, :s] @ K[:s])
            K[s] = rhs(t + DP_C[s] * h, zs)
        z1 = z + h * (DP_B @ K)
        e = h * (DP_E @ K)
        steps += 1
        if not np.all(np.isfinite(z1)) or np.any(np.abs(z1) > _HUGE):
            err = math.inf
        else:
            sc = atol + rtol * np.maximum(np.abs(z), np.abs(z1))
            err = math.sqrt(float(np.mean((e / sc) ** 2)))
        if err <= 1.0:
            while j < sample_ts.size and sample_ts[j] <= t + h:
                th = (sample_ts[j] - t) / h
                h00 = (1 + 2 * th) * (1 - th) ** 2
                h10 = th * (1 - th) ** 2
                h01 = th * th * (3 - 2 * th)
                h11 = th * th * (th - 1)
                out[j] = h00 * z + h * h10 * K[0] + h01 * z1 + h * h11 * K[6]
                j += 1
            t += h
            z = z1
            K[0] = K[6]
            if not np.all(np.isfinite(z)) or np.any(np.abs(z) > _HUGE):
                return DIVERGED, t, z, steps, out, j
            h *= 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err**-0.2))
        else:
            h *= 0.25 if not math.isfinite(err) else max(0.2, min(1.0, 0.9 * err**-0.2))
    return OK, t, z, steps, out, j
