"""Tour of the objective catalog: proximal maps and Moreau envelopes.

Shows soft-thresholding, the envelope's smoothing effect as the
parameter grows, and the exact gradient identity. Saves a plot when
matplotlib is available.
"""

import numpy as np

import moreauflow as mf

print("=== objective catalog ===")
functions = {
    "|x|": mf.l1(1),
    "|x| + x^2/2": mf.elastic_abs(1),
    "(3/2)(x - 1)^2": mf.diag_quadratic([3.0], [1.0]),
}
for name, f in functions.items():
    ev = mf.moreau(f, 1.0, [2.0])
    print(f"  {name:<16} value(2) = {mf.value(f, [2.0]):6.3f}   "
          f"prox_1(2) = {ev.prox_point[0]:6.3f}   "
          f"envelope_1(2) = {ev.envelope_value:6.3f}   "
          f"grad = {ev.gradient[0]:6.3f}")

print("\n=== envelope flattens as the parameter grows (|x| at x = 2) ===")
f = mf.l1(1)
for lam in (0.25, 1.0, 4.0, 16.0):
    ev = mf.moreau(f, lam, [2.0])
    print(f"  lam = {lam:5.2f}: envelope = {ev.envelope_value:8.5f}, "
          f"|grad| = {abs(ev.gradient[0]):8.5f}")

print("\n=== gradient identity: grad = (x - prox)/lam, checked vs finite differences ===")
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    lam = float(rng.uniform(0.1, 10))
    x = rng.uniform(-20, 20, 1)
    h = 1e-6
    fd = (mf.moreau(f, lam, x + h).envelope_value
          - mf.moreau(f, lam, x - h).envelope_value) / (2 * h)
    worst = max(worst, abs(fd - mf.moreau(f, lam, x).gradient[0]))
print(f"  worst |finite difference - exact gradient| over 200 draws: {worst:.2e}")

print("\n=== independent check: grid + golden-section oracle vs closed form ===")
for name, f in functions.items():
    x = np.array([7.3])
    gap = abs(mf.prox(f, 2.5, x)[0] - mf.brute_force_prox(f, 2.5, x)[0])
    print(f"  {name:<16} |closed form - oracle| = {gap:.2e}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = np.linspace(-3, 3, 601)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, np.abs(xs), "k-", label="|x|")
    for lam in (0.25, 1.0, 4.0):
        env = [mf.moreau(f, lam, [x]).envelope_value for x in xs]
        ax.plot(xs, env, label=f"envelope, lam = {lam}")
    ax.legend()
    ax.set_title("Moreau envelopes of |x|")
    fig.tight_layout()
    fig.savefig("demo_envelopes.png", dpi=120)
    print("\nwrote demo_envelopes.png")
except ImportError:
    print("\n(matplotlib not installed; skipping the plot)")
