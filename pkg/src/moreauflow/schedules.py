"""Polynomial parameter schedules lambda0*t^l, beta0*t^m, b0*t^n.

Derivatives are closed-form monomial calculus; the auxiliary decay
function w(t) = b(t) - beta'(t) - beta(t)/t and its derivative are
assembled from them, never finite-differenced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PolynomialSchedule", "ScheduleEval", "default_b0"]


@dataclass(frozen=True)
class ScheduleEval:
    """Schedule values at one time (scalars) or a time grid (arrays)."""

    lam: np.ndarray
    dlam: np.ndarray
    beta: np.ndarray
    dbeta: np.ndarray
    ddbeta: np.ndarray
    b: np.ndarray
    db: np.ndarray
    w: np.ndarray
    dw: np.ndarray


@dataclass(frozen=True)
class PolynomialSchedule:
    alpha: float
    t0: float = 1.0
    lambda0: float = 1.0
    l: float = 1.0
    beta0: float = 0.0
    m: float = 0.0
    b0: float = 1.0
    n: float = 0.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not self.lambda0 > 0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0}")
        if not self.b0 > 0:
            raise ValueError(f"b0 must be positive, got {self.b0}")
        if self.beta0 < 0:
            raise ValueError(f"beta0 must be nonnegative, got {self.beta0}")

    @property
    def beta_positive(self) -> bool:
        return self.beta0 > 0

    def eval(self, t) -> ScheduleEval:
        """Evaluate all schedule quantities at t (scalar or array), t >= t0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0 * (1 - 1e-12)):
            raise ValueError(f"schedule evaluated at t < t0 = {self.t0}")
        lam = self.lambda0 * t**self.l
        dlam = self.lambda0 * self.l * t ** (self.l - 1)
        beta = self.beta0 * t**self.m
        dbeta = self.beta0 * self.m * t ** (self.m - 1)
        ddbeta = self.beta0 * self.m * (self.m - 1) * t ** (self.m - 2)
        b = self.b0 * t**self.n
        db = self.b0 * self.n * t ** (self.n - 1)
        w = b - dbeta - beta / t
        dw = db - ddbeta - dbeta / t + beta / t**2
        return ScheduleEval(lam, dlam, beta, dbeta, ddbeta, b, db, w, dw)

    def as_callables(self):
        """(lambda, beta, b) value/derivative callables for the grid checker."""
        lam = (lambda t: self.lambda0 * np.asarray(t, float) ** self.l,
               lambda t: self.lambda0 * self.l * np.asarray(t, float) ** (self.l - 1))
        beta = (lambda t: self.beta0 * np.asarray(t, float) ** self.m,
                lambda t: self.beta0 * self.m * np.asarray(t, float) ** (self.m - 1),
                lambda t: self.beta0 * self.m * (self.m - 1) * np.asarray(t, float) ** (self.m - 2))
        b = (lambda t: self.b0 * np.asarray(t, float) ** self.n,
             lambda t: self.b0 * self.n * np.asarray(t, float) ** (self.n - 1))
        return lam, beta, b


def default_b0(alpha: float, m: float, n: float, beta0: float, t0: float) -> float:
    """Coefficient rule b0 = (m+1)(alpha-m-2) beta0 / ((alpha-3-n) t0^(n-m+1)) + 1.

    Clamped to 1 when the formula is nonpositive (the system needs b > 0;
    this happens for the Figure-4(a)-style divergence demo parameters).
    """
    denom = alpha - 3.0 - n
    if denom == 0:
        raise ValueError("alpha - 3 - n = 0: coefficient rule undefined")
    raw = (m + 1.0) * (alpha - m - 2.0) * beta0 / (denom * t0 ** (n - m + 1.0)) + 1.0
    return raw if raw > 0 else 1.0
