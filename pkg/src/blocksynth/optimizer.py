"""Limited-memory BFGS with a strong-Wolfe line search.

Line search follows Nocedal & Wright, Algorithms 3.5/3.6, with safeguarded
cubic interpolation in the zoom phase.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalFailure

Objective = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


@dataclass(frozen=True)
class MinimizeOptions:
    max_iterations: int = 1000
    gradient_tolerance: float = 1e-9
    memory: int = 10
    max_line_search: int = 20
    c1: float = 1e-4
    c2: float = 0.9
    # stop as soon as f <= f_target (None disables)
    f_target: float | None = None
    # stop when the relative decrease over one iteration falls below this
    f_rtol: float = 0.0

    def __post_init__(self):
        if self.max_iterations <= 0 or self.gradient_tolerance <= 0 or self.memory <= 0 or self.max_line_search <= 0:
            raise ValueError("minimizer options must be positive")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    f: float
    iterations: int
    converged: bool
    evaluations: int = 0
    message: str = ""


class _Counter:
    def __init__(self, fun: Objective):
        self.fun = fun
        self.calls = 0
        self.last_x: np.ndarray | None = None
        self.last_f: float | None = None

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        self.calls += 1
        f, g = self.fun(x)
        f = float(f)
        g = np.asarray(g, dtype=float)
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            raise NumericalFailure("objective returned a non-finite value", self.last_x, self.last_f)
        if g.shape != x.shape:
            raise ValueError(f"gradient shape {g.shape} does not match x shape {x.shape}")
        self.last_x, self.last_f = x, f
        return f, g


def _cubic_min(a, fa, da, b, fb, db) -> float | None:
    # minimizer of the cubic interpolating (a, fa, da), (b, fb, db)
    d1 = da + db - 3 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = math.copysign(math.sqrt(disc), b - a)
    denom = db - da + 2 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


def _zoom(phi, lo, hi, f0, d0, c1, c2, budget):
    a_lo, f_lo, d_lo, g_lo = lo
    a_hi, f_hi, d_hi = hi
    for _ in range(budget):
        a = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
        lo_b, hi_b = min(a_lo, a_hi), max(a_lo, a_hi)
        margin = 0.1 * (hi_b - lo_b)
        if a is None or not (lo_b + margin <= a <= hi_b - margin):
            a = 0.5 * (a_lo + a_hi)
        f, g, d = phi(a)
        if f > f0 + c1 * a * d0 or f >= f_lo:
            a_hi, f_hi, d_hi = a, f, d
        else:
            if abs(d) <= -c2 * d0:
                return a, f, g, True
            if d * (a_hi - a_lo) >= 0:
                a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
            a_lo, f_lo, d_lo, g_lo = a, f, d, g
        if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_lo)):
            break
    # best point with sufficient decrease, if any
    if a_lo > 0:
        return a_lo, f_lo, g_lo, False
    return None


def line_search(fg, x, f0, g0, p, step=1.0, c1=1e-4, c2=0.9, max_evals=20):
    """Strong-Wolfe step along ``p``.

    Returns ``(alpha, f, g, wolfe_ok)`` or ``None`` when no step with
    sufficient decrease was found inside the evaluation budget.
    """
    d0 = float(g0 @ p)
    if d0 >= 0:
        return None
    used = 0

    def phi(a):
        nonlocal used
        used += 1
        f, g = fg(x + a * p)
        return f, g, float(g @ p)

    a_prev, f_prev, d_prev, g_prev = 0.0, f0, d0, g0
    a = step
    for i in range(max_evals):
        f, g, d = phi(a)
        if f > f0 + c1 * a * d0 or (i > 0 and f >= f_prev):
            return _zoom(phi, (a_prev, f_prev, d_prev, g_prev), (a, f, d), f0, d0, c1, c2, max_evals - used)
        if abs(d) <= -c2 * d0:
            return a, f, g, True
        if d >= 0:
            return _zoom(phi, (a, f, d, g), (a_prev, f_prev, d_prev), f0, d0, c1, c2, max_evals - used)
        a_prev, f_prev, d_prev, g_prev = a, f, d, g
        a *= 2.0
    return a_prev, f_prev, g_prev, False


def minimize(objective: Objective, x0, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Minimize ``objective`` (returning ``(f, grad)``) from ``x0``.

    Stops when ``max|grad| <= gradient_tolerance``, when ``f_target`` is
    reached, or after ``max_iterations``; the returned point never has a
    larger objective than ``x0``.  Raises ``NumericalFailure`` if the
    objective produces NaN/inf.
    """
    opts = opts or MinimizeOptions()
    fg = _Counter(objective)
    x = np.array(x0, dtype=float, copy=True)
    if x.size == 0:
        f, _ = fg(x)
        return MinimizeResult(x, f, 0, True, fg.calls, "empty parameter vector")
    f, g = fg(x)
    s_hist: deque = deque(maxlen=opts.memory)
    y_hist: deque = deque(maxlen=opts.memory)
    rho_hist: deque = deque(maxlen=opts.memory)

    def done(it, msg, ok):
        return MinimizeResult(x, f, it, ok, fg.calls, msg)

    if np.max(np.abs(g)) <= opts.gradient_tolerance:
        return done(0, "gradient tolerance reached", True)
    if opts.f_target is not None and f <= opts.f_target:
        return done(0, "target reached", True)

    it = 0
    restarted = False
    while it < opts.max_iterations:
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if s_hist:
            gamma = (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
        else:
            gamma = 1.0 / max(1.0, float(np.linalg.norm(g)))
        r = gamma * q
        for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            b = rho * (y @ r)
            r += s * (a - b)
        p = -r
        if g @ p >= 0:
            p = -g
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()

        ls = line_search(fg, x, f, g, p, 1.0, opts.c1, opts.c2, opts.max_line_search)
        if ls is None or ls[1] >= f:
            if s_hist and not restarted:
                # discard curvature history and retry along steepest descent
                s_hist.clear()
                y_hist.clear()
                rho_hist.clear()
                restarted = True
                continue
            return done(it, "line search failed", False)
        restarted = False
        step, f_new, g_new, _ = ls
        s = step * p
        y = g_new - g
        sy = s @ y
        x_new = x + s
        f_old = f
        x, f, g = x_new, f_new, g_new
        it += 1
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
        if np.max(np.abs(g)) <= opts.gradient_tolerance:
            return done(it, "gradient tolerance reached", True)
        if opts.f_target is not None and f <= opts.f_target:
            return done(it, "target reached", True)
        if opts.f_rtol > 0 and (f_old - f) <= opts.f_rtol * max(abs(f_old), abs(f), 1.0):
            return done(it, "relative decrease below tolerance", False)
    return done(it, "iteration limit", False)
