"""Seeded multi-restart ascent for positively homogeneous objectives.

Everything estimated in this package is a supremum of a ratio that is
invariant (or homogeneous) under scaling of a nonnegative vector.  The
helper here works in log coordinates ``x = exp(theta)`` so iterates stay
strictly positive; coordinates that should vanish are driven towards
``exp(-large)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerOptions:
    """Knobs shared by all estimators.

    restarts
        Number of random starting points, in addition to any structured
        starts an estimator supplies (leaf indicators, closed-form guesses).
    max_iters
        Iteration cap per restart.
    shrink, max_halvings
        Backtracking line search: the step starts at 1.0 and is multiplied
        by ``shrink`` until the objective improves, at most ``max_halvings``
        times.  Failure to improve at every step size ends the restart.
    tol
        Relative improvement below which a restart is considered converged.
    seed
        Master seed; restart ``i`` draws from ``default_rng([seed, i])``.
    selection_cap
        Largest number of per-leaf selection maps the maximal-operator
        estimator will enumerate exhaustively.
    """

    restarts: int = 64
    max_iters: int = 300
    shrink: float = 0.5
    max_halvings: int = 40
    tol: float = 1e-8
    seed: int = 0
    selection_cap: int = 20_000

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.max_halvings < 1:
            raise ValueError("restarts, max_iters and max_halvings must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def rng(self, restart: int) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, restart])


@dataclass
class AscentResult:
    x: np.ndarray
    value: float
    converged: bool
    restarts_used: int


def _fd_gradient(logf, theta, h=1e-6):
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (logf(theta + e) - logf(theta - e)) / (2 * h)
    return g


def _safe_log(value):
    return np.log(value) if value > 0 else -np.inf


def _lbfgs(logf, log_gradient, theta, opts, floor):
    def fun(th):
        val = logf(th)
        if not np.isfinite(val):
            return 1e300, np.zeros_like(th)
        return -val, -log_gradient(np.exp(th))

    bound = -np.log(floor)
    res = minimize(
        fun, theta, jac=True, method="L-BFGS-B",
        bounds=[(-bound, bound)] * theta.size,
        options={"maxiter": opts.max_iters, "ftol": opts.tol * 1e-2},
    )
    theta = res.x if logf(res.x) >= logf(theta) else theta
    return theta, logf(theta), bool(res.success)


def maximize_positive(
    objective: Callable[[np.ndarray], float],
    dim: int,
    opts: OptimizerOptions,
    starts: Sequence[np.ndarray] = (),
    log_gradient: Callable[[np.ndarray], np.ndarray] | None = None,
    floor: float = 1e-12,
) -> AscentResult:
    """Maximize ``objective(x)`` over strictly positive ``x`` of length ``dim``.

    Without ``log_gradient`` this is gradient ascent on ``log objective`` in
    ``theta = log x`` with central-difference gradients and a backtracking
    line search; that copes with the piecewise smooth (sup-type) objectives
    met here.  With ``log_gradient(x)`` (the gradient of ``log objective``
    with respect to ``theta``) each restart is handed to L-BFGS-B on a box
    in ``theta``, which reaches vanishing coordinates far faster.
    """
    if dim == 0:
        return AscentResult(np.zeros(0), 0.0, True, 0)

    def logf(theta):
        return _safe_log(objective(np.exp(theta)))

    inits = [np.asarray(s, dtype=float) for s in starts]
    inits += [opts.rng(i).exponential(size=dim) for i in range(opts.restarts)]

    best_x, best_val, best_conv = None, -np.inf, False
    for x0 in inits:
        top = x0.max()
        if not top > 0:
            continue
        theta = np.log(np.maximum(x0 / top, floor))
        if log_gradient is not None:
            theta, cur, converged = _lbfgs(logf, log_gradient, theta, opts, floor)
            if cur > best_val:
                best_x, best_val, best_conv = np.exp(theta), cur, converged
            continue
        cur = logf(theta)
        history = [cur]
        converged = False
        for _ in range(opts.max_iters):
            g = _fd_gradient(logf, theta)
            gmax = np.max(np.abs(g))
            if not np.isfinite(gmax) or gmax == 0:
                converged = True
                break
            d = g / gmax
            step, improved = 1.0, False
            for _ in range(opts.max_halvings):
                cand = theta + step * d
                val = logf(cand)
                if val > cur:
                    improved = True
                    break
                step *= opts.shrink
            if not improved:
                converged = True
                break
            gain = val - cur
            theta, cur = cand, val
            history.append(cur)
            if gain < opts.tol:
                converged = True
                break
        if not converged:
            # unimproved over the final quarter of the run counts as converged
            tail = history[-max(1, len(history) // 4)]
            converged = cur - tail < opts.tol
        if cur > best_val:
            best_x, best_val, best_conv = np.exp(theta), cur, converged
    if best_x is None:
        return AscentResult(np.zeros(dim), 0.0, True, len(inits))
    return AscentResult(best_x, float(np.exp(best_val)), best_conv, len(inits))
