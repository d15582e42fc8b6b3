"""Random + mutation search for instances that make a report ratio large."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..optimize import OptimizerOptions
from ..tree import Instance, Measure, build_tree, indicator
from .instances import gen
from .report import compute_values, ratio, ratio_operands
from .suites import random_spec

logger = logging.getLogger(__name__)


@dataclass
class FuzzResult:
    target: str
    ratio: float
    instance: Instance
    evaluations: int
    history: list = field(default_factory=list)  # (evaluation index, best ratio) on improvement


def baseline_instance(dimension: int, depth: int, p: float, q: float) -> Instance:
    """Single root coefficient with uniform unit leaves; every scale ratio is 1 here."""
    tree = build_tree(dimension, depth)
    mu = Measure(tree, np.ones(tree.n_leaves))
    return Instance(mu, mu, indicator(tree, [tree.root]), p, q)


def _mutate(inst: Instance, rng: np.random.Generator) -> Instance:
    tree = inst.tree
    sigma, omega, lam = inst.sigma.leaf_mass.copy(), inst.omega.leaf_mass.copy(), inst.lam.copy()
    move = rng.integers(4)
    if move == 0:
        sigma *= np.exp(rng.normal(scale=1.0, size=sigma.size))
    elif move == 1:
        omega *= np.exp(rng.normal(scale=1.0, size=omega.size))
    elif move == 2:
        c = rng.integers(tree.n_cubes)
        lam[c] = 0.0 if lam[c] > 0 else rng.exponential()
    else:
        lam *= np.exp(rng.normal(scale=1.0, size=lam.size))
    if not lam.any():
        lam[tree.root] = 1.0
    if not sigma.any():
        sigma[:] = 1.0
    if not omega.any():
        omega[:] = 1.0
    return Instance(Measure(tree, sigma), Measure(tree, omega), lam, inst.p, inst.q)


def fuzz(
    target: str,
    budget: int,
    seed: int = 0,
    *,
    dimension: int = 1,
    depth: int = 2,
    p: float = 2.0,
    q: float = 1.0,
    eps: float | None = None,
    opts: OptimizerOptions | None = None,
    fresh: float = 0.3,
) -> FuzzResult:
    """Maximize ``target`` (a report ratio name such as ``"S_over_N"``) over ``budget`` candidates.

    Starts from :func:`baseline_instance`; each step either mutates the best
    instance so far or, with probability ``fresh``, draws a new random one.
    Undefined ratios (zero denominators) never win.
    """
    a, b = ratio_operands(target)
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    opts = opts or OptimizerOptions(restarts=8, seed=seed)

    def score(inst):
        vals = compute_values(inst, (a, b), opts, eps)
        r = ratio(vals[a], vals[b])
        return -math.inf if r is None or math.isnan(r) else r

    best = baseline_instance(dimension, depth, p, q)
    best_score = score(best)
    history = [(0, best_score)]
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, 0xF022])
    for step in range(1, budget + 1):
        if rng.random() < fresh:
            cand = gen(random_spec(rng, p, q, (depth,), dimension))
            if not cand.lam.any():
                cand = cand.with_lambda(indicator(cand.tree, [cand.tree.root]))
        else:
            cand = _mutate(best, rng)
        s = score(cand)
        if s > best_score:
            best, best_score = cand, s
            history.append((step, s))
            logger.debug("fuzz %s: step %d ratio %.6g", target, step, s)
    return FuzzResult(target, float(best_score), best, budget + 1, history)
