"""Discrete Littlewood–Paley norms ``f^{p,q}(mu)`` on a finite dyadic tree.

The norm of a nonnegative cube family ``a`` is

* ``(int (sum_Q a_Q^q 1_Q)^(p/q) dmu)^(1/p)`` for finite ``p`` and ``q``,
* ``(int (sup_Q a_Q 1_Q)^p dmu)^(1/p)`` for ``q = inf``,
* ``sup_Q ((1/mu(Q)) sum_{R ⊆ Q} a_R^q mu(R))^(1/q)`` for ``p = inf``,
* ``sup_Q a_Q`` for ``p = q = inf``.

Integrals are exact leaf sums.  Inner sums and outer powers are carried in
the log domain so that exponents such as ``p/(p-q)`` with ``q`` close to
``p`` do not overflow.  For ``q < 0`` a vanishing ``a_Q`` makes the inner
sum infinite and the outer negative power sends it to 0.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp as _scipy_logsumexp

from .errors import ParameterError
from .optimize import OptimizerOptions, maximize_positive
from .tree import Measure

logger = logging.getLogger(__name__)

INF = math.inf


def conjugate(p: float) -> float:
    """Hölder conjugate ``p' = p/(p-1)`` on ``[1, inf]``."""
    p = float(p)
    if p < 1:
        raise ParameterError(f"conjugate exponent needs p >= 1, got {p}")
    if p == 1:
        return INF
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


def _check_exponents(p, q):
    p, q = float(p), float(q)
    if not (p > 0):
        raise ParameterError(f"p must lie in (0, inf], got {p}")
    if q == 0 or q == -INF or np.isnan(q):
        raise ParameterError(f"q must be a nonzero real or +inf, got {q}")
    return p, q


def logsumexp(x, axis=-1):
    """``log sum exp(x)`` along ``axis``; tolerates ``-inf`` and ``+inf`` entries."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return _scipy_logsumexp(np.asarray(x, dtype=float), axis=axis)


def _log_power_sum(values, q, axis=-1):
    """``log sum v**q`` along ``axis``; ``+inf`` if ``q < 0`` meets a zero."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = q * np.log(v)
    if q < 0:
        hit_zero = (v == 0).any(axis=axis)
        logs = np.where(v == 0, 0.0, logs)
        out = logsumexp(logs, axis=axis)
        return np.where(hit_zero, INF, out)
    with np.errstate(divide="ignore"):
        return logsumexp(logs, axis=axis)


def lp_norm(a, p: float, q: float, mu: Measure) -> float:
    """``||a||_{f^{p,q}(mu)}``; see the module docstring for the four cases."""
    p, q = _check_exponents(p, q)
    tree = mu.tree
    a = np.asarray(a, dtype=float)
    w = mu.leaf_mass
    pos = w > 0

    if np.isinf(p):
        if np.isinf(q):
            return float(a.max()) if a.size else 0.0
        m = mu.cube_mass
        live = m > 0
        if not live.any():
            return 0.0
        ref = a[live]
        if q == 1:
            local = tree.subtree_sum(np.where(live, a * m, 0.0))
            return float(np.max(local[live] / m[live]))
        if q > 0:
            scale = ref.max()
        else:
            nz = ref[ref > 0]
            scale = nz.min() if nz.size else 1.0
        if scale == 0:
            return 0.0
        with np.errstate(divide="ignore", over="ignore"):
            powered = np.where(live, (a / scale) ** q, 0.0)
        local = tree.subtree_sum(np.where(live, powered * m, 0.0))
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            vals = np.where(live, (local / np.where(live, m, 1.0)) ** (1.0 / q), 0.0)
        return float(vals.max() * scale)

    if not pos.any():
        return 0.0
    chain = tree.along_ancestors(a)[pos]
    if np.isinf(q):
        with np.errstate(divide="ignore"):
            log_inner = np.log(chain.max(axis=-1))
    else:
        log_inner = _log_power_sum(chain, q) / q
    with np.errstate(invalid="ignore"):
        terms = np.log(w[pos]) + p * log_inner
    terms = np.where(np.isnan(terms), -INF, terms)
    return float(np.exp(logsumexp(terms) / p))


def lp_pairing(a, b, mu: Measure) -> float:
    """``sum_Q a_Q b_Q mu(Q)``."""
    return float(np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float) * mu.cube_mass))


class DualEstimate(NamedTuple):
    """Lower bound ``value = pairing(a, witness)`` with ``witness`` in the unit ball."""

    value: float
    witness: np.ndarray
    converged: bool


def _norm_log_gradient(b, p, q, mu):
    """Gradient of ``log ||b||_{f^{p,q}}`` in ``log b`` (finite ``p, q``)."""
    tree = mu.tree
    w = mu.leaf_mass
    bq = b**q
    s = tree.along_ancestors(bq).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        leafw = np.where(w > 0, w * s ** (p / q - 1.0), 0.0)
        total = np.sum(np.where(w > 0, w * s ** (p / q), 0.0))
    with np.errstate(invalid="ignore"):
        grad = bq * tree.leaf_sum(leafw) / total
    return np.where(np.isnan(grad), 0.0, grad)


def _maximize_pairing(a, mu, opts, norm, norm_log_grad=None, starts=()):
    """Maximize ``pairing(a, b) / norm(b)`` over nonnegative ``b``."""
    tree = mu.tree
    a = np.asarray(a, dtype=float)
    weight = a * mu.cube_mass
    support = np.flatnonzero(weight > 0)
    if support.size == 0:
        return DualEstimate(0.0, np.zeros(tree.n_cubes), True)

    def embed(x):
        b = np.zeros(tree.n_cubes)
        b[support] = x
        return b

    def objective(x):
        n = norm(embed(x))
        return float(weight[support] @ x) / n if n > 0 else 0.0

    log_gradient = None
    if norm_log_grad is not None:
        def log_gradient(x):
            pair = weight[support] * x
            return pair / pair.sum() - norm_log_grad(embed(x))[support]

    structured = [np.ones(support.size), a[support]]
    structured += [np.asarray(s, dtype=float)[support] for s in starts]
    structured += [np.eye(support.size)[i] + 1e-9 for i in range(min(support.size, 8))]
    res = maximize_positive(objective, support.size, opts, structured, log_gradient)
    b = embed(res.x)
    b = b / norm(b)
    return DualEstimate(lp_pairing(a, b, mu), b, res.converged)


def lp_dual_norm(a, p: float, q: float, mu: Measure, opts: OptimizerOptions | None = None) -> DualEstimate:
    """Lower bound on ``sup { pairing(a, b) : ||b||_{f^{p',q'}} <= 1 }`` for ``p, q in [1, inf]``."""
    p, q = float(p), float(q)
    if not (p >= 1 and q >= 1):
        raise ParameterError(f"duality needs p, q in [1, inf], got ({p}, {q})")
    opts = opts or OptimizerOptions()
    pd, qd = conjugate(p), conjugate(q)

    def norm(b):
        return lp_norm(b, pd, qd, mu)

    grad = None
    starts = []
    if np.isfinite(pd) and np.isfinite(qd):
        def grad(b):
            return _norm_log_gradient(b, pd, qd, mu)
        if np.isfinite(q):
            starts.append(np.asarray(a, dtype=float) ** (q - 1))
    return _maximize_pairing(a, mu, opts, norm, grad, starts)


def lp_dual_subone(a, s: float, mu: Measure, opts: OptimizerOptions | None = None) -> DualEstimate:
    """Lower bound on ``sup { pairing(a, b) : ||b||_{f^{inf,s}} <= 1 }`` for ``s in (0, 1]``.

    At ``s = 1`` this is the same search as ``lp_dual_norm(a, 1, inf, ...)``.
    """
    s = float(s)
    if not 0 < s <= 1:
        raise ParameterError(f"s must lie in (0, 1], got {s}")
    opts = opts or OptimizerOptions()

    def norm(b):
        return lp_norm(b, INF, s, mu)

    return _maximize_pairing(a, mu, opts, norm)


class Factorization(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    product_norm: float
    target_norm: float

    @property
    def ratio(self) -> float:
        """``||a|| ||b|| / ||ab||``; at least the easy-direction constant."""
        if self.target_norm == 0:
            return 1.0 if self.product_norm == 0 else INF
        return self.product_norm / self.target_norm


def _inv(x):
    return 0.0 if np.isinf(x) else 1.0 / x


def lp_factorize(c, target, parts, mu: Measure, opts: OptimizerOptions | None = None) -> Factorization:
    """Split ``c = a * b`` with ``||a||_{f^{p1,q1}} ||b||_{f^{p2,q2}}`` small.

    ``target = (p, q)``, ``parts = ((p1, q1), (p2, q2))`` must satisfy the
    Hölder relations ``1/p = 1/p1 + 1/p2`` and ``1/q = 1/q1 + 1/q2``.  The
    search runs over ``log a`` and finally snaps ``a`` to powers of two, so
    ``a * b == c`` holds exactly in floating point.
    """
    (p, q), ((p1, q1), (p2, q2)) = target, parts
    if not math.isclose(_inv(p), _inv(p1) + _inv(p2), abs_tol=1e-12):
        raise ParameterError(f"Hölder relation 1/p = 1/p1 + 1/p2 fails for {p}, {p1}, {p2}")
    if not math.isclose(_inv(q), _inv(q1) + _inv(q2), abs_tol=1e-12):
        raise ParameterError(f"Hölder relation 1/q = 1/q1 + 1/q2 fails for {q}, {q1}, {q2}")
    opts = opts or OptimizerOptions()
    tree = mu.tree
    c = np.asarray(c, dtype=float)
    target_norm = lp_norm(c, p, q, mu)
    support = np.flatnonzero(c > 0)
    if support.size == 0:
        z = np.zeros(tree.n_cubes)
        return Factorization(z, z.copy(), 0.0, target_norm)

    def split(a_s):
        a = np.zeros(tree.n_cubes)
        b = np.zeros(tree.n_cubes)
        a[support] = a_s
        b[support] = c[support] / a_s
        return a, b

    def product(a_s):
        a, b = split(a_s)
        return lp_norm(a, p1, q1, mu) * lp_norm(b, p2, q2, mu)

    def objective(a_s):
        prod = product(a_s)
        return 1.0 / prod if prod > 0 else 0.0

    cs = c[support]
    starts = [cs**t for t in (0.5, 0.25, 0.75, 0.0, 1.0)]
    res = maximize_positive(objective, support.size, opts, starts)

    # snap to powers of two, then polish by integer moves
    k = np.round(np.log2(res.x))
    k += np.round(np.mean(np.log2(cs) / 2 - k))
    best = product(np.exp2(k))
    improved = True
    while improved:
        improved = False
        for i in range(k.size):
            for step in (1.0, -1.0):
                k[i] += step
                val = product(np.exp2(k))
                if val < best * (1 - 1e-12):
                    best, improved = val, True
                    break
                k[i] -= step
    a, b = split(np.exp2(k))
    fact = Factorization(a, b, best, target_norm)
    logger.debug("factorization ratio %.6g for target (%s, %s)", fact.ratio, p, q)
    return fact
