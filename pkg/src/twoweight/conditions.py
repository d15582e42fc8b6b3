"""Testing and characterization quantities for two-weight inequalities.

Conventions used throughout: ``x / 0 := 0`` for mass ratios, and any
supremum over cubes skips cubes whose normalizing mass vanishes.  Outer
powers are taken in the log domain so that exponents like ``pq/(p-q)``
stay well behaved when ``q`` is close to ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, NamedTuple

import numpy as np

from .errors import ParameterError, ValidationError
from .lp import conjugate, logsumexp
from .optimize import OptimizerOptions, maximize_positive
from .tree import DisjointFamily, DyadicTree, Measure, check_collection, safe_ratio


@dataclass
class ConditionReport:
    name: str
    value: float
    witness: Any = None


# -- helpers ---------------------------------------------------------------


def mass_ratio(num: Measure, den: Measure) -> np.ndarray:
    """``num(Q) / den(Q)`` per cube, 0 where ``den(Q) = 0``."""
    return safe_ratio(num.cube_mass, den.cube_mass)


def _chain_accumulate(tree: DyadicTree, values, how: str) -> np.ndarray:
    """``out[j, l]`` accumulates ``values`` over the ancestors of ``l`` at levels ``j..D``."""
    chain = tree.along_ancestors(values)[:, ::-1]
    if how == "sum":
        acc = np.cumsum(chain, axis=1)
    elif how == "max":
        acc = np.maximum.accumulate(chain, axis=1)
    else:
        raise ValueError(how)
    return acc[:, ::-1].T


def _per_level_leaf_sum(tree: DyadicTree, rows) -> np.ndarray:
    """Cube-indexed sums where cubes on level ``j`` sum row ``j`` over their leaves."""
    return np.concatenate(
        [rows[j].reshape(tree.level_sizes[j], -1).sum(axis=1) for j in range(tree.depth + 1)]
    )


def _localized_sup_integral(values, omega: Measure) -> np.ndarray:
    """``int_Q sup_{R ⊆ Q} values_R 1_R d omega`` for every cube ``Q``."""
    tree = omega.tree
    acc = _chain_accumulate(tree, values, "max")
    w = omega.leaf_mass
    with np.errstate(invalid="ignore"):
        rows = np.where(w > 0, acc * w, 0.0)
    return _per_level_leaf_sum(tree, rows)


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(x, dtype=float))


def _log_integral(log_f, mu: Measure) -> float:
    """``log int f d mu`` from leafwise ``log f``."""
    w = mu.leaf_mass
    pos = w > 0
    if not pos.any():
        return -math.inf
    terms = np.log(w[pos]) + np.asarray(log_f)[pos]
    terms = np.where(np.isnan(terms), -math.inf, terms)
    return float(logsumexp(terms))


def _outer(log_value: float, power: float) -> float:
    if log_value == -math.inf:
        return 0.0
    return float(np.exp(power * log_value))


def _check_range(p, q):
    p, q = float(p), float(q)
    if not (1 < p < math.inf and 0 < q < p):
        raise ParameterError(f"need 1 < p < inf and 0 < q < p, got p={p}, q={q}")
    return p, q


# -- Carleson and sparse ---------------------------------------------------


def carleson_averages(b, mu: Measure) -> np.ndarray:
    """``(1/mu(Q)) sum_{R ⊆ Q} b_R mu(R)`` per cube (0 on null cubes)."""
    m = mu.cube_mass
    live = m > 0
    local = mu.tree.subtree_sum(np.where(live, np.asarray(b, dtype=float) * m, 0.0))
    return safe_ratio(local, m)


def carleson_norm(b, mu: Measure) -> float:
    """``sup_Q (1/mu(Q)) sum_{R ⊆ Q} b_R mu(R)`` over cubes of positive mass."""
    live = mu.cube_mass > 0
    if not live.any():
        return 0.0
    return float(np.max(carleson_averages(b, mu)[live]))


def carleson_extremal_cube(b, mu: Measure) -> int | None:
    """First cube (canonical order) attaining the Carleson norm."""
    live = mu.cube_mass > 0
    if not live.any():
        return None
    avg = np.where(live, carleson_averages(b, mu), -math.inf)
    return int(np.argmax(avg))


@dataclass(frozen=True)
class Infeasible:
    """Sparse extraction failed: the subtree of ``cube`` demands more than its mass."""

    cube: int
    demand: float
    capacity: float


def sparse_extract(b, mu: Measure, C: float, tol: float = 1e-9) -> DisjointFamily | Infeasible:
    """Find disjoint ``E_Q ⊆ Q`` with ``mu(E_Q) >= b_Q mu(Q) / C``.

    Cubes are served deepest level first (canonical order within a level);
    each claims its demand from the still unclaimed mass of its leaves, in
    leaf order.  When a cube is reached, every strict subcube has taken
    exactly its demand from inside it, so the greedy fails precisely when
    some subtree's total demand exceeds its mass; on a tree this is the
    whole Hall-type obstruction.  Shortfalls up to ``tol * mu(Q)`` are
    absorbed.
    """
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    tree = mu.tree
    b = np.asarray(b, dtype=float)
    m = mu.cube_mass
    w = mu.leaf_mass
    demand = b * m / C
    free = np.where(w > 0, 1.0, 0.0)  # unclaimed share of each leaf
    fractions = np.zeros((tree.n_cubes, tree.n_leaves))
    for level in range(tree.depth, -1, -1):
        for cube in range(tree.offsets[level], tree.offsets[level + 1]):
            need = demand[cube]
            if need <= 0:
                continue
            lo, hi = int(tree.leaf_start[cube]), int(tree.leaf_stop[cube])
            available = float(free[lo:hi] @ w[lo:hi])
            if available < need - tol * m[cube]:
                sub = tree.descendants(cube)
                return Infeasible(cube, float(demand[sub].sum()), float(m[cube]))
            for leaf in range(lo, hi):
                if need <= 0:
                    break
                if free[leaf] <= 0 or w[leaf] <= 0:
                    continue
                share = min(free[leaf], need / w[leaf])
                fractions[cube, leaf] = share
                free[leaf] -= share
                need -= share * w[leaf]
    return DisjointFamily(tree, fractions)


# -- A-infinity ------------------------------------------------------------


def fw_characteristic(sigma: Measure, omega: Measure) -> float:
    """Fujii–Wilson characteristic ``[sigma]_{A_inf(omega)}``.

    ``sup_Q (1/sigma(Q)) int_Q sup_{R ⊆ Q, omega(R) > 0} (sigma(R)/omega(R)) 1_R d omega``.
    """
    wm = omega.cube_mass
    ratio = np.full(wm.shape, -math.inf)
    np.divide(sigma.cube_mass, wm, out=ratio, where=wm > 0)
    local = _localized_sup_integral(ratio, omega)
    live = sigma.cube_mass > 0
    if not live.any():
        return 0.0
    return float(np.max(local[live] / sigma.cube_mass[live]))


def cf_alpha(sigma: Measure, omega: Measure, beta: float) -> float:
    """Least ``alpha`` in the Coifman–Fefferman condition at level ``beta``.

    Per cube, the largest ``sigma(E)/sigma(Q)`` over fractional ``E ⊆ Q``
    with ``omega(E) <= beta omega(Q)`` is a fractional knapsack: take
    leaves free of omega-mass, then leaves by decreasing density ratio.
    """
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    tree = sigma.tree
    s_all, w_all = sigma.leaf_mass, omega.leaf_mass
    best = 0.0
    for cube in range(tree.n_cubes):
        total = sigma.cube_mass[cube]
        if total <= 0:
            continue
        s = tree.restrict(s_all, cube)
        w = tree.restrict(w_all, cube)
        gain = s[w == 0].sum()
        budget = beta * omega.cube_mass[cube]
        paid = w > 0
        order = np.argsort(-(s[paid] / w[paid]), kind="stable")
        for si, wi in zip(s[paid][order], w[paid][order]):
            if budget <= 0:
                break
            take = min(1.0, budget / wi)
            gain += take * si
            budget -= take * wi
        best = max(best, min(1.0, gain / total))
    return best


def multiplier_test(m, sigma: Measure, omega: Measure) -> float:
    """Least ``C`` with ``int sup_{R ⊆ Q} m_R 1_R d omega <= C sigma(Q)`` for all ``Q``."""
    local = _localized_sup_integral(np.asarray(m, dtype=float), omega)
    live = sigma.cube_mass > 0
    if not live.any():
        return 0.0
    return float(np.max(local[live] / sigma.cube_mass[live]))


def multiplier_constant_estimate(m, sigma: Measure, omega: Measure, opts: OptimizerOptions | None = None) -> ConditionReport:
    """Lower bound on the best ``C`` in ``||m a||_{f^{1,inf}(omega)} <= C ||a||_{f^{1,inf}(sigma)}``.

    Searches over families ``a`` supported where ``m > 0``; subtree
    indicators are always among the starting points.
    """
    from .lp import lp_norm

    opts = opts or OptimizerOptions()
    tree = sigma.tree
    m = np.asarray(m, dtype=float)
    support = np.flatnonzero(m > 0)
    if support.size == 0:
        return ConditionReport("multiplier_family", 0.0, np.zeros(tree.n_cubes))

    def embed(x):
        a = np.zeros(tree.n_cubes)
        a[support] = x
        return a

    def objective(x):
        a = embed(x)
        den = lp_norm(a, 1, math.inf, sigma)
        return lp_norm(m * a, 1, math.inf, omega) / den if den > 0 else 0.0

    starts = []
    for cube in range(tree.n_cubes):
        ind = np.zeros(tree.n_cubes)
        ind[tree.descendants(cube)] = 1.0
        starts.append(ind[support] + 1e-12)
    res = maximize_positive(objective, support.size, opts, starts)
    a = embed(res.x)
    return ConditionReport("multiplier_family", float(objective(res.x)), a)


# -- Lambda quantities -----------------------------------------------------


def lambda_avg(lam, omega: Measure) -> np.ndarray:
    """``Lambda_Q = (1/omega(Q)) sum_{R ⊆ Q} lambda_R omega(R)`` (0 if ``omega(Q) = 0``)."""
    wm = omega.cube_mass
    return safe_ratio(omega.tree.subtree_sum(np.asarray(lam, dtype=float) * wm), wm)


def lambda_gamma(lam, omega: Measure, gamma: float, mode: str = "sup") -> np.ndarray:
    """``gamma``-average over ``Q`` of the localized sum or sup of ``lambda``.

    ``rho_Q`` is ``sum_{R ⊆ Q} lambda_R 1_R`` (``mode="sum"``) or
    ``sup_{R ⊆ Q} lambda_R 1_R`` (``mode="sup"``), and the result is
    ``((1/omega(Q)) int_Q rho_Q^gamma d omega)^(1/gamma)``.  Values are
    normalized by their maximum on ``Q`` before powering, which keeps the
    power means ordered in ``gamma`` in floating point.
    """
    gamma = float(gamma)
    if gamma == 0 or not math.isfinite(gamma):
        raise ParameterError(f"gamma must be a nonzero real, got {gamma}")
    if mode not in ("sum", "sup"):
        raise ParameterError(f"mode must be 'sum' or 'sup', got {mode!r}")
    tree = omega.tree
    acc = _chain_accumulate(tree, np.asarray(lam, dtype=float), "sum" if mode == "sum" else "max")
    w = omega.leaf_mass
    pos = w > 0
    out = np.zeros(tree.n_cubes)
    for j in range(tree.depth + 1):
        rho = acc[j].reshape(tree.level_sizes[j], -1)
        wj = w.reshape(tree.level_sizes[j], -1)
        pj = pos.reshape(tree.level_sizes[j], -1)
        top = np.where(pj, rho, 0.0).max(axis=1)
        mass = np.where(pj, wj, 0.0).sum(axis=1)
        ok = (top > 0) & (mass > 0)
        x = np.where(pj & ok[:, None], rho / np.where(ok, top, 1.0)[:, None], 1.0)
        with np.errstate(divide="ignore"):
            powered = np.where(pj, wj * x**gamma, 0.0)
        mean = powered.sum(axis=1) / np.where(mass > 0, mass, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = top * mean ** (1.0 / gamma)
        # gamma < 0 with rho = 0 on positive mass: mean is inf, value 0
        out[tree.level_slice(j)] = np.where(ok & np.isfinite(val), val, 0.0)
    return out


# -- Wolff potentials --------------------------------------------------------


def wolff_potential(lam, sigma: Measure, omega: Measure, p: float, dual: bool = False) -> np.ndarray:
    """Discrete Wolff potential ``sum_Q 1_Q lam_Q (omega(Q)/sigma(Q))^(p'-1) Lambda_Q^(p'-1)``.

    With ``dual=True`` the same formula is applied to the adjoint problem:
    coefficients ``lam_Q omega(Q)/sigma(Q)``, the roles of ``sigma`` and
    ``omega`` exchanged, and ``p`` read as the adjoint's domain exponent
    (``q'`` for an ``L^p(sigma) -> L^q(omega)`` problem).
    """
    p = float(p)
    if not 1 < p < math.inf:
        raise ParameterError(f"p must lie in (1, inf), got {p}")
    lam = np.asarray(lam, dtype=float)
    if dual:
        lam = lam * mass_ratio(omega, sigma)
        sigma, omega = omega, sigma
    e = conjugate(p) - 1.0
    ratio = mass_ratio(omega, sigma)
    coef = lam * ratio**e * lambda_avg(lam, omega) ** e
    coef = np.where(sigma.cube_mass > 0, coef, 0.0)
    return sigma.tree.along_ancestors(coef).sum(axis=-1)


class WolffValues(NamedTuple):
    V1: float
    V2: float


def wolff_condition(lam, sigma: Measure, omega: Measure, p: float, q: float) -> WolffValues:
    """Potential-type quantities normalized to be homogeneous of degree 1 in ``lam``.

    ``V1 = (int W^{p'}_{lam,sigma}[omega]^((p-1)q/(p-q)) d omega)^((p-q)/(pq))`` and
    ``V2 = (int W^{q}_{lam,omega}[sigma]^((q'-1)p'/(q'-p')) d sigma)^((p-q)/(pq))``.
    """
    p, q = _check_range(p, q)
    if not q > 1:
        raise ParameterError(f"the potential condition needs 1 < q < p, got q={q}")
    outer = (p - q) / (p * q)
    w1 = wolff_potential(lam, sigma, omega, p)
    v1 = _outer(_log_integral((p - 1) * q / (p - q) * _log(w1), omega), outer)
    qd, pd = conjugate(q), conjugate(p)
    w2 = wolff_potential(lam, sigma, omega, qd, dual=True)
    v2 = _outer(_log_integral((qd - 1) * pd / (qd - pd) * _log(w2), sigma), outer)
    return WolffValues(v1, v2)


# -- integral and scale conditions ----------------------------------------


def integral_condition(lam, sigma: Measure, omega: Measure, p: float, q: float, dual: bool = False) -> float:
    """``I`` (or ``I*`` with ``dual=True``).

    ``I = (int (sum_Q lam_Q (omega(Q)/sigma(Q))^(1/q) 1_Q)^(pq/(p-q)) d sigma)^((p-q)/(pq))``;
    ``I*`` uses the power ``1/p`` and integrates against ``omega``.
    """
    p, q = _check_range(p, q)
    s = 1.0 / p if dual else 1.0 / q
    coef = np.asarray(lam, dtype=float) * mass_ratio(omega, sigma) ** s
    inner = sigma.tree.along_ancestors(coef).sum(axis=-1)
    r = p * q / (p - q)
    return _outer(_log_integral(r * _log(inner), omega if dual else sigma), 1.0 / r)


class ScaleValues(NamedTuple):
    S: float
    N: float


def maximal_condition_values(lam, sigma: Measure, omega: Measure, p: float, q: float, eps: float) -> ScaleValues:
    """Sufficient (``S``) and necessary (``N``) quantities for the maximal operator.

    ``S = (int sup_Q (w/s)^(q/(p-q)) lam_Q^q (L^sup_{q,Q})^(q^2/(p-q)) 1_Q d omega)^((p-q)/(pq))``
    ``N = (int sup_Q (w/s)^(q/(p-q)) (L^sup_{q-eps,Q})^(pq/(p-q)) 1_Q d omega)^((p-q)/(pq))``
    where ``w/s = omega(Q)/sigma(Q)``; cubes with ``sigma(Q) = 0`` are skipped.
    """
    p, q = _check_range(p, q)
    eps = float(eps)
    if not 0 < eps < q:
        raise ParameterError(f"eps must lie in (0, q), got eps={eps}, q={q}")
    tree = sigma.tree
    lam = np.asarray(lam, dtype=float)
    log_ratio = _log(mass_ratio(omega, sigma))
    k = q / (p - q)
    log_s = k * log_ratio + q * _log(lam) + q * k * _log(lambda_gamma(lam, omega, q, "sup"))
    log_n = k * log_ratio + p * k * _log(lambda_gamma(lam, omega, q - eps, "sup"))
    outer = (p - q) / (p * q)
    vals = []
    for log_c in (log_s, log_n):
        log_c = np.where(sigma.cube_mass > 0, log_c, -math.inf)
        log_c = np.where(np.isnan(log_c), -math.inf, log_c)
        sup = tree.along_ancestors(log_c).max(axis=-1)
        vals.append(_outer(_log_integral(sup, omega), outer))
    return ScaleValues(*vals)


# -- configuration-dependent conditions --------------------------------------


def collection_function(lam, collection: Iterable[int], tree: DyadicTree) -> np.ndarray:
    """Leafwise ``inf_{Q in C, x in Q} sup_{R in C, R ⊆ Q} lam_R 1_R(x)``; 0 off the collection."""
    coll = check_collection(tree, collection)
    member = np.zeros(tree.n_cubes, dtype=bool)
    member[list(coll)] = True
    vals = np.where(member, np.asarray(lam, dtype=float), -math.inf)
    acc = _chain_accumulate(tree, vals, "max")  # acc[j, l]: sup over members at levels >= j
    inside = member[tree.ancestors].T  # inside[j, l]: level-j ancestor is a member
    cand = np.where(inside, acc, math.inf)
    out = cand.min(axis=0)
    return np.where(np.isfinite(out), out, 0.0)


def collection_value(lam, sigma: Measure, omega: Measure, p: float, q: float, collection: Iterable[int]) -> float:
    """``int sup_{x in Q in C} ((int_Q lam_C^q d omega)/sigma(Q))^(q/(p-q)) lam_C(x)^q d omega(x)``."""
    p, q = _check_range(p, q)
    tree = sigma.tree
    coll = check_collection(tree, collection)
    lc = collection_function(lam, coll, tree)
    local = tree.leaf_sum(lc**q * omega.leaf_mass)
    g = safe_ratio(local, sigma.cube_mass) ** (q / (p - q))
    member = np.zeros(tree.n_cubes, dtype=bool)
    member[list(coll)] = True
    g = np.where(member, g, 0.0)
    sup = tree.along_ancestors(g).max(axis=-1)
    return float(np.sum(sup * lc**q * omega.leaf_mass))


def disjoint_value(lam, sigma: Measure, omega: Measure, p: float, q: float, family: DisjointFamily) -> float:
    """``int (sum_Q lam_Q^q (omega(E_Q)/sigma(Q)) 1_Q)^((p-q)/q) d sigma``."""
    p, q = _check_range(p, q)
    if family.tree != sigma.tree:
        raise ValidationError("disjoint family lives on a different tree", "family")
    coef = np.asarray(lam, dtype=float) ** q * safe_ratio(family.masses(omega), sigma.cube_mass)
    inner = sigma.tree.along_ancestors(coef).sum(axis=-1)
    return float(np.sum(sigma.leaf_mass * inner ** ((p - q) / q)))


def dlbo_ratio(lam, tree: DyadicTree) -> float:
    """``sup_{lam_Q > 0} max_{R ⊆ Q} lam_R / lam_Q``; ``inf`` if a zero cube has a positive descendant."""
    lam = np.asarray(lam, dtype=float)
    sub = tree.subtree_max(lam)
    if np.any((lam == 0) & (sub > 0)):
        return math.inf
    pos = lam > 0
    if not pos.any():
        return 1.0
    return float(np.max(sub[pos] / lam[pos]))


class EquivalentExpressions(NamedTuple):
    e1: float
    e2: float
    e3: float


def equivalent_expressions(a, p: float, mu: Measure) -> EquivalentExpressions:
    """The three comparable expressions for ``int (sum_Q a_Q 1_Q)^p d mu``."""
    p = float(p)
    if not 1 < p < math.inf:
        raise ParameterError(f"p must lie in (1, inf), got {p}")
    tree = mu.tree
    a = np.asarray(a, dtype=float)
    w = mu.leaf_mass
    e1 = float(np.sum(w * tree.along_ancestors(a).sum(axis=-1) ** p))
    car = carleson_averages(a, mu)
    e2 = float(np.sum(a * mu.cube_mass * car ** (p - 1)))
    e3 = float(np.sum(w * tree.along_ancestors(car).max(axis=-1) ** p))
    return EquivalentExpressions(e1, e2, e3)
