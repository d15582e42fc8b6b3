"""Lower bounds for two-weight operator norms and configuration searches.

Every estimator works on a dense leaf-by-leaf matrix ``A`` with
``(T f)(l) = sum_k A[l, k] f_k``, runs all restarts as one batch, and
finally re-evaluates the ratio ``||T f||_{L^q(omega)} / ||f||_{L^p(sigma)}``
at the best witness through the public operators.  The reported value is
that re-evaluated ratio, so it is a lower bound by construction.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .conditions import ConditionReport, disjoint_value, lambda_avg, mass_ratio, collection_value
from .errors import InstanceTooLargeError, ParameterError
from .lp import conjugate
from .operators import apply_maximal, apply_summation, lebesgue_norm, selection_matrix, summation_matrix
from .optimize import OptimizerOptions
from .tree import DisjointFamily, Instance, Measure, safe_ratio

logger = logging.getLogger(__name__)

GRID_MAX_LEAVES = 4
GRID_LOW, GRID_HIGH = 1e-3, 1e3


@dataclass
class NormEstimate:
    value: float
    witness_f: np.ndarray
    converged: bool
    restarts_used: int
    witness_g: np.ndarray | None = None


def rayleigh_ratio(inst: Instance, f, kind: str = "summation") -> float:
    """``||T f||_{L^q(omega)} / ||f||_{L^p(sigma)}`` with ``T`` the summation or maximal operator."""
    apply = _operator(kind)
    den = lebesgue_norm(f, inst.p, inst.sigma)
    if den == 0:
        return 0.0
    return lebesgue_norm(apply(inst.lam, inst.sigma, f), inst.q, inst.omega) / den


def _operator(kind):
    if kind == "summation":
        return apply_summation
    if kind == "maximal":
        return apply_maximal
    raise ParameterError(f"kind must be 'summation' or 'maximal', got {kind!r}")


def _degenerate(inst: Instance) -> bool:
    return not (inst.lam.any() and inst.sigma.leaf_mass.any() and inst.omega.leaf_mass.any())


def _zero_estimate(inst: Instance) -> NormEstimate:
    f = (inst.sigma.leaf_mass > 0).astype(float)
    if not f.any():
        f = np.ones(inst.tree.n_leaves)
    return NormEstimate(0.0, f, True, 0)


# -- batched ascent on a fixed positive matrix -------------------------------


class _Problem:
    """Ratio ``||A f||_{q, w} / ||f||_{p, s}`` restricted to leaves with ``s > 0``."""

    def __init__(self, s, w, p, q):
        self.s, self.w, self.p, self.q = s, w, p, q

    def values(self, A, F):
        """Ratios for a batch ``F`` (rows), with ``A`` shared or batched."""
        G = np.einsum("...lk,...k->...l", A, F) if A.ndim == 3 else F @ A.T
        num = _weighted_power_norm(G, self.q, self.w)
        den = _weighted_power_norm(F, self.p, self.s)
        return safe_ratio(num, den), G

    def gradient(self, A, F, G):
        """Gradient of ``log ratio`` with respect to ``F``."""
        p, q, s, w = self.p, self.q, self.s, self.w
        with np.errstate(divide="ignore", invalid="ignore"):
            gq = np.where((G > 0) & (w > 0), w * G ** (q - 1), 0.0)
        J = np.sum(np.where(G > 0, w * G**q, 0.0), axis=-1, keepdims=True)
        back = np.einsum("...l,...lk->...k", gq, A) if A.ndim == 3 else gq @ A
        P = np.sum(s * F**p, axis=-1, keepdims=True)
        return safe_ratio(back, J) - s * F ** (p - 1) / P

    def holder_step(self, A, F, G):
        """Exact maximizer over ``f`` of the bilinear form against ``g = (A f)^(q-1)``."""
        p, q, s, w = self.p, self.q, self.s, self.w
        gq = np.where(w > 0, w * np.maximum(G, 0.0) ** (q - 1), 0.0)
        back = np.einsum("...l,...lk->...k", gq, A) if A.ndim == 3 else gq @ A
        h = safe_ratio(back, s)
        return _normalize(h ** (conjugate(p) - 1.0), p, s)


def _weighted_power_norm(X, r, weight):
    with np.errstate(over="ignore"):
        return np.sum(np.where(weight > 0, weight * np.maximum(X, 0.0) ** r, 0.0), axis=-1) ** (1.0 / r)


def _normalize(F, p, s):
    n = _weighted_power_norm(F, p, s)
    return F / np.where(n > 0, n, 1.0)[..., None]


def _ascend(problem: _Problem, matrix, F, opts: OptimizerOptions, method: str):
    """Monotone batched ascent; ``matrix(F)`` returns the (possibly batched) linearization.

    Returns the final iterates, their values and a per-row convergence flag
    (stopped on a relative gain below ``tol``, or flat over the final 25%
    of the iterations).
    """
    s = problem.s
    F = _normalize(F * (s > 0), problem.p, s)
    A = matrix(F)
    cur, G = problem.values(A, F)
    history = [cur.copy()]
    active = np.ones(F.shape[0], dtype=bool)
    stopped = np.zeros(F.shape[0], dtype=bool)
    for _ in range(opts.max_iters):
        if not active.any():
            break
        if method == "holder":
            cand = problem.holder_step(A, F, G)
            val, _ = problem.values(matrix(cand), cand)
            better = active & (val > cur)
        else:
            grad = problem.gradient(A, F, G) * (s > 0)
            scale = safe_ratio(F.max(axis=-1), np.abs(grad).max(axis=-1))
            direction = grad * scale[:, None]
            step = np.ones(F.shape[0])
            better = np.zeros(F.shape[0], dtype=bool)
            cand = F.copy()
            val = cur.copy()
            pending = active & (scale > 0)
            for _ in range(opts.max_halvings):
                if not pending.any():
                    break
                trial = _normalize(np.maximum(F + step[:, None] * direction, 0.0), problem.p, s)
                tv, _ = problem.values(matrix(trial), trial)
                ok = pending & (tv > cur)
                cand[ok], val[ok] = trial[ok], tv[ok]
                better |= ok
                pending &= ~ok
                step[pending] *= opts.shrink
        gain = np.where(better, safe_ratio(val - cur, cur), 0.0)
        F = np.where(better[:, None], cand, F)
        cur = np.where(better, val, cur)
        A = matrix(F)
        _, G = problem.values(A, F)
        done = active & (~better | (gain < opts.tol))
        stopped |= done
        active &= ~done
        history.append(cur.copy())
    tail = history[-max(1, len(history) // 4)]
    converged = stopped | (safe_ratio(cur - tail, cur) < opts.tol)
    return F, cur, converged


def _starts(s, opts: OptimizerOptions, indicators=True):
    """The constant, leaf indicators and ``opts.restarts`` random exponential rows."""
    n = s.size
    rows = [np.ones(n)]
    if indicators:
        rows += [np.eye(n)[i] for i in np.flatnonzero(s > 0)]
    rows += [opts.rng(i).exponential(size=n) for i in range(opts.restarts)]
    return np.array(rows) * (s > 0)


def _matrix_norm(A, s, w, p, q, opts, method):
    """Best ratio of a fixed (or batched) positive matrix; returns (F, values, converged)."""
    problem = _Problem(s, w, p, q)
    if A.ndim == 2:
        F0 = _starts(s, opts)
        return _ascend(problem, lambda F: A, F0, opts, method)
    # batch of matrices: one row per (matrix, start) pair
    F0 = _starts(s, opts, indicators=False)
    reps = F0.shape[0]
    big = np.repeat(A, reps, axis=0)
    F, vals, conv = _ascend(problem, lambda F: big, np.tile(F0, (A.shape[0], 1)), opts, method)
    return F.reshape(A.shape[0], reps, -1), vals.reshape(A.shape[0], reps), conv.reshape(A.shape[0], reps)


def _choose_method(q, method):
    if method == "auto":
        return "holder" if q > 1 else "gradient"
    if method not in ("holder", "gradient"):
        raise ParameterError(f"method must be 'auto', 'holder' or 'gradient', got {method!r}")
    if method == "holder" and q <= 1:
        raise ParameterError("the bilinear scheme needs q > 1")
    return method


def _finish(inst, kind, F, vals, conv, restarts_used, g=True) -> NormEstimate:
    best = int(np.argmax(vals))
    f = F[best]
    value = rayleigh_ratio(inst, f, kind)
    witness_g = None
    if g and inst.q > 1:
        Tf = _operator(kind)(inst.lam, inst.sigma, f)
        norm = lebesgue_norm(Tf, inst.q, inst.omega)
        if norm > 0:
            witness_g = (Tf / norm) ** (inst.q - 1)
    return NormEstimate(float(value), f, bool(conv[best]), restarts_used, witness_g)


def estimate_norm_summation(inst: Instance, opts: OptimizerOptions | None = None, method: str = "auto") -> NormEstimate:
    """Lower bound on ``||T_lambda(. sigma)||_{L^p(sigma) -> L^q(omega)}``.

    For ``q > 1`` the default is alternating maximization of the bilinear
    form ``int T(f sigma) g d omega``; each half step is the Hölder
    extremizer, so the value never decreases.  For ``q <= 1`` (or
    ``method="gradient"``) projected gradient ascent runs on the unit sphere
    of nonnegative ``f``.
    """
    opts = opts or OptimizerOptions()
    if _degenerate(inst):
        return _zero_estimate(inst)
    method = _choose_method(inst.q, method)
    A = summation_matrix(inst.lam, inst.sigma)
    s, w = inst.sigma.leaf_mass, inst.omega.leaf_mass
    F, vals, conv = _matrix_norm(A, s, w, inst.p, inst.q, opts, method)
    return _finish(inst, "summation", F, vals, conv, F.shape[0])


def _selection_options(inst: Instance):
    """Per leaf, the ancestors worth selecting (``lambda > 0``, ``sigma(Q) > 0``)."""
    tree = inst.tree
    useful = (inst.lam > 0) & (inst.sigma.cube_mass > 0)
    options = []
    for leaf in range(tree.n_leaves):
        chain = [int(c) for c in tree.ancestors[leaf] if useful[c]]
        if not chain or inst.omega.leaf_mass[leaf] == 0:
            chain = chain[:1] or [int(tree.ancestors[leaf][0])]
        options.append(chain)
    return options


def estimate_norm_maximal(inst: Instance, opts: OptimizerOptions | None = None, mode: str = "both") -> NormEstimate:
    """Lower bound on ``||M_lambda(. sigma)||_{L^p(sigma) -> L^q(omega)}``.

    Subgradient ascent follows the per-leaf arg-max linearization.  When the
    number of selection maps (one useful ancestor per leaf) is at most
    ``opts.selection_cap`` each linearized operator is also maximized and
    the best witness overall is kept; since ``M f = max_s S_s f`` pointwise,
    this is exact up to the accuracy of the linear estimates.  ``mode`` is
    ``"both"``, ``"subgradient"`` or ``"enumerate"`` (the latter raises
    when the cap is exceeded).
    """
    opts = opts or OptimizerOptions()
    if mode not in ("both", "subgradient", "enumerate"):
        raise ParameterError(f"mode must be 'both', 'subgradient' or 'enumerate', got {mode!r}")
    if _degenerate(inst):
        return _zero_estimate(inst)
    tree = inst.tree
    s, w = inst.sigma.leaf_mass, inst.omega.leaf_mass
    p, q = inst.p, inst.q
    weight = safe_ratio(inst.lam, inst.sigma.cube_mass)
    cont = tree.containment.astype(float)

    def linearize(F):
        _, sel = apply_maximal(inst.lam, inst.sigma, F, return_argmax=True)
        return cont[sel] * weight[sel][..., None] * s

    problem = _Problem(s, w, p, q)
    candidates, used = [], 0
    if mode != "enumerate":
        F, vals, conv = _ascend(problem, linearize, _starts(s, opts), opts, "gradient")
        candidates.append((F, vals, conv))
        used = F.shape[0]

    options = _selection_options(inst)
    count = math.prod(len(o) for o in options)
    if mode == "enumerate" and count > opts.selection_cap:
        raise InstanceTooLargeError(f"{count} selection maps exceed the cap {opts.selection_cap}")
    if mode != "subgradient" and count <= opts.selection_cap and (mode == "enumerate" or count > 1):
        sub = replace(opts, restarts=min(opts.restarts, 2))
        method = _choose_method(q, "auto")
        chunk = max(1, 4096 // (tree.n_leaves + 1))
        selections = itertools.product(*options)
        while True:
            block = list(itertools.islice(selections, chunk))
            if not block:
                break
            mats = np.array([selection_matrix(inst.lam, inst.sigma, sel) for sel in block])
            Fb, vb, cb = _matrix_norm(mats, s, w, p, q, sub, method)
            candidates.append((Fb.reshape(-1, tree.n_leaves), vb.ravel(), cb.ravel()))
            used += Fb.shape[0] * Fb.shape[1]
    F = np.concatenate([c[0] for c in candidates])
    vals = np.concatenate([c[1] for c in candidates])
    conv = np.concatenate([c[2] for c in candidates])
    # linearized values are lower bounds for M; rank by the true ratio
    true_vals, _ = problem.values(linearize(F), F)
    return _finish(inst, "maximal", F, true_vals, conv, used)


# -- brute-force oracle ------------------------------------------------------


def _direct_ratio(inst: Instance, F, kind):
    """Rayleigh ratio for a batch of leaf functions, computed cube by cube."""
    tree = inst.tree
    s, w = inst.sigma.leaf_mass, inst.omega.leaf_mass
    out = np.zeros(F.shape[:-1] + (tree.n_leaves,))
    for cube in range(tree.n_cubes):
        lo, hi = int(tree.leaf_start[cube]), int(tree.leaf_stop[cube])
        mass = s[lo:hi].sum()
        if mass == 0 or inst.lam[cube] == 0:
            continue
        term = inst.lam[cube] * (F[..., lo:hi] @ s[lo:hi]) / mass
        if kind == "summation":
            out[..., lo:hi] += term[..., None]
        else:
            out[..., lo:hi] = np.maximum(out[..., lo:hi], term[..., None])
    num = (out**inst.q @ w) ** (1.0 / inst.q)
    den = (F**inst.p @ s) ** (1.0 / inst.p)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def grid_oracle(inst: Instance, resolution: int = 60, kind: str = "summation", max_leaves: int = GRID_MAX_LEAVES) -> float:
    """Brute-force maximum of the Rayleigh ratio over a logarithmic grid.

    Each leaf takes ``resolution`` geometric values in ``[1e-3, 1e3]``; by
    scale invariance only grid points with some coordinate at the lowest
    value are visited.  Indicators of every nonempty leaf subset are added.
    """
    tree = inst.tree
    if tree.n_leaves > max_leaves:
        raise InstanceTooLargeError(f"grid oracle is limited to {max_leaves} leaves, got {tree.n_leaves}")
    if resolution < 2:
        raise ParameterError(f"resolution must be at least 2, got {resolution}")
    _operator(kind)
    n = tree.n_leaves
    grid = np.geomspace(GRID_LOW, GRID_HIGH, resolution)
    best = 0.0
    subsets = np.array(list(itertools.product((0.0, 1.0), repeat=n))[1:])
    best = max(best, float(_direct_ratio(inst, subsets, kind).max()))
    for pinned in range(n):
        axes = [grid if i != pinned else grid[:1] for i in range(n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        for start in range(0, mesh.shape[0], 1 << 16):
            best = max(best, float(_direct_ratio(inst, mesh[start:start + (1 << 16)], kind).max()))
    return best


# -- derived estimates -------------------------------------------------------


def maximal_pair_norms(lam, sigma: Measure, omega: Measure, p: float, q: float, opts: OptimizerOptions | None = None):
    """Estimates of ``||M_Lambda(. sigma)||_{L^p(sigma)->L^q(omega)}`` and of the adjoint-side
    ``||M_{(omega/sigma) Lambda}(. omega)||_{L^q'(omega)->L^p'(sigma)}``."""
    p, q = float(p), float(q)
    if not 1 < q < p < math.inf:
        raise ParameterError(f"need 1 < q < p < inf, got p={p}, q={q}")
    big = lambda_avg(lam, omega)
    n1 = estimate_norm_maximal(Instance(sigma, omega, big, p, q), opts).value
    dual = mass_ratio(omega, sigma) * big
    n2 = estimate_norm_maximal(Instance(omega, sigma, dual, conjugate(q), conjugate(p)), opts).value
    return n1, n2


def _all_collections(n):
    for mask in range(1, 1 << n):
        yield [i for i in range(n) if mask >> i & 1]


def search_extremal(kind: str, inst: Instance, opts: OptimizerOptions | None = None, exhaustive_limit: int = 0) -> ConditionReport:
    """Randomized local search for the supremum over configurations.

    ``kind="collection"`` toggles cubes in a collection; ``kind="disjoint"``
    moves shares of leaves between their ancestors (every leaf is always
    fully allocated, since the value is monotone in each ``omega(E_Q)``).
    Trees with at most ``exhaustive_limit`` cubes are enumerated instead
    (collections only).
    """
    opts = opts or OptimizerOptions()
    if kind == "collection":
        return _search_collection(inst, opts, exhaustive_limit)
    if kind == "disjoint":
        return _search_disjoint(inst, opts)
    raise ParameterError(f"kind must be 'collection' or 'disjoint', got {kind!r}")


def _search_collection(inst, opts, exhaustive_limit):
    tree = inst.tree

    def value(coll):
        return collection_value(inst.lam, inst.sigma, inst.omega, inst.p, inst.q, coll) if coll else 0.0

    if tree.n_cubes <= exhaustive_limit:
        best = max(_all_collections(tree.n_cubes), key=value)
        return ConditionReport("collection", value(best), tuple(best))

    support = [int(c) for c in np.flatnonzero(inst.lam > 0)]
    seeds = [[tree.root], support, [c for c in support if tree.is_leaf(c)]]
    seeds += [[c] for c in support]
    best_set, best_val = frozenset(), 0.0
    for r in range(len(seeds) + opts.restarts):
        rng = opts.rng(r)
        if r < len(seeds):
            current = set(seeds[r])
        else:
            current = {c for c in range(tree.n_cubes) if rng.random() < 0.5}
        cur = value(sorted(current))
        improved = True
        while improved:
            improved = False
            for c in rng.permutation(tree.n_cubes):
                trial = current ^ {int(c)}
                v = value(sorted(trial))
                if v > cur * (1 + 1e-12) or (cur == 0 and v > 0):
                    current, cur, improved = trial, v, True
        if cur > best_val:
            best_set, best_val = frozenset(current), cur
    return ConditionReport("collection", float(best_val), tuple(sorted(best_set)))


def _search_disjoint(inst, opts):
    tree = inst.tree
    n, D = tree.n_leaves, tree.depth
    anc = tree.ancestors

    def family(share):
        fr = np.zeros((tree.n_cubes, n))
        np.add.at(fr, (anc, np.arange(n)[:, None]), share)
        return DisjointFamily(tree, np.minimum(fr, 1.0))

    def value(share):
        return disjoint_value(inst.lam, inst.sigma, inst.omega, inst.p, inst.q, family(share))

    best_share, best_val = None, -1.0
    inits = [np.eye(D + 1)[np.full(n, k)] for k in range(D + 1)]
    for r in range(len(inits) + opts.restarts):
        rng = opts.rng(r)
        if r < len(inits):
            share = inits[r].copy()
        else:
            share = np.eye(D + 1)[rng.integers(0, D + 1, size=n)]
        cur = value(share)
        delta = 1.0
        while delta >= 1.0 / 64:
            improved = False
            for leaf in rng.permutation(n):
                for a, b in itertools.permutations(range(D + 1), 2):
                    moved = min(delta, share[leaf, a])
                    if moved <= 0:
                        continue
                    trial = share.copy()
                    trial[leaf, a] -= moved
                    trial[leaf, b] += moved
                    v = value(trial)
                    if v > cur * (1 + 1e-12):
                        share, cur, improved = trial, v, True
            if not improved:
                delta /= 2
        if cur > best_val:
            best_share, best_val = share, cur
    return ConditionReport("disjoint", float(best_val), family(best_share))
