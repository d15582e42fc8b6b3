"""Positive dyadic operators on a finite tree.

All functions accept leaf functions of shape ``(n_leaves,)`` or batches of
shape ``(B, n_leaves)``; the batch axis is carried through unchanged.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .tree import Measure, cube_averages, safe_ratio


def _terms(lam, sigma: Measure, f):
    """``lambda_Q <f>^sigma_Q`` for every cube (zero on sigma-null cubes)."""
    return np.asarray(lam, dtype=float) * cube_averages(f, sigma)


def apply_summation(lam, sigma: Measure, f) -> np.ndarray:
    """``T_lambda(f sigma) = sum_Q lambda_Q <f>^sigma_Q 1_Q`` evaluated on leaves."""
    terms = _terms(lam, sigma, f)
    return sigma.tree.along_ancestors(terms).sum(axis=-1)


def apply_maximal(lam, sigma: Measure, f, return_argmax: bool = False):
    """``M_lambda(f sigma) = sup_Q lambda_Q <f>^sigma_Q 1_Q`` on leaves.

    With ``return_argmax`` also returns, per leaf, the canonical index of a
    cube attaining the maximum.  Ties go to the deepest cube; since a leaf
    has one ancestor per level this fixes the choice completely.
    """
    tree = sigma.tree
    chain = tree.along_ancestors(_terms(lam, sigma, f))
    # reversed so that argmax (first hit) prefers the deepest level
    rev = chain[..., ::-1]
    pos = np.argmax(rev, axis=-1)
    value = np.take_along_axis(rev, pos[..., None], axis=-1)[..., 0]
    if not return_argmax:
        return value
    level = tree.depth - pos
    cube = np.take_along_axis(
        np.broadcast_to(tree.ancestors, level.shape + (tree.depth + 1,)), level[..., None], axis=-1
    )[..., 0]
    return value, cube


def hl_maximal(f, mu: Measure) -> np.ndarray:
    """Dyadic Hardy–Littlewood maximal function ``sup_Q <f>^mu_Q 1_Q``."""
    return apply_maximal(np.ones(mu.tree.n_cubes), mu, f)


def lebesgue_norm(f, p: float, mu: Measure) -> np.ndarray | float:
    """``||f||_{L^p(mu)}`` for ``p in (0, inf]``; leaves of zero mass are ignored."""
    p = float(p)
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p}")
    f = np.abs(np.asarray(f, dtype=float))
    w = mu.leaf_mass
    if np.isinf(p):
        out = np.where(w > 0, f, 0.0).max(axis=-1)
    else:
        with np.errstate(over="ignore"):
            out = (np.where(w > 0, f**p, 0.0) * w).sum(axis=-1) ** (1.0 / p)
    return out if np.ndim(out) else float(out)


def riesz_coefficients(sigma: Measure, alpha: float) -> np.ndarray:
    """Dyadic Riesz potential coefficients ``sigma(Q) |Q|^(alpha/d - 1)``."""
    tree = sigma.tree
    d = tree.dimension
    if not 0 < alpha < d:
        raise ParameterError(f"alpha must lie in (0, {d}), got {alpha}")
    return sigma.cube_mass * tree.volume ** (alpha / d - 1.0)


def summation_matrix(lam, sigma: Measure) -> np.ndarray:
    """Matrix ``K`` with ``T_lambda(f sigma) = K @ f`` (leaf by leaf)."""
    tree = sigma.tree
    weight = safe_ratio(lam, sigma.cube_mass)
    c = tree.containment.astype(float)
    return (c.T * weight) @ c * sigma.leaf_mass


def selection_matrix(lam, sigma: Measure, selection) -> np.ndarray:
    """Matrix of the linearization ``f -> lambda_{s(l)} <f>^sigma_{s(l)}``.

    ``selection[l]`` is the cube chosen for leaf ``l``.
    """
    tree = sigma.tree
    selection = np.asarray(selection)
    weight = safe_ratio(lam, sigma.cube_mass)[selection]
    rows = tree.containment[selection].astype(float)
    return rows * weight[:, None] * sigma.leaf_mass
