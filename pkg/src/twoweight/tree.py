"""Finite dyadic trees, measures on their leaves, and cube-indexed families.

A complete ``2**d``-ary tree of depth ``D`` stands in for the dyadic grid
below a single root cube.  Cubes are numbered in canonical breadth-first
order: level ``j`` occupies the contiguous block ``offset[j] ..
offset[j] + 2**(d*j) - 1`` and the ``c``-th child of the ``k``-th cube on
level ``j`` is the ``(k * 2**d + c)``-th cube on level ``j + 1``.  With this
numbering the leaves below any cube form a contiguous range, so subtree
aggregates reduce to reshapes and sums.

Leaf functions are plain float arrays of length ``n_leaves`` and cube
families are float arrays of length ``n_cubes`` (canonical order).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import InstanceTooLargeError, ParameterError, ValidationError

DEFAULT_MAX_LEAVES = 1 << 14

#: Slack allowed when checking that fractional sets are pairwise disjoint.
DISJOINT_TOL = 1e-12


def _readonly(arr):
    arr.setflags(write=False)
    return arr


class DyadicTree:
    """Complete dyadic tree of a given dimension and depth."""

    def __init__(self, dimension: int, depth: int, max_leaves: int = DEFAULT_MAX_LEAVES):
        if int(dimension) != dimension or dimension < 1:
            raise ParameterError(f"dimension must be a positive integer, got {dimension!r}")
        if int(depth) != depth or depth < 0:
            raise ParameterError(f"depth must be a nonnegative integer, got {depth!r}")
        dimension, depth = int(dimension), int(depth)
        n_leaves = 1 << (dimension * depth)
        if n_leaves > max_leaves:
            raise InstanceTooLargeError(
                f"tree with d={dimension}, D={depth} has {n_leaves} leaves (cap {max_leaves})"
            )
        self.dimension = dimension
        self.depth = depth
        self.branching = 1 << dimension
        self.n_leaves = n_leaves
        sizes = [1 << (dimension * j) for j in range(depth + 1)]
        self.level_sizes = tuple(sizes)
        self.offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(sizes)]))
        self.n_cubes = self.offsets[-1]

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, DyadicTree)
            and other.dimension == self.dimension
            and other.depth == self.depth
        )

    def __hash__(self):
        return hash((DyadicTree, self.dimension, self.depth))

    def __repr__(self):
        return f"DyadicTree(dimension={self.dimension}, depth={self.depth})"

    # -- addressing ---------------------------------------------------------

    def cube(self, level: int, index: int) -> int:
        """Canonical index of the ``index``-th cube on ``level``."""
        if not 0 <= level <= self.depth or not 0 <= index < self.level_sizes[level]:
            raise ValidationError(f"no cube {level}:{index} in {self!r}")
        return self.offsets[level] + index

    def level_slice(self, level: int) -> slice:
        return slice(self.offsets[level], self.offsets[level + 1])

    def locate(self, cube: int) -> tuple[int, int]:
        """Return ``(level, index within level)`` of a canonical cube index."""
        self._check_cube(cube)
        level = int(self.level[cube])
        return level, cube - self.offsets[level]

    def path(self, cube: int) -> str:
        level, index = self.locate(cube)
        return f"{level}:{index}"

    def cube_from_path(self, path: str) -> int:
        try:
            level, index = (int(part) for part in path.split(":"))
        except ValueError:
            raise ValidationError(f"malformed cube path {path!r}, expected 'level:index'") from None
        return self.cube(level, index)

    @property
    def root(self) -> int:
        return 0

    @property
    def leaves(self) -> range:
        return range(self.offsets[self.depth], self.n_cubes)

    def is_leaf(self, cube: int) -> bool:
        return self.locate(cube)[0] == self.depth

    def parent(self, cube: int) -> int | None:
        level, index = self.locate(cube)
        if level == 0:
            return None
        return self.offsets[level - 1] + index // self.branching

    def children(self, cube: int) -> range:
        level, index = self.locate(cube)
        if level == self.depth:
            return range(0)
        start = self.offsets[level + 1] + index * self.branching
        return range(start, start + self.branching)

    def leaf_range(self, cube: int) -> range:
        """Leaf positions (0-based, canonical leaf order) contained in ``cube``."""
        return range(int(self.leaf_start[cube]), int(self.leaf_stop[cube]))

    def descendants(self, cube: int) -> list[int]:
        """All cubes ``R`` with ``R ⊆ cube`` (including ``cube``), in canonical order."""
        level, index = self.locate(cube)
        out = []
        for j in range(level, self.depth + 1):
            width = 1 << (self.dimension * (j - level))
            start = self.offsets[j] + index * width
            out.extend(range(start, start + width))
        return out

    def _check_cube(self, cube):
        if not 0 <= cube < self.n_cubes:
            raise ValidationError(f"cube index {cube} outside 0..{self.n_cubes - 1}")

    # -- precomputed arrays -------------------------------------------------

    @cached_property
    def level(self) -> np.ndarray:
        return _readonly(np.repeat(np.arange(self.depth + 1), self.level_sizes))

    @cached_property
    def volume(self) -> np.ndarray:
        """Geometric volume ``2**(-d*level)`` of each cube, root volume 1."""
        return _readonly(np.exp2(-self.dimension * self.level.astype(float)))

    @cached_property
    def ancestors(self) -> np.ndarray:
        """``ancestors[l, j]`` is the level-``j`` cube containing leaf ``l``."""
        leaf = np.arange(self.n_leaves)
        cols = [
            self.offsets[j] + (leaf >> (self.dimension * (self.depth - j)))
            for j in range(self.depth + 1)
        ]
        return _readonly(np.stack(cols, axis=1))

    @cached_property
    def leaf_start(self) -> np.ndarray:
        width = np.exp2(self.dimension * (self.depth - self.level)).astype(np.int64)
        index = np.arange(self.n_cubes) - np.asarray(self.offsets[:-1])[self.level]
        return _readonly(index * width)

    @cached_property
    def leaf_stop(self) -> np.ndarray:
        width = np.exp2(self.dimension * (self.depth - self.level)).astype(np.int64)
        return _readonly(self.leaf_start + width)

    @cached_property
    def containment(self) -> np.ndarray:
        """Boolean matrix ``[cube, leaf]``: leaf lies inside cube."""
        leaf = np.arange(self.n_leaves)
        mat = (leaf[None, :] >= self.leaf_start[:, None]) & (leaf[None, :] < self.leaf_stop[:, None])
        return _readonly(mat)

    # -- aggregates ---------------------------------------------------------

    def leaf_sum(self, leaf_values) -> np.ndarray:
        """Per-cube sums of leaf values: ``out[..., Q] = sum_{l in Q} v[..., l]``."""
        v = np.asarray(leaf_values, dtype=float)
        lead = v.shape[:-1]
        parts = [
            v.reshape(lead + (self.level_sizes[j], -1)).sum(axis=-1)
            for j in range(self.depth + 1)
        ]
        return np.concatenate(parts, axis=-1)

    def leaf_max(self, leaf_values) -> np.ndarray:
        v = np.asarray(leaf_values, dtype=float)
        lead = v.shape[:-1]
        parts = [
            v.reshape(lead + (self.level_sizes[j], -1)).max(axis=-1)
            for j in range(self.depth + 1)
        ]
        return np.concatenate(parts, axis=-1)

    def subtree_sum(self, cube_values) -> np.ndarray:
        """``out[..., Q] = sum_{R ⊆ Q} v[..., R]`` by one bottom-up pass."""
        out = np.array(cube_values, dtype=float, copy=True)
        lead = out.shape[:-1]
        for j in range(self.depth, 0, -1):
            block = out[..., self.level_slice(j)].reshape(lead + (self.level_sizes[j - 1], self.branching))
            out[..., self.level_slice(j - 1)] += block.sum(axis=-1)
        return out

    def subtree_max(self, cube_values) -> np.ndarray:
        """``out[..., Q] = max_{R ⊆ Q} v[..., R]``."""
        out = np.array(cube_values, dtype=float, copy=True)
        lead = out.shape[:-1]
        for j in range(self.depth, 0, -1):
            block = out[..., self.level_slice(j)].reshape(lead + (self.level_sizes[j - 1], self.branching))
            sl = self.level_slice(j - 1)
            out[..., sl] = np.maximum(out[..., sl], block.max(axis=-1))
        return out

    def along_ancestors(self, cube_values) -> np.ndarray:
        """Gather cube values along every leaf's ancestor chain.

        Returns an array of shape ``(..., n_leaves, depth + 1)`` whose column
        ``j`` holds the value of the level-``j`` ancestor (root first).
        """
        v = np.asarray(cube_values, dtype=float)
        return v[..., self.ancestors]

    def restrict(self, leaf_values, cube: int) -> np.ndarray:
        return np.asarray(leaf_values)[..., int(self.leaf_start[cube]):int(self.leaf_stop[cube])]


def build_tree(dimension: int, depth: int, max_leaves: int = DEFAULT_MAX_LEAVES) -> DyadicTree:
    """Complete dyadic tree with ``sum_j 2**(d*j)`` cubes."""
    return DyadicTree(dimension, depth, max_leaves=max_leaves)


def safe_ratio(num, den):
    """Elementwise ``num / den`` with the convention ``x / 0 := 0``."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _as_nonneg_array(values, length, name):
    arr = np.array(values, dtype=float)
    if arr.shape != (length,):
        raise ValidationError(f"expected {length} values, got shape {arr.shape}", name)
    bad = np.flatnonzero(~np.isfinite(arr) | (arr < 0))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"value {arr[i]!r} is not a finite nonnegative real", f"{name}[{i}]")
    return _readonly(arr)


@dataclass(frozen=True, eq=False)
class Measure:
    """Nonnegative mass on each leaf; cube masses are subtree aggregates."""

    tree: DyadicTree
    leaf_mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "leaf_mass", _as_nonneg_array(self.leaf_mass, self.tree.n_leaves, "leaf_mass")
        )

    @classmethod
    def uniform(cls, tree: DyadicTree, total: float = 1.0) -> "Measure":
        return cls(tree, np.full(tree.n_leaves, total / tree.n_leaves))

    @cached_property
    def cube_mass(self) -> np.ndarray:
        return _readonly(self.tree.leaf_sum(self.leaf_mass))

    @property
    def total(self) -> float:
        return float(self.cube_mass[0])

    def __eq__(self, other):
        return (
            isinstance(other, Measure)
            and other.tree == self.tree
            and np.array_equal(other.leaf_mass, self.leaf_mass)
        )

    def __hash__(self):
        return hash((self.tree, self.leaf_mass.tobytes()))


def cube_mass(measure: Measure, cube: int) -> float:
    measure.tree._check_cube(cube)
    return float(measure.cube_mass[cube])


def cube_averages(f, measure: Measure) -> np.ndarray:
    """``<f>^mu_Q`` for every cube, with ``0/0 := 0``."""
    f = np.asarray(f, dtype=float)
    return safe_ratio(measure.tree.leaf_sum(f * measure.leaf_mass), measure.cube_mass)


def cube_average(f, measure: Measure, cube: int) -> float:
    tree = measure.tree
    tree._check_cube(cube)
    f = np.asarray(f, dtype=float)
    mass = tree.restrict(measure.leaf_mass, cube)
    total = mass.sum()
    if total <= 0:
        return 0.0
    return float((tree.restrict(f, cube) * mass).sum() / total)


def check_leaf_function(f, tree: DyadicTree, name: str = "f") -> np.ndarray:
    return _as_nonneg_array(f, tree.n_leaves, name)


def check_cube_family(a, tree: DyadicTree, name: str = "family") -> np.ndarray:
    return _as_nonneg_array(a, tree.n_cubes, name)


def indicator(tree: DyadicTree, cubes: Iterable[int], value: float = 1.0) -> np.ndarray:
    """Cube family equal to ``value`` on ``cubes`` and 0 elsewhere."""
    out = np.zeros(tree.n_cubes)
    out[list(cubes)] = value
    return out


def check_collection(tree: DyadicTree, cubes: Iterable[int]) -> frozenset:
    """Validate a nonempty collection of cube indices."""
    coll = frozenset(int(c) for c in cubes)
    if not coll:
        raise ValidationError("cube collection must be nonempty")
    for c in coll:
        tree._check_cube(c)
    return coll


@dataclass(frozen=True, eq=False)
class DisjointFamily:
    """Pairwise disjoint fractional sets ``E_Q ⊆ Q``.

    ``fractions[Q, l]`` is the share of leaf ``l``'s mass allotted to ``E_Q``.
    Leaves are divisible, so ``E_Q`` is determined by these shares alone and
    ``mu(E_Q) = sum_l fractions[Q, l] * mu(l)``.
    """

    tree: DyadicTree
    fractions: np.ndarray

    def __post_init__(self):
        tree = self.tree
        fr = np.array(self.fractions, dtype=float)
        if fr.shape != (tree.n_cubes, tree.n_leaves):
            raise ValidationError(
                f"expected shape {(tree.n_cubes, tree.n_leaves)}, got {fr.shape}", "fractions"
            )
        if not np.all(np.isfinite(fr)) or fr.min() < 0 or fr.max() > 1:
            raise ValidationError("fractions must lie in [0, 1]", "fractions")
        outside = fr[~tree.containment]
        if outside.size and outside.max() > 0:
            q, l = np.argwhere((fr > 0) & ~tree.containment)[0]
            raise ValidationError(
                f"leaf {l} is not contained in cube {tree.path(int(q))}", f"fractions[{q}, {l}]"
            )
        load = fr.sum(axis=0)
        if load.max() > 1 + DISJOINT_TOL:
            l = int(np.argmax(load))
            raise ValidationError(f"leaf {l} is allotted {load[l]!r} > 1 in total", f"fractions[:, {l}]")
        object.__setattr__(self, "fractions", _readonly(fr))

    @classmethod
    def empty(cls, tree: DyadicTree) -> "DisjointFamily":
        return cls(tree, np.zeros((tree.n_cubes, tree.n_leaves)))

    @classmethod
    def from_assignment(cls, tree: DyadicTree, owner) -> "DisjointFamily":
        """Whole-leaf sets: ``owner[l]`` is the cube whose set gets leaf ``l`` (or -1)."""
        fr = np.zeros((tree.n_cubes, tree.n_leaves))
        for l, q in enumerate(owner):
            if q is not None and q >= 0:
                fr[q, l] = 1.0
        return cls(tree, fr)

    def masses(self, measure: Measure) -> np.ndarray:
        """``mu(E_Q)`` for every cube."""
        return self.fractions @ measure.leaf_mass


@dataclass(frozen=True, eq=False)
class Instance:
    """One two-weight problem: ``T_lambda(. sigma): L^p(sigma) -> L^q(omega)``."""

    sigma: Measure
    omega: Measure
    lam: np.ndarray
    p: float
    q: float

    def __post_init__(self):
        if self.sigma.tree != self.omega.tree:
            raise ValidationError("sigma and omega live on different trees", "omega")
        object.__setattr__(self, "lam", check_cube_family(self.lam, self.tree, "lam"))
        p, q = float(self.p), float(self.q)
        if not (1 < p < np.inf):
            raise ParameterError(f"p must lie in (1, inf), got {p}")
        if not (0 < q < p):
            raise ParameterError(f"q must lie in (0, p), got q={q}, p={p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def tree(self) -> DyadicTree:
        return self.sigma.tree

    def with_lambda(self, lam) -> "Instance":
        return Instance(self.sigma, self.omega, lam, self.p, self.q)

    def __eq__(self, other):
        return (
            isinstance(other, Instance)
            and other.sigma == self.sigma
            and other.omega == self.omega
            and np.array_equal(other.lam, self.lam)
            and other.p == self.p
            and other.q == self.q
        )

    __hash__ = None
