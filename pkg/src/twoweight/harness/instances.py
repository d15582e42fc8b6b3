"""Instance specifications, seeded generation and JSON serialization."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..errors import TwoWeightError, ValidationError
from ..operators import riesz_coefficients
from ..tree import Instance, Measure, build_tree

MEASURE_KINDS = ("uniform", "exponential", "single-heavy-leaf", "explicit")
LAMBDA_KINDS = ("explicit", "random-sparse", "riesz", "single-cube")

# independent random streams per component
_STREAMS = {"sigma": 1, "omega": 2, "lam": 3}


@dataclass(frozen=True)
class MeasureGen:
    """How to produce leaf masses.

    ``uniform``: every leaf gets ``total / n``.  ``exponential``: i.i.d.
    Exp(1) masses.  ``single-heavy-leaf``: Exp(1) masses times ``floor``
    except one random leaf of mass 1.  ``explicit``: ``values`` as given.
    """

    kind: str = "exponential"
    total: float = 1.0
    floor: float = 1e-3
    values: tuple = ()

    def validate(self, path, n_leaves):
        if self.kind not in MEASURE_KINDS:
            raise ValidationError(f"unknown measure kind {self.kind!r}; expected one of {MEASURE_KINDS}", f"{path}.kind")
        if not (self.total > 0 and math.isfinite(self.total)):
            raise ValidationError(f"total must be positive and finite, got {self.total}", f"{path}.total")
        if not self.floor >= 0:
            raise ValidationError(f"floor must be nonnegative, got {self.floor}", f"{path}.floor")
        if self.kind == "explicit":
            v = np.asarray(self.values, dtype=float)
            if v.shape != (n_leaves,):
                raise ValidationError(f"expected {n_leaves} leaf masses, got {v.size}", f"{path}.values")
            if not (np.all(np.isfinite(v)) and np.all(v >= 0)):
                raise ValidationError("leaf masses must be finite and nonnegative", f"{path}.values")

    def draw(self, n, rng):
        if self.kind == "uniform":
            return np.full(n, self.total / n)
        if self.kind == "exponential":
            return rng.exponential(size=n)
        if self.kind == "single-heavy-leaf":
            v = rng.exponential(size=n) * self.floor
            v[rng.integers(n)] = 1.0
            return v
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class LambdaGen:
    """How to produce the coefficients ``lambda``.

    ``explicit``: ``values`` maps ``"j:k"`` paths to coefficients (others 0).
    ``random-sparse``: each cube is kept with probability ``density`` and
    given an Exp(1) coefficient.  ``riesz``: ``sigma(Q) |Q|^(alpha/d - 1)``.
    ``single-cube``: ``scale`` on the cube ``path``.
    """

    kind: str = "random-sparse"
    density: float = 0.5
    alpha: float = 0.5
    path: str = "0:0"
    scale: float = 1.0
    values: dict = field(default_factory=dict)

    def validate(self, path, tree):
        if self.kind not in LAMBDA_KINDS:
            raise ValidationError(f"unknown lambda kind {self.kind!r}; expected one of {LAMBDA_KINDS}", f"{path}.kind")
        if self.kind == "random-sparse" and not 0 <= self.density <= 1:
            raise ValidationError(f"density must lie in [0, 1], got {self.density}", f"{path}.density")
        if self.kind == "riesz" and not 0 < self.alpha < tree.dimension:
            raise ValidationError(f"riesz needs 0 < alpha < {tree.dimension}, got {self.alpha}", f"{path}.alpha")
        if self.kind == "single-cube":
            _cube(tree, self.path, f"{path}.path")
            if not (self.scale >= 0 and math.isfinite(self.scale)):
                raise ValidationError(f"scale must be finite and nonnegative, got {self.scale}", f"{path}.scale")
        if self.kind == "explicit":
            for key, val in self.values.items():
                _cube(tree, key, f"{path}.values[{key!r}]")
                if not (math.isfinite(val) and val >= 0):
                    raise ValidationError(f"coefficient must be finite and nonnegative, got {val}", f"{path}.values[{key!r}]")

    def draw(self, tree, sigma, rng):
        lam = np.zeros(tree.n_cubes)
        if self.kind == "random-sparse":
            keep = rng.random(tree.n_cubes) < self.density
            lam = np.where(keep, rng.exponential(size=tree.n_cubes), 0.0)
        elif self.kind == "riesz":
            lam = riesz_coefficients(sigma, self.alpha)
        elif self.kind == "single-cube":
            lam[tree.cube_from_path(self.path)] = self.scale
        else:
            for key, val in self.values.items():
                lam[tree.cube_from_path(key)] = val
        return lam


def _cube(tree, path, where):
    try:
        return tree.cube_from_path(path)
    except (TwoWeightError, ValueError, IndexError) as exc:
        raise ValidationError(str(exc), where) from None


@dataclass(frozen=True)
class InstanceSpec:
    dimension: int = 1
    depth: int = 2
    sigma: MeasureGen = MeasureGen()
    omega: MeasureGen = MeasureGen()
    lam: LambdaGen = LambdaGen()
    p: float = 2.0
    q: float = 1.0
    seed: int = 0
    same_measure: bool = False  # omega := sigma

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceSpec":
        data = dict(data)
        parts = {}
        for key, kind in (("sigma", MeasureGen), ("omega", MeasureGen), ("lam", LambdaGen)):
            sub = dict(data.pop(key, {}))
            if kind is MeasureGen and "values" in sub:
                sub["values"] = tuple(sub["values"])
            try:
                parts[key] = kind(**sub)
            except TypeError as exc:
                raise ValidationError(str(exc), key) from None
        try:
            return cls(**parts, **data)
        except TypeError as exc:
            raise ValidationError(str(exc), "spec") from None


def gen(spec: InstanceSpec) -> Instance:
    """Deterministic instance from ``spec`` (validated field by field)."""
    if not (isinstance(spec.dimension, int) and spec.dimension >= 1):
        raise ValidationError(f"dimension must be a positive integer, got {spec.dimension!r}", "dimension")
    if not (isinstance(spec.depth, int) and spec.depth >= 0):
        raise ValidationError(f"depth must be a nonnegative integer, got {spec.depth!r}", "depth")
    if not 1 < spec.p < math.inf:
        raise ValidationError(f"p must lie in (1, inf), got {spec.p}", "p")
    if not 0 < spec.q < spec.p:
        raise ValidationError(f"q must lie in (0, p), got q={spec.q}, p={spec.p}", "q")
    try:
        tree = build_tree(spec.dimension, spec.depth)
    except TwoWeightError as exc:
        raise ValidationError(str(exc), "depth") from None
    spec.sigma.validate("sigma", tree.n_leaves)
    if not spec.same_measure:
        spec.omega.validate("omega", tree.n_leaves)
    spec.lam.validate("lam", tree)

    def rng(name):
        return np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, _STREAMS[name]])

    sigma = Measure(tree, spec.sigma.draw(tree.n_leaves, rng("sigma")))
    omega = sigma if spec.same_measure else Measure(tree, spec.omega.draw(tree.n_leaves, rng("omega")))
    lam = spec.lam.draw(tree, sigma, rng("lam"))
    return Instance(sigma, omega, lam, spec.p, spec.q)


# -- serialization -----------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    tree = inst.tree
    return {
        "dimension": tree.dimension,
        "depth": tree.depth,
        "sigma": [float(x) for x in inst.sigma.leaf_mass],
        "omega": [float(x) for x in inst.omega.leaf_mass],
        "lambda": {tree.path(c): float(inst.lam[c]) for c in range(tree.n_cubes) if inst.lam[c] != 0},
        "p": inst.p,
        "q": inst.q,
    }


def instance_from_dict(data: dict) -> Instance:
    for key in ("dimension", "depth", "sigma", "omega", "lambda", "p", "q"):
        if key not in data:
            raise ValidationError("missing field", key)
    try:
        tree = build_tree(int(data["dimension"]), int(data["depth"]))
    except TwoWeightError as exc:
        raise ValidationError(str(exc), "depth") from None
    lam = np.zeros(tree.n_cubes)
    for key, val in data["lambda"].items():
        lam[_cube(tree, key, f"lambda[{key!r}]")] = float(val)
    try:
        sigma = Measure(tree, data["sigma"])
        omega = Measure(tree, data["omega"])
    except ValidationError:
        raise
    except (TwoWeightError, ValueError) as exc:
        raise ValidationError(str(exc), "sigma/omega") from None
    return Instance(sigma, omega, lam, float(data["p"]), float(data["q"]))


def dumps(inst: Instance) -> str:
    # json writes floats with repr, the shortest round-trip form
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True)


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", "file") from None
    if not isinstance(data, dict):
        raise ValidationError("expected a JSON object", "file")
    return instance_from_dict(data)


def digest(inst: Instance) -> str:
    return hashlib.sha256(json.dumps(instance_to_dict(inst), sort_keys=True).encode()).hexdigest()[:16]
