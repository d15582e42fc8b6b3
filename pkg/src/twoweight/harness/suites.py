"""Property suites.  Each suite draws seeded instances, records one CSV row per
check (with the quantities needed to recompute its verdict) and returns a
summary with the extreme observed ratios."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .. import conditions as cond
from ..estimate import estimate_norm_maximal, estimate_norm_summation, grid_oracle, maximal_pair_norms
from ..lp import conjugate, lp_dual_norm, lp_norm, lp_pairing
from ..operators import hl_maximal, lebesgue_norm
from ..optimize import OptimizerOptions
from ..tree import Instance, Measure, build_tree, indicator
from .instances import InstanceSpec, LambdaGen, MeasureGen, digest, gen
from .report import write_csv

logger = logging.getLogger(__name__)

OUT_DIR_ENV = "TWOWEIGHT_OUT_DIR"


@dataclass(frozen=True)
class SuiteConfig:
    """Knobs shared by the suites; ``instances=None`` keeps each suite's default count."""

    seed: int = 0
    instances: int | None = None
    depths: tuple = (2, 3, 4)
    dimension: int = 1
    restarts: int = 8
    selection_cap: int = 256
    out_dir: str | None = None

    def options(self, **kw) -> OptimizerOptions:
        base = OptimizerOptions(restarts=self.restarts, seed=self.seed, selection_cap=self.selection_cap)
        return replace(base, **kw)

    def count(self, default: int) -> int:
        return default if self.instances is None else self.instances


@dataclass
class SuiteResult:
    name: str
    passed: bool
    summary: dict
    fields: tuple
    rows: list = field(default_factory=list)

    def csv(self) -> str:
        return write_csv(self.rows, self.fields)

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extras = ", ".join(f"{k}={_fmt(v)}" for k, v in self.summary.items())
        return f"{self.name}: {status} ({extras})"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


# -- instance draws ------------------------------------------------------------


def _rng(cfg: SuiteConfig, suite: str, index: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, SUITE_IDS[suite], index])


def random_spec(rng: np.random.Generator, p: float, q: float, depths, dimension: int = 1, same_measure: bool = False) -> InstanceSpec:
    """A varied random spec: mostly exponential masses and sparse coefficients."""
    depth = int(rng.choice(depths))
    kinds = ("exponential", "exponential", "uniform", "single-heavy-leaf")
    sigma = MeasureGen(kind=str(rng.choice(kinds)), floor=float(10 ** rng.uniform(-2, 0)))
    omega = MeasureGen(kind=str(rng.choice(kinds)), floor=float(10 ** rng.uniform(-2, 0)))
    if rng.random() < 0.15:
        lam = LambdaGen(kind="riesz", alpha=float(rng.uniform(0.1, 0.9) * dimension))
    else:
        lam = LambdaGen(kind="random-sparse", density=float(rng.uniform(0.2, 1.0)))
    return InstanceSpec(
        dimension=dimension, depth=depth, sigma=sigma, omega=omega, lam=lam,
        p=p, q=q, seed=int(rng.integers(1 << 62)), same_measure=same_measure,
    )


def _draw(cfg, suite, index, p, q, same_measure=False) -> Instance:
    rng = _rng(cfg, suite, index)
    inst = gen(random_spec(rng, p, q, cfg.depths, cfg.dimension, same_measure))
    if not inst.lam.any():
        # keep every instance nondegenerate: put weight on the root
        inst = inst.with_lambda(indicator(inst.tree, [inst.tree.root]))
    return inst


def _random_family(rng, tree, density=None):
    density = rng.uniform(0.2, 1.0) if density is None else density
    return np.where(rng.random(tree.n_cubes) < density, rng.exponential(size=tree.n_cubes), 0.0)


def _random_measure(rng, tree):
    return Measure(tree, rng.exponential(size=tree.n_leaves))


def _safe_div(a, b):
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def _band(ratios):
    r = [x for x in ratios if x is not None and math.isfinite(x)]
    if not r:
        return {"min_ratio": 1.0, "max_ratio": 1.0}
    return {"min_ratio": float(min(r)), "max_ratio": float(max(r))}


# -- suites ------------------------------------------------------------------


def suite_anchor(cfg: SuiteConfig) -> SuiteResult:
    """Single-cube coefficients with uniform sigma = omega: everything equals m^(1/q - 1/p)."""
    fields = ("m", "depth", "p", "q", "quantity", "value", "expected", "rel_err", "pass")
    rows, tol = [], 1e-4
    opts = cfg.options()
    for m in (2.0, 4.0, 8.0):
        for depth in (0, 1, 2):
            tree = build_tree(cfg.dimension, depth)
            mu = Measure.uniform(tree, m)
            for p, q in ((2.0, 1.0), (3.0, 2.0), (2.0, 0.5)):
                inst = Instance(mu, mu, indicator(tree, [tree.root]), p, q)
                expected = m ** (1 / q - 1 / p)
                vals = {
                    "T": estimate_norm_summation(inst, opts).value,
                    "M": estimate_norm_maximal(inst, opts).value,
                }
                for frac in (0.25, 0.5, 0.75):
                    s, n = cond.maximal_condition_values(inst.lam, mu, mu, p, q, frac * q)
                    vals[f"S(eps={frac}q)"] = s
                    vals[f"N(eps={frac}q)"] = n
                for name, v in vals.items():
                    err = abs(v - expected) / expected
                    rows.append({"m": m, "depth": depth, "p": p, "q": q, "quantity": name, "value": v,
                                 "expected": expected, "rel_err": err, "pass": int(err <= tol)})
    worst = max(r["rel_err"] for r in rows)
    return SuiteResult("anchor", all(r["pass"] for r in rows), {"checks": len(rows), "max_rel_err": worst, "tol": tol}, fields, rows)


ORACLE_EXPONENTS = ((2.0, 1.0), (3.0, 2.0), (2.0, 0.5), (1.5, 1.2), (4.0, 0.8))


def suite_oracle(cfg: SuiteConfig) -> SuiteResult:
    """Estimators against brute force on trees with at most four leaves."""
    fields = ("index", "digest", "dimension", "depth", "p", "q", "quantity", "estimate", "oracle", "rel_gap", "pass")
    rows, tol = [], 0.02
    opts = cfg.options(restarts=max(cfg.restarts, 16), selection_cap=20_000)
    for i in range(cfg.count(20)):
        rng = _rng(cfg, "oracle", i)
        p, q = ORACLE_EXPONENTS[int(rng.integers(len(ORACLE_EXPONENTS)))]
        dim, depth = ((1, 1), (1, 2), (2, 1))[int(rng.integers(3))]
        inst = gen(random_spec(rng, p, q, (depth,), dimension=dim))
        if not inst.lam.any():
            inst = inst.with_lambda(indicator(inst.tree, [inst.tree.root]))
        checks = {
            "T_vs_grid": (estimate_norm_summation(inst, opts).value, grid_oracle(inst, 60, "summation")),
        }
        m_est = estimate_norm_maximal(inst, opts, mode="subgradient").value
        checks["M_vs_enumeration"] = (m_est, estimate_norm_maximal(inst, opts, mode="enumerate").value)
        checks["M_vs_grid"] = (estimate_norm_maximal(inst, opts).value, grid_oracle(inst, 60, "maximal"))
        for name, (est, ref) in checks.items():
            gap = abs(est - ref) / ref if ref > 0 else abs(est)
            rows.append({"index": i, "digest": digest(inst), "dimension": inst.tree.dimension, "depth": inst.tree.depth,
                         "p": p, "q": q, "quantity": name, "estimate": est, "oracle": ref, "rel_gap": gap,
                         "pass": int(gap <= tol)})
    worst = max(r["rel_gap"] for r in rows)
    return SuiteResult("oracle", all(r["pass"] for r in rows), {"checks": len(rows), "max_rel_gap": worst, "tol": tol}, fields, rows)


SCALE_PARAMS = ((2.0, 1.0, 0.25), (3.0, 2.0, 0.5))
GAMMAS = (-1.0, 0.5, 1.0, 2.0)


def _gamma_monotone(lam, omega):
    """Worst relative violation of ``Lambda^sup_gamma`` being nondecreasing in gamma."""
    vals = [cond.lambda_gamma(lam, omega, g, "sup") for g in GAMMAS]
    worst = 0.0
    for lo, hi in zip(vals, vals[1:]):
        excess = np.where(lo > hi, (lo - hi) / np.where(hi > 0, hi, 1.0), 0.0)
        worst = max(worst, float(excess.max()))
    return worst


def suite_maximal_scale(cfg: SuiteConfig, K: float = 100.0) -> SuiteResult:
    """``N <= K ||M||`` and ``||M|| <= K S``; Lambda^sup monotone in gamma."""
    fields = ("index", "digest", "depth", "p", "q", "eps", "N", "M", "S", "N_over_M", "M_over_S", "gamma_violation", "pass")
    rows = []
    opts = cfg.options()
    for i in range(cfg.count(200)):
        base = _draw(cfg, "maximal-scale", i, 2.0, 1.0)
        for p, q, eps in SCALE_PARAMS:
            inst = Instance(base.sigma, base.omega, base.lam, p, q)
            s, n = cond.maximal_condition_values(inst.lam, inst.sigma, inst.omega, p, q, eps)
            m = estimate_norm_maximal(inst, opts).value
            viol = _gamma_monotone(inst.lam, inst.omega)
            ok = n <= K * m and m <= K * s and viol == 0.0
            rows.append({"index": i, "digest": digest(inst), "depth": inst.tree.depth, "p": p, "q": q, "eps": eps,
                         "N": n, "M": m, "S": s, "N_over_M": _safe_div(n, m), "M_over_S": _safe_div(m, s),
                         "gamma_violation": viol, "pass": int(ok)})
    summary = {
        "instances": cfg.count(200), "K": K,
        "max_N_over_M": max(r["N_over_M"] for r in rows),
        "max_M_over_S": max(r["M_over_S"] for r in rows),
        "max_gamma_violation": max(r["gamma_violation"] for r in rows),
    }
    return SuiteResult("maximal-scale", all(r["pass"] for r in rows), summary, fields, rows)


def suite_a_infinity(cfg: SuiteConfig, K: float = 50.0) -> SuiteResult:
    """With ``sigma = omega``: ``||T||`` vs ``I`` (and ``I*`` when ``q > 1``)."""
    fields = ("index", "digest", "depth", "p", "q", "quantity", "T", "condition", "ratio", "pass")
    rows = []
    opts = cfg.options()
    for i in range(cfg.count(200)):
        base = _draw(cfg, "a-infinity", i, 2.0, 0.5, same_measure=True)
        for p, q in ((2.0, 0.5), (3.0, 2.0)):
            inst = Instance(base.sigma, base.omega, base.lam, p, q)
            t = estimate_norm_summation(inst, opts).value
            conds = {"I": cond.integral_condition(inst.lam, inst.sigma, inst.omega, p, q)}
            if q > 1:
                conds["I_star"] = cond.integral_condition(inst.lam, inst.sigma, inst.omega, p, q, dual=True)
            for name, c in conds.items():
                r = _safe_div(t, c)
                rows.append({"index": i, "digest": digest(inst), "depth": inst.tree.depth, "p": p, "q": q,
                             "quantity": name, "T": t, "condition": c, "ratio": r, "pass": int(1 / K <= r <= K)})
    summary = {"instances": cfg.count(200), "K": K}
    for name in ("I", "I_star"):
        summary.update({f"{name}_{k}": v for k, v in _band(r["ratio"] for r in rows if r["quantity"] == name).items()})
    return SuiteResult("a-infinity", all(r["pass"] for r in rows), summary, fields, rows)


def suite_maximal_pair(cfg: SuiteConfig, K: float = 50.0) -> SuiteResult:
    """``||T|| / (n1 + n2)`` inside ``[1/K, K]`` at ``(p, q) = (3, 2)``."""
    fields = ("index", "digest", "depth", "T", "n1", "n2", "ratio", "pass")
    rows = []
    opts = cfg.options()
    for i in range(cfg.count(100)):
        inst = _draw(cfg, "maximal-pair", i, 3.0, 2.0)
        t = estimate_norm_summation(inst, opts).value
        n1, n2 = maximal_pair_norms(inst.lam, inst.sigma, inst.omega, 3.0, 2.0, opts)
        r = _safe_div(t, n1 + n2)
        rows.append({"index": i, "digest": digest(inst), "depth": inst.tree.depth, "T": t, "n1": n1, "n2": n2,
                     "ratio": r, "pass": int(1 / K <= r <= K)})
    summary = {"instances": cfg.count(100), "K": K, **_band(r["ratio"] for r in rows)}
    return SuiteResult("maximal-pair", all(r["pass"] for r in rows), summary, fields, rows)


def suite_wolff(cfg: SuiteConfig, K: float = 100.0) -> SuiteResult:
    """Exact degree-one homogeneity of V1, V2 and ``||T|| / max(V1, V2)`` in ``[1/K, K]``."""
    fields = ("index", "digest", "depth", "T", "V1", "V2", "V1_homog_err", "V2_homog_err", "ratio", "pass")
    rows, tol = [], 1e-12
    opts = cfg.options()
    for i in range(cfg.count(100)):
        inst = _draw(cfg, "wolff", i, 3.0, 2.0)
        v1, v2 = cond.wolff_condition(inst.lam, inst.sigma, inst.omega, 3.0, 2.0)
        w1, w2 = cond.wolff_condition(2 * inst.lam, inst.sigma, inst.omega, 3.0, 2.0)
        e1 = abs(w1 - 2 * v1) / (2 * v1) if v1 else abs(w1)
        e2 = abs(w2 - 2 * v2) / (2 * v2) if v2 else abs(w2)
        t = estimate_norm_summation(inst, opts).value
        r = _safe_div(t, max(v1, v2))
        ok = e1 < tol and e2 < tol and 1 / K <= r <= K
        rows.append({"index": i, "digest": digest(inst), "depth": inst.tree.depth, "T": t, "V1": v1, "V2": v2,
                     "V1_homog_err": e1, "V2_homog_err": e2, "ratio": r, "pass": int(ok)})
    summary = {
        "instances": cfg.count(100), "K": K,
        "max_homog_err": max(max(r["V1_homog_err"], r["V2_homog_err"]) for r in rows),
        **_band(r["ratio"] for r in rows),
    }
    return SuiteResult("wolff", all(r["pass"] for r in rows), summary, fields, rows)


HOLDER_EXPONENTS = ((2.0, 2.0), (3.0, 1.5))


def _lp_sample(cfg, suite, i):
    rng = _rng(cfg, suite, i)
    tree = build_tree(cfg.dimension, int(rng.choice(cfg.depths)))
    mu = _random_measure(rng, tree)
    a = _random_family(rng, tree)
    b = _random_family(rng, tree)
    if not a.any():
        a[tree.root] = 1.0
    return rng, tree, mu, a, b


def suite_holder_direction(cfg: SuiteConfig) -> SuiteResult:
    """``pairing(a, b) <= ||a||_{p,q} ||b||_{p',q'}`` with constant one."""
    fields = ("index", "p", "q", "pairing", "norm_a", "norm_b", "slack", "pass")
    rows = []
    for i in range(cfg.count(200)):
        _, _, mu, a, b = _lp_sample(cfg, "holder-direction", i)
        for p, q in HOLDER_EXPONENTS:
            pair = lp_pairing(a, b, mu)
            na, nb = lp_norm(a, p, q, mu), lp_norm(b, conjugate(p), conjugate(q), mu)
            bound = na * nb * (1 + 1e-9)
            rows.append({"index": i, "p": p, "q": q, "pairing": pair, "norm_a": na, "norm_b": nb,
                         "slack": _safe_div(pair, na * nb), "pass": int(pair <= bound)})
    summary = {"samples": cfg.count(200), "max_pairing_over_product": max(r["slack"] for r in rows)}
    return SuiteResult("holder-direction", all(r["pass"] for r in rows), summary, fields, rows)


def suite_duality(cfg: SuiteConfig, factor: float = 16.0) -> SuiteResult:
    """``lp_dual_norm >= lp_norm / factor`` (and never above ``lp_norm`` beyond rounding)."""
    fields = ("index", "p", "q", "norm", "dual", "ratio", "pass")
    rows = []
    opts = cfg.options()
    for i in range(cfg.count(200)):
        _, _, mu, a, _ = _lp_sample(cfg, "duality", i)
        for p, q in HOLDER_EXPONENTS:
            n = lp_norm(a, p, q, mu)
            d = lp_dual_norm(a, p, q, mu, opts).value
            r = _safe_div(d, n)
            rows.append({"index": i, "p": p, "q": q, "norm": n, "dual": d, "ratio": r,
                         "pass": int(n / factor <= d <= n * (1 + 1e-9))})
    summary = {"samples": cfg.count(200), "factor": factor, **_band(r["ratio"] for r in rows)}
    return SuiteResult("duality", all(r["pass"] for r in rows), summary, fields, rows)


def _sparse_row(kind, index, b, mu, C, expect_feasible, tol=1e-9):
    res = cond.sparse_extract(b, mu, C)
    feasible = not isinstance(res, cond.Infeasible)
    worst = math.nan
    if feasible:
        got = res.masses(mu)
        need = b * mu.cube_mass / C
        worst = float(np.max(np.where(need > 0, (need - got) / np.where(need > 0, need, 1.0), 0.0)))
        ok = expect_feasible and worst <= tol
    else:
        ok = not expect_feasible
    return {"kind": kind, "index": index, "C": C, "feasible": int(feasible), "expected": int(expect_feasible),
            "max_shortfall": worst, "pass": int(ok)}


def tight_sparse_fixture():
    """``b = 1/2`` on the root and the left child; uniform unit leaves on a depth-one tree."""
    tree = build_tree(1, 1)
    mu = Measure(tree, [1.0, 1.0])
    b = indicator(tree, [tree.root, tree.cube(1, 0)], 0.5)
    return b, mu


def suite_sparse(cfg: SuiteConfig) -> SuiteResult:
    """Carleson families are sparse at their Carleson constant; the tight fixture fails below it."""
    fields = ("kind", "index", "C", "feasible", "expected", "max_shortfall", "pass")
    rows = []
    for i in range(cfg.count(100)):
        rng = _rng(cfg, "sparse", i)
        tree = build_tree(cfg.dimension, int(rng.choice(cfg.depths)))
        mu = _random_measure(rng, tree)
        b = _random_family(rng, tree)
        C = cond.carleson_norm(b, mu) * (1 + 1e-9)
        if C == 0:
            continue
        rows.append(_sparse_row("random", i, b, mu, C, True))
    b, mu = tight_sparse_fixture()
    C = cond.carleson_norm(b, mu)
    rows.append(_sparse_row("tight", 0, b, mu, C * (1 + 1e-9), True))
    rows.append(_sparse_row("tight", 1, b, mu, 0.8 * C, False))
    summary = {"families": sum(r["kind"] == "random" for r in rows), "tight_carleson": C}
    return SuiteResult("sparse", all(r["pass"] for r in rows), summary, fields, rows)


def suite_multiplier(cfg: SuiteConfig, factor: float = 16.0, fixtures: int = 10) -> SuiteResult:
    """Multiplier test with ``m = sigma/omega`` equals the Fujii–Wilson characteristic;
    the optimized family-form constant stays within ``factor`` of it."""
    fields = ("kind", "index", "depth", "multiplier", "reference", "ratio", "pass")
    rows = []
    opts = cfg.options(max_iters=60)
    for i in range(cfg.count(100)):
        rng = _rng(cfg, "multiplier", i)
        tree = build_tree(cfg.dimension, int(rng.choice(cfg.depths)))
        sigma, omega = _random_measure(rng, tree), _random_measure(rng, tree)
        fw = cond.fw_characteristic(sigma, omega)
        mt = cond.multiplier_test(cond.mass_ratio(sigma, omega), sigma, omega)
        rows.append({"kind": "fw_identity", "index": i, "depth": tree.depth, "multiplier": mt, "reference": fw,
                     "ratio": _safe_div(mt, fw), "pass": int(mt == fw)})
        if i < fixtures:
            m = _random_family(rng, tree)
            c1 = cond.multiplier_test(m, sigma, omega)
            c2 = cond.multiplier_constant_estimate(m, sigma, omega, opts).value
            r = _safe_div(c2, c1)
            rows.append({"kind": "family_form", "index": i, "depth": tree.depth, "multiplier": c2, "reference": c1,
                         "ratio": r, "pass": int(c1 == c2 == 0 or 1 / factor <= r <= factor)})
    summary = {
        "instances": cfg.count(100), "factor": factor,
        **_band(r["ratio"] for r in rows if r["kind"] == "family_form"),
    }
    return SuiteResult("multiplier", all(r["pass"] for r in rows), summary, fields, rows)


def suite_equivalent_expressions(cfg: SuiteConfig, bound: float = 32.0) -> SuiteResult:
    """Single-cube families give ``e1 = e2 = e3``; random families at ``p = 2`` stay within ``bound``."""
    fields = ("kind", "index", "e1", "e2", "e3", "max_pair_ratio", "pass")
    rows = []
    for i, c in enumerate((0.5, 1.0, 3.0)):
        tree = build_tree(cfg.dimension, 2)
        mu = Measure(tree, np.arange(1.0, tree.n_leaves + 1))
        e = cond.equivalent_expressions(indicator(tree, [tree.root], c), 2.0, mu)
        rows.append({"kind": "single_cube", "index": i, "e1": e.e1, "e2": e.e2, "e3": e.e3,
                     "max_pair_ratio": max(e) / min(e), "pass": int(e.e1 == e.e2 == e.e3)})
    for i in range(cfg.count(200)):
        rng = _rng(cfg, "equivalent-expressions", i)
        tree = build_tree(cfg.dimension, int(rng.choice(cfg.depths)))
        mu = _random_measure(rng, tree)
        a = _random_family(rng, tree)
        if not a.any():
            a[tree.root] = 1.0
        e = cond.equivalent_expressions(a, 2.0, mu)
        r = max(e) / min(e) if min(e) > 0 else (1.0 if max(e) == 0 else math.inf)
        rows.append({"kind": "random", "index": i, "e1": e.e1, "e2": e.e2, "e3": e.e3,
                     "max_pair_ratio": r, "pass": int(r <= bound)})
    summary = {"instances": cfg.count(200), "bound": bound,
               "max_pair_ratio": max(r["max_pair_ratio"] for r in rows if r["kind"] == "random")}
    return SuiteResult("equivalent-expressions", all(r["pass"] for r in rows), summary, fields, rows)


def suite_hl(cfg: SuiteConfig) -> SuiteResult:
    """Dyadic Hardy–Littlewood inequality with constant ``p'``."""
    fields = ("index", "p", "lhs", "rhs", "ratio_to_pprime", "pass")
    rows = []
    for i in range(cfg.count(500)):
        rng = _rng(cfg, "hl", i)
        tree = build_tree(cfg.dimension, int(rng.choice(cfg.depths)))
        mu = _random_measure(rng, tree)
        f = rng.exponential(size=tree.n_leaves) * (rng.random(tree.n_leaves) < rng.uniform(0.2, 1.0))
        if not f.any():
            f[int(rng.integers(tree.n_leaves))] = 1.0
        for p in (1.5, 2.0, 4.0):
            lhs = lebesgue_norm(hl_maximal(f, mu), p, mu)
            rhs = conjugate(p) * lebesgue_norm(f, p, mu)
            rows.append({"index": i, "p": p, "lhs": lhs, "rhs": rhs, "ratio_to_pprime": _safe_div(lhs, rhs),
                         "pass": int(lhs <= rhs)})
    summary = {"samples": cfg.count(500), "max_ratio_to_pprime": max(r["ratio_to_pprime"] for r in rows)}
    return SuiteResult("hl", all(r["pass"] for r in rows), summary, fields, rows)


SUITES: dict[str, Callable[[SuiteConfig], SuiteResult]] = {
    "anchor": suite_anchor,
    "oracle": suite_oracle,
    "maximal-scale": suite_maximal_scale,
    "a-infinity": suite_a_infinity,
    "maximal-pair": suite_maximal_pair,
    "wolff": suite_wolff,
    "holder-direction": suite_holder_direction,
    "duality": suite_duality,
    "sparse": suite_sparse,
    "multiplier": suite_multiplier,
    "equivalent-expressions": suite_equivalent_expressions,
    "hl": suite_hl,
}
SUITE_IDS = {name: i for i, name in enumerate(SUITES)}


class UnknownSuiteError(KeyError):
    pass


def default_out_dir() -> Path | None:
    env = os.environ.get(OUT_DIR_ENV)
    return Path(env) if env else None


def check(name: str, cfg: SuiteConfig | None = None) -> SuiteResult:
    """Run suite ``name``; with an output directory, write ``<name>.csv`` and ``<name>.json``."""
    if name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    cfg = cfg or SuiteConfig()
    result = SUITES[name](cfg)
    out = Path(cfg.out_dir) if cfg.out_dir else default_out_dir()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(result.csv())
        payload = {"suite": name, "passed": result.passed, "summary": result.summary, "config": _config_dict(cfg)}
        (out / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    logger.info(result.summary_line())
    return result


def _config_dict(cfg):
    d = dict(cfg.__dict__)
    d["depths"] = list(d["depths"])
    d.pop("out_dir", None)
    return d
