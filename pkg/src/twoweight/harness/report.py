"""Per-instance reports: every condition, every norm estimate, all ratios."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import asdict, dataclass, field

from .. import conditions as cond
from ..estimate import estimate_norm_maximal, estimate_norm_summation, maximal_pair_norms
from ..optimize import OptimizerOptions
from ..tree import Instance
from .instances import digest, instance_to_dict

# orders-of-magnitude band used for the ordering checks in a report
REPORT_BAND = 100.0

# fixed report order; values not defined for the exponents are None
VALUE_NAMES = (
    "T", "M", "n1", "n2", "I", "I_star", "S", "N", "V1", "V2",
    "fw_sigma_omega", "fw_omega_sigma", "dlbo",
)


def _wolff(inst):
    return cond.wolff_condition(inst.lam, inst.sigma, inst.omega, inst.p, inst.q) if inst.q > 1 else (None, None)


def _scale(inst, eps):
    return cond.maximal_condition_values(inst.lam, inst.sigma, inst.omega, inst.p, inst.q, eps)


def _pair(inst, opts):
    if inst.q > 1:
        return maximal_pair_norms(inst.lam, inst.sigma, inst.omega, inst.p, inst.q, opts)
    return (None, None)


# name -> (group, index); a group is computed once per evaluation
_GROUPS = {
    "T": lambda inst, opts, eps: (estimate_norm_summation(inst, opts).value,),
    "M": lambda inst, opts, eps: (estimate_norm_maximal(inst, opts).value,),
    "pair": lambda inst, opts, eps: _pair(inst, opts),
    "I": lambda inst, opts, eps: (
        cond.integral_condition(inst.lam, inst.sigma, inst.omega, inst.p, inst.q),
        cond.integral_condition(inst.lam, inst.sigma, inst.omega, inst.p, inst.q, dual=True),
    ),
    "scale": lambda inst, opts, eps: tuple(_scale(inst, eps)),
    "wolff": lambda inst, opts, eps: tuple(_wolff(inst)),
    "fw": lambda inst, opts, eps: (
        cond.fw_characteristic(inst.sigma, inst.omega),
        cond.fw_characteristic(inst.omega, inst.sigma),
    ),
    "dlbo": lambda inst, opts, eps: (cond.dlbo_ratio(inst.lam, inst.tree),),
}
_LOCATION = {
    "T": ("T", 0), "M": ("M", 0), "n1": ("pair", 0), "n2": ("pair", 1),
    "I": ("I", 0), "I_star": ("I", 1), "S": ("scale", 0), "N": ("scale", 1),
    "V1": ("wolff", 0), "V2": ("wolff", 1),
    "fw_sigma_omega": ("fw", 0), "fw_omega_sigma": ("fw", 1), "dlbo": ("dlbo", 0),
}
RATIO_NAMES = tuple(f"{a}_over_{b}" for a, b in itertools.combinations(VALUE_NAMES, 2))


def compute_values(inst: Instance, names, opts: OptimizerOptions | None = None, eps: float | None = None) -> dict:
    """Only the requested values (``eps`` defaults to ``q / 4``)."""
    opts = opts or OptimizerOptions()
    eps = inst.q / 4 if eps is None else eps
    cache, out = {}, {}
    for name in names:
        if name not in _LOCATION:
            raise KeyError(f"unknown value {name!r}; known: {', '.join(VALUE_NAMES)}")
        group, idx = _LOCATION[name]
        if group not in cache:
            cache[group] = _GROUPS[group](inst, opts, eps)
        v = cache[group][idx]
        out[name] = None if v is None else float(v)
    return out


def ratio(a, b):
    """``a / b``; ``None`` when undefined (missing value or zero denominator)."""
    if a is None or b is None or b == 0:
        return None
    return a / b


def ratio_operands(name: str) -> tuple[str, str]:
    if name not in RATIO_NAMES:
        raise KeyError(f"unknown ratio {name!r}")
    a, b = name.split("_over_")
    return a, b


def ordering_checks(values: dict, band: float = REPORT_BAND) -> dict:
    """Comparabilities that should hold up to moderate constants; vacuous on zeros."""

    def within(a, b):
        va, vb = values.get(a), values.get(b)
        if va is None or vb is None:
            return True
        return va <= band * vb and vb <= band * va

    def below(a, b):
        va, vb = values.get(a), values.get(b)
        if va is None or vb is None:
            return True
        return va <= band * vb

    checks = {
        "N_below_M": below("N", "M"),
        "M_below_S": below("M", "S"),
        "M_below_T": below("M", "T"),
    }
    if values.get("n1") is not None:
        t, pair = values["T"], values["n1"] + values["n2"]
        checks["T_vs_pair"] = (t <= band * pair and pair <= band * t) if t is not None else True
    if values.get("V1") is not None:
        v = max(values["V1"], values["V2"])
        t = values["T"]
        checks["T_vs_wolff"] = t is None or (t <= band * v and v <= band * t)
    if values.get("fw_sigma_omega") is not None and values["fw_sigma_omega"] <= 1 + 1e-9:
        checks["T_vs_I"] = within("T", "I")
    return checks


@dataclass
class Report:
    digest: str
    p: float
    q: float
    eps: float
    values: dict
    ratios: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    instance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls(**json.loads(text))

    def csv_rows(self) -> list[dict]:
        rows = [{"digest": self.digest, "kind": "value", "name": k, "value": self.values[k]} for k in VALUE_NAMES]
        rows += [{"digest": self.digest, "kind": "ratio", "name": k, "value": self.ratios[k]} for k in RATIO_NAMES]
        rows += [{"digest": self.digest, "kind": "check", "name": k, "value": int(v)} for k, v in sorted(self.checks.items())]
        return rows


def evaluate(inst: Instance, opts: OptimizerOptions | None = None, eps: float | None = None) -> Report:
    """Full report for one instance."""
    eps = inst.q / 4 if eps is None else float(eps)
    values = compute_values(inst, VALUE_NAMES, opts, eps)
    ratios = {name: ratio(values[a], values[b]) for name, (a, b) in zip(RATIO_NAMES, map(ratio_operands, RATIO_NAMES))}
    return Report(digest(inst), inst.p, inst.q, eps, values, ratios, ordering_checks(values), instance_to_dict(inst))


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: list[dict], fields, handle=None) -> str:
    """Rows to CSV text (deterministic: fixed column order, ``repr`` floats)."""
    buf = handle if handle is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([format_value(row.get(f)) for f in fields])
    return buf.getvalue() if handle is None else ""
