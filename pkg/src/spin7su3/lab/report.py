"""Grid sweeps over a built-in example producing JSON-ready classification reports."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..forms import central_difference
from ..su3 import W_LABELS
from ..subman import (ChartError, FDConfig, closedness_check, fd_torsion, fundamental_data,
                      table_match, torsion_via_rraa)
from .examples import Example, ExampleSpec, build_example

# thresholds for the consistency checks attached to every sample point
CHECK_TOLERANCES = {
    "trace_identities": 1e-6,
    "dual_path_r": 1e-5,
    "theta6_paths": 1e-6,
    "eta_paths": 1e-5,
    "table_mismatches": 0.5,
}


@dataclass(frozen=True)
class ReportConfig:
    fd: FDConfig = FDConfig()
    tol: float | None = None          # class-detection threshold, scale-aware when None
    table_tol: float = 1e-6
    fd_cross_check: bool = True


class PointFailure(RuntimeError):
    """Numerical failure at a sample point; carries the chart coordinates."""

    def __init__(self, u: np.ndarray, cause: Exception):
        self.u = [float(x) for x in u]
        super().__init__(f"at u={self.u}: {type(cause).__name__}: {cause}")


@dataclass
class Report:
    example: str
    sigma: int
    gamma: float
    grid: int
    seed: int
    points: list[dict[str, Any]] = field(default_factory=list)
    aggregate: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.aggregate.get("checks_passed", False))

    def as_dict(self) -> dict[str, Any]:
        return {"example": self.example, "sigma": self.sigma, "gamma": self.gamma,
                "grid": self.grid, "seed": self.seed,
                "label": self.aggregate.get("label", []),
                "half_flat": self.aggregate.get("half_flat", False),
                "points": self.points, "aggregate": self.aggregate}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


_PI_TOKEN = re.compile(r"^([+-]?)(\d*)\s*\*?\s*pi(?:\s*/\s*(\d+))?$")


def parse_gamma(text: str | float) -> float:
    """Numeric literal or a multiple of pi such as "pi/4", "-3pi/4"."""
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip().lower()
    m = _PI_TOKEN.match(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * num * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"cannot parse gamma {text!r}; use a number or k*pi/m") from None


def _clean(x: float) -> float:
    return float(np.round(x, 15))


def _dgamma(ex: Example, geo, h: float) -> np.ndarray:
    du = central_difference(lambda v: np.array(ex.gamma(v)), geo.u, h, 4)
    return geo.covector_to_frame(np.asarray(du, float).reshape(-1))


def analyze_point(ex: Example, u: np.ndarray, cfg: ReportConfig = ReportConfig()) -> dict[str, Any]:
    """Torsion, cross-checks, closedness and table rows at one chart point."""
    amb = ex.ambient
    geo = fundamental_data(ex.chart, u, amb, cfg.fd)
    g = float(ex.gamma(geo.u))
    dg = _dgamma(ex, geo, cfg.fd.h)
    st = torsion_via_rraa(geo, amb, g, dg, tol=cfg.tol)
    rep = st.report
    residuals = {
        "trace_identities": max(st.trace_residuals),
        "eta_two_normals": float(np.abs(st.eta - st.eta_alt).max()),
        "theta6_paths": float(np.abs(st.theta6 - rep.theta6.coeffs).max()),
        "mean_curvature": abs(geo.h1) + abs(geo.h2),
        "normal_connection": float(np.linalg.norm(geo.a)),
    }
    residuals.update({f"algebraic_{k}": v for k, v in rep.residuals.items()})
    if cfg.fd_cross_check:
        fdt = fd_torsion(ex.chart, geo.u, st.su3, geo, amb, ex.gamma, cfg.fd)
        residuals["dual_path_r"] = float(np.abs(st.r - fdt.r).max())
        residuals["theta6_paths"] = max(residuals["theta6_paths"],
                                        float(np.abs(st.theta6 - fdt.theta6).max()))
        residuals["eta_paths"] = float(np.abs(st.eta - fdt.eta).max())
        residuals["fd_dpsi_plus"] = fdt.dpsi_plus.norm()
        residuals["fd_dpsi_minus"] = fdt.dpsi_minus.norm()
        residuals["fd_domega"] = fdt.domega.norm()
        residuals["fd_theta6"] = float(np.linalg.norm(fdt.theta6))
    clos = closedness_check(geo, amb)
    residuals["closedness_N1"], residuals["closedness_N2"] = (float(x) for x in clos["residuals"])
    tm = table_match(st, geo, amb, cfg.table_tol)
    residuals["table_mismatches"] = float(len(tm.mismatches))
    checks = {k: bool(residuals[k] <= t) for k, t in CHECK_TOLERANCES.items() if k in residuals}
    return {
        "u": [_clean(x) for x in geo.u],
        "gamma": _clean(g),
        "class": list(rep.label),
        "ambient_class": tm.ambient_class,
        "table": tm.table,
        "half_flat": bool(rep.half_flat),
        "predicates": {k: bool(v) for k, v in sorted(rep.predicates.items())},
        "closed": bool(clos["closed"]),
        "norms": {k: _clean(v) for k, v in sorted(rep.norms.items())},
        "residuals": {k: _clean(v) for k, v in sorted(residuals.items())},
        "checks": checks,
        "table_rows": {row.row_id: {"residual": _clean(row.residual), "satisfied": bool(row.satisfied),
                                    "contained": bool(row.contained), "consistent": bool(row.consistent)}
                       for row in tm.rows},
    }


def aggregate_points(points: list[dict[str, Any]]) -> dict[str, Any]:
    """Extrema and means of the per-point values plus the consensus label."""
    keys = sorted(set().union(*(p["residuals"] for p in points)))
    resid = {}
    for k in keys:
        vals = [p["residuals"][k] for p in points if k in p["residuals"]]
        resid[k] = {"max": max(vals), "min": min(vals), "mean": _clean(float(np.mean(vals)))}
    norm_keys = sorted(points[0]["norms"])
    norms = {k: {"max": max(p["norms"][k] for p in points),
                 "min": min(p["norms"][k] for p in points)} for k in norm_keys}
    seen = set().union(*(p["class"] for p in points))
    labels = {tuple(p["class"]) for p in points}
    preds = sorted(points[0]["predicates"])
    checks = sorted(set().union(*(p["checks"] for p in points)))
    return {
        "label": [w for w in W_LABELS if w in seen],
        "labels_agree": len(labels) == 1,
        "half_flat": all(p["half_flat"] for p in points),
        "closed": all(p["closed"] for p in points),
        "predicates": {k: all(p["predicates"][k] for p in points) for k in preds},
        "ambient_classes": sorted({p["ambient_class"] for p in points}),
        "residuals": resid,
        "norms": norms,
        "checks": {k: all(p["checks"].get(k, True) for p in points) for k in checks},
        "checks_passed": all(all(p["checks"].values()) for p in points),
        "table_mismatches": int(sum(p["residuals"]["table_mismatches"] for p in points)),
        "n_points": len(points),
    }


def run_report(spec: ExampleSpec, cfg: ReportConfig = ReportConfig()) -> Report:
    """Sweep the example grid and assemble a deterministic report."""
    ex = build_example(spec)
    points = []
    for u in ex.sample_points():
        try:
            points.append(analyze_point(ex, u, cfg))
        except (ChartError, ValueError, np.linalg.LinAlgError) as err:
            raise PointFailure(u, err) from err
    return Report(spec.name, spec.sigma, _clean(spec.gamma), spec.grid, spec.seed, points,
                  aggregate_points(points))


REPORT_SCHEMA = {
    "type": "object",
    "required": ["example", "sigma", "gamma", "points", "aggregate"],
    "properties": {
        "example": {"type": "string"},
        "sigma": {"enum": [1, -1]},
        "gamma": {"type": "number"},
        "label": {"type": "array", "items": {"enum": list(W_LABELS)}},
        "half_flat": {"type": "boolean"},
        "points": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["u", "class", "norms", "residuals", "table_rows"],
                "properties": {
                    "u": {"type": "array", "items": {"type": "number"}, "minItems": 6, "maxItems": 6},
                    "class": {"type": "array", "items": {"enum": list(W_LABELS)}},
                    "norms": {"type": "object", "additionalProperties": {"type": "number"}},
                    "residuals": {"type": "object", "additionalProperties": {"type": "number"}},
                    "table_rows": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["residual", "satisfied", "contained"],
                        },
                    },
                },
            },
        },
        "aggregate": {"type": "object", "required": ["label", "residuals", "checks_passed"]},
    },
}


__all__ = ["CHECK_TOLERANCES", "PointFailure", "REPORT_SCHEMA", "Report", "ReportConfig",
           "aggregate_points", "analyze_point", "parse_gamma", "run_report"]
