"""Built-in submanifolds of R^8 used by the report runner and the test suite."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np
import sympy as sp

from ..cayley import AmbientStructure
from ..subman import Chart, frames_at, graph_chart

# internal indices: 0 -> e, i + 1 -> e_i
CAYLEY_PLANE = (0, 1, 2, 4)   # span{e, e0, e1, e3}
Q4 = (3, 5, 6, 7)             # span{e2, e4, e5, e6}

EXAMPLE_NAMES = ("plane", "graph", "s3xs3", "s6", "s6_tilted", "ellipsoid7",
                 "helicoid_r3_q4", "minimal_r4_q4", "conformal_slice")

DESCRIPTIONS = {
    "plane": "totally geodesic R^6 = span{e1..e6} in flat R^8",
    "graph": "random polynomial graph u -> (g1(u), g2(u), u) over R^6",
    "s3xs3": "product of unit spheres in span{e,e0,e1,e3} and span{e2,e4,e5,e6}",
    "s6": "unit sphere in Im O = span{e0..e6} (hemisphere chart)",
    "s6_tilted": "unit sphere in span{e,e0..e5} (hemisphere chart)",
    "ellipsoid7": "ellipsoid hypersurface of Im O (hemisphere chart)",
    "helicoid_r3_q4": "helicoid in span{e0,e1,e3} times the Cayley plane Q4",
    "minimal_r4_q4": "minimal surface in span{e,e0,e1,e3} with curved normal bundle, times Q4",
    "conformal_slice": "coordinate 6-plane containing grad f in the conformal ambient f = 0.1 x0",
}


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    sigma: int = 1
    gamma: float = 0.0
    grid: int = 3
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in EXAMPLE_NAMES:
            raise ValueError(f"unknown example {self.name!r}; choose from {', '.join(EXAMPLE_NAMES)}")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.grid < 1:
            raise ValueError("grid size must be at least 1")


@dataclass(frozen=True, eq=False)
class Example:
    spec: ExampleSpec
    chart: Chart
    ambient: AmbientStructure
    gamma: Callable[[np.ndarray], float]

    def sample_points(self) -> list[np.ndarray]:
        """N x N grid over the first two coordinates, remaining ones from the seeded RNG."""
        lo, hi = self.chart.lower, self.chart.upper
        n = self.spec.grid
        rng = np.random.default_rng(self.spec.seed)
        if n == 1:
            axes = [np.array([(lo[k] + hi[k]) / 2]) for k in range(2)]
        else:
            axes = [np.linspace(lo[k], hi[k], n) for k in range(2)]
        pts = []
        for a in axes[0]:
            for b in axes[1]:
                rest = rng.uniform(lo[2:], hi[2:])
                pts.append(np.concatenate([[a, b], rest]))
        return pts


def _embed(values: Mapping[int, sp.Expr]) -> list[sp.Expr]:
    out = [sp.Integer(0)] * 8
    for k, v in values.items():
        out[k] = v
    return out


def _s3(a, b, c):
    return [sp.cos(a), sp.sin(a) * sp.cos(b), sp.sin(a) * sp.sin(b) * sp.cos(c),
            sp.sin(a) * sp.sin(b) * sp.sin(c)]


def _orient(build: Callable[[bool], Chart]) -> Chart:
    """Pick the coordinate order that makes (T, N1, N2) positively oriented."""
    chart = build(False)
    try:
        frames_at(chart, (chart.lower + chart.upper) / 2)
        return chart
    except ValueError:
        return build(True)


def s3xs3_chart(margin: float = 0.3) -> Chart:
    syms = sp.symbols("a1 b1 c1 a2 b2 c2", real=True)

    def build(swap: bool) -> Chart:
        a1, b1, c1, a2, b2, c2 = syms
        p1, p2 = _s3(a1, b1, c1), _s3(a2, b2, c2)
        exprs = _embed({**dict(zip(CAYLEY_PLANE, p1)), **dict(zip(Q4, p2))})
        normals = [_embed(dict(zip(CAYLEY_PLANE, p1))), _embed(dict(zip(Q4, p2)))]
        order = (syms[1], syms[0], *syms[2:]) if swap else syms
        lo = [margin, margin, -np.pi + margin] * 2
        hi = [np.pi - margin, np.pi - margin, np.pi - margin] * 2
        return Chart.from_sympy("s3xs3", exprs, order, lo, hi, normals)

    return _orient(build)


def plane_chart() -> Chart:
    syms = sp.symbols("u0:6", real=True)
    return Chart.from_sympy("plane", _embed({k + 2: s for k, s in enumerate(syms)}), syms,
                            [-1.0] * 6, [1.0] * 6)


def hemisphere_chart(name: str, axis: int, tangent: tuple[int, ...], semi_axes=None,
                     box: float = 0.35) -> Chart:
    """Graph x_axis = c0 sqrt(1 - sum (u_k / c_k)^2) over the other six coordinates."""
    syms = sp.symbols("u0:6", real=True)
    c = [1.0] * 7 if semi_axes is None else [float(x) for x in semi_axes]
    if len(c) != 7 or min(c) <= 0:
        raise ValueError("need seven positive semi-axes")
    height = c[0] * sp.sqrt(1 - sum((s / ck) ** 2 for s, ck in zip(syms, c[1:])))
    exprs = _embed({axis: height, **{t: s for t, s in zip(tangent, syms)}})
    lo = [-box * ck for ck in c[1:]]
    hi = [box * ck for ck in c[1:]]
    return Chart.from_sympy(name, exprs, syms, lo, hi)


def helicoid_chart(pitch: float = 1.0) -> Chart:
    syms = sp.symbols("u v q0:4", real=True)

    def build(swap: bool) -> Chart:
        u, v, *q = syms
        c = sp.Float(pitch)
        surf = {1: c * sp.sinh(u) * sp.cos(v), 2: c * sp.sinh(u) * sp.sin(v), 4: c * v}
        exprs = _embed({**surf, **dict(zip(Q4, q))})
        n1 = _embed({1: -sp.sin(v) / sp.cosh(u), 2: sp.cos(v) / sp.cosh(u),
                     4: -sp.sinh(u) / sp.cosh(u)})
        n2 = _embed({0: sp.Integer(1)})
        order = (u, v, q[1], q[0], q[2], q[3]) if swap else syms
        return Chart.from_sympy("helicoid_r3_q4", exprs, order, [-1, -1.5, -1, -1, -1, -1],
                                [1, 1.5, 1, 1, 1, 1], [n1, n2])

    return _orient(build)


def minimal_surface_chart() -> Chart:
    """Re of the null curve F = (z + z^4/4, i(z - z^4/4), z^2/2 - z^3/3, -i(z^2/2 + z^3/3))."""
    x, y, *q = sp.symbols("x y q0:4", real=True)
    z = x + sp.I * y
    F = [z + z ** 4 / 4, sp.I * (z - z ** 4 / 4), z ** 2 / 2 - z ** 3 / 3,
         -sp.I * (z ** 2 / 2 + z ** 3 / 3)]
    surf = [sp.expand(sp.re(sp.expand(w))) for w in F]
    exprs = _embed({**dict(zip(CAYLEY_PLANE, surf)), **dict(zip(Q4, q))})
    return Chart.from_sympy("minimal_r4_q4", exprs, (x, y, *q), [0.2, 0.2, -1, -1, -1, -1],
                            [0.7, 0.7, 1, 1, 1, 1])


def conformal_slice_chart() -> Chart:
    syms = sp.symbols("u0:6", real=True)
    return Chart.from_sympy("conformal_slice", _embed({k + 1: s for k, s in enumerate(syms)}),
                            syms, [-1.0] * 6, [1.0] * 6)


def random_graph_chart(seed: int = 0, scale: float = 0.3, degree: int = 3) -> Chart:
    """Polynomial graph with random coefficients on monomials of degree 2..``degree``."""
    rng = np.random.default_rng(seed)
    monos = [e for e in _exponents(6, degree) if sum(e) >= 2]
    picks = rng.choice(len(monos), size=min(8, len(monos)), replace=False)
    g1 = {monos[i]: float(scale * rng.normal()) for i in picks[:4]}
    g2 = {monos[i]: float(scale * rng.normal()) for i in picks[4:]}
    return graph_chart(g1, g2, -0.5, 0.5, name=f"graph[{seed}]")


def _exponents(n: int, degree: int) -> list[tuple[int, ...]]:
    if n == 0:
        return [()]
    return [(k, *rest) for k in range(degree + 1) for rest in _exponents(n - 1, degree - k)]


def build_example(spec: ExampleSpec) -> Example:
    """Chart, ambient structure and phase field for a named example."""
    amb = AmbientStructure.flat(spec.sigma)
    p = dict(spec.params)
    if spec.name == "plane":
        chart = plane_chart()
    elif spec.name == "graph":
        chart = random_graph_chart(int(p.get("graph_seed", spec.seed)), float(p.get("scale", 0.3)))
    elif spec.name == "s3xs3":
        chart = s3xs3_chart()
    elif spec.name == "s6":
        chart = hemisphere_chart("s6", 1, (2, 3, 4, 5, 6, 7))
    elif spec.name == "s6_tilted":
        chart = hemisphere_chart("s6_tilted", 0, (1, 2, 3, 4, 5, 6))
    elif spec.name == "ellipsoid7":
        axes = p.get("semi_axes", (1.0, 1.3, 0.8, 1.1, 0.9, 1.2, 0.7))
        chart = hemisphere_chart("ellipsoid7", 1, (2, 3, 4, 5, 6, 7), axes)
    elif spec.name == "helicoid_r3_q4":
        chart = helicoid_chart(float(p.get("pitch", 1.0)))
    elif spec.name == "minimal_r4_q4":
        chart = minimal_surface_chart()
    else:
        chart = conformal_slice_chart()
        amb = AmbientStructure.conformal_linear(0.1 * np.eye(8)[1], spec.sigma)
    g0, slope = float(spec.gamma), float(p.get("gamma_slope", 0.0))
    if slope:
        gamma = lambda u, g0=g0, k=slope: g0 + k * float(u[0])
    else:
        gamma = lambda u, g0=g0: g0
    return Example(spec, chart, amb, gamma)


__all__ = ["DESCRIPTIONS", "EXAMPLE_NAMES", "Example", "ExampleSpec", "build_example",
           "conformal_slice_chart", "helicoid_chart", "hemisphere_chart", "minimal_surface_chart",
           "plane_chart", "random_graph_chart", "s3xs3_chart"]
