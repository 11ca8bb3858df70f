"""Six-dimensional submanifolds of flat and conformally flat Spin(7) spaces.

A :class:`Chart` is an immersion ``u -> x(u)`` of a box in R^6 into R^8.
Pointwise geometry is expressed in three bases:

* coordinates of R^8 (``*_coord``), where the ambient metric is ``exp(2f) I``;
* Cayley-frame components (``*c``), orthonormal for the ambient metric;
* the orthonormal tangent frame ``t_a`` from Gram-Schmidt on the chart
  derivatives, in which all 6-dimensional tensors are returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy as sp

from .cayley import (AmbientStructure, RbarTensor, cayley_form, dphi_from_rbar, endo_action,
                     fernandez_class, triple_cross, xi_matrix)
from .forms import (Form, FormError, Gram, central_difference, fd_exterior_derivative, hodge,
                    interior, pullback, wedge)
from .su3 import (W_LABELS, Su3Point, Su3TorsionReport, classify_su3, decompose_r, eta_from_dpsi, nijenhuis,
                  r_from_dforms, r_map, theta6_from_r)

Vector = np.ndarray


class ChartError(ValueError):
    """Immersion or frame construction failed."""


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference settings: step and stencil order for each use."""

    h: float = 5e-4
    order: int = 4
    frame_h: float = 1e-3
    frame_order: int = 4


@dataclass(frozen=True, eq=False)
class Chart:
    """Immersion of a box in R^6 into R^8 with optional analytic jets and normals."""

    name: str
    map: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    jet1: Callable[[np.ndarray], np.ndarray] | None = None
    jet2: Callable[[np.ndarray], np.ndarray] | None = None
    normal_frame: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    h2: float = 1e-4

    def point(self, u) -> np.ndarray:
        return np.asarray(self.map(np.asarray(u, float)), dtype=float)

    def d1(self, u) -> np.ndarray:
        u = np.asarray(u, float)
        if self.jet1 is not None:
            return np.asarray(self.jet1(u), dtype=float)
        return np.moveaxis(central_difference(self.point, u, self.h2, order=4), 0, 1)

    def d2(self, u) -> np.ndarray:
        u = np.asarray(u, float)
        if self.jet2 is not None:
            return np.asarray(self.jet2(u), dtype=float)
        if self.jet1 is not None:
            d = central_difference(lambda v: np.asarray(self.jet1(v), float), u, self.h2, order=4)
            return np.moveaxis(d, 0, 2)
        raise ChartError(f"chart {self.name!r} has no first jet for second derivatives")

    def contains(self, u) -> bool:
        u = np.asarray(u, float)
        return bool(np.all(u >= self.lower) and np.all(u <= self.upper))

    @classmethod
    def from_sympy(cls, name: str, exprs: Sequence[sp.Expr], syms: Sequence[sp.Symbol],
                   lower, upper, normals: Sequence[Sequence[sp.Expr]] | None = None) -> Chart:
        """Chart with jets obtained by symbolic differentiation."""
        if len(exprs) != 8 or len(syms) != 6:
            raise ChartError("a chart needs 8 component expressions in 6 variables")
        X = sp.Matrix(exprs)
        D1 = X.jacobian(syms)
        D2 = [[[sp.diff(X[k], a, b) for b in syms] for a in syms] for k in range(8)]
        f0 = sp.lambdify([syms], list(X), "numpy")
        f1 = sp.lambdify([syms], D1.tolist(), "numpy")
        f2 = sp.lambdify([syms], D2, "numpy")
        nf = None
        if normals is not None:
            fn = sp.lambdify([syms], [list(n) for n in normals], "numpy")

            def nf(u, fn=fn):
                n1, n2 = np.asarray(_broadcast(fn(u)), dtype=float)
                return n1, n2
        return cls(name, lambda u: np.asarray(_broadcast(f0(u)), float),
                   np.asarray(lower, float), np.asarray(upper, float),
                   lambda u: np.asarray(_broadcast(f1(u)), float),
                   lambda u: np.asarray(_broadcast(f2(u)), float), nf)


def _broadcast(nested):
    """Lambdified constants come back as Python scalars; make arrays rectangular."""
    if isinstance(nested, (list, tuple)):
        return [_broadcast(x) for x in nested]
    return float(nested)


def graph_chart(g1: Mapping[tuple[int, ...], float], g2: Mapping[tuple[int, ...], float],
                lower=-0.5, upper=0.5, name: str = "graph") -> Chart:
    """Polynomial graph u -> (g1(u), g2(u), u) given monomial coefficient maps."""
    syms = sp.symbols("u0:6", real=True)

    def poly(coeffs):
        out = sp.Integer(0)
        for exps, c in coeffs.items():
            if len(exps) != 6 or any(e < 0 for e in exps):
                raise ChartError(f"bad monomial exponent {exps}")
            out += sp.Float(c) * sp.Mul(*[s ** e for s, e in zip(syms, exps)])
        return out

    exprs = [poly(g1), poly(g2), *syms]
    lo = np.full(6, lower, dtype=float) if np.isscalar(lower) else lower
    hi = np.full(6, upper, dtype=float) if np.isscalar(upper) else upper
    return Chart.from_sympy(name, exprs, syms, lo, hi)


# pointwise geometry -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointGeometry:
    u: np.ndarray
    p: np.ndarray
    R: np.ndarray          # jet1 = T_coord @ R, R upper triangular
    T_coord: np.ndarray    # 8x6, ambient-orthonormal tangent frame in coordinates
    Tc: np.ndarray         # same frame in Cayley components
    N1c: np.ndarray
    N2c: np.ndarray
    alpha1: np.ndarray | None = None
    alpha2: np.ndarray | None = None
    a: np.ndarray | None = None

    @property
    def h1(self) -> float:
        return float(np.trace(self.alpha1)) / 6.0

    @property
    def h2(self) -> float:
        return float(np.trace(self.alpha2)) / 6.0

    @property
    def Rinv(self) -> np.ndarray:
        return np.linalg.inv(self.R)

    def covector_to_frame(self, du: np.ndarray) -> np.ndarray:
        """Coordinate components of a 1-form on M -> tangent frame components."""
        return self.Rinv.T @ np.asarray(du, float)

    def form_to_frame(self, a: Form) -> Form:
        return pullback(self.Rinv, a)

    def shape_operator(self, j: int) -> np.ndarray:
        return self.alpha1 if j == 1 else self.alpha2

    def nabla_normal(self, j: int, x: np.ndarray) -> np.ndarray:
        """Ambient derivative of N_j along x (tangent-frame components), in Cayley components."""
        x = np.asarray(x, float)
        ax = float(self.a @ x)
        if j == 1:
            return -self.Tc @ (self.alpha1 @ x) + ax * self.N2c
        return -self.Tc @ (self.alpha2 @ x) - ax * self.N1c


def _ambient_or_flat(ambient: AmbientStructure | None) -> AmbientStructure:
    return AmbientStructure.flat() if ambient is None else ambient


def normal_frame_rule(Tc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic normals: N1 from the first usable axis, N2 completing a positive frame."""
    P = np.eye(8) - Tc @ Tc.T
    n1 = None
    for k in range(8):
        v = P[:, k]
        if np.linalg.norm(v) >= 1e-6:
            n1 = v / np.linalg.norm(v)
            break
    if n1 is None:
        raise ChartError("no axis projects onto the normal space")
    P2 = P - np.outer(n1, n1)
    k = int(np.argmax(np.linalg.norm(P2, axis=0)))
    n2 = P2[:, k] / np.linalg.norm(P2[:, k])
    if np.linalg.det(np.column_stack([Tc, n1, n2])) < 0:
        n2 = -n2
    return n1, n2


def frames_at(chart: Chart, u, ambient: AmbientStructure | None = None) -> PointGeometry:
    """Orthonormal tangent frame by Gram-Schmidt and the oriented normal pair."""
    amb = _ambient_or_flat(ambient)
    u = np.asarray(u, float)
    p = chart.point(u)
    D = chart.d1(u)
    G = amb.gram(p).matrix
    gram6 = D.T @ G @ D
    try:
        R = np.linalg.cholesky(gram6).T
    except np.linalg.LinAlgError as exc:
        raise ChartError(f"chart {chart.name!r} is not immersive at u={u.tolist()}") from exc
    if np.min(np.diag(R)) < 1e-9 * np.max(np.diag(R)):
        raise ChartError(f"chart {chart.name!r} is not immersive at u={u.tolist()}")
    T = np.linalg.solve(R.T, D.T).T
    B = amb.frame(p)
    Binv = np.linalg.inv(B)
    Tc = Binv @ T
    if chart.normal_frame is not None:
        n1, n2 = chart.normal_frame(u)
        n1c, n2c = Binv @ n1, Binv @ n2
        M = np.column_stack([Tc, n1c, n2c])
        if np.abs(M.T @ M - np.eye(8)).max() > 1e-8:
            raise ChartError(f"chart {chart.name!r} supplies non-orthonormal normals")
        if np.linalg.det(M) < 0:
            raise ChartError(f"chart {chart.name!r} supplies a negatively oriented normal frame")
    else:
        n1c, n2c = normal_frame_rule(Tc)
    return PointGeometry(u, p, R, T, Tc, n1c, n2c)


def _normals_coord(chart: Chart, amb: AmbientStructure, u) -> np.ndarray:
    geo = frames_at(chart, u, amb)
    B = amb.frame(geo.p)
    return np.stack([B @ geo.N1c, B @ geo.N2c])


def fundamental_data(chart: Chart, u, ambient: AmbientStructure | None = None,
                     fd: FDConfig = FDConfig()) -> PointGeometry:
    """Frames plus second fundamental forms alpha_j and normal connection a."""
    amb = _ambient_or_flat(ambient)
    geo = frames_at(chart, u, amb)
    p, D = geo.p, chart.d1(geo.u)
    G = amb.gram(p).matrix
    B = amb.frame(p)
    gam = amb.christoffel(p)
    hess = chart.d2(geo.u) + np.einsum("kij,ia,jb->kab", gam, D, D)
    n1, n2 = B @ geo.N1c, B @ geo.N2c
    Rinv = geo.Rinv
    a1 = Rinv.T @ np.einsum("kab,kl,l->ab", hess, G, n1) @ Rinv
    a2 = Rinv.T @ np.einsum("kab,kl,l->ab", hess, G, n2) @ Rinv
    dN = central_difference(lambda v: _normals_coord(chart, amb, v), geo.u, fd.frame_h,
                            fd.frame_order)
    a_coord = np.einsum("ck,kl,l->c", dN[:, 0, :], G, n2)
    return PointGeometry(geo.u, p, geo.R, geo.T_coord, geo.Tc, geo.N1c, geo.N2c,
                         (a1 + a1.T) / 2, (a2 + a2.T) / 2, Rinv.T @ a_coord)


# induced structures -------------------------------------------------------------

def J_matrix(Tc: np.ndarray, N1c: np.ndarray, N2c: np.ndarray, sigma: int) -> np.ndarray:
    """J[b, a] = <t_b, P(N1, N2, t_a)>."""
    phi = cayley_form(sigma)
    cols = [Tc.T @ triple_cross(phi, N1c, N2c, Tc[:, a]) for a in range(Tc.shape[1])]
    return np.column_stack(cols)


def induced_su3(geo: PointGeometry, sigma: int = 1, gamma: float = 0.0,
                validate: bool = True) -> Su3Point:
    """Induced SU(3)-structure in the orthonormal tangent frame."""
    phi = cayley_form(sigma).phi
    J = J_matrix(geo.Tc, geo.N1c, geo.N2c, sigma)
    a1 = pullback(geo.Tc, interior(geo.N1c, phi))
    a2 = pullback(geo.Tc, interior(geo.N2c, phi))
    c, s = np.cos(gamma), np.sin(gamma)
    su3 = Su3Point(Gram.identity(6), J, Form.from_tensor(J), c * a1 - s * sigma * a2,
                   s * a1 + c * sigma * a2, float(gamma))
    return su3.validate() if validate else su3


def rotated_normals(geo: PointGeometry, angle: float) -> PointGeometry:
    """N1' = cos N1 - sin N2, N2' = sin N1 + cos N2."""
    c, s = np.cos(angle), np.sin(angle)
    return PointGeometry(geo.u, geo.p, geo.R, geo.T_coord, geo.Tc, c * geo.N1c - s * geo.N2c,
                         s * geo.N1c + c * geo.N2c, geo.alpha1, geo.alpha2, geo.a)


# torsion from ambient data and the shape operator ------------------------------------------

def _rbar_blocks(rbar: RbarTensor, geo: PointGeometry, J: np.ndarray) -> dict[str, np.ndarray]:
    v = rbar.values
    T, n1, n2 = geo.Tc, geo.N1c, geo.N2c
    JT = T @ J
    return {
        "R1": np.einsum("xyz,xa,yb,z->ab", v, T, JT, n1),
        "R0": np.einsum("xyz,xa,yb,z->ab", v, T, T, n1),
        "n1_x_n1": np.einsum("xyz,x,ya,z->a", v, n1, T, n1),
        "n2_Jx_n1": np.einsum("xyz,x,ya,z->a", v, n2, JT, n1),
        "Jx_n2_n1": np.einsum("xyz,xa,y,z->a", v, JT, n2, n1),
        "n2_n2_n1": float(np.einsum("xyz,x,y,z->", v, n2, n2, n1)),
        "n1_n2_n1": float(np.einsum("xyz,x,y,z->", v, n1, n2, n1)),
        "tr_xx_n1": float(np.einsum("xyz,xa,ya,z->", v, T, T, n1)),
        "tr_xJx_n1": float(np.einsum("xyz,xa,ya,z->", v, T, JT, n1)),
    }


def r_via_shape(geo: PointGeometry, rbar: RbarTensor, sigma: int, gamma: float,
                J: np.ndarray) -> np.ndarray:
    """r(nabla omega) = cos g (s rbar(., J., N1) + s J_(2) a1 + a2)
                      - sin g (s rbar(., ., N1) - s a1 + J_(2) a2)."""
    b = _rbar_blocks(rbar, geo, J)
    j2 = lambda m: -m @ J
    a1, a2 = geo.alpha1, geo.alpha2
    return (np.cos(gamma) * (sigma * b["R1"] + sigma * j2(a1) + a2)
            - np.sin(gamma) * (sigma * b["R0"] - sigma * a1 + j2(a2)))


def theta6_via_shape(geo: PointGeometry, rbar: RbarTensor, theta8c: np.ndarray, sigma: int,
                     J: np.ndarray) -> np.ndarray:
    """theta^6 = 7/4 f*theta^8 + rbar(N1, ., N1) - s rbar(N2, J., N1) + s rbar(J., N2, N1)."""
    b = _rbar_blocks(rbar, geo, J)
    return (1.75 * geo.Tc.T @ theta8c + b["n1_x_n1"] - sigma * b["n2_Jx_n1"]
            + sigma * b["Jx_n2_n1"])


def ambient_nabla_phi(rbar: RbarTensor, sigma: int, x: np.ndarray) -> Form:
    """nabla_x Phi = -xi_x Phi, Cayley components."""
    return -endo_action(xi_matrix(rbar, x), cayley_form(sigma).phi)


def lie_restricted(geo: PointGeometry, j: int, rbar: RbarTensor, sigma: int) -> Form:
    """f*(L_{N_j} Phi) = f*(nabla_{N_j} Phi) + sum over slots of Phi(.., nabla_X N_j, ..)."""
    n = geo.N1c if j == 1 else geo.N2c
    phi_t = cayley_form(sigma).tensor
    first = pullback(geo.Tc, ambient_nabla_phi(rbar, sigma, n)).tensor()
    dN = np.column_stack([geo.nabla_normal(j, e) for e in np.eye(6)])  # 8x6
    return Form.from_tensor(first + _slot_sum(phi_t, dN, geo.Tc))


def _slot_sum(phi_t: np.ndarray, dN: np.ndarray, T: np.ndarray) -> np.ndarray:
    """sum_k Phi(t_a, .., dN t_k-slot, .., t_d)."""
    first = np.einsum("ijkl,ia,jb,kc,ld->abcd", phi_t, dN, T, T, T, optimize=True)
    # Phi is alternating, so every slot contributes the same antisymmetrised term
    return (first - first.transpose(1, 0, 2, 3) + first.transpose(1, 2, 0, 3)
            - first.transpose(1, 2, 3, 0))


@dataclass(frozen=True)
class ShapeTorsion:
    """Torsion of the induced SU(3)-structure computed from ambient data and alpha_j."""

    su3: Su3Point
    r: np.ndarray
    theta6: np.ndarray
    eta: np.ndarray
    eta_alt: np.ndarray
    trace_residuals: tuple[float, float]
    lie: tuple[Form, Form]
    report: Su3TorsionReport
    gamma: float = 0.0
    jdgamma: np.ndarray | None = None
    lie_stars: tuple[np.ndarray, np.ndarray] | None = None
    rbar: RbarTensor | None = None
    theta8c: np.ndarray | None = None


def torsion_via_rraa(geo: PointGeometry, ambient: AmbientStructure | None = None,
                     gamma: float = 0.0, dgamma: np.ndarray | None = None,
                     rbar: RbarTensor | None = None, theta8c: np.ndarray | None = None,
                     tol: float | None = None, check_traces: float | None = None) -> ShapeTorsion:
    """Intrinsic SU(3)-torsion from the ambient torsion, alpha_j, a and the phase.

    ``rbar``/``theta8c`` override the ambient values (synthetic injections).
    ``dgamma`` is the differential of the phase in tangent-frame components.
    """
    amb = _ambient_or_flat(ambient)
    sigma = amb.sigma
    if rbar is None:
        rbar = amb.rbar(geo.p)
    if theta8c is None:
        theta8c = amb.theta8_frame(geo.p).coeffs
    su3 = induced_su3(geo, sigma, gamma)
    J = su3.J
    # the shape-operator identities hold for the opposite overall sign of (rbar, theta8)
    rb_s, th_s = -1.0 * rbar, -np.asarray(theta8c, float)
    r = r_via_shape(geo, rb_s, sigma, gamma, J)
    theta6 = theta6_via_shape(geo, rb_s, th_s, sigma, J)
    b = _rbar_blocks(rb_s, geo, J)
    # trace identities
    om = su3.omega_matrix()
    r_om = 0.5 * float(np.sum(r * om))
    tr = float(np.trace(r))
    lhs2 = 1.75 * sigma * float(th_s @ geo.N1c)
    rhs2 = (sigma * b["n2_n2_n1"] + 6 * sigma * geo.h1 - np.sin(gamma) * tr
            + 2 * np.cos(gamma) * r_om)
    lhs3 = -1.75 * float(th_s @ geo.N2c)
    rhs3 = b["n1_n2_n1"] - 6 * geo.h2 + np.cos(gamma) * tr + 2 * np.sin(gamma) * r_om
    traces = (abs(lhs2 - rhs2), abs(lhs3 - rhs3))
    if check_traces is not None and max(traces) > check_traces:
        raise ChartError(f"trace identities violated at u={geo.u.tolist()}: {traces}")
    dg = np.zeros(6) if dgamma is None else np.asarray(dgamma, float)
    jdg = su3.J_covector(Form.from_vector(dg)).coeffs
    phi = cayley_form(sigma).phi
    l1 = lie_restricted(geo, 1, rbar, sigma)
    l2 = lie_restricted(geo, 2, rbar, sigma)
    st = su3.star
    p1 = pullback(geo.Tc, interior(geo.N1c, phi))
    p2 = pullback(geo.Tc, interior(geo.N2c, phi))
    lie1 = st(wedge(st(l1), p1)).coeffs
    lie2 = st(wedge(st(l2), p2)).coeffs
    eta3 = -jdg + 0.5 * lie1 - b["n1_x_n1"] - sigma * b["Jx_n2_n1"]
    eta3_alt = -jdg + 0.5 * lie2 + sigma * b["n2_Jx_n1"] - sigma * b["Jx_n2_n1"]
    eta = eta3 / 3.0
    report = classify_su3(r, Form.from_vector(eta), su3, tol)
    return ShapeTorsion(su3, r, theta6, eta, eta3_alt / 3.0, traces, (l1, l2), report,
                        float(gamma), jdg, (lie1, lie2), rbar, np.asarray(theta8c, float))


def closedness_check(geo: PointGeometry, ambient: AmbientStructure | None = None,
                     tol: float = 1e-8) -> dict:
    """Compare f*(L_{N_j} Phi) with f*(N_j _| dPhi) for j = 1, 2."""
    amb = _ambient_or_flat(ambient)
    rbar = amb.rbar(geo.p)
    dphi = amb.dphi_frame(geo.p)
    res = []
    for j, n in ((1, geo.N1c), (2, geo.N2c)):
        lie = lie_restricted(geo, j, rbar, amb.sigma)
        res.append((lie - pullback(geo.Tc, interior(n, dphi))).norm())
    return {"closed": bool(max(res) < tol), "residuals": res}


# classification tables ---------------------------------------------------------------

TABLE_OF_CLASS = {"W0bar": "parallel", "W1bar": "balanced", "W2bar": "lcp",
                  "W2bar-tangent": "lcp_tangent"}
_ALL = frozenset(W_LABELS)


@dataclass(frozen=True)
class TableRow:
    row_id: str
    classes: frozenset
    residual: float
    satisfied: bool
    contained: bool

    @property
    def consistent(self) -> bool:
        return self.satisfied == self.contained


@dataclass(frozen=True)
class TableMatch:
    ambient_class: str
    table: str
    label: tuple[str, ...]
    rows: tuple[TableRow, ...]

    @property
    def mismatches(self) -> tuple[TableRow, ...]:
        return tuple(row for row in self.rows if not row.consistent)

    def as_dict(self) -> dict:
        return {row.row_id: {"residual": row.residual, "satisfied": row.satisfied,
                             "contained": row.contained} for row in self.rows}


def _without(*labels: str) -> frozenset:
    return _ALL - frozenset(labels)


def _row_residuals(st: ShapeTorsion, geo: PointGeometry, sigma: int) -> dict[str, float]:
    """Residuals of the geometric row conditions (zero iff the condition holds)."""
    J = st.su3.J
    c, s = np.cos(st.gamma), np.sin(st.gamma)
    a1, a2 = geo.alpha1, geo.alpha2
    h1, h2 = geo.h1, geo.h2
    eye = np.eye(6)
    jt = lambda a: J.T @ a @ J            # (J a)(X, Y) = a(JX, JY)
    j1 = lambda a: -J.T @ a               # J_(1) a(X, Y) = -a(JX, Y)
    nrm = np.linalg.norm
    # ambient torsion enters the shape-operator identities with the opposite sign
    rb = -1.0 * (st.rbar if st.rbar is not None else RbarTensor(np.zeros((8, 8, 8))))
    th = -np.zeros(8) if st.theta8c is None else -st.theta8c
    b = _rbar_blocks(rb, geo, J)
    t1, t2 = float(th @ geo.N1c), float(th @ geo.N2c)
    ft = geo.Tc.T @ th
    # trace identities solved for tr r and <r, omega>
    A = sigma * b["n2_n2_n1"] + 6 * sigma * h1 - 1.75 * sigma * t1
    B = b["n1_n2_n1"] - 6 * h2 + 1.75 * t2
    lie1 = st.lie_stars[0] if st.lie_stars is not None else np.zeros(6)
    jdg = st.jdgamma if st.jdgamma is not None else np.zeros(6)
    eta3 = -jdg + 0.5 * lie1 - b["n1_x_n1"] - sigma * b["Jx_n2_n1"]
    theta6 = theta6_via_shape(geo, rb, th, sigma, J)
    return {
        "no-W5": float(nrm(eta3)),
        "no-W4": float(nrm(theta6)),
        "theta8-normal": float(nrm(ft)),
        "no-W3": float(nrm(sigma * (a1 - jt(a1)) - j1(a2 - jt(a2)))),
        "no-W2p": float(nrm(c * sigma * (a1 + jt(a1)) - s * (a2 + jt(a2))
                            - 2 * (sigma * h1 * c - h2 * s) * eye)),
        "no-W2m": float(nrm(s * sigma * (a1 + jt(a1)) + c * (a2 + jt(a2))
                            - 2 * (sigma * h1 * s + h2 * c) * eye)),
        "no-W1p": float(abs(c * A + s * B)),
        "no-W1m": float(abs(s * A - c * B)),
        "no-W1": float(abs(A) + abs(B)),
        "no-W2": float(nrm(a1 + jt(a1) - 2 * h1 * eye) + nrm(a2 + jt(a2) - 2 * h2 * eye)),
        "minimal": abs(h1) + abs(h2),
        "umbilic": float(nrm(a1 - h1 * eye) + nrm(a2 - h2 * eye)),
        "anti-invariant": float(nrm(jt(a1) + a1) + nrm(jt(a2) + a2)),
        "geodesic": float(nrm(a1) + nrm(a2)),
        "lcp-umbilic": float(nrm(4 * a1 - t1 * eye) + nrm(4 * a2 - t2 * eye)),
    }


# row id -> (class set of the row, residual keys whose sum must vanish)
_TABLES: dict[str, tuple[tuple[str, frozenset, tuple[str, ...]], ...]] = {
    "parallel": (
        ("W1+W1-W2+W2-W3", _without("W4", "W5"), ("no-W5",)),
        ("W1+W1-W2+W2-W5", _without("W4", "W3"), ("no-W3",)),
        ("W1+W1-W2-W3W5", _without("W4", "W2+"), ("no-W2p",)),
        ("W1+W1-W2+W3W5", _without("W4", "W2-"), ("no-W2m",)),
        ("W1-W2+W2-W3W5", _without("W4", "W1+"), ("no-W1p",)),
        ("W1+W2+W2-W3W5", _without("W4", "W1-"), ("no-W1m",)),
        ("W1+W1-W3W5", _without("W4", "W2+", "W2-"), ("no-W2",)),
        ("W2+W2-W3W5", _without("W4", "W1+", "W1-"), ("minimal",)),
        ("W1+W1-W5", frozenset({"W1+", "W1-", "W5"}), ("umbilic",)),
        ("W3W5", frozenset({"W3", "W5"}), ("anti-invariant",)),
        ("W5", frozenset({"W5"}), ("geodesic",)),
    ),
    "balanced": (
        ("W1+W1-W2+W2-W3W5", _without("W4"), ("no-W4",)),
        ("W1-W2+W2-W3W4W5", _without("W1+"), ("no-W1p",)),
        ("W1+W2+W2-W3W4W5", _without("W1-"), ("no-W1m",)),
        ("W2+W2-W3W4W5", _without("W1+", "W1-"), ("no-W1",)),
    ),
    "lcp": (
        ("W1+W1-W2+W2-W3W4", _without("W5"), ("no-W5",)),
        ("W1+W1-W2+W2-W3W5", _without("W4"), ("theta8-normal",)),
        ("W1+W1-W2+W2-W4W5", _without("W3"), ("no-W3",)),
        ("W1+W1-W2-W3W4W5", _without("W2+"), ("no-W2p",)),
        ("W1+W1-W2+W3W4W5", _without("W2-"), ("no-W2m",)),
        ("W1-W2+W2-W3W4W5", _without("W1+"), ("no-W1p",)),
        ("W1+W2+W2-W3W4W5", _without("W1-"), ("no-W1m",)),
        ("W1+W1-W3W4W5", _without("W2+", "W2-"), ("no-W2",)),
        ("W2+W2-W3W4W5", _without("W1+", "W1-"), ("no-W1",)),
        ("W1+W1-W4W5", frozenset({"W1+", "W1-", "W4", "W5"}), ("umbilic",)),
        ("W4W5", frozenset({"W4", "W5"}), ("lcp-umbilic",)),
        ("W5", frozenset({"W5"}), ("lcp-umbilic", "theta8-normal")),
    ),
    "lcp_tangent": (
        ("W1+W1-W2+W2-W3W4", _without("W5"), ("no-W5",)),
        ("W1+W1-W2+W2-W3W5", _without("W4"), ("theta8-normal",)),
        ("W1+W1-W2+W2-W4W5", _without("W3"), ("no-W3",)),
        ("W1+W1-W2-W3W4W5", _without("W2+"), ("no-W2p",)),
        ("W1+W1-W2+W3W4W5", _without("W2-"), ("no-W2m",)),
        ("W1-W2+W2-W3W4W5", _without("W1+"), ("no-W1p",)),
        ("W1+W2+W2-W3W4W5", _without("W1-"), ("no-W1m",)),
        ("W1+W1-W3W4W5", _without("W2+", "W2-"), ("no-W2",)),
        ("W2+W2-W3W4W5", _without("W1+", "W1-"), ("minimal",)),
        ("W1+W1-W4W5", frozenset({"W1+", "W1-", "W4", "W5"}), ("umbilic",)),
        ("W4W5", frozenset({"W4", "W5"}), ("geodesic",)),
        ("W5", frozenset({"W5"}), ("geodesic", "theta8-normal")),
    ),
}


def ambient_class_at(geo: PointGeometry, st: ShapeTorsion, ambient: AmbientStructure | None,
                     tol: float = 1e-9) -> str:
    """Fernandez class of the ambient torsion used by ``st``, refined by tangency of theta^8."""
    amb = _ambient_or_flat(ambient)
    phi = amb.cayley
    rbar = st.rbar if st.rbar is not None else amb.rbar(geo.p)
    theta8c = st.theta8c if st.theta8c is not None else amb.theta8_frame(geo.p).coeffs
    dphi = dphi_from_rbar(phi, rbar)
    cls = fernandez_class(phi, dphi, Form.from_vector(theta8c), tol)
    if cls == "W2bar" and abs(theta8c @ geo.N1c) + abs(theta8c @ geo.N2c) < tol:
        return "W2bar-tangent"
    return cls


def table_match(st: ShapeTorsion, geo: PointGeometry, ambient: AmbientStructure | None = None,
                tol: float = 1e-6, ambient_class: str | None = None) -> TableMatch:
    """Evaluate every row of the table for the ambient class against the measured class.

    A row is consistent when its geometric condition holds exactly when the measured
    torsion class is contained in the row's class set.
    """
    amb = _ambient_or_flat(ambient)
    cls = ambient_class or ambient_class_at(geo, st, amb)
    if cls not in TABLE_OF_CLASS:
        raise ChartError(f"no classification table for ambient class {cls!r}")
    table = TABLE_OF_CLASS[cls]
    res = _row_residuals(st, geo, amb.sigma)
    label = tuple(st.report.label)
    measured = frozenset(label)
    rows = []
    for row_id, classes, keys in _TABLES[table]:
        r = float(sum(res[k] for k in keys))
        rows.append(TableRow(row_id, classes, r, r < tol, measured <= classes))
    return TableMatch(cls, table, label, tuple(rows))


# finite-difference oracles ------------------------------------------------------------

def coordinate_fields(chart: Chart, ambient: AmbientStructure | None = None,
                      gamma: Callable[[np.ndarray], float] | float = 0.0):
    """Callables u -> (omega, Psi+, Psi-) as forms in chart coordinates."""
    amb = _ambient_or_flat(ambient)
    sigma = amb.sigma
    gfun = gamma if callable(gamma) else (lambda u, g=float(gamma): g)

    def fields(u):
        u = np.asarray(u, float)
        geo = frames_at(chart, u, amb)
        p = geo.p
        B = amb.frame(p)
        D = chart.d1(u)
        phi = amb.phi(p)
        n1, n2 = B @ geo.N1c, B @ geo.N2c
        om = -pullback(D, interior(n2, interior(n1, phi)))
        p1 = pullback(D, interior(n1, phi))
        p2 = pullback(D, interior(n2, phi))
        g = gfun(u)
        c, s = np.cos(g), np.sin(g)
        return om, c * p1 - s * sigma * p2, s * p1 + c * sigma * p2

    return fields


@dataclass(frozen=True)
class FDTorsion:
    domega: Form
    dpsi_plus: Form
    dpsi_minus: Form
    theta6: np.ndarray
    eta: np.ndarray
    eta_residual: float
    r: np.ndarray


def fd_torsion(chart: Chart, u, su3: Su3Point, geo: PointGeometry,
               ambient: AmbientStructure | None = None,
               gamma: Callable[[np.ndarray], float] | float = 0.0,
               fd: FDConfig = FDConfig()) -> FDTorsion:
    """Torsion from finite-difference exterior derivatives of omega, Psi+ and Psi-."""
    amb = _ambient_or_flat(ambient)
    fields = coordinate_fields(chart, amb, gamma)
    u = np.asarray(u, float)
    dom = fd_exterior_derivative(lambda v: fields(v)[0], u, fd.h, fd.order)
    dpp = fd_exterior_derivative(lambda v: fields(v)[1], u, fd.h, fd.order)
    dpm = fd_exterior_derivative(lambda v: fields(v)[2], u, fd.h, fd.order)
    dom, dpp, dpm = (geo.form_to_frame(x) for x in (dom, dpp, dpm))
    theta6 = fd_lee_form(chart, u, geo, su3, amb, fd)
    eta, res = eta_from_dpsi(dpp, dpm, su3, Form.from_vector(theta6))
    r = r_from_dforms(dom, dpp, dpm, eta, su3)
    return FDTorsion(dom, dpp, dpm, theta6, eta.coeffs, res, r)


def fd_lee_form(chart: Chart, u, geo: PointGeometry, su3: Su3Point,
                ambient: AmbientStructure | None = None, fd: FDConfig = FDConfig()) -> np.ndarray:
    """theta^6 = J d*omega with d*omega = -*d*omega evaluated in coordinates."""
    amb = _ambient_or_flat(ambient)
    fields = coordinate_fields(chart, amb)
    orient = su3.orientation

    def star_omega(v):
        D = chart.d1(v)
        g6 = Gram(D.T @ amb.gram(chart.point(v)).matrix @ D)
        return hodge(fields(v)[0], g6, orient)

    u = np.asarray(u, float)
    d_star = fd_exterior_derivative(star_omega, u, fd.h, fd.order)
    D = chart.d1(u)
    g6 = Gram(D.T @ amb.gram(geo.p).matrix @ D)
    codiff = -hodge(d_star, g6, orient)
    codiff_frame = geo.covector_to_frame(codiff.coeffs)
    return su3.J_covector(Form.from_vector(codiff_frame)).coeffs


def nijenhuis_frame(chart: Chart, u, ambient: AmbientStructure | None = None,
                    fd: FDConfig = FDConfig()) -> np.ndarray:
    """Lowered Nijenhuis tensor N[a, b, c] = <N(e_a, e_b), e_c> in the tangent frame."""
    amb = _ambient_or_flat(ambient)
    u = np.asarray(u, float)

    def J_coord(v):
        geo = frames_at(chart, v, amb)
        J = J_matrix(geo.Tc, geo.N1c, geo.N2c, amb.sigma)
        return geo.Rinv @ J @ geo.R

    def g_coord(v):
        D = chart.d1(v)
        return D.T @ amb.gram(chart.point(v)).matrix @ D

    N = nijenhuis(J_coord, g_coord, u, fd.frame_h, fd.frame_order)
    Ri = frames_at(chart, u, amb).Rinv
    return np.einsum("ijk,ia,jb,kc->abc", N, Ri, Ri, Ri)


def nabla_omega_direct(chart: Chart, u, geo: PointGeometry,
                       ambient: AmbientStructure | None = None,
                       fd: FDConfig = FDConfig()) -> np.ndarray:
    """Levi-Civita derivative of omega on M from coordinates and induced Christoffels.

    Returns beta[x, y, z] = (nabla_x omega)(y, z) in the tangent frame.
    """
    amb = _ambient_or_flat(ambient)
    fields = coordinate_fields(chart, amb)
    u = np.asarray(u, float)
    dom = central_difference(lambda v: fields(v)[0].tensor(), u, fd.h, 4)  # [c, a, b]
    D = chart.d1(u)
    G = amb.gram(geo.p).matrix
    hess = chart.d2(u) + np.einsum("kij,ia,jb->kab", amb.christoffel(geo.p), D, D)
    g6 = D.T @ G @ D
    gam6 = np.linalg.solve(g6, np.einsum("kca,kl,le->eca", hess, G, D).reshape(6, -1)).reshape(6, 6, 6)
    om = fields(u)[0].tensor()
    nab = dom - np.einsum("dca,db->cab", gam6, om) - np.einsum("dcb,ad->cab", gam6, om)
    Ri = geo.Rinv
    return np.einsum("cab,cx,ay,bz->xyz", nab, Ri, Ri, Ri)


def r_direct(chart: Chart, u, geo: PointGeometry, su3: Su3Point,
             ambient: AmbientStructure | None = None, fd: FDConfig = FDConfig()) -> np.ndarray:
    """r(nabla omega) from the direct covariant derivative."""
    beta = nabla_omega_direct(chart, u, geo, ambient, fd)
    return r_map(beta, su3, tol=1e-4)


__all__ = [
    "Chart", "ChartError", "FDConfig", "FDTorsion", "PointGeometry", "ShapeTorsion",
    "TABLE_OF_CLASS", "TableMatch", "TableRow", "ambient_class_at", "table_match",
    "J_matrix", "closedness_check", "coordinate_fields", "fd_lee_form", "fd_torsion",
    "frames_at", "fundamental_data", "graph_chart", "induced_su3", "lie_restricted",
    "nabla_omega_direct", "nijenhuis_frame", "normal_frame_rule", "r_direct", "r_via_shape", "rotated_normals",
    "theta6_via_shape", "torsion_via_rraa",
]
