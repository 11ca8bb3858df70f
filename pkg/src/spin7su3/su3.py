"""SU(3)-structures on a 6-dimensional vector space and their intrinsic torsion.

Unless stated otherwise, tensors are given in components relative to an
orthonormal working frame: ``J[b, a]`` is the matrix of J acting on column
vectors, 2-tensors are ``6x6`` arrays and forms are :class:`Form` objects.
The 6-dimensional orientation is the one of ``omega^3 / 6``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .forms import (Form, FormError, Gram, J_on_covector, central_difference, hodge, inner,
                    interior, volume_form, wedge, wedge_all)

W_LABELS = ("W1+", "W1-", "W2+", "W2-", "W3", "W4", "W5")
NORM_KEYS = ("W1p", "W1m", "W2p", "W2m", "W3", "W4", "W5")
_KEY_OF = dict(zip(W_LABELS, NORM_KEYS))


class Su3Error(ValueError):
    """Degenerate or inconsistent SU(3) data."""


def _orthonormal_check(g: Gram, tol: float = 1e-8) -> None:
    if np.abs(g.matrix - np.eye(g.dim)).max() > tol:
        raise Su3Error("operation requires an orthonormal working frame")


@dataclass(frozen=True, eq=False)
class Su3Point:
    """SU(3)-structure on a 6-dimensional vector space.

    ``omega(x, y) = <x, J y>``; ``psi_plus + i psi_minus`` is the complex
    volume form.  ``gamma`` records the phase used to build the pair.
    """

    g: Gram
    J: np.ndarray
    omega: Form
    psi_plus: Form
    psi_minus: Form
    gamma: float = 0.0

    @classmethod
    def canonical(cls) -> Su3Point:
        """Standard structure on the frame (e1, e2, e3, Je1, Je2, Je3)."""
        J = np.zeros((6, 6))
        for i in range(3):
            J[i + 3, i] = 1.0
            J[i, i + 3] = -1.0
        b = lambda *ix: Form.basis(6, ix)
        omega = -(b(0, 3) + b(1, 4) + b(2, 5))
        psi_p = b(0, 1, 2) - b(3, 4, 2) - b(3, 1, 5) - b(0, 4, 5)
        psi_m = -b(3, 4, 5) + b(3, 1, 2) + b(0, 4, 2) + b(0, 1, 5)
        return cls(Gram.identity(6), J, omega, psi_p, psi_m)

    @property
    def orientation(self) -> int:
        top = wedge_all(self.omega, self.omega, self.omega).coeffs[0]
        if abs(top) < 1e-12:
            raise Su3Error("omega is degenerate")
        return int(np.sign(top))

    @property
    def vol(self) -> Form:
        return volume_form(self.g, 6, self.orientation)

    def star(self, a: Form) -> Form:
        return hodge(a, self.g, self.orientation)

    def J_covector(self, mu: Form) -> Form:
        return J_on_covector(mu, self.J)

    def omega_matrix(self) -> np.ndarray:
        return self.omega.tensor()

    def transform(self, F: np.ndarray) -> Su3Point:
        """Express the structure in the basis given by the columns of ``F``."""
        from .forms import pullback

        F = np.asarray(F, dtype=float)
        Finv = np.linalg.inv(F)
        return Su3Point(Gram(F.T @ self.g.matrix @ F), Finv @ self.J @ F,
                        pullback(F, self.omega), pullback(F, self.psi_plus),
                        pullback(F, self.psi_minus), self.gamma)

    def rotate_phase(self, dgamma: float) -> Su3Point:
        """Psi -> exp(i dgamma) Psi."""
        c, s = np.cos(dgamma), np.sin(dgamma)
        return Su3Point(self.g, self.J, self.omega, c * self.psi_plus - s * self.psi_minus,
                        s * self.psi_plus + c * self.psi_minus, self.gamma + dgamma)

    def residuals(self, rng: np.random.Generator | None = None, samples: int = 4) -> dict[str, float]:
        """Largest violation of each defining algebraic identity."""
        rng = np.random.default_rng(0) if rng is None else rng
        g, J = self.g.matrix, self.J
        vol = self.vol
        pp, pm, om = self.psi_plus, self.psi_minus, self.omega
        out = {
            "J_squared": float(np.abs(J @ J + np.eye(6)).max()),
            "J_orthogonal": float(np.abs(J.T @ g @ J - g).max()),
            "omega_metric": float(np.abs(om.tensor() - g @ J).max()),
            "omega_cubed": float(np.abs(wedge_all(om, om, om).coeffs - 6 * vol.coeffs).max()),
            "psi_omega": max(wedge(pp, om).norm(), wedge(pm, om).norm()),
            "psi_psi": float(np.abs(wedge(pp, pm).coeffs + 4 * vol.coeffs).max()),
        }
        worst_contr, worst_star = 0.0, 0.0
        for _ in range(samples):
            x = rng.normal(size=6)
            worst_contr = max(worst_contr, (interior(x, pp) - interior(J @ x, pm)).norm())
            mu = Form.from_vector(rng.normal(size=6))
            for res in estrella_residuals(self, mu).values():
                worst_star = max(worst_star, res)
        out["contraction"] = worst_contr
        out["estrella"] = worst_star
        return out

    def validate(self, tol: float = 1e-8) -> Su3Point:
        res = self.residuals()
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise Su3Error(f"not an SU(3)-structure: {bad}")
        return self


def estrella_residuals(su3: Su3Point, mu: Form) -> dict[str, float]:
    """Residuals of *(*(mu^Psi+-)^Psi+-) = -2 mu and *(*(mu^Psi-)^Psi+) = 2 J mu."""
    st = su3.star
    pp, pm = su3.psi_plus, su3.psi_minus
    jmu = su3.J_covector(mu)
    return {
        "pp": (st(wedge(st(wedge(mu, pp)), pp)) + 2 * mu).norm(),
        "mm": (st(wedge(st(wedge(mu, pm)), pm)) + 2 * mu).norm(),
        "mp": (st(wedge(st(wedge(mu, pm)), pp)) - 2 * jmu).norm(),
        "pm": (st(wedge(st(wedge(mu, pp)), pm)) + 2 * jmu).norm(),
    }


def adapted_frame(su3: Su3Point, tol: float = 1e-8) -> np.ndarray:
    """Columns (e1, e2, e3, Je1, Je2, Je3): orthonormal, Psi+(e1,e2,e3)=1, Psi-(e1,e2,e3)=0."""
    if np.abs(su3.J @ su3.J + np.eye(6)).max() > tol:
        raise Su3Error("J does not square to -1")
    g, J = su3.g.matrix, su3.J
    norm = lambda v: np.sqrt(v @ g @ v)
    e1 = np.eye(6)[0] / norm(np.eye(6)[0])
    basis = [e1, J @ e1]
    e2 = None
    for k in range(6):
        v = np.eye(6)[k]
        for b in basis:
            v = v - (b @ g @ v) * b
        if norm(v) > 0.1:
            e2 = v / norm(v)
            break
    if e2 is None:
        raise Su3Error("no vector orthogonal to span(e1, Je1)")
    e3 = su3.g.inverse @ interior(e2, interior(e1, su3.psi_plus)).coeffs
    if abs(norm(e3) - 1.0) > 1e-6:
        raise Su3Error(f"|e3| = {norm(e3)}, structure is not SU(3)")
    F = np.column_stack([e1, e2, e3, J @ e1, J @ e2, J @ e3])
    if np.abs(F.T @ g @ F - np.eye(6)).max() > 1e-6:
        raise Su3Error("adapted frame is not orthonormal")
    return F


# r-map and the torsion decomposition ----------------------------------------

def u3_perp_residual(two_form: np.ndarray, J: np.ndarray) -> float:
    """Size of the J-invariant part of a 2-form (zero on u(3)^perp)."""
    return float(np.abs(two_form + J.T @ two_form @ J).max()) / 2.0


def r_map(nabla_omega: np.ndarray, su3: Su3Point, tol: float = 1e-8) -> np.ndarray:
    """r(x, y) = 1/2 <x _| beta, y _| Psi+> for beta[x, y, z] = (nabla_x omega)(y, z)."""
    _orthonormal_check(su3.g)
    beta = np.asarray(nabla_omega, dtype=float)
    worst = max(u3_perp_residual(beta[x], su3.J) for x in range(6))
    if worst > tol * (1.0 + np.abs(beta).max()):
        raise Su3Error(f"slice not in u(3)^perp (residual {worst:.3e})")
    return 0.25 * np.einsum("xzw,yzw->xy", beta, su3.psi_plus.tensor())


def r_inverse(r: np.ndarray, su3: Su3Point) -> np.ndarray:
    """beta = sum_jk r_jk e_j (x) e_k _| Psi+."""
    _orthonormal_check(su3.g)
    return np.einsum("xk,kzw->xzw", np.asarray(r, dtype=float), su3.psi_plus.tensor())


@dataclass(frozen=True)
class RDecomposition:
    parts: dict[str, np.ndarray]

    @property
    def norms(self) -> dict[str, float]:
        return {k: float(np.linalg.norm(v)) for k, v in self.parts.items()}


def decompose_r(r: np.ndarray, su3: Su3Point) -> RDecomposition:
    """Split r into the six SU(3)-irreducible pieces.

    Norm keys follow the torsion (xi) labels: the symmetric trace part is
    W1- and the omega part W1+, the J-invariant traceless symmetric part is
    W2- and the J-invariant skew part orthogonal to omega W2+; J-anti-invariant
    symmetric is W3, J-anti-invariant skew is W4.
    """
    _orthonormal_check(su3.g)
    r = np.asarray(r, dtype=float)
    J = su3.J
    inv = (r + J.T @ r @ J) / 2
    anti = r - inv
    sym_inv, skew_inv = (inv + inv.T) / 2, (inv - inv.T) / 2
    trace = np.trace(sym_inv) / 6 * np.eye(6)
    om = su3.omega_matrix()
    om_part = np.sum(skew_inv * om) / np.sum(om * om) * om
    return RDecomposition({
        "W1p": om_part,
        "W1m": trace,
        "W2p": skew_inv - om_part,
        "W2m": sym_inv - trace,
        "W3": (anti + anti.T) / 2,
        "W4": (anti - anti.T) / 2,
    })


def codifferential_omega_from_r(r: np.ndarray, su3: Su3Point) -> Form:
    """d*omega(X) = sum_kl Psi+(X, e_k, e_l) r(e_k, e_l)."""
    _orthonormal_check(su3.g)
    return Form.from_vector(np.einsum("xkl,kl->x", su3.psi_plus.tensor(), r))


def theta6_from_r(r: np.ndarray, su3: Su3Point) -> Form:
    """Lee form theta^6 = J d*omega."""
    return su3.J_covector(codifferential_omega_from_r(r, su3))


def eta_expressions(dpsi_plus: Form, dpsi_minus: Form, su3: Su3Point) -> list[Form]:
    """The four 1-forms that each equal 6 eta + theta^6."""
    st, jc = su3.star, su3.J_covector
    pp, pm = su3.psi_plus, su3.psi_minus
    return [
        st(wedge(st(dpsi_plus), pp)),
        st(wedge(st(dpsi_minus), pm)),
        -jc(st(wedge(st(dpsi_plus), pm))),
        jc(st(wedge(st(dpsi_minus), pp))),
    ]


def eta_from_dpsi(dpsi_plus: Form, dpsi_minus: Form, su3: Su3Point, theta6: Form,
                  max_residual: float | None = None) -> tuple[Form, float]:
    """Return (eta, residual) where residual is the spread of the four expressions."""
    exprs = eta_expressions(dpsi_plus, dpsi_minus, su3)
    mean = sum(exprs[1:], exprs[0]) / 4.0
    residual = max((e - mean).norm() for e in exprs)
    if max_residual is not None and residual > max_residual:
        raise Su3Error(f"inconsistent dPsi: expressions for eta disagree by {residual:.3e}")
    return (mean - theta6) / 6.0, residual


def xi_u3(r: np.ndarray, su3: Su3Point, x, y) -> np.ndarray:
    """xi_X Y = -1/2 sum_jk r(X, e_j) Psi+(e_j, e_k, Y) J e_k."""
    _orthonormal_check(su3.g)
    return -0.5 * np.einsum("x,xj,jky,y,mk->m", np.asarray(x, float), r,
                            su3.psi_plus.tensor(), np.asarray(y, float), su3.J)


def xi_u3_matrix(r: np.ndarray, su3: Su3Point, x) -> np.ndarray:
    return np.column_stack([xi_u3(r, su3, x, e) for e in np.eye(6)])


def eta_covector_to_endo(eta: Form, su3: Su3Point, x) -> np.ndarray:
    """eta_X = (J eta)(X) J as an endomorphism."""
    return float(su3.J_covector(eta).coeffs @ np.asarray(x, float)) * su3.J


def _pair(t: np.ndarray, w: np.ndarray) -> float:
    return 0.5 * float(np.sum(t * w))


def r_from_dforms(domega: Form, dpsi_plus: Form, dpsi_minus: Form, eta: Form,
                  su3: Su3Point, uncorrected: bool = False) -> np.ndarray:
    """r from exterior derivatives:

    2 r(X, Y) = <X _| d omega, Y _| Psi+>
                + <(JX ^ Y) _| D-  -  (X ^ Y) _| D+, omega>,

    D+- = dPsi+- + 3 eta ^ Psi+-  -  (3/2) (omega ^ omega component of dPsi+-).

    The last correction makes the identity exact on the W1 summands; with
    ``uncorrected=True`` it is dropped, which scales the W1 part of r by 7.
    """
    _orthonormal_check(su3.g)
    dom = domega.tensor()
    pp = su3.psi_plus.tensor()
    ww = wedge(su3.omega, su3.omega)
    dp_form = dpsi_plus + 3 * wedge(eta, su3.psi_plus)
    dm_form = dpsi_minus + 3 * wedge(eta, su3.psi_minus)
    if not uncorrected:
        nww = inner(ww, ww)
        dp_form = dp_form - 1.5 * inner(dpsi_plus, ww) / nww * ww
        dm_form = dm_form - 1.5 * inner(dpsi_minus, ww) / nww * ww
    dp, dm = dp_form.tensor(), dm_form.tensor()
    om = su3.omega_matrix()
    first = 0.5 * np.einsum("azw,bzw->ab", dom, pp)
    jdm = np.einsum("ca,cbzw->abzw", su3.J, dm)
    second = 0.5 * np.einsum("abzw,zw->ab", jdm - dp, om)
    return (first + second) / 2.0


def algebraic_dforms(r: np.ndarray, eta: Form, su3: Su3Point) -> tuple[Form, Form, Form]:
    """(d omega, dPsi+, dPsi-) assembled from the intrinsic torsion (r, eta)."""
    _orthonormal_check(su3.g)
    beta = r_inverse(r, su3)
    pp, pm = su3.psi_plus, su3.psi_minus
    jeta = su3.J_covector(eta).coeffs
    eye = np.eye(6)
    d_om, d_pp, d_pm = Form.zero(6, 3), Form.zero(6, 4), Form.zero(6, 4)
    for a in range(6):
        ea = Form.basis(6, (a,))
        nab = Form.from_tensor(beta[a])
        s_m, s_p = Form.zero(6, 3), Form.zero(6, 3)
        for j in range(6):
            c = interior(eye[j], nab)
            s_m = s_m + wedge(c, interior(eye[j], pm))
            s_p = s_p + wedge(c, interior(eye[j], pp))
        nab_pp = -3 * jeta[a] * pm + 0.5 * s_m
        nab_pm = 3 * jeta[a] * pp - 0.5 * s_p
        d_om = d_om + wedge(ea, nab)
        d_pp = d_pp + wedge(ea, nab_pp)
        d_pm = d_pm + wedge(ea, nab_pm)
    return d_om, d_pp, d_pm


# classification --------------------------------------------------------------

@dataclass(frozen=True)
class Su3TorsionReport:
    r: np.ndarray
    theta6: Form
    eta: Form
    norms: dict[str, float]
    label: tuple[str, ...]
    half_flat: bool
    predicates: dict[str, bool] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def total_norm(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.norms.values())))

    def contained_in(self, classes: Sequence[str]) -> bool:
        return set(self.label) <= set(classes)


def detection_tol(total: float, tol: float | None = None) -> float:
    """Scale-aware zero threshold 1e-6 (1 + total torsion)."""
    return 1e-6 * (1.0 + total) if tol is None else tol


def classify_su3(r: np.ndarray, eta: Form, su3: Su3Point, tol: float | None = None,
                 dforms: tuple[Form, Form, Form] | None = None) -> Su3TorsionReport:
    """Torsion class of (r, eta).

    ``dforms`` = (d omega, dPsi+, dPsi-) feeds the predicates; when absent
    they are assembled algebraically from the torsion.
    """
    norms = decompose_r(r, su3).norms
    norms["W5"] = eta.norm()
    total = float(np.sqrt(sum(v * v for v in norms.values())))
    tol = detection_tol(total, tol)
    label = tuple(lab for lab in W_LABELS if norms[_KEY_OF[lab]] >= tol)
    theta6 = theta6_from_r(r, su3)
    d_om, d_pp, d_pm = algebraic_dforms(r, eta, su3) if dforms is None else dforms
    pp, pm = su3.psi_plus, su3.psi_minus
    nk = (d_om - inner(d_om, pp) / 4.0 * pp - inner(d_om, pm) / 4.0 * pm).norm()
    # theta6 = J d*omega with (J a)(X) = -a(JX) makes 2 d omega = -theta6 ^ omega for lcK
    lck = (2 * d_om + wedge(theta6, su3.omega)).norm()
    residuals = {
        "dPsi+": d_pp.norm(), "dPsi-": d_pm.norm(), "domega": d_om.norm(),
        "theta6": theta6.norm(), "nearly_kahler": nk, "lck": lck,
    }
    predicates = {
        "kahler": all(norms[k] < tol for k in NORM_KEYS[:6]),
        "nearly_kahler": nk < tol,
        "almost_kahler": d_om.norm() < tol,
        "locally_conformal_kahler": lck < tol,
        "balanced": d_pp.norm() < tol and d_pm.norm() < tol and theta6.norm() < tol,
        "half_flat": d_pp.norm() < tol and theta6.norm() < tol,
    }
    return Su3TorsionReport(np.asarray(r, float), theta6, eta, norms, label,
                            predicates["half_flat"], predicates, residuals)


# Nijenhuis tensor --------------------------------------------------------------

def nijenhuis(J_field: Callable[[np.ndarray], np.ndarray],
              g_field: Callable[[np.ndarray], np.ndarray], u: Sequence[float],
              h: float = 1e-4, order: int = 4) -> np.ndarray:
    """N(d_i, d_j) lowered with g: N[i, j, c] = g(N(d_i, d_j), d_c) in coordinates.

    Sign convention N(X, Y) = [X, Y] - [JX, JY] + J[JX, Y] + J[X, JY], the one in
    which the standard S^3 x S^3 structure has N = 2 sqrt(2) Psi_-(pi/4).
    """
    u = np.asarray(u, dtype=float)
    J = np.asarray(J_field(u), dtype=float)
    dJ = central_difference(J_field, u, h, order)  # dJ[b, a, i] = d_b J^a_i
    term1 = np.einsum("bi,baj->ija", J, dJ) - np.einsum("bj,bai->ija", J, dJ)
    term2 = np.einsum("ac,jci->ija", J, dJ) - np.einsum("ac,icj->ija", J, dJ)
    return -np.einsum("ija,ac->ijc", term1 + term2, np.asarray(g_field(u), float))


__all__ = [
    "NORM_KEYS", "RDecomposition", "Su3Error", "Su3Point", "Su3TorsionReport", "W_LABELS",
    "adapted_frame", "algebraic_dforms", "classify_su3", "codifferential_omega_from_r",
    "decompose_r", "detection_tol", "estrella_residuals", "eta_expressions", "eta_from_dpsi",
    "nijenhuis", "r_from_dforms", "r_inverse", "r_map", "theta6_from_r", "u3_perp_residual",
    "xi_u3", "xi_u3_matrix",
]
