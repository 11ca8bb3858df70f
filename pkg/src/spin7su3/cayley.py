"""Spin(7) structures on R^8: the Cayley 4-form, triple cross product, the
splitting of 2-forms, Lee form, intrinsic torsion and Fernandez classes.

Basis convention: internal index 0 is ``e``, internal index ``i + 1`` is
``e_i`` for ``i`` in Z_7.  The lexicographic top form ``e ^ e_0 ^ ... ^ e_6``
is positively oriented.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .forms import Form, Gram, hodge, inner, interior, wedge

E = 0  # internal index of e


def idx(i: int) -> int:
    """Internal index of ``e_i`` (i taken mod 7)."""
    return (i % 7) + 1


@dataclass(frozen=True, eq=False)
class CayleyForm:
    sigma: int
    phi: Form

    @property
    def tensor(self) -> np.ndarray:
        return _phi_tensor(self.sigma)


def _check_sigma(sigma: int) -> int:
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    return sigma


@lru_cache(maxsize=4)
def _cayley(sigma: int) -> CayleyForm:
    phi = Form.zero(8, 4)
    for i in range(7):
        phi = phi + Form.basis(8, (E, idx(i), idx(i + 1), idx(i + 3)))
        phi = phi - sigma * Form.basis(8, (idx(i + 2), idx(i + 4), idx(i + 5), idx(i + 6)))
    phi.coeffs.setflags(write=False)
    return CayleyForm(sigma, phi)


def cayley_form(sigma: int = 1) -> CayleyForm:
    return _cayley(_check_sigma(sigma))


@lru_cache(maxsize=4)
def _phi_tensor(sigma: int) -> np.ndarray:
    t = _cayley(sigma).phi.tensor()
    t.setflags(write=False)
    return t


@lru_cache(maxsize=4)
def beta_forms(sigma: int = 1) -> tuple[Form, ...]:
    """The seven 2-forms spanning spin(7)^perp."""
    _check_sigma(sigma)
    out = []
    for i in range(7):
        b = (sigma * Form.basis(8, (idx(i), E))
             + Form.basis(8, (idx(i + 1), idx(i + 3)))
             + Form.basis(8, (idx(i + 4), idx(i + 5)))
             + Form.basis(8, (idx(i + 2), idx(i + 6))))
        out.append(b)
    return tuple(out)


def _sigma_of(phi: CayleyForm | int) -> int:
    return phi.sigma if isinstance(phi, CayleyForm) else _check_sigma(phi)


def triple_cross(phi: CayleyForm | int, x, y, z) -> np.ndarray:
    """P(x, y, z) with <P(x, y, z), w> = Phi(x, y, z, w), Cayley-frame components."""
    t = _phi_tensor(_sigma_of(phi))
    return np.einsum("ijkl,i,j,k->l", t, np.asarray(x, float), np.asarray(y, float),
                     np.asarray(z, float))


def metric_from_phi(phi: Form, x, y, g: Gram | np.ndarray | None = None) -> float:
    """(1/7) *((x _| Phi) ^ *(y _| Phi)), stars taken with the Gram ``g``.

    With the convention a ^ *b = <a, b> Vol used throughout the package the
    contraction pairs to +7 <x, y> Vol.
    """
    a = interior(x, phi)
    b = hodge(interior(y, phi), g)
    return hodge(wedge(a, b), g).coeffs[0] / 7.0


def star_phi_operator(psi: Form, phi: CayleyForm) -> Form:
    """psi -> *(psi ^ Phi) on 2-forms."""
    return hodge(wedge(psi, phi.phi))


def spin7_split(psi: Form, phi: CayleyForm) -> tuple[Form, Form]:
    """Split a 2-form into its spin(7) (21-dim) and spin(7)^perp (7-dim) parts."""
    s = star_phi_operator(psi, phi)
    return (3 * psi + s) / 4, (psi - s) / 4


def star_phi_matrix(phi: CayleyForm) -> np.ndarray:
    """Matrix of psi -> *(psi ^ Phi) on the lexicographic basis of 2-forms."""
    cols = [star_phi_operator(Form(8, 2, np.eye(28)[k]), phi).coeffs for k in range(28)]
    return np.column_stack(cols)


def lee_form8(phi: Form, dphi: Form, g: Gram | np.ndarray | None = None,
              orientation: int = 1) -> Form:
    """theta^8 = -(1/7) *( *dPhi ^ Phi )."""
    return -hodge(wedge(hodge(dphi, g, orientation), phi), g, orientation) / 7.0


@dataclass(frozen=True, eq=False)
class RbarTensor:
    """rbar(X, Y, Z) in a Cayley frame; antisymmetric in (Y, Z)."""

    values: np.ndarray

    def __call__(self, x, y, z) -> float:
        return float(np.einsum("abc,a,b,c->", self.values, x, y, z))

    def spin7_residual(self, phi: CayleyForm) -> float:
        """Largest spin(7) component over the X slot (zero for a valid tensor)."""
        worst = 0.0
        for a in range(8):
            psi = Form.from_tensor(self.values[a])
            worst = max(worst, spin7_split(psi, phi)[0].norm())
        return worst

    def __add__(self, other: RbarTensor) -> RbarTensor:
        return RbarTensor(self.values + other.values)

    def __mul__(self, s: float) -> RbarTensor:
        return RbarTensor(float(s) * self.values)

    __rmul__ = __mul__


@lru_cache(maxsize=4)
def _mixed_forms(sigma: int) -> np.ndarray:
    """Coefficients of Y ^ (Z _| Phi) - Z ^ (Y _| Phi) for basis Y, Z."""
    phi = _cayley(sigma).phi
    eye = np.eye(8)
    contr = [interior(eye[c], phi) for c in range(8)]
    out = np.zeros((8, 8, 70))
    for b in range(8):
        for c in range(8):
            yb, zc = Form.from_vector(eye[b]), Form.from_vector(eye[c])
            out[b, c] = (wedge(yb, contr[c]) - wedge(zc, contr[b])).coeffs
    out.setflags(write=False)
    return out


def rbar_from_dphi(phi: CayleyForm, dphi: Form, theta8: Form | None = None) -> RbarTensor:
    """rbar from dPhi and its Lee form:

    4 rbar(X,Y,Z) = 2 <X _| dPhi, Y ^ Z _| Phi - Z ^ Y _| Phi>
                    - 7 ((X ^ theta)(Y, Z) + sigma Phi(theta, X, Y, Z)).

    The bracket is the spin(7)^perp-valued 1-form built from theta, so the
    correction vanishes exactly when theta does.  All inputs in Cayley-frame
    components.
    """
    if theta8 is None:
        theta8 = lee_form8(phi.phi, dphi)
    eye = np.eye(8)
    xd = np.stack([interior(eye[a], dphi).coeffs for a in range(8)])
    first = 2.0 * np.einsum("ak,bck->abc", xd, _mixed_forms(phi.sigma))
    return RbarTensor(first / 4.0 - 7.0 * rbar_conformal(phi, theta8).values)


def rbar_from_nabla_phi(phi: CayleyForm, nabla_phi: Sequence[Form]) -> RbarTensor:
    """rbar(B)(x,y,z) = (1/8) <x _| B, y ^ z _| Phi - z ^ y _| Phi>, B = nabla Phi."""
    nb = np.stack([f.coeffs for f in nabla_phi])
    return RbarTensor(np.einsum("ak,bck->abc", nb, _mixed_forms(phi.sigma)) / 8.0)


def rbar_conformal(phi: CayleyForm, theta8: Form) -> RbarTensor:
    """4 rbar = sum_i e_i (x) e_i ^ theta + sigma theta _| Phi (locally conformal parallel)."""
    eye = np.eye(8)
    th = theta8.coeffs
    first = np.einsum("ab,c->abc", eye, th) - np.einsum("ac,b->abc", eye, th)
    second = phi.sigma * np.einsum("m,mabc->abc", th, phi.tensor)
    return RbarTensor((first + second) / 4.0)


def xi_matrix(rbar: RbarTensor, x) -> np.ndarray:
    """Endomorphism Y -> xi_X Y as a matrix, from <xi_X Y, Z> = rbar(X, Y, Z) / 4."""
    return 0.25 * np.einsum("a,abc->cb", np.asarray(x, float), rbar.values)


def xi_spin7(rbar: RbarTensor, x, y, phi: CayleyForm | None = None,
             method: str = "metric") -> np.ndarray:
    """Intrinsic Spin(7) torsion xi_X Y.

    ``method="metric"`` uses <xi_X Y, Z> = rbar(X,Y,Z)/4; ``method="cross"``
    uses -(sigma/24) sum_ij rbar(X, e_i, e_j) P(e_i, e_j, Y).
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    if method == "metric":
        return xi_matrix(rbar, x) @ y
    if method == "cross":
        if phi is None:
            raise ValueError("the cross-product formula needs the Cayley form")
        return -(phi.sigma / 24.0) * np.einsum("a,aij,ijyw,y->w", x, rbar.values, phi.tensor, y)
    raise ValueError(f"unknown method {method!r}")


def endo_action(A: np.ndarray, form: Form) -> Form:
    """Derivation action of an endomorphism: (A.a)(Y..) = -sum_k a(.., A Y_k, ..)."""
    t = form.tensor()
    out = np.zeros_like(t)
    for k in range(t.ndim):
        out += np.moveaxis(np.tensordot(A, t, axes=([0], [k])), 0, k)
    return Form.from_tensor(-out)


def nabla_phi_from_rbar(phi: CayleyForm, rbar: RbarTensor) -> list[Form]:
    """nabla_{e_a} Phi = -xi_{e_a} Phi for each Cayley-frame vector."""
    eye = np.eye(8)
    return [-endo_action(xi_matrix(rbar, eye[a]), phi.phi) for a in range(8)]


FERNANDEZ_LABELS = ("W0bar", "W1bar", "W2bar", "Wbar")


def fernandez_class(phi: CayleyForm, dphi: Form, theta8: Form, tol: float | None = None) -> str:
    """Fernandez class of a Spin(7) structure from dPhi and its Lee form."""
    n_d = dphi.norm()
    n_t = theta8.norm()
    n_lcp = (dphi - wedge(theta8, phi.phi)).norm()
    if tol is None:
        tol = 1e-6 * (1.0 + n_d)
    if n_d < tol:
        return "W0bar"
    if n_t < tol:
        return "W1bar"
    if n_lcp < tol:
        return "W2bar"
    return "Wbar"


def project_rbar_balanced(phi: CayleyForm, rbar: RbarTensor) -> RbarTensor:
    """Orthogonal projection of a valid rbar onto those with vanishing Lee form.

    Uses the linear chain rbar -> nabla Phi -> dPhi -> theta^8.
    """
    basis = _rbar_basis(phi.sigma)
    coords = basis @ rbar.values.reshape(-1)
    lee = _lee_of_basis(phi.sigma)
    _, s, vt = np.linalg.svd(lee)
    rank = int((s > 1e-10 * s[0]).sum())
    kernel = vt[rank:]
    coords = kernel.T @ (kernel @ coords)
    return RbarTensor((basis.T @ coords).reshape(8, 8, 8))


@lru_cache(maxsize=4)
def _rbar_basis(sigma: int) -> np.ndarray:
    """Orthonormal basis (56 rows) of R^8* (x) spin(7)^perp as flat (8,8,8) arrays."""
    rows = []
    for a in range(8):
        for b in beta_forms(sigma):
            v = np.zeros((8, 8, 8))
            v[a] = b.tensor() / 2.0  # |beta|^2 = 4 as a 2-form, 8 as a full tensor
            rows.append(v.reshape(-1) / np.sqrt(2.0))
    out = np.array(rows)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4)
def _lee_of_basis(sigma: int) -> np.ndarray:
    phi = _cayley(sigma)
    cols = []
    for row in _rbar_basis(sigma):
        rb = RbarTensor(row.reshape(8, 8, 8))
        cols.append(lee_form8(phi.phi, dphi_from_rbar(phi, rb)).coeffs)
    return np.column_stack(cols)


def dphi_from_rbar(phi: CayleyForm, rbar: RbarTensor) -> Form:
    """dPhi = sum_a e^a ^ nabla_{e_a} Phi with nabla Phi = -xi Phi."""
    out = Form.zero(8, 5)
    for a, nab in enumerate(nabla_phi_from_rbar(phi, rbar)):
        out = out + wedge(Form.basis(8, (a,)), nab)
    return out


def random_rbar(phi: CayleyForm, rng: np.random.Generator, balanced: bool = False) -> RbarTensor:
    """Random element of R^8* (x) spin(7)^perp (optionally with zero Lee form)."""
    basis = _rbar_basis(phi.sigma)
    rb = RbarTensor((basis.T @ rng.normal(size=basis.shape[0])).reshape(8, 8, 8))
    return project_rbar_balanced(phi, rb) if balanced else rb


# ambient structures ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AmbientStructure:
    """Flat or conformally flat Spin(7) structure on R^8.

    The conformal kind has metric ``exp(2 f) I`` and fundamental form
    ``exp(4 f) Phi_0``; its Cayley frame is ``exp(-f)`` times the coordinate
    frame.  Coordinate-basis quantities carry no suffix; ``*_frame`` methods
    return Cayley-frame components.
    """

    kind: str = "flat"
    sigma: int = 1
    f: Callable[[np.ndarray], float] | None = None
    grad_f: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        _check_sigma(self.sigma)
        if self.kind not in ("flat", "conformal"):
            raise ValueError(f"unknown ambient kind {self.kind!r}")
        if self.kind == "conformal" and (self.f is None or self.grad_f is None):
            raise ValueError("conformal ambient needs f and its gradient")

    @classmethod
    def flat(cls, sigma: int = 1) -> AmbientStructure:
        return cls("flat", sigma)

    @classmethod
    def conformal_linear(cls, coeffs: Sequence[float], sigma: int = 1) -> AmbientStructure:
        """Conformal ambient with f(p) = <c, p>."""
        c = np.asarray(coeffs, dtype=float)
        return cls("conformal", sigma, lambda p: float(c @ p), lambda p: c.copy())

    @property
    def cayley(self) -> CayleyForm:
        return cayley_form(self.sigma)

    def _f(self, p) -> float:
        return 0.0 if self.f is None else float(self.f(np.asarray(p, float)))

    def _df(self, p) -> np.ndarray:
        return np.zeros(8) if self.grad_f is None else np.asarray(self.grad_f(np.asarray(p, float)), float)

    def gram(self, p) -> Gram:
        return Gram(np.exp(2 * self._f(p)) * np.eye(8))

    def frame(self, p) -> np.ndarray:
        return np.exp(-self._f(p)) * np.eye(8)

    def phi(self, p) -> Form:
        return np.exp(4 * self._f(p)) * self.cayley.phi

    def theta8(self, p) -> Form:
        return Form.from_vector(4.0 * self._df(p))

    def dphi(self, p) -> Form:
        return wedge(Form.from_vector(4.0 * self._df(p)), self.phi(p))

    def christoffel(self, p) -> np.ndarray:
        """Gamma[k, i, j] of the Levi-Civita connection in coordinates."""
        df = self._df(p)
        eye = np.eye(8)
        return (np.einsum("ki,j->kij", eye, df) + np.einsum("kj,i->kij", eye, df)
                - np.einsum("ij,k->kij", eye, df))

    def theta8_frame(self, p) -> Form:
        return Form.from_vector(np.exp(-self._f(p)) * 4.0 * self._df(p))

    def dphi_frame(self, p) -> Form:
        return wedge(self.theta8_frame(p), self.cayley.phi)

    def rbar(self, p) -> RbarTensor:
        if self.kind == "flat":
            return RbarTensor(np.zeros((8, 8, 8)))
        return rbar_from_dphi(self.cayley, self.dphi_frame(p), self.theta8_frame(p))

    def fernandez(self, p, tol: float | None = None) -> str:
        return fernandez_class(self.cayley, self.dphi_frame(p), self.theta8_frame(p), tol)

    def is_flat(self) -> bool:
        return self.kind == "flat"


def nabla_phi_fd(ambient: AmbientStructure, p, h: float = 1e-4) -> list[Form]:
    """Levi-Civita derivative of Phi by differences of the coordinate field,
    corrected by Christoffel terms, returned in Cayley-frame components."""
    from .forms import central_difference, pullback

    p = np.asarray(p, float)
    dt = central_difference(lambda q: ambient.phi(q).tensor(), p, h, order=4)
    gam = ambient.christoffel(p)
    phi_t = ambient.phi(p).tensor()
    B = ambient.frame(p)
    out = []
    for a in range(8):
        va = B[:, a]
        grad = np.einsum("i,ijklm->jklm", va, dt)
        conn = np.einsum("i,mij->mj", va, gam)  # (nabla_va d_j)^m = Gamma^m_{ij} va^i
        corr = np.zeros_like(grad)
        for k in range(4):
            corr += np.moveaxis(np.tensordot(conn, phi_t, axes=([0], [k])), 0, k)
        out.append(pullback(B, Form.from_tensor(grad - corr)))
    return out


__all__ = [
    "AmbientStructure", "CayleyForm", "RbarTensor", "FERNANDEZ_LABELS", "beta_forms",
    "cayley_form", "dphi_from_rbar", "endo_action", "fernandez_class", "idx",
    "lee_form8", "metric_from_phi", "nabla_phi_fd", "nabla_phi_from_rbar",
    "project_rbar_balanced", "random_rbar", "rbar_conformal", "rbar_from_dphi",
    "rbar_from_nabla_phi", "spin7_split", "star_phi_matrix", "triple_cross",
    "xi_matrix", "xi_spin7",
]
