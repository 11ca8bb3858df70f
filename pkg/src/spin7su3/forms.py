"""Dense exterior algebra on R^n (n <= 8).

A p-form is stored by its coefficients on the increasing multi-indices
``i_1 < ... < i_p`` in lexicographic order.  Evaluation follows the
determinant convention, ``(e^1 ^ e^2)(e_1, e_2) = 1``, so the coefficient of
``e^I`` is the value of the form on the basis vectors ``e_I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, permutations
from typing import Callable, Sequence

import numpy as np

MAX_DIM = 8


class FormError(ValueError):
    """Raised on dimension/degree mismatches between forms and operands."""


@lru_cache(maxsize=None)
def combos(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def combo_index(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {c: k for k, c in enumerate(combos(n, p))}


def _perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def sort_sign(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``indices``; 0 if an index repeats."""
    if len(set(indices)) != len(indices):
        return 0, tuple(sorted(indices))
    order = sorted(range(len(indices)), key=lambda k: indices[k])
    return _perm_sign(order), tuple(indices[k] for k in order)


@lru_cache(maxsize=None)
def _tensor_scatter(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    perms = list(permutations(range(p)))
    signs = np.array([_perm_sign(s) for s in perms], dtype=float)
    flat = np.empty((math.comb(n, p), len(perms)), dtype=np.intp)
    strides = [n ** (p - 1 - k) for k in range(p)]
    for a, c in enumerate(combos(n, p)):
        for b, s in enumerate(perms):
            flat[a, b] = sum(c[s[k]] * strides[k] for k in range(p))
    return flat, signs


@lru_cache(maxsize=None)
def _gather_index(n: int, p: int) -> tuple[np.ndarray, ...]:
    cs = combos(n, p)
    return tuple(np.array([c[k] for c in cs], dtype=np.intp) for k in range(p))


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    out_idx = combo_index(n, p + q)
    ks, iis, js, ss = [], [], [], []
    for i, a in enumerate(combos(n, p)):
        for j, b in enumerate(combos(n, q)):
            s, srt = sort_sign(a + b)
            if s:
                ks.append(out_idx[srt])
                iis.append(i)
                js.append(j)
                ss.append(s)
    return (np.array(ks, dtype=np.intp), np.array(iis, dtype=np.intp),
            np.array(js, dtype=np.intp), np.array(ss, dtype=float))


@lru_cache(maxsize=None)
def _interior_table(n: int, p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    src_idx = combo_index(n, p)
    outs, vecs, srcs, ss = [], [], [], []
    for j, rest in enumerate(combos(n, p - 1)):
        for i in range(n):
            s, srt = sort_sign((i,) + rest)
            if s:
                outs.append(j)
                vecs.append(i)
                srcs.append(src_idx[srt])
                ss.append(s)
    return (np.array(outs, dtype=np.intp), np.array(vecs, dtype=np.intp),
            np.array(srcs, dtype=np.intp), np.array(ss, dtype=float))


@lru_cache(maxsize=None)
def _complement_table(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """For each p-index I: position of its complement among (n-p)-indices and sign(I, I^c)."""
    out_idx = combo_index(n, n - p)
    pos, sgn = [], []
    for c in combos(n, p):
        comp = tuple(k for k in range(n) if k not in c)
        pos.append(out_idx[comp])
        sgn.append(sort_sign(c + comp)[0])
    return np.array(pos, dtype=np.intp), np.array(sgn, dtype=float)


def _compound(mat: np.ndarray, p: int) -> np.ndarray:
    """p-th compound matrix: minors det(mat[I, J]) over increasing I, J."""
    rows, cols = mat.shape
    if p == 0:
        return np.ones((1, 1))
    ri = np.array(combos(rows, p), dtype=np.intp)
    ci = np.array(combos(cols, p), dtype=np.intp)
    sub = mat[ri[:, None, :, None], ci[None, :, None, :]]
    if p == 1:
        return sub[..., 0, 0]
    return np.linalg.det(sub)


@dataclass(eq=False)
class Form:
    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if not 0 <= self.dim <= MAX_DIM:
            raise FormError(f"dimension {self.dim} outside 0..{MAX_DIM}")
        if not 0 <= self.degree <= self.dim:
            raise FormError(f"degree {self.degree} exceeds dimension {self.dim}")
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if c.size != math.comb(self.dim, self.degree):
            raise FormError(
                f"expected {math.comb(self.dim, self.degree)} coefficients, got {c.size}")
        self.coeffs = c

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, degree: int) -> Form:
        return cls(dim, degree, np.zeros(math.comb(dim, degree)))

    @classmethod
    def basis(cls, dim: int, indices: Sequence[int], coeff: float = 1.0) -> Form:
        """``coeff * e^{i_1} ^ ... ^ e^{i_p}``; indices need not be sorted."""
        p = len(indices)
        out = cls.zero(dim, p)
        s, srt = sort_sign(tuple(indices))
        if s:
            out.coeffs[combo_index(dim, p)[srt]] = s * coeff
        return out

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> Form:
        v = np.asarray(v, dtype=float)
        return cls(v.size, 1, v.copy())

    @classmethod
    def from_tensor(cls, t: np.ndarray, antisymmetrize: bool = False) -> Form:
        t = np.asarray(t, dtype=float)
        p = t.ndim
        n = t.shape[0] if p else 0
        if p == 0:
            return cls(0, 0, t.reshape(1))
        if antisymmetrize:
            acc = np.zeros_like(t)
            for s in permutations(range(p)):
                acc += _perm_sign(s) * np.transpose(t, s)
            t = acc / math.factorial(p)
        return cls(n, p, t[_gather_index(n, p)])

    # views ------------------------------------------------------------------
    def tensor(self) -> np.ndarray:
        """Fully antisymmetric component array of shape (n,)*p."""
        n, p = self.dim, self.degree
        if p == 0:
            return np.array(self.coeffs[0])
        flat, signs = _tensor_scatter(n, p)
        out = np.zeros(n ** p)
        out[flat] = self.coeffs[:, None] * signs[None, :]
        return out.reshape((n,) * p)

    def __call__(self, *vectors: Sequence[float]) -> float:
        if len(vectors) != self.degree:
            raise FormError(f"{self.degree}-form evaluated on {len(vectors)} vectors")
        if self.degree == 0:
            return float(self.coeffs[0])
        v = np.column_stack([np.asarray(x, dtype=float) for x in vectors])
        idx = np.array(combos(self.dim, self.degree), dtype=np.intp)
        return float(self.coeffs @ np.linalg.det(v[idx]))

    def coefficient(self, indices: Sequence[int]) -> float:
        s, srt = sort_sign(tuple(indices))
        if not s:
            return 0.0
        return s * float(self.coeffs[combo_index(self.dim, self.degree)[srt]])

    def norm(self) -> float:
        """Euclidean norm of the coefficients (orthonormal-basis norm)."""
        return float(np.linalg.norm(self.coeffs))

    def _check(self, other: Form) -> None:
        if self.dim != other.dim or self.degree != other.degree:
            raise FormError("forms of different dimension or degree")

    def __add__(self, other: Form) -> Form:
        self._check(other)
        return Form(self.dim, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: Form) -> Form:
        self._check(other)
        return Form(self.dim, self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> Form:
        return Form(self.dim, self.degree, -self.coeffs)

    def __mul__(self, s: float) -> Form:
        return Form(self.dim, self.degree, float(s) * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> Form:
        return Form(self.dim, self.degree, self.coeffs / float(s))

    def __repr__(self) -> str:
        terms = [f"{c:+.6g} e{''.join(map(str, I))}"
                 for c, I in zip(self.coeffs, combos(self.dim, self.degree)) if abs(c) > 1e-14]
        return f"Form(dim={self.dim}, degree={self.degree}: {' '.join(terms) or '0'})"


@dataclass(eq=False)
class Gram:
    """Symmetric positive-definite matrix of inner products of the working basis."""

    matrix: np.ndarray
    _compounds: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise FormError("Gram matrix must be square")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > 1e-12 * scale:
            raise FormError("Gram matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m).min() <= 1e-12 * scale:
            raise FormError("Gram matrix is not positive definite")
        self.matrix = m

    @classmethod
    def identity(cls, n: int) -> Gram:
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    @cached_property
    def sqrt_det(self) -> float:
        return math.sqrt(np.linalg.det(self.matrix))

    def inverse_compound(self, p: int) -> np.ndarray:
        if p not in self._compounds:
            self._compounds[p] = _compound(self.inverse, p)
        return self._compounds[p]


def _as_gram(g: Gram | np.ndarray | None, n: int) -> Gram | None:
    if g is None or isinstance(g, Gram):
        if g is not None and g.dim != n:
            raise FormError("Gram dimension mismatch")
        return g
    return Gram(np.asarray(g))


def _check_orientation(o: int) -> int:
    if o not in (1, -1):
        raise FormError("orientation must be +1 or -1")
    return o


def wedge(a: Form, b: Form) -> Form:
    if a.dim != b.dim:
        raise FormError("wedge of forms on different spaces")
    n, p, q = a.dim, a.degree, b.degree
    if p + q > n:
        raise FormError(f"degree {p + q} exceeds dimension {n}")
    if p == 0:
        return b * a.coeffs[0]
    if q == 0:
        return a * b.coeffs[0]
    k, i, j, s = _wedge_table(n, p, q)
    out = np.zeros(math.comb(n, p + q))
    np.add.at(out, k, s * a.coeffs[i] * b.coeffs[j])
    return Form(n, p + q, out)


def wedge_all(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior(x: Sequence[float], a: Form) -> Form:
    """Contraction in the first slot: ``(x _| a)(v...) = a(x, v...)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.dim,):
        raise FormError("vector and form live on different spaces")
    if a.degree == 0:
        raise FormError("interior product of a 0-form")
    o, v, s, sg = _interior_table(a.dim, a.degree)
    out = np.zeros(math.comb(a.dim, a.degree - 1))
    np.add.at(out, o, sg * x[v] * a.coeffs[s])
    return Form(a.dim, a.degree - 1, out)


def inner(a: Form, b: Form, g: Gram | np.ndarray | None = None) -> float:
    """Induced inner product on p-forms, normalised so decomposables of
    orthonormal covectors have unit length."""
    if a.dim != b.dim or a.degree != b.degree:
        raise FormError("inner product of forms of different degree")
    g = _as_gram(g, a.dim)
    if g is None:
        return float(a.coeffs @ b.coeffs)
    return float(a.coeffs @ g.inverse_compound(a.degree) @ b.coeffs)


def volume_form(g: Gram | np.ndarray | None, n: int, orientation: int = 1) -> Form:
    g = _as_gram(g, n)
    scale = 1.0 if g is None else g.sqrt_det
    return Form(n, n, np.array([_check_orientation(orientation) * scale]))


def hodge(a: Form, g: Gram | np.ndarray | None = None, orientation: int = 1) -> Form:
    """Hodge star defined by ``b ^ *a = <b, a> vol``."""
    n, p = a.dim, a.degree
    g = _as_gram(g, n)
    _check_orientation(orientation)
    if g is None:
        raised, scale = a.coeffs, 1.0
    else:
        raised, scale = g.inverse_compound(p) @ a.coeffs, g.sqrt_det
    pos, sgn = _complement_table(n, p)
    out = np.zeros(math.comb(n, n - p))
    out[pos] = orientation * scale * sgn * raised
    return Form(n, n - p, out)


def pullback(L: np.ndarray, a: Form) -> Form:
    """Pull back a form on R^n along the linear map ``L: R^m -> R^n`` (shape n x m)."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != a.dim:
        raise FormError(f"linear map of shape {L.shape} cannot pull back a form on R^{a.dim}")
    m = L.shape[1]
    if a.degree > m:
        raise FormError(f"cannot pull a {a.degree}-form back to R^{m}")
    if a.degree == 0:
        return Form(m, 0, a.coeffs.copy())
    return Form(m, a.degree, a.coeffs @ _compound(L, a.degree))


def lower(v: Sequence[float], g: Gram | np.ndarray | None = None) -> Form:
    """Metric dual covector of a vector."""
    v = np.asarray(v, dtype=float)
    g = _as_gram(g, v.size)
    return Form.from_vector(v if g is None else g.matrix @ v)


def raise_index(a: Form, g: Gram | np.ndarray | None = None) -> np.ndarray:
    """Metric dual vector of a 1-form."""
    if a.degree != 1:
        raise FormError("only 1-forms can be raised")
    g = _as_gram(g, a.dim)
    return a.coeffs.copy() if g is None else g.inverse @ a.coeffs


def apply_J_slot(B: np.ndarray | Form, J: np.ndarray, slot: int) -> np.ndarray:
    """``(J_(j) B)(.., X_j, ..) = -B(.., J X_j, ..)`` with 1-based ``slot``.

    ``J`` acts on column vectors, ``(JX)^b = J[b, a] X^a``.  Returns the
    component array.
    """
    t = B.tensor() if isinstance(B, Form) else np.asarray(B, dtype=float)
    if not 1 <= slot <= t.ndim:
        raise FormError(f"slot {slot} outside 1..{t.ndim}")
    moved = np.tensordot(t, J, axes=([slot - 1], [0]))
    return -np.moveaxis(moved, -1, slot - 1)


def apply_J_all(B: np.ndarray | Form, J: np.ndarray) -> np.ndarray:
    """``(J B)(X_1..X_s) = (-1)^s B(J X_1, .., J X_s)``."""
    t = B.tensor() if isinstance(B, Form) else np.asarray(B, dtype=float)
    for k in range(t.ndim):
        t = np.moveaxis(np.tensordot(t, J, axes=([k], [0])), -1, k)
    return (-1) ** t.ndim * t


def J_on_covector(mu: Form, J: np.ndarray) -> Form:
    """``(J mu)(X) = -mu(J X)``."""
    return Form(mu.dim, 1, -np.asarray(J).T @ mu.coeffs)


def central_difference(fn: Callable[[np.ndarray], np.ndarray], u: Sequence[float],
                       h: float = 1e-4, order: int = 2) -> np.ndarray:
    """Partial derivatives of an array-valued field; result stacked on axis 0."""
    u = np.asarray(u, dtype=float)
    out = []
    for j in range(u.size):
        e = np.zeros_like(u)
        e[j] = h
        if order == 2:
            d = (np.asarray(fn(u + e)) - np.asarray(fn(u - e))) / (2 * h)
        elif order == 4:
            d = (-np.asarray(fn(u + 2 * e)) + 8 * np.asarray(fn(u + e))
                 - 8 * np.asarray(fn(u - e)) + np.asarray(fn(u - 2 * e))) / (12 * h)
        else:
            raise ValueError("order must be 2 or 4")
        out.append(d)
    return np.stack(out)


def fd_exterior_derivative(field: Callable[[np.ndarray], Form], u: Sequence[float],
                           h: float = 1e-4, order: int = 2) -> Form:
    """Exterior derivative of a coordinate form field by central differences."""
    u = np.asarray(u, dtype=float)
    probe = field(u)
    n, p = probe.dim, probe.degree
    if n != u.size:
        raise FormError("form field dimension differs from the chart dimension")
    if p == n:
        raise FormError("exterior derivative of a top-degree form")
    try:
        partials = central_difference(lambda x: field(x).coeffs, u, h, order)
    except Exception as exc:
        raise FormError(f"form field failed inside the stencil at u={u.tolist()}") from exc
    out = Form.zero(n, p + 1)
    for j in range(n):
        out = out + wedge(Form.basis(n, (j,)), Form(n, p, partials[j]))
    return out
