"""Invariant suites for every module, run by ``spin7su3 verify``.

Algebraic suites are checked against the user tolerance; finite-difference
suites carry their own documented thresholds in ``FD_TOLERANCES``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..cayley import (AmbientStructure, beta_forms, cayley_form, nabla_phi_fd, nabla_phi_from_rbar,
                      random_rbar, project_rbar_balanced, star_phi_matrix, xi_spin7)
from ..forms import Form, Gram, hodge, inner, volume_form, wedge
from ..su3 import Su3Point, estrella_residuals, r_inverse, r_map
from ..subman import (FDConfig, fd_torsion, fundamental_data, induced_su3, rotated_normals,
                      table_match, torsion_via_rraa)
from .examples import EXAMPLE_NAMES, ExampleSpec, build_example

FD_TOLERANCES = {
    "ambient_nabla_phi": 1e-5,
    "dual_path": 1e-5,
    "table_mismatches": 0.5,
}


@dataclass
class SuiteResult:
    name: str
    kind: str                  # "algebraic" or "fd"
    tol: float
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "tol": self.tol, "passed": self.passed,
                "residuals": {k: float(v) for k, v in sorted(self.residuals.items())}}


def _random_form(rng: np.random.Generator, n: int, p: int) -> Form:
    proto = Form.zero(n, p)
    return Form(n, p, rng.normal(size=proto.coeffs.size))


def suite_forms(rng: np.random.Generator, samples: int = 10) -> dict[str, float]:
    res = {"graded_commutativity": 0.0, "hodge_involution": 0.0, "hodge_pairing": 0.0}
    for _ in range(samples):
        n = int(rng.integers(4, 9))
        p, q = (int(k) for k in rng.integers(0, n // 2 + 1, size=2))
        a, b = _random_form(rng, n, p), _random_form(rng, n, q)
        res["graded_commutativity"] = max(res["graded_commutativity"],
                                          (wedge(a, b) - (-1) ** (p * q) * wedge(b, a)).norm())
        A = rng.normal(size=(n, n))
        g = Gram(A @ A.T + n * np.eye(n))
        c = _random_form(rng, n, p)
        res["hodge_involution"] = max(res["hodge_involution"],
                                      (hodge(hodge(a, g), g) - (-1) ** (p * (n - p)) * a).norm())
        lhs = wedge(a, hodge(c, g)).coeffs[0]
        rhs = inner(a, c, g) * volume_form(g, n).coeffs[0]
        res["hodge_pairing"] = max(res["hodge_pairing"], abs(lhs - rhs))
    return res


def suite_cayley(rng: np.random.Generator) -> dict[str, float]:
    res = {}
    for sigma in (1, -1):
        phi = cayley_form(sigma)
        vol = volume_form(None, 8)
        res[f"phi_phi[{sigma}]"] = (wedge(phi.phi, phi.phi) - 14 * sigma * vol).norm()
        res[f"self_dual[{sigma}]"] = (hodge(phi.phi) - sigma * phi.phi).norm()
        betas = beta_forms(sigma)
        gram = np.array([[inner(a, b) for b in betas] for a in betas])
        res[f"beta_gram[{sigma}]"] = float(np.abs(gram - 4 * np.eye(7)).max())
        res[f"beta_eigen[{sigma}]"] = max((hodge(wedge(b, phi.phi)) + 3 * b).norm() for b in betas)
        ev = np.linalg.eigvalsh(star_phi_matrix(phi))
        res[f"eigen_dims[{sigma}]"] = float(abs(np.sum(np.isclose(ev, 1.0)) - 21)
                                            + abs(np.sum(np.isclose(ev, -3.0)) - 7))
        rb = random_rbar(phi, rng)
        x, y = rng.normal(size=8), rng.normal(size=8)
        res[f"xi_formulas[{sigma}]"] = float(np.abs(
            xi_spin7(rb, x, y, phi, "metric") - xi_spin7(rb, x, y, phi, "cross")).max())
        bal = project_rbar_balanced(phi, rb)
        res[f"balanced_spin7perp[{sigma}]"] = bal.spin7_residual(phi)
        amb = AmbientStructure.conformal_linear(0.1 * np.eye(8)[1], sigma)
        p = rng.uniform(-1, 1, size=8)
        res[f"conformal_lcp[{sigma}]"] = (amb.dphi(p) - wedge(amb.theta8(p), amb.phi(p))).norm()
        res[f"conformal_lee[{sigma}]"] = float(np.abs(amb.theta8(p).coeffs - 0.4 * np.eye(8)[1]).max())
    return res


def suite_ambient_fd(rng: np.random.Generator) -> dict[str, float]:
    res = {}
    for sigma in (1, -1):
        amb = AmbientStructure.conformal_linear(0.1 * np.eye(8)[1], sigma)
        p = rng.uniform(-1, 1, size=8)
        fd = nabla_phi_fd(amb, p, 1e-3)
        exact = nabla_phi_from_rbar(amb.cayley, amb.rbar(p))
        res[f"nabla_phi[{sigma}]"] = max((a - b).norm() for a, b in zip(fd, exact))
    return res


def suite_su3(rng: np.random.Generator, samples: int = 100) -> dict[str, float]:
    res = {}
    structures = [("canonical", Su3Point.canonical())]
    for name in ("s3xs3", "s6", "helicoid_r3_q4"):
        ex = build_example(ExampleSpec(name, gamma=float(rng.uniform(0, 2 * np.pi))))
        u = ex.sample_points()[0]
        geo = fundamental_data(ex.chart, u, ex.ambient)
        structures.append((name, induced_su3(geo, ex.ambient.sigma, ex.gamma(u))))
    for name, su3 in structures:
        worst = {k: 0.0 for k in ("pp", "mm", "mp", "pm")}
        for _ in range(samples):
            for k, v in estrella_residuals(su3, Form.from_vector(rng.normal(size=6))).items():
                worst[k] = max(worst[k], v)
        res.update({f"{name}:{k}": v for k, v in su3.residuals(rng).items()})
        res[f"{name}:estrella"] = max(worst.values())
        r = rng.normal(size=(6, 6))
        res[f"{name}:r_roundtrip"] = float(np.abs(r_map(r_inverse(r, su3), su3) - r).max())
    return res


def suite_subman_algebraic(rng: np.random.Generator) -> dict[str, float]:
    """Phase covariance of the induced structure and rotation invariance of J."""
    res = {"J_rotation": 0.0, "phase_shift": 0.0}
    for name in ("s3xs3", "ellipsoid7", "graph"):
        ex = build_example(ExampleSpec(name))
        geo = fundamental_data(ex.chart, ex.sample_points()[1], ex.ambient)
        for sigma in (1, -1):
            base = induced_su3(geo, sigma, 0.0)
            for _ in range(5):
                t = float(rng.uniform(0, 2 * np.pi))
                rot = induced_su3(rotated_normals(geo, t), sigma, 0.0)
                # rotating the normal frame by t shifts the phase by sigma t
                shifted = induced_su3(geo, sigma, sigma * t)
                res["J_rotation"] = max(res["J_rotation"], float(np.abs(rot.J - base.J).max()))
                res["phase_shift"] = max(res["phase_shift"], (rot.psi_plus - shifted.psi_plus).norm(),
                                         (rot.psi_minus - shifted.psi_minus).norm())
    return res


def suite_subman_fd(fd: FDConfig = FDConfig(), grid_points: int = 2) -> dict[str, float]:
    """Shape-operator torsion against finite differences on every example."""
    res = {}
    for name in EXAMPLE_NAMES:
        for sigma in (1, -1):
            ex = build_example(ExampleSpec(name, sigma=sigma, gamma=0.3))
            for k, u in enumerate(ex.sample_points()[:grid_points]):
                geo = fundamental_data(ex.chart, u, ex.ambient)
                st = torsion_via_rraa(geo, ex.ambient, 0.3)
                fdt = fd_torsion(ex.chart, u, st.su3, geo, ex.ambient, 0.3, fd)
                key = f"{name}[{sigma}][{k}]"
                res[f"r:{key}"] = float(np.abs(st.r - fdt.r).max())
                res[f"theta6:{key}"] = float(np.abs(st.theta6 - fdt.theta6).max())
                res[f"traces:{key}"] = max(st.trace_residuals)
    return res


def suite_tables() -> dict[str, float]:
    res = {}
    for name in ("plane", "s3xs3", "s6", "conformal_slice"):
        for sigma in (1, -1):
            for g in (0.0, 0.3, np.pi / 4):
                ex = build_example(ExampleSpec(name, sigma=sigma, gamma=g))
                u = ex.sample_points()[0]
                geo = fundamental_data(ex.chart, u, ex.ambient)
                tm = table_match(torsion_via_rraa(geo, ex.ambient, g), geo, ex.ambient)
                res[f"{name}[{sigma}][{g:.3f}]"] = float(len(tm.mismatches))
    return res


SUITES: dict[str, tuple[str, Callable]] = {
    "forms": ("algebraic", lambda rng, fd: suite_forms(rng)),
    "cayley": ("algebraic", lambda rng, fd: suite_cayley(rng)),
    "su3": ("algebraic", lambda rng, fd: suite_su3(rng)),
    "subman": ("algebraic", lambda rng, fd: suite_subman_algebraic(rng)),
    "ambient_nabla_phi": ("fd", lambda rng, fd: suite_ambient_fd(rng)),
    "dual_path": ("fd", lambda rng, fd: suite_subman_fd(fd)),
    "table_mismatches": ("fd", lambda rng, fd: suite_tables()),
}


def run_verify(tol: float = 1e-9, seed: int = 0, only: list[str] | None = None,
               fd: FDConfig = FDConfig()) -> list[SuiteResult]:
    """Run the selected suites with a shared seeded generator."""
    out = []
    for name, (kind, fn) in SUITES.items():
        if only and name not in only:
            continue
        rng = np.random.default_rng(seed)
        t = tol if kind == "algebraic" else FD_TOLERANCES[name]
        out.append(SuiteResult(name, kind, t, fn(rng, fd)))
    return out


__all__ = ["FD_TOLERANCES", "SUITES", "SuiteResult", "run_verify"]
