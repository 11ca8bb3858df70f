import numpy as np
import pytest
from hypothesis import given, strategies as st

from spin7su3.cayley import endo_action
from spin7su3.forms import Form, interior, wedge
from spin7su3.su3 import (NORM_KEYS, Su3Error, Su3Point, adapted_frame, algebraic_dforms,
                          classify_su3, decompose_r, estrella_residuals, eta_expressions,
                          eta_from_dpsi, nijenhuis, r_from_dforms, r_inverse, r_map,
                          theta6_from_r, xi_u3, xi_u3_matrix)

seeds = st.integers(0, 2**32 - 1)
CANON = Su3Point.canonical()


def random_structure(rng):
    """Canonical structure expressed in a random orthonormal basis, with a random phase."""
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    return CANON.transform(q).rotate_phase(float(rng.uniform(0, 2 * np.pi)))


def test_canonical_identities():
    res = CANON.residuals()
    assert max(res.values()) < 1e-12
    assert CANON.orientation == 1


@given(seeds)
def test_structure_identities_random_frames(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    assert max(su3.residuals(rng).values()) < 1e-10
    pp, pm = su3.psi_plus, su3.psi_minus
    assert wedge(pp, pp).norm() < 1e-12 and wedge(pm, pm).norm() < 1e-12
    for _ in range(5):
        mu = Form.from_vector(rng.normal(size=6))
        assert max(estrella_residuals(su3, mu).values()) < 1e-10


def test_degenerate_structure_rejected():
    bad = Su3Point(CANON.g, 2 * CANON.J, CANON.omega, CANON.psi_plus, CANON.psi_minus)
    with pytest.raises(Su3Error):
        bad.validate()
    with pytest.raises(Su3Error):
        adapted_frame(bad)


def test_adapted_frame_canonical_is_identity():
    assert np.allclose(adapted_frame(CANON), np.eye(6))


@given(seeds)
def test_adapted_frame_normal_form(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    F = adapted_frame(su3)
    e1, e2, e3 = F[:, :3].T
    assert np.allclose(F.T @ su3.g.matrix @ F, np.eye(6), atol=1e-10)
    assert su3.psi_plus(e1, e2, e3) == pytest.approx(1.0)
    assert su3.psi_minus(e1, e2, e3) == pytest.approx(0.0, abs=1e-10)
    local = su3.transform(F)
    for a, b in [(local.omega, CANON.omega), (local.psi_plus, CANON.psi_plus),
                 (local.psi_minus, CANON.psi_minus)]:
        assert np.allclose(a.coeffs, b.coeffs, atol=1e-10)
    assert np.allclose(adapted_frame(local), np.eye(6), atol=1e-10)


def test_r_map_elementary():
    e1 = np.eye(6)[0]
    beta = np.einsum("a,bc->abc", e1, interior(e1, CANON.psi_plus).tensor())
    expected = np.zeros((6, 6))
    expected[0, 0] = 1.0
    assert np.allclose(r_map(beta, CANON), expected)
    assert np.allclose(r_map(np.zeros((6, 6, 6)), CANON), 0.0)


def test_r_map_rejects_u3_component():
    beta = np.zeros((6, 6, 6))
    beta[0] = CANON.omega_matrix()
    with pytest.raises(Su3Error):
        r_map(beta, CANON)


@given(seeds)
def test_r_round_trip(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    r = rng.normal(size=(6, 6))
    assert np.abs(r_map(r_inverse(r, su3), su3) - r).max() < 1e-12


@given(seeds)
def test_decomposition_orthogonal_and_complete(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    r = rng.normal(size=(6, 6))
    parts = decompose_r(r, su3).parts
    assert np.allclose(sum(parts.values()), r, atol=1e-12)
    keys = list(parts)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            assert abs(np.sum(parts[a] * parts[b])) < 1e-10


def test_decomposition_dimensions():
    dims = {}
    basis = [np.eye(36)[k].reshape(6, 6) for k in range(36)]
    for key in NORM_KEYS[:6]:
        images = np.array([decompose_r(b, CANON).parts[key].ravel() for b in basis])
        dims[key] = np.linalg.matrix_rank(images, tol=1e-10)
    assert dims == {"W1p": 1, "W1m": 1, "W2p": 8, "W2m": 8, "W3": 12, "W4": 6}


def test_decomposition_examples():
    norms = decompose_r(np.eye(6), CANON).norms
    assert norms["W1m"] > 1 and all(v < 1e-12 for k, v in norms.items() if k != "W1m")
    u = np.eye(6)[0]
    ju = CANON.J @ u
    sym = np.outer(u, ju) + np.outer(ju, u)
    norms = decompose_r(sym, CANON).norms
    assert norms["W3"] > 1 and all(v < 1e-12 for k, v in norms.items() if k != "W3")


@given(seeds)
def test_theta6_only_sees_w4(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    A = rng.normal(size=(6, 6))
    assert theta6_from_r(A + A.T, su3).norm() < 1e-12
    parts = decompose_r(A, su3).parts
    assert np.allclose(theta6_from_r(A, su3).coeffs, theta6_from_r(parts["W4"], su3).coeffs,
                       atol=1e-12)


@given(seeds)
def test_dforms_round_trip(seed):
    """(r, eta) -> (d omega, dPsi+-) -> (r, eta) through the exterior-derivative formulas."""
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    r = rng.normal(size=(6, 6))
    eta = Form.from_vector(rng.normal(size=6))
    d_om, d_pp, d_pm = algebraic_dforms(r, eta, su3)
    theta = theta6_from_r(r, su3)
    eta_back, spread = eta_from_dpsi(d_pp, d_pm, su3, theta)
    assert spread < 1e-10
    assert np.allclose(eta_back.coeffs, eta.coeffs, atol=1e-10)
    assert np.allclose(r_from_dforms(d_om, d_pp, d_pm, eta_back, su3), r, atol=1e-10)


def test_uncorrected_variant_scales_w1():
    r = np.eye(6) + 0.5 * CANON.omega_matrix()
    eta = Form.zero(6, 1)
    d = algebraic_dforms(r, eta, CANON)
    raw = r_from_dforms(*d, eta, CANON, uncorrected=True)
    parts = decompose_r(raw, CANON).norms
    exact = decompose_r(r, CANON).norms
    assert parts["W1m"] == pytest.approx(7 * exact["W1m"])


@given(seeds)
def test_eta_from_synthetic_dpsi(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    eta0, theta0 = (Form.from_vector(rng.normal(size=6)) for _ in range(2))
    c = 3 * eta0 + 0.5 * theta0
    d_pp, d_pm = -wedge(c, su3.psi_plus), -wedge(c, su3.psi_minus)
    eta, spread = eta_from_dpsi(d_pp, d_pm, su3, theta0)
    assert spread < 1e-10
    assert np.allclose(eta.coeffs, eta0.coeffs, atol=1e-10)
    for e in eta_expressions(d_pp, d_pm, su3):
        assert np.allclose(e.coeffs, (6 * eta0 + theta0).coeffs, atol=1e-10)
    eta, _ = eta_from_dpsi(Form.zero(6, 4), Form.zero(6, 4), su3, Form.zero(6, 1))
    assert eta.norm() == 0


def test_eta_residual_guard():
    bad = wedge(Form.basis(6, (0,)), CANON.psi_plus)
    with pytest.raises(Su3Error):
        eta_from_dpsi(bad, Form.zero(6, 4), CANON, Form.zero(6, 1), max_residual=1e-6)


@given(seeds)
def test_xi_u3_properties(seed):
    rng = np.random.default_rng(seed)
    su3 = random_structure(rng)
    r = rng.normal(size=(6, 6))
    x, y, z = rng.normal(size=(3, 6))
    assert np.allclose(xi_u3(np.zeros((6, 6)), su3, x, y), 0.0)
    assert xi_u3(r, su3, x, y) @ z == pytest.approx(-(xi_u3(r, su3, x, z) @ y), abs=1e-10)
    A = xi_u3_matrix(r, su3, x)
    nab = Form.from_tensor(np.einsum("a,abc->bc", x, r_inverse(r, su3)))
    # nabla omega = -xi omega and -xi Psi+ = 1/2 sum_j (e_j _| nabla_X omega) ^ (e_j _| Psi-)
    assert (nab + endo_action(A, su3.omega)).norm() < 1e-10
    rhs = Form.zero(6, 3)
    for e in np.eye(6):
        rhs = rhs + wedge(interior(e, nab), interior(e, su3.psi_minus))
    assert (-endo_action(A, su3.psi_plus) - 0.5 * rhs).norm() < 1e-10


def test_classify_kahler_and_nearly_kahler():
    rep = classify_su3(np.zeros((6, 6)), Form.zero(6, 1), CANON)
    assert rep.label == () and rep.predicates["kahler"] and rep.half_flat
    nk = classify_su3(np.eye(6), Form.zero(6, 1), CANON)
    assert nk.label == ("W1-",) and nk.predicates["nearly_kahler"]
    assert nk.half_flat and not nk.predicates["almost_kahler"]
    assert nk.contained_in(["W1-", "W3"])


def test_classify_lck():
    A = np.zeros((6, 6))
    A[0, 1], A[1, 0] = 1.0, -1.0
    w4 = decompose_r(A, CANON).parts["W4"]
    theta = theta6_from_r(w4, CANON)
    eta = Form(6, 1, -theta.coeffs / 6.0)
    rep = classify_su3(w4, eta, CANON)
    assert set(rep.label) == {"W4", "W5"}
    assert rep.predicates["locally_conformal_kahler"]


@given(seeds)
def test_classify_norms_are_orthogonal_split(seed):
    rng = np.random.default_rng(seed)
    r = rng.normal(size=(6, 6))
    eta = Form.from_vector(rng.normal(size=6))
    rep = classify_su3(r, eta, CANON)
    total = sum(v * v for v in rep.norms.values())
    assert total == pytest.approx(np.sum(r * r) + eta.norm() ** 2, rel=1e-10)


def test_nijenhuis_constant_J_vanishes():
    J = CANON.J
    N = nijenhuis(lambda u: J, lambda u: np.eye(6), np.zeros(6))
    assert np.abs(N).max() < 1e-12


def test_nijenhuis_holomorphic_change_of_coordinates():
    # pull the flat complex structure back along u -> (u + 0.1 (z1^2 components)), still integrable
    def chart_jac(u):
        z = u[0] + 1j * u[3]
        dw = 1 + 0.2 * z
        D = np.eye(6)
        D[0, 0], D[0, 3], D[3, 0], D[3, 3] = dw.real, -dw.imag, dw.imag, dw.real
        return D

    J0 = CANON.J

    def J_field(u):
        D = chart_jac(u)
        return np.linalg.solve(D, J0 @ D)

    def g_field(u):
        D = chart_jac(u)
        return D.T @ D

    N = nijenhuis(J_field, g_field, np.array([0.3, 0.1, -0.2, 0.4, 0.0, 0.2]), 1e-3)
    assert np.abs(N).max() < 1e-9
