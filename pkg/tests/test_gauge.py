import numpy as np
import pytest

from affinesphere.gauge import (
    DegenerateAnsatzError,
    GaugeData,
    GridMismatchError,
    MissingDerivativesError,
    RealForm,
    RealityMode,
    RealityViolationError,
    build_affine_sphere_ansatz,
    build_first_ansatz,
    build_toda_ansatz,
    build_tzitzeica_ansatz,
    build_wang_ansatz,
    check_prop42,
    check_theorem11,
    classify_real_form,
    hitchin_residual,
    lax_commutator_coeffs,
    toda_residual,
    tzitzeica_sign_trace,
)
from affinesphere.matalg3 import in_su21, matrix_unit, maxabs, random_su21_gauge, star
from affinesphere.pdesolve import ScalarGrid, goursat_march, toda_march

E = matrix_unit


def rand_cmat(rng):
    return rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))


def random_gauge_data(rng):
    return GaugeData(
        A_z=rand_cmat(rng), A_zt=rand_cmat(rng), P=rand_cmat(rng), Q=rand_cmat(rng),
        dA_z_dzt=rand_cmat(rng), dA_zt_dz=rand_cmat(rng),
        dP_dzt=rand_cmat(rng), dQ_dz=rand_cmat(rng),
        dP_dz=rand_cmat(rng), dQ_dzt=rand_cmat(rng),
    )


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def test_tzitzeica_builder_at_zero():
    gd = build_tzitzeica_ansatz(0.0, 0.0)
    assert np.allclose(gd.P, E(1, 3))
    assert np.allclose(gd.Q, E(3, 1))
    assert np.allclose(gd.A_z, E(2, 1) + E(3, 2))
    assert np.allclose(gd.A_zt, E(1, 2) + E(2, 3))


def test_tzitzeica_builder_exponential_entry():
    gd = build_tzitzeica_ansatz(np.log(2.0), 0.0)
    assert abs(gd.Q[2, 0] - 2.0) <= 1e-14


def test_tzitzeica_builder_traceless():
    rng = np.random.default_rng(0)
    for _ in range(5):
        u, uz = rng.normal() + 1j * rng.normal(), rng.normal() + 1j * rng.normal()
        gd = build_tzitzeica_ansatz(u, uz)
        for m in (gd.A_z, gd.A_zt, gd.P, gd.Q):
            assert abs(np.trace(m)) <= 1e-13 * max(1.0, maxabs(m))


def test_affine_sphere_builder_specials():
    gd = build_affine_sphere_ansatz(0.0, 0.0, U=1.0)
    assert np.allclose(gd.Q, E(1, 3) / np.sqrt(2))
    assert np.allclose(gd.A_z, E(1, 2) / np.sqrt(2) - E(2, 3))


def test_affine_sphere_builder_euclidean_reality():
    rng = np.random.default_rng(1)
    for _ in range(10):
        psi = rng.normal()
        psi_z = rng.normal() + 1j * rng.normal()
        U = rng.normal() + 1j * rng.normal()
        gd = build_affine_sphere_ansatz(psi, psi_z, U=U)
        assert maxabs(star(gd.Q) + gd.P) <= 1e-13
        assert maxabs(star(gd.A_z) - gd.A_zt) <= 1e-13


def test_affine_sphere_builder_reality_violation():
    with pytest.raises(RealityViolationError):
        build_affine_sphere_ansatz(0.1 + 0.2j, 0.0, U=1.0)
    with pytest.raises(RealityViolationError):
        build_affine_sphere_ansatz(0.1, 0.0, U=1.0, Ut=2.0)


def test_wang_builder():
    gd = build_wang_ansatz(0.0, 0.0)
    assert np.allclose(gd.P, E(1, 3) + E(2, 1) + E(3, 2))
    assert np.allclose(gd.Q, E(1, 2) + E(2, 3) + E(3, 1))
    assert maxabs(gd.A_zt) == 0.0
    r1, r2, r3 = hitchin_residual(gd)
    assert max(maxabs(r1), maxabs(r2), maxabs(r3)) == 0.0


def test_wang_builder_on_shell_any_u():
    gd = build_wang_ansatz(0.2 - 0.3j, 0.4 + 0.1j, 0.9j)
    assert maxabs(gd.A_zt) == 0.0
    r1, r2, r3 = hitchin_residual(gd)
    assert max(maxabs(r1), maxabs(r2), maxabs(r3)) <= 1e-13


def test_first_ansatz_specials():
    gd = build_first_ansatz(0.0, 0.0, 0.0)
    assert maxabs(gd.A_z) == 0.0 and maxabs(gd.A_zt) == 0.0
    gd2 = build_first_ansatz(0.4, 0.3 - 0.2j, 1.2 + 0.4j)
    assert abs(gd2.Q[0, 2] - np.exp(0.2) / np.sqrt(2)) <= 1e-14
    # A_p = A_z + A_zbar is su(2,1)-valued
    assert in_su21(gd2.A_z + gd2.A_zt)
    assert maxabs(star(gd2.Q) + gd2.P) <= 1e-13


def test_first_ansatz_on_shell_residuals():
    gd = build_first_ansatz(0.4, 0.3 - 0.2j, 1.2 + 0.4j)
    r1, r2, r3 = hitchin_residual(gd)
    assert max(maxabs(r1), maxabs(r2), maxabs(r3)) <= 1e-13


# --------------------------------------------------------------------------
# residuals and the spectral-parameter identity
# --------------------------------------------------------------------------

def test_hitchin_residual_tzitzeica_zero():
    gd = build_tzitzeica_ansatz(0.0, 0.0)
    # [A_z, A_zt] = diag(-1, 0, 1) cancels [P, Q] = diag(1, 0, -1)
    comm = gd.A_z @ gd.A_zt - gd.A_zt @ gd.A_z
    assert np.allclose(comm, np.diag([-1.0, 0.0, 1.0]))
    r1, r2, r3 = hitchin_residual(gd)
    assert max(maxabs(r1), maxabs(r2), maxabs(r3)) == 0.0


def test_hitchin_residual_constant_fields_no_higgs():
    rng = np.random.default_rng(2)
    z = np.zeros((3, 3))
    gd = GaugeData(
        A_z=rand_cmat(rng), A_zt=rand_cmat(rng), P=z, Q=z,
        dA_z_dzt=z, dA_zt_dz=z, dP_dzt=z, dQ_dz=z, dP_dz=z, dQ_dzt=z,
    )
    _, _, r3 = hitchin_residual(gd)
    assert np.allclose(r3, gd.A_z @ gd.A_zt - gd.A_zt @ gd.A_z)


def test_missing_derivatives_raises():
    gd = GaugeData(A_z=np.eye(3), A_zt=np.eye(3), P=np.eye(3), Q=np.eye(3))
    with pytest.raises(MissingDerivativesError):
        hitchin_residual(gd)
    with pytest.raises(MissingDerivativesError):
        lax_commutator_coeffs(gd)


def test_lax_coefficients_match_residuals():
    rng = np.random.default_rng(3)
    for _ in range(100):
        gd = random_gauge_data(rng)
        r1, r2, r3 = hitchin_residual(gd)
        c0, c1, c2 = lax_commutator_coeffs(gd)
        scale = max(maxabs(r1), maxabs(r2), maxabs(r3), 1.0)
        assert maxabs(c0 - r1) <= 1e-13 * scale
        assert maxabs(c1 - r3) <= 1e-13 * scale
        assert maxabs(c2 + r2) <= 1e-13 * scale


def test_lax_polynomial_interpolation_oracle():
    # evaluate the commutator at three other spectral values and fit
    from affinesphere.gauge import _lax_commutator_at

    rng = np.random.default_rng(4)
    gd = random_gauge_data(rng)
    c0, c1, c2 = lax_commutator_coeffs(gd)
    lams = [2.0, -1.0 + 0.5j, 3.0 - 2.0j]
    V = np.array([[1, lam, lam ** 2] for lam in lams])
    samples = np.array([_lax_commutator_at(gd, lam) for lam in lams])
    coeffs = np.einsum("sl,lij->sij", np.linalg.inv(V), samples)
    for fitted, direct in zip(coeffs, (c0, c1, c2)):
        assert maxabs(fitted - direct) <= 1e-10 * max(1.0, maxabs(direct))


# --------------------------------------------------------------------------
# characterisation conditions
# --------------------------------------------------------------------------

def test_theorem11_liouville_point():
    rep = check_theorem11(build_affine_sphere_ansatz(0.0, 0.0, U=1.0))
    assert rep.c1 and abs(rep.tr_q_qstar - 0.5) <= 1e-13
    assert rep.c2 and rep.c3


def test_theorem11_zero_higgs_fails_c1():
    z = np.zeros((3, 3))
    gd = GaugeData(
        A_z=z, A_zt=z, P=z, Q=z, dA_z_dzt=z, dA_zt_dz=z,
        dP_dzt=z, dQ_dz=z, dP_dz=z, dQ_dzt=z, mode=RealityMode.EUCLIDEAN_SU21,
    )
    rep = check_theorem11(gd)
    assert not rep.c1


def test_theorem11_random_family():
    rng = np.random.default_rng(5)
    for _ in range(100):
        psi = 0.8 * rng.normal()
        psi_z = rng.normal() + 1j * rng.normal()
        U = rng.normal() + 1j * rng.normal() + 0.2  # bounded away from 0
        rep = check_theorem11(build_affine_sphere_ansatz(psi, psi_z, U=U))
        assert rep.all_pass()
        assert abs(rep.tr_condition3) <= 1e-10


def test_theorem11_degenerate_flag_at_u_zero():
    rep = check_theorem11(build_affine_sphere_ansatz(0.3, 0.1 + 0.2j, U=0.0))
    assert rep.degenerate and not rep.c2


def test_theorem11_su21_gauge_invariance():
    rng = np.random.default_rng(6)
    gd = build_affine_sphere_ansatz(0.4, 0.2 - 0.6j, U=1.1 + 0.5j)
    rep = check_theorem11(gd)
    for _ in range(10):
        g = random_su21_gauge(rng)
        repc = check_theorem11(gd.conjugated(g))
        for a, b in (
            (rep.tr_q_qstar, repc.tr_q_qstar),
            (rep.tr_pairing, repc.tr_pairing),
            (rep.tr_condition3, repc.tr_condition3),
        ):
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_prop42_tzitzeica_family():
    rng = np.random.default_rng(7)
    for _ in range(50):
        u = rng.normal() + 1j * rng.normal()
        uz = rng.normal() + 1j * rng.normal()
        uzt = rng.normal() + 1j * rng.normal()
        rep = check_prop42(build_tzitzeica_ansatz(u, uz, uzt))
        assert rep.all_pass()


def test_prop42_counterexample():
    z = np.zeros((3, 3))
    gd = GaugeData(
        A_z=z, A_zt=z, P=E(1, 3), Q=E(1, 2),
        dA_z_dzt=z, dA_zt_dz=z, dP_dzt=z, dQ_dz=z, dP_dz=z, dQ_dzt=z,
    )
    rep = check_prop42(gd)
    assert not rep.i  # tr(PQ) = 0


def test_prop42_general_linear_gauge_invariance():
    rng = np.random.default_rng(8)
    gd = build_tzitzeica_ansatz(0.3 + 0.1j, 0.5 - 0.2j, -0.4 + 0.7j)
    rep = check_prop42(gd)
    for _ in range(10):
        g = np.eye(3) + 0.4 * rand_cmat(rng)
        repc = check_prop42(gd.conjugated(g))
        for a, b in (
            (rep.tr_pq, repc.tr_pq),
            (rep.tr_pairing, repc.tr_pairing),
            (rep.tr_condition3, repc.tr_condition3),
        ):
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_prop42_coordinate_covariance():
    # z -> a z rescales Tr((D_z P)^2 (D_zt Q)^2) by a^{-4} (and zt likewise)
    u, uz, uzt = 0.25 + 0.1j, 0.3 - 0.4j, 0.2 + 0.6j
    a, b = 1.7, 0.6
    base = build_tzitzeica_ansatz(u, uz, uzt)
    val = check_prop42(base).tr_pairing

    scaled = GaugeData(
        A_z=base.A_z / a, A_zt=base.A_zt / b, P=base.P / a, Q=base.Q / b,
        dA_z_dzt=base.dA_z_dzt / (a * b), dA_zt_dz=base.dA_zt_dz / (a * b),
        dP_dzt=base.dP_dzt / (a * b), dQ_dz=base.dQ_dz / (a * b),
        dP_dz=base.dP_dz / a ** 2, dQ_dzt=base.dQ_dzt / b ** 2,
    )
    val_scaled = check_prop42(scaled).tr_pairing
    assert abs(val_scaled - val / (a ** 4 * b ** 4)) <= 1e-10 * abs(val)


def test_classify_real_form_three_cases():
    u, ux, uy = 0.2, 0.35, -0.15
    base = build_tzitzeica_ansatz(u, ux, uy)
    fields = {
        k: getattr(base, k)
        for k in (
            "A_z", "A_zt", "P", "Q", "dA_z_dzt", "dA_zt_dz",
            "dP_dzt", "dQ_dz", "dP_dz", "dQ_dzt",
        )
    }
    gd = GaugeData(**fields, mode=RealityMode.ULTRAHYPERBOLIC_SL3R)
    assert classify_real_form(gd) is RealForm.TZITZEICA_MINUS
    assert tzitzeica_sign_trace(gd).real > 0

    # flipping the sign of the s-entry of A_zt flips the trace sign
    flipped = dict(fields)
    A_zt = fields["A_zt"].copy()
    A_zt[0, 1] *= -1
    dA = fields["dA_zt_dz"].copy()
    dA[0, 1] *= -1
    flipped["A_zt"] = A_zt
    flipped["dA_zt_dz"] = dA
    gd_flip = GaugeData(**flipped, mode=RealityMode.ULTRAHYPERBOLIC_SL3R)
    assert classify_real_form(gd_flip) is RealForm.TZITZEICA_PLUS

    # zero covariant derivatives: Liouville class
    z = np.zeros((3, 3))
    gd_liou = GaugeData(
        A_z=z, A_zt=z, P=E(1, 3), Q=E(3, 1),
        dA_z_dzt=z, dA_zt_dz=z, dP_dzt=z, dQ_dz=z, dP_dz=z, dQ_dzt=z,
        mode=RealityMode.ULTRAHYPERBOLIC_SL3R,
    )
    assert classify_real_form(gd_liou) is RealForm.LIOUVILLE


# --------------------------------------------------------------------------
# Toda chain
# --------------------------------------------------------------------------

def test_toda_builder_at_zero():
    gd = build_toda_ansatz(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0)
    assert gd.A_zt[0, 1] == 1.0 and gd.A_zt[1, 2] == 1.0
    assert gd.A_z[0, 0] == 0.0
    assert abs(np.trace(gd.A_z)) == 0.0


def test_toda_builder_traceless_generic():
    gd = build_toda_ansatz(0.3, -0.2, 0.5, 0.7, 1.3, -0.8, 2.0)
    assert abs(np.trace(gd.A_z)) <= 1e-14
    assert abs(np.trace(gd.A_zt)) <= 1e-14


def test_toda_builder_degenerate():
    with pytest.raises(DegenerateAnsatzError):
        build_toda_ansatz(0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0)


def test_toda_residual_trivial_cases():
    g0 = ScalarGrid(5, 5, 0, 0, 0.1, 0.1, np.zeros((5, 5)))
    r1, r2 = toda_residual(g0, g0.like(np.zeros((5, 5))), 1, 1)
    assert maxabs(r1.values) == 0.0 and maxabs(r2.values) == 0.0
    r1, r2 = toda_residual(g0, g0.like(np.zeros((5, 5))), 1, -1)
    assert maxabs(r1.values) == 0.0
    assert np.allclose(r2.values[1:-1, 1:-1], 2.0)


def test_toda_residual_grid_mismatch():
    g0 = ScalarGrid(5, 5, 0, 0, 0.1, 0.1, np.zeros((5, 5)))
    g1 = ScalarGrid(5, 5, 0, 0, 0.2, 0.1, np.zeros((5, 5)))
    with pytest.raises(GridMismatchError):
        toda_residual(g0, g1, 1, 1)


def _march_coupled(n, r=1.0, b=1.0, c=1.0, width=0.5):
    # coupled potentials (alpha, u): alpha_xy = e^u - r b e^{u-3a},
    # u_xy = 2 e^u - r b e^{u-3a} - (c/b) e^{-2u+3a}
    def rhs(uv):
        al, u = uv[..., 0], uv[..., 1]
        g = r * b * np.exp(u - 3 * al)
        return np.stack(
            [np.exp(u) - g, 2 * np.exp(u) - g - (c / b) * np.exp(-2 * u + 3 * al)],
            axis=-1,
        )

    h = width / (n - 1)
    xs = np.linspace(0, width, n)
    x_data = np.stack([0.1 * np.sin(xs), 0.2 * xs], axis=-1)
    y_data = np.stack([np.zeros(n), 0.05 * xs ** 2], axis=-1)
    return goursat_march(rhs, x_data, y_data, h, h), h


def _toda_hitchin_residual_at(uu, h, i, j, r=1.0, b=1.0, c=1.0):
    al, u = uu[..., 0], uu[..., 1]
    al_x = (al[i + 1, j] - al[i - 1, j]) / (2 * h)
    u_x = (u[i + 1, j] - u[i - 1, j]) / (2 * h)
    u_y = (u[i, j + 1] - u[i, j - 1]) / (2 * h)
    al_xy = (al[i + 1, j + 1] - al[i + 1, j - 1] - al[i - 1, j + 1] + al[i - 1, j - 1]) / (4 * h * h)
    u_xy = (u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]) / (4 * h * h)
    gd = build_toda_ansatz(
        al[i, j], al_x, u[i, j], u_x, r, b, c,
        u_y=u_y, alpha_xy=al_xy, u_xy=u_xy,
    )
    r1, r2, r3 = hitchin_residual(gd)
    return max(maxabs(r1), maxabs(r2), maxabs(r3))


def test_toda_marched_solution_satisfies_hitchin():
    worsts = []
    for n in (41, 81):
        uu, h = _march_coupled(n)
        worst = max(
            _toda_hitchin_residual_at(uu, h, i, j)
            for i in (n // 4, n // 2, 3 * n // 4)
            for j in (n // 4, n // 2, 3 * n // 4)
        )
        worsts.append(worst)
    assert worsts[0] <= 1e-3
    assert worsts[1] <= worsts[0] / 3.0  # ~4x per refinement


def test_toda_residual_matches_hitchin_on_converted_fields():
    # (u1, u2) = (alpha, u - 2 alpha) with the y-axis reversed satisfies the
    # Toda system iff the coupled fields satisfy the Hitchin equations
    n = 81
    uu, h = _march_coupled(n)
    al, u = uu[..., 0], uu[..., 1]
    u1 = al[:, ::-1]
    u2 = (u - 2 * al)[:, ::-1]
    g1 = ScalarGrid(n, n, 0.0, 0.0, h, h, u1)
    g2 = g1.like(u2)
    r1, r2 = toda_residual(g1, g2, 1, 1)
    assert r1.interior_max_abs() <= 2e-3
    assert r2.interior_max_abs() <= 2e-3


def test_toda_march_against_toda_residual():
    n = 61
    h = 0.4 / (n - 1)
    xs = np.linspace(0, 0.4, n)
    u1g, u2g = toda_march(
        np.stack([0.05 * np.sin(3 * xs), -0.02 * xs], axis=-1),
        np.stack([np.zeros(n), -0.02 * 0 * xs], axis=-1),
        h, h, eps1=1, eps2=1,
    )
    r1, r2 = toda_residual(u1g, u2g, 1, 1)
    assert r1.interior_max_abs() <= 5e-4
    assert r2.interior_max_abs() <= 5e-4
