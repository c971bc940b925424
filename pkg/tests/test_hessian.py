import numpy as np
import pytest

from affinesphere.hessian import (
    GraphFunction,
    NonInvertibleGradientError,
    VanishingSupportError,
    VanishingWError,
    dual_ma_residual,
    graph_metric,
    legendre,
    legendre_dual_function,
    sphere_dual_graph,
    sphere_graph,
    tzitzeica_residual,
)


def sample_disk(rng, m, radius=0.5):
    pts = rng.uniform(-radius, radius, size=(2 * m, 2))
    pts = pts[np.sum(pts ** 2, axis=1) < radius ** 2][:m]
    return pts


def test_graph_metric_sphere_origin():
    h = graph_metric(sphere_graph(), np.zeros((1, 2)))
    assert np.allclose(h[0], np.eye(2))


def test_graph_metric_sphere_formula():
    rng = np.random.default_rng(40)
    pts = sample_disk(rng, 25)
    h = graph_metric(sphere_graph(), pts)
    for k, x in enumerate(pts):
        v2 = 1.0 - x @ x
        expected = np.eye(2) + np.outer(x, x) / v2
        assert np.max(np.abs(h[k] - expected)) <= 1e-12
        assert np.allclose(h[k], h[k].T)


def test_graph_metric_vanishing_support():
    quad = GraphFunction(
        value=lambda x: 0.5 * float(x @ x),
        grad=lambda x: np.asarray(x, dtype=float),
        hess=lambda x: np.eye(2),
        n=2,
    )
    # x . grad v - v = |x|^2 / 2 vanishes at the origin
    with pytest.raises(VanishingSupportError):
        graph_metric(quad, np.zeros((1, 2)))


def test_tzitzeica_residual_sphere():
    rng = np.random.default_rng(41)
    pts = sample_disk(rng, 40)
    res = tzitzeica_residual(sphere_graph(), pts, sign=1)
    assert np.max(np.abs(res)) <= 1e-12


def test_tzitzeica_residual_linear_graph():
    lin = GraphFunction(
        value=lambda x: 2.0 + x[0] - 0.5 * x[1],
        grad=lambda x: np.array([1.0, -0.5]),
        hess=lambda x: np.zeros((2, 2)),
        n=2,
    )
    x = np.array([[0.1, 0.2]])
    res = tzitzeica_residual(lin, x, sign=1)
    supp = lin.value(x[0]) - x[0] @ lin.grad(x[0])
    assert abs(res[0] + supp ** 4) <= 1e-13


def test_tzitzeica_residual_affine_covariance():
    # unimodular change x -> M x maps residual values to residual values
    rng = np.random.default_rng(42)
    M = np.array([[1.2, 0.3], [0.5, (1 + 0.3 * 0.5) / 1.2]])
    M[1, 1] = (1.0 + M[0, 1] * M[1, 0]) / M[0, 0]  # det M = 1
    sph = sphere_graph()
    vM = GraphFunction(
        value=lambda x: sph.value(M @ x),
        grad=lambda x: M.T @ sph.grad(M @ x),
        hess=lambda x: M.T @ sph.hess(M @ x) @ M,
        n=2,
    )
    pts = sample_disk(rng, 10, radius=0.3)
    r1 = tzitzeica_residual(vM, pts, sign=1)
    r2 = tzitzeica_residual(sph, pts @ M.T, sign=1)
    assert np.max(np.abs(r1 - r2)) <= 1e-12


def test_fd_graph_function_self_convergence():
    sph = sphere_graph()
    x = np.array([0.2, -0.3])
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = GraphFunction.from_value_only(sph.value, n=2, h=h)
        errs.append(np.max(np.abs(fd.hess(x) - sph.hess(x))))
    assert errs[2] <= errs[0] / 8.0  # ~16x for 4x step refinement


def test_legendre_sphere_closed_form():
    sph = sphere_graph()
    grid = np.stack(
        np.meshgrid(np.linspace(-0.6, 0.6, 9), np.linspace(-0.6, 0.6, 9),
                    indexing="ij"),
        axis=-1,
    ).reshape(-1, 2)
    ld = legendre(sph, grid)
    w_exact = -np.sqrt(1.0 + np.sum(grid ** 2, axis=1))
    assert np.max(np.abs(ld.w - w_exact)) <= 1e-10
    k0 = int(np.argmin(np.sum(grid ** 2, axis=1)))
    assert abs(ld.w[k0] + 1.0) <= 1e-12


def test_legendre_preimages_consistent():
    sph = sphere_graph()
    pts = np.array([[0.3, -0.2], [0.0, 0.5], [-0.4, -0.4]])
    ld = legendre(sph, pts)
    for p, x in zip(ld.p, ld.x):
        assert np.max(np.abs(sph.grad(x) - p)) <= 1e-10


def test_dual_ma_residual_sphere():
    wfn = sphere_dual_graph()
    rng = np.random.default_rng(43)
    pts = rng.uniform(-0.8, 0.8, size=(30, 2))
    res = dual_ma_residual(wfn, pts)
    assert np.max(np.abs(res)) <= 1e-12


def test_dual_ma_residual_numeric_dual():
    sph = sphere_graph()
    wfn = legendre_dual_function(sph)
    rng = np.random.default_rng(44)
    pts = rng.uniform(-0.6, 0.6, size=(20, 2))
    res = dual_ma_residual(wfn, pts)
    assert np.max(np.abs(res)) <= 1e-9


def test_dual_ma_residual_constant_w():
    const = GraphFunction(
        value=lambda p: -2.0,
        grad=lambda p: np.zeros(2),
        hess=lambda p: np.zeros((2, 2)),
        n=2,
    )
    res = dual_ma_residual(const, np.zeros((1, 2)))
    assert abs(res[0] + 1.0 / (-2.0) ** 4) <= 1e-15


def test_dual_ma_vanishing_w():
    zero = GraphFunction(
        value=lambda p: 0.0,
        grad=lambda p: np.zeros(2),
        hess=lambda p: np.zeros((2, 2)),
        n=2,
    )
    with pytest.raises(VanishingWError):
        dual_ma_residual(zero, np.zeros((1, 2)))


def test_legendre_involution():
    sph = sphere_graph()
    wfn = legendre_dual_function(sph)
    vfn = legendre_dual_function(wfn)
    rng = np.random.default_rng(45)
    for x in sample_disk(rng, 20, radius=0.4):
        assert abs(vfn.value(x) - sph.value(x)) <= 1e-10


def test_metric_agreement_through_legendre():
    # graph metric at x equals the pullback of (1/w) w_pp at p = grad v(x)
    sph = sphere_graph()
    wfn = legendre_dual_function(sph)
    rng = np.random.default_rng(46)
    for x in sample_disk(rng, 10, radius=0.4):
        p = sph.grad(x)
        h1 = graph_metric(sph, x[None, :])[0]
        vxx = sph.hess(x)
        h2 = vxx @ ((1.0 / wfn.value(p)) * wfn.hess(p)) @ vxx
        assert np.max(np.abs(h1 - h2)) <= 1e-10
        # sign bookkeeping: w < 0 but (1/w) w_pp is positive definite
        assert wfn.value(p) < 0
        assert np.all(np.linalg.eigvalsh((1.0 / wfn.value(p)) * wfn.hess(p)) > 0)


def test_legendre_noninvertible_gradient():
    lin = GraphFunction(
        value=lambda x: x[0],
        grad=lambda x: np.array([1.0, 0.0]),
        hess=lambda x: np.zeros((2, 2)),
        n=2,
    )
    with pytest.raises(NonInvertibleGradientError):
        legendre(lin, np.array([[0.5, 0.5]]))


def test_residual_second_order_with_fd_derivatives():
    # the whole pipeline on FD-derivative graphs self-converges at O(h^2)
    sph = sphere_graph()
    x = np.array([[0.25, -0.15]])
    errs = []
    for h in (2e-2, 1e-2, 5e-3):
        fd = GraphFunction.from_value_only(sph.value, n=2, h=h)
        errs.append(abs(tzitzeica_residual(fd, x, sign=1)[0]))
    assert errs[2] <= errs[0] / 8.0
