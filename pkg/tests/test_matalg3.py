import numpy as np
import pytest

from affinesphere.matalg3 import (
    ETA,
    BadNilpotentError,
    SingularPairError,
    in_su21,
    matrix_unit,
    maxabs,
    min_poly_is_t2,
    normalize_higgs_pair,
    random_su21_gauge,
    star,
    su21_projection,
)

E = matrix_unit


def rand_cmat(rng, scale=1.0):
    return scale * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))


def test_star_zero():
    assert maxabs(star(np.zeros((3, 3)))) == 0.0


def test_star_matrix_unit():
    # expand -eta conj(E13)^T eta entrywise: the (3,1) slot picks up two signs
    assert np.allclose(star(E(1, 3)), E(3, 1))
    assert np.allclose(star(E(3, 1)), E(1, 3))


def test_star_involution_random():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = rand_cmat(rng)
        assert maxabs(star(star(m)) - m) <= 1e-15 * maxabs(m)


def test_star_antihomomorphism():
    rng = np.random.default_rng(12)
    for _ in range(20):
        m, n = rand_cmat(rng), rand_cmat(rng)
        lhs = star(m @ n)
        rhs = -star(n) @ star(m)
        assert maxabs(lhs - rhs) <= 1e-13 * max(1.0, maxabs(lhs))


def test_in_su21_examples():
    assert in_su21(np.diag([1j, -2j, 1j]))
    assert not in_su21(np.eye(3))
    assert in_su21(E(1, 3) + E(3, 1))


def test_su21_projection_lands_in_algebra():
    rng = np.random.default_rng(13)
    m = su21_projection(rand_cmat(rng))
    assert in_su21(m, tol=1e-12)


def test_random_su21_gauge_preserves_eta():
    rng = np.random.default_rng(14)
    for _ in range(5):
        g = random_su21_gauge(rng)
        assert maxabs(g.conj().T @ ETA @ g - ETA) <= 1e-12
        assert abs(np.linalg.det(g) - 1.0) <= 1e-12


def test_min_poly_examples():
    assert min_poly_is_t2(E(1, 3))
    assert not min_poly_is_t2(np.zeros((3, 3)))
    assert not min_poly_is_t2(E(1, 2) + E(2, 3))  # squares to E13


def test_trace_invariance_under_conjugation():
    rng = np.random.default_rng(15)
    for _ in range(20):
        m = rand_cmat(rng)
        g = np.eye(3) + 0.5 * rand_cmat(rng)
        d = abs(np.trace(np.linalg.inv(g) @ m @ g) - np.trace(m))
        assert d <= 1e-12 * max(1.0, abs(np.trace(m)))


def test_normalize_canonical_pair():
    for e in (1.0, -2.0, 0.3 + 1.1j):
        g, omega = normalize_higgs_pair(E(1, 3), e * E(3, 1))
        gi = np.linalg.inv(g)
        assert maxabs(gi @ E(1, 3) @ g - E(1, 3)) <= 1e-12
        assert abs(omega - e) <= 1e-12 * abs(e)


def test_normalize_random_conjugates():
    rng = np.random.default_rng(16)
    for _ in range(20):
        g0 = np.eye(3) + 0.4 * rand_cmat(rng)
        g0 = g0 / np.linalg.det(g0) ** (1.0 / 3.0)
        gi0 = np.linalg.inv(g0)
        P = gi0 @ E(1, 3) @ g0
        Q = gi0 @ E(3, 1) @ g0
        g, omega = normalize_higgs_pair(P, Q)
        gi = np.linalg.inv(g)
        assert maxabs(gi @ P @ g - E(1, 3)) <= 1e-10
        assert maxabs(gi @ Q @ g - omega * E(3, 1)) <= 1e-10
        assert abs(omega - 1.0) <= 1e-10
        assert abs(np.linalg.det(g) - 1.0) <= 1e-10


def test_normalize_scaled_random_pair():
    # generic nilpotent pair, not a conjugate of the unit-normalised one
    rng = np.random.default_rng(17)
    g0 = np.eye(3) + 0.3 * rand_cmat(rng)
    gi0 = np.linalg.inv(g0)
    P = gi0 @ (2.0 * E(1, 3)) @ g0
    Q = gi0 @ ((0.5 - 1.2j) * E(3, 1)) @ g0
    g, omega = normalize_higgs_pair(P, Q)
    gi = np.linalg.inv(g)
    assert abs(omega - np.trace(P @ Q)) <= 1e-12 * abs(omega)
    assert maxabs(gi @ P @ g - E(1, 3)) <= 1e-10
    assert maxabs(gi @ Q @ g - omega * E(3, 1)) <= 1e-10


def test_normalize_singular_pair():
    with pytest.raises(SingularPairError):
        normalize_higgs_pair(E(1, 3), E(1, 2))


def test_normalize_bad_nilpotent():
    with pytest.raises(BadNilpotentError):
        normalize_higgs_pair(E(1, 2) + E(2, 3), E(3, 1))
    with pytest.raises(BadNilpotentError):
        normalize_higgs_pair(np.zeros((3, 3)), E(3, 1))
