"""3x3 complex matrix algebra for the su(2,1) structure and Higgs-pair normalisation.

Everything here is plain dense numpy on (3, 3) complex arrays.  The adjoint
``star`` and the membership / minimal-polynomial predicates feed the gauge
characterisation checks; ``normalize_higgs_pair`` is the constructive
Jordan-basis normalisation of a nilpotent pair with nonvanishing pairing.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ETA",
    "DEFAULT_TOL",
    "SingularPairError",
    "BadNilpotentError",
    "cmat3",
    "matrix_unit",
    "maxabs",
    "star",
    "in_su21",
    "min_poly_is_t2",
    "normalize_higgs_pair",
    "su21_projection",
    "random_su21_gauge",
]

#: signature matrix diag(1, 1, -1); equal to its own inverse
ETA = np.diag([1.0, 1.0, -1.0]).astype(complex)

DEFAULT_TOL = 1e-9


class SingularPairError(ValueError):
    """The pairing trace of the Higgs pair is (numerically) zero."""


class BadNilpotentError(ValueError):
    """An input expected to square to zero does not."""


def cmat3(m) -> np.ndarray:
    """Validate and return m as a finite (3, 3) complex array."""
    a = np.asarray(m, dtype=complex)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def matrix_unit(i: int, j: int) -> np.ndarray:
    """E_ij with a single 1 at row i, column j (1-based, as in E13)."""
    e = np.zeros((3, 3), dtype=complex)
    e[i - 1, j - 1] = 1.0
    return e


def maxabs(m) -> float:
    """Max absolute entry; the norm used by every tolerance test here."""
    return float(np.max(np.abs(m)))


def star(m) -> np.ndarray:
    """Indefinite adjoint m* = -eta^-1 conj(m)^T eta.

    Anti-involution up to sign: star(star(m)) = m and
    star(m @ n) = -star(n) @ star(m).
    """
    a = cmat3(m)
    return -ETA @ a.conj().T @ ETA


def in_su21(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff m is traceless and fixed by star, i.e. lies in su(2,1)."""
    a = cmat3(m)
    scale = max(1.0, maxabs(a))
    return (
        abs(np.trace(a)) <= tol * scale
        and maxabs(star(a) - a) <= tol * scale
    )


def su21_projection(m) -> np.ndarray:
    """Project onto su(2,1): symmetrise under star, remove the trace.

    The trace of a star-fixed matrix is purely imaginary, so subtracting
    (tr/3) I stays inside the algebra.
    """
    a = cmat3(m)
    sym = 0.5 * (a + star(a))
    return sym - (np.trace(sym) / 3.0) * np.eye(3)


def random_su21_gauge(rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    """Random element of SU(2,1): exp of a random su(2,1) algebra element.

    These are the gauge transformations preserving the Euclidean reality
    structure, the invariance group of the star-built trace conditions.
    """
    from scipy.linalg import expm

    raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return expm(su21_projection(scale * raw))


def min_poly_is_t2(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff m is nonzero but m^2 = 0 (minimal polynomial t^2)."""
    a = cmat3(m)
    nm = maxabs(a)
    if nm <= tol:
        return False
    return maxabs(a @ a) <= tol * nm * nm


def _kernel_vector_independent_of(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Second kernel vector of the rank-1 nilpotent p, independent of v."""
    # SVD: the two right-singular vectors with (numerically) zero singular
    # value span ker(p); pick the combination furthest from span(v).
    _, sing, vh = np.linalg.svd(p)
    null = vh.conj()[1:].T  # columns spanning ker(p) for rank-1 p
    vn = v / np.linalg.norm(v)
    best = None
    best_res = -1.0
    for k in range(null.shape[1]):
        cand = null[:, k]
        resid = cand - (vn.conj() @ cand) * vn
        r = np.linalg.norm(resid)
        if r > best_res:
            best_res = r
            best = resid
    if best is None or best_res < 1e-12 * max(1.0, sing[0]):
        raise BadNilpotentError("could not construct a Jordan basis: kernel defect")
    return best / np.linalg.norm(best)


def normalize_higgs_pair(P, Q, tol: float = DEFAULT_TOL):
    """Conjugate a nilpotent pair to the canonical (E13, omega*E31) form.

    Requires P^2 = Q^2 = 0 with P, Q != 0 and omega = tr(PQ) != 0.  Returns
    (g, omega) with det(g) = 1, inv(g) @ P @ g = E13 and
    inv(g) @ Q @ g = omega * E31.

    The basis (v, u, w) is built from the pivot column of P (largest image,
    lowest index on ties), corrected by the kernel directions of Q and the
    residual shift, then rescaled by a cube root to unit determinant.
    """
    p = cmat3(P)
    q = cmat3(Q)
    np_, nq = maxabs(p), maxabs(q)
    if np_ <= tol or nq <= tol:
        raise BadNilpotentError("P and Q must be nonzero")
    if maxabs(p @ p) > tol * np_ * np_ or maxabs(q @ q) > tol * nq * nq:
        raise BadNilpotentError("P^2 and Q^2 must vanish")
    omega = complex(np.trace(p @ q))
    if abs(omega) <= tol * np_ * nq:
        raise SingularPairError(f"tr(PQ) = {omega} is below tolerance")

    # Jordan basis of P: P(w) = v, P(v) = P(u) = 0, pivot rule on columns.
    col_norms = np.max(np.abs(p), axis=0)
    w = np.zeros(3, dtype=complex)
    w[int(np.argmax(col_norms))] = 1.0
    v = p @ w
    u = _kernel_vector_independent_of(p, v)

    # Q(u) = a Q(v), Q(w) = b Q(v): least squares against the image line.
    qv = q @ v
    qv2 = qv.conj() @ qv
    a = (qv.conj() @ (q @ u)) / qv2
    b = (qv.conj() @ (q @ w)) / qv2
    w = w - b * v
    u = u - a * v

    # Q(v) = c u + omega' w in the corrected basis; absorb c into w.
    g = np.column_stack([v, u, w])
    coeffs = np.linalg.solve(g, q @ v)
    c, omega_basis = coeffs[1], coeffs[2]
    w = w + (c / omega_basis) * u

    g = np.column_stack([v, u, w])
    det = np.linalg.det(g)
    g = g / det ** (1.0 / 3.0)
    return g, omega
