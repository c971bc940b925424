"""Hitchin-system field containers, explicit ansatz builders and the
gauge-invariant characterisation conditions.

Conventions.  Fields live on the (z, zt) plane ("zt" is the second null
coordinate; under Euclidean reality zt = conj(z), under the ultrahyperbolic
slice z = x, zt = y real).  A GaugeData carries the four matrices
(A_z, A_zt, P, Q) together with caller-supplied first-derivative slots, so
the same residual/condition code runs on exact analytic derivatives or on
grid stencils.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matalg3 import DEFAULT_TOL, cmat3, matrix_unit, maxabs, min_poly_is_t2, star
from .pdesolve import ScalarGrid

__all__ = [
    "RealityMode",
    "RealForm",
    "GaugeData",
    "MissingDerivativesError",
    "RealityViolationError",
    "DegenerateAnsatzError",
    "GridMismatchError",
    "build_tzitzeica_ansatz",
    "build_affine_sphere_ansatz",
    "build_wang_ansatz",
    "build_first_ansatz",
    "build_toda_ansatz",
    "hitchin_residual",
    "lax_commutator_coeffs",
    "check_theorem11",
    "check_prop42",
    "Theorem11Report",
    "Prop42Report",
    "classify_real_form",
    "tzitzeica_sign_trace",
    "toda_residual",
]

E = matrix_unit  # local shorthand; E(1, 3) etc.


class MissingDerivativesError(ValueError):
    """A residual or condition check needs derivative slots that are unset."""


class RealityViolationError(ValueError):
    """Inputs violate the reality constraints of the requested mode."""


class DegenerateAnsatzError(ValueError):
    """Builder parameters make the ansatz degenerate (b = 0 in the Toda chain)."""


class GridMismatchError(ValueError):
    """Two grids that must share shape and spacing do not."""


class RealityMode(enum.Enum):
    HOLOMORPHIC = "holomorphic"
    EUCLIDEAN_SU21 = "euclidean_su21"
    ULTRAHYPERBOLIC_SL3R = "ultrahyperbolic_sl3r"


class RealForm(enum.Enum):
    """Sign classes of the real-form reduction: which equation the fields carry."""

    TZITZEICA_MINUS = "u_xy = e^u - e^{-2u}"
    TZITZEICA_PLUS = "u_xy = e^u + e^{-2u}"
    LIOUVILLE = "u_xy = e^u"


@dataclass(frozen=True)
class GaugeData:
    """Reduced connection and Higgs fields at a point, with derivative slots.

    Derivative slots are first partials with respect to the *other* null
    coordinate where relevant: dA_z_dzt means d(A_z)/d(zt) and so on.  They
    are the caller's responsibility (exact derivatives or grid stencils).
    """

    A_z: np.ndarray
    A_zt: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    dA_z_dzt: Optional[np.ndarray] = None
    dA_zt_dz: Optional[np.ndarray] = None
    dP_dzt: Optional[np.ndarray] = None
    dQ_dz: Optional[np.ndarray] = None
    dP_dz: Optional[np.ndarray] = None
    dQ_dzt: Optional[np.ndarray] = None
    mode: RealityMode = RealityMode.HOLOMORPHIC

    def __post_init__(self):
        for name in ("A_z", "A_zt", "P", "Q"):
            object.__setattr__(self, name, cmat3(getattr(self, name)))
        for name in ("dA_z_dzt", "dA_zt_dz", "dP_dzt", "dQ_dz", "dP_dz", "dQ_dzt"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, cmat3(v))

    @property
    def has_derivatives(self) -> bool:
        return not any(
            getattr(self, n) is None
            for n in ("dA_z_dzt", "dA_zt_dz", "dP_dzt", "dQ_dz", "dP_dz", "dQ_dzt")
        )

    def require_derivatives(self):
        if not self.has_derivatives:
            raise MissingDerivativesError(
                "all six derivative slots must be set for this operation"
            )

    def conjugated(self, g) -> "GaugeData":
        """Gauge transform by a *constant* g: every matrix maps to inv(g) m g."""
        g = cmat3(g)
        gi = np.linalg.inv(g)

        def c(m):
            return None if m is None else gi @ m @ g

        return GaugeData(
            A_z=c(self.A_z), A_zt=c(self.A_zt), P=c(self.P), Q=c(self.Q),
            dA_z_dzt=c(self.dA_z_dzt), dA_zt_dz=c(self.dA_zt_dz),
            dP_dzt=c(self.dP_dzt), dQ_dz=c(self.dQ_dz),
            dP_dz=c(self.dP_dz), dQ_dzt=c(self.dQ_dzt),
            mode=self.mode,
        )


# ---------------------------------------------------------------------------
# Ansatz builders
# ---------------------------------------------------------------------------

def build_tzitzeica_ansatz(u, u_z, u_zt=0.0, u_zzt=None) -> GaugeData:
    """Canonical embedding of the (holomorphic) Tzitzeica equation.

    P = E13, Q = e^u E31, with lower-triangular A_z and upper-triangular A_zt.
    If u_zzt is None the slot is filled on-shell with e^u - e^{-2u}, so the
    Hitchin residual of an exact solution vanishes.
    """
    if u_zzt is None:
        u_zzt = np.exp(u) - np.exp(-2 * u)
    eu = np.exp(u)
    A_z = np.array([[u_z, 0, 0], [1, -u_z, 0], [0, 1, 0]], dtype=complex)
    A_zt = np.array([[0, np.exp(-2 * u), 0], [0, 0, eu], [0, 0, 0]], dtype=complex)
    P = E(1, 3)
    Q = eu * E(3, 1)
    return GaugeData(
        A_z=A_z, A_zt=A_zt, P=P, Q=Q,
        dA_z_dzt=np.diag([u_zzt, -u_zzt, 0.0]).astype(complex),
        dA_zt_dz=np.array(
            [[0, -2 * u_z * np.exp(-2 * u), 0], [0, 0, u_z * eu], [0, 0, 0]],
            dtype=complex,
        ),
        dP_dzt=np.zeros((3, 3), complex),
        dQ_dz=u_z * eu * E(3, 1),
        dP_dz=np.zeros((3, 3), complex),
        dQ_dzt=u_zt * eu * E(3, 1),
    )


def build_affine_sphere_ansatz(
    psi,
    psi_z,
    psi_zbar=None,
    U=0.0,
    Ut=None,
    mode: RealityMode = RealityMode.EUCLIDEAN_SU21,
    psi_zzt=None,
    reality_tol: float = 1e-12,
) -> GaugeData:
    """Gauge fields of the definite affine sphere equation.

    In Euclidean mode psi must be real and Ut (the second-null-coordinate
    partner of U) must equal conj(U); then A_zt = star(A_z) and P = -star(Q)
    hold entrywise.  psi_zzt defaults on-shell to -e^psi/2 - U*Ut*e^{-2 psi}.
    """
    if mode is RealityMode.EUCLIDEAN_SU21:
        if abs(np.imag(psi)) > reality_tol:
            raise RealityViolationError("psi must be real in Euclidean mode")
        psi = float(np.real(psi))
        if Ut is None:
            Ut = np.conj(U)
        elif abs(Ut - np.conj(U)) > reality_tol * max(1.0, abs(U)):
            raise RealityViolationError("Ut must equal conj(U) in Euclidean mode")
        if psi_zbar is None:
            psi_zbar = np.conj(psi_z)
    else:
        if Ut is None or psi_zbar is None:
            raise ValueError("holomorphic mode needs explicit psi_zbar and Ut")
    if psi_zzt is None:
        psi_zzt = -0.5 * np.exp(psi) - U * Ut * np.exp(-2 * psi)

    lam = np.exp(psi / 2) / np.sqrt(2)
    lam_z = 0.5 * psi_z * lam
    lam_zt = 0.5 * psi_zbar * lam
    emp = np.exp(-psi)

    A_z = np.array(
        [[0, lam, 0], [0, -psi_z / 2, -U * emp], [0, 0, psi_z / 2]], dtype=complex
    )
    A_zt = np.array(
        [[0, 0, 0], [-lam, psi_zbar / 2, 0], [0, -Ut * emp, -psi_zbar / 2]],
        dtype=complex,
    )
    Q = lam * E(1, 3)
    P = -lam * E(3, 1)
    dA_z_dzt = np.array(
        [
            [0, lam_zt, 0],
            [0, -psi_zzt / 2, U * psi_zbar * emp],
            [0, 0, psi_zzt / 2],
        ],
        dtype=complex,
    )
    dA_zt_dz = np.array(
        [
            [0, 0, 0],
            [-lam_z, psi_zzt / 2, 0],
            [0, Ut * psi_z * emp, -psi_zzt / 2],
        ],
        dtype=complex,
    )
    return GaugeData(
        A_z=A_z, A_zt=A_zt, P=P, Q=Q,
        dA_z_dzt=dA_z_dzt, dA_zt_dz=dA_zt_dz,
        dP_dzt=0.5 * psi_zbar * P, dQ_dz=0.5 * psi_z * Q,
        dP_dz=0.5 * psi_z * P, dQ_dzt=0.5 * psi_zbar * Q,
        mode=mode,
    )


def build_wang_ansatz(u, u_z, u_zt=0.0, u_zzt=None) -> GaugeData:
    """Alternative Tzitzeica embedding with A_zt = 0 and cyclic Higgs fields."""
    if u_zzt is None:
        u_zzt = np.exp(u) - np.exp(-2 * u)
    eu = np.exp(u)
    em2u = np.exp(-2 * u)
    P = E(1, 3) + E(2, 1) + E(3, 2)
    Q = em2u * E(1, 2) + eu * E(2, 3) + eu * E(3, 1)
    A_z = np.diag([u_z, -u_z, 0.0]).astype(complex)

    def dq(du):
        return -2 * du * em2u * E(1, 2) + du * eu * E(2, 3) + du * eu * E(3, 1)

    return GaugeData(
        A_z=A_z, A_zt=np.zeros((3, 3), complex), P=P, Q=Q,
        dA_z_dzt=np.diag([u_zzt, -u_zzt, 0.0]).astype(complex),
        dA_zt_dz=np.zeros((3, 3), complex),
        dP_dzt=np.zeros((3, 3), complex),
        dQ_dz=dq(u_z),
        dP_dz=np.zeros((3, 3), complex),
        dQ_dzt=dq(u_zt),
    )


def build_first_ansatz(psi, psi_z, U, U_z=0.0, psi_zzt=None) -> GaugeData:
    """Euclidean ansatz with diagonal z-potentials; A_w = Q and A_wbar = -P.

    psi must be real.  U is a complex function of (z, zbar); holomorphy of U
    is exactly the first Hitchin equation for these fields.
    """
    if abs(np.imag(psi)) > 1e-12:
        raise RealityViolationError("psi must be real for the first ansatz")
    psi = float(np.real(psi))
    psi_zbar = np.conj(psi_z)
    if psi_zzt is None:
        psi_zzt = -0.5 * np.exp(psi) - abs(U) ** 2 * np.exp(-2 * psi)
    lam = np.exp(psi / 2) / np.sqrt(2)
    emp = np.exp(-psi)
    Ub = np.conj(U)
    Ub_z = 0.0  # conj(dU/dzbar) vanishes for holomorphic U
    A_w = np.array([[0, 0, lam], [Ub * emp, 0, 0], [0, lam, 0]], dtype=complex)
    A_wbar = np.array([[0, -U * emp, 0], [0, 0, lam], [lam, 0, 0]], dtype=complex)
    A_z = np.diag([-psi_z / 2, psi_z / 2, 0.0]).astype(complex)
    A_zbar = np.diag([psi_zbar / 2, -psi_zbar / 2, 0.0]).astype(complex)
    Q = A_w
    P = -A_wbar

    lam_z = 0.5 * psi_z * lam
    lam_zbar = 0.5 * psi_zbar * lam
    dQ_dz = np.array(
        [[0, 0, lam_z], [(Ub_z - Ub * psi_z) * emp, 0, 0], [0, lam_z, 0]],
        dtype=complex,
    )
    dQ_dzt = np.array(
        [
            [0, 0, lam_zbar],
            [(np.conj(U_z) - Ub * psi_zbar) * emp, 0, 0],
            [0, lam_zbar, 0],
        ],
        dtype=complex,
    )
    dP_dz = np.array(
        [[0, (U_z - U * psi_z) * emp, 0], [0, 0, -lam_z], [-lam_z, 0, 0]],
        dtype=complex,
    )
    dP_dzt = np.array(
        [[0, -U * psi_zbar * emp, 0], [0, 0, -lam_zbar], [-lam_zbar, 0, 0]],
        dtype=complex,
    )
    return GaugeData(
        A_z=A_z, A_zt=A_zbar, P=P, Q=Q,
        dA_z_dzt=np.diag([-psi_zzt / 2, psi_zzt / 2, 0.0]).astype(complex),
        dA_zt_dz=np.diag([psi_zzt / 2, -psi_zzt / 2, 0.0]).astype(complex),
        dP_dzt=dP_dzt, dQ_dz=dQ_dz, dP_dz=dP_dz, dQ_dzt=dQ_dzt,
        mode=RealityMode.EUCLIDEAN_SU21,
    )


def build_toda_ansatz(
    alpha, alpha_x, u, u_x, r, b, c, *, u_y=0.0, alpha_xy=0.0, u_xy=0.0
) -> GaugeData:
    """Fields of the Z3 Toda reduction: compatible-gauge shape with
    n = alpha_x, p = m = h = 0, t = 1, s = b e^{u-3 alpha},
    k = (c/b) e^{-2u+3 alpha}.

    r, b, c are treated as constants at the evaluation point.
    """
    if b == 0:
        raise DegenerateAnsatzError("b must be nonzero")
    if r == 0:
        raise DegenerateAnsatzError("r must be nonzero")
    n = alpha_x
    s = b * np.exp(u - 3 * alpha)
    k = (c / b) * np.exp(-2 * u + 3 * alpha)
    eu = np.exp(u)
    A_z = np.array(
        [[n, 0, 0], [r, u_x - 2 * n, 0], [0, 1, n - u_x]], dtype=complex
    )
    A_zt = np.array([[0, s, 0], [0, 0, k], [0, 0, 0]], dtype=complex)
    P = E(1, 3)
    Q = eu * E(3, 1)
    s_x = s * (u_x - 3 * alpha_x)
    k_x = k * (-2 * u_x + 3 * alpha_x)
    return GaugeData(
        A_z=A_z, A_zt=A_zt, P=P, Q=Q,
        dA_z_dzt=np.array(
            [
                [alpha_xy, 0, 0],
                [0, u_xy - 2 * alpha_xy, 0],
                [0, 0, alpha_xy - u_xy],
            ],
            dtype=complex,
        ),
        dA_zt_dz=np.array([[0, s_x, 0], [0, 0, k_x], [0, 0, 0]], dtype=complex),
        dP_dzt=np.zeros((3, 3), complex),
        dQ_dz=u_x * eu * E(3, 1),
        dP_dz=np.zeros((3, 3), complex),
        dQ_dzt=u_y * eu * E(3, 1),
        mode=RealityMode.ULTRAHYPERBOLIC_SL3R,
    )


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------

def _comm(a, b):
    return a @ b - b @ a


def hitchin_residual(gd: GaugeData):
    """(R1, R2, R3) = (D_z Q, D_zt P, F_{z zt} + [P, Q]); all zero on solutions."""
    gd.require_derivatives()
    r1 = gd.dQ_dz + _comm(gd.A_z, gd.Q)
    r2 = gd.dP_dzt + _comm(gd.A_zt, gd.P)
    r3 = gd.dA_zt_dz - gd.dA_z_dzt + _comm(gd.A_z, gd.A_zt) + _comm(gd.P, gd.Q)
    return r1, r2, r3


def _lax_commutator_at(gd: GaugeData, lam: complex) -> np.ndarray:
    # multiplication part of [d_z + A_z + lam P, Q + lam (d_zt + A_zt)]
    bz = gd.A_z + lam * gd.P
    czt = gd.Q + lam * gd.A_zt
    d_z_of_czt = gd.dQ_dz + lam * gd.dA_zt_dz
    d_zt_of_bz = gd.dA_z_dzt + lam * gd.dP_dzt
    return d_z_of_czt - lam * d_zt_of_bz + _comm(bz, czt)


def lax_commutator_coeffs(gd: GaugeData):
    """Coefficients (C0, C1, C2) of the spectral-parameter expansion of the
    Lax commutator, recovered by quadratic interpolation at lam = 0, +1, -1.

    Algebraically C0 = R1, C1 = R3, C2 = -R2; the separate evaluation route
    keeps this an honest cross-check of the residual formulas.
    """
    gd.require_derivatives()
    m0 = _lax_commutator_at(gd, 0.0)
    mp = _lax_commutator_at(gd, 1.0)
    mm = _lax_commutator_at(gd, -1.0)
    c0 = m0
    c1 = 0.5 * (mp - mm)
    c2 = 0.5 * (mp + mm) - m0
    return c0, c1, c2


# ---------------------------------------------------------------------------
# Characterisation conditions
# ---------------------------------------------------------------------------

def _trace_scale(*mats) -> float:
    """Magnitude proxy for a trace of a matrix product: 3 * product of norms."""
    out = 3.0
    for m in mats:
        out *= max(maxabs(m), 1e-300)
    return out


@dataclass
class Theorem11Report:
    """Conditions on an SU(2,1) Hitchin solution singling out the affine
    sphere ansatz, with the raw trace values kept for auditability."""

    c1: bool
    c2: bool
    c3: bool
    min_poly_t2: bool
    tr_q_qstar: complex
    tr_dzqstar_sq: complex
    tr_pairing: complex
    tr_condition3: complex
    degenerate: bool
    tol: float
    mode: str

    def all_pass(self) -> bool:
        return self.c1 and self.c2 and self.c3

    def to_json_dict(self) -> dict:
        def c2l(x):
            return [float(np.real(x)), float(np.imag(x))]

        return {
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "min_poly_t2": self.min_poly_t2,
            "tr_q_qstar": c2l(self.tr_q_qstar),
            "tr_dzqstar_sq": c2l(self.tr_dzqstar_sq),
            "tr_pairing": c2l(self.tr_pairing),
            "tr_condition3": c2l(self.tr_condition3),
            "degenerate": self.degenerate,
            "tol": self.tol,
            "mode": self.mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def check_theorem11(gd: GaugeData, tol: float = DEFAULT_TOL) -> Theorem11Report:
    """Evaluate the three Euclidean characterisation conditions on gd.

    Uses Qstar = star(Q), D_z Qstar = star(dQ/dzbar) + [A_z, Qstar] and
    D_zbar Q = dQ/dzbar + [A_zbar, Q] with A_zbar read from the A_zt slot.
    """
    if gd.mode is not RealityMode.EUCLIDEAN_SU21:
        raise ValueError("check_theorem11 requires Euclidean SU(2,1) mode")
    gd.require_derivatives()
    q = gd.Q
    qs = star(q)
    dz_qs = star(gd.dQ_dzt) + _comm(gd.A_z, qs)
    dzb_q = gd.dQ_dzt + _comm(gd.A_zt, q)

    qqs = q @ qs
    qsq = qs @ q
    tr_qqs = complex(np.trace(qqs))
    c1 = min_poly_is_t2(q, tol) and abs(tr_qqs) > tol * _trace_scale(q, qs)

    dz_qs_sq = dz_qs @ dz_qs
    dzb_q_sq = dzb_q @ dzb_q
    tr_a = complex(np.trace(dz_qs_sq))
    tr_b = complex(np.trace(dz_qs_sq @ dzb_q_sq))
    c2 = abs(tr_a) <= tol * _trace_scale(dz_qs, dz_qs) and abs(
        tr_b
    ) > tol * _trace_scale(dz_qs, dz_qs, dzb_q, dzb_q)

    t1 = qqs @ qqs @ qqs @ qqs
    t2 = qsq @ qsq @ dz_qs @ dzb_q
    t3 = qsq @ dz_qs @ qqs @ dzb_q
    tr_c3 = complex(np.trace(t1 - t2 + t3))
    scale3 = max(_trace_scale(t1), _trace_scale(t2), _trace_scale(t3))
    c3 = abs(tr_c3) <= tol * scale3

    return Theorem11Report(
        c1=c1,
        c2=c2,
        c3=c3,
        min_poly_t2=min_poly_is_t2(q, tol),
        tr_q_qstar=tr_qqs,
        tr_dzqstar_sq=tr_a,
        tr_pairing=tr_b,
        tr_condition3=tr_c3,
        degenerate=abs(tr_b) <= tol * _trace_scale(dz_qs, dz_qs, dzb_q, dzb_q),
        tol=tol,
        mode=gd.mode.value,
    )


@dataclass
class Prop42Report:
    """Holomorphic / ultrahyperbolic counterpart of Theorem11Report."""

    i: bool
    ii: bool
    iii: bool
    tr_pq: complex
    tr_dzp_sq: complex
    tr_dztq_sq: complex
    tr_pairing: complex
    tr_condition3: complex
    tol: float
    mode: str

    def all_pass(self) -> bool:
        return self.i and self.ii and self.iii

    def to_json_dict(self) -> dict:
        def c2l(x):
            return [float(np.real(x)), float(np.imag(x))]

        return {
            "i": self.i,
            "ii": self.ii,
            "iii": self.iii,
            "tr_pq": c2l(self.tr_pq),
            "tr_dzp_sq": c2l(self.tr_dzp_sq),
            "tr_dztq_sq": c2l(self.tr_dztq_sq),
            "tr_pairing": c2l(self.tr_pairing),
            "tr_condition3": c2l(self.tr_condition3),
            "tol": self.tol,
            "mode": self.mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _covariant_pq(gd: GaugeData):
    dz_p = gd.dP_dz + _comm(gd.A_z, gd.P)
    dzt_q = gd.dQ_dzt + _comm(gd.A_zt, gd.Q)
    return dz_p, dzt_q


def check_prop42(gd: GaugeData, tol: float = DEFAULT_TOL) -> Prop42Report:
    """Conditions (i)-(iii) characterising the Tzitzeica ansatz among
    holomorphic (or SL(3,R)) Hitchin solutions."""
    if gd.mode is RealityMode.EUCLIDEAN_SU21:
        raise ValueError("check_prop42 applies to holomorphic or SL(3,R) data")
    gd.require_derivatives()
    p, q = gd.P, gd.Q
    dz_p, dzt_q = _covariant_pq(gd)

    pq = p @ q
    qp = q @ p
    tr_pq = complex(np.trace(pq))
    cond_i = (
        min_poly_is_t2(p, tol)
        and min_poly_is_t2(q, tol)
        and abs(tr_pq) > tol * _trace_scale(p, q)
    )

    dz_p_sq = dz_p @ dz_p
    dzt_q_sq = dzt_q @ dzt_q
    tr_p2 = complex(np.trace(dz_p_sq))
    tr_q2 = complex(np.trace(dzt_q_sq))
    tr_pair = complex(np.trace(dz_p_sq @ dzt_q_sq))
    cond_ii = (
        abs(tr_p2) <= tol * _trace_scale(dz_p, dz_p)
        and abs(tr_q2) <= tol * _trace_scale(dzt_q, dzt_q)
        and abs(tr_pair) > tol * _trace_scale(dz_p, dz_p, dzt_q, dzt_q)
    )

    t1 = pq @ pq @ pq @ pq
    t2 = pq @ pq @ dz_p @ dzt_q
    t3 = pq @ dz_p @ qp @ dzt_q
    tr_c3 = complex(np.trace(t1 + t2 - t3))
    scale3 = max(_trace_scale(t1), _trace_scale(t2), _trace_scale(t3))
    cond_iii = abs(tr_c3) <= tol * scale3

    return Prop42Report(
        i=cond_i,
        ii=cond_ii,
        iii=cond_iii,
        tr_pq=tr_pq,
        tr_dzp_sq=tr_p2,
        tr_dztq_sq=tr_q2,
        tr_pairing=tr_pair,
        tr_condition3=tr_c3,
        tol=tol,
        mode=gd.mode.value,
    )


def tzitzeica_sign_trace(gd: GaugeData) -> complex:
    """Tr((D_x P)^2 (D_y Q)^2): its sign selects the real form."""
    gd.require_derivatives()
    dz_p, dzt_q = _covariant_pq(gd)
    return complex(np.trace(dz_p @ dz_p @ dzt_q @ dzt_q))


def classify_real_form(gd: GaugeData, tol: float = DEFAULT_TOL) -> RealForm:
    """Classify the SL(3,R) reduction by the sign of the pairing trace."""
    if gd.mode is not RealityMode.ULTRAHYPERBOLIC_SL3R:
        raise ValueError("classify_real_form requires the SL(3,R) slice")
    gd.require_derivatives()
    dz_p, dzt_q = _covariant_pq(gd)
    val = tzitzeica_sign_trace(gd)
    scale = _trace_scale(dz_p, dz_p, dzt_q, dzt_q)
    if abs(val) <= tol * scale:
        return RealForm.LIOUVILLE
    if abs(np.imag(val)) > tol * scale + 1e3 * tol * abs(val):
        raise RealityViolationError("pairing trace is not real; fields not on the real slice")
    return RealForm.TZITZEICA_MINUS if np.real(val) > 0 else RealForm.TZITZEICA_PLUS


# ---------------------------------------------------------------------------
# Z3 Toda chain residual
# ---------------------------------------------------------------------------

def _cross_xy(g: ScalarGrid) -> np.ndarray:
    """Second-order mixed derivative u_xy on interior nodes, zero on the rim."""
    u = g.values
    out = np.zeros_like(u, dtype=float)
    out[1:-1, 1:-1] = (
        u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]
    ) / (4.0 * g.hx * g.hy)
    return out


def toda_residual(u1: ScalarGrid, u2: ScalarGrid, eps1: int, eps2: int):
    """Pointwise residuals of the coupled Toda-chain system.

    Returns two ScalarGrids holding
        (u1)_xy - eps1 e^{u2-u1} + e^{2u1+u2}
        (u2)_xy + eps1 e^{u2-u1} - eps2 e^{-2u2-u1}
    on interior nodes (rim entries are zero, excluded from norms).
    """
    if (u1.nx, u1.ny) != (u2.nx, u2.ny) or not (
        np.isclose(u1.hx, u2.hx) and np.isclose(u1.hy, u2.hy)
    ):
        raise GridMismatchError("u1 and u2 must share shape and spacing")
    if eps1 not in (-1, 1) or eps2 not in (-1, 1):
        raise ValueError("eps1, eps2 must be +1 or -1")
    a = np.real(u1.values)
    b = np.real(u2.values)
    r1 = _cross_xy(u1) - eps1 * np.exp(b - a) + np.exp(2 * a + b)
    r2 = _cross_xy(u2) + eps1 * np.exp(b - a) - eps2 * np.exp(-2 * b - a)
    mask = np.zeros_like(a)
    mask[1:-1, 1:-1] = 1.0
    return u1.like(r1 * mask), u2.like(r2 * mask)
