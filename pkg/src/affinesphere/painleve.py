"""Painleve III (type D7): right-hand side, radial-reduction parameter maps,
adaptive integration and the 3x3 isomonodromic Lax pair.

The radial reduction of the affine sphere equation with U = z^{-2} produces
the parameter quadruple (-8, 0, 0, -16); the Lax pair below is the 3x3
zero-curvature reduction evaluated along a trajectory, with two double poles
in the spectral parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .matalg3 import matrix_unit

__all__ = [
    "PIIIParams",
    "PIII_AFFINE_SPHERE",
    "RadialSolution",
    "ReductionData",
    "LaxSample",
    "SingularPointError",
    "NEqualsThreeError",
    "SingularApproachError",
    "StepUnderflowError",
    "NonpositiveHError",
    "piii_rhs",
    "algebraic_solution",
    "reduction_params",
    "integrate_piii",
    "radial_to_psi",
    "RadialPsi",
    "lax_pair_at",
    "lax_s_derivative",
    "isomonodromy_residual",
]

E = matrix_unit


class SingularPointError(ValueError):
    """The ODE right-hand side is evaluated at H = 0 or s = 0."""


class NEqualsThreeError(ValueError):
    """n = 3 does not reduce to Painleve III; use the radial first integral."""


class SingularApproachError(RuntimeError):
    """Integration stopped because |H| reached the singular guard."""

    def __init__(self, s_stop: float, h_stop: float, partial: "RadialSolution"):
        self.s_stop = s_stop
        self.h_stop = h_stop
        self.partial = partial
        super().__init__(f"|H| hit the singular guard at s = {s_stop:.6g}, H = {h_stop:.3e}")


class StepUnderflowError(RuntimeError):
    """The adaptive integrator's step size underflowed."""


class NonpositiveHError(ValueError):
    """Operation requires H > 0 along the trajectory."""


@dataclass(frozen=True)
class PIIIParams:
    alpha: float
    beta: float
    gamma: float
    delta: float

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)


#: parameters of the U = z^{-2} radial reduction
PIII_AFFINE_SPHERE = PIIIParams(-8.0, 0.0, 0.0, -16.0)


def piii_rhs(s, H, Hs, p: PIIIParams):
    """H_ss = Hs^2/H - Hs/s + (alpha H^2 + beta)/s + gamma H^3 + delta/H."""
    s = np.asarray(s, dtype=float)
    H = np.asarray(H, dtype=float)
    if np.any(s == 0) or np.any(H == 0):
        raise SingularPointError("piii_rhs needs s != 0 and H != 0")
    Hs = np.asarray(Hs, dtype=float)
    out = (
        Hs ** 2 / H
        - Hs / s
        + (p.alpha * H ** 2 + p.beta) / s
        + p.gamma * H ** 3
        + p.delta / H
    )
    return out if out.shape else float(out)


def algebraic_solution(s):
    """The unique algebraic solution H = -(2 s)^{1/3} at (-8, 0, 0, -16)."""
    return -np.cbrt(2.0 * np.asarray(s, dtype=float))


@dataclass(frozen=True)
class ReductionData:
    """Bookkeeping of the U = z^{-n} reduction: s = (z zbar)^{s_power} and
    psi = psi_s_exponent * log(s) + h_exponent * log(H)."""

    n: int
    k: int
    s_power: float
    psi_s_exponent: float
    h_exponent: int

    def psi_of(self, H, s):
        return self.psi_s_exponent * np.log(s) + self.h_exponent * np.log(H)


def reduction_params(n: int, k: int = 1):
    """PIII parameters of the radial reduction with U = z^{-n}, n != 3.

    k = +1 gives (-8, 0, 0, -16)/(3-n)^2; k = -1 gives (0, 8, 16, 0)/(3-n)^2.
    """
    if n == 3:
        raise NEqualsThreeError(
            "n = 3 reduces to a first-order ODE; see radial_n3_first_integral"
        )
    if k not in (1, -1):
        raise ValueError("k must be +1 or -1")
    d = float((3 - n) ** 2)
    if k == 1:
        params = PIIIParams(-8.0 / d, 0.0, 0.0, -16.0 / d)
    else:
        params = PIIIParams(0.0, 8.0 / d, 16.0 / d, 0.0)
    data = ReductionData(
        n=n,
        k=k,
        s_power=(3 - n) / 4.0,
        psi_s_exponent=-(1 + n) / (3 - n),
        h_exponent=k,
    )
    return params, data


@dataclass
class RadialSolution:
    """A Painleve III trajectory: nodes s (increasing, > 0), H and H_s."""

    s: np.ndarray
    H: np.ndarray
    Hs: np.ndarray
    params: Optional[PIIIParams] = None
    interpolant: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        self.Hs = np.asarray(self.Hs, dtype=float)
        if not (self.s.shape == self.H.shape == self.Hs.shape):
            raise ValueError("s, H, Hs must have identical shapes")
        if np.any(self.s <= 0):
            raise ValueError("s must be strictly positive")
        if np.any(self.H == 0):
            raise ValueError("H vanishes at a node; the ODE is singular there")

    def at(self, s):
        """Dense (H, Hs) via the integrator interpolant."""
        if self.interpolant is None:
            raise ValueError("no dense interpolant attached")
        y = self.interpolant(np.asarray(s, dtype=float))
        return y[0], y[1]

    def psi_at_log_radius(self, rho_hat):
        """psi at log|z| = rho_hat through s = |z|^{1/2}, psi = log H - 3 log s."""
        s = np.exp(0.5 * np.asarray(rho_hat, dtype=float))
        h, _ = self.at(s)
        if np.any(h <= 0):
            raise NonpositiveHError("H must stay positive to build a real psi")
        return np.log(h) - 3.0 * np.log(s)


def integrate_piii(
    p: PIIIParams,
    s0: float,
    H0: float,
    Hs0: float,
    s_end: float,
    tol: float = 1e-10,
    n_samples: int = 257,
    h_guard: float = 1e-6,
) -> RadialSolution:
    """Adaptive RK45 integration of Painleve III from (H0, Hs0) at s0.

    Raises SingularApproachError (with the partial trajectory attached) if
    |H| falls to h_guard, and StepUnderflowError if the stepper stalls.
    """
    if s0 <= 0 or (s_end <= 0):
        raise SingularPointError("s must stay positive")
    if H0 == 0:
        raise SingularPointError("H0 must be nonzero")

    def rhs(s, y):
        return [y[1], piii_rhs(s, y[0], y[1], p)]

    def guard(s, y):
        return abs(y[0]) - h_guard

    guard.terminal = True
    guard.direction = -1

    t_eval = np.linspace(s0, s_end, n_samples)
    sol = solve_ivp(
        rhs,
        (s0, s_end),
        [H0, Hs0],
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        t_eval=t_eval,
        events=[guard],
    )
    if sol.status == -1:
        raise StepUnderflowError(sol.message)
    order = np.argsort(sol.t)
    rs = RadialSolution(
        s=sol.t[order],
        H=sol.y[0][order],
        Hs=sol.y[1][order],
        params=p,
        interpolant=sol.sol,
        meta={"tol": tol, "s0": s0, "H0": H0, "Hs0": Hs0, "s_end": s_end},
    )
    if sol.status == 1:  # guard event fired
        s_stop = float(sol.t_events[0][0])
        h_stop = float(sol.y_events[0][0][0])
        raise SingularApproachError(s_stop, h_stop, rs)
    return rs


@dataclass(frozen=True)
class RadialPsi:
    """Radial affine-sphere data recovered from a trajectory: psi(s) with
    rho = s^2 the z-plane radius."""

    s: np.ndarray
    psi: np.ndarray
    rho: np.ndarray


def radial_to_psi(rs: RadialSolution) -> RadialPsi:
    """psi_i = log H_i - 3 log s_i; requires H > 0 on the trajectory."""
    if np.any(rs.H <= 0):
        raise NonpositiveHError("H must be positive for a real psi")
    psi = np.log(rs.H) - 3.0 * np.log(rs.s)
    return RadialPsi(s=rs.s.copy(), psi=psi, rho=rs.s ** 2)


# ---------------------------------------------------------------------------
# Isomonodromic Lax pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaxSample:
    """Rational-in-zeta Lax matrices at one point of a trajectory:
    L = Cm2/zeta^2 + Cm1/zeta + C0,  M = Dm1/zeta + D0 + D1*zeta."""

    s: float
    H: float
    Hs: float
    Cm2: np.ndarray
    Cm1: np.ndarray
    C0: np.ndarray
    Dm1: np.ndarray
    D0: np.ndarray
    D1: np.ndarray

    def L(self, zeta: complex) -> np.ndarray:
        return self.Cm2 / zeta ** 2 + self.Cm1 / zeta + self.C0

    def M(self, zeta: complex) -> np.ndarray:
        return self.Dm1 / zeta + self.D0 + self.D1 * zeta

    def dM_dzeta(self, zeta: complex) -> np.ndarray:
        return -self.Dm1 / zeta ** 2 + self.D1


def lax_pair_at(s: float, H: float, Hs: float) -> LaxSample:
    """Coefficient matrices of the isomonodromic pair at (s, H, Hs); H > 0."""
    if s <= 0:
        raise SingularPointError("s must be positive")
    if H <= 0:
        raise NonpositiveHError("the Lax matrices need H > 0 for real roots")
    a = np.sqrt(s * H) / np.sqrt(2.0)
    soh = s / H
    bb = s * Hs / (4.0 * H)
    Cm2 = -a * E(1, 3)
    C0 = -a * E(3, 1)
    Cm1 = np.array(
        [
            [-1.0 / 3.0, -a, 0.0],
            [-a, bb - 1.0 / 12.0, soh],
            [0.0, -soh, 5.0 / 12.0 - bb],
        ],
        dtype=complex,
    )
    mu = np.sqrt(2.0 * H / s)
    nu = np.sqrt(2.0 * s / H ** 3)
    Dm1 = mu * E(1, 3)
    D0 = mu * (-E(1, 2) + E(2, 1)) + mu * nu * (E(2, 3) + E(3, 2))
    D1 = -mu * E(3, 1)
    return LaxSample(s=s, H=H, Hs=Hs, Cm2=Cm2, Cm1=Cm1, C0=C0, Dm1=Dm1, D0=D0, D1=D1)


def lax_s_derivative(s: float, H: float, Hs: float, Hss: float):
    """d/ds of the L coefficients along a trajectory (chain rule through H)."""
    a_s = (H + s * Hs) / (2.0 * np.sqrt(2.0 * s * H))
    d_soh = 1.0 / H - s * Hs / H ** 2
    d_bb = (Hs + s * Hss) / (4.0 * H) - s * Hs ** 2 / (4.0 * H ** 2)
    dCm2 = -a_s * E(1, 3)
    dC0 = -a_s * E(3, 1)
    dCm1 = np.array(
        [
            [0.0, -a_s, 0.0],
            [-a_s, d_bb, d_soh],
            [0.0, -d_soh, -d_bb],
        ],
        dtype=complex,
    )
    return dCm2, dCm1, dC0


def isomonodromy_residual(
    rs: RadialSolution,
    p: PIIIParams,
    zetas: Sequence[complex],
    node_stride: int = 1,
) -> float:
    """Max-norm of L_s - M_zeta + [L, M] along the trajectory.

    d/ds of L is taken by second-order differences of the coefficient
    matrices *along the supplied arrays*: the compatibility then holds only
    for genuine Painleve III data, so corrupting a single node is detected.
    (Substituting H_ss from the ODE instead closes the bracket identically
    in (s, H, H_s); that analytic route lives in lax_s_derivative and is the
    cross-check of the chain rule, not a solution test.)

    The parameter p only enters through the cross-check contract: the pair
    encodes the (-8, 0, 0, -16) equation, and the returned residual is
    O(step^2) exactly when the arrays solve it.
    """
    if np.any(rs.H <= 0):
        raise NonpositiveHError("H must be positive along the trajectory")
    n = len(rs.s)
    if n < 3:
        raise ValueError("need at least three nodes for the s-derivative")
    samples = [
        lax_pair_at(float(s), float(h), float(hs))
        for s, h, hs in zip(rs.s, rs.H, rs.Hs)
    ]
    diffs = np.diff(rs.s)
    uniform = n >= 5 and np.max(np.abs(diffs - diffs[0])) <= 1e-9 * diffs[0]

    def coeff_derivs(i):
        out = []
        if uniform and 2 <= i <= n - 3:
            d = diffs[0]
            for name in ("Cm2", "Cm1", "C0"):
                f = [getattr(samples[i + k], name) for k in (-2, -1, 1, 2)]
                out.append((f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * d))
            return out
        hp = rs.s[i + 1] - rs.s[i]
        hm = rs.s[i] - rs.s[i - 1]
        wp = hm / (hp * (hp + hm))
        w0 = (hp - hm) / (hp * hm)
        wm = -hp / (hm * (hp + hm))
        for name in ("Cm2", "Cm1", "C0"):
            fp_ = getattr(samples[i + 1], name)
            f0 = getattr(samples[i], name)
            fm = getattr(samples[i - 1], name)
            out.append(wp * fp_ + w0 * f0 + wm * fm)
        return out

    lo, hi = (2, n - 2) if uniform else (1, n - 1)
    worst = 0.0
    for i in range(lo, hi, node_stride):
        sample = samples[i]
        dCm2, dCm1, dC0 = coeff_derivs(i)
        for zeta in zetas:
            zeta = complex(zeta)
            if zeta == 0:
                raise ValueError("zeta = 0 sits on the double pole")
            L = sample.L(zeta)
            M = sample.M(zeta)
            Ls = dCm2 / zeta ** 2 + dCm1 / zeta + dC0
            R = Ls - sample.dM_dzeta(zeta) + L @ M - M @ L
            worst = max(worst, float(np.max(np.abs(R))))
    return worst
