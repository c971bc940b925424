"""Frame integration for the immersion, the cone point map, and the explicit
semi-flat Calabi-Yau coframe with its SU(3)-structure residuals.

The frame N has rows (f, f_z, f_zbar) and solves the linear structure system
dN/dz = Bz N, dN/dzbar = Bzbar N; flatness of that system is exactly the
affine sphere equation, which the loop-defect and d(omega), d(Omega) checks
measure numerically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .matalg3 import maxabs
from .pdesolve import CubicDifferential, ScalarGrid

__all__ = [
    "SingularFrameError",
    "DegenerateFrameError",
    "structure_matrices",
    "structure_curvature",
    "FrameField",
    "integrate_frame",
    "frame_loop_defect",
    "liouville_frame",
    "cone_point",
    "CoframeSample",
    "cy_coframe",
    "coframe_conjugation_defect",
    "assemble_g_omega",
    "complex_structure",
    "su3_structure_residuals",
    "remark2_gauge_check",
    "wedge",
    "form_from_antisymmetric",
    "coframe_three_form",
]


class SingularFrameError(RuntimeError):
    """The integrated frame lost invertibility."""


class DegenerateFrameError(ValueError):
    """The assembled metric failed positive definiteness."""


def structure_matrices(psi, psi_z, psi_zbar, U):
    """Coefficient matrices of the first-order immersion system.

    dN/dz = Bz N and dN/dzbar = Bzbar N for N with rows (f, f_z, f_zbar).
    """
    ep = np.exp(psi)
    emp = np.exp(-psi)
    Bz = np.array(
        [[0, 1, 0], [0, psi_z, U * emp], [-0.5 * ep, 0, 0]], dtype=complex
    )
    Bzbar = np.array(
        [[0, 0, 1], [-0.5 * ep, 0, 0], [0, np.conj(U) * emp, psi_zbar]],
        dtype=complex,
    )
    return Bz, Bzbar


def structure_curvature(psi, psi_z, psi_zbar, psi_zzbar, U):
    """Flatness defect d_zbar Bz - d_z Bzbar + [Bz, Bzbar].

    Equals diag(0, r, -r) with r the affine-sphere residual at the point
    (for holomorphic U), so it vanishes exactly on solutions.
    """
    Bz, Bzbar = structure_matrices(psi, psi_z, psi_zbar, U)
    ep = np.exp(psi)
    emp = np.exp(-psi)
    dzbar_Bz = np.array(
        [
            [0, 0, 0],
            [0, psi_zzbar, -U * psi_zbar * emp],
            [-0.5 * psi_zbar * ep, 0, 0],
        ],
        dtype=complex,
    )
    dz_Bzbar = np.array(
        [
            [0, 0, 0],
            [-0.5 * psi_z * ep, 0, 0],
            [0, -np.conj(U) * psi_z * emp, psi_zzbar],
        ],
        dtype=complex,
    )
    return dzbar_Bz - dz_Bzbar + Bz @ Bzbar - Bzbar @ Bz


@dataclass
class FrameField:
    """Frame matrices over a grid; N[i, j] is the 3x3 frame at node (i, j)."""

    grid: ScalarGrid
    N: np.ndarray
    base: tuple = (0, 0)

    def det(self) -> np.ndarray:
        return np.linalg.det(self.N)


def _frame_coefficients(psi: ScalarGrid, U: CubicDifferential):
    """Bz, Bzbar at every node, derivatives from second-order stencils."""
    v = np.real(psi.values).astype(float)
    gx = np.gradient(v, psi.hx, axis=0, edge_order=2)
    gy = np.gradient(v, psi.hy, axis=1, edge_order=2)
    psi_z = 0.5 * (gx - 1j * gy)
    z = psi.zmesh()
    uvals = U(z)
    ep = np.exp(v)
    emp = np.exp(-v)
    Bz = np.zeros((psi.nx, psi.ny, 3, 3), dtype=complex)
    Bzb = np.zeros_like(Bz)
    Bz[..., 0, 1] = 1.0
    Bz[..., 1, 1] = psi_z
    Bz[..., 1, 2] = uvals * emp
    Bz[..., 2, 0] = -0.5 * ep
    Bzb[..., 0, 2] = 1.0
    Bzb[..., 1, 0] = -0.5 * ep
    Bzb[..., 2, 1] = np.conj(uvals) * emp
    Bzb[..., 2, 2] = np.conj(psi_z)
    return Bz, Bzb


def _rk4_linear_step(N, B0, B1, h):
    """One RK4 step of N' = B(t) N with B at the endpoints (midpoint averaged)."""
    Bm = 0.5 * (B0 + B1)
    k1 = B0 @ N
    k2 = Bm @ (N + 0.5 * h * k1)
    k3 = Bm @ (N + 0.5 * h * k2)
    k4 = B1 @ (N + h * k3)
    return N + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_frame(
    psi: ScalarGrid,
    U: CubicDifferential,
    N0,
    base: tuple = (0, 0),
    det_guard: float = 1e-10,
) -> FrameField:
    """Integrate the structure system over the grid from N0 at `base`.

    Path convention: along the base row in x first, then along each column
    in y.  Fourth-order stepping; coefficient accuracy is set by the grid
    stencils, so the loop defect of exact data scales like h^2.
    """
    if psi.geometry != "cartesian":
        raise ValueError("frame integration expects a cartesian grid")
    Bz, Bzb = _frame_coefficients(psi, U)
    Bx = Bz + Bzb          # d/dx = d/dz + d/dzbar
    By = 1j * (Bz - Bzb)   # d/dy = i (d/dz - d/dzbar)
    nx, ny = psi.nx, psi.ny
    i0, j0 = base
    N = np.zeros((nx, ny, 3, 3), dtype=complex)
    N[i0, j0] = np.asarray(N0, dtype=complex)
    for i in range(i0 + 1, nx):
        N[i, j0] = _rk4_linear_step(N[i - 1, j0], Bx[i - 1, j0], Bx[i, j0], psi.hx)
    for i in range(i0 - 1, -1, -1):
        N[i, j0] = _rk4_linear_step(N[i + 1, j0], Bx[i + 1, j0], Bx[i, j0], -psi.hx)
    for i in range(nx):
        for j in range(j0 + 1, ny):
            N[i, j] = _rk4_linear_step(N[i, j - 1], By[i, j - 1], By[i, j], psi.hy)
        for j in range(j0 - 1, -1, -1):
            N[i, j] = _rk4_linear_step(N[i, j + 1], By[i, j + 1], By[i, j], -psi.hy)
    dets = np.abs(np.linalg.det(N))
    scale = np.abs(np.linalg.det(np.asarray(N0, dtype=complex)))
    if np.min(dets) < det_guard * max(scale, 1e-300):
        raise SingularFrameError(
            f"|det N| fell to {np.min(dets):.3e} during integration"
        )
    return FrameField(grid=psi, N=N, base=base)


def frame_loop_defect(
    psi: ScalarGrid, U: CubicDifferential, N0, i0: int, j0: int, i1: int, j1: int
) -> float:
    """Transport N0 around the rectangle (i0,j0)->(i1,j0)->(i1,j1)->(i0,j1)->
    back and return max|N_end - N0|; measures flatness failure at O(h^2)."""
    Bz, Bzb = _frame_coefficients(psi, U)
    Bx = Bz + Bzb
    By = 1j * (Bz - Bzb)
    N = np.asarray(N0, dtype=complex).copy()
    for i in range(i0, i1):
        N = _rk4_linear_step(N, Bx[i, j0], Bx[i + 1, j0], psi.hx)
    for j in range(j0, j1):
        N = _rk4_linear_step(N, By[i1, j], By[i1, j + 1], psi.hy)
    for i in range(i1, i0, -1):
        N = _rk4_linear_step(N, Bx[i, j1], Bx[i - 1, j1], -psi.hx)
    for j in range(j1, j0, -1):
        N = _rk4_linear_step(N, By[i0, j], By[i0, j - 1], -psi.hy)
    return maxabs(N - np.asarray(N0, dtype=complex))


def liouville_frame(z) -> np.ndarray:
    """Exact frame of the stereographic round sphere (the U = 0 solution)."""
    z = complex(z)
    zb = np.conj(z)
    D = 1.0 + (z * zb).real
    f = np.array([(z + zb) / D, -1j * (z - zb) / D, (1 - z * zb) / D])
    fz = np.array(
        [(1 - zb ** 2) / D ** 2, -1j * (1 + zb ** 2) / D ** 2, -2 * zb / D ** 2]
    )
    fzb = np.array(
        [(1 - z ** 2) / D ** 2, 1j * (1 + z ** 2) / D ** 2, -2 * z / D ** 2]
    )
    return np.vstack([f, fz, fzb]).astype(complex)


def cone_point(N, r: float) -> np.ndarray:
    """Point of the metric cone: x = r * f with f the first frame row."""
    if r <= 0:
        raise ValueError("r must be positive")
    return r * np.real(np.asarray(N)[0])


# ---------------------------------------------------------------------------
# Calabi-Yau coframe
# ---------------------------------------------------------------------------

# real coordinate order used throughout: (x, y, Re w, Im w, Re xi, Im xi)
_COORDS = ("x", "y", "u", "v", "p", "q")


@dataclass
class CoframeSample:
    """Complex coframe (e1, e2, e3) at a point of the total space.

    C[i] holds the coefficients of e_{i+1} over the real differentials
    (dx, dy, d Re w, d Im w, d Re xi, d Im xi); cdz etc. keep the complex
    differential coefficients for structural checks.
    """

    z: complex
    w: complex
    xi: complex
    psi: float
    psi_z: complex
    U: complex
    C: np.ndarray
    cdz: np.ndarray
    cdzb: np.ndarray
    cdw: np.ndarray
    cdxi: np.ndarray
    cdxib: np.ndarray


def cy_coframe(z, w, xi, psi, psi_z, U) -> CoframeSample:
    """Evaluate the explicit semi-flat coframe at (z, w, xi).

    e1 = dw - (i/2) e^psi (conj(xi) dz + xi dzbar)
    e2 = (e^{psi/2}/sqrt(2)) ((w + i xi psi_z) dz + i (dxi + e^{-psi} conj(U) conj(xi) dzbar))
    e3 = (e^{psi/2}/sqrt(2)) (i (dxibar + e^{-psi} U xi dz) + (w + i conj(xi) psi_zbar) dzbar)
    """
    psi = float(np.real(psi))
    w = complex(w)
    xi = complex(xi)
    U = complex(U)
    psi_zb = np.conj(psi_z)
    Ub = np.conj(U)
    xib = np.conj(xi)
    ep = np.exp(psi)
    pref = np.exp(psi / 2) / np.sqrt(2.0)

    cdz = np.zeros(3, dtype=complex)
    cdzb = np.zeros(3, dtype=complex)
    cdw = np.zeros(3, dtype=complex)
    cdxi = np.zeros(3, dtype=complex)
    cdxib = np.zeros(3, dtype=complex)

    cdw[0] = 1.0
    cdz[0] = -0.5j * ep * xib
    cdzb[0] = -0.5j * ep * xi

    cdz[1] = pref * (w + 1j * xi * psi_z)
    cdzb[1] = pref * 1j * np.exp(-psi) * Ub * xib
    cdxi[1] = pref * 1j

    cdz[2] = pref * 1j * np.exp(-psi) * U * xi
    cdzb[2] = pref * (w + 1j * xib * psi_zb)
    cdxib[2] = pref * 1j

    # expand over real differentials: dz = dx + i dy, dw = du + i dv, ...
    C = np.zeros((3, 6), dtype=complex)
    C[:, 0] = cdz + cdzb
    C[:, 1] = 1j * (cdz - cdzb)
    C[:, 2] = cdw
    C[:, 3] = 1j * cdw
    C[:, 4] = cdxi + cdxib
    C[:, 5] = 1j * (cdxi - cdxib)
    return CoframeSample(
        z=complex(z), w=w, xi=xi, psi=psi, psi_z=complex(psi_z), U=U,
        C=C, cdz=cdz, cdzb=cdzb, cdw=cdw, cdxi=cdxi, cdxib=cdxib,
    )


def coframe_conjugation_defect(z, w, xi, psi, psi_z, U) -> float:
    """Structural invariant: e3's coefficients are e2's under the swap
    (z <-> zbar, xi <-> conj(xi), U <-> conj(U)), with w kept fixed."""
    cs = cy_coframe(z, w, xi, psi, psi_z, U)
    sw = cy_coframe(z, w, np.conj(xi), psi, np.conj(psi_z), np.conj(U))
    return float(
        max(
            abs(cs.cdzb[2] - sw.cdz[1]),
            abs(cs.cdz[2] - sw.cdzb[1]),
            abs(cs.cdxib[2] - sw.cdxi[1]),
            abs(cs.cdxi[2] - sw.cdxib[1]),
        )
    )


def assemble_g_omega(cs: CoframeSample, definite_tol: float = 1e-12):
    """Real metric g = sum e_i conj(e_i) and Kahler form
    omega = (i/2) sum e_i wedge conj(e_i) over the six real coordinates.

    Raises DegenerateFrameError when g is not positive definite.
    """
    C = cs.C
    herm = C.conj().T @ C  # herm[a, b] = sum_i conj(C[i,a]) C[i,b]
    g = np.real(herm)
    omega = np.imag(herm)  # -Im(C[i,a] conj(C[i,b])) = Im(conj(C[i,a]) C[i,b])
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= definite_tol * max(1.0, eig[-1]):
        raise DegenerateFrameError(f"metric not positive definite: min eig {eig[0]:.3e}")
    return g, omega


def complex_structure(cs: CoframeSample) -> np.ndarray:
    """Almost complex structure J with (e1, e2, e3) of type (1, 0):
    solves E J = diag(i, i, i, -i, -i, -i) E for E = [C; conj(C)]."""
    E6 = np.vstack([cs.C, cs.C.conj()])
    D = np.diag([1j, 1j, 1j, -1j, -1j, -1j])
    J = np.linalg.solve(E6, D @ E6)
    if maxabs(J.imag) > 1e-10 * max(1.0, maxabs(J.real)):
        raise DegenerateFrameError("complex structure came out non-real")
    return np.real(J)


# -- small exterior-algebra helpers (forms as {sorted index tuple: coeff}) --

def wedge(a: dict, b: dict) -> dict:
    out = {}
    for I, vI in a.items():
        for J, vJ in b.items():
            if set(I) & set(J):
                continue
            merged = I + J
            perm = np.argsort(merged, kind="stable")
            sign = _perm_sign(perm)
            key = tuple(sorted(merged))
            out[key] = out.get(key, 0.0) + sign * vI * vJ
    return {k: v for k, v in out.items() if v != 0}


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def form_from_antisymmetric(m: np.ndarray) -> dict:
    """2-form dict from an antisymmetric matrix: sum_{a<b} m[a,b] dx^a ^ dx^b."""
    out = {}
    n = m.shape[0]
    for a in range(n):
        for b in range(a + 1, n):
            if m[a, b] != 0:
                out[(a, b)] = m[a, b]
    return out


def coframe_three_form(cs: CoframeSample) -> dict:
    """Omega = e1 ^ e2 ^ e3 as a 3-form over the real coordinates."""
    e1 = {(a,): cs.C[0, a] for a in range(6) if cs.C[0, a] != 0}
    e2 = {(a,): cs.C[1, a] for a in range(6) if cs.C[1, a] != 0}
    e3 = {(a,): cs.C[2, a] for a in range(6) if cs.C[2, a] != 0}
    return wedge(wedge(e1, e2), e3)


def _node_point_data(psi: ScalarGrid, U: CubicDifferential, i: int, j: int):
    v = np.real(psi.values)
    x = psi.x0 + i * psi.hx
    y = psi.y0 + j * psi.hy
    z = x + 1j * y
    psi_x = (v[i + 1, j] - v[i - 1, j]) / (2 * psi.hx)
    psi_y = (v[i, j + 1] - v[i, j - 1]) / (2 * psi.hy)
    psi_z = 0.5 * (psi_x - 1j * psi_y)
    return z, float(v[i, j]), psi_z, complex(U(z))


def su3_structure_residuals(
    psi: ScalarGrid,
    U: CubicDifferential,
    w_samples=(1.0 + 0.0j, 1.15 + 0.2j),
    xi_samples=(0.0 + 0.0j, 0.2 - 0.15j),
    max_space_samples: int = 4,
):
    """Max-norm finite-difference residuals (max |d omega|, max |d Omega|).

    Exterior derivatives over the six real coordinates are taken by centered
    differences with step h = min(hx, hy) in the fibre directions and the
    grid stencil in the base directions; both residuals are O(h^2) exactly
    when psi solves the affine sphere equation.
    """
    if psi.geometry != "cartesian":
        raise ValueError("su3_structure_residuals expects a cartesian grid")
    if psi.nx < 7 or psi.ny < 7:
        raise ValueError("grid too small for the interior stencils")
    h = min(psi.hx, psi.hy)
    steps = np.array([psi.hx, psi.hy, h, h, h, h])

    def sample_nodes():
        ii = np.unique(np.linspace(2, psi.nx - 3, max_space_samples, dtype=int))
        jj = np.unique(np.linspace(2, psi.ny - 3, max_space_samples, dtype=int))
        return [(i, j) for i in ii for j in jj]

    def coframe_at(i, j, w, xi):
        z, pv, pz, uv = _node_point_data(psi, U, i, j)
        return cy_coframe(z, w, xi, pv, pz, uv)

    def shifted(i, j, w, xi, axis, sgn):
        if axis == 0:
            return coframe_at(i + sgn, j, w, xi)
        if axis == 1:
            return coframe_at(i, j + sgn, w, xi)
        if axis == 2:
            return coframe_at(i, j, w + sgn * h, xi)
        if axis == 3:
            return coframe_at(i, j, w + 1j * sgn * h, xi)
        if axis == 4:
            return coframe_at(i, j, w, xi + sgn * h)
        return coframe_at(i, j, w, xi + 1j * sgn * h)

    max_domega = 0.0
    max_dOmega = 0.0
    for (i, j) in sample_nodes():
        for w in w_samples:
            for xi in xi_samples:
                omega_d = []
                Omega_d = []
                for axis in range(6):
                    cp = shifted(i, j, w, xi, axis, +1)
                    cm = shifted(i, j, w, xi, axis, -1)
                    _, om_p = assemble_g_omega(cp)
                    _, om_m = assemble_g_omega(cm)
                    omega_d.append((om_p - om_m) / (2 * steps[axis]))
                    Op = coframe_three_form(cp)
                    Om = coframe_three_form(cm)
                    keys = set(Op) | set(Om)
                    Omega_d.append(
                        {k: (Op.get(k, 0.0) - Om.get(k, 0.0)) / (2 * steps[axis])
                         for k in keys}
                    )
                for a, b, c in itertools.combinations(range(6), 3):
                    val = omega_d[a][b, c] - omega_d[b][a, c] + omega_d[c][a, b]
                    max_domega = max(max_domega, abs(val))
                for quad in itertools.combinations(range(6), 4):
                    val = 0.0
                    for pos, ax in enumerate(quad):
                        rest = tuple(q for q in quad if q != ax)
                        val += (-1) ** pos * Omega_d[ax].get(rest, 0.0)
                    max_dOmega = max(max_dOmega, abs(val))
    return max_domega, max_dOmega


def remark2_gauge_check(psi, psi_z, U, lam: complex = 1.0) -> float:
    """Defect of the gauge identity linking the affine-sphere ansatz at
    spectral value lam = 1 to the structure matrices; zero identically."""
    from .gauge import build_affine_sphere_ansatz  # local import, no cycle

    psi = float(np.real(psi))
    gd = build_affine_sphere_ansatz(psi, psi_z, U=U)
    psi_zb = np.conj(psi_z)
    g = np.diag([1.0, -np.sqrt(2.0) * np.exp(-psi / 2), -np.sqrt(2.0) * np.exp(-psi / 2)]).astype(complex)
    gi = np.linalg.inv(g)
    dg_dz = np.diag([0.0, 0.5 * psi_z, 0.5 * psi_z]) @ (-g)
    dg_dzb = np.diag([0.0, 0.5 * psi_zb, 0.5 * psi_zb]) @ (-g)
    Az_check = -(gi @ (gd.A_z + lam * gd.P) @ g + gi @ dg_dz)
    Azb_check = -(gi @ (gd.A_zt + gd.Q / lam) @ g + gi @ dg_dzb)
    Bz, Bzbar = structure_matrices(psi, psi_z, psi_zb, U)
    return max(maxabs(Az_check - Bz), maxabs(Azb_check - Bzbar))
