"""Grids, residuals and solvers for the definite affine sphere equation and
its hyperbolic / radial relatives.

The elliptic solve is a damped Newton iteration on the 5-point discretisation
of  psi_{z zbar} + e^psi/2 + |U|^2 e^{-2 psi} = 0  (note psi_{z zbar} equals a
quarter of the flat Laplacian).  Annuli for singular cubic differentials are
handled as log-polar rectangles, periodic in the angle.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

__all__ = [
    "ScalarGrid",
    "CubicDifferential",
    "SingularUError",
    "NonConvergenceError",
    "BlowupError",
    "ForbiddenRegionError",
    "affine_sphere_residual",
    "solve_affine_sphere",
    "goursat_march",
    "tzitzeica_march",
    "toda_march",
    "travelling_wave_profile",
    "travelling_wave_potential",
    "TravellingWaveProfile",
    "radial_n3_rhs",
    "radial_n3_first_integral",
    "liouville_psi",
    "grid_to_csv",
    "grid_from_csv",
    "grid_to_json_dict",
]


class SingularUError(ValueError):
    """A grid node coincides with a pole of the cubic differential."""


class NonConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Newton did not converge: {iterations} iterations, residual {residual:.3e}"
        )


class BlowupError(RuntimeError):
    """March exceeded the overflow guard."""


class ForbiddenRegionError(ValueError):
    """Requested energy level forbids real motion at the starting point."""


@dataclass
class ScalarGrid:
    """Rectangular sample of a scalar field.

    geometry "cartesian": node (i, j) sits at z = (x0 + i hx) + 1j (y0 + j hy).
    geometry "logpolar": the first coordinate is log|z|, the second is arg z,
    periodic; the grid covers a full annulus, so ny * hy must equal 2 pi.
    """

    nx: int
    ny: int
    x0: float
    y0: float
    hx: float
    hy: float
    values: np.ndarray
    geometry: str = "cartesian"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hx <= 0 or self.hy <= 0:
            raise ValueError("grid spacings must be positive")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("need nx, ny >= 3 for stencil support")
        self.values = np.asarray(self.values)
        if self.values.shape != (self.nx, self.ny):
            raise ValueError(
                f"values shape {self.values.shape} != ({self.nx}, {self.ny})"
            )
        if self.geometry not in ("cartesian", "logpolar"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "logpolar" and abs(self.ny * self.hy - 2 * np.pi) > 1e-9:
            raise ValueError("logpolar grids must close up: ny * hy = 2 pi")

    def x(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    def y(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.x(), self.y(), indexing="ij")

    def zmesh(self) -> np.ndarray:
        X, Y = self.mesh()
        if self.geometry == "cartesian":
            return X + 1j * Y
        return np.exp(X + 1j * Y)

    def like(self, values, **meta) -> "ScalarGrid":
        return ScalarGrid(
            self.nx, self.ny, self.x0, self.y0, self.hx, self.hy,
            np.asarray(values), self.geometry, dict(meta),
        )

    def interior_max_abs(self) -> float:
        if self.geometry == "logpolar":
            return float(np.max(np.abs(self.values[1:-1, :])))
        return float(np.max(np.abs(self.values[1:-1, 1:-1])))


@dataclass(frozen=True)
class CubicDifferential:
    """Holomorphic coefficient U(z) of the cubic differential U dz^3.

    kind is one of "zero", "constant", "monomial" (U = z**(-power), the
    singular family used for radial reductions) or "callable".
    """

    kind: str = "zero"
    value: complex = 0.0
    power: int = 0
    func: Optional[Callable] = None

    @staticmethod
    def zero() -> "CubicDifferential":
        return CubicDifferential("zero")

    @staticmethod
    def constant(c) -> "CubicDifferential":
        return CubicDifferential("constant", value=complex(c))

    @staticmethod
    def monomial_power(n: int) -> "CubicDifferential":
        return CubicDifferential("monomial", power=int(n))

    @staticmethod
    def from_callable(f: Callable) -> "CubicDifferential":
        return CubicDifferential("callable", func=f)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "zero":
            return np.zeros_like(z)
        if self.kind == "constant":
            return np.full_like(z, self.value)
        if self.kind == "monomial":
            with np.errstate(divide="ignore", invalid="ignore"):
                return z ** (-self.power)
        return np.asarray(self.func(z), dtype=complex)

    def describe(self) -> str:
        if self.kind == "zero":
            return "U=0"
        if self.kind == "constant":
            return f"U={self.value}"
        if self.kind == "monomial":
            return f"U=z^(-{self.power})"
        return "U=callable"


def _u_abs2(U: CubicDifferential, z: np.ndarray) -> np.ndarray:
    vals = U(z)
    a2 = np.abs(vals) ** 2
    if not np.all(np.isfinite(a2)):
        raise SingularUError("a grid node coincides with a pole of U")
    return a2


def liouville_psi(z) -> np.ndarray:
    """Closed-form solution for U = 0: e^psi = 4 / (1 + |z|^2)^2."""
    z = np.asarray(z, dtype=complex)
    return np.log(4.0) - 2.0 * np.log1p(np.abs(z) ** 2)


def _laplacian_quarter(grid: ScalarGrid, v: np.ndarray) -> np.ndarray:
    """psi_{z zbar} = Laplacian/4 on interior nodes (zero elsewhere)."""
    out = np.zeros_like(v, dtype=float)
    hx2, hy2 = grid.hx ** 2, grid.hy ** 2
    if grid.geometry == "cartesian":
        out[1:-1, 1:-1] = 0.25 * (
            (v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / hx2
            + (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / hy2
        )
    else:
        # flat Laplacian in log-polar coordinates carries e^{-2 log|z|}
        up = np.roll(v, -1, axis=1)
        dn = np.roll(v, 1, axis=1)
        rr = np.exp(-2.0 * grid.x())[:, None]
        lap = np.zeros_like(v, dtype=float)
        lap[1:-1, :] = (
            (v[2:, :] - 2 * v[1:-1, :] + v[:-2, :]) / hx2
            + (up[1:-1, :] - 2 * v[1:-1, :] + dn[1:-1, :]) / hy2
        )
        out[1:-1, :] = 0.25 * rr[1:-1] * lap[1:-1, :]
    return out


def _interior_mask(grid: ScalarGrid) -> np.ndarray:
    m = np.zeros((grid.nx, grid.ny), dtype=bool)
    if grid.geometry == "cartesian":
        m[1:-1, 1:-1] = True
    else:
        m[1:-1, :] = True
    return m


def affine_sphere_residual(psi: ScalarGrid, U: CubicDifferential) -> ScalarGrid:
    """Pointwise residual psi_{z zbar} + e^psi/2 + |U|^2 e^{-2 psi}.

    Evaluated on interior nodes with the 5-point Laplacian; rim entries are
    zero and excluded from interior_max_abs().
    """
    v = np.real(psi.values).astype(float)
    mask = _interior_mask(psi)
    z = psi.zmesh()
    a2 = _u_abs2(U, z[mask])
    res = _laplacian_quarter(psi, v)
    res[mask] += 0.5 * np.exp(v[mask]) + a2 * np.exp(-2 * v[mask])
    return psi.like(res, kind="affine_sphere_residual", U=U.describe())


def _newton_system(grid: ScalarGrid, U: CubicDifferential):
    """Sparse quarter-Laplacian over interior unknowns and the index map."""
    nx, ny = grid.nx, grid.ny
    hx2, hy2 = grid.hx ** 2, grid.hy ** 2
    if grid.geometry == "cartesian":
        ii, jj = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1), indexing="ij")
        idx = -np.ones((nx, ny), dtype=int)
        idx[1:-1, 1:-1] = np.arange((nx - 2) * (ny - 2)).reshape(nx - 2, ny - 2)
        scale = 0.25 * np.ones((nx - 2) * (ny - 2))
        wrap_y = False
    else:
        ii, jj = np.meshgrid(np.arange(1, nx - 1), np.arange(ny), indexing="ij")
        idx = -np.ones((nx, ny), dtype=int)
        idx[1:-1, :] = np.arange((nx - 2) * ny).reshape(nx - 2, ny)
        scale = 0.25 * np.exp(-2.0 * grid.x()[ii.ravel()])
        wrap_y = True

    ii = ii.ravel()
    jj = jj.ravel()
    rows, cols, vals = [], [], []
    n_unknown = ii.size
    k = np.arange(n_unknown)
    rows.append(k)
    cols.append(k)
    vals.append(-2.0 * scale * (1.0 / hx2 + 1.0 / hy2))
    for di, dj, w in ((1, 0, 1 / hx2), (-1, 0, 1 / hx2), (0, 1, 1 / hy2), (0, -1, 1 / hy2)):
        ni = ii + di
        nj = jj + dj
        if wrap_y:
            nj = nj % ny
        inside = (ni >= 0) & (ni < nx) & (nj >= 0) & (nj < ny)
        nbr = np.where(inside, idx[ni % nx, nj % ny], -1)
        keep = nbr >= 0
        rows.append(k[keep])
        cols.append(nbr[keep])
        vals.append(scale[keep] * w)
    lap = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_unknown, n_unknown),
    )
    return lap, idx, (ii, jj)


def solve_affine_sphere(
    U: CubicDifferential,
    init: ScalarGrid,
    boundary=None,
    tol: float = 1e-8,
    max_iter: int = 60,
    max_backtracks: int = 30,
) -> ScalarGrid:
    """Damped Newton solve of the affine sphere equation with Dirichlet data.

    Boundary values come from `boundary` (array matching the grid, or a
    callable of z) applied on the rim, or from init's rim if None.  The
    returned grid's meta records iterations and the final residual norm.
    """
    psi = np.real(init.values).astype(float).copy()
    if boundary is not None:
        b = boundary(init.zmesh()) if callable(boundary) else np.real(np.asarray(boundary))
        if b.shape != psi.shape:
            raise ValueError("boundary array must match the grid shape")
        rim = ~_interior_mask(init)
        psi[rim] = b[rim]
    work = init.like(psi)
    lap, idx, (ii, jj) = _newton_system(init, U)
    z_int = work.zmesh()[ii, jj]
    a2 = _u_abs2(U, z_int)

    def residual_vec(g: ScalarGrid) -> np.ndarray:
        return affine_sphere_residual(g, U).values[ii, jj]

    f = residual_vec(work)
    fnorm = float(np.max(np.abs(f)))
    history = [fnorm]
    iters = 0
    backtracks = 0
    while fnorm > tol:
        if iters >= max_iter:
            raise NonConvergenceError(iters, fnorm)
        diag = 0.5 * np.exp(psi[ii, jj]) - 2.0 * a2 * np.exp(-2.0 * psi[ii, jj])
        jac = lap + sp.diags(diag)
        delta = spla.spsolve(jac.tocsc(), -f)
        t = 1.0
        accepted = False
        for _ in range(max_backtracks + 1):
            trial = psi.copy()
            trial[ii, jj] += t * delta
            with np.errstate(over="ignore"):
                f_try = residual_vec(work.like(trial))
            fn_try = float(np.max(np.abs(f_try))) if np.all(np.isfinite(f_try)) else np.inf
            if fn_try <= (1.0 - 1e-4 * t) * fnorm:
                psi = trial
                f, fnorm = f_try, fn_try
                accepted = True
                break
            t *= 0.5
            backtracks += 1
        if not accepted:
            raise NonConvergenceError(iters, fnorm)
        iters += 1
        history.append(fnorm)
    return init.like(
        psi,
        iterations=iters,
        residual_norm=fnorm,
        backtracks=backtracks,
        residual_history=history,
        tol=tol,
        U=U.describe(),
    )


# ---------------------------------------------------------------------------
# Goursat marching
# ---------------------------------------------------------------------------

def goursat_march(rhs, x_data, y_data, hx, hy, guard: float = 50.0) -> np.ndarray:
    """March u_xy = rhs(u) from characteristic data.

    x_data has shape (nx, m): u along the first grid line y = y0;
    y_data has shape (ny, m): u along x = x0; the corner values must agree.
    Second order: the cell source is evaluated at the mean of the two known
    off-corner values.  Returns an (nx, ny, m) array.
    """
    x_data = np.atleast_2d(np.asarray(x_data, dtype=float).T).T
    y_data = np.atleast_2d(np.asarray(y_data, dtype=float).T).T
    nx, m = x_data.shape
    ny = y_data.shape[0]
    if y_data.shape[1] != m:
        raise ValueError("x_data and y_data must have the same component count")
    if np.max(np.abs(x_data[0] - y_data[0])) > 1e-12:
        raise ValueError("incompatible corner values in characteristic data")
    u = np.zeros((nx, ny, m))
    u[:, 0, :] = x_data
    u[0, :, :] = y_data
    area = hx * hy
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(nx - 1):
            for j in range(ny - 1):
                mid = 0.5 * (u[i + 1, j, :] + u[i, j + 1, :])
                u[i + 1, j + 1, :] = (
                    u[i + 1, j, :] + u[i, j + 1, :] - u[i, j, :] + area * rhs(mid)
                )
            row_max = np.max(np.abs(u[i + 1, 1:, :]))
            if not row_max <= guard:  # catches NaN as well
                raise BlowupError(f"march exceeded |u| = {guard} at row {i + 1}")
    return u


def tzitzeica_march(
    x_data, y_data, hx, hy, epsilon: int = 1, x0: float = 0.0, y0: float = 0.0,
    guard: float = 50.0,
) -> ScalarGrid:
    """Goursat march of u_xy = e^u - epsilon e^{-2u}."""
    if epsilon not in (-1, 1):
        raise ValueError("epsilon must be +1 or -1")

    def rhs(u):
        return np.exp(u) - epsilon * np.exp(-2 * u)

    u = goursat_march(rhs, x_data, y_data, hx, hy, guard=guard)
    nx, ny, _ = u.shape
    return ScalarGrid(nx, ny, x0, y0, hx, hy, u[:, :, 0], meta={"epsilon": epsilon})


def toda_march(
    x_data, y_data, hx, hy, eps1: int = 1, eps2: int = 1,
    x0: float = 0.0, y0: float = 0.0, guard: float = 50.0,
):
    """Goursat march of the coupled Toda-chain system for (u1, u2)."""
    if eps1 not in (-1, 1) or eps2 not in (-1, 1):
        raise ValueError("eps1, eps2 must be +1 or -1")

    def rhs(u):
        u1, u2 = u[..., 0], u[..., 1]
        g = eps1 * np.exp(u2 - u1)
        return np.stack(
            [g - np.exp(2 * u1 + u2), -g + eps2 * np.exp(-2 * u2 - u1)], axis=-1
        )

    u = goursat_march(rhs, x_data, y_data, hx, hy, guard=guard)
    nx, ny, _ = u.shape
    meta = {"eps1": eps1, "eps2": eps2}
    return (
        ScalarGrid(nx, ny, x0, y0, hx, hy, u[:, :, 0], meta=dict(meta)),
        ScalarGrid(nx, ny, x0, y0, hx, hy, u[:, :, 1], meta=dict(meta)),
    )


# ---------------------------------------------------------------------------
# Travelling waves and the n = 3 radial first integral
# ---------------------------------------------------------------------------

def travelling_wave_potential(f):
    """V(f) = e^f - e^{-2f}/2, the potential of the profile oscillator."""
    return np.exp(f) - 0.5 * np.exp(-2 * np.asarray(f, dtype=float))


@dataclass
class TravellingWaveProfile:
    t: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    energy: float
    t_end: float
    sol: object = None

    def energy_series(self) -> np.ndarray:
        return 0.5 * self.fp ** 2 + travelling_wave_potential(self.f)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.sol.sol(t.ravel())[0].reshape(t.shape)


def travelling_wave_profile(
    E: float, f0: float, t_span, n_samples: int = 512,
    rtol: float = 1e-11, atol: float = 1e-13, fp_sign: int = 1,
    f_guard: float = 25.0,
) -> TravellingWaveProfile:
    """Integrate the reduced profile equation f'' = -(e^f + e^{-2f}).

    The conserved energy is E = f'^2/2 + V(f); the initial slope is
    fp_sign * sqrt(2 (E - V(f0))).  Raises ForbiddenRegionError if V(f0) > E.
    The potential has no well, so every profile escapes to f = -inf in
    finite time (the elliptic-function pole); integration truncates at
    f = -f_guard and t_end records how far it actually got.
    """
    v0 = float(travelling_wave_potential(f0))
    if v0 > E + 1e-14 * max(1.0, abs(E)):
        raise ForbiddenRegionError(f"V(f0) = {v0} exceeds E = {E}")
    fp0 = fp_sign * np.sqrt(max(0.0, 2.0 * (E - v0)))

    def odefun(_, y):
        return [y[1], -(np.exp(y[0]) + np.exp(-2 * y[0]))]

    def pole(_, y):
        return y[0] + f_guard

    pole.terminal = True

    sol = solve_ivp(
        odefun, t_span, [f0, fp0], rtol=rtol, atol=atol, dense_output=True,
        method="RK45", events=[pole],
    )
    if sol.status == -1:
        raise RuntimeError(f"profile integration failed: {sol.message}")
    t_end = float(sol.t[-1])
    t = np.linspace(t_span[0], t_end, n_samples)
    f, fp = sol.sol(t)
    return TravellingWaveProfile(t=t, f=f, fp=fp, energy=E, t_end=t_end, sol=sol)


def radial_n3_rhs(s, psi, psi_s):
    """psi_ss for the n = 3 radial reduction."""
    return -psi_s / s - 4.0 * np.exp(-2 * psi) / s ** 6 - 2.0 * np.exp(psi)


def radial_n3_first_integral(psi, s) -> np.ndarray:
    """First integral c(s) of the n = 3 radial equation, constant on solutions.

    c(s) = -s^2 (psi_s^2/4 + psi_s/s + e^psi - e^{-2 psi}/s^6), with psi_s
    from second-order differences of the supplied samples.
    """
    psi = np.asarray(psi, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be strictly positive")
    psi_s = np.gradient(psi, s, edge_order=2)
    return -(s ** 2) * (
        psi_s ** 2 / 4.0 + psi_s / s + np.exp(psi) - np.exp(-2 * psi) / s ** 6
    )


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def grid_to_csv(grid: ScalarGrid, path):
    """Write one CSV row per grid line, preceded by a '#' metadata comment."""
    is_complex = np.iscomplexobj(grid.values)
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# nx={grid.nx},ny={grid.ny},x0={_fmt(grid.x0)},y0={_fmt(grid.y0)},"
            f"hx={_fmt(grid.hx)},hy={_fmt(grid.hy)},geometry={grid.geometry},"
            f"complex={int(is_complex)}\n"
        )
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"j{j}" for j in range(grid.ny)])
        for i in range(grid.nx):
            row = grid.values[i]
            if is_complex:
                writer.writerow(
                    [f"{_fmt(v.real)}+{_fmt(v.imag)}i" for v in row]
                )
            else:
                writer.writerow([_fmt(float(v)) for v in row])


def grid_from_csv(path) -> ScalarGrid:
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("missing metadata comment line")
        meta = dict(kv.split("=", 1) for kv in header[1:].strip().split(","))
        rows = list(csv.reader(fh))
    nx, ny = int(meta["nx"]), int(meta["ny"])
    is_complex = bool(int(meta.get("complex", "0")))
    data = rows[1:]  # skip column header
    if len(data) != nx:
        raise ValueError(f"expected {nx} data rows, found {len(data)}")

    def parse(tok: str):
        if is_complex:
            re_part, im_part = tok[:-1].split("+")
            return complex(float(re_part), float(im_part))
        return float(tok)

    values = np.array([[parse(tok) for tok in row] for row in data])
    return ScalarGrid(
        nx, ny, float(meta["x0"]), float(meta["y0"]),
        float(meta["hx"]), float(meta["hy"]), values,
        geometry=meta.get("geometry", "cartesian"),
    )


def grid_to_json_dict(grid: ScalarGrid) -> dict:
    vals = grid.values
    if np.iscomplexobj(vals):
        payload = {"re": np.real(vals).tolist(), "im": np.imag(vals).tolist()}
    else:
        payload = np.asarray(vals, dtype=float).tolist()
    return {
        "schema": 1,
        "nx": grid.nx,
        "ny": grid.ny,
        "x0": grid.x0,
        "y0": grid.y0,
        "hx": grid.hx,
        "hy": grid.hy,
        "geometry": grid.geometry,
        "values": payload,
        "meta": {k: (v if isinstance(v, (int, float, str, bool)) else str(v))
                 for k, v in sorted(grid.meta.items())},
    }
