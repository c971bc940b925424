"""Graph metrics on the r = 1 cone section, the Tzitzeica condition, and the
Legendre transform to the dual Monge-Ampere equation.

A GraphFunction bundles value/gradient/Hessian callables for the height
function v (analytic derivatives or centered differences), and every
operation is evaluated pointwise on arrays of sample points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "GraphFunction",
    "LegendreDual",
    "VanishingSupportError",
    "NonInvertibleGradientError",
    "VanishingWError",
    "sphere_graph",
    "sphere_dual_graph",
    "graph_metric",
    "tzitzeica_residual",
    "legendre",
    "legendre_dual_function",
    "dual_ma_residual",
]


class VanishingSupportError(ValueError):
    """The support term x . grad(v) - v vanishes at a sample point."""


class NonInvertibleGradientError(RuntimeError):
    """Gradient inversion failed (degenerate Hessian or target out of range)."""


class VanishingWError(ValueError):
    """The dual potential w vanishes at a sample point."""


@dataclass(frozen=True)
class GraphFunction:
    """Height function of a graph hypersurface with derivative callables."""

    value: Callable
    grad: Callable
    hess: Callable
    n: int = 2

    @staticmethod
    def from_value_only(f: Callable, n: int = 2, h: float = 1e-5) -> "GraphFunction":
        """Wrap a plain callable with O(h^2) finite-difference derivatives."""

        def grad(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros(n)
            for a in range(n):
                e = np.zeros(n)
                e[a] = h
                out[a] = (f(x + e) - f(x - e)) / (2 * h)
            return out

        def hess(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros((n, n))
            f0 = f(x)
            for a in range(n):
                ea = np.zeros(n)
                ea[a] = h
                out[a, a] = (f(x + ea) - 2 * f0 + f(x - ea)) / h ** 2
                for b in range(a + 1, n):
                    eb = np.zeros(n)
                    eb[b] = h
                    out[a, b] = out[b, a] = (
                        f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)
                    ) / (4 * h ** 2)
            return out

        return GraphFunction(value=f, grad=grad, hess=hess, n=n)

    def support(self, x) -> float:
        """x . grad(v) - v, the (signed) support term of the graph."""
        x = np.asarray(x, dtype=float)
        return float(x @ self.grad(x) - self.value(x))


def sphere_graph(n: int = 2) -> GraphFunction:
    """Upper unit hemisphere v = sqrt(1 - |x|^2) with analytic derivatives."""

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(1.0 - x @ x))

    def grad(x):
        x = np.asarray(x, dtype=float)
        return -x / np.sqrt(1.0 - x @ x)

    def hess(x):
        x = np.asarray(x, dtype=float)
        v = np.sqrt(1.0 - x @ x)
        return -np.eye(n) / v - np.outer(x, x) / v ** 3

    return GraphFunction(value=value, grad=grad, hess=hess, n=n)


def sphere_dual_graph(n: int = 2) -> GraphFunction:
    """Legendre dual of the hemisphere: w(p) = -sqrt(1 + |p|^2)."""

    def value(p):
        p = np.asarray(p, dtype=float)
        return -float(np.sqrt(1.0 + p @ p))

    def grad(p):
        p = np.asarray(p, dtype=float)
        return p / value(p)

    def hess(p):
        p = np.asarray(p, dtype=float)
        w = value(p)
        return np.eye(n) / w - np.outer(p, p) / w ** 3

    return GraphFunction(value=value, grad=grad, hess=hess, n=n)


def _as_points(points, n: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] != n:
        raise ValueError(f"points must have {n} columns")
    return pts


def graph_metric(v: GraphFunction, points, tol: float = 1e-12) -> np.ndarray:
    """Induced cone-section metric h = hess(v) / (x . grad v - v) per point."""
    pts = _as_points(points, v.n)
    out = np.zeros((len(pts), v.n, v.n))
    for k, x in enumerate(pts):
        denom = v.support(x)
        hess = v.hess(x)
        if abs(denom) <= tol * max(1.0, float(np.max(np.abs(hess)))):
            raise VanishingSupportError(f"support term vanishes at {x}")
        out[k] = hess / denom
    return out


def tzitzeica_residual(v: GraphFunction, points, sign: int = 1) -> np.ndarray:
    """det(hess v) - sign * (v - x . grad v)^{n+2} pointwise.

    sign = +1 is the det(phi) = 1 cone normalisation; -1 its indefinite
    variant.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    pts = _as_points(points, v.n)
    out = np.zeros(len(pts))
    for k, x in enumerate(pts):
        det = float(np.linalg.det(v.hess(x)))
        supp = -v.support(x)  # v - x . grad v
        out[k] = det - sign * supp ** (v.n + 2)
    return out


@dataclass
class LegendreDual:
    """Sampled Legendre transform: w(p) = x . grad v - v at the preimage x(p)."""

    p: np.ndarray
    w: np.ndarray
    x: np.ndarray
    n: int

    def __post_init__(self):
        if np.any(np.abs(self.w) < 1e-300):
            raise VanishingWError("w vanishes on the sample set")


def _invert_gradient(
    v: GraphFunction, p, seed, tol: float = 1e-12, max_iter: int = 60
) -> np.ndarray:
    x = np.asarray(seed, dtype=float).copy()
    p = np.asarray(p, dtype=float)
    for _ in range(max_iter):
        r = v.grad(x) - p
        if np.max(np.abs(r)) <= tol:
            return x
        H = v.hess(x)
        try:
            step = np.linalg.solve(H, r)
        except np.linalg.LinAlgError as exc:
            raise NonInvertibleGradientError(f"Hessian singular near {x}") from exc
        x = x - step
        if not np.all(np.isfinite(x)):
            raise NonInvertibleGradientError(f"iteration diverged for p = {p}")
    raise NonInvertibleGradientError(f"no convergence inverting grad v at p = {p}")


def legendre(
    v: GraphFunction, p_points, x0_seed=None, tol: float = 1e-12
) -> LegendreDual:
    """Legendre transform of a definite-Hessian v on a set of slope targets.

    Each Newton solve of grad v(x) = p is seeded from the nearest
    previously solved node, which keeps the inversion on one sheet.
    """
    pts = _as_points(p_points, v.n)
    xs = np.zeros_like(pts)
    ws = np.zeros(len(pts))
    solved: list[int] = []
    seed0 = np.zeros(v.n) if x0_seed is None else np.asarray(x0_seed, dtype=float)
    for k, p in enumerate(pts):
        if solved:
            d = np.sum((pts[solved] - p) ** 2, axis=1)
            seed = xs[solved[int(np.argmin(d))]]
        else:
            seed = seed0
        x = _invert_gradient(v, p, seed, tol=tol)
        xs[k] = x
        ws[k] = float(x @ p - v.value(x))
        solved.append(k)
    return LegendreDual(p=pts, w=ws, x=xs, n=v.n)


def legendre_dual_function(v: GraphFunction, x0_seed=None, tol: float = 1e-12) -> GraphFunction:
    """The dual potential as a GraphFunction (Newton inversion on demand):
    w(p) = x.p - v(x), grad w = x, hess w = inv(hess v) at x = x(p)."""
    seed_box = {"x": np.zeros(v.n) if x0_seed is None else np.asarray(x0_seed, float)}

    def preimage(p):
        x = _invert_gradient(v, p, seed_box["x"], tol=tol)
        seed_box["x"] = x
        return x

    def value(p):
        p = np.asarray(p, dtype=float)
        x = preimage(p)
        return float(x @ p - v.value(x))

    def grad(p):
        return preimage(np.asarray(p, dtype=float))

    def hess(p):
        x = preimage(np.asarray(p, dtype=float))
        return np.linalg.inv(v.hess(x))

    return GraphFunction(value=value, grad=grad, hess=hess, n=v.n)


def dual_ma_residual(w: GraphFunction, points, tol: float = 1e-12) -> np.ndarray:
    """det(hess w) - 1/w^{n+2} pointwise; w must not vanish."""
    pts = _as_points(points, w.n)
    out = np.zeros(len(pts))
    for k, p in enumerate(pts):
        wv = float(w.value(p))
        if abs(wv) <= tol:
            raise VanishingWError(f"w vanishes at {p}")
        out[k] = float(np.linalg.det(w.hess(p))) - 1.0 / wv ** (w.n + 2)
    return out
