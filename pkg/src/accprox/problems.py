"""Composite problem abstraction and geometric utilities.

A composite problem is min f(z) + h(z) where f is smooth with a known
curvature pair (m, M) and h is closed convex with a computable prox and
bounded domain.  Everything downstream (inner and outer solvers,
refinement, diagnostics) consumes the oracles defined here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EstimationError

Array = np.ndarray


@dataclass(frozen=True)
class SmoothOracle:
    """Value/gradient oracle for a smooth function with curvature bounds.

    ``curvature_lower`` (m) bounds the concavity: f(u) >= f(x) + <grad f(x), u-x>
    - (m/2)||u-x||^2.  ``curvature_upper`` (M) is the Lipschitz constant of the
    gradient.
    """

    eval: Callable[[Array], float]
    grad: Callable[[Array], Array]
    curvature_lower: float
    curvature_upper: float


@dataclass(frozen=True)
class ProxOracle:
    """Oracle for a closed convex function h.

    ``eval`` returns an extended real (np.inf outside dom h).  ``prox(t, p)``
    returns argmin_u { h(u) + (1/2t)||u - p||^2 } for stepsize t > 0.
    """

    eval: Callable[[Array], float]
    prox: Callable[[float, Array], Array]


@dataclass(frozen=True)
class CompositeProblem:
    """Bundle of a smooth oracle, a prox oracle, and domain geometry."""

    smooth: SmoothOracle
    nonsmooth: ProxOracle
    diameter: float
    dimension: int


@dataclass(frozen=True)
class AffineModel:
    """Affine function x -> intercept + <slope, x>."""

    slope: Array
    intercept: float

    def __call__(self, x: Array) -> float:
        return self.intercept + float(self.slope @ x)


def linearize(smooth: SmoothOracle, x: Array) -> AffineModel:
    """First-order model of the smooth part at x."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("linearization point must be finite")
    g = np.asarray(smooth.grad(x), dtype=float)
    val = float(smooth.eval(x))
    return AffineModel(slope=g, intercept=val - float(g @ x))


def project_simplex(p: Array) -> Array:
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold algorithm, O(n log n).
    """
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError("cannot project a nonfinite point")
    s = np.sort(p)[::-1]
    css = np.cumsum(s) - 1.0
    idx = np.arange(1, p.size + 1)
    rho = idx[s * idx > css][-1]
    tau = css[rho - 1] / rho
    return np.maximum(p - tau, 0.0)


def simplex_indicator(n: int, feas_tol: float = 1e-9) -> ProxOracle:
    """Prox oracle for the indicator of the probability simplex in R^n.

    The prox of an indicator is the projection, independent of the stepsize.
    """

    def value(z: Array) -> float:
        z = np.asarray(z, dtype=float)
        if z.size != n:
            raise DomainError(f"expected dimension {n}, got {z.size}")
        if abs(z.sum() - 1.0) <= feas_tol and z.min() >= -feas_tol:
            return 0.0
        return np.inf

    def prox(t: float, p: Array) -> Array:
        return project_simplex(p)

    return ProxOracle(eval=value, prox=prox)


def composite_value(prob: CompositeProblem, z: Array) -> float:
    """f(z) + h(z) as an extended real; +inf outside dom h."""
    hz = prob.nonsmooth.eval(z)
    if not np.isfinite(hz):
        return np.inf
    return float(prob.smooth.eval(z)) + float(hz)


def _power_iteration(apply_op, n, tol, max_iters, rng):
    """Dominant eigenvalue (by magnitude, signed) of a symmetric operator."""
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_prev = np.inf
    for _ in range(max_iters):
        w = apply_op(v)
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return lam
        lam_prev = lam
    raise EstimationError("power iteration did not converge")


def estimate_curvature(
    hessian_apply: Callable[[Array], Array],
    n: int,
    tol: float = 1e-8,
    max_iters: int = 20000,
    seed: int = 0,
) -> tuple[float, float]:
    """Curvature pair (m, M) of a symmetric linear operator.

    Returns M ~ largest eigenvalue and m ~ minus the smallest.  Dense
    eigendecomposition for n <= 512; shifted power iterations otherwise.
    Note m <= 0 is possible (the operator is PSD); callers needing m > 0
    must reject such outputs themselves.
    """
    if n <= 512:
        eye = np.eye(n)
        H = np.column_stack([hessian_apply(eye[:, i]) for i in range(n)])
        H = 0.5 * (H + H.T)
        w = np.linalg.eigvalsh(H)
        return float(-w[0]), float(w[-1])

    rng = np.random.default_rng(seed)
    dom = _power_iteration(hessian_apply, n, tol, max_iters, rng)
    sigma = abs(dom) + 1.0
    lam_max = _power_iteration(
        lambda v: hessian_apply(v) + sigma * v, n, tol, max_iters, rng
    ) - sigma
    lam_min = sigma - _power_iteration(
        lambda v: sigma * v - hessian_apply(v), n, tol, max_iters, rng
    )
    return float(-lam_min), float(lam_max)
