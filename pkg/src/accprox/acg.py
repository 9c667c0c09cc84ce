"""Accelerated composite gradient method with inexactness certificates.

Solves min psi_s(z) + psi_n(z) where psi_s is smooth with L-Lipschitz
gradient and psi_n is mu-strongly convex with a weighted prox.  Besides the
usual momentum iterates, every step maintains a certificate pair (u, eta)
with u an eta-subgradient of psi_s + psi_n at the current iterate, which is
what the outer proximal-point loop uses as its acceptance test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonconvergenceError
from .problems import AffineModel, Array, SmoothOracle, linearize


@dataclass(frozen=True)
class AcgProblem:
    """Composite objective handed to the inner solver.

    ``smooth`` carries L in its ``curvature_upper`` field.  ``prox(a, p)``
    solves min_u { psi_n(u) + (a/2)||u - p||^2 } for an arbitrary positive
    quadratic weight a; ``nonsmooth_eval`` is psi_n as an extended real.
    """

    smooth: SmoothOracle
    prox: Callable[[float, Array], Array]
    nonsmooth_eval: Callable[[Array], float]
    mu: float

    @property
    def lipschitz(self) -> float:
        return self.smooth.curvature_upper


@dataclass(frozen=True)
class AcgState:
    j: int
    B: float
    Gamma: AffineModel
    z: Array
    y: Array
    y0: Array
    u: Array
    eta: float


@dataclass(frozen=True)
class AcgCertificate:
    """Final iterate with its eta-subgradient certificate."""

    z: Array
    u: Array
    eta: float
    B: float
    iterations: int


# Quadratic weight used to emulate a projection through the prox oracle.
_PROJECTION_WEIGHT = 1e12


def acg_init(prob: AcgProblem, z0: Array) -> AcgState:
    """Initial state: B=0, zero affine model, anchor at (the projection of) z0."""
    z0 = np.asarray(z0, dtype=float)
    if np.isfinite(prob.nonsmooth_eval(z0)):
        y0 = z0.copy()
    else:
        # Infeasible start: push onto dom psi_n with an overwhelming quadratic.
        y0 = prob.prox(_PROJECTION_WEIGHT, z0)
    zero = AffineModel(slope=np.zeros_like(y0), intercept=0.0)
    return AcgState(j=0, B=0.0, Gamma=zero, z=y0, y=y0.copy(), y0=y0,
                    u=np.zeros_like(y0), eta=0.0)


def acg_step(prob: AcgProblem, s: AcgState) -> AcgState:
    """One accelerated step, advancing the certificate pair along with it."""
    L, mu = prob.lipschitz, prob.mu
    b = mu * s.B + 1.0
    B_next = s.B + (b + math.sqrt(b * b + 4.0 * L * b * s.B)) / (2.0 * L)
    tau = (B_next - s.B) / B_next

    z_mid = (1.0 - tau) * s.z + tau * s.y
    model = linearize(prob.smooth, z_mid)
    Gamma = AffineModel(
        slope=(1.0 - tau) * s.Gamma.slope + tau * model.slope,
        intercept=(1.0 - tau) * s.Gamma.intercept + tau * model.intercept,
    )

    # argmin Gamma(y) + psi_n(y) + ||y - y0||^2 / (2 B_next): fold the affine
    # slope into the quadratic's center and delegate to the weighted prox.
    y = prob.prox(1.0 / B_next, s.y0 - B_next * Gamma.slope)
    z = (1.0 - tau) * s.z + tau * y

    u = (s.y0 - y) / B_next
    psi_z = float(prob.smooth.eval(z)) + float(prob.nonsmooth_eval(z))
    eta = psi_z - Gamma(y) - float(prob.nonsmooth_eval(y)) - float(u @ (z - y))
    # Nonnegative in exact arithmetic; roundoff can dip slightly below.
    eta = max(eta, 0.0)

    return AcgState(j=s.j + 1, B=B_next, Gamma=Gamma, z=z, y=y, y0=s.y0,
                    u=u, eta=eta)


def acg_run(
    prob: AcgProblem,
    z0: Array,
    stop: Callable[[AcgState], bool],
    min_iters: int,
    max_iters: int,
) -> AcgCertificate:
    """Iterate until ``stop`` holds and at least ``min_iters`` steps were taken."""
    if not 1 <= min_iters <= max_iters:
        raise ValueError("need max_iters >= min_iters >= 1")
    s = acg_init(prob, z0)
    while True:
        s = acg_step(prob, s)
        if s.j >= min_iters and stop(s):
            return AcgCertificate(z=s.z, u=s.u, eta=s.eta, B=s.B, iterations=s.j)
        if s.j >= max_iters:
            raise NonconvergenceError(
                f"inner solver exhausted {max_iters} iterations", partial=s
            )


def hpe_check(s: AcgState, z0: Array, slack: float = 1e-9) -> bool:
    """Relative-error certificate ||B u + z - z0||^2 + 2 B eta <= ||z - z0||^2."""
    lhs = float(np.linalg.norm(s.B * s.u + s.z - z0) ** 2) + 2.0 * s.B * s.eta
    rhs = float(np.linalg.norm(s.z - z0) ** 2)
    return lhs <= rhs + slack * (1.0 + rhs)


def b_lower_bound(j: int, mu: float, L: float) -> float:
    """Provable growth floor for the accumulated weight B_j."""
    if j < 1:
        raise ValueError("j must be >= 1")
    return max(j * j / 4.0, (1.0 + math.sqrt(mu / (4.0 * L))) ** (2 * (j - 1))) / L


def min_inner_iterations(L: float, kappa: float, alpha: float, delta: float) -> int:
    """Smallest j guaranteeing the relative-error acceptance inequality."""
    bound = 2.0 * math.sqrt(L * (kappa + 1.0) / (kappa * alpha + (kappa + 1.0) * delta))
    return int(math.ceil(bound))
