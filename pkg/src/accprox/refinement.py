"""Composite-gradient refinement of a prox-approximate solution.

One prox call turns the quintuple produced by the outer solver into a pair
(z_hat, v_hat) with v_hat in grad f(z_hat) + subdiff h(z_hat) and a
verifiable residual bound ||v_hat|| <= 2 ||q|| .
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import Array, CompositeProblem
from .solver import ProxApproxSolution


@dataclass(frozen=True)
class StationaryPair:
    z_hat: Array
    v_hat: Array
    q_norm: float
    residual: float


def refine(prob: CompositeProblem, sol: ProxApproxSolution) -> StationaryPair:
    """Single composite gradient step on the quintuple's base point.

    The subproblem min_u l_f(u; z) + h(u) + (w/2)||u - z||^2 with
    w = M + 1/lam is exactly a prox evaluation of h after completing the
    square, so no inner iteration is needed.
    """
    z = sol.z
    M = prob.smooth.curvature_upper
    w = M + 1.0 / sol.lam
    g = np.asarray(prob.smooth.grad(z), dtype=float)
    z_hat = prob.nonsmooth.prox(1.0 / w, z - g / w)
    q = w * (z - z_hat)
    v_hat = q + np.asarray(prob.smooth.grad(z_hat), dtype=float) - g
    return StationaryPair(
        z_hat=z_hat,
        v_hat=v_hat,
        q_norm=float(np.linalg.norm(q)),
        residual=float(np.linalg.norm(v_hat)),
    )


def stationarity_residual(prob: CompositeProblem, pair: StationaryPair, z0: Array) -> float:
    """Residual normalized by the gradient magnitude at the starting point."""
    g0 = np.linalg.norm(np.asarray(prob.smooth.grad(z0), dtype=float))
    return pair.residual / (float(g0) + 1.0)
