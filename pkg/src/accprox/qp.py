"""Benchmark problem family: indefinite quadratics over the simplex.

Instances minimize f(z) = -(a1/2)||D B z||^2 + (a2/2)||A z - b||^2 over the
probability simplex, with the scalars (a1, a2) calibrated so the Hessian's
extreme eigenvalues hit a requested curvature pair (m, M) exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import solver
from .errors import EstimationError, NonconvergenceError
from .problems import (Array, CompositeProblem, SmoothOracle, composite_value,
                       simplex_indicator)
from .refinement import refine, stationarity_residual

SIMPLEX_DIAMETER = math.sqrt(2.0)


@dataclass(frozen=True)
class QpInstance:
    A: Array
    B: Array
    D_diag: Array
    b: Array
    alpha1: float
    alpha2: float
    m: float
    M: float
    seed: int

    def hessian(self) -> Array:
        DB = self.D_diag[:, None] * self.B
        return -self.alpha1 * (DB.T @ DB) + self.alpha2 * (self.A.T @ self.A)


def _extreme_eigs(H: Array) -> tuple[float, float]:
    w = np.linalg.eigvalsh(H)
    return float(w[0]), float(w[-1])


def generate_qp(l: int, n: int, target_M: float, target_m: float,
                seed: int) -> QpInstance:
    """Draw a random instance and calibrate (alpha1, alpha2) to hit (m, M).

    The eigenvalue ratio -lambda_min/lambda_max of -K1 + r*K2 is strictly
    decreasing in r = alpha2/alpha1 wherever lambda_max > 0, so bisection on
    r matches the ratio m/M; a common scale then pins M.  Degenerate draws
    are retried with the next seed, up to 10 attempts.
    """
    if l < 1 or n < 1 or not (target_M >= target_m > 0):
        raise ValueError("need l, n >= 1 and target_M >= target_m > 0")
    for attempt in range(10):
        s = seed + attempt
        rng = np.random.default_rng(s)
        A = rng.uniform(0.0, 1.0, size=(l, n))
        B = rng.uniform(0.0, 1.0, size=(n, n))
        b = rng.uniform(0.0, 1.0, size=l)
        D_diag = rng.integers(1, 1001, size=n).astype(float)

        DB = D_diag[:, None] * B
        K1 = DB.T @ DB
        K2 = A.T @ A

        target_ratio = target_m / target_M

        def ratio(r: float) -> float:
            lo, hi = _extreme_eigs(-K1 + r * K2)
            if hi <= 0.0:
                return np.inf
            return -lo / hi

        r_lo, r_hi = 0.0, 1.0
        while not ratio(r_hi) < target_ratio:
            r_hi *= 2.0
            if r_hi > 1e30:
                break
        if r_hi > 1e30:
            continue
        for _ in range(200):
            r_mid = 0.5 * (r_lo + r_hi)
            if ratio(r_mid) > target_ratio:
                r_lo = r_mid
            else:
                r_hi = r_mid
        r = 0.5 * (r_lo + r_hi)
        lo, hi = _extreme_eigs(-K1 + r * K2)
        if hi <= 0.0 or lo >= 0.0:
            continue
        c = target_M / hi
        m_real, M_real = -c * lo, c * hi
        if (abs(M_real - target_M) > 1e-4 * target_M
                or abs(m_real - target_m) > 1e-4 * target_m):
            continue
        return QpInstance(A=A, B=B, D_diag=D_diag, b=b, alpha1=c, alpha2=c * r,
                          m=m_real, M=M_real, seed=s)
    raise EstimationError("could not calibrate an instance in 10 attempts")


def make_problem(inst: QpInstance) -> CompositeProblem:
    """Composite problem with the simplex indicator as the nonsmooth part."""
    DB = inst.D_diag[:, None] * inst.B
    K1 = DB.T @ DB
    A, b = inst.A, inst.b
    a1, a2 = inst.alpha1, inst.alpha2
    n = inst.B.shape[0]

    def f_eval(z):
        r = A @ z - b
        return -0.5 * a1 * float(z @ (K1 @ z)) + 0.5 * a2 * float(r @ r)

    def f_grad(z):
        return -a1 * (K1 @ z) + a2 * (A.T @ (A @ z - b))

    smooth = SmoothOracle(eval=f_eval, grad=f_grad,
                          curvature_lower=inst.m, curvature_upper=inst.M)
    return CompositeProblem(smooth=smooth, nonsmooth=simplex_indicator(n),
                            diameter=SIMPLEX_DIAMETER, dimension=n)


@dataclass(frozen=True)
class RunConfig:
    method: str = "daipp"
    l: int = 20
    n: int = 300
    M: float = 16777216.0
    m: float = 1048576.0
    rho_bar: float = 1e-7
    lam: Optional[float] = None
    theta: Optional[float] = None
    delta: Optional[float] = None
    seed: int = 1
    max_outer: int = 10000
    max_inner: int = 1000000


@dataclass
class RunReport:
    seed: int
    l: int
    n: int
    M: float
    m: float
    method: str
    f_bar: float
    outer_iters: int
    inner_iters: int
    residual: float
    wall_ms: float
    converged: bool = True
    solve_report: object = field(default=None, repr=False, compare=False)
    solution: object = field(default=None, repr=False, compare=False)
    pair: object = field(default=None, repr=False, compare=False)

    def csv_row(self) -> str:
        return ",".join([
            str(self.seed), str(self.l), str(self.n), repr(self.M), repr(self.m),
            self.method, repr(self.f_bar), str(self.outer_iters),
            str(self.inner_iters), repr(self.residual), f"{self.wall_ms:.3f}",
        ])


CSV_HEADER = "seed,l,n,M,m,method,f_bar,outer_iters,inner_iters,residual,wall_ms"


def prox_grad_baseline(prob: CompositeProblem, x0: Array, rho_bar: float,
                       max_iters: int) -> tuple[Array, int, float]:
    """Composite gradient descent with stepsize 1/M.

    Runs until the normalized refined residual passes; returns the final
    point, iteration count and final residual.
    """
    M = prob.smooth.curvature_upper
    z = np.asarray(x0, dtype=float)
    g0 = float(np.linalg.norm(prob.smooth.grad(x0))) + 1.0
    for it in range(max_iters + 1):
        g = np.asarray(prob.smooth.grad(z), dtype=float)
        z_next = prob.nonsmooth.prox(1.0 / M, z - g / M)
        v = M * (z - z_next) + np.asarray(prob.smooth.grad(z_next)) - g
        res = float(np.linalg.norm(v)) / g0
        if res <= rho_bar:
            return z_next, it, res
        z = z_next
    raise NonconvergenceError("baseline exhausted its iteration cap",
                              partial=(z, max_iters, res))


def run_experiment(config: RunConfig) -> RunReport:
    """Generate the instance, run the requested method, refine, and report.

    Termination follows the benchmark protocol: the normalized residual of
    the refined pair must drop below rho_bar.
    """
    inst = generate_qp(config.l, config.n, config.M, config.m, config.seed)
    prob = make_problem(inst)
    n = config.n
    x0 = np.full(n, 1.0 / n)
    t0 = time.perf_counter()

    if config.method == "prox_grad":
        z, iters, res = prox_grad_baseline(prob, x0, config.rho_bar,
                                           config.max_inner)
        wall = (time.perf_counter() - t0) * 1000.0
        return RunReport(seed=inst.seed, l=config.l, n=config.n, M=inst.M,
                         m=inst.m, method="prox_grad",
                         f_bar=composite_value(prob, z), outer_iters=iters,
                         inner_iters=iters, residual=res, wall_ms=wall)

    if config.method != "daipp":
        raise ValueError(f"unknown method {config.method!r}")

    params = solver.default_params(
        inst.m, inst.M, config.rho_bar, lam=config.lam, theta=config.theta,
        delta=config.delta, max_outer=config.max_outer,
        max_inner=config.max_inner,
    )
    g0 = float(np.linalg.norm(prob.smooth.grad(x0))) + 1.0

    def normalized_stop(k, z, u, eta, x_tilde):
        cand = solver.ProxApproxSolution(lam=params.lam, z_minus=x_tilde, z=z,
                                         w=u / params.lam, eps=eta / params.lam)
        return refine(prob, cand).residual / g0 <= config.rho_bar

    sol, srep = solver.daipp_run(prob, params, x0, stop_rule=normalized_stop)
    pair = refine(prob, sol)
    wall = (time.perf_counter() - t0) * 1000.0
    return RunReport(seed=inst.seed, l=config.l, n=config.n, M=inst.M,
                     m=inst.m, method="daipp",
                     f_bar=composite_value(prob, pair.z_hat),
                     outer_iters=srep.outer_iters,
                     inner_iters=srep.total_inner,
                     residual=stationarity_residual(prob, pair, x0),
                     wall_ms=wall, solve_report=srep, solution=sol, pair=pair)


def emit_csv(reports: list[RunReport]) -> str:
    if not reports:
        raise ValueError("need at least one report")
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in reports])


def emit_table(reports: list[RunReport]) -> str:
    """Aligned-text rendering with per-method iteration counts."""
    if not reports:
        raise ValueError("need at least one report")
    cols = ["M", "m", "f_bar", "method", "outer", "inner", "residual"]
    rows = [[f"{r.M:.6g}", f"{r.m:.6g}", f"{r.f_bar:.4e}", r.method,
             str(r.outer_iters), str(r.inner_iters), f"{r.residual:.3e}"]
            for r in reports]
    widths = [max(len(c), *(len(row[i]) for row in rows))
              for i, c in enumerate(cols)]
    def fmt(row):
        return "  ".join(cell.rjust(w) for cell, w in zip(row, widths))
    return "\n".join([fmt(cols)] + [fmt(row) for row in rows])


def parse_csv(text: str) -> list[RunReport]:
    """Inverse of emit_csv (solver-side payloads are not round-tripped)."""
    lines = text.strip().splitlines()
    if lines[0] != CSV_HEADER:
        raise ValueError("unrecognized CSV header")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        out.append(RunReport(
            seed=int(parts[0]), l=int(parts[1]), n=int(parts[2]),
            M=float(parts[3]), m=float(parts[4]), method=parts[5],
            f_bar=float(parts[6]), outer_iters=int(parts[7]),
            inner_iters=int(parts[8]), residual=float(parts[9]),
            wall_ms=float(parts[10]),
        ))
    return out
