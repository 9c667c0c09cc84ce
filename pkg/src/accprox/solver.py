"""Doubly accelerated inexact proximal point solver.

The outer loop is an accelerated proximal-point scheme: it forms a strongly
convex proximal subproblem around an extrapolated center x_tilde, solves it
inexactly with the accelerated inner solver of :mod:`accprox.acg`, and
combines the certified inexact solution into the next extrapolation.  On
termination a final polishing loop drives the certificate error eta below
lam * eps_bar and the output is a prox-approximate quintuple
(lam, z_minus, z, w, eps) certifying near-stationarity of the proximal map.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import acg
from .errors import NonconvergenceError, ParameterError
from .problems import Array, CompositeProblem, SmoothOracle, composite_value


@dataclass(frozen=True)
class DaippParams:
    """Outer-loop parameters.

    ``strict`` enforces lam <= 1/(2m) (the range the convergence theory
    assumes); the loose mode allows lam < 1/m, which keeps the proximal
    subproblems strongly convex and matches the parameter choice that
    performs best in practice.
    """

    lam: float
    theta: float
    delta: float
    rho_bar: float
    eps_bar: float
    xi: float
    max_outer: int = 10000
    max_inner: int = 1000000
    strict: bool = False

    def validate(self, m: float) -> None:
        if self.lam <= 0:
            raise ParameterError("stepsize lam must be positive")
        if self.strict and self.lam > 1.0 / (2.0 * m) * (1 + 1e-12):
            raise ParameterError("strict mode requires lam <= 1/(2m)")
        if self.lam * m >= 1.0:
            raise ParameterError("need lam < 1/m so the subproblems are strongly convex")
        if abs(self.xi - (1.0 - self.lam * m)) > 1e-12 * (1.0 + self.xi):
            raise ParameterError("xi must equal 1 - lam*m")
        if not 0.0 < self.theta < self.xi / 2.0:
            raise ParameterError("need 0 < theta < (1 - lam*m)/2")
        if self.delta < 0:
            raise ParameterError("delta must be nonnegative")
        if self.rho_bar <= 0 or self.eps_bar <= 0:
            raise ParameterError("tolerances must be positive")


def default_params(
    m: float,
    M: float,
    rho_bar: float,
    eps_bar: Optional[float] = None,
    lam: Optional[float] = None,
    theta: Optional[float] = None,
    delta: Optional[float] = None,
    max_outer: int = 10000,
    max_inner: int = 1000000,
    strict: bool = False,
) -> DaippParams:
    """Benchmark defaults: lam = 0.9/m, theta = 0.49*xi, theta + delta = 0.9 (M/m)^{1/7}.

    In strict mode the default stepsize is 1/(2m) instead.  The default
    eps_bar = lam * rho_bar^2 / 2 matches the natural scale of the
    certificate error at termination.
    """
    if lam is None:
        lam = 1.0 / (2.0 * m) if strict else 0.9 / m
    xi = 1.0 - lam * m
    if theta is None:
        theta = 0.49 * xi
    if delta is None:
        delta = max(0.0, 0.9 * (M / m) ** (1.0 / 7.0) - theta)
    if eps_bar is None:
        eps_bar = lam * rho_bar ** 2 / 2.0
    params = DaippParams(lam=lam, theta=theta, delta=delta, rho_bar=rho_bar,
                         eps_bar=eps_bar, xi=xi, max_outer=max_outer,
                         max_inner=max_inner, strict=strict)
    params.validate(m)
    return params


@dataclass(frozen=True)
class ProxApproxSolution:
    """Quintuple certifying w is an eps-subgradient of phi + ||. - z_minus||^2/(2 lam) at z."""

    lam: float
    z_minus: Array
    z: Array
    w: Array
    eps: float

    @property
    def residual(self) -> float:
        return float(np.linalg.norm(self.z_minus - self.z)) / self.lam


@dataclass
class OuterRecord:
    """Trajectory entry for one outer iteration."""

    k: int
    a: float
    A_next: float
    x_tilde: Array
    z: Array
    u: Array
    eta: float
    inner_iters: int


@dataclass
class SolveReport:
    """Full run record consumed by the diagnostics module."""

    lam: float
    xi: float
    theta: float
    delta: float
    records: list = field(default_factory=list)
    xs: list = field(default_factory=list)      # x_0 .. x_K
    ys: list = field(default_factory=list)      # y_0 .. y_{K+1}
    phis: list = field(default_factory=list)    # phi(y_{k+1}) per outer iter
    extra_inner: int = 0
    step2_triple: Optional[tuple] = None        # pre-polish (z, u, eta) of last iter
    converged: bool = False

    @property
    def outer_iters(self) -> int:
        return len(self.records)

    @property
    def total_inner(self) -> int:
        return sum(r.inner_iters for r in self.records) + self.extra_inner

    @property
    def residuals(self) -> list:
        return [float(np.linalg.norm(r.z - r.x_tilde)) / self.lam for r in self.records]


def outer_coefficients(A: float) -> tuple[float, float]:
    """Next extrapolation weight a and accumulated A; A_next = a^2 holds."""
    if A < 0:
        raise ParameterError("A must be nonnegative")
    a = (1.0 + math.sqrt(1.0 + 4.0 * A)) / 2.0
    return a, A + a


def compute_x_tilde(A: float, a: float, y: Array, x: Array) -> Array:
    """Extrapolated prox-center: convex combination of y and x."""
    A_next = A + a
    return (A / A_next) * y + (a / A_next) * x


def build_inner_problem(
    prob: CompositeProblem, params: DaippParams, x_tilde: Array
) -> acg.AcgProblem:
    """Proximal subproblem around x_tilde, split for the inner solver.

    Smooth part lam*f + ||. - x_tilde||^2/4 (Lipschitz lam*M + 1/2);
    nonsmooth part lam*h + ||. - x_tilde||^2/4 (1/2-strongly convex), whose
    weighted prox folds its quadratic into the incoming one before a single
    prox call on h.
    """
    lam = params.lam
    f, h = prob.smooth, prob.nonsmooth
    M = f.curvature_upper
    m = f.curvature_lower

    def s_eval(z):
        return lam * float(f.eval(z)) + 0.25 * float(np.linalg.norm(z - x_tilde) ** 2)

    def s_grad(z):
        return lam * np.asarray(f.grad(z)) + 0.5 * (z - x_tilde)

    smooth = SmoothOracle(eval=s_eval, grad=s_grad,
                          curvature_lower=max(0.0, lam * m - 0.5),
                          curvature_upper=lam * M + 0.5)

    def n_eval(z):
        hz = h.eval(z)
        if not np.isfinite(hz):
            return np.inf
        return lam * float(hz) + 0.25 * float(np.linalg.norm(z - x_tilde) ** 2)

    def n_prox(a, p):
        w = 0.5 + a
        center = (0.5 * x_tilde + a * p) / w
        return h.prox(lam / w, center)

    return acg.AcgProblem(smooth=smooth, prox=n_prox, nonsmooth_eval=n_eval, mu=0.5)


def stop_inner_test(
    xi: float, delta: float, z: Array, u: Array, eta: float, x_tilde: Array
) -> bool:
    """Relative-error acceptance test for an inner certificate."""
    d = z - x_tilde
    lhs = float(np.linalg.norm(u + delta * d) ** 2) / (xi / 2.0 + delta) + 2.0 * eta
    rhs = (xi / 4.0 + delta) * float(np.linalg.norm(d) ** 2)
    return lhs <= rhs


def stop_outer_test(lam: float, rho_bar: float, z: Array, x_tilde: Array) -> bool:
    """Outer termination: displacement within lam * rho_bar / 2 (inclusive)."""
    return float(np.linalg.norm(z - x_tilde)) <= lam * rho_bar / 2.0


def outer_x_update(
    params: DaippParams, a: float, v_tilde: Array, y_next: Array, x: Array, y: Array
) -> Array:
    """Momentum update of the control sequence x."""
    xi, theta, delta = params.xi, params.theta, params.delta
    denom = xi / 2.0 - theta + (theta + delta) / a
    if denom <= 0:
        raise ParameterError("x-update denominator must be positive")
    numer = -v_tilde + (xi / 2.0) * y_next + (delta / a) * x - (1.0 - 1.0 / a) * theta * y
    return numer / denom


def map_tolerances(rho_hat: float, m: float, M: float) -> tuple[float, float, float]:
    """Stationarity tolerance -> (lam, rho_bar, eps_bar) for the strict regime."""
    if rho_hat <= 0 or m <= 0 or M <= 0:
        raise ParameterError("rho_hat, m, M must be positive")
    return 1.0 / (2.0 * m), rho_hat / 4.0, rho_hat ** 2 / (32.0 * (M + 2.0 * m))


def inner_iteration_floor(lam: float, M: float) -> int:
    """Mandatory minimum of inner iterations per subproblem."""
    return int(math.ceil(6.0 * math.sqrt(2.0 * lam * M + 1.0)))


def _check_delta_window(params: DaippParams, D: float) -> None:
    scale = math.sqrt(params.lam * params.rho_bar / D) + math.sqrt(
        D / (params.lam * params.rho_bar)
    )
    if params.delta > 10.0 * scale:
        warnings.warn(
            "delta is outside the window that preserves the outer complexity "
            f"bound (delta={params.delta:.3g}, window ~ {10.0 * scale:.3g})",
            stacklevel=3,
        )


def final_refine(
    inner_prob: acg.AcgProblem,
    params: DaippParams,
    x_tilde: Array,
    state: acg.AcgState,
    budget: int,
) -> tuple[acg.AcgState, int]:
    """Polishing loop: continue the same inner trajectory until the
    acceptance test holds together with eta <= lam * eps_bar."""
    extra = 0
    while not (
        stop_inner_test(params.xi, params.delta, state.z, state.u, state.eta, x_tilde)
        and state.eta <= params.lam * params.eps_bar
    ):
        if extra >= budget:
            raise NonconvergenceError(
                "polishing loop exhausted its inner budget", partial=state
            )
        state = acg.acg_step(inner_prob, state)
        extra += 1
    return state, extra


def daipp_run(
    prob: CompositeProblem,
    params: DaippParams,
    x0: Array,
    stop_rule: Optional[Callable[[int, Array, Array, float, Array], bool]] = None,
) -> tuple[ProxApproxSolution, SolveReport]:
    """Run the outer loop from x0 until the termination rule fires.

    ``stop_rule(k, z, u, eta, x_tilde)`` replaces the default displacement
    test when given (the benchmark harness uses the normalized refined
    residual instead).  Returns the certified quintuple and the trajectory.
    """
    params.validate(prob.smooth.curvature_lower)
    _check_delta_window(params, prob.diameter)
    x0 = np.asarray(x0, dtype=float)
    if not np.isfinite(prob.nonsmooth.eval(x0)):
        raise ParameterError("x0 must lie in dom h")

    lam = params.lam
    M = prob.smooth.curvature_upper
    floor = inner_iteration_floor(lam, M)
    report = SolveReport(lam=lam, xi=params.xi, theta=params.theta, delta=params.delta)
    report.xs.append(x0.copy())
    report.ys.append(x0.copy())

    if stop_rule is None:
        stop_rule = lambda k, z, u, eta, xt: stop_outer_test(lam, params.rho_bar, z, xt)

    x, y = x0.copy(), x0.copy()
    A = 0.0
    inner_spent = 0
    for k in range(params.max_outer):
        a, A_next = outer_coefficients(A)
        x_tilde = compute_x_tilde(A, a, y, x)
        inner_prob = build_inner_problem(prob, params, x_tilde)

        budget = params.max_inner - inner_spent
        if budget < floor:
            raise NonconvergenceError("inner iteration budget exhausted", partial=report)
        state = acg.acg_init(inner_prob, x_tilde)
        while True:
            state = acg.acg_step(inner_prob, state)
            if state.j >= floor and stop_inner_test(
                params.xi, params.delta, state.z, state.u, state.eta, x_tilde
            ):
                break
            if state.j >= budget:
                raise NonconvergenceError(
                    "inner iteration budget exhausted", partial=report
                )
        inner_spent += state.j

        rec = OuterRecord(k=k, a=a, A_next=A_next, x_tilde=x_tilde, z=state.z,
                          u=state.u, eta=state.eta, inner_iters=state.j)
        report.records.append(rec)

        if stop_rule(k, state.z, state.u, state.eta, x_tilde):
            report.step2_triple = (state.z, state.u, state.eta)
            state, extra = final_refine(
                inner_prob, params, x_tilde, state, params.max_inner - inner_spent
            )
            report.extra_inner = extra
            rec.z, rec.u, rec.eta = state.z, state.u, state.eta
            report.ys.append(state.z.copy())
            report.phis.append(composite_value(prob, state.z))
            report.converged = True
            sol = ProxApproxSolution(lam=lam, z_minus=x_tilde, z=state.z,
                                     w=state.u / lam, eps=state.eta / lam)
            return sol, report

        y_next, v_tilde = state.z, state.u
        x = outer_x_update(params, a, v_tilde, y_next, x, y)
        y = y_next
        A = A_next
        report.xs.append(x.copy())
        report.ys.append(y.copy())
        report.phis.append(composite_value(prob, y))

    raise NonconvergenceError("outer iteration cap exhausted", partial=report)
