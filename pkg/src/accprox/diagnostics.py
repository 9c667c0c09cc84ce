"""Runtime checks of the provable inequalities behind the solver.

Every closed-form bound the convergence analysis yields is evaluated here as
a computable quantity and compared against a recorded trajectory.  These are
regression detectors: a certified run must satisfy all of them, and the
tests (not the solves) abort when one fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .problems import Array, CompositeProblem, composite_value
from .solver import ProxApproxSolution, SolveReport, outer_coefficients

_REL_SLACK = 1e-9


@dataclass(frozen=True)
class BoundReport:
    theorem_id: str
    bound_value: float
    observed_value: float
    satisfied: bool
    margin: float


def _report(theorem_id: str, bound: float, observed: float) -> BoundReport:
    ok = observed <= bound + _REL_SLACK * (1.0 + abs(bound))
    return BoundReport(theorem_id=theorem_id, bound_value=float(bound),
                       observed_value=float(observed), satisfied=bool(ok),
                       margin=float(bound - observed))


def gaipp_constants(alpha: float, theta: float, kappa: float, delta: float):
    """Constants (beta, tau0, c0) entering the outer residual bound."""
    if not (0.0 < theta < alpha <= 1.0):
        raise ParameterError("need 0 < theta < alpha <= 1")
    if not (0.0 < kappa < 1.0):
        raise ParameterError("need 0 < kappa < 1")
    if delta < 0.0:
        raise ParameterError("need delta >= 0")
    beta = 3.0 + 4.0 * (theta + delta) / (alpha - theta)
    tau0 = math.sqrt(kappa * alpha + delta) / math.sqrt(alpha + delta)
    c0 = 4.0 * (1.0 - theta) * beta ** 2 / (1.0 - tau0) ** 2
    return beta, tau0, c0


def residual_bound_thm22(report: SolveReport, D: float, k: int) -> BoundReport:
    """Best observed squared displacement over the first k outer iterations
    versus its provable decay bound."""
    if k < 1 or k > report.outer_iters:
        raise ParameterError("need 1 <= k <= number of recorded outer iterations")
    alpha, kappa = report.xi / 2.0, 0.5
    _, _, c0 = gaipp_constants(alpha, report.theta, kappa, report.delta)
    lam = report.lam
    recs = report.records[:k]
    a_sum = sum(r.a for r in recs)
    A_sum = sum(r.A_next for r in recs)
    observed = min(
        float(np.linalg.norm(r.z - r.x_tilde) ** 2) / lam ** 2 for r in recs
    )
    bound = (
        (report.theta + report.delta + c0 * k + 2.0 * (1.0 - report.theta) * a_sum)
        * D ** 2
        / ((1.0 - kappa * alpha) * A_sum * lam ** 2)
    )
    return _report(f"outer-residual-decay[k={k}]", bound, observed)


def outer_bound_cor23(D: float, lambda_lb: float, rho: float, delta: float) -> float:
    """Order-of-magnitude outer iteration bound (constants suppressed)."""
    lead = D ** 2 / (lambda_lb ** 2 * rho ** 2)
    return lead + delta ** 2 * D / (lambda_lb * rho) + (delta * lead) ** (1.0 / 3.0) + 1.0


def log1_plus(t: float) -> float:
    """max(log t, 1)."""
    return max(math.log(t), 1.0)


def total_bound_thm36(lam: float, M: float, D: float, rho_bar: float, eps_bar: float) -> float:
    """Order-of-magnitude total inner iteration bound."""
    arg = rho_bar * math.sqrt(lam ** 2 * M + lam) / math.sqrt(eps_bar)
    return math.sqrt(lam * M + 1.0) * (
        D ** 2 / (lam ** 2 * rho_bar ** 2) + log1_plus(arg)
    )


def sequence_estimates_check(k_max: int) -> BoundReport:
    """Growth estimates of the outer coefficient sequences up to k_max.

    Checks A_k >= k^2/4, sum A_{i+1} >= k^3/12, sum a_i / sum A_{i+1} <= 4/k
    and A_{k+1} = a_k^2 for every k, reporting the worst margin (as bound
    minus observed, so a nonnegative observed maximum means all hold).
    """
    if k_max < 1:
        raise ParameterError("k_max must be >= 1")
    A = 0.0
    a_sum = 0.0
    A_sum = 0.0
    worst = -np.inf  # largest violation across all inequalities
    for k in range(1, k_max + 1):
        a, A_next = outer_coefficients(A)
        a_sum += a
        A_sum += A_next
        worst = max(worst, k * k / 4.0 - A_next)
        worst = max(worst, k ** 3 / 12.0 - A_sum)
        worst = max(worst, a_sum / A_sum - 4.0 / k)
        worst = max(worst, abs(A_next - a * a) - 1e-10 * A_next)
        A = A_next
    return _report(f"sequence-estimates[k<={k_max}]", 0.0, worst)


def gamma_minorant_check(
    prob: CompositeProblem, report: SolveReport, k: int, u_samples: Array
) -> BoundReport:
    """Lower-model property of the accepted certificate at sampled points.

    The affine-plus-quadratic model built from (y_{k+1}, v_tilde, eps_tilde)
    must not exceed lam*phi by more than (1-theta)/2 ||u - x_tilde||^2.
    """
    rec = report.records[k]
    lam, alpha, theta = report.lam, report.xi / 2.0, report.theta
    y1 = report.ys[k + 1]
    v_tilde, eps_tilde = rec.u, 2.0 * rec.eta
    x_tilde = rec.x_tilde
    phi_y1 = composite_value(prob, y1)
    base = lam * phi_y1 + 0.5 * float(np.linalg.norm(y1 - x_tilde) ** 2)
    worst = -np.inf
    for u in u_samples:
        gamma = (
            base
            + float(v_tilde @ (u - y1))
            + 0.5 * alpha * float(np.linalg.norm(u - y1) ** 2)
            - 0.5 * theta * float(np.linalg.norm(u - x_tilde) ** 2)
            - eps_tilde
        )
        rhs = lam * composite_value(prob, u) + 0.5 * (1.0 - theta) * float(
            np.linalg.norm(u - x_tilde) ** 2
        )
        worst = max(worst, gamma - rhs)
    return _report(f"model-minorant[k={k}]", 0.0, worst)


def frame_inequality_check(
    alpha: float,
    kappa: float,
    delta: float,
    y_next: Array,
    v_tilde: Array,
    eps_tilde: float,
    x_tilde: Array,
) -> BoundReport:
    """Relative-error acceptance inequality at the outer level."""
    d = y_next - x_tilde
    lhs = float(np.linalg.norm(v_tilde + delta * d) ** 2) / (alpha + delta) + 2.0 * eps_tilde
    rhs = (kappa * alpha + delta) * float(np.linalg.norm(d) ** 2)
    return _report("frame-inequality", rhs, lhs)


def boundedness_check(report: SolveReport, D: float, k: int) -> BoundReport:
    """Control-sequence boundedness against the geometric envelope."""
    alpha, kappa = report.xi / 2.0, 0.5
    beta, tau0, _ = gaipp_constants(alpha, report.theta, kappa, report.delta)
    x_bar = report.xs[-1]
    observed = float(np.linalg.norm(report.xs[k] - x_bar))
    bound = tau0 ** k * float(np.linalg.norm(report.xs[0] - x_bar)) + beta * D / (1.0 - tau0)
    return _report(f"iterate-boundedness[k={k}]", bound, observed)


def prox_solution_check(
    prob: CompositeProblem,
    sol: ProxApproxSolution,
    u_samples: Array,
    slack: float = 1e-8,
) -> bool:
    """Sampled subgradient test for the output quintuple."""
    lam = sol.lam
    base = composite_value(prob, sol.z) + float(
        np.linalg.norm(sol.z - sol.z_minus) ** 2
    ) / (2.0 * lam)
    for u in u_samples:
        lhs = composite_value(prob, u) + float(
            np.linalg.norm(u - sol.z_minus) ** 2
        ) / (2.0 * lam)
        rhs = base + float(sol.w @ (u - sol.z)) - sol.eps
        if lhs < rhs - slack * (1.0 + abs(lhs)):
            return False
    return True


def check_run(
    prob: CompositeProblem,
    report: SolveReport,
    sol: ProxApproxSolution = None,
    n_samples: int = 100,
    seed: int = 0,
) -> list[BoundReport]:
    """All trajectory-level checks for one completed run."""
    rng = np.random.default_rng(seed)
    samples = rng.dirichlet(np.ones(prob.dimension), size=n_samples)
    alpha, kappa = report.xi / 2.0, 0.5
    out = []
    for k in range(1, report.outer_iters + 1):
        out.append(residual_bound_thm22(report, prob.diameter, k))
    for rec in report.records:
        y_next = report.ys[rec.k + 1]
        fr = frame_inequality_check(alpha, kappa, report.delta, y_next, rec.u,
                                    2.0 * rec.eta, rec.x_tilde)
        out.append(BoundReport(theorem_id=f"frame-inequality[k={rec.k}]",
                               bound_value=fr.bound_value,
                               observed_value=fr.observed_value,
                               satisfied=fr.satisfied, margin=fr.margin))
    for k in range(len(report.xs)):
        out.append(boundedness_check(report, prob.diameter, k))
    for rec in report.records:
        out.append(gamma_minorant_check(prob, report, rec.k, samples))
    if sol is not None:
        ok = prox_solution_check(prob, sol, samples)
        out.append(BoundReport(theorem_id="prox-solution-subgradient",
                               bound_value=0.0, observed_value=0.0 if ok else 1.0,
                               satisfied=ok, margin=0.0 if ok else -1.0))
    return out


def render_reports(reports: list[BoundReport]) -> str:
    """One line per check: id, bound, observed, margin, verdict."""
    lines = []
    for r in reports:
        verdict = "ok" if r.satisfied else "FAIL"
        lines.append(
            f"{r.theorem_id:34s} bound={r.bound_value: .6e} "
            f"observed={r.observed_value: .6e} margin={r.margin: .3e} {verdict}"
        )
    return "\n".join(lines)
