import numpy as np
import pytest

from accprox.problems import CompositeProblem, SmoothOracle, simplex_indicator


def quadratic_oracle(Q, b):
    """Smooth oracle for 0.5 z'Qz + b'z with exact curvature pair."""
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.linalg.eigvalsh(0.5 * (Q + Q.T))
    return SmoothOracle(
        eval=lambda z: 0.5 * float(z @ (Q @ z)) + float(b @ z),
        grad=lambda z: Q @ z + b,
        curvature_lower=float(max(-w[0], 1e-12)),
        curvature_upper=float(max(abs(w[0]), abs(w[-1]))),
    )


def simplex_quadratic_problem(Q, b):
    n = len(b)
    return CompositeProblem(
        smooth=quadratic_oracle(Q, b),
        nonsmooth=simplex_indicator(n),
        diameter=np.sqrt(2.0),
        dimension=n,
    )


def random_psd_quadratic(rng, n, scale=1.0):
    """Random convex quadratic (Q PSD) with a linear term."""
    G = rng.standard_normal((n, n))
    Q = scale * (G @ G.T) / n
    b = rng.standard_normal(n)
    return Q, b


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
