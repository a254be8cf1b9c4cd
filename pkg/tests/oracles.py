"""Independent high-precision oracles used only by the test suite.

Nothing here shares code with the package's certified-enclosure machinery:
sums are evaluated with mpmath via Euler-Maclaurin (explicit head, finite
quadrature plus analytic remainder for the integral, derivative correction
terms), so agreement is a genuine cross-check.

Slowly decaying integrands (power-log tails) defeat mpmath's infinite-
interval quadrature in the raw variable, so the integrals are computed in
the u = log(x+1+e) domain with an exact elementary remainder beyond a huge
finite endpoint.
"""

from __future__ import annotations

import math

import mpmath
from mpmath import mp, mpf

E = math.e


def em_series_sum(f, head_upto: int, log_depth: int = 1) -> mpf:
    """sum_{k>=1} f(k) by explicit head + Euler-Maclaurin tail at high dps.

    f must be smooth and eventually completely monotone.  ``log_depth``
    selects the substitution for the tail integral: 1 for power-law decay
    (x = e^u), 2 for power-of-log decay (x = e^(e^v)); after substitution
    the integrand decays exponentially and infinite-interval quadrature is
    dependable.
    """
    a = head_upto + 1
    with mp.workdps(40):
        head = mpmath.fsum(f(mpf(k)) for k in range(1, a))
        integral = _tail_integral(f, mpf(a), log_depth)
        d1 = mpmath.diff(f, mpf(a), 1)
        d3 = mpmath.diff(f, mpf(a), 3)
        d5 = mpmath.diff(f, mpf(a), 5)
        corr = f(mpf(a)) / 2 - d1 / 12 + d3 / 720 - d5 / 30240
        # remainder of the expansion is of the order of the next EM term
        assert abs(d5) / 30240 < mpf("1e-16"), "increase head_upto for the EM oracle"
        return head + integral + corr


def _tail_integral(f, a: mpf, log_depth: int) -> mpf:
    """int_a^inf f dx after x = e^u; the substituted integrand decays
    exponentially (log_depth 1) or algebraically in u (log_depth 2), both of
    which tanh-sinh handles; the reported quadrature error is asserted."""
    g = lambda u: f(mpmath.exp(u)) * mpmath.exp(u)
    lo = mpmath.log(a)
    if log_depth == 1:
        points = [lo, lo + 10, mpmath.inf]
    else:
        points = [lo, 2 * lo, 100 * lo, mpmath.inf]
    val, err = mpmath.quad(g, points, error=True)
    assert err < mpf("1e-20") * (1 + abs(val)), "oracle quadrature did not converge"
    return val


# -- weight functions (mirrors of the production Weight specs, mpmath form)

def w_one(x):
    return mpf(1)


def w_log_shift_e(x):
    return mpmath.log(x + mp.e)


def w_log_ratio(shift):
    return lambda x: mpmath.log(1 + x / mpf(shift))


# -- family weights ---------------------------------------------------------

def zeta_weight(alpha):
    return lambda x: x ** (-mpf(alpha))


def logheavy_weight(beta):
    return lambda x: 1 / ((x + 1) * mpmath.log(x + 1 + mp.e) ** mpf(beta))


def zeta_norm(alpha) -> mpf:
    with mp.workdps(40):
        return mpmath.zeta(mpf(alpha))


def logheavy_norm(beta, head_upto: int = 4000) -> mpf:
    return em_series_sum(logheavy_weight(beta), head_upto, log_depth=2)


def weighted_moment(family_weight, norm, g, head_upto: int = 4000, log_depth: int = 1) -> float:
    """Oracle for sum_{k>=1} g(k) p_k with p_k = family_weight(k)/norm."""
    f = lambda x: g(x) * family_weight(x)
    return float(em_series_sum(f, head_upto, log_depth) / norm)


# -- analytic stationary laws ------------------------------------------------

def poisson_pmf(rho: float, kmax: int):
    import numpy as np

    ks = np.arange(0, kmax + 1)
    logs = -rho + ks * math.log(rho) - [math.lgamma(k + 1) for k in ks]
    return np.exp(np.array(logs, dtype=float))


def dense_stationary(Q):
    """Stationary vector of a small generator via plain dense linear algebra."""
    import numpy as np

    n = Q.shape[0]
    A = np.vstack([Q.T, np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi
