"""Certified tail enclosures for weighted batch-size series.

The stability condition, drift vectors and batch normalizers all reduce to
series of the form  sum_{l>L} g(l) * w(l)  where g is one of

    One        : g(x) = 1
    LogShiftE  : g(x) = log(x + e)
    LogRatio   : g(x) = log(1 + x/shift)

and w is the (unnormalized) weight of a parametric batch family.  For the
power-law and logarithmic families the series converge too slowly for raw
summation at the required 1e-10 accuracy, so every tail is reported as a
rigorous [lo, hi] interval built from

  * the convex-tail sandwich: for h decreasing and convex on [L, inf),

        int_{L+1}^inf h + h(L+1)/2  <=  sum_{l>L} h(l)  <=  int_{L+1/2}^inf h

  * closed-form / incomplete-gamma enclosures of the integrals, with
    alternating- or geometric-series remainder bounds.

Monotonicity and convexity are guaranteed by per-family sufficient
conditions that are themselves monotone in x (see ``*_min_start``), so a
single check at the truncation point covers the whole tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath

_E = math.e

# Relative slack added to every closed-form float evaluation to absorb
# rounding; generous next to the 1e-10 budgets used by callers.
_FLOAT_SLACK = 1e-13


class Enclosure(NamedTuple):
    lo: float
    hi: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def __add__(self, other):  # type: ignore[override]
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        return Enclosure(self.lo + other, self.hi + other)

    def scale(self, c: float) -> "Enclosure":
        if c >= 0:
            return Enclosure(self.lo * c, self.hi * c)
        return Enclosure(self.hi * c, self.lo * c)


def exact(value: float) -> Enclosure:
    pad = abs(value) * _FLOAT_SLACK
    return Enclosure(value - pad, value + pad)


@dataclass(frozen=True)
class One:
    def g(self, x: float) -> float:
        return 1.0

    def gp(self, x: float) -> float:
        return 0.0


@dataclass(frozen=True)
class LogShiftE:
    def g(self, x: float) -> float:
        return math.log(x + _E)

    def gp(self, x: float) -> float:
        return 1.0 / (x + _E)


@dataclass(frozen=True)
class LogRatio:
    shift: float  # must be >= 1 + e so the log-domain expansion converges

    def __post_init__(self):
        if not self.shift >= 1.0 + _E - 1e-12:
            raise ValueError("LogRatio shift must be at least 1 + e")

    def g(self, x: float) -> float:
        return math.log1p(x / self.shift)

    def gp(self, x: float) -> float:
        return 1.0 / (self.shift + x)


Weight = One | LogShiftE | LogRatio


def _alternating_enclosure(terms: list[float]) -> Enclosure:
    """Enclose the sum of an alternating series from its partial sums.

    ``terms`` must be the signed terms with strictly decreasing magnitude;
    the truncation error is then bounded by the last included term.
    """
    s = 0.0
    partials = []
    for t in terms:
        s += t
        partials.append(s)
    if len(partials) == 1:
        lo, hi = sorted((0.0, partials[0]))
    else:
        lo, hi = sorted(partials[-2:])
    pad = _FLOAT_SLACK * max(abs(lo), abs(hi), 1e-300)
    return Enclosure(lo - pad, hi + pad)


# --------------------------------------------------------------------------
# Geometric family: w(l) = (1-p)^(l-1) p.  Closed forms, no quadrature.
# --------------------------------------------------------------------------

def geometric_tail(p: float, L: int, weight: Weight) -> Enclosure:
    """Enclosure of sum_{l>L} g(l) (1-p)^(l-1) p for concave increasing g."""
    q = 1.0 - p
    mass = q**L
    if isinstance(weight, One):
        return exact(mass)
    g1 = weight.g(L + 1)
    # concavity: g(l) <= g(L+1) + g'(L+1) (l - L - 1); the linear part sums
    # to q^(L+1)/p, the constant part to g(L+1) q^L
    lo = g1 * mass
    hi = g1 * mass + weight.gp(L + 1) * mass * q / p
    pad = _FLOAT_SLACK * max(hi, 1e-300)
    return Enclosure(lo - pad, hi + pad)


# --------------------------------------------------------------------------
# Power-law family: w(l) = l^(-alpha), alpha > 1 (unnormalized).
# --------------------------------------------------------------------------

def zeta_min_start(alpha: float, weight: Weight) -> int:
    """Smallest L from which h(x) = g(x) x^-alpha is decreasing and convex.

    Sufficient conditions (monotone in x, hence valid on the whole tail):
    alpha*g(x) >= 1 for monotone decrease, g(x) >= (1+2alpha)/(alpha(alpha+1))
    for convexity; LogRatio additionally needs x >= 2*shift for the
    alternating integral expansion.
    """
    if isinstance(weight, One):
        return 16
    floor = 16
    if isinstance(weight, LogRatio):
        floor = max(floor, int(math.ceil(2.0 * weight.shift)) + 16)
    need = max(1.0 / alpha, (1.0 + 2.0 * alpha) / (alpha * (alpha + 1.0)))
    L = floor
    while weight.g(L) < need:
        L *= 2
        if L > 2**50:
            raise ValueError("no admissible truncation point found")
    return L


def zeta_integral(alpha: float, M: float, weight: Weight) -> Enclosure:
    """Enclosure of int_M^inf g(x) x^(-alpha) dx."""
    a = alpha
    if isinstance(weight, One):
        return exact(M ** (1.0 - a) / (a - 1.0))
    if isinstance(weight, LogShiftE):
        # log(x+e) = log x + log(1 + e/x); the first part is elementary and
        # the second expands into an alternating series valid for M > e
        main = M ** (1.0 - a) * (math.log(M) / (a - 1.0) + 1.0 / (a - 1.0) ** 2)
        terms = []
        ej = 1.0
        sign = 1.0
        for j in range(1, 80):
            ej *= _E
            t = ej / j * M ** (1.0 - a - j) / (a + j - 1.0)
            terms.append(sign * t)
            sign = -sign
            if t < 1e-18 * max(main, 1e-300):
                break
        return exact(main) + _alternating_enclosure(terms)
    # LogRatio: integrate by parts, then expand 1/(K+x) in powers of K/x
    K = weight.shift
    if M < 2.0 * K:
        raise ValueError("zeta_integral(LogRatio) requires M >= 2*shift")
    main = M ** (1.0 - a) * math.log1p(M / K) / (a - 1.0)
    terms = []
    Kj = 1.0
    sign = 1.0
    for j in range(0, 200):
        t = Kj * M ** (1.0 - a - j) / (a + j - 1.0) / (a - 1.0)
        terms.append(sign * t)
        sign = -sign
        Kj *= K
        if t < 1e-18 * max(main, 1e-300):
            break
    return exact(main) + _alternating_enclosure(terms)


def zeta_weighted_tail(alpha: float, L: int, weight: Weight) -> Enclosure:
    """Enclosure of sum_{l>L} g(l) l^(-alpha); requires L >= zeta_min_start."""

    def h(x: float) -> float:
        return weight.g(x) * x ** (-alpha)

    lower = zeta_integral(alpha, L + 1.0, weight).lo + 0.5 * h(L + 1.0)
    upper = zeta_integral(alpha, L + 0.5, weight).hi
    return Enclosure(lower, upper)


# --------------------------------------------------------------------------
# Logarithmic family: w(l) = 1/((l+1) log(l+1+e)^beta)  (unnormalized).
# --------------------------------------------------------------------------

def logheavy_min_start(beta: float, weight: Weight) -> int:
    """Smallest admissible truncation point for the logarithmic family.

    Monotone sufficient conditions: g(x) >= 1 for decrease and
    g(x) >= 1.5 + beta/log(x+1+e) for convexity; the expansion of the
    substituted integral needs x large enough that its geometric ratios
    stay below 1/2.
    """
    floor = 16
    if isinstance(weight, LogRatio):
        kappa = weight.shift - 1.0 - _E
        floor = max(floor, int(math.ceil(2.0 * kappa)) + 16)
    if isinstance(weight, One):
        return floor
    L = floor
    while not (weight.g(L) >= 1.0 and weight.g(L) >= 1.5 + beta / math.log(L + 1 + _E)):
        L *= 2
        if L > 2**50:
            raise ValueError("no admissible truncation point found")
    return L


def _upper_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma for arbitrary real s (mpmath backed)."""
    with mpmath.workdps(30):
        return float(mpmath.gammainc(mpmath.mpf(s), mpmath.mpf(x)))


def logheavy_integral(beta: float, M: float, weight: Weight) -> Enclosure:
    """Enclosure of int_M^inf g(x) dx / ((x+1) log(x+1+e)^beta).

    Substituting u = log(x+1+e) turns the integrand into
    g~(u) u^(-beta) / (1 - e^(1-u)); expanding the last factor geometrically
    and g~ in powers of e^(-u) leaves elementary terms plus incomplete
    gammas, each series truncated with a certified remainder.
    """
    U = math.log(M + 1.0 + _E)
    if U < 1.0 + math.log(2.0):
        raise ValueError("logheavy_integral requires log(M+1+e) >= 1 + log 2")

    def E0(s: float) -> float:
        if s == 0:
            if beta <= 1.0:
                raise ValueError("divergent: beta must exceed 1")
            return U ** (1.0 - beta) / (beta - 1.0)
        return s ** (beta - 1.0) * _upper_gamma(1.0 - beta, s * U)

    def E1(s: float) -> float:
        if s == 0:
            if beta <= 2.0:
                raise ValueError("divergent: beta must exceed 2")
            return U ** (2.0 - beta) / (beta - 2.0)
        return s ** (beta - 2.0) * _upper_gamma(2.0 - beta, s * U)

    if isinstance(weight, One):
        a_coef = None  # no u-term; T_j = E0(j)
        rho = 0.0
        coeffs: list[float] = []
    elif isinstance(weight, LogShiftE):
        a_coef = 0.0
        rho = math.exp(-U)
        coeffs = []  # filled below: -1/m
    else:
        K = weight.shift
        kappa = K - 1.0 - _E
        rho = kappa * math.exp(-U)
        if rho > 0.5:
            raise ValueError("logheavy_integral(LogRatio) requires M >= 2*(shift-1-e)")
        a_coef = -math.log(K)
        coeffs = []

    def m_coeff(m: int) -> float:
        if isinstance(weight, LogShiftE):
            return -1.0 / m
        kappa = weight.shift - 1.0 - _E  # type: ignore[union-attr]
        return (-1.0) ** (m + 1) * kappa**m / m

    sigma = math.exp(1.0 - U)  # ratio of the geometric 1/(1-e^(1-u)) series
    total = 0.0
    remainder = 0.0
    scale = max(abs(E0(0) if isinstance(weight, One) else E1(0)), 1e-300)
    ej = 1.0
    J = 0
    Tbar_last = 0.0
    for j in range(0, 9):
        e0j = E0(j)
        if isinstance(weight, One):
            Tj = e0j
            Tbar = e0j
        else:
            Tj = E1(j) + a_coef * e0j
            Tbar = E1(j) + abs(a_coef) * e0j
            if rho > 0.0:
                m_sum = 0.0
                rm = rho
                for m in range(1, 200):
                    cm = m_coeff(m)
                    m_sum += cm * E0(j + m)
                    rm = rho ** (m + 1)
                    if rm * e0j < 1e-18 * scale:
                        break
                # geometric remainder of the m-expansion
                remainder += ej * e0j * rm / (1.0 - rho)
                Tj += m_sum
                Tbar += e0j * rho / (1.0 - rho)
        total += ej * Tj
        Tbar_last = Tbar
        J = j
        if ej * Tbar < 1e-17 * scale:
            break
        ej *= _E
    # geometric remainder of the j-expansion: T_{j+1} <= e^-U T_j termwise
    remainder += math.e ** (J + 1) * math.exp(-U) * Tbar_last / (1.0 - sigma)
    remainder += _FLOAT_SLACK * abs(total) + 1e-300
    return Enclosure(total - remainder, total + remainder)


def logheavy_weighted_tail(beta: float, L: int, weight: Weight) -> Enclosure:
    """Enclosure of sum_{l>L} g(l) w(l); requires L >= logheavy_min_start."""

    def h(x: float) -> float:
        return weight.g(x) / ((x + 1.0) * math.log(x + 1.0 + _E) ** beta)

    lower = logheavy_integral(beta, L + 1.0, weight).lo + 0.5 * h(L + 1.0)
    upper = logheavy_integral(beta, L + 0.5, weight).hi
    return Enclosure(lower, upper)
