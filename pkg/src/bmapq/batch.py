"""Batch-size distributions with certified series evaluation and sampling.

Four families cover the stability dichotomy:

    Finite     explicit pmf on {1..m}; everything is an exact finite sum
    Geometric  p_k = (1-p)^(k-1) p; light tail, closed forms
    Zeta       p_k = k^(-alpha)/zeta(alpha), alpha > 1; power-law tail
    LogHeavy   p_k proportional to 1/((k+1) log(k+1+e)^beta), beta > 0

LogHeavy is normalizable only for beta > 1 and has a finite logarithmic
moment only for beta > 2, so it exercises both the divergent and the
barely-convergent side of the stability condition.  For beta <= 1 the
weights are not summable: the object can still be constructed and
classified (its logarithmic moment diverges a fortiori), but operations
that need actual probabilities raise ``BadPmfError``.

Weighted sums over the full support are returned as certified
``Enclosure`` intervals; sampling inverts the exact CDF, falling back to
an asymptotic tail inversion (reported in log scale) for batch sizes too
large to materialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import tails
from .config import MAX_EXACT_BATCH, NORMALIZER_RTOL
from .errors import BadPmfError
from .tails import Enclosure, LogRatio, LogShiftE, One, Weight

_E = math.e

INF_ENCLOSURE = Enclosure(math.inf, math.inf)


@dataclass(frozen=True)
class SampledBatches:
    """Batch sizes drawn by inverse CDF.

    ``sizes[i]`` is the exact integer batch size, or -1 when the quantile
    exceeds ``MAX_EXACT_BATCH``; ``log_sizes[i]`` always carries the natural
    log of the batch size (exact for materialized sizes, asymptotic for
    oversized ones).
    """

    sizes: np.ndarray
    log_sizes: np.ndarray

    @property
    def any_huge(self) -> bool:
        return bool(np.any(self.sizes < 0))


class BatchSizeDistribution:
    """Common interface; concrete families are frozen dataclasses below."""

    # -- analytic classification ------------------------------------------

    @property
    def is_proper(self) -> bool:
        return True

    @property
    def has_finite_log_moment(self) -> bool:
        raise NotImplementedError

    def _require_proper(self):
        if not self.is_proper:
            raise BadPmfError(f"{self!r} is not normalizable")

    # -- certified series --------------------------------------------------

    def weighted_sum(self, weight: Weight, tol: float = 1e-10) -> Enclosure:
        """Certified enclosure of sum_{k>=1} g(k) p_k (inf if divergent)."""
        raise NotImplementedError

    def log_moment(self, tol: float = 1e-10) -> float:
        """E[log(B + e)] as an extended real.

        Returns +inf exactly when the series diverges; finite values carry
        a certified absolute (hence, as the value exceeds 1, relative)
        error below ``tol``.
        """
        if not self.has_finite_log_moment:
            return math.inf
        return self.weighted_sum(LogShiftE(), tol).mid

    # -- pointwise laws ----------------------------------------------------

    def pmf_array(self, kmax: int) -> np.ndarray:
        """P(B = k) for k = 1..kmax as a dense vector."""
        raise NotImplementedError

    def tail_prob(self, m) -> np.ndarray | float:
        """P(B >= m), vectorized over integer m >= 1."""
        raise NotImplementedError

    def pgf(self, z: float) -> float:
        """E[z^B] for 0 <= z < 1, accurate to ~1e-13."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> SampledBatches:
        raise NotImplementedError

    def spec(self) -> dict:
        """JSON-ready family descriptor."""
        raise NotImplementedError


def _exact_sizes(sizes: np.ndarray) -> SampledBatches:
    return SampledBatches(sizes=sizes.astype(np.int64), log_sizes=np.log(sizes.astype(float)))


@dataclass(frozen=True)
class Finite(BatchSizeDistribution):
    pmf: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise BadPmfError("finite pmf must be a non-empty sequence")
        if np.any(p < 0) or np.any(~np.isfinite(p)):
            raise BadPmfError("finite pmf entries must be finite and nonnegative")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise BadPmfError(f"finite pmf sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "pmf", tuple(float(x) for x in p))

    @property
    def has_finite_log_moment(self) -> bool:
        return True

    def weighted_sum(self, weight: Weight, tol: float = 1e-10) -> Enclosure:
        ks = np.arange(1, len(self.pmf) + 1, dtype=float)
        g = np.array([weight.g(k) for k in ks])
        return tails.exact(float(np.dot(g, np.asarray(self.pmf))))

    def pmf_array(self, kmax: int) -> np.ndarray:
        out = np.zeros(kmax)
        m = min(kmax, len(self.pmf))
        out[:m] = self.pmf[:m]
        return out

    def tail_prob(self, m):
        m_arr = np.atleast_1d(np.asarray(m, dtype=np.int64))
        suffix = np.concatenate([np.cumsum(np.asarray(self.pmf)[::-1])[::-1], [0.0]])
        idx = np.clip(m_arr - 1, 0, len(self.pmf))
        out = suffix[idx]
        out = np.where(m_arr <= 1, 1.0, out)
        return out if np.ndim(m) else float(out[0])

    def pgf(self, z: float) -> float:
        ks = np.arange(1, len(self.pmf) + 1)
        return float(np.dot(np.asarray(self.pmf), z**ks))

    def sample(self, rng, n):
        cdf = np.cumsum(np.asarray(self.pmf))
        cdf[-1] = 1.0
        u = rng.random(n)
        return _exact_sizes(np.searchsorted(cdf, u, side="left") + 1)

    def spec(self):
        return {"family": "finite", "params": {"pmf": list(self.pmf)}}


@dataclass(frozen=True)
class Geometric(BatchSizeDistribution):
    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise BadPmfError("geometric success probability must lie in (0,1)")

    @property
    def has_finite_log_moment(self) -> bool:
        return True

    def weighted_sum(self, weight: Weight, tol: float = 1e-10) -> Enclosure:
        q = 1.0 - self.p
        L = 16
        while tails.geometric_tail(self.p, L, weight).halfwidth > tol / 4 and L < 2**40:
            L *= 2
        ks = np.arange(1, L + 1, dtype=float)
        g = _g_array(weight, ks)
        head = float(np.dot(g, q ** (ks - 1.0) * self.p))
        return tails.exact(head) + tails.geometric_tail(self.p, L, weight)

    def pmf_array(self, kmax: int) -> np.ndarray:
        ks = np.arange(1, kmax + 1, dtype=float)
        return (1.0 - self.p) ** (ks - 1.0) * self.p

    def tail_prob(self, m):
        m_arr = np.atleast_1d(np.asarray(m, dtype=float))
        out = (1.0 - self.p) ** (m_arr - 1.0)
        return out if np.ndim(m) else float(out[0])

    def pgf(self, z: float) -> float:
        return self.p * z / (1.0 - (1.0 - self.p) * z)

    def sample(self, rng, n):
        u = rng.random(n)
        sizes = np.ceil(np.log1p(-u) / math.log1p(-self.p)).astype(np.int64)
        return _exact_sizes(np.maximum(sizes, 1))

    def spec(self):
        return {"family": "geometric", "params": {"p": self.p}}


def _g_array(weight: Weight, ks: np.ndarray) -> np.ndarray:
    if isinstance(weight, One):
        return np.ones_like(ks)
    if isinstance(weight, LogShiftE):
        return np.log(ks + _E)
    return np.log1p(ks / weight.shift)


def _bisect_quantile(tail_fn, V: np.ndarray, hi_cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized integer inversion: smallest b with tail(b+1) <= V.

    Returns (sizes, huge_mask); entries whose quantile exceeds hi_cap are
    flagged in huge_mask and must be resolved by the caller.
    """
    n = V.size
    hi = np.ones(n, dtype=np.int64)
    active = tail_fn(hi + 1) > V
    while np.any(active & (hi < hi_cap)):
        hi = np.where(active, np.minimum(hi * 2, hi_cap), hi)
        active = active & (tail_fn(hi + 1) > V)
    huge = active  # still unsatisfied at the cap
    lo = np.maximum(hi // 2, 1)
    lo[huge] = hi[huge]
    # invariant: tail(lo) > V >= tail(hi+1), so the quantile lies in [lo, hi]
    while np.any(hi > lo):
        mid = (lo + hi) // 2
        go_up = tail_fn(mid + 1) > V
        lo = np.where(go_up & (hi > lo), mid + 1, lo)
        hi = np.where(~go_up & (hi > lo), mid, hi)
    return hi, huge


@dataclass(frozen=True)
class Zeta(BatchSizeDistribution):
    alpha: float

    def __post_init__(self):
        if not (self.alpha > 1.0 and math.isfinite(self.alpha)):
            raise BadPmfError("zeta exponent must be a finite number > 1")

    @cached_property
    def _norm(self) -> float:
        return float(hurwitz_zeta(self.alpha, 1))

    @property
    def has_finite_log_moment(self) -> bool:
        return True

    def weighted_sum(self, weight: Weight, tol: float = 1e-10) -> Enclosure:
        Z = self._norm
        L = tails.zeta_min_start(self.alpha, weight)
        L = max(L, 64)
        while tails.zeta_weighted_tail(self.alpha, L, weight).halfwidth > tol * Z / 4 and L < 2**34:
            L *= 2
        ks = np.arange(1, L + 1, dtype=float)
        head = float(np.dot(_g_array(weight, ks), ks**-self.alpha))
        return (tails.exact(head) + tails.zeta_weighted_tail(self.alpha, L, weight)).scale(1.0 / Z)

    def pmf_array(self, kmax: int) -> np.ndarray:
        ks = np.arange(1, kmax + 1, dtype=float)
        return ks**-self.alpha / self._norm

    def tail_prob(self, m):
        m_arr = np.atleast_1d(np.asarray(m, dtype=float))
        out = hurwitz_zeta(self.alpha, m_arr) / self._norm
        return out if np.ndim(m) else float(out[0])

    def pgf(self, z: float) -> float:
        if z == 0.0:
            return 0.0
        L = max(64, int(40.0 / -math.log(z)) + 1)
        ks = np.arange(1, L + 1, dtype=float)
        head = float(np.dot(z**ks, ks**-self.alpha))
        # remaining terms are below z^(L+1)/(1-z) * (L+1)^-alpha
        return (head + 0.5 * z ** (L + 1) * (L + 1.0) ** -self.alpha / (1.0 - z)) / self._norm

    def sample(self, rng, n):
        u = rng.random(n)
        V = 1.0 - u
        sizes, huge = _bisect_quantile(lambda m: self.tail_prob(m), V, MAX_EXACT_BATCH)
        logs = np.log(sizes.astype(float))
        if np.any(huge):
            # invert the asymptotic tail zeta(alpha, m)/Z ~ m^(1-alpha)/((alpha-1) Z)
            logs_huge = np.log(V[huge] * (self.alpha - 1.0) * self._norm) / (1.0 - self.alpha)
            logs[huge] = logs_huge
            sizes = sizes.copy()
            sizes[huge] = -1
        return SampledBatches(sizes=sizes, log_sizes=logs)

    def spec(self):
        return {"family": "zeta", "params": {"alpha": self.alpha}}


@dataclass(frozen=True)
class LogHeavy(BatchSizeDistribution):
    beta: float

    # size of the exact CDF table used by the sampler before switching to
    # the asymptotic tail inversion
    _TABLE = 1 << 20

    def __post_init__(self):
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise BadPmfError("logheavy exponent must be a finite number > 0")

    @property
    def is_proper(self) -> bool:
        return self.beta > 1.0

    @property
    def has_finite_log_moment(self) -> bool:
        return self.beta > 2.0

    @staticmethod
    def _weights(ks: np.ndarray, beta: float) -> np.ndarray:
        return 1.0 / ((ks + 1.0) * np.log(ks + 1.0 + _E) ** beta)

    @cached_property
    def _norm(self) -> float:
        """Total weight mass, certified to NORMALIZER_RTOL (beta > 1 only)."""
        self._require_proper()
        weight = One()
        L = max(tails.logheavy_min_start(self.beta, weight), 64)
        while True:
            tail = tails.logheavy_weighted_tail(self.beta, L, weight)
            if tail.halfwidth <= NORMALIZER_RTOL * max(tail.lo, 0.05) or L >= 2**34:
                break
            L *= 2
        ks = np.arange(1, L + 1, dtype=float)
        head = float(np.sum(self._weights(ks, self.beta)))
        return (tails.exact(head) + tail).mid

    def weighted_sum(self, weight: Weight, tol: float = 1e-10) -> Enclosure:
        finite = self.beta > 1.0 if isinstance(weight, One) else self.beta > 2.0
        if not finite:
            return INF_ENCLOSURE
        self._require_proper()
        Z = self._norm
        L = max(tails.logheavy_min_start(self.beta, weight), 64)
        while tails.logheavy_weighted_tail(self.beta, L, weight).halfwidth > tol * Z / 4 and L < 2**34:
            L *= 2
        ks = np.arange(1, L + 1, dtype=float)
        head = float(np.dot(_g_array(weight, ks), self._weights(ks, self.beta)))
        return (tails.exact(head) + tails.logheavy_weighted_tail(self.beta, L, weight)).scale(1.0 / Z)

    def log_moment(self, tol: float = 1e-10) -> float:
        if not self.has_finite_log_moment:
            return math.inf
        return self.weighted_sum(LogShiftE(), tol).mid

    def pmf_array(self, kmax: int) -> np.ndarray:
        self._require_proper()
        ks = np.arange(1, kmax + 1, dtype=float)
        return self._weights(ks, self.beta) / self._norm

    @cached_property
    def _cdf_table(self) -> np.ndarray:
        ks = np.arange(1, self._TABLE + 1, dtype=float)
        return np.cumsum(self._weights(ks, self.beta)) / self._norm

    def tail_prob(self, m):
        self._require_proper()
        m_arr = np.atleast_1d(np.asarray(m, dtype=np.int64))
        out = np.empty(m_arr.shape, dtype=float)
        small = m_arr <= self._TABLE
        idx = np.clip(m_arr[small] - 2, -1, self._TABLE - 1)
        cdf_below = np.where(idx < 0, 0.0, self._cdf_table[np.maximum(idx, 0)])
        out[small] = 1.0 - cdf_below
        if np.any(~small):
            out[~small] = self._tail_asymptotic(m_arr[~small].astype(float))
        return out if np.ndim(m) else float(out[0])

    def _tail_asymptotic(self, m: np.ndarray) -> np.ndarray:
        """P(B >= m) for large m via the midpoint-rule integral.

        Relative error is O(1/(m log m)); used only beyond the exact CDF
        table, where that is below 1e-6.
        """
        U = np.log(m - 0.5 + 1.0 + _E)
        return U ** (1.0 - self.beta) / (self.beta - 1.0) / self._norm

    def pgf(self, z: float) -> float:
        self._require_proper()
        if z == 0.0:
            return 0.0
        L = max(64, int(40.0 / -math.log(z)) + 1)
        ks = np.arange(1, L + 1, dtype=float)
        w = self._weights(ks, self.beta)
        head = float(np.dot(z**ks, w))
        bound = z ** (L + 1) * self._weights(np.array([L + 1.0]), self.beta)[0] / (1.0 - z)
        return (head + 0.5 * bound) / self._norm

    def sample(self, rng, n):
        self._require_proper()
        u = rng.random(n)
        V = 1.0 - u
        sizes = np.empty(n, dtype=np.int64)
        logs = np.empty(n, dtype=float)
        # exact inversion against the CDF table
        in_table = V >= 1.0 - self._cdf_table[-1]
        sizes[in_table] = np.searchsorted(self._cdf_table, u[in_table], side="left") + 1
        logs[in_table] = np.log(sizes[in_table].astype(float))
        rest = ~in_table
        if np.any(rest):
            res_sizes, huge = _bisect_quantile(
                lambda m: self._tail_asymptotic(np.maximum(m.astype(float), 2.0)),
                V[rest],
                MAX_EXACT_BATCH,
            )
            # clamp to the table edge so the asymptotic seam cannot invert
            res_sizes = np.maximum(res_sizes, self._TABLE + 1)
            res_logs = np.log(res_sizes.astype(float))
            if np.any(huge):
                # asymptotic inversion: log(B) = ((beta-1) Z V)^(1/(1-beta))
                res_logs[huge] = (V[rest][huge] * (self.beta - 1.0) * self._norm) ** (
                    1.0 / (1.0 - self.beta)
                )
                res_sizes = res_sizes.copy()
                res_sizes[huge] = -1
            sizes[rest] = res_sizes
            logs[rest] = res_logs
        return SampledBatches(sizes=sizes, log_sizes=logs)

    def spec(self):
        return {"family": "logheavy", "params": {"beta": self.beta}}


def batch_from_spec(spec: dict) -> BatchSizeDistribution:
    """Construct a family from its JSON descriptor ({family, params})."""
    family = spec.get("family")
    params = spec.get("params", {})
    if family == "finite":
        return Finite(pmf=tuple(params["pmf"]))
    if family == "geometric":
        return Geometric(p=float(params["p"]))
    if family == "zeta":
        return Zeta(alpha=float(params["alpha"]))
    if family == "logheavy":
        return LogHeavy(beta=float(params["beta"]))
    raise BadPmfError(f"unknown batch family {family!r}")


def log_moment(batch: BatchSizeDistribution, tol: float = 1e-10) -> float:
    """E[log(B + e)]; +inf exactly when the defining series diverges."""
    return batch.log_moment(tol)
