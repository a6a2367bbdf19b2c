"""Stationary density catalog.

Each spec owns a normalized pdf on a fixed support, a cdf (closed form where
one exists, quadrature otherwise), first and second moments through both a
closed route and an independent quadrature route, and, where available, the
closed shape of the rate-optimal diffusion coefficient (per unit relaxation
rate). Construction always verifies unit mass to 1e-8.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import betainc, erf, gammainc, gammaincc

from . import numerics
from .errors import (
    BadWeights,
    MomentDivergence,
    NotNormalized,
    OutOfSupport,
    ParamOutOfRange,
    SpecFileError,
    SupportMismatch,
)

_MASS_TOL = 1e-8


def _lnbeta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@dataclass(frozen=True)
class Support:
    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("support bounds must not be NaN")
        if not self.lower < self.upper:
            raise ValueError("support needs lower < upper")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def contains(self, x) -> bool:
        return bool(np.all(np.asarray(x) >= self.lower)
                    and np.all(np.asarray(x) <= self.upper))


@dataclass(frozen=True)
class MomentSummary:
    m1: float
    m2: float
    variance: float

    @classmethod
    def from_raw(cls, m1, m2):
        return cls(m1=float(m1), m2=float(m2), variance=float(m2) - float(m1) ** 2)


class DistributionSpec:
    """Base class; subclasses fill kind, params, support and _pdf."""

    kind = "Custom"

    def __init__(self):
        self.params = {}
        self.support = Support(0.0, 1.0)

    # flags for integrable endpoint singularities of the pdf
    singular_left = False
    singular_right = False

    def __repr__(self):
        inner = ", ".join("%s=%g" % kv for kv in self.params.items())
        return "%s(%s)" % (self.kind, inner)

    # --- evaluation -------------------------------------------------------

    def _pdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(arr < self.support.lower) or np.any(arr > self.support.upper):
            raise OutOfSupport(
                "point outside support [%g, %g]" % (self.support.lower,
                                                    self.support.upper))
        out = self._pdf(arr)
        return float(out) if arr.ndim == 0 else out

    def _cdf(self, x):
        return None  # closed form unavailable

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        fin = np.atleast_1d(arr)
        fin = fin[np.isfinite(fin)]
        if np.any(fin < self.support.lower) or np.any(fin > self.support.upper):
            raise OutOfSupport("point outside support")
        closed = self._cdf(arr)
        if closed is not None:
            out = np.clip(closed, 0.0, 1.0)
            return float(out) if arr.ndim == 0 else out
        flat = np.atleast_1d(arr)
        out = np.array([self._cdf_quad(t) for t in flat])
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def _cdf_quad(self, x):
        lo = self.support.lower
        if x <= lo:
            return 0.0
        if x >= self.support.upper:
            return 1.0
        if math.isfinite(lo):
            r = numerics.integrate(self._pdf, lo, x, tol=1e-12, rel_tol=1e-11,
                                   singular_left=self.singular_left)
            return min(max(r.value, 0.0), 1.0)
        # infinite lower end: integrate the complementary side instead
        val = self._integral(lambda t: np.ones_like(t), lower_override=x)
        return min(max(1.0 - val, 0.0), 1.0)

    # --- moments ----------------------------------------------------------

    def _closed_moments(self):
        return None  # (m1, m2) where available

    def moments(self) -> MomentSummary:
        closed = self._closed_moments()
        if closed is not None:
            return MomentSummary.from_raw(*closed)
        return self.moments_quadrature()

    def moments_quadrature(self) -> MomentSummary:
        """Independent quadrature route for m1 and m2."""
        m1 = self._integral(lambda x: x)
        m2 = self._integral(lambda x: x * x)
        return MomentSummary.from_raw(m1, m2)

    # --- quadrature helpers -----------------------------------------------

    def _anchor(self) -> float:
        s = self.support
        if s.finite:
            return 0.5 * (s.lower + s.upper)
        return 0.0

    def _scale_hint(self) -> float:
        s = self.support
        if s.finite:
            return 0.25 * (s.upper - s.lower)
        return 1.0

    def truncated_support(self):
        """Finite window holding all but ~1e-14 of the density's peak scale."""
        return numerics.truncated_interval(
            self._pdf, self.support.lower, self.support.upper,
            self._anchor(), self._scale_hint())

    def _integral(self, g, rel_tol=1e-11, lower_override=None):
        """integral of g(x) pdf(x) dx over the support.

        Infinite tails are mapped to [0, 1) through x = c +- t/(1-t), which
        keeps polynomially decaying tails integrable to full precision.
        """
        lo = self.support.lower if lower_override is None else float(lower_override)
        hi = self.support.upper
        s = max(self._scale_hint(), 1e-6)
        c0 = self._anchor()
        core_lo = lo if math.isfinite(lo) else c0 - s
        core_hi = hi if math.isfinite(hi) else max(c0, core_lo) + s

        def weighted(x):
            return g(x) * self._pdf(x)

        total = 0.0
        r = numerics.integrate(
            weighted, core_lo, core_hi, tol=1e-13, rel_tol=rel_tol,
            singular_left=self.singular_left and math.isfinite(self.support.lower)
            and core_lo == self.support.lower,
            singular_right=self.singular_right and math.isfinite(hi))
        total += r.value
        if not math.isfinite(hi):
            def right_tail(t):
                x = core_hi + t / (1.0 - t)
                return weighted(x) / (1.0 - t) ** 2
            total += numerics.integrate(right_tail, 0.0, 1.0, tol=1e-13,
                                        rel_tol=rel_tol).value
        if not math.isfinite(lo):
            def left_tail(t):
                x = core_lo - t / (1.0 - t)
                return weighted(x) / (1.0 - t) ** 2
            total += numerics.integrate(left_tail, 0.0, 1.0, tol=1e-13,
                                        rel_tol=rel_tol).value
        return total

    def _check_normalized(self):
        mass = self._integral(lambda x: np.ones_like(x))
        if not math.isfinite(mass) or abs(mass - 1.0) > _MASS_TOL:
            raise NotNormalized("density mass is %.12g, not 1" % mass)

    # --- optimal-diffusion hooks -------------------------------------------

    def closed_profile(self):
        """Closed diffusion-coefficient shape per unit rate, or None.

        When available this returns a vectorized callable p with
        sigma^2(x)/2 = lambda1 * p(x) for the synthesized optimal process.
        """
        return None

    def default_sigma_hat_sq_half(self) -> float:
        return self.moments().variance


class Beta(DistributionSpec):
    """Density x^alpha (1-x)^beta / B(alpha+1, beta+1) on [0, 1]."""

    kind = "Beta"

    def __init__(self, alpha, beta):
        alpha = float(alpha)
        beta = float(beta)
        if not (alpha > -1.0 and beta > -1.0):
            raise ParamOutOfRange("need alpha > -1 and beta > -1")
        self.params = {"alpha": alpha, "beta": beta}
        self.support = Support(0.0, 1.0)
        self._norm = math.exp(-_lnbeta(alpha + 1.0, beta + 1.0))
        self.singular_left = alpha < 0.0
        self.singular_right = beta < 0.0
        self._check_normalized()

    def _pdf(self, x):
        a = self.params["alpha"]
        b = self.params["beta"]
        with np.errstate(divide="ignore"):
            return np.power(x, a) * np.power(1.0 - x, b) * self._norm

    def _cdf(self, x):
        return betainc(self.params["alpha"] + 1.0, self.params["beta"] + 1.0,
                       np.clip(x, 0.0, 1.0))

    def _closed_moments(self):
        a = self.params["alpha"]
        b = self.params["beta"]
        m1 = (a + 1.0) / (a + b + 2.0)
        m2 = (a + 1.0) * (a + 2.0) / ((a + b + 2.0) * (a + b + 3.0))
        return m1, m2

    def closed_profile(self):
        a = self.params["alpha"]
        b = self.params["beta"]
        return lambda x: np.asarray(x, float) * (1.0 - np.asarray(x, float)) \
            / (a + b + 2.0)

    def default_sigma_hat_sq_half(self):
        a = self.params["alpha"]
        b = self.params["beta"]
        return (a + 1.0) * (b + 1.0) / ((a + b + 3.0) * (a + b + 2.0))


class Jacobi(DistributionSpec):
    """Density (1-x)^alpha (1+x)^beta on [-1, 1], normalized."""

    kind = "Jacobi"

    def __init__(self, alpha, beta):
        alpha = float(alpha)
        beta = float(beta)
        if not (alpha > -1.0 and beta > -1.0):
            raise ParamOutOfRange("need alpha > -1 and beta > -1")
        self.params = {"alpha": alpha, "beta": beta}
        self.support = Support(-1.0, 1.0)
        self._norm = math.exp(-(alpha + beta + 1.0) * math.log(2.0)
                              - _lnbeta(alpha + 1.0, beta + 1.0))
        self.singular_left = beta < 0.0
        self.singular_right = alpha < 0.0
        self._check_normalized()

    def _pdf(self, x):
        a = self.params["alpha"]
        b = self.params["beta"]
        with np.errstate(divide="ignore"):
            return np.power(1.0 - x, a) * np.power(1.0 + x, b) * self._norm

    def _cdf(self, x):
        # (1+X)/2 is Beta-distributed with parameters (beta+1, alpha+1)
        return betainc(self.params["beta"] + 1.0, self.params["alpha"] + 1.0,
                       np.clip(0.5 * (1.0 + x), 0.0, 1.0))

    def _closed_moments(self):
        a = self.params["alpha"]
        b = self.params["beta"]
        m1 = (b - a) / (a + b + 2.0)
        var = 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 2.0) ** 2 * (a + b + 3.0))
        return m1, var + m1 * m1

    def closed_profile(self):
        a = self.params["alpha"]
        b = self.params["beta"]
        return lambda x: (1.0 - np.asarray(x, float) ** 2) / (a + b + 2.0)

    def default_sigma_hat_sq_half(self):
        a = self.params["alpha"]
        b = self.params["beta"]
        return 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 3.0) * (a + b + 2.0))


class Gamma(DistributionSpec):
    """Density x^alpha e^-x / Gamma(alpha+1) on [0, inf)."""

    kind = "Gamma"

    def __init__(self, alpha):
        alpha = float(alpha)
        if not alpha > -1.0:
            raise ParamOutOfRange("need alpha > -1")
        self.params = {"alpha": alpha}
        self.support = Support(0.0, math.inf)
        self._norm = math.exp(-math.lgamma(alpha + 1.0))
        self.singular_left = alpha < 0.0
        self._check_normalized()

    def _pdf(self, x):
        a = self.params["alpha"]
        with np.errstate(divide="ignore"):
            return np.power(x, a) * np.exp(-np.asarray(x, float)) * self._norm

    def _cdf(self, x):
        return gammainc(self.params["alpha"] + 1.0,
                        np.clip(x, 0.0, None))

    def _closed_moments(self):
        a = self.params["alpha"]
        return a + 1.0, (a + 1.0) * (a + 2.0)

    def closed_profile(self):
        return lambda x: np.asarray(x, float) * 1.0

    def default_sigma_hat_sq_half(self):
        return self.params["alpha"] + 1.0

    def _anchor(self):
        return self.params["alpha"] + 1.0

    def _scale_hint(self):
        return math.sqrt(self.params["alpha"] + 1.0) + 1.0


class Normal(DistributionSpec):
    """Gaussian with mean x0 and standard deviation sigma."""

    kind = "Normal"

    def __init__(self, x0=0.0, sigma=1.0):
        x0 = float(x0)
        sigma = float(sigma)
        if not sigma > 0.0:
            raise ParamOutOfRange("need sigma > 0")
        self.params = {"x0": x0, "sigma": sigma}
        self.support = Support(-math.inf, math.inf)
        self._check_normalized()

    def _pdf(self, x):
        x0 = self.params["x0"]
        s = self.params["sigma"]
        z = (np.asarray(x, float) - x0) / s
        return np.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))

    def _cdf(self, x):
        x0 = self.params["x0"]
        s = self.params["sigma"]
        return 0.5 * (1.0 + erf((np.asarray(x, float) - x0) / (s * math.sqrt(2.0))))

    def _closed_moments(self):
        x0 = self.params["x0"]
        s = self.params["sigma"]
        return x0, x0 * x0 + s * s

    def closed_profile(self):
        s2 = self.params["sigma"] ** 2
        return lambda x: np.asarray(x, float) * 0.0 + s2

    def default_sigma_hat_sq_half(self):
        return self.params["sigma"] ** 2

    def _anchor(self):
        return self.params["x0"]

    def _scale_hint(self):
        return self.params["sigma"]


class StudentCauchy(DistributionSpec):
    """Density (1+x^2)^-(alpha+1/2) / B(alpha, 1/2) on the line, alpha >= 2."""

    kind = "StudentCauchy"

    def __init__(self, alpha):
        alpha = float(alpha)
        if not alpha >= 2.0:
            raise ParamOutOfRange("need alpha >= 2")
        self.params = {"alpha": alpha}
        self.support = Support(-math.inf, math.inf)
        self._norm = math.exp(-_lnbeta(alpha, 0.5))
        self._check_normalized()

    def _pdf(self, x):
        a = self.params["alpha"]
        x = np.asarray(x, float)
        return np.power(1.0 + x * x, -(a + 0.5)) * self._norm

    def _cdf(self, x):
        a = self.params["alpha"]
        x = np.asarray(x, float)
        tail = 0.5 * betainc(a, 0.5, 1.0 / (1.0 + x * x))
        return np.where(x >= 0.0, 1.0 - tail, tail)

    def _closed_moments(self):
        a = self.params["alpha"]
        return 0.0, 1.0 / (2.0 * (a - 1.0))

    def closed_profile(self):
        a = self.params["alpha"]
        return lambda x: (1.0 + np.asarray(x, float) ** 2) / (2.0 * a - 1.0)

    def default_sigma_hat_sq_half(self):
        a = self.params["alpha"]
        return (2.0 * a - 1.0) / (2.0 * (a - 1.0))

    def _anchor(self):
        return 0.0

    def _scale_hint(self):
        return 2.0


class InverseGamma(DistributionSpec):
    """Density x^-(2 alpha + 1) e^(-1/x) / Gamma(2 alpha) on (0, inf)."""

    kind = "InverseGamma"

    def __init__(self, alpha):
        alpha = float(alpha)
        if not alpha >= 2.0:
            raise ParamOutOfRange("need alpha >= 2")
        self.params = {"alpha": alpha}
        self.support = Support(0.0, math.inf)
        self._lgnorm = math.lgamma(2.0 * alpha)
        self._check_normalized()

    def _pdf(self, x):
        a = self.params["alpha"]
        scalar = np.asarray(x).ndim == 0
        arr = np.atleast_1d(np.asarray(x, float))
        out = np.zeros_like(arr)
        m = arr > 0.0
        out[m] = np.exp(-(2.0 * a + 1.0) * np.log(arr[m]) - 1.0 / arr[m]
                        - self._lgnorm)
        return out[0] if scalar else out

    def _cdf(self, x):
        a = self.params["alpha"]
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            inv = np.where(x > 0.0, 1.0 / np.where(x > 0.0, x, 1.0), np.inf)
        return gammaincc(2.0 * a, inv)

    def _closed_moments(self):
        a = self.params["alpha"]
        m1 = 1.0 / (2.0 * a - 1.0)
        m2 = 1.0 / ((2.0 * a - 1.0) * (2.0 * a - 2.0))
        return m1, m2

    def closed_profile(self):
        a = self.params["alpha"]
        return lambda x: np.asarray(x, float) ** 2 / (2.0 * a - 1.0)

    def default_sigma_hat_sq_half(self):
        a = self.params["alpha"]
        return 1.0 / (2.0 * (a - 1.0) * (2.0 * a - 1.0))

    def _anchor(self):
        return 1.0 / (2.0 * self.params["alpha"] - 1.0)

    def _scale_hint(self):
        return 1.0


class FisherSnedecor(DistributionSpec):
    """F-density with nu1, nu2 degrees of freedom on (0, inf)."""

    kind = "FisherSnedecor"

    def __init__(self, nu1, nu2):
        nu1 = float(nu1)
        nu2 = float(nu2)
        if not (nu1 > 0.0 and nu2 > 0.0):
            raise ParamOutOfRange("need nu1 > 0 and nu2 > 0")
        self.params = {"nu1": nu1, "nu2": nu2}
        self.support = Support(0.0, math.inf)
        self._lgnorm = (0.5 * nu1 * (math.log(nu1) - math.log(nu2))
                        - _lnbeta(0.5 * nu1, 0.5 * nu2))
        self.singular_left = nu1 < 2.0
        self._check_normalized()

    def _pdf(self, x):
        n1 = self.params["nu1"]
        n2 = self.params["nu2"]
        x = np.asarray(x, float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x).astype(float)
        out = np.empty_like(xv)
        m = xv > 0.0
        out[m] = np.exp((0.5 * n1 - 1.0) * np.log(xv[m])
                        - 0.5 * (n1 + n2) * np.log1p(n1 * xv[m] / n2)
                        + self._lgnorm)
        if np.any(~m):
            if n1 > 2.0:
                at0 = 0.0
            elif n1 == 2.0:
                at0 = math.exp(self._lgnorm)
            else:
                at0 = math.inf
            out[~m] = at0
        return np.float64(out[0]) if scalar else out

    def _cdf(self, x):
        n1 = self.params["nu1"]
        n2 = self.params["nu2"]
        x = np.clip(np.asarray(x, float), 0.0, None)
        with np.errstate(invalid="ignore"):
            z = np.where(np.isinf(x), 1.0, n1 * x / (n2 + n1 * x))
        return betainc(0.5 * n1, 0.5 * n2, z)

    def _closed_moments(self):
        n1 = self.params["nu1"]
        n2 = self.params["nu2"]
        if n2 <= 4.0:
            raise MomentDivergence("second moment needs nu2 > 4")
        m1 = n2 / (n2 - 2.0)
        m2 = n2 * n2 * (n1 + 2.0) / (n1 * (n2 - 2.0) * (n2 - 4.0))
        return m1, m2

    def closed_profile(self):
        n1 = self.params["nu1"]
        n2 = self.params["nu2"]
        if n2 <= 2.0:
            return None
        scale = 2.0 * n2 / (n1 * (n2 - 2.0))

        def profile(x):
            x = np.asarray(x, float)
            return (x + (n1 / n2) * x * x) * scale

        return profile

    def default_sigma_hat_sq_half(self):
        n1 = self.params["nu1"]
        n2 = self.params["nu2"]
        if n2 <= 4.0:
            raise MomentDivergence("mean diffusion level needs nu2 > 4")
        return n2 * (n1 + n2 - 2.0) / ((n2 - 2.0) * (n2 - 4.0))

    def _anchor(self):
        n2 = self.params["nu2"]
        return n2 / (n2 - 2.0) if n2 > 2.0 else 1.0

    def _scale_hint(self):
        return max(1.0, 2.0 * self._anchor())


class Hyperexponential(DistributionSpec):
    """Mixture of two exponentials: p1 eta1 e^(-eta1 x) + p2 eta2 e^(-eta2 x)."""

    kind = "Hyperexponential"

    def __init__(self, p1, p2, eta1, eta2):
        p1 = float(p1)
        p2 = float(p2)
        eta1 = float(eta1)
        eta2 = float(eta2)
        if not (p1 >= 0.0 and p2 >= 0.0):
            raise ParamOutOfRange("need p1, p2 >= 0")
        if abs(p1 + p2 - 1.0) > 1e-12:
            raise ParamOutOfRange("need p1 + p2 = 1")
        if not (eta1 > 0.0 and eta2 > 0.0):
            raise ParamOutOfRange("need eta1, eta2 > 0")
        self.params = {"p1": p1, "p2": p2, "eta1": eta1, "eta2": eta2}
        self.support = Support(0.0, math.inf)
        self._check_normalized()

    def _pdf(self, x):
        p1, p2, e1, e2 = (self.params[k] for k in ("p1", "p2", "eta1", "eta2"))
        x = np.asarray(x, float)
        return p1 * e1 * np.exp(-e1 * x) + p2 * e2 * np.exp(-e2 * x)

    def _cdf(self, x):
        p1, p2, e1, e2 = (self.params[k] for k in ("p1", "p2", "eta1", "eta2"))
        x = np.asarray(x, float)
        return 1.0 - p1 * np.exp(-e1 * x) - p2 * np.exp(-e2 * x)

    def _closed_moments(self):
        p1, p2, e1, e2 = (self.params[k] for k in ("p1", "p2", "eta1", "eta2"))
        m1 = p1 / e1 + p2 / e2
        m2 = 2.0 * (p1 / e1 ** 2 + p2 / e2 ** 2)
        return m1, m2

    def closed_profile(self):
        p1, p2, e1, e2 = (self.params[k] for k in ("p1", "p2", "eta1", "eta2"))
        emin = min(e1, e2)

        def profile(x):
            x = np.asarray(x, float)
            # V(x)/pi(x) with V the integral of (m1 - z) pi(z) dz from 0 to x
            # in closed form; both share a factor exp(-emin x), divided out so
            # the ratio stays finite deep in the tail
            w1 = np.exp(-(e1 - emin) * x)
            w2 = np.exp(-(e2 - emin) * x)
            v = (p1 * w1 * (x + p2 * (1.0 / e1 - 1.0 / e2))
                 + p2 * w2 * (x + p1 * (1.0 / e2 - 1.0 / e1)))
            return v / (p1 * e1 * w1 + p2 * e2 * w2)

        return profile

    def _anchor(self):
        p1, p2, e1, e2 = (self.params[k] for k in ("p1", "p2", "eta1", "eta2"))
        return p1 / e1 + p2 / e2

    def _scale_hint(self):
        return 1.0 / min(self.params["eta1"], self.params["eta2"])


class CubicPearson(DistributionSpec):
    """Density ~ x^(alpha-1) (1-x)^(beta-1) (1-a x)^-(alpha+beta+1) on [0, 1].

    The normalizer and the closed moments are Gauss hypergeometric values;
    the quadrature route stays fully independent of them.
    """

    kind = "CubicPearson"

    def __init__(self, alpha, beta, a):
        alpha = float(alpha)
        beta = float(beta)
        a = float(a)
        if not (alpha > 0.0 and beta > 0.0):
            raise ParamOutOfRange("need alpha > 0 and beta > 0")
        if not abs(a) < 1.0:
            raise ParamOutOfRange("need |a| < 1")
        self.params = {"alpha": alpha, "beta": beta, "a": a}
        self.support = Support(0.0, 1.0)
        self._norm_f = numerics.hyp2f1(alpha + beta + 1.0, alpha,
                                       alpha + beta, a)
        self._ln_b = _lnbeta(alpha, beta)
        self._norm = math.exp(self._ln_b) * self._norm_f
        self.singular_left = alpha < 1.0
        self.singular_right = beta < 1.0
        self._check_normalized()

    def _pdf(self, x):
        al = self.params["alpha"]
        be = self.params["beta"]
        a = self.params["a"]
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            return (np.power(x, al - 1.0) * np.power(1.0 - x, be - 1.0)
                    * np.power(1.0 - a * x, -(al + be + 1.0)) / self._norm)

    def _closed_moments(self):
        al = self.params["alpha"]
        be = self.params["beta"]
        a = self.params["a"]
        m1 = (math.exp(_lnbeta(al + 1.0, be) - self._ln_b)
              * numerics.hyp2f1(al + be + 1.0, al + 1.0, al + be + 1.0, a)
              / self._norm_f)
        m2 = (math.exp(_lnbeta(al + 2.0, be) - self._ln_b)
              * numerics.hyp2f1(al + be + 1.0, al + 2.0, al + be + 2.0, a)
              / self._norm_f)
        return m1, m2

    def closed_profile(self):
        al = self.params["alpha"]
        be = self.params["beta"]
        a = self.params["a"]
        rate = al + be * (1.0 - a)

        def profile(x):
            x = np.asarray(x, float)
            return x * (1.0 - x) * (1.0 - a * x) / rate

        return profile

    def default_sigma_hat_sq_half(self):
        al = self.params["alpha"]
        be = self.params["beta"]
        a = self.params["a"]
        return (math.exp(_lnbeta(al + 1.0, be + 1.0) - self._ln_b)
                * numerics.hyp2f1(al + be, al + 1.0, al + be + 2.0, a)
                / self._norm_f)


class Custom(DistributionSpec):
    """Density given as a callable or a table on an explicit support."""

    kind = "Custom"

    def __init__(self, pdf, support: Support, *, check_mass=True,
                 anchor=None, scale_hint=None):
        if not callable(pdf):
            raise ValueError("pdf must be callable")
        if not isinstance(support, Support):
            lo, hi = support
            support = Support(float(lo), float(hi))
        self.params = {}
        self.support = support
        self._pdf_fn = pdf
        self._anchor_v = anchor
        self._scale_v = scale_hint
        if check_mass:
            self._check_normalized()

    @classmethod
    def from_table(cls, points, values, *, rescale=False):
        """Monotone-cubic interpolant of tabulated nonnegative samples."""
        pts = np.asarray(points, dtype=float)
        vals = np.asarray(values, dtype=float)
        if pts.ndim != 1 or pts.shape != vals.shape or pts.size < 4:
            raise ValueError("need matching 1-d arrays of at least 4 samples")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("pdf samples must be finite and nonnegative")
        interp = PchipInterpolator(pts, vals)
        if rescale:
            mass = numerics.integrate(interp, pts[0], pts[-1],
                                      tol=1e-13, rel_tol=1e-12).value
            if mass <= 0:
                raise ValueError("table has zero mass")
            interp = PchipInterpolator(pts, vals / mass)
        return cls(interp, Support(float(pts[0]), float(pts[-1])))

    def _pdf(self, x):
        return np.asarray(self._pdf_fn(np.asarray(x, float)), dtype=float)

    def _anchor(self):
        if self._anchor_v is not None:
            return self._anchor_v
        return super()._anchor()

    def _scale_hint(self):
        if self._scale_v is not None:
            return self._scale_v
        return super()._scale_hint()


class Mixture(Custom):
    """Convex combination of specs sharing one support; behaves as Custom."""

    def __init__(self, components, weights):
        self.components = list(components)
        self.weights = np.asarray(weights, dtype=float)

        def pdf(x):
            return sum(w * c._pdf(x)
                       for w, c in zip(self.weights, self.components))

        ref = self.components[0]
        super().__init__(pdf, ref.support, check_mass=False,
                         anchor=ref._anchor(), scale_hint=ref._scale_hint())

    def _cdf(self, x):
        parts = [c._cdf(x) for c in self.components]
        if any(p is None for p in parts):
            return None
        return sum(w * p for w, p in zip(self.weights, parts))

    def _closed_moments(self):
        mom = [c.moments() for c in self.components]
        m1 = float(np.sum(self.weights * np.array([m.m1 for m in mom])))
        m2 = float(np.sum(self.weights * np.array([m.m2 for m in mom])))
        return m1, m2


def mixture(specs, weights) -> Mixture:
    """Convex mixture of distribution specs with a common support."""
    specs = list(specs)
    w = np.asarray(weights, dtype=float)
    if len(specs) == 0 or w.shape != (len(specs),):
        raise BadWeights("need one weight per component")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
        raise BadWeights("weights must be nonnegative and sum to 1")
    s0 = specs[0].support
    for s in specs[1:]:
        if s.support != s0:
            raise SupportMismatch(
                "components must share one support, got %r vs %r"
                % (s.support, s0))
    return Mixture(specs, w)


_CATALOG = {
    "beta": (Beta, ("alpha", "beta")),
    "jacobi": (Jacobi, ("alpha", "beta")),
    "gamma": (Gamma, ("alpha",)),
    "normal": (Normal, ("x0", "sigma")),
    "studentcauchy": (StudentCauchy, ("alpha",)),
    "student": (StudentCauchy, ("alpha",)),
    "inversegamma": (InverseGamma, ("alpha",)),
    "reciprocalgamma": (InverseGamma, ("alpha",)),
    "fishersnedecor": (FisherSnedecor, ("nu1", "nu2")),
    "fisher": (FisherSnedecor, ("nu1", "nu2")),
    "hyperexponential": (Hyperexponential, ("p1", "p2", "eta1", "eta2")),
    "cubicpearson": (CubicPearson, ("alpha", "beta", "a")),
}


def _parse_bound(v):
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        try:
            return float(v)
        except ValueError as exc:
            raise SpecFileError("bad support bound %r" % (v,)) from exc
    if isinstance(v, (int, float)):
        return float(v)
    raise SpecFileError("bad support bound %r" % (v,))


def parse_spec(doc: dict) -> DistributionSpec:
    """Build a spec from a parsed key-value document."""
    if not isinstance(doc, dict):
        raise SpecFileError("spec document must be a mapping")
    kind = doc.get("kind")
    if not isinstance(kind, str):
        raise SpecFileError("missing or non-string 'kind'")
    key = kind.strip().lower().replace("_", "").replace("-", "")
    support = None
    if "support" in doc:
        raw = doc["support"]
        if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
            raise SpecFileError("'support' must be a [lower, upper] pair")
        support = Support(_parse_bound(raw[0]), _parse_bound(raw[1]))
    if key == "custom":
        if "grid" not in doc or "pdf" not in doc:
            raise SpecFileError("Custom spec needs 'grid' and 'pdf' arrays")
        try:
            spec = Custom.from_table(doc["grid"], doc["pdf"])
        except ValueError as exc:
            raise SpecFileError(str(exc)) from exc
        if support is not None and (support.lower != spec.support.lower
                                    or support.upper != spec.support.upper):
            raise SpecFileError("declared support does not match the grid")
        return spec
    if key not in _CATALOG:
        raise SpecFileError("unknown kind %r" % kind)
    cls, names = _CATALOG[key]
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise SpecFileError("'params' must be a mapping")
    unknown = set(params) - set(names)
    if unknown:
        raise SpecFileError("unknown params for %s: %s"
                            % (kind, ", ".join(sorted(unknown))))
    kwargs = {}
    for name in names:
        if name in params:
            v = params[name]
            if not isinstance(v, (int, float)):
                raise SpecFileError("param %r must be numeric" % name)
            kwargs[name] = float(v)
    try:
        spec = cls(**kwargs)
    except TypeError as exc:
        raise SpecFileError("missing required params for %s" % kind) from exc
    if support is not None:
        # a declared window truncates evaluation; it must keep the full mass
        lo = max(support.lower, spec.support.lower)
        hi = min(support.upper, spec.support.upper)
        inner = spec
        spec = Custom(inner._pdf, Support(lo, hi),
                      anchor=inner._anchor(), scale_hint=inner._scale_hint())
    return spec


def load_spec(path) -> DistributionSpec:
    """Read a JSON spec file; see parse_spec for the document shape."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecFileError("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise SpecFileError("invalid JSON in %s: %s" % (path, exc)) from exc
    return parse_spec(doc)
