"""Channel models: scalar memoryless densities and stationary Gaussian noise.

Scalar channels describe ``f(r | theta)`` for a single channel use. Vector
noise with memory is described by its covariance matrix; the AR(1) and
MA(1) families are built from their lag-one correlation ``rho``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .numkit import (
    NotPositiveDefiniteError,
    QuadratureResult,
    TridiagMatrix,
    as_sym_matrix,
    cholesky,
    integrate,
    integrate_real_line,
    integrate_semi_infinite,
    quadrature_rule,
    real_line_rule,
    semi_infinite_rule,
)

__all__ = [
    "ScalarChannel", "AwgnChannel", "GammaChannel", "CustomChannel",
    "NoiseCovariance", "ar1_covariance", "ma1_covariance", "rho_to_gamma",
    "load_covariance_csv", "DensityChecks", "scalar_density_checks",
]


class ScalarChannel:
    """Memoryless channel ``f(r | theta)`` on a real output.

    Subclasses provide :meth:`log_density` (vectorised in ``r``) and set
    ``support`` and ``theta_domain``. The score falls back to a central
    difference of the log-density when no analytic form is given.
    """

    support: tuple = (-math.inf, math.inf)
    theta_domain: tuple = (-math.inf, math.inf)

    def log_density(self, r, theta):
        raise NotImplementedError

    def density(self, r, theta):
        return np.exp(self.log_density(r, theta))

    def score(self, r, theta):
        """d/dtheta ln f(r | theta)."""
        h = max(1e-6, 1e-6 * abs(theta))
        return (self.log_density(r, theta + h) - self.log_density(r, theta - h)) / (2.0 * h)

    def fisher_information(self, theta):
        """Closed-form Fisher information, or ``None`` if the model has none."""
        return None

    def location(self, theta) -> float:
        """A point near the bulk of ``f(. | theta)`` (used to split quadratures)."""
        return float(theta)

    def spread(self, theta) -> float:
        """Width of the bulk of ``f(. | theta)`` (used to scale quadratures)."""
        return 1.0

    def check_theta(self, theta):
        lo, hi = self.theta_domain
        if not lo < theta < hi:
            raise ValueError(f"theta={theta} outside the open domain ({lo}, {hi})")

    def cdf(self, r, theta):
        lo = self.support[0]
        if r <= lo:
            return 0.0
        f = lambda x: self.density(x, theta)
        if math.isinf(lo):
            # int_{-inf}^r f(x) dx = int_r^inf f(2r - y) dy
            return integrate_semi_infinite(lambda y: f(2.0 * r - y), r,
                                           scale=self.spread(theta)).value
        return integrate(f, lo, r).value

    def quantile(self, q, theta):
        """Inverse CDF by bracketing; subclasses override with closed forms."""
        c, s = self.location(theta), self.spread(theta)
        lo = self.support[0]
        a, b, step = c - s, c + s, s
        while self.cdf(b, theta) < q:
            step *= 2.0
            b = c + step
        step = s
        while a > lo and self.cdf(a, theta) > q:
            step *= 2.0
            a = c - step
        a = max(a, lo)
        return brentq(lambda x: self.cdf(x, theta) - q, a, b, xtol=1e-12 * max(1.0, s))

    # -- quadrature over the output space ---------------------------------

    def integrate_output(self, g, center=None, scale=None, tol=1e-10, rtol=0.0) -> QuadratureResult:
        """Integral of ``g(r)`` over the output support.

        ``center``/``scale`` locate the bulk of ``g`` (defaults 0 and 1); they
        only steer the change of variables on unbounded supports.
        """
        lo, hi = self.support
        center = 0.0 if center is None else float(center)
        scale = 1.0 if scale is None else float(scale)
        if math.isinf(lo) and math.isinf(hi):
            return integrate_real_line(g, center=center, scale=scale, tol=tol, rtol=rtol)
        if math.isinf(hi):
            return integrate_semi_infinite(g, lo, tol=tol, rtol=rtol, scale=scale)
        if math.isinf(lo):
            return integrate_semi_infinite(lambda x: g(-x), -hi, tol=tol, rtol=rtol, scale=scale)
        return integrate(g, lo, hi, tol=tol, rtol=rtol)

    def output_rule(self, g, center=0.0, scale=1.0, tol=1e-10, rtol=0.0):
        """Nodes and weights over the output support adapted to ``g``."""
        lo, hi = self.support
        if math.isinf(lo) and math.isinf(hi):
            return real_line_rule(g, center=center, scale=scale, tol=tol, rtol=rtol)
        if math.isinf(hi):
            return semi_infinite_rule(g, lo, scale=scale, tol=tol, rtol=rtol)
        if math.isinf(lo):
            x, w, ok = semi_infinite_rule(lambda x: g(-x), -hi, scale=scale, tol=tol, rtol=rtol)
            return -x[::-1], w[::-1], ok
        return quadrature_rule(g, lo, hi, tol=tol, rtol=rtol)


class AwgnChannel(ScalarChannel):
    """Additive Gaussian noise, ``R = theta + Z`` with ``Z ~ N(0, N)``."""

    def __init__(self, noise_power: float = 1.0):
        if not noise_power > 0:
            raise ValueError("noise_power must be positive")
        self.noise_power = float(noise_power)

    def __repr__(self):
        return f"AwgnChannel(noise_power={self.noise_power!r})"

    def log_density(self, r, theta):
        N = self.noise_power
        r = np.asarray(r, dtype=np.float64)
        return -0.5 * (r - theta) ** 2 / N - 0.5 * math.log(2.0 * math.pi * N)

    def score(self, r, theta):
        return (np.asarray(r, dtype=np.float64) - theta) / self.noise_power

    def fisher_information(self, theta):
        return 1.0 / self.noise_power

    def spread(self, theta):
        return math.sqrt(self.noise_power)

    def cdf(self, r, theta):
        return float(special.ndtr((r - theta) / math.sqrt(self.noise_power)))

    def quantile(self, q, theta):
        return float(theta + math.sqrt(self.noise_power) * special.ndtri(q))


class GammaChannel(ScalarChannel):
    """Gamma-distributed output with shape ``kappa`` and scale ``theta``."""

    support = (0.0, math.inf)
    theta_domain = (0.0, math.inf)

    def __init__(self, shape: float):
        if not shape > 0:
            raise ValueError("shape must be positive")
        self.shape = float(shape)
        self._lgk = math.lgamma(self.shape)

    def __repr__(self):
        return f"GammaChannel(shape={self.shape!r})"

    def log_density(self, r, theta):
        k = self.shape
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (k - 1.0) * np.log(r) - k * math.log(theta) - r / theta - self._lgk
        return np.where(r > 0, out, -np.inf)

    def score(self, r, theta):
        return -self.shape / theta + np.asarray(r, dtype=np.float64) / theta ** 2

    def fisher_information(self, theta):
        return self.shape / theta ** 2

    def location(self, theta):
        return self.shape * theta

    def spread(self, theta):
        return max(self.shape, 1.0) * theta

    def cdf(self, r, theta):
        return float(special.gammainc(self.shape, r / theta)) if r > 0 else 0.0

    def quantile(self, q, theta):
        return float(theta * special.gammaincinv(self.shape, q))


class CustomChannel(ScalarChannel):
    """Channel defined by a user-supplied vectorised log-density."""

    def __init__(self, log_density: Callable, support=(-math.inf, math.inf),
                 theta_domain=(-math.inf, math.inf), score: Callable | None = None,
                 location: Callable | None = None, spread: Callable | None = None):
        self._logpdf = log_density
        self._score = score
        self._loc = location
        self._spread = spread
        self.support = tuple(support)
        self.theta_domain = tuple(theta_domain)

    def log_density(self, r, theta):
        return self._logpdf(np.asarray(r, dtype=np.float64), theta)

    def score(self, r, theta):
        if self._score is not None:
            return self._score(np.asarray(r, dtype=np.float64), theta)
        return super().score(r, theta)

    def location(self, theta):
        return float(self._loc(theta)) if self._loc else float(theta)

    def spread(self, theta):
        return float(self._spread(theta)) if self._spread else 1.0


class DensityChecks(NamedTuple):
    """Residuals of the three regularity identities at one theta."""

    normalization: float
    score_mean: float
    second_derivative: float

    def max_abs(self) -> float:
        return max(abs(self.normalization), abs(self.score_mean), abs(self.second_derivative))


def scalar_density_checks(ch: ScalarChannel, theta: float, tol: float = 1e-11) -> DensityChecks:
    """Numerically check int f = 1, int df/dtheta = 0 and int d2f/dtheta2 = 0.

    The second derivative is a central difference of the density itself with
    step ``1e-3 * max(1, |theta|)``; the integral of its truncation error
    vanishes for regular densities, so only rounding remains; that integral
    is therefore run at an absolute tolerance of at least ``1e-9``.
    """
    ch.check_theta(theta)
    c, s = ch.location(theta), ch.spread(theta)
    h = 1e-3 * max(1.0, abs(theta))

    def f(r):
        return ch.density(r, theta)

    def df(r):
        return ch.density(r, theta) * ch.score(r, theta)

    def d2f(r):
        return (ch.density(r, theta + h) - 2.0 * ch.density(r, theta) + ch.density(r, theta - h)) / (h * h)

    # the differenced integrand carries rounding noise of order eps * f / h^2
    tols = (tol, tol, max(tol, 1e-9))
    results = [ch.integrate_output(g, c, s, tol=t) for g, t in zip((f, df, d2f), tols)]
    return DensityChecks(results[0].value - 1.0, results[1].value, results[2].value)


# --------------------------------------------------------------------------
# Gaussian noise with memory
# --------------------------------------------------------------------------

_MODELS = ("ar1", "ma1", "custom")


@dataclass(frozen=True)
class NoiseCovariance:
    """Covariance of stationary zero-mean Gaussian noise over ``n`` channel uses.

    ``rho`` is the lag-one correlation and ``gamma`` the MA(1) coefficient,
    when the model defines them.
    """

    matrix: np.ndarray = field(repr=False)
    model: str = "custom"
    rho: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}")
        m = as_sym_matrix(self.matrix, "covariance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def tridiagonal(self) -> TridiagMatrix:
        """Band form; only valid for tridiagonal covariances such as MA(1)."""
        m = self.matrix
        if self.n > 2 and np.any(np.triu(m, 2) != 0):
            raise ValueError("covariance is not tridiagonal")
        return TridiagMatrix(np.diag(m).copy(), np.diag(m, 1).copy())

    def validate(self, stationary=True):
        """Raise unless the matrix is positive definite (and constant-diagonal)."""
        m = self.matrix
        d = np.diag(m)
        if stationary and not np.allclose(d, d[0], rtol=1e-12, atol=0.0):
            raise ValueError("stationary noise needs a constant diagonal")
        try:
            cholesky(m)
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError("noise covariance is not positive definite",
                                           pivot=exc.pivot) from None
        return self


def ar1_covariance(rho: float, n: int) -> NoiseCovariance:
    """``[C]_ik = rho^|i-k|`` (unit-variance AR(1) noise)."""
    if not abs(rho) < 1:
        raise ValueError(f"AR(1) needs |rho| < 1, got {rho}")
    if n < 1:
        raise ValueError("n must be >= 1")
    lag = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return NoiseCovariance(float(rho) ** lag, "ar1", rho=float(rho))


def rho_to_gamma(rho: float) -> float:
    """Invertible MA(1) coefficient (|gamma| < 1) with ``-gamma/(1+gamma^2) = rho``."""
    if not abs(rho) < 0.5:
        raise ValueError(f"MA(1) needs |rho| < 0.5, got {rho}")
    # cancellation-free form of (-1 + sqrt(1 - 4 rho^2)) / (2 rho)
    return -2.0 * rho / (1.0 + math.sqrt(1.0 - 4.0 * rho * rho))


def ma1_covariance(rho: float, n: int) -> NoiseCovariance:
    """Covariance of ``Z_i = X_i - gamma X_{i-1}`` with standard normal ``X``.

    Diagonal ``1 + gamma^2``, first off-diagonal ``-gamma``; the variance is
    not rescaled to one.
    """
    g = rho_to_gamma(rho)
    if n < 1:
        raise ValueError("n must be >= 1")
    T = TridiagMatrix.toeplitz(1.0 + g * g, -g, n)
    return NoiseCovariance(T.to_dense(), "ma1", rho=float(rho), gamma=g)


def load_covariance_csv(path) -> NoiseCovariance:
    """Read a square comma-separated matrix (no header) as custom noise."""
    m = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"covariance file must be square, got {m.shape}")
    sym = 0.5 * (m + m.T)
    if not np.allclose(m, sym, rtol=1e-12, atol=1e-14):
        raise ValueError("covariance file is not symmetric")
    return NoiseCovariance(sym, "custom").validate()
