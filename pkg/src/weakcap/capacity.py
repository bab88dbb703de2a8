"""Capacity formulas: weak-signal approximations, bounds and exact references.

All values are in nats; convert with :attr:`CapacityEstimate.bits` at
presentation time only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlog1py

from .channels import NoiseCovariance, ScalarChannel, ar1_covariance, ma1_covariance
from .fisher import FisherMatrix, IllConditionedError, ar1_fisher, fisher_gaussian_vector, fisher_scalar, ma1_fisher
from .numkit import QuadratureError, integrate, is_psd, sym_eigen, trace_product

__all__ = [
    "CapacityEstimate", "InputCovariance", "mi_weak", "optimal_covariance",
    "c_high_memoryless", "c_high_memory", "c_high_per_power", "ar1_mi_per_use",
    "ar1_capacity", "c_bin", "c_low", "shannon_awgn", "water_filling",
    "exact_colored_capacity", "waterfill_smallP", "redundancy_mi", "two_use_mi",
    "PSD_VIOLATION", "ILL_CONDITIONED", "QUADRATURE_WARNING",
]

PSD_VIOLATION = "psd_violation"
ILL_CONDITIONED = "ill_conditioned"
QUADRATURE_WARNING = "quadrature_warning"

LN2 = math.log(2.0)
CORRELATION_MARGIN = 1e-9


@dataclass(frozen=True)
class CapacityEstimate:
    nats: float
    method: str
    per_channel_use: bool = True
    flags: frozenset = frozenset()
    details: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bits(self) -> float:
        return self.nats / LN2

    def __float__(self):
        return float(self.nats)


@dataclass(frozen=True)
class InputCovariance:
    """Stationary input covariance ``sigma2 * corr`` with its PSD status."""

    matrix: np.ndarray = field(repr=False)
    sigma2: float
    psd: bool = True
    completion: str = "sign"

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_correlation(cls, corr, sigma2):
        corr = np.asarray(corr, dtype=np.float64)
        return cls(sigma2 * corr, float(sigma2), is_psd(corr))


def _as_matrix(x):
    return x.matrix if hasattr(x, "matrix") else np.asarray(x, dtype=np.float64)


def mi_weak(J, C) -> float:
    """Second-order mutual information ``tr(J C) / 2`` in nats."""
    return 0.5 * trace_product(_as_matrix(J), _as_matrix(C))


def _balanced_signs(signs):
    """Vector ``s`` with ``signs[i,k] == s_i s_k`` on every nonzero entry, or None."""
    n = signs.shape[0]
    s = np.zeros(n)
    for root in range(n):
        if s[root]:
            continue
        s[root] = 1.0
        stack = [root]
        while stack:
            i = stack.pop()
            nb = np.flatnonzero(signs[i])
            nb = nb[nb != i]
            want = s[i] * signs[i, nb]
            seen = s[nb] != 0
            if np.any(s[nb][seen] != want[seen]):
                return None
            fresh = nb[~seen]
            s[fresh] = want[~seen]
            stack.extend(fresh.tolist())
    return s


def optimal_covariance(J, sigma2: float, margin: float = CORRELATION_MARGIN) -> InputCovariance:
    """Input covariance maximising ``tr(J C)`` at fixed variance ``sigma2``.

    Off-diagonal correlations follow ``sgn(J_ik)`` clamped to ``+-(1-margin)``.
    Entries where ``J_ik == 0`` do not affect the trace; they are left at zero
    unless that makes the matrix indefinite, in which case they are filled
    from a sign vector ``s`` with ``sgn(J_ik) = s_i s_k`` when one exists
    (``completion="rank_one"``). Without such a completion the matrix is
    returned with ``psd=False``.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    Jm = _as_matrix(J)
    n = Jm.shape[0]
    signs = np.sign(Jm)
    np.fill_diagonal(signs, 1.0)
    off = ~np.eye(n, dtype=bool)
    has_zero = bool(np.any(signs[off] == 0))

    def clamp(S):
        C = (1.0 - margin) * S
        np.fill_diagonal(C, 1.0)
        return sigma2 * C

    s = _balanced_signs(signs)
    if not has_zero and s is not None:
        return InputCovariance(clamp(np.outer(s, s)), float(sigma2), True)
    C = clamp(signs)
    if not np.any(signs[off]):
        return InputCovariance(C, float(sigma2), True)
    if is_psd(C):
        return InputCovariance(C, float(sigma2), True)
    if s is not None:
        return InputCovariance(clamp(np.outer(s, s)), float(sigma2), True, "rank_one")
    return InputCovariance(C, float(sigma2), False)


def c_high_memoryless(J_scalar: float, delta_theta: float) -> CapacityEstimate:
    """High-noise capacity ``delta_theta^2 J / 2`` of a memoryless channel."""
    if J_scalar < 0 or delta_theta < 0:
        raise ValueError("J and delta_theta must be non-negative")
    return CapacityEstimate(0.5 * delta_theta ** 2 * float(J_scalar), "high")


def c_high_memory(J: FisherMatrix, delta_theta: float) -> CapacityEstimate:
    """High-noise capacity per use, ``delta_theta^2/(2n) sum |J_ik|`` at finite n.

    Flags ``psd_violation`` when no proper covariance realises the sign pattern;
    the value is then an over-estimate.
    """
    Jm = _as_matrix(J)
    n = Jm.shape[0]
    nats = delta_theta ** 2 / (2.0 * n) * float(np.abs(Jm).sum())
    cov = optimal_covariance(Jm, max(delta_theta ** 2, 1e-300))
    flags = frozenset() if cov.psd else frozenset({PSD_VIOLATION})
    return CapacityEstimate(nats, "high", True, flags, {"n": n, "completion": cov.completion})


def _memory_fisher(model, rho, n):
    if model == "ar1":
        return ar1_fisher(rho, n)
    if model == "ma1":
        return ma1_fisher(rho, n)
    raise ValueError(f"unknown noise model {model!r}")


def c_high_per_power(model: str, rho: float, n: int = 2000,
                     check_convergence: bool = False) -> CapacityEstimate:
    """``C_high / P`` for AR(1) or MA(1) noise evaluated at ``n`` uses.

    With ``check_convergence`` the value is recomputed at ``2n`` and the
    difference stored as ``details["n_doubling_delta"]``.
    """
    try:
        est = c_high_memory(_memory_fisher(model, rho, n), 1.0)
    except IllConditionedError as exc:
        return CapacityEstimate(math.nan, "high", True, frozenset({ILL_CONDITIONED}),
                                {"n": n, "condition": exc.condition})
    details = dict(est.details)
    if check_convergence:
        twice = c_high_memory(_memory_fisher(model, rho, 2 * n), 1.0)
        details["n_doubling_delta"] = twice.nats - est.nats
    return CapacityEstimate(est.nats, "high", True, est.flags, details)


def ar1_mi_per_use(P: float, rho: float, c: float) -> float:
    """Weak-signal MI per use for AR(1) noise and lag-one input correlation ``c``.

    ``c = +-1`` is accepted as the limiting value.
    """
    if not abs(rho) < 1 or not abs(c) <= 1 or not P > 0:
        raise ValueError("need |rho| < 1, |c| <= 1 and P > 0")
    return 0.5 * P * (rho * rho + 1.0 - 2.0 * c * rho) / (1.0 - rho * rho)


def ar1_capacity(P: float, rho: float) -> CapacityEstimate:
    """Closed-form high-noise capacity per use for AR(1) noise."""
    if not abs(rho) < 1:
        raise ValueError(f"AR(1) needs |rho| < 1, got {rho}")
    if not P > 0:
        raise ValueError("P must be positive")
    a = abs(rho)
    return CapacityEstimate(0.5 * P * (rho * rho + 1.0 + 2.0 * a) / (1.0 - rho * rho), "high")


def _psi(x):
    """``ln 2 - H_b((1+x)/2)`` in nats: MI contribution of a binary posterior."""
    x = np.asarray(x, dtype=np.float64)
    x2 = x * x
    series = x2 * (0.5 + x2 * (1.0 / 12.0 + x2 / 30.0))
    exact = 0.5 * (xlog1py(1.0 + x, x) + xlog1py(1.0 - x, -x))
    return np.where(np.abs(x) < 1e-4, series, exact)


def _binary_mixture(ch, theta0, delta_theta):
    lo, hi = theta0 - delta_theta, theta0 + delta_theta

    def parts(r):
        lm = ch.log_density(r, lo)
        lp = ch.log_density(r, hi)
        live = np.isfinite(lm) | np.isfinite(lp)
        lm = np.where(live, lm, 0.0)
        lp = np.where(live, lp, 0.0)
        p = np.where(live, np.exp(np.logaddexp(lm, lp) - LN2), 0.0)
        x = np.tanh(0.5 * (lp - lm))
        return p, x

    return parts


def _check_pair(ch, theta0, delta_theta):
    if delta_theta < 0:
        raise ValueError("delta_theta must be non-negative")
    ch.check_theta(theta0 - delta_theta)
    ch.check_theta(theta0 + delta_theta)


def c_bin(ch: ScalarChannel, theta0: float, delta_theta: float, rtol: float = 1e-10) -> CapacityEstimate:
    """MI of the equiprobable input ``{theta0 - dt, theta0 + dt}`` (a capacity lower bound).

    Written as ``int p(r) psi(x(r)) dr`` with ``p`` the mixture density and
    ``x = tanh(llr/2)`` the posterior bias, so no two large terms cancel when
    ``delta_theta`` is small.
    """
    _check_pair(ch, theta0, delta_theta)
    if delta_theta == 0:
        return CapacityEstimate(0.0, "bin")
    parts = _binary_mixture(ch, theta0, delta_theta)

    def integrand(r):
        p, x = parts(r)
        return p * _psi(x)

    res = ch.integrate_output(integrand, ch.location(theta0), ch.spread(theta0) + delta_theta,
                              tol=1e-300, rtol=rtol)
    flags = frozenset() if res.converged else frozenset({QUADRATURE_WARNING})
    nats = min(max(res.value, 0.0), LN2)
    return CapacityEstimate(nats, "bin", True, flags, {"abs_error": res.abs_error_estimate})


def c_low(ch: ScalarChannel, theta_lo: float, theta_hi: float, rtol: float = 1e-12) -> CapacityEstimate:
    """Low-noise bound ``ln( int sqrt(J) dtheta / sqrt(2 pi e) )``; may be negative."""
    if not theta_lo < theta_hi:
        raise ValueError("need theta_lo < theta_hi")
    ch.check_theta(theta_lo)
    ch.check_theta(theta_hi)

    def root_j(thetas):
        return np.sqrt([fisher_scalar(ch, float(t), method="auto") for t in thetas])

    res = integrate(root_j, theta_lo, theta_hi, tol=1e-300, rtol=rtol)
    if not res.converged:
        raise QuadratureError("integral of sqrt(J) did not converge", res)
    return CapacityEstimate(math.log(res.value / math.sqrt(2.0 * math.pi * math.e)), "low")


def shannon_awgn(P: float, N: float) -> CapacityEstimate:
    """Power-constrained AWGN capacity ``ln(1 + P/N) / 2``."""
    if not N > 0:
        raise ValueError("noise power must be positive")
    if P < 0:
        raise ValueError("power must be non-negative")
    return CapacityEstimate(0.5 * math.log1p(P / N), "exact_awgn")


def water_filling(levels, P: float):
    """Allocate total power ``n*P`` over noise levels ``levels``.

    Returns ``(m, nu)`` with ``m_i = max(0, nu - levels_i)`` and
    ``sum(m) = n*P``. The water level is found exactly: with levels sorted
    ascending, ``nu_k = (nP + sum_{i<=k} level_i) / k`` for the largest ``k``
    with ``level_k < nu_k``.
    """
    lam = np.asarray(levels, dtype=np.float64).ravel()
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("noise levels must be positive")
    if not P > 0:
        raise ValueError("P must be positive")
    n = lam.size
    srt = np.sort(lam)
    k = np.arange(1, n + 1)
    nu_k = (n * P + np.cumsum(srt)) / k
    kk = int(np.flatnonzero(srt < nu_k)[-1]) + 1
    nu = float(nu_k[kk - 1])
    # m_i = (nP + sum_j (a_j - a_i)) / k over the active levels a: built from
    # level differences so that nP is not lost against large noise levels
    m = np.zeros(n)
    on = lam <= srt[kk - 1]
    a = lam[on]
    m[on] = np.maximum(0.0, (n * P + (srt[:kk][None, :] - a[:, None]).sum(axis=1)) / kk)
    return m, nu


def _waterfill_solution(cov: NoiseCovariance, P: float):
    lam, Q = sym_eigen(cov.matrix)
    if lam[0] <= 0:
        raise IllConditionedError("noise covariance is not positive definite", math.inf)
    m, nu = water_filling(lam, P)
    C_in = (Q * m) @ Q.T
    C_in = 0.5 * (C_in + C_in.T)
    return lam, Q, m, nu, C_in


def exact_colored_capacity(cov: NoiseCovariance, P: float) -> CapacityEstimate:
    """Exact capacity per use of ``R = Theta + Z`` under average power ``P``.

    ``details`` carries the noise eigenvalues, the power allocation ``m``,
    the water level and the optimal Gaussian input covariance.
    """
    lam, Q, m, nu, C_in = _waterfill_solution(cov, P)
    n = lam.size
    nats = float(np.sum(np.log1p(m / lam))) / (2.0 * n)
    return CapacityEstimate(nats, "waterfill", True, frozenset(), {
        "eigenvalues": lam, "powers": m, "water_level": nu,
        "input_covariance": InputCovariance(C_in, float(P)), "n": n,
    })


def waterfill_smallP(cov: NoiseCovariance, P: float) -> CapacityEstimate:
    """First-order (small power) expansion of the water-filling capacity.

    Evaluated as ``tr(J C_in) / (2n)`` with ``J = C_Z^{-1}``; the eigenbasis
    form ``tr(Lambda^{-1} M) / (2n)`` is kept in ``details["eigen_form"]``.
    """
    lam, Q, m, nu, C_in = _waterfill_solution(cov, P)
    n = lam.size
    J = fisher_gaussian_vector(cov)
    nats = trace_product(J.matrix, C_in) / (2.0 * n)
    eigen_form = float(np.sum(m / lam)) / (2.0 * n)
    return CapacityEstimate(nats, "waterfill_smallP", True, frozenset(), {
        "eigen_form": eigen_form, "powers": m, "eigenvalues": lam, "n": n,
    })


def _phi(u):
    """``(1+u) ln(1+u) - u``, accurate near zero."""
    u = np.asarray(u, dtype=np.float64)
    series = u * u * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 12.0 - u / 20.0)))
    return np.where(np.abs(u) < 1e-3, series, xlog1py(1.0 + u, u) - u)


def _pair_rule(ch, theta0, delta_theta, rtol):
    parts = _binary_mixture(ch, theta0, delta_theta)

    def shape(r):
        p, x = parts(r)
        return p * (x * x + delta_theta ** 2)

    r, w, ok = ch.output_rule(shape, ch.location(theta0), ch.spread(theta0) + delta_theta,
                              tol=1e-300, rtol=rtol)
    p, x = parts(r)
    return w * p, x, ok


def redundancy_mi(ch: ScalarChannel, theta0: float, delta_theta: float, rtol: float = 1e-12) -> float:
    """``I(R1; R2)`` for two uses driven by one equiprobable ``theta0 +- dt`` input.

    The joint density is ``p(r1) p(r2) (1 + x1 x2)`` with ``x`` the posterior
    bias, so the divergence becomes ``int int p1 p2 phi(x1 x2)`` with
    ``phi(u) = (1+u) ln(1+u) - u >= 0``; it is integrated on the tensor
    product of a 1-D rule adapted to ``p x^2``.
    """
    _check_pair(ch, theta0, delta_theta)
    if delta_theta == 0:
        return 0.0
    wp, x, _ = _pair_rule(ch, theta0, delta_theta, rtol)
    return max(float(wp @ _phi(np.outer(x, x)) @ wp), 0.0)


def two_use_mi(ch: ScalarChannel, theta0: float, delta_theta: float, rtol: float = 1e-12) -> float:
    """``I(Theta; R1, R2)`` for the same fully dependent binary input.

    Integrates the binary-posterior form of the pair output directly; it
    should equal ``2 * c_bin - redundancy_mi``.
    """
    _check_pair(ch, theta0, delta_theta)
    if delta_theta == 0:
        return 0.0
    wp, x, _ = _pair_rule(ch, theta0, delta_theta, rtol)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    joint = np.outer(wp, wp) * (1.0 + X1 * X2)
    # posterior bias of the pair: tanh(a + b) with tanh a = x1, tanh b = x2
    with np.errstate(divide="ignore", invalid="ignore"):
        bias = np.where(np.abs(1.0 + X1 * X2) > 0, (X1 + X2) / (1.0 + X1 * X2), 0.0)
    return float(np.sum(joint * _psi(np.clip(bias, -1.0, 1.0))))
