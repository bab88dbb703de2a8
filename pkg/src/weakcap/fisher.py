"""Fisher information for scalar channels and Gaussian noise with memory."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import CustomChannel, NoiseCovariance, ScalarChannel, rho_to_gamma
from .numkit import QuadratureError, TridiagMatrix, as_sym_matrix, spd_inverse, tridiag_solve

__all__ = [
    "FisherMatrix", "IllConditionedError", "fisher_scalar", "fisher_gaussian_vector",
    "ar1_fisher", "ma1_fisher", "MAX_CONDITION",
]

MAX_CONDITION = 1e12


class IllConditionedError(ArithmeticError):
    """The covariance is too close to singular for a trustworthy inverse."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class FisherMatrix:
    """Fisher information matrix ``J(theta0 | R)`` over ``n`` channel uses."""

    matrix: np.ndarray = field(repr=False)
    theta0: float | None = None
    condition: float | None = None

    def __post_init__(self):
        m = as_sym_matrix(self.matrix, "Fisher matrix")
        if np.any(np.diag(m) <= 0):
            raise ValueError("Fisher matrix needs a positive diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def scalar(cls, value: float, n: int = 1, theta0=None):
        """Diagonal Fisher matrix of ``n`` uses of a memoryless channel."""
        return cls(float(value) * np.eye(n), theta0)


def fisher_scalar(ch: ScalarChannel, theta0: float, method: str = "quadrature",
                  rtol: float = 1e-11) -> float:
    """Fisher information ``E[(d/dtheta ln f)^2]`` of a memoryless channel.

    Parameters
    ----------
    ch : ScalarChannel
    theta0 : float
        Evaluation point inside ``ch.theta_domain``.
    method : {"quadrature", "analytic", "auto"}
        ``"quadrature"`` integrates ``score^2 * f`` over the output support;
        ``"analytic"`` uses the channel's closed form (error if it has none);
        ``"auto"`` prefers the closed form.
    rtol : float
        Relative tolerance of the quadrature. Channels without an analytic
        score carry about ``1e-10`` relative noise from the finite
        difference, so they are integrated at ``max(rtol, 1e-8)``.
    """
    ch.check_theta(theta0)
    if method in ("analytic", "auto"):
        j = ch.fisher_information(theta0)
        if j is not None:
            return float(j)
        if method == "analytic":
            raise ValueError(f"{ch!r} has no closed-form Fisher information")
    elif method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    if _numeric_score(ch):
        rtol = max(rtol, 1e-8)

    def integrand(r):
        s = ch.score(r, theta0)
        return s * s * ch.density(r, theta0)

    res = ch.integrate_output(integrand, ch.location(theta0), ch.spread(theta0),
                              tol=1e-300, rtol=rtol)
    if not res.converged:
        raise QuadratureError(f"Fisher information quadrature failed at theta={theta0}", res)
    if res.value < 0:
        raise QuadratureError(f"negative Fisher information {res.value} at theta={theta0}", res)
    return res.value


def _numeric_score(ch):
    if isinstance(ch, CustomChannel):
        return ch._score is None
    return type(ch).score is ScalarChannel.score


def _condition(norm1, inverse):
    return float(norm1 * np.max(np.sum(np.abs(inverse), axis=0)))


def fisher_gaussian_vector(cov: NoiseCovariance) -> FisherMatrix:
    """``J = C_Z^{-1}`` for additive Gaussian noise (independent of theta)."""
    C = cov.matrix
    J = spd_inverse(C)
    cond = _condition(np.max(np.sum(np.abs(C), axis=0)), J)
    if cond > MAX_CONDITION:
        raise IllConditionedError(f"noise covariance condition ~{cond:.3g}", cond)
    return FisherMatrix(J, condition=cond)


def ar1_fisher(rho: float, n: int) -> FisherMatrix:
    """Closed-form tridiagonal inverse of the AR(1) covariance ``rho^|i-k|``."""
    if not abs(rho) < 1:
        raise ValueError(f"AR(1) needs |rho| < 1, got {rho}")
    if n < 2:
        raise ValueError("n must be >= 2")
    diag = np.full(n, 1.0 + rho * rho)
    diag[0] = diag[-1] = 1.0
    J = (np.diag(diag) - rho * (np.eye(n, k=1) + np.eye(n, k=-1))) / (1.0 - rho * rho)
    return FisherMatrix(J)


def ma1_fisher(rho: float, n: int) -> FisherMatrix:
    """Inverse of the MA(1) covariance by ``n`` tridiagonal LDL^T solves.

    Raises :class:`IllConditionedError` when ``||C||_1 ||C^{-1}||_1`` exceeds
    ``MAX_CONDITION``, which happens as ``|rho|`` approaches 0.5.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    g = rho_to_gamma(rho)
    T = TridiagMatrix.toeplitz(1.0 + g * g, -g, n)
    J = tridiag_solve(T, np.eye(n))
    cond = _condition(T.norm1(), J)
    if cond > MAX_CONDITION:
        raise IllConditionedError(f"MA(1) covariance at rho={rho}, n={n}: condition ~{cond:.3g}", cond)
    asym = np.max(np.abs(J - J.T))
    if asym > 1e-9 * np.max(np.abs(J)):
        raise IllConditionedError(f"MA(1) inverse lost symmetry ({asym:.2e})", cond)
    return FisherMatrix(0.5 * (J + J.T), condition=cond)
