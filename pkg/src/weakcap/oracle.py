"""Reference capacities independent of the weak-signal formulas.

Two routes: exact mutual information of a finitely supported input by
quadrature, and Blahut-Arimoto on a channel whose output has been binned.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ._accel import njit, pick
from .channels import AwgnChannel, ScalarChannel
from .numkit import QuadratureError
from .numkit.quadrature import NODES, W_KRONROD

__all__ = [
    "DiscreteInputChannel", "BAResult", "discretize", "blahut_arimoto",
    "exact_awgn_amplitude_capacity", "mi_discrete_input",
]

ROW_TOL = 1e-9
SUPPORT_THRESHOLD = 1e-6
MAX_RELAXATION = 1e4


@dataclass(frozen=True)
class DiscreteInputChannel:
    """Inputs ``theta_j`` and the ``m x K`` matrix of output-cell probabilities."""

    inputs: np.ndarray
    transition: np.ndarray = field(repr=False)
    bin_edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=np.float64).ravel()
        W = np.asarray(self.transition, dtype=np.float64)
        e = np.asarray(self.bin_edges, dtype=np.float64).ravel()
        if W.ndim != 2 or W.shape[0] != x.size:
            raise ValueError("transition must be (m, K) with one row per input")
        m, K = W.shape
        if m < 2 or K < 2:
            raise ValueError(f"need m >= 2 inputs and K >= 2 cells, got {m}, {K}")
        if e.size != K + 1 or np.any(np.diff(e) <= 0):
            raise ValueError("bin_edges must be K+1 increasing values")
        if np.any(W < 0) or np.max(np.abs(W.sum(axis=1) - 1.0)) > ROW_TOL:
            raise ValueError("transition rows must be probability vectors")
        for name, a in (("inputs", x), ("transition", W), ("bin_edges", e)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def m(self) -> int:
        return self.transition.shape[0]

    @property
    def K(self) -> int:
        return self.transition.shape[1]


@dataclass(frozen=True)
class BAResult:
    """Blahut-Arimoto outcome.

    ``capacity`` is the mutual information of ``input_dist`` (the lower end
    of the bracket); the true grid capacity lies in ``[capacity, upper]``.
    """

    capacity: float
    input_dist: np.ndarray
    upper: float
    iterations: int
    converged: bool
    history: np.ndarray = field(repr=False)

    def __iter__(self):
        yield self.capacity
        yield self.input_dist

    def effective_support(self, inputs, threshold=SUPPORT_THRESHOLD):
        """Inputs carrying more than ``threshold`` probability."""
        return np.asarray(inputs)[self.input_dist > threshold]


def _cell_probabilities(ch, theta, edges):
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    x = 0.5 * (hi + lo)[:, None] + half[:, None] * NODES[None, :]
    fx = ch.density(x.ravel(), theta).reshape(x.shape)
    return half * (fx @ W_KRONROD)


def discretize(ch: ScalarChannel, inputs, K: int = 800, coverage: float = 1.0 - 1e-10) -> DiscreteInputChannel:
    """Bin the output of ``ch`` into ``K`` equal cells.

    The output range is the union of the central ``coverage`` intervals of
    every ``f(. | theta_j)``; each cell probability is a 15-point Kronrod
    sum and rows are renormalised to absorb the truncated tails.
    """
    inputs = np.asarray(inputs, dtype=np.float64).ravel()
    if K < 2:
        raise ValueError("K must be >= 2")
    if not 0.0 < coverage < 1.0:
        raise ValueError("coverage must lie in (0, 1)")
    for t in inputs:
        ch.check_theta(float(t))
    tail = 0.5 * (1.0 - coverage)
    lo = min(ch.quantile(tail, float(t)) for t in inputs)
    hi = max(ch.quantile(1.0 - tail, float(t)) for t in inputs)
    lo, hi = max(lo, ch.support[0]), min(hi, ch.support[1])
    edges = np.linspace(lo, hi, K + 1)
    W = np.vstack([_cell_probabilities(ch, float(t), edges) for t in inputs])
    if not np.all(np.isfinite(W)):
        raise QuadratureError("non-finite cell probability")
    W = np.maximum(W, 0.0)
    mass = W.sum(axis=1)
    if np.any(mass < coverage - 1e-6):
        raise QuadratureError(f"cells hold only {mass.min():.12g} of the output mass")
    return DiscreteInputChannel(inputs, W / mass[:, None], edges)


# --------------------------------------------------------------------------
# Blahut-Arimoto kernels
# --------------------------------------------------------------------------


@njit
def _ba_eval_nb(W, h, r, q, D):
    m, K = W.shape
    for k in range(K):
        q[k] = 0.0
    for j in range(m):
        rj = r[j]
        for k in range(K):
            q[k] += rj * W[j, k]
    for k in range(K):
        q[k] = math.log(q[k]) if q[k] > 0.0 else 0.0
    lower = 0.0
    upper = -math.inf
    for j in range(m):
        s = 0.0
        for k in range(K):
            s += W[j, k] * q[k]
        D[j] = h[j] - s
        lower += r[j] * D[j]
        if D[j] > upper:
            upper = D[j]
    return lower, upper


@njit
def _ba_step_nb(r, D, upper, mu, out):
    tot = 0.0
    for j in range(r.shape[0]):
        out[j] = r[j] * math.exp(mu * (D[j] - upper))
        tot += out[j]
    for j in range(r.shape[0]):
        out[j] /= tot


@njit
def _ba_nb(W, h, r, tol, max_iter, history):
    m, K = W.shape
    q = np.empty(K)
    D = np.empty(m)
    D2 = np.empty(m)
    trial = np.empty(m)
    mu = 1.0
    lower, upper = _ba_eval_nb(W, h, r, q, D)
    it = 0
    history[0] = lower
    while upper - lower >= tol and it < max_iter:
        it += 1
        _ba_step_nb(r, D, upper, mu, trial)
        lo2, up2 = _ba_eval_nb(W, h, trial, q, D2)
        if mu > 1.0 and lo2 < lower:
            # over-relaxed step lost ground: take the plain step instead
            mu = max(1.0, 0.25 * mu)
            _ba_step_nb(r, D, upper, 1.0, trial)
            lo2, up2 = _ba_eval_nb(W, h, trial, q, D2)
        else:
            mu = min(1.5 * mu, MAX_RELAXATION)
        for j in range(m):
            r[j] = trial[j]
            D[j] = D2[j]
        lower, upper = lo2, up2
        history[it] = lower
    return r, lower, upper, it


def _ba_eval_np(W, h, r):
    q = r @ W
    D = h - W @ np.log(np.where(q > 0.0, q, 1.0))
    return D, float(r @ D), float(D.max())


def _ba_np(W, h, r, tol, max_iter, history):
    mu = 1.0
    D, lower, upper = _ba_eval_np(W, h, r)
    it = 0
    history[0] = lower
    while upper - lower >= tol and it < max_iter:
        it += 1
        trial = r * np.exp(mu * (D - upper))
        trial /= trial.sum()
        D2, lo2, up2 = _ba_eval_np(W, h, trial)
        if mu > 1.0 and lo2 < lower:
            mu = max(1.0, 0.25 * mu)
            trial = r * np.exp(D - upper)
            trial /= trial.sum()
            D2, lo2, up2 = _ba_eval_np(W, h, trial)
        else:
            mu = min(1.5 * mu, MAX_RELAXATION)
        r, D, lower, upper = trial, D2, lo2, up2
        history[it] = lower
    return r, lower, upper, it


def blahut_arimoto(dc: DiscreteInputChannel, tol: float = 1e-7, max_iter: int = 200_000) -> BAResult:
    """Capacity of a discrete channel by alternating maximisation.

    Stops once ``max_j D(W_j || q) - I(r; W) < tol`` where ``q`` is the output
    marginal of the current input law ``r``. Updates use the exponent
    ``mu * D_j``; ``mu`` grows while the mutual information keeps increasing
    and falls back to the plain step (``mu = 1``, always monotone) otherwise. Hitting ``max_iter`` returns
    the current bracket with ``converged=False`` and a warning.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    W = np.ascontiguousarray(dc.transition)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(W > 0.0, W * np.log(W), 0.0).sum(axis=1)
    r0 = np.full(dc.m, 1.0 / dc.m)
    history = np.empty(max_iter + 1)
    kernel = pick(_ba_nb, _ba_np)
    r, lower, upper, it = kernel(W, h, r0, float(tol), int(max_iter), history)
    converged = upper - lower < tol
    if not converged:
        warnings.warn(f"Blahut-Arimoto stopped after {it} iterations with gap {upper - lower:.3g}",
                      RuntimeWarning, stacklevel=2)
    return BAResult(max(lower, 0.0), r, upper, int(it), bool(converged), history[:it + 1].copy())


def exact_awgn_amplitude_capacity(delta_theta: float, m: int = 65, K: int = 800,
                                  noise_power: float = 1.0, tol: float = 1e-7,
                                  full_output: bool = False):
    """Capacity of AWGN with input amplitude ``|theta| <= delta_theta`` (nats).

    Blahut-Arimoto over ``m`` equally spaced inputs on ``[-dt, dt]`` and a
    ``K``-cell output grid. With ``full_output`` also returns the
    :class:`BAResult` and the input grid.
    """
    if not delta_theta > 0:
        raise ValueError("delta_theta must be positive")
    if m < 2:
        raise ValueError("m must be >= 2")
    grid = np.linspace(-delta_theta, delta_theta, m)
    res = blahut_arimoto(discretize(AwgnChannel(noise_power), grid, K=K), tol=tol)
    if full_output:
        return res.capacity, res, grid
    return res.capacity


def mi_discrete_input(ch: ScalarChannel, support, weights, rtol: float = 1e-10) -> float:
    """Mutual information of the input law ``sum_j w_j delta(theta_j)`` by quadrature."""
    x = np.asarray(support, dtype=np.float64).ravel()
    w = np.asarray(weights, dtype=np.float64).ravel()
    if x.size != w.size or x.size == 0:
        raise ValueError("support and weights must have the same non-zero length")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative and sum to 1")
    keep = w > 0
    x, w = x[keep], w[keep]
    if x.size == 1:
        return 0.0
    for t in x:
        ch.check_theta(float(t))
    logw = np.log(w)

    def integrand(r):
        lf = np.stack([ch.log_density(r, float(t)) for t in x])
        live = np.isfinite(lf)
        lf0 = np.where(live, lf, 0.0)
        lp = logsumexp(np.where(live, lf, -np.inf) + logw[:, None], axis=0)
        lp = np.where(np.isfinite(lp), lp, 0.0)
        terms = np.where(live, w[:, None] * np.exp(lf0) * (lf0 - lp), 0.0)
        return terms.sum(axis=0)

    locs = [ch.location(float(t)) for t in x]
    center = float(np.dot(w, locs))
    scale = max(ch.spread(float(t)) for t in x) + 0.5 * (max(locs) - min(locs))
    res = ch.integrate_output(integrand, center, scale, tol=1e-300, rtol=rtol)
    if not res.converged:
        raise QuadratureError("mutual information quadrature did not converge", res)
    return max(res.value, 0.0)
