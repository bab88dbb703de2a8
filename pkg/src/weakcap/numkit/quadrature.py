"""Adaptive Gauss-Kronrod (7, 15) quadrature.

Integrands are called with 1-D float arrays and must return arrays of the
same shape. All active subintervals of a refinement round are evaluated in a
single call, so a vectorised integrand costs one numpy pass per round.
"""
from __future__ import annotations

import warnings
from typing import Callable, NamedTuple

import numpy as np

# Kronrod nodes on [0, 1] (positive half, descending) with K15 and G7 weights.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.0,
    0.129484966168869693270611432679082,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
W_GAUSS = np.concatenate([_WG[:-1], _WG[::-1]])

DEFAULT_TOL = 1e-10
DEFAULT_BUDGET = 1_000_000


class QuadratureResult(NamedTuple):
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool = True


class QuadratureError(RuntimeError):
    """Raised by callers that cannot accept an unconverged integral."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def _gk_rule(f, lo, hi):
    """Apply G7/K15 on each [lo_i, hi_i]; returns (kronrod, error, x, wx)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=np.float64).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise FloatingPointError("integrand returned non-finite values")
    rk = half * (fx @ W_KRONROD)
    rg = half * (fx @ W_GAUSS)
    # QUADPACK error heuristic
    mean = rk / (2.0 * np.where(half == 0.0, 1.0, half))
    resasc = half * (np.abs(fx - mean[:, None]) @ W_KRONROD)
    err = np.abs(rk - rg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where(resasc > 0.0, scaled, err)
    resabs = half * (np.abs(fx) @ W_KRONROD)
    floor = 50.0 * np.finfo(float).eps * resabs
    err = np.maximum(err, floor)
    return rk, err, x, half[:, None] * W_KRONROD[None, :]


def _adapt(f, a, b, tol, rtol, budget, min_intervals):
    # Global stopping rule (sum of local errors <= allowed); each round bisects
    # every interval whose error exceeds its length-share of the allowance.
    edges = np.linspace(a, b, min_intervals + 1)
    lo, hi = edges[:-1], edges[1:]
    rk, err, x, wx = _gk_rule(f, lo, hi)
    evals = x.size
    length = b - a
    while True:
        total = rk.sum()
        allowed = max(tol, rtol * abs(total))
        if err.sum() <= allowed:
            return total, err.sum(), evals, True, x, wx
        split = err > allowed * (hi - lo) / length
        mid = 0.5 * (lo[split] + hi[split])
        if (evals + 2 * mid.size * NODES.size > budget
                or np.any((mid <= lo[split]) | (mid >= hi[split]))):
            return total, err.sum(), evals, False, x, wx
        keep = ~split
        nlo = np.concatenate([lo[split], mid])
        nhi = np.concatenate([mid, hi[split]])
        nrk, nerr, nx, nwx = _gk_rule(f, nlo, nhi)
        evals += nx.size
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        rk = np.concatenate([rk[keep], nrk])
        err = np.concatenate([err[keep], nerr])
        x = np.concatenate([x[keep], nx])
        wx = np.concatenate([wx[keep], nwx])


def _finish(value, err, evals, ok, what):
    if not ok:
        warnings.warn(f"{what}: no convergence (estimate {value:.6g} +- {err:.2g} "
                      f"after {evals} evaluations)", RuntimeWarning, stacklevel=3)
    return QuadratureResult(float(value), float(err), int(evals), bool(ok))


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              tol: float = DEFAULT_TOL, rtol: float = 0.0,
              budget: int = DEFAULT_BUDGET, min_intervals: int = 1) -> QuadratureResult:
    """Adaptive integral of ``f`` over the finite interval ``[a, b]``.

    Refinement stops when the summed error estimate is below
    ``max(tol, rtol*|I|)``; until then every subinterval whose error exceeds
    its length-share of that allowance is bisected. On budget
    exhaustion the best estimate is returned with ``converged=False`` and a
    ``RuntimeWarning``.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if not tol > 0 and not rtol > 0:
        raise ValueError("tol or rtol must be positive")
    val, err, evals, ok, _, _ = _adapt(f, a, b, tol, rtol, budget, min_intervals)
    return _finish(val, err, evals, ok, "integrate")


def _semi_infinite_integrand(f, a, scale):
    def g(t):
        t = np.asarray(t, dtype=np.float64)
        om = 1.0 - t
        x = a + scale * t / om
        with np.errstate(over="ignore", invalid="ignore"):
            y = np.asarray(f(x), dtype=np.float64) * scale / (om * om)
        # f decays faster than (1-t)^2 near t = 1
        return np.where(np.isfinite(x) & np.isfinite(y), y, 0.0)
    return g


def integrate_semi_infinite(f, a: float, tol: float = DEFAULT_TOL, rtol: float = 0.0,
                            scale: float = 1.0, budget: int = DEFAULT_BUDGET,
                            min_intervals: int = 1) -> QuadratureResult:
    """Integral of a decaying ``f`` over ``[a, inf)``.

    Substitutes ``x = a + scale * t / (1 - t)`` and integrates over
    ``t in [0, 1]``; ``scale`` should be the width of the bulk of ``f``.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    g = _semi_infinite_integrand(f, float(a), float(scale))
    val, err, evals, ok, _, _ = _adapt(g, 0.0, 1.0, tol, rtol, budget, min_intervals)
    return _finish(val, err, evals, ok, "integrate_semi_infinite")


def integrate_real_line(f, center: float = 0.0, scale: float = 1.0,
                        tol: float = DEFAULT_TOL, rtol: float = 0.0,
                        budget: int = DEFAULT_BUDGET) -> QuadratureResult:
    """Integral over the whole real line, split at ``center``."""
    right = integrate_semi_infinite(f, center, tol=0.5 * tol, rtol=rtol, scale=scale, budget=budget // 2)
    left = integrate_semi_infinite(lambda x: f(2.0 * center - x), center, tol=0.5 * tol,
                                   rtol=rtol, scale=scale, budget=budget // 2)
    return QuadratureResult(right.value + left.value,
                            right.abs_error_estimate + left.abs_error_estimate,
                            right.evaluations + left.evaluations,
                            right.converged and left.converged)


def quadrature_rule(f, a, b, tol=DEFAULT_TOL, rtol=0.0, budget=DEFAULT_BUDGET, min_intervals=1):
    """Nodes and weights of the composite rule adapted to ``f`` on ``[a, b]``.

    Used for tensor-product integration where the 2-D integrand is built
    from 1-D factors that ``f`` is representative of.
    """
    _, _, _, ok, x, w = _adapt(f, float(a), float(b), tol, rtol, budget, min_intervals)
    x, w = x.ravel(), w.ravel()
    order = np.argsort(x, kind="stable")
    return x[order], w[order], ok


def semi_infinite_rule(f, a, scale=1.0, tol=DEFAULT_TOL, rtol=0.0, budget=DEFAULT_BUDGET):
    """Composite rule on ``[a, inf)`` adapted to ``f``; see :func:`quadrature_rule`."""
    a, scale = float(a), float(scale)
    g = _semi_infinite_integrand(f, a, scale)
    t, w, ok = quadrature_rule(g, 0.0, 1.0, tol=tol, rtol=rtol, budget=budget)
    om = 1.0 - t
    return a + scale * t / om, w * scale / (om * om), ok


def real_line_rule(f, center=0.0, scale=1.0, tol=DEFAULT_TOL, rtol=0.0, budget=DEFAULT_BUDGET):
    """Composite rule on the real line adapted to ``f``, split at ``center``."""
    xr, wr, okr = semi_infinite_rule(f, center, scale, 0.5 * tol, rtol, budget // 2)
    xl, wl, okl = semi_infinite_rule(lambda x: f(2.0 * center - x), center, scale,
                                     0.5 * tol, rtol, budget // 2)
    x = np.concatenate([(2.0 * center - xl)[::-1], xr])
    w = np.concatenate([wl[::-1], wr])
    keep = np.isfinite(x) & (w > 0)
    return x[keep], w[keep], okr and okl
