"""Inner loops for the dense and tridiagonal linear algebra.

Every kernel comes as a pair with identical signatures: ``*_nb`` (loop form,
compiled by numba when available) and ``*_np`` (vectorised numpy form). The
public wrappers in :mod:`weakcap.numkit.linalg` choose one via
:func:`weakcap._accel.pick`; tests run both against each other.
"""
import math

import numpy as np

from .._accel import njit

# --------------------------------------------------------------------------
# cyclic Jacobi eigensolver
# --------------------------------------------------------------------------


@njit
def jacobi_eigen_nb(a, tol, max_sweeps):
    """Row-cyclic Jacobi. Returns (diag, V, sweeps, off_norm). ``a`` is overwritten."""
    n = a.shape[0]
    v = np.eye(n)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    scale = math.sqrt(total)
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        off = math.sqrt(off)
        if off <= tol * scale:
            break
        if sweep == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    d = np.empty(n)
    for i in range(n):
        d[i] = a[i, i]
    return d, v, sweeps, off


def _round_robin(n):
    # chess-tournament pairing: n_even - 1 rounds of disjoint (p, q) pairs
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.int64), np.array(qs, dtype=np.int64)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigen_np(a, tol, max_sweeps):
    """Parallel-ordering Jacobi: each round applies n/2 disjoint rotations at once."""
    n = a.shape[0]
    v = np.eye(n)
    scale = np.sqrt(np.sum(a * a))
    rounds = _round_robin(n) if n > 1 else []
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(np.sum((a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale or sweep == max_sweeps:
            break
        sweeps += 1
        for p, q in rounds:
            if p.size == 0:
                continue
            apq = a[p, q]
            app = a[p, p]
            aqq = a[q, q]
            nz = apq != 0.0
            tau = np.where(nz, (aqq - app) / (2.0 * np.where(nz, apq, 1.0)), 0.0)
            t = np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(tau == 0.0, 1.0, t)
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ap = a[:, p].copy()
            aq = a[:, q]
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap = a[p, :].copy()
            aq = a[q, :]
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = np.where(nz, 0.0, a[p, q])
            a[q, p] = a[p, q]
            vp = v[:, p].copy()
            vq = v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps, float(off)


# --------------------------------------------------------------------------
# Cholesky factorisation and SPD inverse
# --------------------------------------------------------------------------


@njit
def cholesky_nb(a):
    """Lower Cholesky factor. Returns (L, k) with k = -1 on success, else failing pivot."""
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = a[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return L, j
        d = math.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, n):
            s = a[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / d
    return L, -1


def cholesky_np(a):
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        row = L[j, :j]
        s = a[j, j] - row @ row
        if not s > 0.0:
            return L, j
        d = math.sqrt(s)
        L[j, j] = d
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ row) / d
    return L, -1


@njit
def cholesky_inverse_nb(L):
    """(L L^T)^{-1} from a lower Cholesky factor."""
    n = L.shape[0]
    # W = L^{-1}, lower triangular
    W = np.zeros((n, n))
    for j in range(n):
        W[j, j] = 1.0 / L[j, j]
        for i in range(j + 1, n):
            s = 0.0
            for k in range(j, i):
                s -= L[i, k] * W[k, j]
            W[i, j] = s / L[i, i]
    X = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s = 0.0
            for k in range(i, n):
                s += W[k, i] * W[k, j]
            X[i, j] = s
            X[j, i] = s
    return X


def cholesky_inverse_np(L):
    n = L.shape[0]
    W = np.zeros((n, n))
    eye = np.eye(n)
    for i in range(n):
        W[i] = (eye[i] - L[i, :i] @ W[:i]) / L[i, i]
    X = W.T @ W
    return 0.5 * (X + X.T)


# --------------------------------------------------------------------------
# symmetric tridiagonal LDL^T solve (multiple right-hand sides)
# --------------------------------------------------------------------------


@njit
def tridiag_ldl_solve_nb(diag, off, b):
    """Solve T x = b for columns of b. Returns (x, k), k = -1 on success, else failing pivot."""
    n = diag.shape[0]
    m = b.shape[1]
    d = np.empty(n)
    l = np.empty(max(n - 1, 0))
    d[0] = diag[0]
    if not d[0] > 0.0:
        return b.copy(), 0
    for i in range(n - 1):
        l[i] = off[i] / d[i]
        d[i + 1] = diag[i + 1] - l[i] * off[i]
        if not d[i + 1] > 0.0:
            return b.copy(), i + 1
    x = b.copy()
    for j in range(m):
        for i in range(1, n):
            x[i, j] -= l[i - 1] * x[i - 1, j]
        for i in range(n):
            x[i, j] /= d[i]
        for i in range(n - 2, -1, -1):
            x[i, j] -= l[i] * x[i + 1, j]
    return x, -1


def tridiag_ldl_solve_np(diag, off, b):
    n = diag.shape[0]
    d = np.empty(n)
    l = np.empty(max(n - 1, 0))
    d[0] = diag[0]
    if not d[0] > 0.0:
        return b.copy(), 0
    for i in range(n - 1):
        l[i] = off[i] / d[i]
        d[i + 1] = diag[i + 1] - l[i] * off[i]
        if not d[i + 1] > 0.0:
            return b.copy(), i + 1
    x = b.copy()
    for i in range(1, n):
        x[i] -= l[i - 1] * x[i - 1]
    x /= d[:, None]
    for i in range(n - 2, -1, -1):
        x[i] -= l[i] * x[i + 1]
    return x, -1
