"""Hot numeric kernels: numba @njit loops with vectorized numpy fallbacks.

The selected implementation is bound to the public name at import time (see
``_accel``).  All kernels operate on plain float64/int arrays so the numba and
numpy paths share identical semantics; parity is covered by tests and timed by
``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# chain DP over a uniform grid with an offset band
# --------------------------------------------------------------------------


def chain_dp_backward_np(V, Wd, n, dlo, end_idx):
    """Backward cost-to-go table C[k, j] for an n-step chain on the grid.

    Step cost j -> j+delta is V[j] + Wd[delta - dlo].  end_idx >= 0 pins the
    final point, end_idx == -1 leaves it free.
    """
    G = V.shape[0]
    D = Wd.shape[0]
    C = np.empty((n + 1, G))
    if end_idx >= 0:
        C[n] = np.inf
        C[n, end_idx] = 0.0
    else:
        C[n] = 0.0
    for k in range(n - 1, -1, -1):
        best = np.full(G, np.inf)
        nxt = C[k + 1]
        for di in range(D):
            delta = dlo + di
            if delta >= 0:
                if delta < G:
                    np.minimum(best[: G - delta], Wd[di] + nxt[delta:], out=best[: G - delta])
            else:
                if -delta < G:
                    np.minimum(best[-delta:], Wd[di] + nxt[: G + delta], out=best[-delta:])
        C[k] = V + best
    return C


@njit(cache=True)
def _chain_dp_backward_jit(V, Wd, n, dlo, end_idx):
    G = V.shape[0]
    D = Wd.shape[0]
    C = np.empty((n + 1, G))
    for j in range(G):
        C[n, j] = np.inf
    if end_idx >= 0:
        C[n, end_idx] = 0.0
    else:
        for j in range(G):
            C[n, j] = 0.0
    for k in range(n - 1, -1, -1):
        for j in range(G):
            best = np.inf
            for di in range(D):
                jj = j + dlo + di
                if 0 <= jj < G:
                    v = Wd[di] + C[k + 1, jj]
                    if v < best:
                        best = v
            C[k, j] = V[j] + best
    return C


# --------------------------------------------------------------------------
# Mane cocycle DP: layered shortest paths on an ordered node set
# --------------------------------------------------------------------------


def phi_dp_np(cost, n_max):
    """Layered DP from node 0: D[m, j] = best m-step cost, back[m, j] = argmin."""
    G = cost.shape[0]
    D = np.full((n_max + 1, G), np.inf)
    back = np.full((n_max + 1, G), -1, dtype=np.int32)
    D[0, 0] = 0.0
    for m in range(1, n_max + 1):
        S = D[m - 1][:, None] + cost
        D[m] = S.min(axis=0)
        bm = S.argmin(axis=0).astype(np.int32)
        bm[~np.isfinite(D[m])] = -1
        back[m] = bm
    return D, back


@njit(cache=True)
def _phi_dp_jit(cost, n_max):
    G = cost.shape[0]
    D = np.full((n_max + 1, G), np.inf)
    back = np.full((n_max + 1, G), -1, dtype=np.int32)
    D[0, 0] = 0.0
    for m in range(1, n_max + 1):
        for j in range(G):
            best = np.inf
            bi = -1
            for i in range(G):
                dv = D[m - 1, i]
                if dv < np.inf:
                    v = dv + cost[i, j]
                    if v < best:
                        best = v
                        bi = i
            if bi >= 0:
                D[m, j] = best
                back[m, j] = bi
    return D, back


# --------------------------------------------------------------------------
# dense simplex pivot loop (Bland's rule)
# --------------------------------------------------------------------------
# Status codes: 0 optimal, 1 unbounded, 2 iteration cap reached.


def simplex_pivot_loop_np(T, basis, allowed_upto, tol, max_iter):
    m = T.shape[0] - 1
    it = 0
    while it < max_iter:
        it += 1
        row = T[m, :allowed_upto]
        neg = np.flatnonzero(row < -tol)
        if neg.size == 0:
            return 0, it
        enter = int(neg[0])
        col = T[:m, enter]
        r = -1
        best = np.inf
        bestvar = 1 << 60
        for i in range(m):
            a = col[i]
            if a > 1e-11:
                ratio = T[i, -1] / a
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and basis[i] < bestvar):
                    best = ratio
                    r = i
                    bestvar = basis[i]
        if r < 0:
            return 1, it
        piv = T[r] / T[r, enter]
        factors = T[:, enter].copy()
        T -= factors[:, None] * piv[None, :]
        T[r] = piv
        basis[r] = enter
    return 2, it


@njit(cache=True)
def _simplex_pivot_loop_jit(T, basis, allowed_upto, tol, max_iter):
    m = T.shape[0] - 1
    ncol = T.shape[1]
    it = 0
    while it < max_iter:
        it += 1
        enter = -1
        for j in range(allowed_upto):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return 0, it
        r = -1
        best = np.inf
        bestvar = 1 << 60
        for i in range(m):
            a = T[i, enter]
            if a > 1e-11:
                ratio = T[i, ncol - 1] / a
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and basis[i] < bestvar):
                    best = ratio
                    r = i
                    bestvar = basis[i]
        if r < 0:
            return 1, it
        piv = T[r, enter]
        for jj in range(ncol):
            T[r, jj] /= piv
        for i in range(m + 1):
            if i != r:
                f = T[i, enter]
                if f != 0.0:
                    for jj in range(ncol):
                        T[i, jj] -= f * T[r, jj]
        basis[r] = enter
    return 2, it


if USE_NUMBA:
    chain_dp_backward = _chain_dp_backward_jit
    phi_dp = _phi_dp_jit
    simplex_pivot_loop = _simplex_pivot_loop_jit
else:
    chain_dp_backward = chain_dp_backward_np
    phi_dp = phi_dp_np
    simplex_pivot_loop = simplex_pivot_loop_np


def warmup():
    """Trigger JIT compilation of all kernels on tiny inputs."""
    V = np.zeros(4)
    Wd = np.zeros(2)
    chain_dp_backward(V, Wd, 2, 0, -1)
    cost = np.zeros((3, 3))
    phi_dp(cost, 2)
    T = np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, 0.0]])
    basis = np.array([0], dtype=np.int64)
    simplex_pivot_loop(T, basis, 1, 1e-10, 10)
