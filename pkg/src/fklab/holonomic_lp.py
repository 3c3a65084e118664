"""Finite holonomic-measure LP for the circle model, primal and dual.

The circle is replaced by the grid omega_j = j/N and jumps by integer
multiples of 1/N, so every arc maps grid to grid exactly and the holonomy
constraint reduces to flow conservation at each grid point plus total mass 1.
A dense two-phase simplex with Bland's rule solves the primal; dual grid
potentials come from the optimal basis.  Only the circle family discretizes:
the torus line flow has irrational slope and maps no finite grid to itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from . import _kernels
from .environments import EnvPoint
from .errors import DomainError, NumericalFailure, ResourceError
from .lagrangians import LagrangianSpec, potential_values, spring_value

_MAX_TABLEAU = 6e7  # elements; dense two-phase tableau cap


@dataclass(frozen=True)
class LPProblem:
    N: int
    jumps: np.ndarray  # integer multiples of 1/N
    cost: np.ndarray  # (N, |jumps|)
    model: LagrangianSpec


@dataclass(frozen=True)
class DiscreteMeasure:
    weights: np.ndarray  # (N, |jumps|), nonnegative, mass 1
    basis: np.ndarray
    value: float


@dataclass(frozen=True)
class DualPotential:
    u: np.ndarray  # one value per grid point
    value: float


def discretize_circle(model: LagrangianSpec, N: int, T_max: float) -> LPProblem:
    if model.potential != "circle_cosine":
        raise DomainError("only the circle cosine family is discretized")
    if not (8 <= N <= 512):
        raise DomainError("N must lie in [8, 512]")
    if T_max < model.lam + 1.0:
        raise DomainError("T_max must be at least lambda + 1")
    M = int(math.floor(T_max * N + 1e-9))
    jumps = np.arange(-M, M + 1, dtype=np.int64)
    nvars = N * jumps.size
    if (N + 2) * (nvars + N + 3) > _MAX_TABLEAU:
        raise ResourceError("T_max * N too large for the dense tableau")
    env = EnvPoint.circle(0.0)
    grid = np.arange(N) / N
    v = np.atleast_1d(potential_values(model, env, grid))
    w = np.asarray(spring_value(model, jumps / N))
    cost = v[:, None] + w[None, :]
    return LPProblem(N=N, jumps=jumps, cost=cost, model=model)


def _build_constraints(lp: LPProblem) -> Tuple[np.ndarray, np.ndarray]:
    N, M = lp.N, lp.jumps.size
    nvars = N * M
    A = np.zeros((N + 1, nvars))
    for j in range(N):
        for m, k in enumerate(lp.jumps):
            a = j * M + m
            A[j, a] += 1.0  # outflow
            A[(j + int(k)) % N, a] -= 1.0  # inflow
    A[N, :] = 1.0
    b = np.zeros(N + 1)
    b[N] = 1.0
    return A, b


def _simplex(A: np.ndarray, b: np.ndarray, c: np.ndarray):
    """min c x, A x = b, x >= 0, with b >= 0; two phases, Bland's rule."""
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = np.arange(n, n + m, dtype=np.int64)
    # phase 1 reduced costs for the artificial objective
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    status, _ = _kernels.simplex_pivot_loop(T, basis, n, 1e-10, 200_000)
    if status == 2:
        raise NumericalFailure("simplex iteration cap reached in phase 1")
    if -T[m, -1] > 1e-7:
        raise NumericalFailure("LP infeasible (phase 1 objective positive)")
    # phase 2 objective
    T[m, :] = 0.0
    T[m, :n] = c
    for i in range(m):
        f = T[m, basis[i]]
        if f != 0.0:
            T[m, :] -= f * T[i, :]
    status, _ = _kernels.simplex_pivot_loop(T, basis, n, 1e-10, 200_000)
    if status == 1:
        raise NumericalFailure("LP unbounded in phase 2 (should be impossible)")
    if status == 2:
        raise NumericalFailure("simplex iteration cap reached in phase 2")
    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    return x, basis.copy()


def solve_primal(lp: LPProblem) -> Tuple[DiscreteMeasure, float]:
    A, b = _build_constraints(lp)
    c = lp.cost.ravel()
    x, basis = _simplex(A, b, c)
    weights = x.reshape(lp.cost.shape)
    value = float(c @ x)
    mass = float(x.sum())
    if abs(mass - 1.0) > 1e-10:
        raise NumericalFailure(f"optimal measure mass {mass} is off unity")
    residual = float(np.max(np.abs(A[:-1] @ x)))
    if residual > 1e-9:
        raise NumericalFailure(f"holonomy residual {residual} too large")
    return DiscreteMeasure(weights=weights, basis=basis, value=value), value


def solve_dual(lp: LPProblem, measure: DiscreteMeasure) -> DualPotential:
    """Dual grid potentials from the optimal basis.

    With row duals y (holonomy rows then mass), u = -y[:N] satisfies
    cost(j, k) + u[j] - u[(j+k) mod N] >= dual value on every arc.
    """
    A, _ = _build_constraints(lp)
    c = lp.cost.ravel()
    m = A.shape[0]
    n = A.shape[1]
    B = np.zeros((m, m))
    cB = np.zeros(m)
    for i, bi in enumerate(measure.basis):
        if bi < n:
            B[:, i] = A[:, bi]
            cB[i] = c[bi]
        else:
            B[bi - n, i] = 1.0  # artificial pinned at zero level
    y = np.linalg.solve(B.T, cB)
    reduced = c - A.T @ y
    worst = float(reduced.min())
    if worst < -1e-8:
        raise NumericalFailure(f"dual infeasible, min reduced cost {worst}")
    return DualPotential(u=-y[: lp.N], value=float(y[lp.N]))


def mather_support(measure: DiscreteMeasure, threshold: float = 1e-6) -> List[Tuple[int, int]]:
    """Arcs carrying weight above threshold * max weight, as (j, k) pairs."""
    if not (0.0 < threshold < 1.0):
        raise DomainError("threshold must lie in (0, 1)")
    w = measure.weights
    cut = threshold * float(w.max())
    out = []
    N, M = w.shape
    half = (M - 1) // 2
    for j in range(N):
        for m in range(M):
            if w[j, m] > cut:
                out.append((j, m - half))
    return out


def support_projection(support: List[Tuple[int, int]]) -> List[int]:
    return sorted({j for j, _ in support})
