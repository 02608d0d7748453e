"""Perron-Frobenius machinery for nonnegative matrices.

Spectral radii are computed by power iteration on X + I (the shift makes the
iteration converge for every irreducible matrix, including period-2
patterns); irreducibility and primitivity are decided exactly on the
positivity digraph with integer arithmetic.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import enumerate_selections, interference_stack

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
# the exhaustive maximization is an oracle; near-period-2 matrices with a
# tiny radius mix slowly, so the oracle gets a much larger iteration budget
BRUTE_FORCE_MAX_ITER = 1_000_000


class NotIrreducibleError(ValueError):
    """The positivity digraph of the matrix is not strongly connected."""


class NoConvergenceError(RuntimeError):
    """Power iteration ran out of iterations before meeting the tolerance."""

    def __init__(self, message, estimate=None, iterations=None, trace=None):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = iterations
        self.trace = trace


@dataclass(frozen=True)
class SpectralResult:
    """Dominant eigenvalue of a nonnegative irreducible matrix.

    eigvec is the positive unit-Euclidean-norm eigenvector; on a converged
    result the residual max|X v - radius v| is at most tol * max(1, radius).
    """

    radius: float
    eigvec: np.ndarray
    iterations: int
    converged: bool


def _as_square_nonnegative(X):
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix entries must be finite")
    if np.any(X < 0.0):
        r, c = np.argwhere(X < 0.0)[0]
        raise ValueError(f"matrix must be nonnegative; entry [{r},{c}] = {X[r, c]}")
    return X


def _reachable(adj, start):
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        v = stack.pop()
        for w in np.flatnonzero(adj[v] & ~seen):
            seen[w] = True
            stack.append(int(w))
    return seen


def is_irreducible(X):
    """True iff the digraph with an edge i->j whenever X[i,j] > 0 is
    strongly connected.  A 1x1 matrix is trivially strongly connected."""
    X = _as_square_nonnegative(X)
    if X.shape[0] == 1:
        return True
    adj = X > 0.0
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def is_primitive(X):
    """True iff X is irreducible and its positivity digraph is aperiodic.

    The period is the gcd of d(u)+1-d(v) over all edges u->v, with d the
    BFS distance from node 0; a 1x1 matrix is primitive iff its entry is
    positive (some power of X must be entrywise positive).
    """
    X = _as_square_nonnegative(X)
    n = X.shape[0]
    if n == 1:
        return bool(X[0, 0] > 0.0)
    if not is_irreducible(X):
        return False
    adj = X > 0.0
    dist = np.full(n, -1)
    dist[0] = 0
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in np.flatnonzero(adj[v]):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(int(w))
    g = 0
    for v, w in np.argwhere(adj):
        g = math.gcd(g, abs(int(dist[v]) + 1 - int(dist[w])))
    return g == 1


def primitive_set_sufficient(matrices):
    """Majority-positivity sufficient test for a primitive matrix set.

    True iff every matrix has strictly more than n/2 positive entries in
    every row and every column; a true result guarantees that long enough
    products of matrices from the set are entrywise positive.  The test is
    sufficient only, and vacuously true for an empty set.  At n = 2 it can
    never hold (a zero-diagonal row has a single positive entry).
    """
    for X in matrices:
        X = _as_square_nonnegative(X)
        n = X.shape[0]
        pos = X > 0.0
        if not (pos.sum(axis=1) > n / 2).all():
            return False
        if not (pos.sum(axis=0) > n / 2).all():
            return False
    return True


def stacked_set_sufficient(positive, offsets):
    """Majority test over every embedded matrix without enumerating them.

    positive is the K x N positivity pattern of the interference row stack
    (session-major blocks given by offsets).  Each embedded matrix draws one
    row per block, so: every row of every member passes iff every stacked
    row does, and column j passes in the worst member iff the count of
    blocks whose rows are ALL positive in column j exceeds N/2.
    """
    positive = np.asarray(positive, dtype=bool)
    n = len(offsets) - 1
    if not (positive.sum(axis=1) > n / 2).all():
        return False
    worst_cols = np.zeros(positive.shape[1], dtype=int)
    for i in range(n):
        block = positive[offsets[i]:offsets[i + 1]]
        worst_cols += block.all(axis=0)
    return bool((worst_cols > n / 2).all())


def spectral_radius(X, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Perron-Frobenius eigenvalue of an irreducible nonnegative matrix.

    Raises NotIrreducibleError when the positivity digraph is not strongly
    connected and NoConvergenceError when max_iter is exhausted (possible
    only for extreme spectral-gap instances; raise max_iter in that case).
    """
    X = _as_square_nonnegative(X)
    if not is_irreducible(X):
        raise NotIrreducibleError(
            "matrix is not irreducible; spectral feasibility tests require a "
            "strongly connected interference pattern"
        )
    lam, vec, iters, converged = _kernels.power_iteration(
        X, float(tol), int(max_iter)
    )
    if not converged:
        raise NoConvergenceError(
            f"power iteration did not meet tol={tol} within {max_iter} "
            f"iterations (last estimate {lam})",
            estimate=float(lam),
            iterations=int(iters),
        )
    return SpectralResult(
        radius=float(lam), eigvec=vec, iterations=int(iters), converged=True
    )


def max_spectral_radius_bruteforce(
    model,
    mu,
    tol=DEFAULT_TOL,
    max_iter=BRUTE_FORCE_MAX_ITER,
    cap=None,
):
    """Exact maximization of the spectral radius over all embedded systems.

    Enumerates every one-receiver-per-session selection (refusing above the
    enumeration cap) and returns (max radius, achieving selection).
    """
    W = interference_stack(model, mu)
    offsets = model.row_offsets
    best = -np.inf
    best_sel = None
    kwargs = {} if cap is None else {"cap": cap}
    for sel in enumerate_selections(model, **kwargs):
        rows = [int(offsets[i]) + k - 1 for i, k in enumerate(sel)]
        lam = spectral_radius(W[rows], tol=tol, max_iter=max_iter).radius
        if lam > best:
            best = lam
            best_sel = sel
    return best, best_sel
