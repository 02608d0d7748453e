"""Hot numeric loops shared by the spectral and balancing code.

Both kernels are written in numba-compilable numpy and are JIT-compiled on
import unless the environment variable ``MULTICAST_SINR_NO_NUMBA`` is set to
``1``/``true``/``yes`` (or numba is not installed), in which case the same
functions run as plain numpy.  Either path computes identical floating-point
results; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import os

import numpy as np


def _power_iteration(X, tol, max_iter):
    """Dominant eigenvalue/eigenvector of a nonnegative square matrix.

    Iterates with the shifted matrix X + I so that convergence is guaranteed
    for every irreducible X, including the period-2 patterns that defeat
    plain power iteration; the shift adds exactly 1 to every eigenvalue.
    Starts from the uniform positive vector for reproducibility.

    Converged requires three conditions at tolerance tol: relative change of
    the Rayleigh quotient, the residual max|X v - r v|, and the width of the
    componentwise bracket [min_i (Xv)_i/v_i, max_i (Xv)_i/v_i] (which always
    contains the true eigenvalue for positive v).  The reported radius is
    the bracket midpoint, so its error is at most tol/2 * max(1, radius);
    a plain Rayleigh estimate can be off by far more than the residual on
    strongly non-normal matrices.

    Returns (radius, eigvec, iterations, converged).
    """
    n = X.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    u = X @ v
    ray = v @ u
    mid = ray
    iters = 0
    converged = False
    for k in range(max_iter):
        w = u + v
        nw = np.sqrt(w @ w)
        v = w / nw
        u = X @ v
        ray_new = v @ u
        resid = np.abs(u - ray_new * v).max()
        ratios = u / v
        hi = ratios.max()
        lo = ratios.min()
        mid = 0.5 * (hi + lo)
        delta = abs(ray_new - ray)
        ray = ray_new
        iters = k + 1
        if (
            delta <= tol * max(1.0, abs(ray))
            and resid <= tol * max(1.0, ray)
            and hi - lo <= tol * max(1.0, mid)
        ):
            converged = True
            break
    return mid, v, iters, converged


STOP_NONE = 0
STOP_BRACKET = 1
STOP_STALL = 2

_STALL_LIMIT = 25


def _balance_sweep(W, shift, omega, seg, p0, tol, max_iter, require_bracket):
    """Normalized max-interference fixed-point iteration.

    W is the K x N stack of per-receiver interference rows (session-major,
    zero in the own-session column), seg the N+1 row offsets of the session
    blocks.  Each step takes, per session, the worst interference over that
    session's receivers:

        y_i  = max over the block of (W p + shift * sum(p[omega]))
        beta = min_i p_i / y_i
        p   <- y / ||y||

    shift/omega encode an optional linear power cap (shift is the noise
    column divided by the cap, omega the 0/1 membership of the capped
    sessions); pass zeros for the unconstrained iteration.

    The ratios p_i / y_i bracket the exact answer: their minimum is the
    (monotone) beta estimate and, because y equals the worst embedded
    matrix applied to p, their maximum upper-bounds 1 / (max radius).  The
    iteration stops with STOP_BRACKET once the beta change and the bracket
    width both fall below tol, which certifies |beta - limit| <= tol *
    max(1, beta).  On non-primitive sets the bracket can stay open forever;
    unless require_bracket is set, a long run of negligible beta changes
    then ends the loop with STOP_STALL (callers relying on an exact
    fallback use this mode).

    Returns (beta_trace, p, iterations, stop_code).
    """
    K, N = W.shape
    p = p0 / np.sqrt(p0 @ p0)
    trace = np.empty(max_iter)
    y = np.empty(N)
    iters = 0
    stop = STOP_NONE
    beta_prev = -1.0
    stall = 0
    for k in range(max_iter):
        s = 0.0
        for j in range(N):
            if omega[j] != 0.0:
                s += p[j]
        r = W @ p
        if s != 0.0:
            r = r + shift * s
        beta = np.inf
        bmax = -np.inf
        for i in range(N):
            yi = -np.inf
            for t in range(seg[i], seg[i + 1]):
                if r[t] > yi:
                    yi = r[t]
            if yi <= 0.0:
                # cannot happen for positive gains and positive power
                raise ValueError("nonpositive interference update")
            y[i] = yi
            bi = p[i] / yi
            if bi < beta:
                beta = bi
            if bi > bmax:
                bmax = bi
        trace[k] = beta
        iters = k + 1
        ny = np.sqrt(y @ y)
        for i in range(N):
            p[i] = y[i] / ny
        if k >= 1:
            small = abs(beta - beta_prev) <= tol * max(1.0, abs(beta))
            if small and bmax - beta <= tol * max(1.0, beta):
                stop = STOP_BRACKET
                break
            if small:
                stall += 1
                if require_bracket == 0 and stall >= _STALL_LIMIT:
                    stop = STOP_STALL
                    break
            else:
                stall = 0
        beta_prev = beta
    return trace[:iters].copy(), p, iters, stop


def _want_numba():
    flag = os.environ.get("MULTICAST_SINR_NO_NUMBA", "")
    return flag.strip().lower() not in ("1", "true", "yes")


USING_NUMBA = False
if _want_numba():
    try:
        from numba import njit

        power_iteration = njit(cache=True)(_power_iteration)
        balance_sweep = njit(cache=True)(_balance_sweep)
        USING_NUMBA = True
    except ImportError:
        pass

if not USING_NUMBA:
    power_iteration = _power_iteration
    balance_sweep = _balance_sweep
