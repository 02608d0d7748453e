"""Iterative computation of the farthest feasible point in a direction.

For a direction mu, the largest feasible scaling is beta = 1 / (max spectral
radius over the embedded interference matrices).  The solver iterates a
normalized worst-interference update whose per-step scaling estimates form a
non-decreasing sequence bounded by that value; when the matrix set passes
the majority primitivity test the limit is exact for any positive start.
Otherwise an exact fallback (two-session closed form, or exhaustive
enumeration within the cap) supplies the value and the report says which.
Setting mu to all-ones solves the classic power-balancing problem
sup_p min_i SINR_i.
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .model import (
    SelectionCapError,
    as_sinr_target,
    coefficient_system,
    interference_stack,
)
from .spectral import (
    BRUTE_FORCE_MAX_ITER,
    NoConvergenceError,
    max_spectral_radius_bruteforce,
    spectral_radius,
    stacked_set_sufficient,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000

FALLBACK_TWO_SESSION = "two_session"
FALLBACK_BRUTEFORCE = "bruteforce"


@dataclass(frozen=True)
class SolveReport:
    """Result of one balancing run.

    beta_trace is the per-iteration scaling estimate (non-decreasing up to
    roundoff, bounded above by beta_star); p_star is the unit-norm limiting
    power direction, whose infinite scaling attains the boundary point
    beta_star * mu when the run is certified.  certified means beta_star
    carries a guarantee: either the iteration's optimality bracket closed
    below the tolerance, or fallback_used names the exact computation that
    supplied the value.  When neither applies (enumeration over the cap),
    beta_star is the stabilized trace value and certified is False.
    """

    beta_star: float
    p_star: np.ndarray
    iterations: int
    beta_trace: np.ndarray
    converged: bool
    certified: bool
    fallback_used: Optional[str] = None


@dataclass(frozen=True)
class ConstrainedSolveReport:
    """Per-cap balancing runs combined by taking the smallest beta."""

    beta_star: float
    binding_constraint: int
    reports: tuple

    @property
    def p_star(self):
        return self.reports[self.binding_constraint].p_star

    @property
    def beta_trace(self):
        return self.reports[self.binding_constraint].beta_trace


def _default_start(n):
    return np.full(n, 1.0 / math.sqrt(n))


def _prepare_start(p0, n):
    if p0 is None:
        return _default_start(n)
    p0 = np.asarray(p0, dtype=float).ravel()
    if p0.shape != (n,):
        raise ValueError(f"start vector has {p0.size} entries for {n} sessions")
    if np.any(p0 <= 0.0) or not np.all(np.isfinite(p0)):
        raise ValueError("start vector must be strictly positive")
    return p0


def _run_sweep(W, shift, omega, offsets, p0, tol, max_iter, require_bracket):
    seg = np.ascontiguousarray(offsets, dtype=np.int64)
    trace, p, iters, stop = _kernels.balance_sweep(
        np.ascontiguousarray(W),
        np.ascontiguousarray(shift),
        np.ascontiguousarray(omega),
        seg,
        np.ascontiguousarray(p0),
        float(tol),
        int(max_iter),
        1 if require_bracket else 0,
    )
    return np.asarray(trace), np.asarray(p), int(iters), int(stop)


def solve_beta(model, mu, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, p0=None):
    """Largest feasible scaling of direction mu without power limits.

    Runs the normalized worst-interference iteration; certification and
    fallbacks are described in the module docstring.  A single-session
    network has no interference, so every scaling is feasible and beta_star
    is infinite.
    """
    mu = as_sinr_target(mu, model)
    n = model.num_sessions
    if n == 1:
        return SolveReport(
            beta_star=math.inf,
            p_star=np.array([1.0]),
            iterations=0,
            beta_trace=np.array([]),
            converged=True,
            certified=True,
        )
    W = interference_stack(model, mu)
    offsets = model.row_offsets
    p0 = _prepare_start(p0, n)
    set_ok = stacked_set_sufficient(W > 0.0, offsets)
    trace, p, iters, stop = _run_sweep(
        W, np.zeros(W.shape[0]), np.zeros(n), offsets, p0, tol, max_iter,
        require_bracket=set_ok,
    )
    if stop == _kernels.STOP_BRACKET:
        # the closed bracket certifies the limit regardless of the set test
        return SolveReport(
            beta_star=float(trace[-1]),
            p_star=p,
            iterations=iters,
            beta_trace=trace,
            converged=True,
            certified=True,
        )
    if n == 2:
        from .feasibility import two_session_radius

        radius, sel = two_session_radius(model, mu)
        a = W[int(offsets[0]) + sel[0] - 1, 1]
        b = W[int(offsets[1]) + sel[1] - 1, 0]
        p_star = np.array([math.sqrt(a), math.sqrt(b)])
        p_star /= np.linalg.norm(p_star)
        return SolveReport(
            beta_star=1.0 / radius,
            p_star=p_star,
            iterations=iters,
            beta_trace=trace,
            converged=True,
            certified=True,
            fallback_used=FALLBACK_TWO_SESSION,
        )
    try:
        radius, _ = max_spectral_radius_bruteforce(model, mu)
    except SelectionCapError:
        radius = None
    if radius is not None:
        return SolveReport(
            beta_star=1.0 / radius,
            p_star=p,
            iterations=iters,
            beta_trace=trace,
            converged=True,
            certified=True,
            fallback_used=FALLBACK_BRUTEFORCE,
        )
    if stop == _kernels.STOP_NONE:
        raise NoConvergenceError(
            "balancing run did not stabilize and no exact fallback applies "
            f"(last estimates {trace[-3:]})",
            estimate=float(trace[-1]),
            iterations=iters,
            trace=trace,
        )
    return SolveReport(
        beta_star=float(trace[-1]),
        p_star=p,
        iterations=iters,
        beta_trace=trace,
        converged=True,
        certified=False,
    )


def solve_beta_constrained(
    model, mu, cons, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, p0=None
):
    """Largest feasible scaling of direction mu inside the power caps.

    Runs one balancing sweep per cap on the cap-shifted matrix set and
    combines them by taking the smallest beta; the per-cap update adds the
    capped sessions' total power, scaled by noise/cap, to each session's
    worst interference.
    """
    mu = as_sinr_target(mu, model)
    cons.validate(model)
    n = model.num_sessions
    cs = coefficient_system(model, mu)
    W = interference_stack(model, mu)
    offsets = model.row_offsets
    p0 = _prepare_start(p0, n)
    reports = []
    for m, cap in enumerate(cons.caps):
        omega = cons.mask(m, n)
        shift = cs.noise_vec / cap.cap
        pattern = (W > 0.0) | (omega[None, :] > 0.0)
        set_ok = stacked_set_sufficient(pattern, offsets)
        trace, p, iters, stop = _run_sweep(
            W, shift, omega, offsets, p0, tol, max_iter, require_bracket=set_ok
        )
        if stop == _kernels.STOP_BRACKET:
            reports.append(
                SolveReport(
                    beta_star=float(trace[-1]),
                    p_star=p,
                    iterations=iters,
                    beta_trace=trace,
                    converged=True,
                    certified=True,
                )
            )
            continue
        try:
            radius = _constrained_radius_max(model, mu, cs, W, offsets, cap, omega, tol)
        except SelectionCapError:
            radius = None
        if radius is not None:
            reports.append(
                SolveReport(
                    beta_star=1.0 / radius,
                    p_star=p,
                    iterations=iters,
                    beta_trace=trace,
                    converged=True,
                    certified=True,
                    fallback_used=FALLBACK_BRUTEFORCE,
                )
            )
            continue
        if stop == _kernels.STOP_NONE:
            raise NoConvergenceError(
                f"constrained balancing run {m} did not stabilize and no "
                "exact fallback applies",
                estimate=float(trace[-1]),
                iterations=iters,
                trace=trace,
            )
        reports.append(
            SolveReport(
                beta_star=float(trace[-1]),
                p_star=p,
                iterations=iters,
                beta_trace=trace,
                converged=True,
                certified=False,
            )
        )
    binding = int(np.argmin([r.beta_star for r in reports]))
    return ConstrainedSolveReport(
        beta_star=reports[binding].beta_star,
        binding_constraint=binding,
        reports=tuple(reports),
    )


def _constrained_radius_max(model, mu, cs, W, offsets, cap, omega, tol):
    """Exhaustive max radius over cap-shifted embedded matrices (one cap)."""
    from .model import enumerate_selections

    best = -np.inf
    for sel in enumerate_selections(model):
        rows = [int(offsets[i]) + k - 1 for i, k in enumerate(sel)]
        shifted = W[rows] + np.outer(cs.noise_vec[rows] / cap.cap, omega)
        lam = spectral_radius(
            shifted, tol=tol, max_iter=BRUTE_FORCE_MAX_ITER
        ).radius
        best = max(best, lam)
    return best


def power_balance(model, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, p0=None):
    """Supremal min-session SINR over all nonnegative powers.

    This is the balancing run in the all-ones direction: the supremum is
    beta_star and the balanced SINRs approach it as the power direction
    p_star is scaled up.
    """
    ones = np.ones(model.num_sessions)
    return solve_beta(model, ones, tol=tol, max_iter=max_iter, p0=p0)


def write_beta_trace(report, path_or_stream):
    """Write the iteration trace as CSV with columns ``k,beta``."""
    trace = report.beta_trace
    if hasattr(path_or_stream, "write"):
        _write_trace_rows(path_or_stream, trace)
    else:
        with open(path_or_stream, "w", encoding="utf-8", newline="") as fh:
            _write_trace_rows(fh, trace)


def _write_trace_rows(stream, trace):
    writer = csv.writer(stream)
    writer.writerow(["k", "beta"])
    for k, beta in enumerate(trace, start=1):
        writer.writerow([k, format(beta, ".17g")])
