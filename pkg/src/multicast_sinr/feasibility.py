"""Feasibility verdicts for target SINR vectors.

A target is achievable without power limits iff the largest spectral radius
over the embedded interference matrices stays strictly below 1; under linear
power caps the same test runs on cap-shifted matrices (see ``psi``) with a
non-strict threshold.  An independent linear-programming oracle decides the
same questions directly on the stacked inequality system and never touches
the spectral path.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .model import (
    as_power_vector,
    as_sinr_target,
    coefficient_system,
    embedded_system,
    enumerate_selections,
    interference_stack,
    session_sinr,
)
from .spectral import BRUTE_FORCE_MAX_ITER, spectral_radius

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
BOUNDARY = "boundary"

# reported as BOUNDARY instead of forcing a binary answer: the unconstrained
# criterion is strict (< 1) while the constrained one is non-strict (<= 1),
# and floating point cannot tell the two apart at the threshold
BOUNDARY_BAND = 1e-9

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


class LpOracleError(RuntimeError):
    """The LP solver failed for a numerical reason (never ignored)."""


@dataclass(frozen=True)
class PowerCap:
    """One linear constraint: sum of p over ``sessions`` at most ``cap``."""

    sessions: tuple
    cap: float

    def __post_init__(self):
        sessions = tuple(sorted({int(s) for s in self.sessions}))
        object.__setattr__(self, "sessions", sessions)
        if not sessions:
            raise ValueError("constraint needs at least one session")
        if sessions[0] < 1:
            raise ValueError(f"session indices are 1-based, got {sessions[0]}")
        cap = float(self.cap)
        object.__setattr__(self, "cap", cap)
        if not (cap > 0.0 and math.isfinite(cap)):
            raise ValueError(f"cap must be > 0, got {cap}")


@dataclass(frozen=True)
class ConstraintSet:
    """One or more linear power caps defining the admissible power set."""

    caps: tuple

    def __post_init__(self):
        caps = tuple(
            c if isinstance(c, PowerCap) else PowerCap(*c) for c in self.caps
        )
        object.__setattr__(self, "caps", caps)
        if not caps:
            raise ValueError("constraint set must hold at least one cap")

    def validate(self, model):
        for idx, c in enumerate(self.caps):
            if c.sessions[-1] > model.num_sessions:
                raise ValueError(
                    f"constraint {idx}: session {c.sessions[-1]} out of range "
                    f"1..{model.num_sessions}"
                )

    def mask(self, idx, num_sessions):
        """0/1 membership vector of constraint ``idx``."""
        m = np.zeros(num_sessions)
        for s in self.caps[idx].sessions:
            m[s - 1] = 1.0
        return m


def constraints_from_list(items):
    """Parse the JSON constraint fragment: [{"sessions": [...], "cap": x}]."""
    caps = []
    for idx, item in enumerate(items):
        try:
            caps.append(PowerCap(tuple(item["sessions"]), float(item["cap"])))
        except KeyError as exc:
            raise ValueError(
                f"constraint {idx} is missing field {exc.args[0]!r}"
            ) from None
    return ConstraintSet(tuple(caps))


def constraints_to_list(cons):
    return [{"sessions": list(c.sessions), "cap": c.cap} for c in cons.caps]


@dataclass(frozen=True)
class Verdict:
    """Outcome of a feasibility check.

    criterion_value is the decisive max spectral radius (NaN for the LP
    oracle, which never computes one); margin is the signed distance
    criterion_value - 1.  A witness, when present, satisfies the defining
    inequalities to 1e-9.  BOUNDARY means the criterion sits within
    BOUNDARY_BAND of 1; for constrained checks that is feasible in exact
    arithmetic (the threshold is non-strict).
    """

    status: str
    criterion_value: float
    witness: Optional[np.ndarray]
    margin: float


def psi(X, y, omega):
    """Add vector y to every column of X selected by the 1-based set omega.

    Encodes a linear power cap inside a spectral test: applied to an
    embedded interference matrix with y = noise / cap it yields a matrix
    whose radius is <= 1 exactly when the cap can be met.  An empty omega
    returns X unchanged.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError(
            f"shape mismatch: X is {X.shape}, y has {y.shape[0]} entries"
        )
    cols = sorted({int(j) for j in omega})
    out = X.copy()
    if not cols:
        return out
    if cols[0] < 1 or cols[-1] > X.shape[1]:
        raise ValueError(f"omega {cols} out of column range 1..{X.shape[1]}")
    for j in cols:
        out[:, j - 1] += y
    return out


def two_session_radius(model, mu):
    """Closed-form criterion radius for a two-session network.

    The worst embedded system picks, per session, the receiver with the
    largest scaled cross-to-direct gain ratio; the radius is the geometric
    mean sqrt(r1 * r2) of the two worst ratios.  Returns (radius, selection).
    """
    if model.num_sessions != 2:
        raise ValueError("closed form applies to exactly two sessions")
    mu = as_sinr_target(mu, model)
    offsets = model.row_offsets
    g = model.gains
    rows1 = slice(offsets[0], offsets[1])
    rows2 = slice(offsets[1], offsets[2])
    r1 = mu[0] * g[rows1, 1] / g[rows1, 0]
    r2 = mu[1] * g[rows2, 0] / g[rows2, 1]
    k1 = int(np.argmax(r1))
    k2 = int(np.argmax(r2))
    radius = math.sqrt(r1[k1] * r2[k2])
    return radius, (k1 + 1, k2 + 1)


def _constrained_radius_bruteforce(model, mu, cons, tol, max_iter):
    """Max radius of the cap-shifted matrices over all embedded systems."""
    cons.validate(model)
    cs = coefficient_system(model, mu)
    W = interference_stack(model, mu)
    offsets = model.row_offsets
    n = model.num_sessions
    masks = [cons.mask(m, n) for m in range(len(cons.caps))]
    best = -np.inf
    best_pick = None
    for sel in enumerate_selections(model):
        rows = [int(offsets[i]) + k - 1 for i, k in enumerate(sel)]
        Z = W[rows]
        shift = cs.noise_vec[rows]
        for m, cap in enumerate(cons.caps):
            shifted = Z + np.outer(shift / cap.cap, masks[m])
            lam = spectral_radius(
                shifted, tol=tol, max_iter=max_iter or BRUTE_FORCE_MAX_ITER
            ).radius
            if lam > best:
                best = lam
                best_pick = (sel, m)
    return best, best_pick


def _min_power_lp(model, mu, cons=None):
    """Minimize total power subject to the target inequalities (and caps).

    Returns (status, witness): status is FEASIBLE/INFEASIBLE, witness the
    minimizing power vector when one exists.  Raises LpOracleError on any
    other solver outcome.
    """
    cs = coefficient_system(model, mu)
    n = model.num_sessions
    a_ub = [-cs.a_matrix]
    b_ub = [-cs.noise_vec]
    if cons is not None:
        cons.validate(model)
        for m, cap in enumerate(cons.caps):
            a_ub.append(cons.mask(m, n)[None, :])
            b_ub.append(np.array([cap.cap]))
    res = linprog(
        c=np.ones(n),
        A_ub=np.vstack(a_ub),
        b_ub=np.concatenate(b_ub),
        bounds=[(0.0, None)] * n,
        method="highs",
        options=_LP_OPTIONS,
    )
    if res.status == 0:
        return FEASIBLE, np.asarray(res.x, dtype=float)
    if res.status == 2:
        return INFEASIBLE, None
    raise LpOracleError(
        f"LP solver failed (status {res.status}): {res.message}"
    )


def lp_oracle(model, mu, cons=None):
    """Independent feasibility verdict via linear programming.

    Decides whether some p >= 0 meets every receiver's target inequality
    (and the optional power caps) without ever computing a spectral radius;
    used to cross-validate the spectral verdicts.  criterion_value and
    margin are NaN by construction.
    """
    mu = as_sinr_target(mu, model)
    status, witness = _min_power_lp(model, mu, cons)
    return Verdict(
        status=status,
        criterion_value=math.nan,
        witness=witness,
        margin=math.nan,
    )


def _verdict_from_criterion(model, mu, criterion, cons):
    if abs(criterion - 1.0) <= BOUNDARY_BAND:
        status = BOUNDARY
        # for constrained checks the boundary is attainable in exact
        # arithmetic; return the LP witness when the solver finds one
        witness = _min_power_lp(model, mu, cons)[1] if cons is not None else None
    elif criterion < 1.0:
        status = FEASIBLE
        witness = _min_power_lp(model, mu, cons)[1]
    else:
        status = INFEASIBLE
        witness = None
    return Verdict(
        status=status,
        criterion_value=float(criterion),
        witness=witness,
        margin=float(criterion - 1.0),
    )


def check_unconstrained(model, mu, method="iterative", tol=1e-12, max_iter=None):
    """Spectral feasibility verdict without power limits (strict threshold).

    method "brute" maximizes the radius over every embedded system;
    "iterative" uses the balancing solver (with its exact fallbacks) and
    takes criterion = 1 / beta.
    """
    from . import balancer
    from .spectral import max_spectral_radius_bruteforce

    mu = as_sinr_target(mu, model)
    if method == "brute":
        criterion, _ = max_spectral_radius_bruteforce(
            model, mu, tol=tol, max_iter=max_iter or BRUTE_FORCE_MAX_ITER
        )
    elif method == "iterative":
        report = balancer.solve_beta(model, mu, tol=tol)
        criterion = 0.0 if math.isinf(report.beta_star) else 1.0 / report.beta_star
    else:
        raise ValueError(f"unknown method {method!r}")
    return _verdict_from_criterion(model, mu, criterion, None)


def check_constrained(model, mu, cons, method="iterative", tol=1e-12, max_iter=None):
    """Spectral feasibility verdict under linear power caps.

    The criterion is the max radius of the cap-shifted embedded matrices
    over all systems and caps; the target is achievable iff it is <= 1
    (non-strict), so BOUNDARY verdicts are feasible in exact arithmetic.
    """
    from . import balancer

    mu = as_sinr_target(mu, model)
    if method == "brute":
        criterion, _ = _constrained_radius_bruteforce(model, mu, cons, tol, max_iter)
    elif method == "iterative":
        report = balancer.solve_beta_constrained(model, mu, cons, tol=tol)
        criterion = 1.0 / report.beta_star
    else:
        raise ValueError(f"unknown method {method!r}")
    return _verdict_from_criterion(model, mu, criterion, cons)


def power_reduce(model, p_start, mu, rel_tol=1e-10, max_sweeps=10_000):
    """Shrink a power vector meeting the target until it meets it exactly.

    Sweeps cyclically over sessions; any session whose SINR exceeds its
    target has its transmitter power set to the exact level at which its
    worst receiver hits the target given the other powers.  Powers only
    decrease, so the sweep converges to a vector whose session SINRs equal
    the target.  Requires session_sinr(p_start) >= mu.
    """
    mu = as_sinr_target(mu, model)
    p = as_power_vector(p_start, model).copy()
    gamma = session_sinr(model, p)
    if np.any(gamma < mu * (1.0 - 1e-9)):
        i = int(np.argmin(gamma / mu))
        raise ValueError(
            f"starting power does not meet the target: session {i + 1} has "
            f"SINR {gamma[i]} < {mu[i]}"
        )
    g = model.gains
    offsets = model.row_offsets
    for _ in range(max_sweeps):
        for i in range(model.num_sessions):
            rows = slice(offsets[i], offsets[i + 1])
            interference = g[rows] @ p - g[rows, i] * p[i] + model.noise_variance
            needed = mu[i] * np.max(interference / g[rows, i])
            if needed < p[i]:
                p[i] = needed
        gamma = session_sinr(model, p)
        if np.max(gamma / mu - 1.0) <= rel_tol:
            break
    return p


def cross_slack_product(model, mu, k_hat, k_tilde, tol=1e-12):
    """Product of the two cross-system slacks for one-row-different systems.

    For selections differing in exactly one session, each embedded system's
    exact solution is evaluated against the *other* system's row for that
    session.  The product of the two slacks is never positive, and vanishes
    only when the two solutions coincide; this drives the pairing argument
    behind the feasibility criterion.
    """
    mu = as_sinr_target(mu, model)
    k_hat = tuple(int(k) for k in k_hat)
    k_tilde = tuple(int(k) for k in k_tilde)
    differing = [i for i, (a, b) in enumerate(zip(k_hat, k_tilde)) if a != b]
    if len(differing) != 1:
        raise ValueError(
            f"selections must differ in exactly one session, differ in "
            f"{len(differing)}"
        )
    i = differing[0]
    g_hat, n_hat = embedded_system(model, mu, k_hat)
    g_tilde, n_tilde = embedded_system(model, mu, k_tilde)
    for G in (g_hat, g_tilde):
        lam = spectral_radius(np.eye(model.num_sessions) - G).radius
        if lam >= 1.0 - tol:
            raise ValueError(
                f"embedded system radius {lam} is not strictly below 1; the "
                "exact solutions are not guaranteed nonnegative"
            )
    p_hat = np.linalg.solve(g_hat, n_hat)
    p_tilde = np.linalg.solve(g_tilde, n_tilde)
    slack_tilde = g_tilde[i] @ p_hat - n_tilde[i]
    slack_hat = g_hat[i] @ p_tilde - n_hat[i]
    return float(slack_tilde * slack_hat)


def sinr_slack(model, mu, p):
    """Per-receiver slack of the target inequalities at power p (>= 0 means
    the target is met); handy for asserting witness quality."""
    cs = coefficient_system(model, mu)
    p = as_power_vector(p, model)
    return cs.a_matrix @ p - cs.noise_vec


__all__ = [
    "BOUNDARY",
    "BOUNDARY_BAND",
    "ConstraintSet",
    "FEASIBLE",
    "INFEASIBLE",
    "LpOracleError",
    "PowerCap",
    "Verdict",
    "check_constrained",
    "check_unconstrained",
    "constraints_from_list",
    "constraints_to_list",
    "cross_slack_product",
    "lp_oracle",
    "power_reduce",
    "psi",
    "sinr_slack",
    "two_session_radius",
]
