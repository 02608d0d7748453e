"""Feasible-region characterization: boundary tracing and geometry probes.

The feasible set of target vectors is downward comprehensive, so tracing the
farthest feasible point along a fan of directions characterizes it.  Points
are reported as suprema: without power caps the boundary is approached only
in the infinite-power limit (open region), while under caps it is attained.
The region equals the intersection of the per-embedded-system regions, is
log-convex, and its complement is convex for two sessions but in general
not for three or more; the probes here exercise those facts numerically.
"""

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .balancer import solve_beta, solve_beta_constrained
from .model import (
    NetworkModel,
    as_sinr_target,
    coefficient_system,
    enumerate_selections,
    interference_stack,
)
from .spectral import max_spectral_radius_bruteforce, spectral_radius

GOLDEN_REL_TOL = 1e-8


@dataclass(frozen=True)
class BoundaryPoint:
    """Farthest feasible point along one direction.

    direction has unit 1-norm and point = beta * direction exactly.
    per_embedded, when present, holds each embedded system's own beta in
    selection-enumeration order; beta is their minimum.  constrained marks
    points computed inside a power set (where the boundary is attained)
    rather than the open unconstrained region.
    """

    direction: np.ndarray
    beta: float
    point: np.ndarray
    per_embedded: Optional[np.ndarray]
    constrained: bool


def direction_fan(num_sessions, count, seed=0):
    """Deterministic fan of strictly positive unit-1-norm directions.

    Two sessions get equal angular spacing in the open first quadrant;
    three sessions a golden-angle spiral folded into the positive octant;
    more sessions a seeded flat Dirichlet sample.
    """
    if count < 1:
        raise ValueError(f"fan size must be >= 1, got {count}")
    n = int(num_sessions)
    if n == 1:
        dirs = np.ones((count, 1))
    elif n == 2:
        theta = (np.arange(count) + 1.0) / (count + 1.0) * (math.pi / 2.0)
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    elif n == 3:
        golden = math.pi * (3.0 - math.sqrt(5.0))
        i = np.arange(count)
        z = (i + 0.5) / count
        r = np.sqrt(1.0 - z * z)
        dirs = np.column_stack(
            [np.abs(r * np.cos(golden * i)), np.abs(r * np.sin(golden * i)), z]
        )
    else:
        rng = np.random.default_rng(seed)
        dirs = rng.dirichlet(np.ones(n), size=count)
    dirs = np.maximum(dirs, 1e-9)
    return dirs / dirs.sum(axis=1, keepdims=True)


def per_embedded_betas(model, mu, cons=None, tol=1e-12):
    """Each embedded system's own farthest scaling, in enumeration order.

    Unconstrained: 1 / radius of the system's interference matrix; with
    caps: the minimum over caps of 1 / radius of the cap-shifted matrix.
    """
    mu = as_sinr_target(mu, model)
    W = interference_stack(model, mu)
    offsets = model.row_offsets
    n = model.num_sessions
    if cons is not None:
        cons.validate(model)
        cs = coefficient_system(model, mu)
        masks = [cons.mask(m, n) for m in range(len(cons.caps))]
    betas = []
    for sel in enumerate_selections(model):
        rows = [int(offsets[i]) + k - 1 for i, k in enumerate(sel)]
        Z = W[rows]
        if cons is None:
            lam = spectral_radius(Z, tol=tol).radius
            betas.append(math.inf if lam == 0.0 else 1.0 / lam)
        else:
            shift = cs.noise_vec[rows]
            worst = max(
                spectral_radius(
                    Z + np.outer(shift / cap.cap, masks[m]), tol=tol
                ).radius
                for m, cap in enumerate(cons.caps)
            )
            betas.append(1.0 / worst)
    return np.array(betas)


def trace_boundary(model, fan, cons=None, include_embedded=True, tol=1e-12):
    """Boundary points for every direction in the fan.

    Directions are normalized to unit 1-norm.  For each, the open segment
    of scalings below beta is feasible and scalings above are not.
    per_embedded is attached when include_embedded is set and enumeration
    is within the cap.
    """
    points = []
    for raw in fan:
        d = as_sinr_target(raw, model)
        d = d / d.sum()
        if cons is None:
            beta = solve_beta(model, d, tol=tol).beta_star
        else:
            beta = solve_beta_constrained(model, d, cons, tol=tol).beta_star
        per = None
        if include_embedded:
            per = per_embedded_betas(model, d, cons=cons, tol=tol)
        points.append(
            BoundaryPoint(
                direction=d,
                beta=float(beta),
                point=beta * d,
                per_embedded=per,
                constrained=cons is not None,
            )
        )
    return points


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of a geometry probe: how many checks ran, how many failed."""

    trials: int
    checks: int
    violations: int
    examples: tuple = ()


def _criterion(model, mu, cons=None):
    if cons is None:
        return max_spectral_radius_bruteforce(model, mu)[0]
    from .feasibility import _constrained_radius_bruteforce

    return _constrained_radius_bruteforce(model, mu, cons, 1e-12, None)[0]


def log_convexity_probe(
    model, trials, t_grid=(0.25, 0.5, 0.75), seed=0, margin=1e-6
):
    """Check that geometric interpolants of feasible targets stay feasible.

    Samples pairs of strictly feasible targets (criterion at most
    1 - margin) and tests the componentwise interpolant
    mu^t * mu'^(1-t) for each t.  The expected violation count is zero.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = model.num_sessions
    checks = 0
    violations = 0
    examples = []
    for _ in range(trials):
        pair = []
        for _ in range(2):
            d = rng.uniform(0.05, 1.0, size=n)
            scale = rng.uniform(0.1, 1.0 - 10.0 * margin)
            pair.append(scale * d / _criterion(model, d))
        mu_a, mu_b = pair
        for t in t_grid:
            inter = mu_a**t * mu_b ** (1.0 - t)
            checks += 1
            if _criterion(model, inter) >= 1.0:
                violations += 1
                if len(examples) < 5:
                    examples.append((mu_a, mu_b, t))
    return ProbeReport(
        trials=trials, checks=checks, violations=violations, examples=tuple(examples)
    )


@dataclass(frozen=True)
class MidpointCounterexample:
    """Two infeasible targets whose midpoint is feasible."""

    mu_a: np.ndarray
    mu_b: np.ndarray
    midpoint: np.ndarray
    criteria: tuple


def infeasible_convexity_probe(
    model, trials=500, seed=0, t_grid=(0.25, 0.5, 0.75), cons=None
):
    """Probe the convexity of the infeasible target region.

    Two sessions: samples pairs of infeasible targets and counts convex
    combinations that come out feasible.  Without power caps that region is
    convex, so zero violations are expected; under caps convexity genuinely
    can fail, which is why the probe reports rather than asserts.
    Three or more sessions: delegates to midpoint_search (trials acts as
    the pair budget) and returns its counterexample or None — convexity is
    expected to fail there.
    """
    if model.num_sessions >= 3:
        return midpoint_search(model, budget=trials, seed=seed)
    if model.num_sessions == 1:
        raise ValueError("a single session has no infeasible targets to probe")
    rng = np.random.default_rng(seed)
    checks = 0
    violations = 0
    examples = []
    for _ in range(trials):
        pair = []
        for _ in range(2):
            d = rng.uniform(0.05, 1.0, size=2)
            pair.append(rng.uniform(1.05, 3.0) * d / _criterion(model, d, cons))
        mu_a, mu_b = pair
        for t in t_grid:
            combo = t * mu_a + (1.0 - t) * mu_b
            checks += 1
            if _criterion(model, combo, cons) < 1.0:
                violations += 1
                if len(examples) < 5:
                    examples.append((mu_a, mu_b, t))
    return ProbeReport(
        trials=trials, checks=checks, violations=violations, examples=tuple(examples)
    )


def midpoint_search(model, budget=10_000, seed=0, offsets_out=(0.02, 0.05, 0.1)):
    """Look for non-convexity of the infeasible region (three+ sessions).

    Samples directions (biased toward the corners of the simplex, where the
    binding embedded system changes), pushes each boundary point slightly
    outward, and scans pairs whose binding systems differ for a feasible
    midpoint.  Returns a MidpointCounterexample or None when the budget is
    exhausted.
    """
    if model.num_sessions < 3:
        raise ValueError("midpoint search needs at least three sessions")
    rng = np.random.default_rng(seed)
    n = model.num_sessions
    pool = []
    for i in range(300):
        alpha = 0.35 if i % 2 else 1.0
        d = np.maximum(rng.dirichlet(np.full(n, alpha)), 1e-6)
        d /= d.sum()
        radius, sel = max_spectral_radius_bruteforce(model, d)
        pool.append((d, radius, sel))
    examined = 0
    for delta in offsets_out:
        for a in range(len(pool)):
            d_a, r_a, s_a = pool[a]
            mu_a = (1.0 + delta) * d_a / r_a
            for b in range(a + 1, len(pool)):
                d_b, r_b, s_b = pool[b]
                if s_a == s_b:
                    continue
                examined += 1
                if examined > budget:
                    return None
                mu_b = (1.0 + delta) * d_b / r_b
                mid = 0.5 * (mu_a + mu_b)
                crit_mid = _criterion(model, mid)
                if crit_mid < 1.0 - 1e-9:
                    return MidpointCounterexample(
                        mu_a=mu_a,
                        mu_b=mu_b,
                        midpoint=mid,
                        criteria=(1.0 + delta, 1.0 + delta, crit_mid),
                    )
    return None


@dataclass(frozen=True)
class ZeroOutageInstance:
    """Time-varying single-receiver network with finitely many gain states.

    Pair i's gain vector (from all transmitters to its receiver) is drawn
    from the rows of gain_states[i], a K_i x N array.  A target is
    zero-outage achievable when one fixed power vector meets it under every
    state.
    """

    num_pairs: int
    states_per_receiver: tuple
    gain_states: tuple
    noise_variance: float

    def __post_init__(self):
        n = int(self.num_pairs)
        states = tuple(int(k) for k in self.states_per_receiver)
        object.__setattr__(self, "states_per_receiver", states)
        if len(states) != n:
            raise ValueError(
                f"states_per_receiver has {len(states)} entries for {n} pairs"
            )
        tables = []
        for i, table in enumerate(self.gain_states):
            arr = np.asarray(table, dtype=float)
            if arr.shape != (states[i], n):
                raise ValueError(
                    f"gain_states[{i}] must have shape ({states[i]}, {n}), "
                    f"got {arr.shape}"
                )
            tables.append(arr)
        object.__setattr__(self, "gain_states", tuple(tables))


def zero_outage_map(inst):
    """Reduce a zero-outage instance to an ordinary multicast network.

    Receiver i becomes K_i receivers of one session, one per gain state;
    a target is feasible in the result exactly when it is zero-outage
    achievable in the original system.  Positivity is validated by the
    network constructor.
    """
    gains = np.vstack(inst.gain_states)
    return NetworkModel(
        num_sessions=inst.num_pairs,
        receivers_per_session=inst.states_per_receiver,
        gains=gains,
        noise_variance=inst.noise_variance,
    )


def zero_outage_from_dict(data):
    try:
        return ZeroOutageInstance(
            num_pairs=int(data["num_pairs"]),
            states_per_receiver=tuple(data["states_per_receiver"]),
            gain_states=tuple(data["gain_states"]),
            noise_variance=float(data["noise_variance"]),
        )
    except KeyError as exc:
        raise ValueError(
            f"zero-outage instance is missing field {exc.args[0]!r}"
        ) from None


def load_zero_outage(path):
    with open(path, "r", encoding="utf-8") as fh:
        return zero_outage_from_dict(json.load(fh))


def emit_region_csv(points, path_or_stream):
    """Write boundary points as CSV: mu_1..mu_N, beta, constrained flag.

    Floats carry 17 significant digits so files reproduce bit-for-bit;
    refuses an empty point list before touching the filesystem.
    """
    points = list(points)
    if not points:
        raise ValueError("no boundary points to write")
    if hasattr(path_or_stream, "write"):
        _write_region_rows(path_or_stream, points)
    else:
        with open(path_or_stream, "w", encoding="utf-8", newline="") as fh:
            _write_region_rows(fh, points)


def _write_region_rows(stream, points):
    n = points[0].direction.size
    writer = csv.writer(stream)
    writer.writerow([f"mu_{i + 1}" for i in range(n)] + ["beta", "constrained"])
    for pt in points:
        row = [format(x, ".17g") for x in pt.direction]
        row.append(format(pt.beta, ".17g"))
        row.append("1" if pt.constrained else "0")
        writer.writerow(row)


def read_region_csv(path):
    """Read back a boundary CSV as (directions, betas, constrained flags)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 2
        dirs, betas, flags = [], [], []
        for row in reader:
            dirs.append([float(x) for x in row[:n]])
            betas.append(float(row[n]))
            flags.append(row[n + 1] == "1")
    return np.array(dirs), np.array(betas), np.array(flags)


def compare_region_csv(path_a, path_b, rel_tol=GOLDEN_REL_TOL):
    """Largest relative beta deviation between two boundary CSV files.

    Returns (ok, worst): ok is False when shapes differ, directions drift
    beyond rel_tol, or any beta deviates by more than rel_tol relatively.
    """
    dirs_a, betas_a, flags_a = read_region_csv(path_a)
    dirs_b, betas_b, flags_b = read_region_csv(path_b)
    if dirs_a.shape != dirs_b.shape or not np.array_equal(flags_a, flags_b):
        return False, math.inf
    if np.max(np.abs(dirs_a - dirs_b)) > rel_tol:
        return False, math.inf
    worst = float(np.max(np.abs(betas_a - betas_b) / np.maximum(betas_a, 1e-300)))
    return worst <= rel_tol, worst
