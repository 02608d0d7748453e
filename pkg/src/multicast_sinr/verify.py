"""Randomized cross-validation of the whole stack.

Every check pits one computation path against an independent one (spectral
verdicts vs. the LP oracle, iterative balancing vs. exhaustive enumeration,
structural identities vs. direct evaluation) on seeded random instances.
The suite powers the ``verify`` CLI command; failures report the seed that
reproduces them.
"""

from dataclasses import dataclass

import numpy as np

from .balancer import solve_beta
from .feasibility import (
    BOUNDARY,
    ConstraintSet,
    FEASIBLE,
    INFEASIBLE,
    PowerCap,
    check_constrained,
    check_unconstrained,
    cross_slack_product,
    lp_oracle,
)
from .model import NetworkModel, enumerate_selections
from .region import log_convexity_probe
from .spectral import max_spectral_radius_bruteforce, spectral_radius


def random_model(rng, num_sessions=None, receivers=None, sigma2=0.1):
    """Random network: gains uniform on (1e-6, 1), noise 0.1 by default."""
    n = int(num_sessions) if num_sessions else int(rng.integers(2, 5))
    if receivers is None:
        ks = tuple(int(rng.integers(1, 4)) for _ in range(n))
    elif np.isscalar(receivers):
        ks = (int(receivers),) * n
    else:
        ks = tuple(int(k) for k in receivers)
    gains = rng.uniform(1e-6, 1.0, size=(sum(ks), n))
    return NetworkModel(
        num_sessions=n,
        receivers_per_session=ks,
        gains=gains,
        noise_variance=sigma2,
    )


def target_with_margin(rng, model, band=1e-6, low=0.2, high=1.8):
    """Random target whose criterion value c avoids the boundary band.

    Scales a random positive direction so the decisive max radius equals c,
    drawn uniformly from [low, high] but at least 10*band away from 1.
    Returns (target, c).
    """
    d = rng.uniform(0.05, 1.0, size=model.num_sessions)
    radius, _ = max_spectral_radius_bruteforce(model, d)
    while True:
        c = float(rng.uniform(low, high))
        if abs(c - 1.0) > 10.0 * band:
            break
    return (c / radius) * d, c


def random_constraints(rng, model):
    """One to three caps over random nonempty session subsets."""
    n = model.num_sessions
    caps = []
    for _ in range(int(rng.integers(1, 4))):
        size = int(rng.integers(1, n + 1))
        sessions = tuple(
            int(s) + 1 for s in rng.choice(n, size=size, replace=False)
        )
        cap = float(np.exp(rng.uniform(np.log(0.5), np.log(50.0))))
        caps.append(PowerCap(sessions, cap))
    return ConstraintSet(tuple(caps))


def constrained_target_with_margin(rng, model, cons, band=1e-6):
    """Random target whose cap-shifted criterion avoids the boundary band."""
    from .feasibility import _constrained_radius_bruteforce

    for _ in range(100):
        d = rng.uniform(0.05, 1.0, size=model.num_sessions)
        scale = float(np.exp(rng.uniform(np.log(0.05), np.log(3.0))))
        mu = scale * d
        crit, _ = _constrained_radius_bruteforce(model, mu, cons, 1e-12, None)
        if abs(crit - 1.0) > 10.0 * band:
            return mu, crit
    raise RuntimeError("could not sample a target away from the boundary band")


@dataclass
class CheckResult:
    name: str
    checks: int
    failures: int
    detail: str = ""

    @property
    def passed(self):
        return self.failures == 0


def _agree(verdict, oracle):
    return (verdict.status == FEASIBLE) == (oracle.status == FEASIBLE)


def check_unconstrained_vs_lp(rng, trials, model_factory, inject_bug=False):
    """Spectral verdict and LP oracle must agree away from the boundary."""
    failures = 0
    detail = ""
    for t in range(trials):
        model = model_factory(rng)
        mu, _ = target_with_margin(rng, model)
        verdict = check_unconstrained(model, mu, method="brute")
        if inject_bug:
            flipped = FEASIBLE if verdict.status != FEASIBLE else INFEASIBLE
            verdict = type(verdict)(
                status=flipped,
                criterion_value=verdict.criterion_value,
                witness=verdict.witness,
                margin=verdict.margin,
            )
        oracle = lp_oracle(model, mu)
        if verdict.status == BOUNDARY or not _agree(verdict, oracle):
            failures += 1
            if not detail:
                detail = f"trial {t}: {verdict.status} vs {oracle.status}"
    return CheckResult("unconstrained-vs-lp", trials, failures, detail)


def check_constrained_vs_lp(rng, trials, model_factory):
    """Cap-shifted verdict and constrained LP oracle must agree."""
    failures = 0
    detail = ""
    for t in range(trials):
        model = model_factory(rng)
        cons = random_constraints(rng, model)
        mu, _ = constrained_target_with_margin(rng, model, cons)
        verdict = check_constrained(model, mu, cons, method="brute")
        oracle = lp_oracle(model, mu, cons)
        if verdict.status == BOUNDARY or not _agree(verdict, oracle):
            failures += 1
            if not detail:
                detail = f"trial {t}: {verdict.status} vs {oracle.status}"
    return CheckResult("constrained-vs-lp", trials, failures, detail)


def check_radius_homogeneity(rng, trials, model_factory):
    """Scaling a matrix scales its radius: radius(cX) = c * radius(X)."""
    failures = 0
    detail = ""
    for t in range(trials):
        n = int(rng.integers(2, 6))
        X = rng.uniform(0.01, 1.0, size=(n, n))
        np.fill_diagonal(X, 0.0)
        base = spectral_radius(X).radius
        for c in (0.5, 2.0, 7.3):
            scaled = spectral_radius(c * X).radius
            if abs(scaled - c * base) > 1e-9 * max(1.0, c * base):
                failures += 1
                detail = detail or f"trial {t}: c={c}, {scaled} vs {c * base}"
    return CheckResult("radius-homogeneity", trials, failures, detail)


def check_submatrix_radius(rng, trials, model_factory):
    """Deleting rows/columns of a subunit-radius pattern keeps it subunit."""
    failures = 0
    detail = ""
    for t in range(trials):
        n = int(rng.integers(3, 7))
        Z = rng.uniform(0.01, 1.0, size=(n, n))
        np.fill_diagonal(Z, 0.0)
        Z *= rng.uniform(0.2, 0.95) / spectral_radius(Z).radius
        for drop in range(n):
            keep = [i for i in range(n) if i != drop]
            sub = Z[np.ix_(keep, keep)]
            if spectral_radius(sub).radius >= 1.0:
                failures += 1
                detail = detail or f"trial {t}: deletion {drop}"
    return CheckResult("submatrix-radius", trials, failures, detail)


def check_cross_slack(rng, trials, model_factory):
    """Cross-evaluated slack products of one-row-different systems are <= 0."""
    failures = 0
    checks = 0
    detail = ""
    for t in range(trials):
        model = model_factory(rng)
        mu, _ = target_with_margin(rng, model, low=0.2, high=0.9)
        selections = list(enumerate_selections(model))
        for a in range(len(selections)):
            for b in range(a + 1, len(selections)):
                sa, sb = selections[a], selections[b]
                if sum(x != y for x, y in zip(sa, sb)) != 1:
                    continue
                checks += 1
                if cross_slack_product(model, mu, sa, sb) > 1e-12:
                    failures += 1
                    detail = detail or f"trial {t}: {sa} vs {sb}"
    return CheckResult("cross-slack-sign", checks, failures, detail)


def check_trace_monotone(rng, trials, model_factory):
    """Balancing traces never decrease and stay under the exhaustive bound."""
    failures = 0
    detail = ""
    for t in range(trials):
        model = model_factory(rng)
        mu, _ = target_with_margin(rng, model)
        report = solve_beta(model, mu)
        radius, _ = max_spectral_radius_bruteforce(model, mu)
        bound = 1.0 / radius
        trace = report.beta_trace
        if np.any(np.diff(trace) < 0.0):
            failures += 1
            detail = detail or f"trial {t}: decreasing trace"
        elif trace.size and trace.max() > bound + 1e-10:
            failures += 1
            detail = detail or f"trial {t}: trace above bound"
        elif report.certified and abs(report.beta_star - bound) > 1e-8:
            failures += 1
            detail = detail or (
                f"trial {t}: beta {report.beta_star} vs bound {bound}"
            )
    return CheckResult("trace-monotone", trials, failures, detail)


def check_downward(rng, trials, model_factory):
    """Shrinking a feasible target keeps it feasible."""
    failures = 0
    detail = ""
    for t in range(trials):
        model = model_factory(rng)
        mu, _ = target_with_margin(rng, model, low=0.2, high=0.95)
        for c in (0.1, 0.5, 0.9):
            verdict = check_unconstrained(model, c * mu, method="brute")
            if verdict.status != FEASIBLE:
                failures += 1
                detail = detail or f"trial {t}: c={c} -> {verdict.status}"
    return CheckResult("downward-comprehensive", trials, failures, detail)


def check_log_convexity(rng, trials, model_factory):
    """Geometric interpolants of feasible targets stay feasible."""
    failures = 0
    detail = ""
    models = max(1, trials // 10)
    for t in range(models):
        model = model_factory(rng)
        report = log_convexity_probe(model, trials=10, seed=int(rng.integers(2**31)))
        if report.violations:
            failures += report.violations
            detail = detail or f"model {t}: {report.violations} violations"
    return CheckResult("log-convexity", models, failures, detail)


def run_suite(trials=200, seed=1, model_factory=None, inject_bug=False, out=print):
    """Run every check; print one line per check; True iff all pass.

    With trials = 0 the suite passes vacuously (a warning is printed).
    """
    if trials == 0:
        out("WARNING: 0 trials requested; suite passes vacuously")
        return True
    factory = model_factory or random_model
    small = max(1, trials // 4)
    plan = [
        (check_unconstrained_vs_lp, trials, {"inject_bug": inject_bug}),
        (check_constrained_vs_lp, trials, {}),
        (check_radius_homogeneity, small, {}),
        (check_submatrix_radius, small, {}),
        (check_cross_slack, small, {}),
        (check_trace_monotone, small, {}),
        (check_downward, small, {}),
        (check_log_convexity, small, {}),
    ]
    all_ok = True
    for func, count, kwargs in plan:
        rng = np.random.default_rng(seed)
        result = func(rng, count, factory, **kwargs)
        if result.passed:
            out(f"PASS {result.name} ({result.checks} checks)")
        else:
            all_ok = False
            out(
                f"FAIL {result.name}: {result.failures}/{result.checks} failed "
                f"[seed={seed}] {result.detail}"
            )
    return all_ok
