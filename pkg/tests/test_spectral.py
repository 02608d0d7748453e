import math

import numpy as np
import pytest

from multicast_sinr import (
    NetworkModel,
    NoConvergenceError,
    NotIrreducibleError,
    enumerate_selections,
    interference_matrix,
    is_irreducible,
    is_primitive,
    max_spectral_radius_bruteforce,
    primitive_set_sufficient,
    spectral_radius,
)
from multicast_sinr.spectral import stacked_set_sufficient
from multicast_sinr.verify import random_model

from conftest import unicast_unit_model


def char_poly_radius(X):
    """Largest |root| of the characteristic polynomial, coefficients by hand.

    Independent oracle for 2x2 and 3x3: the coefficients come from traces,
    principal minors and the explicit determinant expansion, the roots from
    numpy's companion-matrix solver.
    """
    n = X.shape[0]
    if n == 2:
        coeffs = [1.0, -(X[0, 0] + X[1, 1]),
                  X[0, 0] * X[1, 1] - X[0, 1] * X[1, 0]]
    elif n == 3:
        tr = X[0, 0] + X[1, 1] + X[2, 2]
        minors = (
            X[1, 1] * X[2, 2] - X[1, 2] * X[2, 1]
            + X[0, 0] * X[2, 2] - X[0, 2] * X[2, 0]
            + X[0, 0] * X[1, 1] - X[0, 1] * X[1, 0]
        )
        det = (
            X[0, 0] * (X[1, 1] * X[2, 2] - X[1, 2] * X[2, 1])
            - X[0, 1] * (X[1, 0] * X[2, 2] - X[1, 2] * X[2, 0])
            + X[0, 2] * (X[1, 0] * X[2, 1] - X[1, 1] * X[2, 0])
        )
        coeffs = [1.0, -tr, minors, -det]
    else:
        raise ValueError("oracle covers 2x2 and 3x3 only")
    return max(abs(r) for r in np.roots(coeffs))


class TestSpectralRadius:
    def test_permutation_matrix(self):
        res = spectral_radius(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert res.radius == pytest.approx(1.0, abs=1e-12)
        assert res.converged
        assert np.all(res.eigvec > 0.0)
        assert np.linalg.norm(res.eigvec) == pytest.approx(1.0, abs=1e-12)

    def test_two_by_two_closed_form(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            a, b = rng.uniform(0.05, 4.0, size=2)
            res = spectral_radius(np.array([[0.0, a], [b, 0.0]]))
            assert res.radius == pytest.approx(math.sqrt(a * b), abs=1e-12)

    def test_homogeneity(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        for c in (0.5, 2.0):
            assert spectral_radius(c * X).radius == pytest.approx(c, abs=1e-12)

    def test_homogeneity_random(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            X = rng.uniform(0.01, 1.0, (n, n))
            np.fill_diagonal(X, 0.0)
            c = float(rng.uniform(0.1, 10.0))
            lam = spectral_radius(X).radius
            assert spectral_radius(c * X).radius == pytest.approx(
                c * lam, rel=1e-11
            )

    def test_monotone_in_entries(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            X = rng.uniform(0.01, 1.0, (n, n))
            np.fill_diagonal(X, 0.0)
            Y = X + rng.uniform(0.0, 0.5, (n, n))
            assert spectral_radius(X).radius <= spectral_radius(Y).radius + 1e-12

    def test_matches_char_poly_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            n = int(rng.integers(2, 4))
            X = rng.uniform(0.05, 1.0, (n, n))
            assert spectral_radius(X).radius == pytest.approx(
                char_poly_radius(X), abs=1e-10
            )

    def test_residual_invariant(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            X = rng.uniform(0.05, 1.0, (4, 4))
            res = spectral_radius(X, tol=1e-12)
            resid = np.max(np.abs(X @ res.eigvec - res.radius * res.eigvec))
            assert resid <= 1e-12 * max(1.0, res.radius)

    def test_one_by_one(self):
        assert spectral_radius(np.array([[0.0]])).radius == 0.0
        assert spectral_radius(np.array([[2.5]])).radius == pytest.approx(2.5)

    def test_rejects_reducible(self):
        with pytest.raises(NotIrreducibleError):
            spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError, match="nonnegative"):
            spectral_radius(np.array([[0.0, -1.0], [1.0, 0.0]]))

    def test_no_convergence_guard(self):
        X = np.array([[0.0, 0.3], [0.7, 0.0]])
        with pytest.raises(NoConvergenceError):
            spectral_radius(X, max_iter=1)

    def test_deleting_indices_keeps_radius_subunit(self):
        # unit-diagonal systems with subunit interference radius stay
        # subunit after any row/column deletion
        rng = np.random.default_rng(15)
        for _ in range(20):
            n = int(rng.integers(3, 7))
            Z = rng.uniform(0.01, 1.0, (n, n))
            np.fill_diagonal(Z, 0.0)
            Z *= rng.uniform(0.2, 0.95) / spectral_radius(Z).radius
            assert spectral_radius(Z).radius < 1.0
            for drop in range(n):
                keep = [i for i in range(n) if i != drop]
                assert spectral_radius(Z[np.ix_(keep, keep)]).radius < 1.0


class TestIrreducibility:
    def test_cycle_is_irreducible(self):
        assert is_irreducible(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_one_way_edge_is_not(self):
        assert not is_irreducible(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_positive_offdiagonal_always_is(self, two_session_model):
        for sel in enumerate_selections(two_session_model):
            Z = interference_matrix(two_session_model, [0.5, 2.0], sel)
            assert is_irreducible(Z)

    def test_single_node(self):
        assert is_irreducible(np.array([[0.0]]))

    def test_disconnected_relaxed_model_is_caught(self):
        gains = np.array([[1.0, 1.0, 0.0],
                          [0.0, 1.0, 1.0],
                          [0.0, 1.0, 1.0]])
        m = NetworkModel(3, (1, 1, 1), gains, 0.1, allow_zero_gains=True)
        Z = interference_matrix(m, [1.0, 1.0, 1.0], (1, 1, 1))
        assert not is_irreducible(Z)
        with pytest.raises(NotIrreducibleError):
            spectral_radius(Z)


class TestPrimitivity:
    def test_period_two_cycle(self):
        assert not is_primitive(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_self_loop_forces_aperiodicity(self):
        assert is_primitive(np.array([[1.0, 1.0], [1.0, 0.0]]))

    def test_positive_offdiagonal_three_by_three(self):
        rng = np.random.default_rng(5)
        Z = rng.uniform(0.1, 1.0, (3, 3))
        np.fill_diagonal(Z, 0.0)
        assert is_primitive(Z)

    def test_single_entry(self):
        assert not is_primitive(np.array([[0.0]]))
        assert is_primitive(np.array([[0.4]]))

    def test_agrees_with_boolean_powers(self):
        # X is primitive iff some boolean power up to (n-1)^2 + 1 is full
        rng = np.random.default_rng(6)
        for _ in range(60):
            n = int(rng.integers(2, 5))
            X = (rng.random((n, n)) < 0.4).astype(float)
            if not is_irreducible(X):
                continue
            P = X > 0
            full = False
            Q = P.copy()
            for _ in range((n - 1) ** 2 + 1):
                if Q.all():
                    full = True
                    break
                Q = (Q.astype(int) @ P.astype(int)) > 0
            assert is_primitive(X) == full


class TestSetPrimitivity:
    def test_three_sessions_all_positive(self, three_session_model):
        Zs = [
            interference_matrix(three_session_model, [1.0, 1.0, 1.0], sel)
            for sel in enumerate_selections(three_session_model)
        ]
        assert primitive_set_sufficient(Zs)

    def test_two_sessions_never_pass(self, two_session_model):
        Zs = [
            interference_matrix(two_session_model, [1.0, 1.0], sel)
            for sel in enumerate_selections(two_session_model)
        ]
        assert not primitive_set_sufficient(Zs)

    def test_empty_set_vacuously_true(self):
        assert primitive_set_sufficient([])

    def test_stacked_shortcut_matches_enumeration(self):
        from multicast_sinr.model import interference_stack

        rng = np.random.default_rng(8)
        for _ in range(40):
            m = random_model(rng)
            mu = rng.uniform(0.1, 2.0, m.num_sessions)
            # sparsify some entries through a relaxed-validation clone
            gains = m.gains.copy()
            gains[rng.random(gains.shape) < 0.2] = 0.0
            gains[:, :] = np.maximum(gains, 0.0)
            for i in range(m.num_sessions):
                rows = slice(m.row_offsets[i], m.row_offsets[i + 1])
                gains[rows, i] = 1.0  # keep direct links alive
            relaxed = NetworkModel(
                m.num_sessions,
                m.receivers_per_session,
                gains,
                0.1,
                allow_zero_gains=True,
            )
            W = interference_stack(relaxed, mu)
            Zs = [
                interference_matrix(relaxed, mu, sel)
                for sel in enumerate_selections(relaxed)
            ]
            assert stacked_set_sufficient(W > 0, relaxed.row_offsets) == (
                primitive_set_sufficient(Zs)
            )


class TestBruteForce:
    def test_unicast_reduces_to_single_system(self):
        m = unicast_unit_model()
        lam, sel = max_spectral_radius_bruteforce(m, [1.0, 1.0])
        assert sel == (1, 1)
        assert lam == pytest.approx(1.0, abs=1e-12)

    def test_two_session_table(self, two_session_model):
        # closed form over the gain table: worst ratio per session
        lam, sel = max_spectral_radius_bruteforce(two_session_model, [1.0, 1.0])
        expected = math.sqrt((0.6801 / 0.5326) * (0.5789 / 0.4068))
        assert lam == pytest.approx(expected, abs=1e-11)
        assert sel == (1, 2)
