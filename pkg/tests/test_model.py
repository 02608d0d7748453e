import json

import numpy as np
import pytest

from multicast_sinr import (
    NetworkModel,
    SelectionCapError,
    coefficient_system,
    embedded_system,
    enumerate_selections,
    interference_matrix,
    interference_stack,
    network_from_dict,
    per_receiver_sinr,
    session_sinr,
)
from multicast_sinr.model import as_sinr_target

from conftest import unicast_unit_model


class TestConstruction:
    def test_rejects_zero_gain_naming_entry(self):
        gains = np.ones((2, 2))
        gains[1, 0] = 0.0
        with pytest.raises(ValueError, match=r"gains\[1\]\[0\]"):
            NetworkModel(2, (1, 1), gains, 0.1)

    def test_rejects_nonpositive_noise(self):
        with pytest.raises(ValueError, match="noise_variance"):
            NetworkModel(1, (1,), np.ones((1, 1)), 0.0)

    def test_rejects_row_count_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            NetworkModel(2, (2, 2), np.ones((3, 2)), 0.1)

    def test_rejects_empty_session(self):
        with pytest.raises(ValueError, match=">= 1"):
            NetworkModel(2, (1, 0), np.ones((1, 2)), 0.1)

    def test_relaxed_mode_admits_zero_gains(self):
        gains = np.ones((2, 2))
        gains[0, 1] = 0.0
        m = NetworkModel(2, (1, 1), gains, 0.1, allow_zero_gains=True)
        assert m.gains[0, 1] == 0.0

    def test_gains_are_frozen(self, two_session_model):
        with pytest.raises(ValueError):
            two_session_model.gains[0, 0] = 2.0

    def test_row_layout_is_session_major(self, two_session_model):
        assert two_session_model.row_of(1, 1) == 0
        assert two_session_model.row_of(1, 2) == 1
        assert two_session_model.row_of(2, 1) == 2
        assert two_session_model.row_of(2, 2) == 3
        with pytest.raises(ValueError, match="receiver 3"):
            two_session_model.row_of(1, 3)

    def test_target_rejects_zero_component(self, two_session_model):
        with pytest.raises(ValueError, match="remove it from the model"):
            as_sinr_target([1.0, 0.0], two_session_model)


class TestSinr:
    def test_zero_power_gives_zero_sinr(self, two_session_model):
        assert np.all(per_receiver_sinr(two_session_model, [0.0, 0.0]) == 0.0)
        assert np.all(session_sinr(two_session_model, [0.0, 0.0]) == 0.0)

    def test_single_session_has_no_interference(self):
        m = NetworkModel(1, (1,), [[2.0]], 1.0)
        # g*p / sigma2 = 2*3/1
        assert per_receiver_sinr(m, [3.0]) == pytest.approx([6.0])

    def test_two_session_table_receiver_values(self, two_session_model):
        # direct evaluation of the SINR quotient at p = (1, 1), sigma2 = 0.1
        got = per_receiver_sinr(two_session_model, [1.0, 1.0])
        assert got[0] == pytest.approx(0.5326 / (0.6801 + 0.1), rel=1e-12)
        assert got[3] == pytest.approx(0.4068 / (0.5789 + 0.1), rel=1e-12)

    def test_session_sinr_is_min_over_receivers(self, two_session_model):
        rec = per_receiver_sinr(two_session_model, [1.0, 1.0])
        got = session_sinr(two_session_model, [1.0, 1.0])
        assert got[0] == pytest.approx(min(rec[0], rec[1]), rel=0, abs=0)
        assert got[0] == pytest.approx(
            min(0.5326 / 0.7801, 0.5539 / 0.4672), rel=1e-12
        )

    def test_singleton_session_equals_receiver(self):
        m = unicast_unit_model()
        assert np.array_equal(
            session_sinr(m, [1.0, 2.0]), per_receiver_sinr(m, [1.0, 2.0])
        )

    def test_dimension_mismatch(self, two_session_model):
        with pytest.raises(ValueError, match="3 entries"):
            per_receiver_sinr(two_session_model, [1.0, 1.0, 1.0])


class TestCoefficientSystem:
    def test_unit_gains(self):
        m = unicast_unit_model(sigma2=0.3)
        cs = coefficient_system(m, [1.0, 1.0])
        assert np.array_equal(cs.a_matrix, [[1.0, -1.0], [-1.0, 1.0]])
        assert np.array_equal(cs.noise_vec, [0.3, 0.3])

    def test_doubling_one_target_scales_its_block(self, two_session_model):
        base = coefficient_system(two_session_model, [1.0, 1.0])
        bumped = coefficient_system(two_session_model, [2.0, 1.0])
        assert np.allclose(bumped.a_matrix[:2, 1], 2.0 * base.a_matrix[:2, 1])
        assert np.allclose(bumped.noise_vec[:2], 2.0 * base.noise_vec[:2])
        assert np.array_equal(bumped.a_matrix[2:], base.a_matrix[2:])
        assert np.array_equal(bumped.a_matrix[:, 0][:2], [1.0, 1.0])

    def test_two_session_table_row(self, two_session_model):
        # hand arithmetic for the last receiver at mu = (1, 1), sigma2 = 0.1
        cs = coefficient_system(two_session_model, [1.0, 1.0])
        row = cs.row_index[(2, 2)]
        assert cs.a_matrix[row] == pytest.approx([-0.5789 / 0.4068, 1.0], rel=1e-15)
        assert cs.noise_vec[row] == pytest.approx(0.1 / 0.4068, rel=1e-15)

    def test_inequality_matches_sinr_definition(self):
        # A(mu) p >= n(mu) holds exactly when every session meets its target
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 5))
            ks = tuple(int(rng.integers(1, 4)) for _ in range(n))
            m = NetworkModel(n, ks, rng.uniform(0.05, 1.0, (sum(ks), n)), 0.1)
            mu = rng.uniform(0.05, 2.0, n)
            p = rng.uniform(0.0, 3.0, n)
            cs = coefficient_system(m, mu)
            lhs = np.all(session_sinr(m, p) >= mu)
            rhs = np.all(cs.a_matrix @ p >= cs.noise_vec)
            assert lhs == rhs


class TestEmbeddedSystems:
    def test_unicast_selection_returns_whole_system(self):
        m = unicast_unit_model()
        cs = coefficient_system(m, [1.0, 1.0])
        G, nG = embedded_system(m, [1.0, 1.0], (1, 1))
        assert np.array_equal(G, cs.a_matrix)
        assert np.array_equal(nG, cs.noise_vec)

    def test_four_distinct_systems(self, two_session_model):
        mats = [
            embedded_system(two_session_model, [1.0, 1.0], sel)[0]
            for sel in enumerate_selections(two_session_model)
        ]
        assert len(mats) == 4
        for i in range(4):
            for j in range(i + 1, 4):
                assert not np.array_equal(mats[i], mats[j])

    def test_rows_come_from_coefficient_system(self, two_session_model):
        mu = [0.7, 1.3]
        cs = coefficient_system(two_session_model, mu)
        for sel in enumerate_selections(two_session_model):
            G, nG = embedded_system(two_session_model, mu, sel)
            for i, k in enumerate(sel):
                row = cs.row_index[(i + 1, k)]
                assert np.array_equal(G[i], cs.a_matrix[row])
                assert nG[i] == cs.noise_vec[row]

    def test_selection_out_of_range(self, two_session_model):
        with pytest.raises(ValueError, match="out of range"):
            embedded_system(two_session_model, [1.0, 1.0], (3, 1))

    def test_enumeration_counts_and_order(self):
        m1 = NetworkModel(3, (1, 1, 1), np.ones((3, 3)), 0.1)
        assert list(enumerate_selections(m1)) == [(1, 1, 1)]
        m2 = NetworkModel(2, (2, 2), np.ones((4, 2)), 0.1)
        assert list(enumerate_selections(m2)) == [(1, 1), (1, 2), (2, 1), (2, 2)]
        m3 = NetworkModel(4, (3, 3, 3, 3), np.ones((12, 4)), 0.1)
        assert sum(1 for _ in enumerate_selections(m3)) == 81

    def test_enumeration_cap(self):
        m = NetworkModel(2, (2, 2), np.ones((4, 2)), 0.1)
        with pytest.raises(SelectionCapError, match="cap"):
            list(enumerate_selections(m, cap=3))


class TestInterferenceMatrix:
    def test_unit_gains(self):
        m = unicast_unit_model()
        Z = interference_matrix(m, [1.0, 1.0], (1, 1))
        assert np.array_equal(Z, [[0.0, 1.0], [1.0, 0.0]])

    def test_identity_minus_embedded(self, two_session_model):
        mu = [0.4, 2.2]
        for sel in enumerate_selections(two_session_model):
            Z = interference_matrix(two_session_model, mu, sel)
            G, _ = embedded_system(two_session_model, mu, sel)
            assert np.array_equal(np.eye(2) - Z, G)
            assert np.all(Z >= 0.0)
            assert np.all(np.diag(Z) == 0.0)

    def test_target_scaling_acts_per_row(self, two_session_model):
        # Z(mu) equals diag(mu) times Z(all-ones), entrywise
        mu = np.array([0.3, 1.7])
        for sel in enumerate_selections(two_session_model):
            Z1 = interference_matrix(two_session_model, [1.0, 1.0], sel)
            Zmu = interference_matrix(two_session_model, mu, sel)
            assert np.allclose(Zmu, np.diag(mu) @ Z1, rtol=0, atol=1e-15)

    def test_stack_rows_match_matrices(self, three_session_model):
        mu = [0.5, 1.0, 1.5]
        W = interference_stack(three_session_model, mu)
        offsets = three_session_model.row_offsets
        for sel in enumerate_selections(three_session_model):
            Z = interference_matrix(three_session_model, mu, sel)
            for i, k in enumerate(sel):
                assert np.array_equal(Z[i], W[offsets[i] + k - 1])


class TestScenarioLoading:
    def test_missing_field(self):
        with pytest.raises(ValueError, match="noise_variance"):
            network_from_dict({"num_sessions": 1, "receivers_per_session": [1],
                               "gains": [[1.0]]})

    def test_loader_names_bad_gain(self, tmp_path):
        data = {
            "num_sessions": 2,
            "receivers_per_session": [1, 1],
            "noise_variance": 0.1,
            "gains": [[1.0, 1.0], [1.0, -0.5]],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        from multicast_sinr import load_network

        with pytest.raises(ValueError, match=r"gains\[1\]\[1\]"):
            load_network(path)
