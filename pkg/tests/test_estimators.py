import math

import numpy as np
import pytest

from samplize import (
    fidelity_exact,
    haar_random,
    plus_state,
    psi_x,
    trace_distance_exact,
    zero_state,
)
from samplize.circuits import prefix_distribution
from samplize.estimators import (
    ancilla_count,
    folklore_estimate,
    helstrom_success,
    phase_to_estimates,
    query_estimate,
    samplized_estimate,
    swap_test_prob,
    _samplized_qpe_state,
)
from samplize.errors import DimensionMismatchError
from samplize.samplizer import DEFAULT_ROUNDS_CAP

SQRT_HALF = math.sqrt(0.5)


class TestSwapTestProb:
    def test_identical(self):
        s = haar_random(2, seed=0)
        assert abs(swap_test_prob(s, s) - 1.0) < 1e-12

    def test_orthogonal(self):
        assert abs(swap_test_prob(psi_x(0.0), psi_x(1.0)) - 0.5) < 1e-12

    def test_zero_plus(self):
        assert abs(swap_test_prob(zero_state(), plus_state()) - 0.75) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            swap_test_prob(zero_state(1), zero_state(2))


class TestFolklore:
    def test_identical_states_concentrate(self):
        s = haar_random(1, seed=1)
        for seed in range(5):
            est = folklore_estimate(s, s, 0.2, seed)
            assert est.F_hat == 1.0
            assert est.T_hat == 0.0

    def test_ledger_exact(self):
        est = folklore_estimate(zero_state(), plus_state(), 0.2, 0)
        n = math.ceil(2.0 / 0.2**4)
        assert est.ledger.to_json() == {"S1": n, "S2": n, "input_copies": 0}
        assert est.ledger.total == 2 * n

    def test_monte_carlo_accuracy(self):
        phi, psi = zero_state(), psi_x(0.6)
        t_true = trace_distance_exact(phi, psi)
        hits = 0
        trials = 200
        for seed in range(trials):
            est = folklore_estimate(phi, psi, 0.2, seed)
            if abs(est.T_hat - t_true) <= 0.2:
                hits += 1
        assert hits / trials >= 0.9

    def test_orthogonal_clamping(self):
        for seed in range(20):
            est = folklore_estimate(psi_x(0.0), psi_x(1.0), 0.3, seed)
            assert 0.0 <= est.F_hat <= 1.0
            assert 0.0 <= est.T_hat <= 1.0
            assert not math.isnan(est.T_hat)

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            folklore_estimate(zero_state(), plus_state(), 1.5, 0)


class TestAncillaCount:
    def test_matches_construction(self):
        # p accuracy bits plus ceil(log2(2 + 1/(2 eps))) padding bits
        t = ancilla_count(0.1, 0.05 / math.pi)
        p = math.ceil(math.log2(math.pi / 0.05))
        assert t == p + 3

    def test_monotone_in_precision(self):
        assert ancilla_count(0.1, 0.4 / math.pi) <= ancilla_count(0.1, 0.1 / math.pi)


class TestQueryEstimate:
    def test_identical_states_exact(self):
        s = haar_random(2, seed=5)
        est = query_estimate(s, s, 0.1, 0.05, 0)
        assert (est.T_hat, est.F_hat, est.gamma_tilde) == (0.0, 1.0, 0.0)

    def test_exact_representability_zero_plus(self):
        for seed in range(50):
            est = query_estimate(zero_state(), plus_state(), 0.1, 0.05, seed)
            assert abs(est.T_hat - SQRT_HALF) < 1e-10
            assert abs(est.F_hat - SQRT_HALF) < 1e-10
            assert est.gamma_tilde in (0.25, 0.75)

    def test_ledger_and_queries(self):
        est = query_estimate(zero_state(), plus_state(), 0.1, 0.05, 0)
        assert est.t == ancilla_count(0.1, 0.05 / math.pi)
        q = 2**est.t - 1
        assert est.queries == {1: q, 2: q}
        assert est.ledger.to_json() == {"S1": 0, "S2": 0, "input_copies": 1}

    def test_postprocessing_identity(self):
        for seed in range(30):
            phi = haar_random(1, seed=seed)
            psi = haar_random(1, seed=700 + seed)
            est = query_estimate(phi, psi, 0.2, 0.2, seed)
            assert abs(est.T_hat**2 + est.F_hat**2 - 1.0) < 1e-12

    def test_statistical_contract(self):
        trials_per_pair = 50
        pairs = [(haar_random(1 + k % 3, seed=k), haar_random(1 + k % 3, seed=300 + k))
                 for k in range(4)]
        hits = total = 0
        for phi, psi in pairs:
            t_true = trace_distance_exact(phi, psi)
            f_true = fidelity_exact(phi, psi)
            for seed in range(trials_per_pair):
                est = query_estimate(phi, psi, 0.1, 0.05, seed)
                total += 1
                if abs(est.T_hat - t_true) < 0.05 and abs(est.F_hat - f_true) < 0.05:
                    hits += 1
        assert hits / total >= 0.87

    def test_median_unbiased_direction(self):
        phi = haar_random(1, seed=42)
        psi = haar_random(1, seed=43)
        t_true = trace_distance_exact(phi, psi)
        vals = [query_estimate(phi, psi, 0.1, 0.05, s).T_hat for s in range(500)]
        assert abs(float(np.median(vals)) - t_true) <= 0.05


class TestSamplizedEstimate:
    def test_identity_pair_phase_distribution(self):
        # exact run reads phase 0 with certainty; channel noise eats <= delta
        z = zero_state()
        t = ancilla_count(0.1, 0.25 / math.pi)
        rho, _, _ = _samplized_qpe_state(t, z, z, 0.1, DEFAULT_ROUNDS_CAP, None)
        probs = prefix_distribution(rho, t)
        assert probs[0] >= 0.89

    def test_identity_pair_estimates(self):
        z = zero_state()
        good = 0
        for seed in range(100):
            est = samplized_estimate(z, z, 0.25, seed)
            if est.T_hat <= 0.05 and est.F_hat >= 0.95:
                good += 1
        assert good >= 85

    def test_success_rate_zero_plus(self):
        phi, psi = zero_state(), plus_state()
        t_true, f_true = SQRT_HALF, SQRT_HALF
        hits = 0
        trials = 100
        for seed in range(trials):
            est = samplized_estimate(phi, psi, 0.25, seed)
            if abs(est.T_hat - t_true) <= 0.25 and abs(est.F_hat - f_true) <= 0.25:
                hits += 1
        assert hits / trials >= 2 / 3 - 0.07

    def test_ledger_composition(self):
        est = samplized_estimate(zero_state(), plus_state(), 0.3, 0)
        q = 2**est.t - 1
        r = est.rounds_per_query
        assert r is not None and r & (r - 1) == 0
        assert est.ledger.count(1) == r * q
        assert est.ledger.count(2) == r * q
        assert est.ledger.input_copies == 1
        assert est.ledger.total == 2 * r * q + 1

    def test_sample_cost_quadratic_in_precision(self):
        a = samplized_estimate(zero_state(), plus_state(), 0.4, 0)
        b = samplized_estimate(zero_state(), plus_state(), 0.2, 0)
        ratio = b.ledger.total / a.ledger.total
        assert 3.0 <= ratio <= 5.5

    def test_epsilon_floor(self):
        with pytest.raises(ValueError):
            samplized_estimate(zero_state(), plus_state(), 0.01, 0)

    def test_serialization_schema(self):
        est = samplized_estimate(zero_state(), plus_state(), 0.25, 7)
        blob = est.to_json()
        assert set(blob) == {
            "method", "T_hat", "F_hat", "gamma_tilde", "ledger", "seed",
            "t", "rounds_per_query",
        }
        assert blob["method"] == "samplized"
        assert blob["seed"] == 7
        assert set(blob["ledger"]) == {"S1", "S2", "input_copies"}


class TestHelstrom:
    def test_identical(self):
        s = haar_random(1, seed=3)
        assert abs(helstrom_success(s, s) - 0.5) < 1e-12

    def test_orthogonal(self):
        assert abs(helstrom_success(psi_x(0.0), psi_x(1.0)) - 1.0) < 1e-12

    def test_psi_x_family(self):
        for eps in (0.1, 0.5, 0.9):
            got = helstrom_success(psi_x(0.0), psi_x(eps))
            assert abs(got - (0.5 + eps / 2)) < 1e-12
