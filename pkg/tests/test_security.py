"""Security indices, bounds with injections, and critical tuples."""
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import (
    SIXBUS_A,
    SIXBUS_A_FULL,
    incidence_transpose,
    random_connected_edges,
    sixbus_meas,
    sixbus_network,
)
from oracle_helpers import full_h_min_support
from gridsec import (
    MeasurementSystem,
    Network,
    check_conditions,
    exhaustive_min_support,
    exhaustive_min_tuple,
    min_critical_tuple,
    reduce_to_tu,
    security_index,
    security_index_bounds,
)
from gridsec.errors import (
    ConditionViolated,
    HasInjections,
    InfeasibleIndex,
    ProtectedInjection,
    TargetIsInjection,
    ValidationError,
)
from gridsec.grid import _exact_H_rows, build_H


class TestReduction:
    def test_six_bus_matches_truncated_incidence(self):
        prob = reduce_to_tu(sixbus_network(), sixbus_meas(), 6)
        assert np.array_equal(prob.A, SIXBUS_A)
        assert prob.k == 6
        assert prob.I == frozenset()

    def test_metered_subset_selects_rows(self):
        net = sixbus_network()
        meas = MeasurementSystem((3, 1, 7))
        prob = reduce_to_tu(net, meas, 2)
        assert np.array_equal(prob.A, SIXBUS_A[[2, 0, 6], :])

    def test_rejects_injections(self):
        net = Network(3, ((1, 2, 1), (2, 3, 1)))
        with pytest.raises(HasInjections):
            reduce_to_tu(net, MeasurementSystem((1, 2), (2,)), 1)

    def test_rejects_protected_target(self):
        with pytest.raises(ValidationError):
            reduce_to_tu(sixbus_network(), sixbus_meas({6}), 6)


class TestSecurityIndex:
    def test_six_bus_values_and_witness(self):
        net, meas = sixbus_network(), sixbus_meas()
        for k, want in {1: 2, 2: 2, 3: 2, 4: 2, 5: 2, 6: 3, 7: 2}.items():
            res = security_index(net, meas, k)
            assert res.index == want
            assert res.method == "lp"
            assert len(res.attack.touched) == want
            assert k in res.attack.touched
            # the witness moves meter k by exactly one unit
            assert res.attack.delta_z[k - 1] == pytest.approx(1.0, abs=1e-12)

    def test_witness_is_unobservable(self):
        net, meas = sixbus_network(), sixbus_meas()
        H = build_H(net, meas)
        res = security_index(net, meas, 6)
        assert np.allclose(H.H @ res.attack.delta_theta, res.attack.delta_z,
                           atol=1e-12)

    def test_protected_variants(self):
        net = sixbus_network()
        for I in ({1, 4}, {1, 2}):
            res = security_index(net, sixbus_meas(I), 6)
            assert res.index == 3
            assert res.attack.touched.isdisjoint(I)

    def test_infeasible_when_protection_pins_target(self):
        net = Network(2, ((1, 2, 1), (1, 2, 2)))
        meas = MeasurementSystem((1, 2), protected=frozenset({2}))
        with pytest.raises(InfeasibleIndex) as err:
            security_index(net, meas, 1)
        assert err.value.meter == 1

    def test_index_invariant_under_reactance_scaling(self):
        meas = sixbus_meas()
        base = {k: security_index(sixbus_network(), meas, k) for k in range(1, 8)}
        scaled = sixbus_network(scale=Fraction(7, 3))
        for k, res in base.items():
            res2 = security_index(scaled, meas, k)
            assert res2.index == res.index
            assert res2.attack.touched == res.attack.touched


class TestBounds:
    def path_with_injection(self):
        net = Network(3, ((1, 2, 1), (2, 3, 1)))
        return net, MeasurementSystem((1, 2), (2,))

    def test_three_bus_bracket(self):
        net, meas = self.path_with_injection()
        res = security_index_bounds(net, meas, 1)
        assert res.bounds == (1, 2)
        assert res.index is None
        assert res.method == "bounds"
        assert res.attack.touched == frozenset({1, 3})

    def test_bracket_contains_exhaustive_optimum(self):
        net, meas = self.path_with_injection()
        res = security_index_bounds(net, meas, 1)
        rows = _exact_H_rows(net, meas)
        exact = full_h_min_support(rows, 1, frozenset())
        assert res.bounds[0] <= exact <= res.bounds[1]

    def test_rejects_injection_target(self):
        net, meas = self.path_with_injection()
        with pytest.raises(TargetIsInjection):
            security_index_bounds(net, meas, 3)

    def test_rejects_protected_injection(self):
        net = Network(3, ((1, 2, 1), (2, 3, 1)))
        meas = MeasurementSystem((1, 2), (2,), protected=frozenset({3}))
        with pytest.raises(ProtectedInjection):
            security_index_bounds(net, meas, 1)

    def test_witness_is_unobservable_on_full_h(self):
        net, meas = self.path_with_injection()
        res = security_index_bounds(net, meas, 1)
        H = build_H(net, meas)
        assert np.allclose(H.H @ res.attack.delta_theta, res.attack.delta_z,
                           atol=1e-12)
        assert res.attack.delta_z[0] == pytest.approx(1.0, abs=1e-12)


class TestConditions:
    def test_six_bus_truncated(self):
        assert check_conditions(SIXBUS_A, 6) == (True, True)

    def test_rank_deficient_full_matrix(self):
        assert check_conditions(SIXBUS_A_FULL, 6) == (True, False)

    def test_zero_row(self):
        A = np.array([[0, 0], [1, -1], [0, 1]])
        assert check_conditions(A, 1) == (False, True)

    def test_float_path_agrees_with_exact(self):
        net, meas = sixbus_network(), sixbus_meas()
        H = build_H(net, meas)
        assert check_conditions(H, 6) == check_conditions(SIXBUS_A, 6)

    def test_row_out_of_range(self):
        with pytest.raises(ValueError):
            check_conditions(SIXBUS_A, 8)


class TestCriticalTuples:
    def test_path_singleton(self):
        A = np.array([[-1, 0], [1, -1]])
        ct = min_critical_tuple(A, 1)
        assert ct.members == frozenset({1})
        assert ct.cardinality == 1
        assert ct.target == 1

    def test_six_bus(self):
        ct = min_critical_tuple(SIXBUS_A, 6)
        assert ct.cardinality == 3
        assert 6 in ct.members

    def test_four_cycle(self):
        A = np.array([[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1], [-1, 0, 0, 1]])[:, 1:]
        assert min_critical_tuple(A, 1).cardinality == 2

    def test_condition_violations(self):
        with pytest.raises(ConditionViolated) as err:
            min_critical_tuple(np.array([[0, 0], [1, -1], [0, 1]]), 1)
        assert err.value.which == "I"
        with pytest.raises(ConditionViolated) as err:
            min_critical_tuple(SIXBUS_A_FULL, 6)
        assert err.value.which == "II"

    def test_rejects_fractional_entries(self):
        with pytest.raises(ValueError):
            min_critical_tuple(np.array([[0.5, 1.0], [1.0, 0.0]]), 1)

    def test_matches_enumeration_on_random_graphs(self):
        rng = random.Random(31)
        for _ in range(20):
            n, edges = random_connected_edges(rng, max_nodes=6)
            A = incidence_transpose(n, edges, truncate=True)
            k = rng.randint(1, A.shape[0])
            ct = min_critical_tuple(A, k)
            et = exhaustive_min_tuple(A, k)
            s = exhaustive_min_support(A, k)
            assert ct.cardinality == et.cardinality == s
