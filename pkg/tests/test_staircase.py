from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from laakso_lab.errors import DomainError
from laakso_lab.tree_space import TreeNode
from laakso_lab.staircase import (
    StaircaseVector,
    diff_norm,
    enumerate_index_sets,
    exponent_for_radius,
    sibling_separation_report,
    step_vector,
    sup_norm,
    v_of,
    verify_biorthogonality,
    verify_prefix_exactness,
    verify_quarter_bounds,
    verify_staircase_bounds,
)

THETA = Fraction(3, 4)


def index_sets(max_val=10, max_len=5):
    return st.lists(
        st.integers(min_value=1, max_value=max_val), max_size=max_len,
        unique=True,
    ).map(lambda xs: tuple(sorted(xs)))


class TestVectors:
    def test_empty_set(self):
        assert sup_norm(v_of([])) == 0

    def test_singleton(self):
        # v_{2} = theta * (e_1 + e_2): count of elements >= i is 1 for i <= 2
        v = v_of([2])
        assert v.coordinate(1) == THETA
        assert v.coordinate(2) == THETA
        assert v.coordinate(3) == 0
        assert sup_norm(v) == THETA

    def test_norm_examples(self):
        assert sup_norm(v_of([1, 2])) == Fraction(3, 2)
        assert sup_norm(v_of([1, 2, 3])) == Fraction(9, 4)
        assert sup_norm(v_of([5])) == THETA

    def test_norm_is_theta_times_size(self):
        for J in enumerate_index_sets(8, 4):
            assert sup_norm(v_of(J)) == THETA * len(J)

    def test_diff_example_is_tight(self):
        # adjacent blocks meeting the lower constant: J = {1,2}, J' = {3}
        assert diff_norm([1, 2], [3]) == THETA
        # and the lower bound (1/4)(|J|+|J'|) = 3/4 is met with equality
        assert THETA == Fraction(1, 4) * (2 + 1)

    def test_accepts_tree_nodes(self):
        assert diff_norm(TreeNode((1, 2)), TreeNode((3,))) == THETA

    def test_diff_matches_vector_route(self):
        # counting route against literal coordinatewise subtraction
        for J in enumerate_index_sets(6, 3):
            for K in enumerate_index_sets(6, 3):
                vj, vk = v_of(J), v_of(K)
                width = max(len(vj.coords), len(vk.coords))
                direct = max(
                    (
                        abs(vj.coordinate(i) - vk.coordinate(i))
                        for i in range(1, width + 1)
                    ),
                    default=Fraction(0),
                )
                assert diff_norm(J, K) == direct

    def test_step_vector(self):
        u = step_vector(3, THETA)
        assert u.coordinate(2) == THETA
        assert u.coordinate(3) == THETA
        assert u.coordinate(4) == 0

    def test_rejects_bad_sets(self):
        with pytest.raises(DomainError):
            v_of([0, 1])
        with pytest.raises(DomainError):
            v_of([2, 2])

    @given(index_sets(), index_sets())
    def test_diff_norm_symmetric(self, J, K):
        assert diff_norm(J, K) == diff_norm(K, J)

    @given(index_sets(), index_sets(), index_sets())
    def test_diff_norm_triangle(self, J, K, L):
        assert diff_norm(J, L) <= diff_norm(J, K) + diff_norm(K, L)


class TestEnumeration:
    def test_count(self):
        # sum_{k<=6} C(12, k)
        sets = enumerate_index_sets(12, 6)
        assert len(sets) == sum(
            len(list(combinations(range(12), k))) for k in range(7)
        )
        assert len(sets) == 2510

    def test_deterministic_order(self):
        assert enumerate_index_sets(3, 2) == [
            (), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3),
        ]


class TestVerifiers:
    def test_staircase_bounds_pass(self):
        rep = verify_staircase_bounds()
        assert rep["pass"], rep
        assert rep["sets"] == 2510
        assert rep["counterexamples"] == []

    def test_quarter_bounds_pass(self):
        rep = verify_quarter_bounds()
        assert rep["pass"], rep

    def test_prefix_exactness(self):
        rep = verify_prefix_exactness()
        assert rep["pass"], rep

    def test_biorthogonality(self):
        rep = verify_biorthogonality()
        assert rep["pass"], rep

    def test_other_theta_still_passes_theta_bounds(self):
        rep = verify_staircase_bounds(Fraction(1, 2), 8, 4)
        assert rep["pass"], rep


class TestExponentForRadius:
    def test_powers_of_three(self):
        assert exponent_for_radius(1) == 2
        assert exponent_for_radius(3) == 3
        assert exponent_for_radius(9) == 4

    def test_rejects_non_powers(self):
        with pytest.raises(DomainError):
            exponent_for_radius(2)
        with pytest.raises(DomainError):
            exponent_for_radius(0)


class TestSiblingSeparation:
    def test_unit_radius_pair_passes(self):
        # tines diverging at the root of a branching-2 tree, radius 1
        rep = sibling_separation_report(
            [TreeNode((1, 2)), TreeNode((1, 3))], exponent_for_radius(1)
        )
        assert rep["pass"], rep
        assert rep["common_prefix"] == [1]
        assert rep["required_cardinality"] == 1

    def test_radius_three_adjacent_tines_violate_precondition(self):
        # adjacent fraternal choices give overlapping tail ranges, so the
        # disjointness precondition fails and is reported, not raised
        a = TreeNode((1, 2, 3, 4, 5, 6))
        b = TreeNode((1, 2, 3, 5, 6, 7))
        rep = sibling_separation_report([a, b], exponent_for_radius(3))
        assert not rep["pass"]
        assert not rep["precondition_ok"]

    def test_radius_three_extreme_tines_pass(self):
        # first and last fraternal choice below a branching-4 center
        a = TreeNode((1, 2, 3, 4, 5, 6))
        b = TreeNode((1, 2, 3, 7, 8, 9))
        rep = sibling_separation_report([a, b], exponent_for_radius(3))
        assert rep["pass"], rep
        assert rep["tails"] == [[4, 5, 6], [7, 8, 9]]
        assert rep["required_cardinality"] == 3
        # the guaranteed norm (1/4)(3+3) = 3/2 is exactly half 3**1 * theta*...
        assert diff_norm(a, b) >= Fraction(3, 2)

    def test_single_node_vacuous(self):
        rep = sibling_separation_report([TreeNode((1, 2))], 2)
        assert rep["pass"]

    def test_rejects_tiny_exponent(self):
        with pytest.raises(DomainError):
            sibling_separation_report([TreeNode((1,))], 1)


@settings(max_examples=60, deadline=None)
@given(index_sets(max_val=9, max_len=4), index_sets(max_val=9, max_len=4))
def test_separated_blocks_meet_lower_bound(J, K):
    # whenever J's range ends before K's begins (empty sets included), the
    # quarter lower bound applies; the verifiers sweep this exhaustively
    if not J or not K or max(J) < min(K):
        lower = Fraction(1, 4) * (len(J) + len(K))
        assert diff_norm(J, K) >= lower
