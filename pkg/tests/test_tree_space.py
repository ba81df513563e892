import pytest
from hypothesis import given, strategies as st

from laakso_lab.errors import CapacityError
from laakso_lab.tree_space import (
    ROOT,
    TreeNode,
    TreeSpace,
    tree_children,
    tree_distance,
    tree_lcp,
    tree_parent,
    to_json_vertices,
)


def incr_tuples(max_val=12, max_len=6):
    return st.lists(
        st.integers(min_value=1, max_value=max_val),
        max_size=max_len, unique=True,
    ).map(lambda xs: TreeNode(tuple(sorted(xs))))


class TestTreeNode:
    def test_root_is_empty(self):
        assert ROOT.elements == ()
        assert ROOT.level == 0
        assert ROOT.is_root

    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            TreeNode((2, 2))
        with pytest.raises(ValueError):
            TreeNode((3, 1))

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            TreeNode((0,))
        with pytest.raises(ValueError):
            TreeNode((-1, 2))

    def test_child_appends_element(self):
        n = TreeNode((1, 3))
        assert n.child(4).elements == (1, 3, 4)
        assert n.child(5).elements == (1, 3, 5)
        assert ROOT.child(5).elements == (5,)

    def test_child_rejects_non_increasing_element(self):
        with pytest.raises(ValueError):
            TreeNode((2,)).child(2)

    def test_prefix(self):
        assert ROOT.is_prefix_of(TreeNode((4,)))
        assert TreeNode((1, 2)).is_prefix_of(TreeNode((1, 2, 7)))
        assert not TreeNode((1, 3)).is_prefix_of(TreeNode((1, 2, 7)))

    def test_str(self):
        assert str(TreeNode((1, 2))) == "{1,2}"
        assert str(ROOT) == "{}"

    def test_parent(self):
        assert tree_parent(TreeNode((1, 2))) == TreeNode((1,))
        assert tree_parent(TreeNode((3,))) == ROOT
        assert tree_parent(ROOT) is None


class TestDistance:
    def test_examples(self):
        # |J| + |K| - 2|lcp|
        assert tree_distance(TreeNode((1, 2)), TreeNode((1, 3))) == 2
        assert tree_distance(ROOT, TreeNode((1, 2, 3))) == 3
        assert tree_distance(TreeNode((2,)), TreeNode((2,))) == 0
        assert tree_distance(TreeNode((1, 2, 4)), TreeNode((1, 2, 5, 6))) == 3

    def test_lcp(self):
        assert tree_lcp(TreeNode((1, 2, 4)), TreeNode((1, 2, 5))) == TreeNode((1, 2))
        assert tree_lcp(TreeNode((2,)), TreeNode((3,))) == ROOT

    @given(incr_tuples(), incr_tuples())
    def test_symmetry(self, a, b):
        assert tree_distance(a, b) == tree_distance(b, a)

    @given(incr_tuples(), incr_tuples(), incr_tuples())
    def test_triangle(self, a, b, c):
        assert tree_distance(a, c) <= tree_distance(a, b) + tree_distance(b, c)

    @given(incr_tuples(), incr_tuples())
    def test_zero_iff_equal(self, a, b):
        assert (tree_distance(a, b) == 0) == (a == b)

    @given(incr_tuples())
    def test_level_is_distance_to_root(self, a):
        assert tree_distance(ROOT, a) == a.level


class TestTreeSpace:
    def test_size_formula(self):
        # sum of b**k for k = 0..d
        assert TreeSpace(2, 3).size() == 1 + 2 + 4 + 8
        assert TreeSpace(3, 2).size() == 1 + 3 + 9

    def test_enumeration_is_sorted_dfs(self):
        space = TreeSpace(2, 2)
        labels = [n.elements for n in space.nodes()]
        assert labels == [
            (), (1,), (1, 2), (1, 3), (2,), (2, 3), (2, 4),
        ]
        # lexicographic on element tuples coincides with DFS preorder here
        assert labels == sorted(labels)

    def test_children(self):
        space = TreeSpace(3, 2)
        kids = space.children(TreeNode((2,)))
        assert [k.elements for k in kids] == [(2, 3), (2, 4), (2, 5)]
        assert space.children(TreeNode((2, 3))) == []  # at depth

    def test_contains(self):
        space = TreeSpace(2, 3)
        assert TreeNode((1, 2, 3)) in space
        assert TreeNode((1, 2, 3, 4)) not in space  # too deep
        assert TreeNode((1, 4)) not in space  # offset 3 exceeds branching

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            TreeSpace(2, 40).nodes()

    def test_json_vertices(self):
        out = to_json_vertices(TreeSpace(2, 1))
        assert out == [
            {"elements": [], "level": 0},
            {"elements": [1], "level": 1},
            {"elements": [2], "level": 1},
        ]

    def test_tree_children_free_function(self):
        kids = tree_children(TreeNode((1,)), TreeSpace(2, 3))
        assert [k.elements for k in kids] == [(1, 2), (1, 3)]
