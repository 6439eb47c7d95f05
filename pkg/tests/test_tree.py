from __future__ import annotations

from contextlib import nullcontext as does_not_raise

import pytest

from pruningfront.errors import InsufficientDepthError
from pruningfront.errors import ShapeViolationError
from pruningfront.folding import FoldingPattern
from pruningfront.folding import folding_to_kneading
from pruningfront.kneading import compare_kneading_sets
from pruningfront.tree import ROOT
from pruningfront.tree import NakedTree
from pruningfront.tree import PrunedTree
from pruningfront.tree import folding_to_tree
from pruningfront.tree import mark_tree
from pruningfront.tree import relabel_naked_tree
from pruningfront.tree import strip_labels
from pruningfront.tree import to_dot
from pruningfront.tree import tree_to_folding
from pruningfront.tree import tree_to_kneading

GEN4_LEVELS = ((0,), (-1,), (1, 2), (-2, -3, -4, -5), (3, 4, 5, 6, 7, 8))
GEN4_CHILDREN = {-1: (1, 2), 1: (-2, -3), 2: (-4, -5), -2: (3, 4), -3: (5,), -4: (6,), -5: (7, 8)}
GEN4_LEVEL_TEXTS = ("+ 1", "0 - 1", "+ 0 - 1", "- 0 + 1 + 0 - 1", "- 0 + 1 + 1 + 1 + 0 - 1")


def test_folding_to_tree(gen4_tree: PrunedTree):
    """Tests levels and children of the tree of a four generation window."""
    assert gen4_tree.depth == 4
    assert gen4_tree.levels == GEN4_LEVELS
    assert {v: gen4_tree.children_of(v) for v in GEN4_CHILDREN} == GEN4_CHILDREN
    assert gen4_tree.children_of(ROOT) == (-1,)
    assert gen4_tree.children_of(8) == ()

    assert gen4_tree.parent_of(-1) == ROOT
    assert gen4_tree.parent_of(6) == -4
    assert gen4_tree.level_of(-3) == 3
    assert gen4_tree.is_open(7)
    assert not gen4_tree.is_open(-5)
    assert gen4_tree.vertices == tuple(v for level in GEN4_LEVELS for v in level)

    with pytest.raises(KeyError, match="not in the tree"):
        gen4_tree.parent_of(42)
    with pytest.raises(KeyError, match="not in the tree"):
        gen4_tree.level_of(42)


def test_folding_to_tree_seed(seed_pattern: FoldingPattern):
    """Tests that the first generation gives the chain `0 -> -1`."""
    tree = folding_to_tree(seed_pattern)
    assert tree == PrunedTree(levels=((0,), (-1,)), children={}, depth=1)
    assert tree == relabel_naked_tree(NakedTree(()))


def test_tree_dict(gen4_tree: PrunedTree):
    """Tests the dictionary form of a tree."""
    data = gen4_tree.to_dict()
    assert data["depth"] == 4
    assert data["levels"][2] == [1, 2]
    assert data["children"]["-5"] == [7, 8]


def test_strip_and_relabel(gen4_tree: PrunedTree):
    """Tests that relabelling a stripped tree gives back the same tree."""
    shape = strip_labels(gen4_tree)
    assert shape.child_counts == ((2,), (2, 2), (2, 1, 1, 2))
    assert shape.depth == 4
    assert relabel_naked_tree(shape) == gen4_tree


@pytest.mark.parametrize(
    "child_counts, context",
    [
        (((2,), (1, 2)), does_not_raise()),
        (((3,),), pytest.raises(ShapeViolationError, match="must be 1 or 2")),
        (((2,), (1,)), pytest.raises(ShapeViolationError, match="has 2 vertices but 1 child counts")),
    ],
)
def test_relabel_naked_tree_errors(child_counts, context):
    """Tests the shape rules of relabelling."""
    with context:
        relabel_naked_tree(NakedTree(child_counts))


@pytest.mark.parametrize(
    "levels, children, depth, match",
    [
        (((0,), (-1,)), {}, 2, "needs 3 levels"),
        (((0,), (1,)), {}, 1, "Level 1 must be"),
        (((0,), (-1,), (-2,)), {-1: (-2,)}, 2, "must hold positive ids"),
        (((0,), (-1,), (2, 1)), {-1: (2, 1)}, 2, "increasing moduli"),
        (((0,), (-1,), (1,)), {}, 2, "vertex -1 has 0"),
        (((0,), (-1,), (1,)), {-1: (2,)}, 2, "do not match level 2"),
    ],
)
def test_pruned_tree_validation(levels, children, depth, match):
    """Tests the parity, ordering and child count rules of labelled trees."""
    with pytest.raises(ShapeViolationError, match=match):
        PrunedTree(levels=levels, children=children, depth=depth)


def test_mark_tree(gen4_tree: PrunedTree):
    """Tests marks and signs level by level."""
    marked = mark_tree(gen4_tree)

    assert tuple(marked.level_text(level) for level in range(5)) == GEN4_LEVEL_TEXTS
    assert marked.mark_position(ROOT) == 1
    assert marked.mark_position(-2) == -3
    assert marked.mark_position(7) == 8
    assert str(marked.code_of(-4)) == "--+"
    assert str(marked.code_of(ROOT)) == ""

    data = marked.to_dict()
    assert data["marks"]["-2"] == 0
    assert data["signs"]["-1"] == "-"


def test_tree_to_kneading(gen4_tree: PrunedTree, gen4_kneading):
    """Tests that the tree gives the same kneading sequences as the folding window."""
    marked = mark_tree(gen4_tree)
    assert tree_to_kneading(marked, 5) == gen4_kneading

    with pytest.raises(InsufficientDepthError, match="too shallow for 6 tail symbols"):
        tree_to_kneading(marked, 6, strict=True)


def test_tree_to_folding(gen4_tree: PrunedTree, gen4_pattern: FoldingPattern, seed_pattern: FoldingPattern):
    """Tests that the tree encodes its folding window."""
    assert tree_to_folding(gen4_tree) == gen4_pattern
    assert tree_to_folding(folding_to_tree(seed_pattern)) == seed_pattern


def test_to_dot(gen4_tree: PrunedTree):
    """Tests the graphviz rendering."""
    dot = to_dot(mark_tree(gen4_tree))

    assert dot.startswith("digraph pruned_tree {")
    assert dot.endswith("}\n")
    assert '  "0" -> "0";' in dot
    assert '  "0" -> "-1";' in dot
    assert '  "-5" -> "8";' in dot
    assert '"-2" [label="I_-2 (-) | 0"];' in dot


def test_engine_triangle(lozi_engine):
    """Tests that folding, tree and kneading conversions commute on an engine window."""
    pattern = lozi_engine.folding_pattern_of(6)
    tree = folding_to_tree(pattern)

    assert tree.depth == 6
    assert relabel_naked_tree(strip_labels(tree)) == tree
    assert tree_to_folding(tree) == pattern
    assert compare_kneading_sets(tree_to_kneading(mark_tree(tree), 7), folding_to_kneading(pattern, 7), 7).equal
