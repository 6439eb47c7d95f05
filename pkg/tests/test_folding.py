from __future__ import annotations

from contextlib import nullcontext as does_not_raise

import pytest

from pruningfront.errors import InsufficientDepthError
from pruningfront.errors import InsufficientWindowError
from pruningfront.errors import MalformedPatternError
from pruningfront.errors import ParseError
from pruningfront.folding import FoldingPattern
from pruningfront.folding import Leaf
from pruningfront.folding import annotate
from pruningfront.folding import compare_folding
from pruningfront.folding import complete_generations
from pruningfront.folding import folding_to_kneading
from pruningfront.folding import kneading_to_folding
from pruningfront.folding import leaves
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.kneading import compare_kneading_sets
from pruningfront.lozi import LoziEngine
from tests.conftest import GEN4_PATTERN

err_msg_adjacent = "Adjacent 0-marks"
err_msg_first_critical = "Position -1 must hold"
err_msg_first_turning = "Position 1 must hold"

GEN4_LABELS = {
    -6: (0, 4),
    -5: (2, 0),
    -4: (-1, 1),
    -3: (1, 0),
    -2: (0, 2),
    -1: (0, 0),
    1: (0, 1),
    2: (-1, 0),
    3: (0, 3),
    4: (-2, 0),
    5: (1, 1),
    6: (-1, 2),
    7: (2, 1),
    8: (-3, 0),
    9: (0, 5),
}

GEN4_ARROWS = {1: -2, 2: -4, 3: -6, -1: 1, -2: 3, -3: 5, -4: 6, -5: 7, -6: 9}


@pytest.mark.parametrize(
    "text, kwargs, context",
    [
        ("1 0 . 1", {}, does_not_raise()),
        (GEN4_PATTERN, {"generations": 2}, does_not_raise()),
        ("1 0 0 . 1", {}, pytest.raises(MalformedPatternError, match=err_msg_adjacent)),
        ("1 0 . 1 0 0 1", {}, pytest.raises(MalformedPatternError, match=err_msg_adjacent)),
        ("0 1 . 1", {}, pytest.raises(MalformedPatternError, match=err_msg_first_critical)),
        ("1 0 . 0 1", {}, pytest.raises(MalformedPatternError, match=err_msg_first_turning)),
        ("1 0 . 1", {"generations": 2}, pytest.raises(MalformedPatternError, match="holds 1 complete generations")),
        ("1 0 . 1", {"generations": 0}, pytest.raises(MalformedPatternError, match="must be a positive integer")),
        ("1 2 . 1", {}, pytest.raises(ParseError, match="Invalid character")),
        ("1 0 1", {}, pytest.raises(ParseError, match="needs a '.'")),
        ("1 0 . 1 . 1", {}, pytest.raises(ParseError, match="exactly one '.'")),
    ],
)
def test_folding_pattern_validation(text, kwargs, context):
    """Tests parsing and structural validation of folding windows."""
    with context:
        FoldingPattern.from_text(text, **kwargs)


def test_folding_pattern_accessors(seed_pattern: FoldingPattern, gen4_pattern: FoldingPattern):
    """Tests positions, text form and generation count."""
    assert seed_pattern.positions == (-2, -1, 1)
    assert seed_pattern.generations == 1
    assert str(seed_pattern) == "1 0 . 1"

    assert gen4_pattern.generations == 4
    assert str(gen4_pattern) == GEN4_PATTERN
    assert gen4_pattern.left == (0, 1, 0, 1, 0, 1)
    assert complete_generations(gen4_pattern.left, gen4_pattern.right) == 4


def test_position_map(gen4_pattern: FoldingPattern):
    """Tests images, preimages and signs of the four generation window."""
    pmap = gen4_pattern.position_map()

    assert {p: pmap.image(p) for p in GEN4_ARROWS} == GEN4_ARROWS
    assert pmap.image(4) is None
    assert all(pmap.preimage(image) == p for p, image in GEN4_ARROWS.items())
    assert 9 in pmap
    assert 10 not in pmap
    assert pmap.point_sign(-4).char == "+"
    assert pmap.point_sign(9).char == "-"


def test_annotate_seed(seed_pattern: FoldingPattern):
    """Tests the annotations of the first generation."""
    annotated = annotate(seed_pattern)
    result = [(a.position, a.sign.char, a.subscript, a.superscript, a.arrow) for a in annotated.annotations]

    assert result == [(-2, "-", 0, 2, None), (-1, "~", 0, 0, 1), (1, "+", 0, 1, -2)]
    assert annotated.signed_text() == "-1-0+.+1+"
    assert annotated.to_dict()["positions"][0] == {
        "position": -2,
        "mark": 1,
        "sign": "-",
        "subscript": 0,
        "superscript": 2,
        "arrow": None,
    }


def test_annotate_four_generations(gen4_pattern: FoldingPattern):
    """Tests labels, arrows and signs of a four generation window."""
    annotated = annotate(gen4_pattern)

    assert annotated.generations == 4
    assert {a.position: (a.subscript, a.superscript) for a in annotated.annotations} == GEN4_LABELS
    assert {a.position: a.arrow for a in annotated.annotations if a.arrow is not None} == GEN4_ARROWS
    assert annotated.signed_text() == "-1-0+1+0-1-0+.+1+0-1-0+1+1+1+0-1-"
    assert annotated.at(-1).sign.char == "~"

    with pytest.raises(KeyError, match="outside the window"):
        annotated.at(12)


def test_folding_to_kneading(seed_pattern: FoldingPattern, gen4_pattern: FoldingPattern, gen4_kneading):
    """Tests that tails follow the orbits and arc-codes follow the preimage arcs."""
    assert folding_to_kneading(gen4_pattern, 5) == gen4_kneading
    assert folding_to_kneading(seed_pattern, 3) == KneadingSet.from_mapping(
        {0: KneadingSequence.from_text("", "+-")},
    )

    with pytest.raises(InsufficientWindowError, match="leaves the window after 2 symbols"):
        folding_to_kneading(seed_pattern, 3, strict=True)


def test_kneading_to_folding(seed_pattern: FoldingPattern, gen4_pattern: FoldingPattern, gen4_kneading):
    """Tests that the folding window is rebuilt from the kneading sequences."""
    root_only = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-")})
    assert kneading_to_folding(root_only, 1) == seed_pattern
    assert kneading_to_folding(gen4_kneading, 4) == gen4_pattern

    rebuilt = folding_to_kneading(seed_pattern, 2)
    assert kneading_to_folding(rebuilt, 1) == seed_pattern


@pytest.mark.parametrize(
    "generations, context",
    [
        (1, does_not_raise()),
        (2, pytest.raises(InsufficientDepthError, match="needs")),
        (0, pytest.raises(ValueError, match="must be at least 1")),
    ],
)
def test_kneading_to_folding_depth(generations, context):
    """Tests that missing tail symbols are reported."""
    kset = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-")})
    with context:
        kneading_to_folding(kset, generations)


def test_compare_folding(gen4_pattern: FoldingPattern, seed_pattern: FoldingPattern):
    """Tests outward comparison of folding windows."""
    result = compare_folding(gen4_pattern, gen4_pattern)
    assert result.equal
    assert str(result) == "EqualUpTo(4)"
    assert result.to_dict() == {"result": "equal", "generations": 4}

    assert compare_folding(gen4_pattern, seed_pattern).to_dict() == {"result": "equal", "generations": 1}

    flipped = FoldingPattern.from_text("1 0 1 0 1 0 . 1 0 1 0 1 0 1 0 1")
    result = compare_folding(gen4_pattern, flipped)
    assert not result.equal
    assert str(result) == "DifferAt(6)"
    assert result.to_dict() == {"result": "differ", "coordinate": 6}


def test_leaves(seed_pattern: FoldingPattern, gen4_pattern: FoldingPattern):
    """Tests the leaves between consecutive post-critical points."""
    assert leaves(annotate(seed_pattern)) == (Leaf(start=-2, end=1, index=0, turning=(1,)),)

    gen4_leaves = leaves(annotate(gen4_pattern))
    assert [(leaf.start, leaf.end, leaf.index) for leaf in gen4_leaves] == [
        (-6, -4, -2),
        (-4, -2, -1),
        (-2, 1, 0),
        (1, 3, 1),
        (3, 5, 2),
        (5, 6, 3),
        (6, 7, 4),
        (7, 9, 5),
    ]
    assert [leaf.turning for leaf in gen4_leaves] == [(-4,), (-4,), (1,), (1,), (5,), (5,), (7,), (7,)]

    assert gen4_leaves[2].left_of(-1, 1)
    assert gen4_leaves[3].left_of(2, 1)


def test_engine_roundtrip(lozi_engine):
    """Tests that the engine folding pattern and kneading set describe each other."""
    pattern = lozi_engine.folding_pattern_of(6)
    kset = lozi_engine.kneading_set_of(40, 20)

    assert kneading_to_folding(kset, 6) == pattern
    assert compare_kneading_sets(folding_to_kneading(pattern, 20), kset, 20).equal


def test_engine_patterns_differ(lozi_engine):
    """Tests that nearby Misiurewicz parameters give different folding windows."""
    other = LoziEngine(a=1.7, b=0.35).folding_pattern_of(6)
    result = compare_folding(lozi_engine.folding_pattern_of(6), other)
    assert not result.equal
    assert result.coordinate == 10
