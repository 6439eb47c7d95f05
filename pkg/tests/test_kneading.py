from __future__ import annotations

from contextlib import nullcontext as does_not_raise

import pytest

from pruningfront.errors import BadFirstSymbolError
from pruningfront.errors import DuplicateArcCodeError
from pruningfront.errors import InsufficientDepthError
from pruningfront.errors import InsufficientWindowError
from pruningfront.errors import InvalidArcCodeError
from pruningfront.errors import MissingRootError
from pruningfront.errors import SearchBudgetExceededError
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.kneading import Verdict
from pruningfront.kneading import basic_arc_order
from pruningfront.kneading import compare_kneading_sets
from pruningfront.kneading import is_admissible
from pruningfront.kneading import is_wu_admissible
from pruningfront.kneading import itinerary_is_wu_admissible
from pruningfront.kneading import recover_indices
from pruningfront.kneading import rejecting_window
from pruningfront.symbols import TwoSidedWindow

err_msg_arc_start = "A nonempty arc-code must start with '-'"
err_msg_arc_pm = "An arc-code cannot contain '~'"
err_msg_tail = "A kneading tail must start with '\\+'"

ROOT_ONLY = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-+--")})


@pytest.mark.parametrize(
    "arc_code, tail, context",
    [
        ("", "+", does_not_raise()),
        ("-+-", "+-~", does_not_raise()),
        ("+", "+", pytest.raises(InvalidArcCodeError, match=err_msg_arc_start)),
        ("-~", "+", pytest.raises(InvalidArcCodeError, match=err_msg_arc_pm)),
        ("-", "-+", pytest.raises(ValueError, match=err_msg_tail)),
        ("-", "", pytest.raises(ValueError, match=err_msg_tail)),
    ],
)
def test_kneading_sequence(arc_code, tail, context):
    """Tests the validation of kneading sequences."""
    with context:
        seq = KneadingSequence.from_text(arc_code, tail)
        assert seq.depth == len(tail)
        assert str(seq) == f"^{arc_code}~.{tail}"


@pytest.mark.parametrize(
    "entries, context",
    [
        (((0, ("", "+")), (-1, ("-", "+"))), does_not_raise()),
        (((0, ("", "+")), (-1, ("", "+"))), pytest.raises(DuplicateArcCodeError, match="is shared by indices")),
        (((1, ("--", "+")), (-1, ("-", "+"))), pytest.raises(MissingRootError, match="needs an entry")),
        (((1, ("", "+")),), pytest.raises(MissingRootError, match="must have index 0")),
        (((0, ("", "+")), (0, ("-", "+"))), pytest.raises(ValueError, match="indices must be distinct")),
    ],
)
def test_kneading_set_validation(entries, context):
    """Tests the structural rules of kneading sets."""
    with context:
        KneadingSet(entries=tuple((i, KneadingSequence.from_text(*texts)) for i, texts in entries))


def test_kneading_set_accessors(gen4_kneading: KneadingSet):
    """Tests lookups, truncation and restriction."""
    assert gen4_kneading.indices == (-1, 0, 1, 2)
    assert len(gen4_kneading) == 4
    assert 2 in gen4_kneading
    assert 3 not in gen4_kneading
    assert str(gen4_kneading[-1].tail) == "++"
    assert gen4_kneading.get(5) is None
    assert gen4_kneading.depth == 1

    with pytest.raises(KeyError, match="No kneading sequence with index 7"):
        gen4_kneading[7]

    truncated = gen4_kneading.truncate(2)
    assert str(truncated[0].tail) == "+-"
    assert str(truncated[1].tail) == "+"

    small = KneadingSet.from_mapping(
        {0: KneadingSequence.from_text("", "+--"), -1: KneadingSequence.from_text("-", "+")},
    )
    restricted = gen4_kneading.restrict_like(small)
    assert restricted.indices == (-1, 0)
    assert str(restricted[0].tail) == "+--"
    assert str(restricted[-1].tail) == "+"


def test_kneading_set_dict(gen4_kneading: KneadingSet):
    """Tests the dictionary form, with and without indices."""
    data = gen4_kneading.to_dict()
    assert data["entries"][0] == {"index": -1, "arc_code": "-", "tail": "++"}
    assert KneadingSet.from_dict(data) == gen4_kneading

    anonymous = {"entries": [{"arc_code": e["arc_code"], "tail": e["tail"]} for e in data["entries"]]}
    assert KneadingSet.from_dict(anonymous) == gen4_kneading


@pytest.mark.parametrize(
    "u, v, expected, context",
    [
        ("----", "--", "farther", does_not_raise()),
        ("--", "----", "closer", does_not_raise()),
        ("---", "-+-", "farther", does_not_raise()),
        ("-+-", "---", "closer", does_not_raise()),
        ("-", "--", "incomparable", does_not_raise()),
        ("-+", "-+", "same", does_not_raise()),
        ("", "--", "closer", does_not_raise()),
        ("+", "-", None, pytest.raises(InvalidArcCodeError, match=err_msg_arc_start)),
    ],
)
def test_basic_arc_order(u, v, expected, context):
    """Tests the position of basic arcs read from their codes."""
    with context:
        assert basic_arc_order(u, v) == expected


def test_recover_indices():
    """Tests index recovery: even codes count 0, 1, ... and odd codes -1, -2, ... outward."""
    kset = recover_indices([KneadingSequence.from_text(code, "+") for code in ("", "-", "--", "-+-")])
    assert {i: str(seq.arc_code) for i, seq in kset} == {0: "", -1: "-", 1: "--", -2: "-+-"}

    assert recover_indices([KneadingSequence.from_text("", "+-")]).indices == (0,)


def test_recover_indices_inverts_forget(gen4_kneading: KneadingSet, lozi_kneading: KneadingSet):
    """Tests that indices are recovered from the arc-codes alone."""
    assert recover_indices(gen4_kneading.forget_indices()) == gen4_kneading
    assert recover_indices(lozi_kneading.forget_indices()) == lozi_kneading


@pytest.mark.parametrize(
    "codes, context",
    [
        (("-", "--"), pytest.raises(MissingRootError, match="without the entry of the empty arc-code")),
        (("", "-", "-"), pytest.raises(DuplicateArcCodeError, match="appears twice")),
    ],
)
def test_recover_indices_errors(codes, context):
    """Tests the structural errors of index recovery."""
    with context:
        recover_indices([KneadingSequence.from_text(code, "+") for code in codes])


@pytest.mark.parametrize(
    "word, depth, expected",
    [
        ("--+-+--", 7, Verdict.admissible_up_to(7)),
        ("-+--", 4, Verdict.rejected(index=0, position=-1)),
        ("-+-+-", 5, Verdict.admissible_up_to(5)),
        ("~+--", 4, Verdict.rejected(index=0, position=-1)),
        ("-~--", 4, Verdict.admissible_up_to(4)),
        ("-", 3, Verdict.admissible_up_to(1)),
    ],
)
def test_is_wu_admissible(word, depth, expected):
    """Tests the W^u admissibility test against a single kneading sequence."""
    assert is_wu_admissible(word, ROOT_ONLY, depth) == expected


def test_is_wu_admissible_short_tail():
    """Tests that a tail running out before the requested depth lowers the certified depth."""
    kset = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-")})
    assert is_wu_admissible("-+-+-", kset, 5) == Verdict.admissible_up_to(3)


@pytest.mark.parametrize("word", ["+-", ""])
def test_is_wu_admissible_bad_first_symbol(word):
    """Tests that the tested sequence must start with `-`."""
    with pytest.raises(BadFirstSymbolError, match="must start with '-'"):
        is_wu_admissible(word, ROOT_ONLY, 3)


def test_itinerary_is_wu_admissible():
    """Tests full itineraries, including the itinerary of the fixed point."""
    fixed = TwoSidedWindow.from_text("^.+++")
    assert itinerary_is_wu_admissible(fixed, ROOT_ONLY, 3) == Verdict.admissible_up_to(3)

    rejected = TwoSidedWindow.from_text("^-.+--")
    assert itinerary_is_wu_admissible(rejected, ROOT_ONLY, 3) == Verdict.rejected(index=0, position=-1)

    with pytest.raises(InsufficientWindowError, match="need an all-plus left tail"):
        itinerary_is_wu_admissible(TwoSidedWindow.from_text("-.+"), ROOT_ONLY, 1)


@pytest.mark.parametrize(
    "text, n, kwargs, expected, context",
    [
        (".+", 0, {}, Verdict.admissible_up_to(0), does_not_raise()),
        ("-.+-", 1, {}, Verdict.admissible_up_to(1), does_not_raise()),
        ("^-.+--", 2, {}, Verdict.rejected(index=0, position=-1), does_not_raise()),
        ("^.+++", 2, {}, Verdict.admissible_up_to(2), does_not_raise()),
        (
            "--.--",
            1,
            {"prelude_length": 20, "max_candidates": 16},
            None,
            pytest.raises(SearchBudgetExceededError, match="exceeds the budget of 16"),
        ),
        ("-.+", 1, {}, None, pytest.raises(InsufficientWindowError, match="must store the coordinates")),
        ("-.+", 2, {}, None, pytest.raises(InsufficientWindowError, match="outside the stored window")),
        ("-.+", -1, {}, None, pytest.raises(ValueError, match="`n` must be non-negative")),
    ],
)
def test_is_admissible(text, n, kwargs, expected, context):
    """Tests the finite window admissibility test."""
    with context:
        assert is_admissible(TwoSidedWindow.from_text(text), ROOT_ONLY, n, **kwargs) == expected


def test_rejecting_window(gen4_kneading: KneadingSet):
    """Tests that the built witness is rejected by its own entry."""
    word = rejecting_window(gen4_kneading, -1)
    assert str(word) == "--+-"
    assert is_wu_admissible(word, gen4_kneading, len(word)) == Verdict.rejected(index=-1, position=0)

    assert str(rejecting_window(ROOT_ONLY, 0)) == "-+--"

    with pytest.raises(InsufficientDepthError, match="cannot be exceeded"):
        rejecting_window(gen4_kneading, 1)


def test_rejecting_window_engine(lozi_kneading: KneadingSet):
    """Tests that witnesses built from an engine kneading set are rejected."""
    for index, _ in lozi_kneading:
        try:
            word = rejecting_window(lozi_kneading, index)
        except InsufficientDepthError:
            continue
        assert not is_wu_admissible(word, lozi_kneading, len(word)).admissible


def test_compare_kneading_sets(gen4_kneading: KneadingSet):
    """Tests set comparison: equality, tail mutation, arc-code mismatch and missing entries."""
    assert compare_kneading_sets(gen4_kneading, gen4_kneading, 5).to_dict() == {"result": "equal", "depth": 1}

    mutated = dict(gen4_kneading)
    mutated[0] = KneadingSequence.from_text("", "+-+--")
    result = compare_kneading_sets(gen4_kneading, KneadingSet.from_mapping(mutated), 5)
    assert result.to_dict() == {"result": "differ", "index": 0, "kind": "tail_mismatch", "position": 2}
    assert str(result) == "Differ(index=0, kind=tail_mismatch, position=2)"

    moved = dict(gen4_kneading)
    moved[1] = KneadingSequence.from_text("---", "+")
    result = compare_kneading_sets(gen4_kneading, KneadingSet.from_mapping(moved), 5)
    assert (result.index, result.kind) == (1, "arc_code_mismatch")

    missing = {i: seq for i, seq in gen4_kneading if i != 1}
    result = compare_kneading_sets(gen4_kneading, KneadingSet.from_mapping(missing), 5)
    assert (result.index, result.kind) == (1, "missing_entry")


def test_compare_kneading_sets_engine(lozi_kneading: KneadingSet):
    """Tests that an engine set agrees with itself at the requested depth."""
    result = compare_kneading_sets(lozi_kneading, lozi_kneading, 20)
    assert result.equal
    assert result.depth == 20
