from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from functools import cmp_to_key
from itertools import product
from typing import Any
from typing import Dict
from typing import Iterable
from typing import Iterator
from typing import Mapping
from typing import Optional
from typing import Tuple

from pruningfront.errors import BadFirstSymbolError
from pruningfront.errors import DuplicateArcCodeError
from pruningfront.errors import InsufficientDepthError
from pruningfront.errors import InsufficientWindowError
from pruningfront.errors import InvalidArcCodeError
from pruningfront.errors import MissingRootError
from pruningfront.errors import SearchBudgetExceededError
from pruningfront.symbols import Symbol
from pruningfront.symbols import SymbolWord
from pruningfront.symbols import TwoSidedWindow
from pruningfront.symbols import WordLike
from pruningfront.symbols import as_word
from pruningfront.symbols import expand_plus_minus
from pruningfront.symbols import plex_compare
from pruningfront.utils._funcs import by_distance_from_origin
from pruningfront.utils._types import ArcOrder
from pruningfront.utils._types import DifferenceKind

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)


def _validate_arc_code(code: SymbolWord) -> None:
    if code and code[0] is not Symbol.MINUS:
        msg = f"A nonempty arc-code must start with '-', found {str(code)!r}."
        raise InvalidArcCodeError(msg, arc_code=str(code))
    if not code.is_concrete:
        msg = f"An arc-code cannot contain '~', found {str(code)!r}."
        raise InvalidArcCodeError(msg, arc_code=str(code))


@dataclass(frozen=True)
class KneadingSequence:
    """Itinerary `+^∞ w ~ · k` of a turning point, stored as its arc-code `w` and right tail `k`.

    The arc-code is the left word shared by every point of the basic arc containing the preimage of the critical
    point; the tail is the forward itinerary of the turning point itself.

    Arguments:
        arc_code: Empty or starting with `-`, without `~`.
        tail: Nonempty, starting with `+` (turning points lie right of the locus).

    Raises:
        InvalidArcCodeError: If the arc-code is malformed.
        ValueError: If the tail is empty or does not start with `+`.
    """

    __slots__ = ("arc_code", "tail")

    arc_code: SymbolWord
    tail: SymbolWord

    def __post_init__(self: Self) -> None:
        """Post init used to validate the arc-code and the tail."""
        _validate_arc_code(self.arc_code)
        if not self.tail or self.tail[0] is not Symbol.PLUS:
            msg = f"A kneading tail must start with '+', found {str(self.tail)!r}."
            raise ValueError(msg)

    @classmethod
    def from_text(cls, arc_code: str, tail: str) -> KneadingSequence:
        """Builds a sequence from the text forms of its arc-code and tail."""
        return cls(arc_code=SymbolWord.from_text(arc_code), tail=SymbolWord.from_text(tail))

    @property
    def depth(self: Self) -> int:
        """Number of known tail symbols."""
        return len(self.tail)

    def truncate(self: Self, depth: int) -> KneadingSequence:
        """Keeps the first `depth` symbols of the tail (at least one)."""
        return KneadingSequence(arc_code=self.arc_code, tail=self.tail[: max(depth, 1)])

    def __str__(self: Self) -> str:
        return f"^{self.arc_code}~.{self.tail}"


@dataclass(frozen=True)
class KneadingSet:
    """Finite part of the pruning front: kneading sequences indexed by the basic critical points they come from.

    Entries are kept sorted by index. Exactly one entry has the empty arc-code and it carries index 0 (the first
    critical point `z_0`, whose preimage lies in the basic arc around the fixed point).

    Arguments:
        entries: Pairs `(index, KneadingSequence)`.

    Raises:
        DuplicateArcCodeError: If two entries share an arc-code.
        MissingRootError: If no entry, or an entry with nonzero index, has the empty arc-code.
        ValueError: If two entries share an index.

    Examples:
        ```python
        from pruningfront.kneading import KneadingSequence
        from pruningfront.kneading import KneadingSet

        kset = KneadingSet.from_mapping(
            {
                0: KneadingSequence.from_text("", "+---"),
                -1: KneadingSequence.from_text("-", "++"),
            }
        )
        kset.indices, kset.depth
        # ((-1, 0), 2)
        ```
    """

    __slots__ = ("entries",)

    entries: Tuple[Tuple[int, KneadingSequence], ...]

    def __post_init__(self: Self) -> None:
        """Post init used to sort and validate the entries."""
        entries = tuple(sorted(self.entries, key=lambda e: e[0]))
        object.__setattr__(self, "entries", entries)

        indices = [i for i, _ in entries]
        if len(set(indices)) != len(indices):
            msg = f"Kneading set indices must be distinct, found {indices}."
            raise ValueError(msg)

        seen: Dict[SymbolWord, int] = {}
        for index, seq in entries:
            if seq.arc_code in seen:
                msg = f"Arc-code {str(seq.arc_code)!r} is shared by indices {seen[seq.arc_code]} and {index}."
                raise DuplicateArcCodeError(msg, arc_code=str(seq.arc_code), indices=[seen[seq.arc_code], index])
            seen[seq.arc_code] = index

        root = seen.get(SymbolWord(()))
        if root is None:
            msg = "A kneading set needs an entry with the empty arc-code."
            raise MissingRootError(msg)
        if root != 0:
            msg = f"The entry with the empty arc-code must have index 0, found {root}."
            raise MissingRootError(msg, index=root)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, KneadingSequence]) -> KneadingSet:
        """Builds a set from an `index -> sequence` mapping."""
        return cls(entries=tuple(mapping.items()))

    def __len__(self: Self) -> int:
        return len(self.entries)

    def __iter__(self: Self) -> Iterator[Tuple[int, KneadingSequence]]:
        return iter(self.entries)

    def __contains__(self: Self, index: object) -> bool:
        return any(i == index for i, _ in self.entries)

    def __getitem__(self: Self, index: int) -> KneadingSequence:
        for i, seq in self.entries:
            if i == index:
                return seq
        msg = f"No kneading sequence with index {index}."
        raise KeyError(msg)

    def get(self: Self, index: int) -> Optional[KneadingSequence]:
        """Sequence at `index` or `None`."""
        return dict(self.entries).get(index)

    @property
    def indices(self: Self) -> Tuple[int, ...]:
        """Sorted indices."""
        return tuple(i for i, _ in self.entries)

    @property
    def depth(self: Self) -> int:
        """Shortest tail length."""
        return min(seq.depth for _, seq in self.entries)

    def truncate(self: Self, depth: int) -> KneadingSet:
        """Truncates every tail to `depth` symbols."""
        return KneadingSet(entries=tuple((i, seq.truncate(depth)) for i, seq in self.entries))

    def restrict_like(self: Self, other: KneadingSet) -> KneadingSet:
        """Keeps only the entries present in `other`, truncated to the tail lengths found there."""
        return KneadingSet(
            entries=tuple((i, seq.truncate(other[i].depth)) for i, seq in self.entries if i in other),
        )

    def forget_indices(self: Self) -> Tuple[KneadingSequence, ...]:
        """The sequences without their indices, ordered by arc-code text."""
        return tuple(sorted((seq for _, seq in self.entries), key=lambda s: (len(s.arc_code), str(s.arc_code))))

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the JSON serializer."""
        return {
            "entries": [
                {"index": i, "arc_code": str(seq.arc_code), "tail": str(seq.tail)} for i, seq in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> KneadingSet:
        """Inverse of `to_dict`; entries without an index go through `recover_indices`."""
        raw = data["entries"]
        sequences = [KneadingSequence.from_text(e["arc_code"], e["tail"]) for e in raw]
        if all(e.get("index") is not None for e in raw):
            return cls(entries=tuple((int(e["index"]), seq) for e, seq in zip(raw, sequences)))
        return recover_indices(sequences)


@dataclass(frozen=True)
class Verdict:
    """Outcome of an admissibility test.

    Either `AdmissibleUpTo(depth)` (`admissible` is `True`) or `Rejected(index, position)`, where `index` is the
    kneading entry whose tail is exceeded and `position` is the length of its arc-code minus one.
    """

    __slots__ = ("admissible", "depth", "index", "position")

    admissible: bool
    depth: Optional[int]
    index: Optional[int]
    position: Optional[int]

    @classmethod
    def admissible_up_to(cls, depth: int) -> Verdict:
        """`AdmissibleUpTo(depth)`."""
        return cls(admissible=True, depth=depth, index=None, position=None)

    @classmethod
    def rejected(cls, index: int, position: int) -> Verdict:
        """`Rejected(index, position)`."""
        return cls(admissible=False, depth=None, index=index, position=position)

    def __str__(self: Self) -> str:
        if self.admissible:
            return f"AdmissibleUpTo({self.depth})"
        return f"Rejected(index={self.index}, position={self.position})"

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the CLI."""
        if self.admissible:
            return {"verdict": "admissible", "depth": self.depth}
        return {"verdict": "rejected", "index": self.index, "position": self.position}


@dataclass(frozen=True)
class SetComparison:
    """Outcome of `compare_kneading_sets`: `EqualUpToDepth(depth)` or `Differ(index, kind, position)`."""

    __slots__ = ("equal", "depth", "index", "kind", "position")

    equal: bool
    depth: Optional[int]
    index: Optional[int]
    kind: Optional[DifferenceKind]
    position: Optional[int]

    def __str__(self: Self) -> str:
        if self.equal:
            return f"EqualUpToDepth({self.depth})"
        return f"Differ(index={self.index}, kind={self.kind}, position={self.position})"

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the CLI."""
        if self.equal:
            return {"result": "equal", "depth": self.depth}
        return {"result": "differ", "index": self.index, "kind": self.kind, "position": self.position}


def basic_arc_order(u: WordLike, v: WordLike) -> ArcOrder:
    """Relative position of two basic arcs along W^u, read from their arc-codes.

    Arcs whose codes have different parity lie on opposite branches and are `"incomparable"`. On the same branch the
    longer code is `"farther"` from the fixed point; at equal length the plex-smaller code is the farther one.

    Raises:
        InvalidArcCodeError: If a nonempty code does not start with `-` or contains `~`.

    Examples:
        ```python
        from pruningfront.kneading import basic_arc_order

        basic_arc_order("---", "-"), basic_arc_order("-+-", "---"), basic_arc_order("-", "--")
        # ('farther', 'closer', 'incomparable')
        ```
    """
    u, v = as_word(u), as_word(v)
    _validate_arc_code(u)
    _validate_arc_code(v)

    if len(u) % 2 != len(v) % 2:
        return "incomparable"
    if len(u) != len(v):
        return "farther" if len(u) > len(v) else "closer"

    result = plex_compare(u, v, len(u))
    if result.is_less:
        return "farther"
    if result.is_greater:
        return "closer"
    return "same"


def _closer_first(u: KneadingSequence, v: KneadingSequence) -> int:
    order = basic_arc_order(u.arc_code, v.arc_code)
    return {"farther": 1, "closer": -1}.get(order, 0)


def recover_indices(entries: Iterable[KneadingSequence]) -> KneadingSet:
    """Assigns indices to kneading sequences from the position of their arc-codes along W^u.

    Critical points of the negative branch (`z_0, z_1, ...`) have preimages on the positive branch, whose arcs carry
    even length codes, and vice versa. Indices therefore count outward from the fixed point: even codes get
    `0, 1, 2, ...` and odd codes get `-1, -2, ...`. The sequences are assumed to be contiguous on each branch.

    Raises:
        DuplicateArcCodeError: If two entries share an arc-code.
        MissingRootError: If no entry has the empty arc-code.

    Examples:
        ```python
        from pruningfront.kneading import KneadingSequence
        from pruningfront.kneading import recover_indices

        kset = recover_indices([KneadingSequence.from_text(code, "+") for code in ("", "-", "--", "-+-")])
        {i: str(seq.arc_code) for i, seq in kset}
        # {-2: '-+-', -1: '-', 0: '', 1: '--'}
        ```
    """
    entries = list(entries)

    seen: Dict[SymbolWord, int] = {}
    for position, seq in enumerate(entries):
        if seq.arc_code in seen:
            msg = f"Arc-code {str(seq.arc_code)!r} appears twice (entries {seen[seq.arc_code]} and {position})."
            raise DuplicateArcCodeError(msg, arc_code=str(seq.arc_code), indices=[seen[seq.arc_code], position])
        seen[seq.arc_code] = position

    if SymbolWord(()) not in seen:
        msg = "Cannot recover indices without the entry of the empty arc-code."
        raise MissingRootError(msg)

    even = sorted((s for s in entries if len(s.arc_code) % 2 == 0), key=cmp_to_key(_closer_first))
    odd = sorted((s for s in entries if len(s.arc_code) % 2 == 1), key=cmp_to_key(_closer_first))

    indexed = [(i, seq) for i, seq in enumerate(even)] + [(-(i + 1), seq) for i, seq in enumerate(odd)]
    return KneadingSet(entries=tuple(indexed))


def _check_concrete(p: SymbolWord, kset: KneadingSet, depth: int) -> Verdict:
    certified = depth
    for index, seq in sorted(kset, key=lambda e: (len(e[1].arc_code), e[0])):
        m = len(seq.arc_code) - 1
        start = m + 2
        if start >= depth or not p.startswith(seq.arc_code):
            continue

        available = min(depth - start, len(seq.tail))
        result = plex_compare(p[start:depth], seq.tail, available)
        if result.is_greater:
            return Verdict.rejected(index=index, position=m)
        if result.is_equal and available < depth - start:
            certified = min(certified, start + available)
    return Verdict.admissible_up_to(certified)


def is_wu_admissible(p: WordLike, kset: KneadingSet, depth: int, *, limit: int = 1 << 12) -> Verdict:
    """Tests whether `+^∞ · p` can be the itinerary of a point of W^u, given the pruning front `kset`.

    The sequence is rejected as soon as some entry with arc-code `w = p_0 ... p_m` sees the shifted sequence
    `p_{m+2} p_{m+3} ...` exceed its tail in the parity-lexicographical order. Comparisons stop at `depth` or at the
    end of the tail, in which case the certified depth is lowered accordingly.

    Arguments:
        p: Right word starting with `-` (a leading `~` is expanded).
        kset: Kneading set.
        depth: Number of symbols of `p` to certify; clipped to `len(p)`.
        limit: Budget for the expansion of `~` symbols.

    Returns:
        `AdmissibleUpTo(d)` or `Rejected(index, position)`. With `~` symbols the word is admissible iff some expansion
        is, and the best certified depth is reported.

    Raises:
        BadFirstSymbolError: If `p` is empty or does not start with `-` or `~`.

    Examples:
        ```python
        from pruningfront.kneading import KneadingSequence
        from pruningfront.kneading import KneadingSet
        from pruningfront.kneading import is_wu_admissible

        kset = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-+--")})
        str(is_wu_admissible("--+-+--", kset, 7)), str(is_wu_admissible("-+--", kset, 4))
        # ('AdmissibleUpTo(7)', 'Rejected(index=0, position=-1)')
        ```
    """
    p = as_word(p)
    if not p or p[0] is Symbol.PLUS:
        msg = f"The tested sequence must start with '-', found {str(p)!r}."
        raise BadFirstSymbolError(msg, word=str(p))

    depth = min(depth, len(p))
    expansions = [e for e in expand_plus_minus(p[:depth], limit=limit) if e[0] is Symbol.MINUS]

    best: Optional[Verdict] = None
    first_rejection: Optional[Verdict] = None
    for word in expansions:
        verdict = _check_concrete(word, kset, depth)
        if verdict.admissible:
            if best is None or (verdict.depth or 0) > (best.depth or 0):
                best = verdict
        elif first_rejection is None:
            first_rejection = verdict

    if best is not None:
        return best
    return first_rejection  # type: ignore[return-value]


def itinerary_is_wu_admissible(window: TwoSidedWindow, kset: KneadingSet, depth: int) -> Verdict:
    """Admissibility of a full W^u itinerary `+^∞ w · p_0 p_1 ...`.

    The sequence is re-anchored at its first `-` (the itinerary of the fixed point, all `+`, is admissible).

    Arguments:
        window: Window with an all-plus left tail.
        kset: Kneading set.
        depth: Number of symbols from coordinate 0 to certify.

    Returns:
        A `Verdict` whose certified depth is expressed in coordinates of `window`.

    Raises:
        InsufficientWindowError: If the window has no all-plus left tail.
    """
    if not window.left_tail_all_plus:
        msg = "Full W^u itineraries need an all-plus left tail."
        raise InsufficientWindowError(msg)

    depth = min(depth, window.known_depth)
    sequence = window.left_word + window.right_word[:depth]
    offset = len(window.left_word)

    best: Optional[Verdict] = None
    first_rejection: Optional[Verdict] = None
    for word in expand_plus_minus(sequence):
        anchor = next((k for k, s in enumerate(word) if s is Symbol.MINUS), None)
        if anchor is None:
            verdict = Verdict.admissible_up_to(depth)
        else:
            verdict = is_wu_admissible(word[anchor:], kset, len(word) - anchor)
            if verdict.admissible:
                verdict = Verdict.admissible_up_to(max(0, (verdict.depth or 0) + anchor - offset))

        if verdict.admissible:
            if best is None or (verdict.depth or 0) > (best.depth or 0):
                best = verdict
        elif first_rejection is None:
            first_rejection = verdict

    if best is not None:
        return best
    return first_rejection  # type: ignore[return-value]


def _preludes(length: int) -> Iterator[SymbolWord]:
    yield SymbolWord(())
    for size in range(1, length + 1):
        for rest in product((Symbol.MINUS, Symbol.PLUS), repeat=size - 1):
            yield SymbolWord((Symbol.MINUS, *rest))


def is_admissible(
    window: TwoSidedWindow,
    kset: KneadingSet,
    n: int,
    *,
    prelude_length: Optional[int] = None,
    max_candidates: int = 1 << 16,
) -> Verdict:
    """Tests whether the finite window `w_{-n} ... w_n` occurs in some W^u itinerary.

    Every left prelude `u` (empty or starting with `-`, of length at most `prelude_length`) is tried in front of the
    window, forming `+^∞ u w_{-n} ... · w_0 ... w_n`.

    Arguments:
        window: Window storing at least the coordinates `-n .. n` (or an all-plus left tail).
        kset: Kneading set.
        n: Radius of the window.
        prelude_length: Longest prelude tried, defaults to `n`.
        max_candidates: Budget on the number of preludes.

    Returns:
        `AdmissibleUpTo` when a prelude passes, else the rejection of the first prelude.

    Raises:
        SearchBudgetExceededError: If the number of preludes exceeds `max_candidates`.
        InsufficientWindowError: If the window does not cover `-n .. n`.
    """
    if n < 0:
        msg = f"`n` must be non-negative, found {n}."
        raise ValueError(msg)

    core = window.right_tail(-n)[: 2 * n + 1]
    if len(core) < 2 * n + 1:
        msg = f"The window must store the coordinates {-n}..{n}, found {window}."
        raise InsufficientWindowError(msg, needed=n)
    core_left, core_right = core[:n], core[n:]

    if window.left_tail_all_plus and -n - 1 < -len(window.left_word):
        preludes: Iterable[SymbolWord] = [SymbolWord(())]
        core_left = window.left_word
    else:
        length = n if prelude_length is None else prelude_length
        candidates = 1 << length
        if candidates > max_candidates:
            msg = f"Trying {candidates} preludes of length <= {length} exceeds the budget of {max_candidates}."
            raise SearchBudgetExceededError(msg, candidates=candidates, budget=max_candidates)
        preludes = _preludes(length)

    first_rejection: Optional[Verdict] = None
    tried = 0
    for prelude in preludes:
        tried += 1
        left = (prelude + core_left).lstrip_plus()
        candidate = TwoSidedWindow(left_word=left, left_tail_all_plus=True, right_word=core_right)
        verdict = itinerary_is_wu_admissible(candidate, kset, n + 1)
        if verdict.admissible:
            logger.debug("Window %s admissible with prelude %r after %d candidates", window, str(prelude), tried)
            return Verdict.admissible_up_to(min(n, verdict.depth or 0))
        if first_rejection is None:
            first_rejection = verdict
    return first_rejection  # type: ignore[return-value]


def compare_kneading_sets(first: KneadingSet, second: KneadingSet, depth: int) -> SetComparison:
    """Compares two kneading sets entry by entry, outward from index 0.

    Only the index range shared by both sets is visited; the first structural or symbol difference is reported.

    Returns:
        `EqualUpToDepth(d)` with the depth actually compared, or `Differ(index, kind, position)` where `kind` is
        `"missing_entry"`, `"arc_code_mismatch"` or `"tail_mismatch"` (`position` is the tail coordinate).
    """
    lo = max(min(first.indices), min(second.indices))
    hi = min(max(first.indices), max(second.indices))
    indices = sorted({i for i in (*first.indices, *second.indices) if lo <= i <= hi}, key=by_distance_from_origin)

    compared = depth
    for index in indices:
        a, b = first.get(index), second.get(index)
        if a is None or b is None:
            return SetComparison(equal=False, depth=None, index=index, kind="missing_entry", position=None)
        if a.arc_code != b.arc_code:
            return SetComparison(equal=False, depth=None, index=index, kind="arc_code_mismatch", position=None)

        available = min(depth, a.depth, b.depth)
        for position in range(available):
            if a.tail[position] is not b.tail[position]:
                return SetComparison(equal=False, depth=None, index=index, kind="tail_mismatch", position=position)
        compared = min(compared, available)

    return SetComparison(equal=True, depth=compared, index=None, kind=None, position=None)


def rejecting_window(kset: KneadingSet, index: int) -> SymbolWord:
    """A word starting with `-` that the entry `index` rejects.

    The word is the arc-code, a free symbol, a prefix of the tail and finally the symbol that makes the continuation
    exceed the tail.

    Raises:
        InsufficientDepthError: If no coordinate of the tail can be bumped upward.
    """
    seq = kset[index]
    odd = False
    for j, symbol in enumerate(seq.tail):
        if symbol is (Symbol.PLUS if odd else Symbol.MINUS):
            return seq.arc_code + Symbol.MINUS + seq.tail[:j] + symbol.flip()
        if symbol is Symbol.PLUS:
            odd = not odd

    msg = f"The tail {seq.tail} of index {index} cannot be exceeded within its known depth."
    raise InsufficientDepthError(msg, index=index, needed=seq.depth + 1)

