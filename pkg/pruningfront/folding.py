from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from pruningfront.errors import InsufficientDepthError
from pruningfront.errors import InsufficientWindowError
from pruningfront.errors import MalformedPatternError
from pruningfront.errors import ParseError
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.symbols import Symbol
from pruningfront.symbols import SymbolWord
from pruningfront.utils._funcs import outward_positions
from pruningfront.utils._funcs import pairwise
from pruningfront.utils._types import Label

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)


class PositionMap:
    """The map `F` restricted to the basic points of a finite folding window.

    Positions `-len(left) .. -1` and `1 .. len(right)` index the basic points, `0` is the fixed point. `F` sends
    position `k > 0` to the k-th 1-mark left of the origin and position `-k` to the k-th 1-mark right of it (both
    counted outward); positions whose image falls outside the window map to `None`.

    Arguments:
        left: Marks at positions `-1, -2, ...`.
        right: Marks at positions `1, 2, ...`.
    """

    def __init__(self: Self, left: Sequence[int], right: Sequence[int]) -> None:
        self.left = tuple(left)
        self.right = tuple(right)
        self.ones_left = tuple(-(k + 1) for k, mark in enumerate(self.left) if mark == 1)
        self.ones_right = tuple(k + 1 for k, mark in enumerate(self.right) if mark == 1)
        self._left_arc_signs = self._arc_signs(self.left)
        self._right_arc_signs = self._arc_signs(self.right)

    @staticmethod
    def _arc_signs(marks: Sequence[int]) -> Tuple[Symbol, ...]:
        # signs[k] is the sign of the arc between positions k and k + 1 (outward), signs[0] touches the origin
        signs = [Symbol.PLUS]
        for mark in marks[:-1]:
            signs.append(signs[-1].flip() if mark == 0 else signs[-1])
        return tuple(signs)

    def __contains__(self: Self, position: object) -> bool:
        return isinstance(position, int) and -len(self.left) <= position <= len(self.right)

    def mark(self: Self, position: int) -> int:
        """Mark at a nonzero position."""
        return self.right[position - 1] if position > 0 else self.left[-position - 1]

    def image(self: Self, position: int) -> Optional[int]:
        """Position of `F(position)` or `None` when it lies outside the window."""
        if position == 0:
            return 0
        if position > 0:
            return self.ones_left[position - 1] if position <= len(self.ones_left) else None
        return self.ones_right[-position - 1] if -position <= len(self.ones_right) else None

    def preimage(self: Self, position: int) -> Optional[int]:
        """Position whose image is the 1-mark at `position`, `None` when outside the window."""
        if position == 0:
            return 0
        if position > 0:
            rank = self.ones_right.index(position) + 1
            return -rank if rank <= len(self.left) else None
        rank = self.ones_left.index(position) + 1
        return rank if rank <= len(self.right) else None

    def arc_sign(self: Self, inner: int, outer: int) -> Symbol:
        """Sign of the arc between adjacent positions `inner` (closer to the origin) and `outer`."""
        if outer > 0:
            return self._right_arc_signs[inner]
        return self._left_arc_signs[-inner]

    def point_sign(self: Self, position: int) -> Symbol:
        """`~` on critical points (0-marks), otherwise the sign of the neighbouring arcs."""
        if position == 0:
            return Symbol.PLUS
        if self.mark(position) == 0:
            return Symbol.PLUS_MINUS
        inner = position - 1 if position > 0 else position + 1
        return self.arc_sign(inner, position)

    def zero_subscripts(self: Self) -> Dict[int, int]:
        """Subscript of every 0-mark: left 0-marks are `z_0, z_1, ...`, right ones `z_{-1}, z_{-2}, ...`."""
        subscripts: Dict[int, int] = {}
        for i, k in enumerate(k for k, mark in enumerate(self.left) if mark == 0):
            subscripts[-(k + 1)] = i
        for i, k in enumerate(k for k, mark in enumerate(self.right) if mark == 0):
            subscripts[k + 1] = -(i + 1)
        return subscripts

    def label(self: Self, position: int, zeros: Dict[int, int]) -> Optional[Label]:
        """`(i, j)` such that `position` holds `z_i^j`, `None` when the preimage chain leaves the window."""
        steps, current = 0, position
        while self.mark(current) == 1:
            previous = self.preimage(current)
            if previous is None:
                return None
            current, steps = previous, steps + 1
        return (zeros[current], steps)


def complete_generations(left: Sequence[int], right: Sequence[int]) -> int:
    """Largest `g` such that `[z_0^{g+1}, z_0^g]` lies inside the window (0 when even the seed is incomplete)."""
    if not left or not right:
        return 0
    pmap = PositionMap(left, right)
    terms, position = 0, 1
    while position is not None and position in pmap and position != 0:
        terms += 1
        position = pmap.image(position)
    return max(terms - 1, 0)


def _validate_marks(left: Sequence[int], right: Sequence[int]) -> None:
    for side, marks in (("left", left), ("right", right)):
        bad = [m for m in marks if m not in (0, 1)]
        if bad:
            msg = f"Marks must be 0 or 1, found {bad[0]!r} on the {side} side."
            raise MalformedPatternError(msg, side=side)
        for k, (a, b) in enumerate(pairwise(marks)):
            if a == 0 and b == 0:
                position = k + 1 if side == "right" else -(k + 1)
                msg = f"Adjacent 0-marks at positions {position} and {position + (1 if side == 'right' else -1)}."
                raise MalformedPatternError(msg, position=position)

    if not left or left[0] != 0:
        msg = "Position -1 must hold the first critical point (mark 0)."
        raise MalformedPatternError(msg, position=-1)
    if not right or right[0] != 1:
        msg = "Position 1 must hold the first turning point (mark 1)."
        raise MalformedPatternError(msg, position=1)


@dataclass(frozen=True)
class FoldingPattern:
    """Finite window of the 0/1 folding pattern of W^u, read along the unstable manifold through the fixed point.

    A 0 marks a basic critical point and a 1 a post-critical point. `left[k-1]` is the mark at position `-k` and
    `right[k-1]` the mark at position `k`. A pattern with `generations = g` covers the basic points of
    `[z_0^{g+1}, z_0^g]`, the seed `1 0 . 1` being the first generation.

    Arguments:
        left: Marks left of the origin, outward.
        right: Marks right of the origin, outward.
        generations: Number of complete generations the pattern claims.

    Raises:
        MalformedPatternError: On adjacent 0-marks, wrong seed marks or more generations than the window holds.

    Examples:
        ```python
        from pruningfront.folding import FoldingPattern

        pattern = FoldingPattern.from_text("1 0 1 0 1 0 . 1 0 1 0 1 1 1 0 1")
        pattern.generations, pattern.left[:2], pattern.right[:2]
        # (4, (0, 1), (1, 0))
        ```
    """

    __slots__ = ("left", "right", "generations")

    left: Tuple[int, ...]
    right: Tuple[int, ...]
    generations: int

    def __post_init__(self: Self) -> None:
        """Post init used to validate the window."""
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        _validate_marks(self.left, self.right)

        if not isinstance(self.generations, int) or self.generations < 1:
            msg = f"`generations` must be a positive integer, found {self.generations!r}."
            raise MalformedPatternError(msg)

        complete = complete_generations(self.left, self.right)
        if self.generations > complete:
            msg = f"The window holds {complete} complete generations, {self.generations} were declared."
            raise MalformedPatternError(msg, complete=complete, declared=self.generations)

    @classmethod
    def from_text(cls, text: str, generations: Optional[int] = None) -> FoldingPattern:
        """Parses `1 0 1 0 . 1 0 1` (marks written left to right, `.` at the fixed point).

        Arguments:
            text: Marks separated by optional whitespace.
            generations: Declared generations, defaults to the complete generations of the window.

        Raises:
            ParseError: On characters other than `0`, `1`, `.` and whitespace, or a missing/repeated `.`.
        """
        before: List[int] = []
        after: Optional[List[int]] = None
        for position, char in enumerate(text):
            if char.isspace():
                continue
            if char == ".":
                if after is not None:
                    msg = f"A folding pattern has exactly one '.', found a second one at position {position}."
                    raise ParseError(msg, position=position)
                after = []
            elif char in "01":
                (before if after is None else after).append(int(char))
            else:
                msg = f"Invalid character {char!r} at position {position} of a folding pattern."
                raise ParseError(msg, position=position)

        if after is None:
            msg = "A folding pattern needs a '.' marking the fixed point."
            raise ParseError(msg, position=len(text))

        left, right = tuple(reversed(before)), tuple(after)
        if generations is None:
            _validate_marks(left, right)
            generations = complete_generations(left, right)
        return cls(left=left, right=right, generations=generations)

    @property
    def positions(self: Self) -> Tuple[int, ...]:
        """Nonzero positions of the window, left to right."""
        return tuple(range(-len(self.left), 0)) + tuple(range(1, len(self.right) + 1))

    def position_map(self: Self) -> PositionMap:
        """The map on positions of this window."""
        return PositionMap(self.left, self.right)

    def __str__(self: Self) -> str:
        left = " ".join(str(m) for m in reversed(self.left))
        right = " ".join(str(m) for m in self.right)
        return f"{left} . {right}"


@dataclass(frozen=True)
class Annotation:
    """Derived data of one basic point of a folding window.

    `sign` is `~` for critical points; `subscript`/`superscript` give `z_i^j` and are `None` when the preimage chain
    leaves the window; `arrow` is the position of the image, `None` when outside the window.
    """

    __slots__ = ("position", "mark", "sign", "subscript", "superscript", "arrow")

    position: int
    mark: int
    sign: Symbol
    subscript: Optional[int]
    superscript: Optional[int]
    arrow: Optional[int]

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the JSON serializer."""
        return {
            "position": self.position,
            "mark": self.mark,
            "sign": self.sign.char,
            "subscript": self.subscript,
            "superscript": self.superscript,
            "arrow": self.arrow,
        }


@dataclass(frozen=True)
class AnnotatedPattern:
    """A folding pattern together with one `Annotation` per position, ordered left to right."""

    __slots__ = ("pattern", "annotations")

    pattern: FoldingPattern
    annotations: Tuple[Annotation, ...]

    @property
    def generations(self: Self) -> int:
        """Complete generations of the underlying window."""
        return complete_generations(self.pattern.left, self.pattern.right)

    def at(self: Self, position: int) -> Annotation:
        """Annotation of the basic point at `position`."""
        for annotation in self.annotations:
            if annotation.position == position:
                return annotation
        msg = f"Position {position} is outside the window."
        raise KeyError(msg)

    def signed_text(self: Self) -> str:
        """Arc signs interleaved with marks, e.g. `-1-0+.+1+`."""
        pmap = self.pattern.position_map()

        def outer_sign(position: int) -> str:
            inner = position - 1 if position > 0 else position + 1
            sign = pmap.arc_sign(inner, position)
            return (sign.flip() if pmap.mark(position) == 0 else sign).char

        left = "".join(f"{outer_sign(p)}{pmap.mark(p)}" for p in range(-len(self.pattern.left), 0))
        right = "".join(f"{pmap.mark(p)}{outer_sign(p)}" for p in range(1, len(self.pattern.right) + 1))
        return f"{left}{pmap.arc_sign(0, -1).char}.{pmap.arc_sign(0, 1).char}{right}"

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the JSON serializer."""
        return {
            "left": list(self.pattern.left),
            "right": list(self.pattern.right),
            "generations": self.pattern.generations,
            "positions": [a.to_dict() for a in self.annotations],
        }


def annotate(pattern: FoldingPattern) -> AnnotatedPattern:
    """Derives signs, subscripts and map arrows for every position of a folding window.

    Raises:
        MalformedPatternError: If a post-critical point of the complete window has no preimage chain back to a critical
            point.

    Examples:
        ```python
        from pruningfront.folding import FoldingPattern
        from pruningfront.folding import annotate

        annotated = annotate(FoldingPattern.from_text("1 0 . 1"))
        [(a.position, a.sign.char, a.subscript, a.superscript, a.arrow) for a in annotated.annotations]
        # [(-2, '-', 0, 2, None), (-1, '~', 0, 0, 1), (1, '+', 0, 1, -2)]
        ```
    """
    pmap = pattern.position_map()
    zeros = pmap.zero_subscripts()
    lo, hi = _complete_window(pmap, pattern.generations)

    annotations = []
    for position in pattern.positions:
        label = pmap.label(position, zeros)
        if label is None and lo <= position <= hi:
            msg = f"The post-critical point at position {position} has no preimage chain inside the window."
            raise MalformedPatternError(msg, position=position)
        annotations.append(
            Annotation(
                position=position,
                mark=pmap.mark(position),
                sign=pmap.point_sign(position),
                subscript=None if label is None else label[0],
                superscript=None if label is None else label[1],
                arrow=pmap.image(position),
            ),
        )
    return AnnotatedPattern(pattern=pattern, annotations=tuple(annotations))


def _complete_window(pmap: PositionMap, generations: int) -> Tuple[int, int]:
    # positions of z_0^g and z_0^{g+1}
    ends = [1]
    for _ in range(generations):
        image = pmap.image(ends[-1])
        ends.append(image if image is not None else ends[-1])
    lo, hi = sorted(ends[-2:])
    return lo, hi


def kneading_to_folding(kset: KneadingSet, generations: int) -> FoldingPattern:
    """Builds the folding window of `generations` complete generations from a kneading set.

    Starting from the seed `1 0 . 1`, each step extends the side that holds `z_0^{n+2}`: every basic point of the
    other side without an image yet is sent, in outward order, to a fresh 1-mark `z_i^j` whose sign is
    `K[i].tail[j-1]`, and a 0-mark is inserted between consecutive 1-marks of opposite sign.

    Arguments:
        kset: Kneading set; `K[0]` needs `generations + 1` tail symbols.
        generations: Number of complete generations to build.

    Returns:
        The folding pattern.

    Raises:
        InsufficientDepthError: If a needed entry is missing or its tail is too short.
        MalformedPatternError: If a needed tail symbol is `~`.

    Examples:
        ```python
        from pruningfront.folding import kneading_to_folding
        from pruningfront.kneading import KneadingSequence
        from pruningfront.kneading import KneadingSet

        kset = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-")})
        str(kneading_to_folding(kset, 1))
        # '1 0 . 1'
        ```
    """
    if generations < 1:
        msg = f"`generations` must be at least 1, found {generations}."
        raise ValueError(msg)

    marks = {"left": [0, 1], "right": [1]}
    labels: Dict[str, List[Label]] = {"left": [(0, 0), (0, 2)], "right": [(0, 1)]}
    zero_count = {"left": 1, "right": 0}

    for step in range(1, generations):
        extended, other = ("right", "left") if step % 2 == 1 else ("left", "right")
        ones = sum(marks[extended])
        fresh = labels[other][ones:]

        signs = []
        for i, j in fresh:
            seq = kset.get(i)
            if seq is None or seq.depth <= j:
                msg = f"Generation {step + 1} needs {j + 1} tail symbols of index {i}."
                raise InsufficientDepthError(msg, generation=step + 1, index=i, needed=j + 1)
            if seq.tail[j] is Symbol.PLUS_MINUS:
                msg = f"Tail symbol {j} of index {i} is '~' and cannot be placed on a leaf."
                raise MalformedPatternError(msg, index=i, position=j)
            signs.append(seq.tail[j])

        previous = PositionMap([0], marks[extended]).arc_sign(len(marks[extended]) - 1, len(marks[extended]))
        for (i, j), sign in zip(fresh, signs):
            if sign is not previous:
                subscript = zero_count[extended] if extended == "left" else -(zero_count[extended] + 1)
                zero_count[extended] += 1
                marks[extended].append(0)
                labels[extended].append((subscript, 0))
            marks[extended].append(1)
            labels[extended].append((i, j + 1))
            previous = sign

        logger.debug("Generation %d extends the %s side with %d basic points", step + 1, extended, len(fresh))

    if kset.get(0) is None or kset[0].depth < generations + 1:
        msg = f"{generations} generations need {generations + 1} tail symbols of index 0."
        raise InsufficientDepthError(msg, generation=generations, index=0, needed=generations + 1)

    return FoldingPattern(left=tuple(marks["left"]), right=tuple(marks["right"]), generations=generations)


def _arc_code(pmap: PositionMap, inner: int, outer: int) -> SymbolWord:
    # code of the basic arc between adjacent positions `inner` and `outer`
    codes: List[Symbol] = []
    step = 1 if outer > 0 else -1
    while inner != 0:
        codes.append(pmap.arc_sign(inner, outer))
        u = inner
        while u != 0 and pmap.mark(u) == 0:
            u -= step
        v = outer
        while v in pmap and pmap.mark(v) == 0:
            v += step
        if v not in pmap:
            msg = f"The arc between positions {inner} and {outer} is not closed by a post-critical point."
            raise InsufficientWindowError(msg, position=outer)
        if u == 0:
            break
        pu, pv = pmap.preimage(u), pmap.preimage(v)
        if pu is None or pv is None:
            msg = f"The arc between positions {inner} and {outer} has no preimage inside the window."
            raise InsufficientWindowError(msg, position=outer)
        inner, outer = (pu, pv) if abs(pu) < abs(pv) else (pv, pu)
        step = 1 if outer > 0 else -1
    return SymbolWord(tuple(reversed(codes)))


def folding_to_kneading(pattern: FoldingPattern, depth: int, *, strict: bool = False) -> KneadingSet:
    """Reads the kneading sequences off a folding window.

    For every critical point `z_i` whose image lies in the window, the tail is the list of signs along the orbit of
    `z_i^1` (until `depth` symbols or the orbit leaves the window) and the arc-code is the code of the basic arc mapped
    onto the arc around `z_i`.

    Arguments:
        pattern: Folding window.
        depth: Maximum tail length.
        strict: Raise instead of returning shorter tails.

    Returns:
        The kneading set, indexed by the subscripts of the critical points.

    Raises:
        InsufficientWindowError: In strict mode, if a tail is shorter than `depth`.
    """
    annotated = annotate(pattern)
    pmap = pattern.position_map()

    entries = {}
    for annotation in annotated.annotations:
        if annotation.mark != 0 or annotation.arrow is None or annotation.subscript is None:
            continue

        tail: List[Symbol] = []
        position: Optional[int] = annotation.arrow
        while position is not None and len(tail) < depth:
            tail.append(pmap.point_sign(position))
            position = pmap.image(position)
        if len(tail) < depth:
            if strict:
                msg = f"The orbit of turning point {annotation.subscript} leaves the window after {len(tail)} symbols."
                raise InsufficientWindowError(msg, turning_index=annotation.subscript, available=len(tail))
            logger.debug("Tail of index %d truncated at %d symbols", annotation.subscript, len(tail))

        q = annotation.position
        step = 1 if q > 0 else -1
        inner_neighbour, outer_neighbour = q - step, q + step
        if inner_neighbour == 0:
            arc_code = SymbolWord(())
        else:
            pu = pmap.preimage(inner_neighbour)
            pv = pmap.preimage(outer_neighbour) if outer_neighbour in pmap else None
            if pu is None or pv is None:
                logger.debug("Arc-code of index %d is not determined by the window", annotation.subscript)
                continue
            arc_code = _arc_code(pmap, pu, pv)

        entries[annotation.subscript] = KneadingSequence(arc_code=arc_code, tail=SymbolWord(tuple(tail)))

    return KneadingSet.from_mapping(entries)


@dataclass(frozen=True)
class FoldingComparison:
    """Outcome of `compare_folding`: `EqualUpTo(generations)` or `DifferAt(coordinate)`."""

    __slots__ = ("equal", "generations", "coordinate")

    equal: bool
    generations: Optional[int]
    coordinate: Optional[int]

    def __str__(self: Self) -> str:
        return f"EqualUpTo({self.generations})" if self.equal else f"DifferAt({self.coordinate})"

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the CLI."""
        if self.equal:
            return {"result": "equal", "generations": self.generations}
        return {"result": "differ", "coordinate": self.coordinate}


def compare_folding(first: FoldingPattern, second: FoldingPattern) -> FoldingComparison:
    """Compares two folding windows outward from the origin (`1, -1, 2, -2, ...`) over their common positions."""
    a, b = first.position_map(), second.position_map()
    reach = max(len(first.left), len(first.right), len(second.left), len(second.right))

    for position in outward_positions():
        if abs(position) > reach:
            break
        if position in a and position in b and a.mark(position) != b.mark(position):
            return FoldingComparison(equal=False, generations=None, coordinate=position)
    return FoldingComparison(equal=True, generations=min(first.generations, second.generations), coordinate=None)


@dataclass(frozen=True)
class Leaf:
    """Arc of W^u between consecutive post-critical points.

    `index` is 0 for the leaf through the fixed point, positive on the right branch and negative on the left one.
    `turning` lists the turning points (superscript 1) among the two ends.
    """

    __slots__ = ("start", "end", "index", "turning")

    start: int
    end: int
    index: int
    turning: Tuple[int, ...]

    def left_of(self: Self, p: float, q: float) -> bool:
        """Whether position `p` is left of `q` in the leaf orientation (reversed on odd leaves)."""
        return p < q if self.index % 2 == 0 else p > q


def leaves(annotated: AnnotatedPattern) -> Tuple[Leaf, ...]:
    """Leaves of a folding window, left to right."""
    post = [a for a in annotated.annotations if a.mark == 1]
    origin_rank = next(k for k, a in enumerate(post) if a.position > 0)

    result = []
    for k, (start, end) in enumerate(pairwise(post)):
        turning = tuple(a.position for a in (start, end) if a.superscript == 1)
        result.append(Leaf(start=start.position, end=end.position, index=k - origin_rank + 1, turning=turning))
    return tuple(result)
