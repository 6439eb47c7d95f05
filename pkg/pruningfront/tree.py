from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from operator import lt as less_than
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

from pruningfront.errors import InsufficientDepthError
from pruningfront.errors import MalformedPatternError
from pruningfront.errors import ShapeViolationError
from pruningfront.folding import FoldingPattern
from pruningfront.folding import PositionMap
from pruningfront.folding import kneading_to_folding
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.symbols import Symbol
from pruningfront.symbols import SymbolWord
from pruningfront.utils._funcs import pairwise
from pruningfront.utils._funcs import pairwise_comparison

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)

ROOT = 0
ROOT_ARROWS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, -1))
"""The root arc `I_∅` covers itself and `I_{-1}`; these arrows are kept out of `PrunedTree.children`."""


@dataclass(frozen=True)
class PrunedTree:
    """Planar Markov tree of basic arcs: `v -> w` iff the image of arc `v` covers arc `w`.

    Vertex `0` is `I_∅`, `n > 0` is the arc between positions `n` and `n + 1`, `-n` the arc between positions
    `-n - 1` and `-n`. Level `k` holds the arcs whose codes have length `k`; negative ids sit at odd levels and positive
    ids at even ones. Vertices at level `depth` are open (their children are unknown).

    Arguments:
        levels: Vertex ids per level, in planar order.
        children: Children of every closed non-root vertex, in planar order.
        depth: Deepest level.

    Raises:
        ShapeViolationError: If the levels or children break the parity, ordering or child count rules.
    """

    __slots__ = ("levels", "children", "depth")

    levels: Tuple[Tuple[int, ...], ...]
    children: Dict[int, Tuple[int, ...]]
    depth: int

    def __post_init__(self: Self) -> None:
        """Post init used to validate the tree shape."""
        if len(self.levels) != self.depth + 1 or self.levels[0] != (ROOT,):
            msg = f"A tree of depth {self.depth} needs {self.depth + 1} levels starting with the root."
            raise ShapeViolationError(msg, depth=self.depth)
        if self.depth >= 1 and self.levels[1] != (-1,):
            msg = f"Level 1 must be (-1,), found {self.levels[1]}."
            raise ShapeViolationError(msg, level=1)

        for level, vertices in enumerate(self.levels[1:], start=1):
            if any((v < 0) != (level % 2 == 1) for v in vertices):
                msg = f"Level {level} must hold {'negative' if level % 2 else 'positive'} ids, found {vertices}."
                raise ShapeViolationError(msg, level=level)
            if not all(pairwise_comparison((abs(v) for v in vertices), less_than)):
                msg = f"Ids of level {level} must have increasing moduli, found {vertices}."
                raise ShapeViolationError(msg, level=level)

            if level < self.depth:
                kids = [w for v in vertices for w in self.children.get(v, ())]
                bad = [v for v in vertices if len(self.children.get(v, ())) not in (1, 2)]
                if bad:
                    count = len(self.children.get(bad[0], ()))
                    msg = f"Closed vertices have one or two children, vertex {bad[0]} has {count}."
                    raise ShapeViolationError(msg, vertex=bad[0])
                if tuple(kids) != self.levels[level + 1]:
                    msg = f"Children of level {level} do not match level {level + 1}."
                    raise ShapeViolationError(msg, level=level + 1)

    def children_of(self: Self, vertex: int) -> Tuple[int, ...]:
        """Children of `vertex` (the root's arrows are `ROOT_ARROWS`)."""
        if vertex == ROOT:
            return (-1,)
        return self.children.get(vertex, ())

    def parent_map(self: Self) -> Dict[int, int]:
        """`child -> parent` for every non-root vertex."""
        parents = {-1: ROOT} if self.depth >= 1 else {}
        parents.update({kid: parent for parent, kids in self.children.items() for kid in kids})
        return parents

    def level_map(self: Self) -> Dict[int, int]:
        """`vertex -> level`."""
        return {v: level for level, vertices in enumerate(self.levels) for v in vertices}

    def parent_of(self: Self, vertex: int) -> int:
        """Parent of a non-root vertex (`0` for `-1`)."""
        try:
            return self.parent_map()[vertex]
        except KeyError:
            msg = f"Vertex {vertex} is not in the tree."
            raise KeyError(msg) from None

    def level_of(self: Self, vertex: int) -> int:
        """Level of `vertex`."""
        try:
            return self.level_map()[vertex]
        except KeyError:
            msg = f"Vertex {vertex} is not in the tree."
            raise KeyError(msg) from None

    def is_open(self: Self, vertex: int) -> bool:
        """Whether the children of `vertex` are unknown."""
        return self.level_of(vertex) == self.depth

    @property
    def vertices(self: Self) -> Tuple[int, ...]:
        """All vertices, level by level."""
        return tuple(v for level in self.levels for v in level)

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the JSON serializer."""
        return {
            "levels": [list(level) for level in self.levels],
            "children": {str(v): list(kids) for v, kids in sorted(self.children.items())},
            "depth": self.depth,
        }


@dataclass(frozen=True)
class NakedTree:
    """Planar shape of a pruned tree: child counts of the closed vertices, one tuple per level from level 1."""

    __slots__ = ("child_counts",)

    child_counts: Tuple[Tuple[int, ...], ...]

    @property
    def depth(self: Self) -> int:
        """Depth of the labelled tree with this shape."""
        return len(self.child_counts) + 1


def _arc_image(pmap: PositionMap, vertex: int) -> Optional[Tuple[int, ...]]:
    if vertex > 0:
        a, b = pmap.image(vertex), pmap.image(vertex + 1)
        if a is None or b is None:
            return None
        return tuple(-m for m in range(abs(a), abs(b)))
    n = -vertex
    a, b = pmap.image(-n), pmap.image(-n - 1)
    if a is None or b is None:
        return None
    return tuple(range(a, b))


def folding_to_tree(pattern: FoldingPattern) -> PrunedTree:
    """Builds the pruned tree of the basic arcs of a folding window.

    Arrows come from the map on positions, levels from a breadth first search starting at the root. The tree depth is
    the number of generations of the pattern.

    Raises:
        MalformedPatternError: If the image of a closed arc leaves the window.

    Examples:
        ```python
        from pruningfront.folding import FoldingPattern
        from pruningfront.tree import folding_to_tree

        tree = folding_to_tree(FoldingPattern.from_text("1 0 1 0 1 0 . 1 0 1 0 1 1 1 0 1"))
        tree.levels
        # ((0,), (-1,), (1, 2), (-2, -3, -4, -5), (3, 4, 5, 6, 7, 8))
        ```
    """
    pmap = pattern.position_map()
    levels: List[Tuple[int, ...]] = [(ROOT,), (-1,)]
    children: Dict[int, Tuple[int, ...]] = {}

    for _ in range(1, pattern.generations):
        following: List[int] = []
        for vertex in levels[-1]:
            kids = _arc_image(pmap, vertex)
            if kids is None or not kids:
                msg = f"The image of arc {vertex} is not inside the window."
                raise MalformedPatternError(msg, vertex=vertex)
            children[vertex] = kids
            following.extend(kids)
        levels.append(tuple(sorted(following, key=abs)))

    return PrunedTree(levels=tuple(levels), children=children, depth=pattern.generations)


def strip_labels(tree: PrunedTree) -> NakedTree:
    """Forgets the vertex ids, keeping the planar child counts."""
    return NakedTree(
        child_counts=tuple(tuple(len(tree.children[v]) for v in tree.levels[k]) for k in range(1, tree.depth)),
    )


def relabel_naked_tree(shape: NakedTree) -> PrunedTree:
    """Assigns the canonical vertex ids to a planar shape.

    Level 1 is `(-1,)`; odd levels are negative and even levels positive, ids have consecutive moduli, and each level
    continues the numbering where the level two above stopped.

    Raises:
        ShapeViolationError: On child counts outside `{1, 2}` or a number of counts that does not match the level size.
    """
    levels: List[Tuple[int, ...]] = [(ROOT,), (-1,)]
    children: Dict[int, Tuple[int, ...]] = {}

    for level, counts in enumerate(shape.child_counts, start=1):
        parents = levels[level]
        if len(counts) != len(parents):
            msg = f"Level {level} has {len(parents)} vertices but {len(counts)} child counts."
            raise ShapeViolationError(msg, level=level)
        if any(c not in (1, 2) for c in counts):
            msg = f"Child counts must be 1 or 2, found {counts} at level {level}."
            raise ShapeViolationError(msg, level=level)

        sign = -1 if (level + 1) % 2 == 1 else 1
        modulus = abs(levels[level - 1][-1]) + 1
        following: List[int] = []
        for parent, count in zip(parents, counts):
            kids = tuple(sign * (modulus + k) for k in range(count))
            modulus += count
            children[parent] = kids
            following.extend(kids)
        levels.append(tuple(following))

    return PrunedTree(levels=tuple(levels), children=children, depth=shape.depth)


def _mark_position(vertex: int) -> int:
    # position of the mark immediately right of `vertex`
    if vertex == ROOT:
        return 1
    return vertex + 1 if vertex > 0 else vertex - 1


ZERO_ZERO_POSITION = -1


@dataclass(frozen=True)
class MarkedTree:
    """A pruned tree with the mark right of every vertex and the sign of every arc.

    `marks[v]` is 0 between siblings and 1 otherwise (the last vertex of every level is followed by a 1). The extra
    mark `0_0`, left of level 1, sits at position -1.
    """

    __slots__ = ("tree", "marks", "signs")

    tree: PrunedTree
    marks: Dict[int, int]
    signs: Dict[int, Symbol]

    def mark_position(self: Self, vertex: int) -> int:
        """Folding position of the mark right of `vertex`."""
        return _mark_position(vertex)

    def code_of(self: Self, vertex: int) -> SymbolWord:
        """Arc-code of `vertex`: the code of its parent followed by its own sign."""
        symbols: List[Symbol] = []
        while vertex != ROOT:
            symbols.append(self.signs[vertex])
            vertex = self.tree.parent_of(vertex)
        return SymbolWord(tuple(reversed(symbols)))

    def level_text(self: Self, level: int) -> str:
        """`sign mark` pairs of a level, e.g. `- 0 + 1` (level 1 starts with the mark `0_0`)."""
        chunks = ["0"] if level == 1 else []
        for v in self.tree.levels[level]:
            chunks.extend((self.signs[v].char, str(self.marks[v])))
        return " ".join(chunks)

    def to_dict(self: Self) -> Dict[str, Any]:
        """Plain dictionary used by the JSON serializer."""
        return {
            **self.tree.to_dict(),
            "marks": {str(v): m for v, m in sorted(self.marks.items())},
            "signs": {str(v): s.char for v, s in sorted(self.signs.items())},
        }


def mark_tree(tree: PrunedTree) -> MarkedTree:
    """Adds marks and signs to a pruned tree.

    Signs start `+` at the root, flip at `0_0`, flip at every 0 along a level and carry over the trailing 1 of a
    level to the first vertex two levels below.

    Examples:
        ```python
        from pruningfront.folding import FoldingPattern
        from pruningfront.tree import folding_to_tree
        from pruningfront.tree import mark_tree

        marked = mark_tree(folding_to_tree(FoldingPattern.from_text("1 0 1 0 1 0 . 1 0 1 0 1 1 1 0 1")))
        marked.level_text(3)
        # '- 0 + 1 + 0 - 1'
        ```
    """
    parents = tree.parent_map()
    marks: Dict[int, int] = {}
    signs: Dict[int, Symbol] = {ROOT: Symbol.PLUS}

    for level, vertices in enumerate(tree.levels):
        for u, v in pairwise(vertices):
            marks[u] = 0 if parents.get(u) == parents.get(v) else 1
        marks[vertices[-1]] = 1

        if level == 0:
            continue
        sign = signs[ROOT].flip() if level == 1 else signs[tree.levels[level - 2][-1]]
        for u in vertices:
            signs[u] = sign
            if marks[u] == 0:
                sign = sign.flip()

    return MarkedTree(tree=tree, marks=marks, signs=signs)


def tree_to_kneading(marked: MarkedTree, depth: int, *, strict: bool = False) -> KneadingSet:
    """Reads the kneading sequences off a marked tree.

    The image of the 0 right of `v` is the mark right of the last child of `v`: tails are read down the last-child path
    (the sign left of each mark) and arc-codes are the codes of the common parent of the two siblings. The 0 at
    position -1 (`0_0`) turns at the mark right of the root.

    Arguments:
        marked: Marked tree.
        depth: Maximum tail length.
        strict: Raise instead of returning shorter tails.

    Raises:
        InsufficientDepthError: In strict mode, if the tree is too shallow for a tail of length `depth`.
    """
    tree = marked.tree
    parents = tree.parent_map()
    levels = tree.level_map()

    codes = {ROOT: SymbolWord(())}
    for vertex in tree.vertices[1:]:
        codes[vertex] = codes[parents[vertex]] + marked.signs[vertex]

    def last_child(vertex: int) -> Optional[int]:
        kids = tree.children_of(vertex)
        return kids[-1] if kids and levels[vertex] < tree.depth else None

    zero_positions = [ZERO_ZERO_POSITION] + [_mark_position(v) for v, m in marked.marks.items() if m == 0]
    left = sorted((p for p in zero_positions if p < 0), reverse=True)
    right = sorted(p for p in zero_positions if p > 0)
    subscript = {p: i for i, p in enumerate(left)}
    subscript.update({p: -(i + 1) for i, p in enumerate(right)})

    def read_tail(start: Optional[int]) -> SymbolWord:
        symbols: List[Symbol] = []
        vertex = start
        while vertex is not None and len(symbols) < depth:
            symbols.append(marked.signs[vertex])
            vertex = last_child(vertex)
        return SymbolWord(tuple(symbols))

    turning = [(ZERO_ZERO_POSITION, ROOT, SymbolWord(()))]
    for v, mark in marked.marks.items():
        if mark == 0 and levels[v] < tree.depth:
            turning.append((_mark_position(v), last_child(v), codes[parents[v]]))

    entries = {}
    for position, start, arc_code in turning:
        tail = read_tail(start)
        if len(tail) < depth and strict:
            msg = f"The tree is too shallow for {depth} tail symbols of index {subscript[position]}."
            raise InsufficientDepthError(msg, index=subscript[position], needed=depth, available=len(tail))
        entries[subscript[position]] = KneadingSequence(arc_code=arc_code, tail=tail)
    return KneadingSet.from_mapping(entries)


def tree_to_folding(tree: PrunedTree) -> FoldingPattern:
    """Folding window encoded by a pruned tree, through its kneading sequences."""
    kset = tree_to_kneading(mark_tree(tree), tree.depth + 1)
    return kneading_to_folding(kset, tree.depth)


def to_dot(marked: MarkedTree) -> str:
    """Graphviz `digraph` text of a marked tree (one rank per level, edges from parents to children)."""
    lines = ["digraph pruned_tree {", "  node [shape=box];"]
    for level, vertices in enumerate(marked.tree.levels):
        names = " ".join(f'"{v}"' for v in vertices)
        lines.append(f"  {{ rank=same; {names} }}  // level {level}")
        lines.extend(
            f'  "{v}" [label="I_{v} ({marked.signs[v].char}) | {marked.marks[v]}"];' for v in vertices
        )
    for source, target in ROOT_ARROWS:
        lines.append(f'  "{source}" -> "{target}";')
    for parent, kids in sorted(marked.tree.children.items()):
        lines.extend(f'  "{parent}" -> "{kid}";' for kid in kids)
    lines.append("}")
    return "\n".join(lines) + "\n"
