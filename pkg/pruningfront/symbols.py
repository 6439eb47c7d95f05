from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import IntEnum
from itertools import product
from typing import Iterable
from typing import Iterator
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union
from typing import overload

from pruningfront.errors import InsufficientWindowError
from pruningfront.errors import ParseError
from pruningfront.errors import SearchBudgetExceededError
from pruningfront.utils._types import OrderingKind

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self


class Symbol(IntEnum):
    """Side of the critical locus visited by an iterate.

    `MINUS` is the left component, `PLUS` the right one and `PLUS_MINUS` marks a point on the locus itself (which owns
    both itineraries). The integer values give the total order `MINUS < PLUS_MINUS < PLUS`.
    """

    MINUS = -1
    PLUS_MINUS = 0
    PLUS = 1

    @property
    def char(self: Self) -> str:
        """Text character of the symbol: `-`, `~` or `+`."""
        return _SYMBOL_TO_CHAR[self]

    def flip(self: Self) -> Symbol:
        """Returns the symbol on the other side of the locus (`PLUS_MINUS` is fixed)."""
        return Symbol(-self.value)

    @classmethod
    def from_char(cls, char: str) -> Symbol:
        """Parses a single text character.

        Raises:
            ParseError: If `char` is not one of `-`, `~`, `+`.
        """
        try:
            return _CHAR_TO_SYMBOL[char]
        except KeyError:
            msg = f"Invalid symbol character {char!r}, expected one of '-', '~', '+'."
            raise ParseError(msg, position=0) from None

    @classmethod
    def of_sign(cls, value: float, eps: float = 0.0) -> Symbol:
        """Classifies a signed distance from the locus with a dead zone of half width `eps`."""
        if value < -eps:
            return cls.MINUS
        if value > eps:
            return cls.PLUS
        return cls.PLUS_MINUS


_SYMBOL_TO_CHAR = {Symbol.MINUS: "-", Symbol.PLUS_MINUS: "~", Symbol.PLUS: "+"}
_CHAR_TO_SYMBOL = {v: k for k, v in _SYMBOL_TO_CHAR.items()}


@dataclass(frozen=True)
class SymbolWord:
    """Immutable finite word over `{-, ~, +}`.

    The empty word is a valid value (it is the arc-code of the basic arc `I_∅` containing the fixed point).

    Arguments:
        symbols: Tuple of `Symbol` members.

    Raises:
        TypeError: If any element is not a `Symbol`.

    Examples:
        ```python
        from pruningfront.symbols import SymbolWord

        word = SymbolWord.from_text("-+~")
        len(word), str(word[1:]), word.count_plus, word.is_concrete
        # (3, '+~', 1, False)
        ```
    """

    __slots__ = ("symbols",)

    symbols: Tuple[Symbol, ...]

    def __post_init__(self: Self) -> None:
        """Post init used to validate the symbols."""
        if not isinstance(self.symbols, tuple):
            object.__setattr__(self, "symbols", tuple(self.symbols))
        if not all(isinstance(s, Symbol) for s in self.symbols):
            msg = "All elements of a `SymbolWord` must be `Symbol` members."
            raise TypeError(msg)

    @classmethod
    def from_text(cls, text: str) -> SymbolWord:
        """Parses a word written with `-`, `~`, `+` (whitespace is ignored).

        Raises:
            ParseError: At the first invalid character, with its `position`.
        """
        symbols: List[Symbol] = []
        for position, char in enumerate(text):
            if char.isspace():
                continue
            if char not in _CHAR_TO_SYMBOL:
                msg = f"Invalid symbol character {char!r} at position {position} of {text!r}."
                raise ParseError(msg, position=position)
            symbols.append(_CHAR_TO_SYMBOL[char])
        return cls(tuple(symbols))

    @classmethod
    def plus(cls, length: int) -> SymbolWord:
        """Word made of `length` copies of `PLUS`."""
        return cls((Symbol.PLUS,) * length)

    def __len__(self: Self) -> int:
        return len(self.symbols)

    def __iter__(self: Self) -> Iterator[Symbol]:
        return iter(self.symbols)

    @overload
    def __getitem__(self: Self, key: int) -> Symbol: ...

    @overload
    def __getitem__(self: Self, key: slice) -> SymbolWord: ...

    def __getitem__(self: Self, key: Union[int, slice]) -> Union[Symbol, SymbolWord]:
        if isinstance(key, slice):
            return SymbolWord(self.symbols[key])
        return self.symbols[key]

    def __add__(self: Self, other: Union[SymbolWord, Symbol, Iterable[Symbol]]) -> SymbolWord:
        if isinstance(other, Symbol):
            return SymbolWord((*self.symbols, other))
        if isinstance(other, SymbolWord):
            return SymbolWord(self.symbols + other.symbols)
        return SymbolWord(self.symbols + tuple(other))

    def __str__(self: Self) -> str:
        return "".join(s.char for s in self.symbols)

    @property
    def count_plus(self: Self) -> int:
        """Number of `PLUS` symbols in the word."""
        return sum(1 for s in self.symbols if s is Symbol.PLUS)

    @property
    def is_concrete(self: Self) -> bool:
        """Whether the word contains no `PLUS_MINUS`."""
        return Symbol.PLUS_MINUS not in self.symbols

    def startswith(self: Self, prefix: SymbolWord) -> bool:
        """Whether `prefix` is a prefix of the word."""
        return self.symbols[: len(prefix)] == prefix.symbols

    def lstrip_plus(self: Self) -> SymbolWord:
        """Drops the leading run of `PLUS` symbols."""
        start = 0
        while start < len(self.symbols) and self.symbols[start] is Symbol.PLUS:
            start += 1
        return SymbolWord(self.symbols[start:])


WordLike = Union[SymbolWord, str, Iterable[Symbol]]


def as_word(value: WordLike) -> SymbolWord:
    """Coerces text or an iterable of symbols into a `SymbolWord`."""
    if isinstance(value, SymbolWord):
        return value
    if isinstance(value, str):
        return SymbolWord.from_text(value)
    return SymbolWord(tuple(value))


@dataclass(frozen=True)
class TwoSidedWindow:
    """Finite window of a two sided itinerary around coordinate 0.

    `left_word` holds coordinates `-len(left_word) .. -1` and `right_word` coordinates `0 .. len(right_word) - 1`.
    When `left_tail_all_plus` is set an implicit infinite run of `PLUS` precedes `left_word`, which is how every point
    of the unstable manifold of the fixed point looks backward in time.

    Arguments:
        left_word: Symbols strictly left of the origin.
        left_tail_all_plus: Whether the left tail continues with `PLUS` forever.
        right_word: Symbols from the origin onward.

    Raises:
        ValueError: If `left_tail_all_plus` is set and `left_word` starts with `PLUS` (the run belongs to the tail).

    Examples:
        ```python
        from pruningfront.symbols import TwoSidedWindow

        window = TwoSidedWindow.from_text("^-+.+--")
        window.symbol_at(-3), window.known_depth, str(window)
        # (<Symbol.PLUS: 1>, 3, '^-+.+--')
        ```
    """

    __slots__ = ("left_word", "left_tail_all_plus", "right_word")

    left_word: SymbolWord
    left_tail_all_plus: bool
    right_word: SymbolWord

    def __post_init__(self: Self) -> None:
        """Post init used to validate the window invariant."""
        if not isinstance(self.left_word, SymbolWord) or not isinstance(self.right_word, SymbolWord):
            msg = "`left_word` and `right_word` must be `SymbolWord` instances."
            raise TypeError(msg)

        if self.left_tail_all_plus and self.left_word and self.left_word[0] is Symbol.PLUS:
            msg = "With an all-plus left tail, `left_word` must not start with '+'."
            raise ValueError(msg)

    @classmethod
    def from_text(cls, text: str) -> TwoSidedWindow:
        """Parses `left.right`, optionally prefixed with `^` for an all-plus left tail.

        Leading `+` symbols following `^` are absorbed into the implicit tail.

        Raises:
            ParseError: On a missing or repeated `.`, a misplaced `^` or an invalid symbol.
        """
        all_plus, seen_symbol = False, False
        left: List[Symbol] = []
        right: Optional[List[Symbol]] = None

        for position, char in enumerate(text):
            if char.isspace():
                continue
            if char == "^":
                if all_plus or seen_symbol or right is not None:
                    msg = f"'^' is only allowed before the first symbol, found at position {position}."
                    raise ParseError(msg, position=position)
                all_plus = True
            elif char == ".":
                if right is not None:
                    msg = f"A window has exactly one '.', found a second one at position {position}."
                    raise ParseError(msg, position=position)
                right = []
            elif char in _CHAR_TO_SYMBOL:
                seen_symbol = True
                (left if right is None else right).append(_CHAR_TO_SYMBOL[char])
            else:
                msg = f"Invalid character {char!r} at position {position} of {text!r}."
                raise ParseError(msg, position=position)

        if right is None:
            msg = f"A window needs a '.' marking the origin: {text!r}."
            raise ParseError(msg, position=len(text))

        left_word = SymbolWord(tuple(left))
        if all_plus:
            left_word = left_word.lstrip_plus()
        return cls(left_word=left_word, left_tail_all_plus=all_plus, right_word=SymbolWord(tuple(right)))

    @classmethod
    def forward(cls, right_word: WordLike) -> TwoSidedWindow:
        """Window of a point of W^u whose backward orbit never leaves the right component (`+^∞ · right_word`)."""
        return cls(left_word=SymbolWord(()), left_tail_all_plus=True, right_word=as_word(right_word))

    def __str__(self: Self) -> str:
        return f"{'^' if self.left_tail_all_plus else ''}{self.left_word}.{self.right_word}"

    @property
    def known_depth(self: Self) -> int:
        """Number of stored symbols from the origin onward."""
        return len(self.right_word)

    def symbol_at(self: Self, k: int) -> Symbol:
        """Symbol at coordinate `k`.

        Raises:
            InsufficientWindowError: If coordinate `k` is neither stored nor covered by the all-plus tail.
        """
        if k >= 0:
            if k < len(self.right_word):
                return self.right_word[k]
        else:
            idx = len(self.left_word) + k
            if idx >= 0:
                return self.left_word[idx]
            if self.left_tail_all_plus:
                return Symbol.PLUS

        msg = f"Coordinate {k} is outside the stored window {self}."
        raise InsufficientWindowError(msg, coordinate=k)

    def right_tail(self: Self, k: int) -> SymbolWord:
        """Known part of the right tail starting at coordinate `k` (the word `p_k p_{k+1} ...`).

        Raises:
            InsufficientWindowError: If coordinate `k` is not available.
        """
        if k >= 0:
            if k > len(self.right_word):
                msg = f"Coordinate {k} is beyond the known depth {self.known_depth}."
                raise InsufficientWindowError(msg, coordinate=k)
            return self.right_word[k:]
        return SymbolWord(tuple(self.symbol_at(c) for c in range(k, 0))) + self.right_word

    def left_tail(self: Self, k: int) -> SymbolWord:
        """Stored part of the left tail ending at coordinate `k` (implicit `PLUS` symbols are not materialised).

        Raises:
            InsufficientWindowError: If coordinate `k` is not available.
        """
        if k >= self.known_depth:
            msg = f"Coordinate {k} is beyond the known depth {self.known_depth}."
            raise InsufficientWindowError(msg, coordinate=k)
        if k >= 0:
            return self.left_word + self.right_word[: k + 1]

        idx = len(self.left_word) + k + 1
        if idx >= 0:
            return self.left_word[:idx]
        if self.left_tail_all_plus:
            return SymbolWord(())
        msg = f"Coordinate {k} is outside the stored window {self}."
        raise InsufficientWindowError(msg, coordinate=k)


@dataclass(frozen=True)
class Ordering:
    """Outcome of a (generalized) parity-lexicographical comparison.

    `kind` is `"less"`, `"greater"` or `"equal"`; `depth` is set only for `"equal"` and tells how many coordinates
    were found to agree. Use the `LESS`, `GREATER` constants and `Ordering.equal(d)`.
    """

    __slots__ = ("kind", "depth")

    kind: OrderingKind
    depth: Optional[int]

    @classmethod
    def equal(cls, depth: int) -> Ordering:
        """`EqualUpToDepth(depth)`."""
        return cls(kind="equal", depth=depth)

    @property
    def is_less(self: Self) -> bool:
        """Whether the first argument is strictly smaller."""
        return self.kind == "less"

    @property
    def is_greater(self: Self) -> bool:
        """Whether the first argument is strictly greater."""
        return self.kind == "greater"

    @property
    def is_equal(self: Self) -> bool:
        """Whether no difference was found within the compared depth."""
        return self.kind == "equal"

    def reversed(self: Self) -> Ordering:
        """Swaps `Less` and `Greater`."""
        if self.kind == "less":
            return GREATER
        if self.kind == "greater":
            return LESS
        return self

    def __str__(self: Self) -> str:
        if self.kind == "equal":
            return f"EqualUpToDepth({self.depth})"
        return self.kind.capitalize()


LESS = Ordering(kind="less", depth=None)
GREATER = Ordering(kind="greater", depth=None)


def plex_compare(u: WordLike, v: WordLike, depth: int) -> Ordering:
    """Compares two words in the parity-lexicographical order.

    At the first coordinate `m < depth` where the words differ, the symbol order `- < ~ < +` decides when the common
    prefix has an even number of `+`, and the reversed order decides when it is odd.

    Arguments:
        u: First word.
        v: Second word.
        depth: Number of coordinates to compare, clipped to the shorter word.

    Returns:
        `Less`, `Greater` or `EqualUpToDepth(d)`. A `~` shared by both words at the same coordinate leaves the parity
        of the prefix undefined: the comparison stops there with `EqualUpToDepth` of that coordinate.

    Raises:
        ValueError: If `depth` is negative.

    Examples:
        ```python
        from pruningfront.symbols import plex_compare

        str(plex_compare("-++", "-+-", 3)), str(plex_compare("---", "--+", 3))
        # ('Less', 'Less')
        ```
    """
    if depth < 0:
        msg = f"`depth` must be non-negative, found {depth}."
        raise ValueError(msg)

    u, v = as_word(u), as_word(v)
    depth = min(depth, len(u), len(v))

    odd = False
    for m in range(depth):
        a, b = u[m], v[m]
        if a is not b:
            less = a < b
            return LESS if less is not odd else GREATER
        if a is Symbol.PLUS_MINUS:
            return Ordering.equal(m)
        if a is Symbol.PLUS:
            odd = not odd
    return Ordering.equal(depth)


def gplex_compare(p: TwoSidedWindow, q: TwoSidedWindow, n: Optional[int] = None) -> Ordering:
    """Compares two points of W^u through their two sided itineraries.

    Both windows are padded on the left with `PLUS` up to coordinate `-n+1`, then the right tails from that coordinate
    are compared with `plex_compare`; for even `n` the outcome is reversed (the map reverses orientation on W^u).

    Arguments:
        p: First window, with an all-plus left tail.
        q: Second window, with an all-plus left tail.
        n: Left reach of the comparison. Defaults to the smallest value exposing every stored symbol; any larger value
            gives the same result.

    Returns:
        `Less` when `p` lies before `q` along W^u, `Greater` after, `EqualUpToDepth(d)` when the stored symbols do not
        separate them (`d` counted from coordinate 0).

    Raises:
        InsufficientWindowError: If a window lacks the all-plus left tail or `n` is too small.
    """
    if not (p.left_tail_all_plus and q.left_tail_all_plus):
        msg = "`gplex_compare` needs windows with an all-plus left tail."
        raise InsufficientWindowError(msg)

    n_min = max(len(p.left_word), len(q.left_word)) + 1
    if n is None:
        n = n_min
    elif n < n_min:
        msg = f"`n` must be at least {n_min} to expose the stored symbols, found {n}."
        raise InsufficientWindowError(msg, needed=n_min)

    p_right, q_right = p.right_tail(-n + 1), q.right_tail(-n + 1)
    result = plex_compare(p_right, q_right, min(len(p_right), len(q_right)))

    if result.is_equal:
        return Ordering.equal(max(0, (result.depth or 0) - (n - 1)))
    return result if n % 2 == 1 else result.reversed()


def shift(window: TwoSidedWindow, k: int) -> TwoSidedWindow:
    """Re-indexes a window so that the new coordinate 0 is the old coordinate `k`.

    Raises:
        InsufficientWindowError: If the new origin is neither stored nor covered by the all-plus tail.
    """
    left, right, all_plus = window.left_word, window.right_word, window.left_tail_all_plus

    if k >= 0:
        if k > len(right):
            msg = f"Cannot shift by {k}: only {len(right)} symbols are known from the origin."
            raise InsufficientWindowError(msg, coordinate=k)
        new_left, new_right = left + right[:k], right[k:]
    elif -k <= len(left):
        new_left, new_right = left[: len(left) + k], left[len(left) + k :] + right
    elif all_plus:
        new_left, new_right = SymbolWord(()), SymbolWord.plus(-k - len(left)) + left + right
    else:
        msg = f"Cannot shift by {k}: the left word has only {len(left)} symbols."
        raise InsufficientWindowError(msg, coordinate=k)

    if all_plus:
        new_left = new_left.lstrip_plus()
    return TwoSidedWindow(left_word=new_left, left_tail_all_plus=all_plus, right_word=new_right)


def expand_plus_minus(word: WordLike, limit: int = 1 << 12) -> Tuple[SymbolWord, ...]:
    """All concrete words obtained by replacing each `~` with `-` or `+`.

    Raises:
        SearchBudgetExceededError: If more than `limit` words would be produced.
    """
    word = as_word(word)
    slots = [i for i, s in enumerate(word) if s is Symbol.PLUS_MINUS]
    if (1 << len(slots)) > limit:
        msg = f"Expanding {len(slots)} '~' symbols exceeds the budget of {limit} words."
        raise SearchBudgetExceededError(msg, candidates=1 << len(slots), budget=limit)

    expanded = []
    for choice in product((Symbol.MINUS, Symbol.PLUS), repeat=len(slots)):
        symbols = list(word.symbols)
        for slot, symbol in zip(slots, choice):
            symbols[slot] = symbol
        expanded.append(SymbolWord(tuple(symbols)))
    return tuple(expanded)


def gray_rank(word: WordLike) -> int:
    """Rank of a concrete word among the words of the same length in parity-lexicographical order.

    Bit m of the rank is set when `word[m]` is `+` and the prefix has an even number of `+`, or when `word[m]` is `-`
    and the prefix has an odd number of `+` (a reflected Gray code).
    """
    word = as_word(word)
    rank, odd = 0, False
    for s in word:
        if s is Symbol.PLUS_MINUS:
            msg = "`gray_rank` is only defined on concrete words."
            raise ValueError(msg)
        is_plus = s is Symbol.PLUS
        rank = (rank << 1) | int(is_plus is not odd)
        odd = odd is not is_plus
    return rank


def naive_plex_less(u: WordLike, v: WordLike) -> bool:
    """Literal evaluation of the parity-lexicographical order on two concrete words of equal length.

    Counts the `+` symbols of the common prefix directly instead of tracking the parity.
    """
    u, v = as_word(u), as_word(v)
    for m, (a, b) in enumerate(zip(u, v)):
        if a is not b:
            prefix_plus = sum(1 for s in u.symbols[:m] if s is Symbol.PLUS)
            return (a < b) if prefix_plus % 2 == 0 else (a > b)
    return False
