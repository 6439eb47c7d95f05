from __future__ import annotations

import logging
import math
import sys
from typing import Dict
from typing import Tuple
from typing import Union

import numpy as np

from pruningfront.errors import LocusAmbiguousError
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.manifold import Marker
from pruningfront.manifold import Point
from pruningfront.manifold import WuPolyline
from pruningfront.manifold import backward_symbols
from pruningfront.manifold import locate
from pruningfront.symbols import Symbol
from pruningfront.symbols import SymbolWord
from pruningfront.symbols import TwoSidedWindow
from pruningfront.utils._types import Location

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)

PointOrMarker = Union[Point, Marker, Location]


class _CoreMapEngine:
    """Base class for the map engines. This class is not meant to be used directly.

    `_CoreMapEngine` stores and validates the arguments shared by every engine and implements what only depends on
    the map and on the way a point is classified against the critical locus:

    - forward symbols by iterating the map (`forward_word`);
    - two sided windows of points of an unstable manifold polyline, whose left part is read through the polyline
      lineage (`itinerary_of`);
    - kneading sequences of located critical points (`_kneading_set_from_locations`).

    Subclasses implement `apply_array` (the map on a `(N, 2)` array) and `classify_array` (the symbol of every row).

    Arguments:
        a: First map parameter.
        b: Second map parameter, strictly positive (orientation reversing maps only).
        locus_eps: Half width of the dead zone around the critical locus; points inside get the `~` symbol.
        seg_tol: Maximum segment length of emitted polylines.
        max_vertices: Vertex budget of a polyline.
        snap_tol: Largest distance at which a query point is considered to lie on a polyline.

    Raises:
        TypeError: If a numeric argument has the wrong type.
        ValueError: If `b`, `locus_eps`, `seg_tol`, `snap_tol` or `max_vertices` are not strictly positive, or if `a`
            and `b` are not finite.

    Examples:
        ```python
        from pruningfront.core import _CoreMapEngine


        class MyEngine(_CoreMapEngine):
            def apply_array(self, xy):
                '''Implement the map'''
                ...

            def classify_array(self, xy):
                '''Implement the side test'''
                ...
        ```
    """

    def __init__(  # noqa: PLR0913
        self: Self,
        *,
        a: float,
        b: float,
        locus_eps: float = 1e-9,
        seg_tol: float = 1e-2,
        max_vertices: int = 2_000_000,
        snap_tol: float = 1e-6,
    ) -> None:
        self.a_ = a
        self.b_ = b
        self.locus_eps_ = locus_eps
        self.seg_tol_ = seg_tol
        self.max_vertices_ = max_vertices
        self.snap_tol_ = snap_tol

        self._validate_arguments()

    def _validate_arguments(self: Self) -> None:
        """Validates the shared engine attributes."""
        _real_names = ("a_", "b_", "locus_eps_", "seg_tol_", "snap_tol_")
        _values = tuple(getattr(self, _attr) for _attr in _real_names)

        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in _values):
            msg = (
                f"(`{'`, `'.join(_real_names)}`) arguments must be real numbers. "
                f"Found (`{'`, `'.join(type(v).__name__ for v in _values)}`)"
            )
            raise TypeError(msg)

        if not all(math.isfinite(v) for v in _values):
            msg = f"(`{'`, `'.join(_real_names)}`) must be finite. Found ({', '.join(map(str, _values))})"
            raise ValueError(msg)

        if not all(v > 0 for v in _values[1:]):
            msg = (
                f"(`{'`, `'.join(_real_names[1:])}`) must be strictly positive.\n"
                f"Found ({', '.join(str(v) for v in _values[1:])})"
            )
            raise ValueError(msg)

        if type(self.max_vertices_) is not int:
            msg = f"`max_vertices` must be of type `int`. Found {type(self.max_vertices_)}"
            raise TypeError(msg)

        if self.max_vertices_ < 2:  # noqa: PLR2004
            msg = f"`max_vertices` must be at least 2. Found {self.max_vertices_}"
            raise ValueError(msg)

    @property
    def name_(self: Self) -> str:
        return self.__class__.__name__

    _repr_attrs: Tuple[str, ...] = ("a_", "b_", "locus_eps_", "seg_tol_", "max_vertices_")

    def __repr__(self: Self) -> str:
        """Custom repr method."""
        _values = tuple(getattr(self, _attr) for _attr in self._repr_attrs)
        _new_line_tab = "\n    "

        return f"{self.name_}(\n    {_new_line_tab.join(f'{s} = {v}' for s, v in zip(self._repr_attrs, _values))}\n)"

    def apply_array(self: Self, xy: np.ndarray) -> np.ndarray:
        """Image of every row of a `(N, 2)` array."""
        raise NotImplementedError

    def classify_array(self: Self, xy: np.ndarray) -> np.ndarray:
        """Symbol value (`-1`, `0` or `1`) of every row of a `(N, 2)` array."""
        raise NotImplementedError

    def apply(self: Self, point: Point) -> Point:
        """Image of a single point."""
        return Point.from_array(self.apply_array(point.as_array()[None, :])[0])

    def classify(self: Self, xy: np.ndarray) -> Symbol:
        """Symbol of a single point given as a `(2,)` array."""
        return Symbol(int(self.classify_array(np.asarray(xy, dtype=float)[None, :])[0]))

    def orbit(self: Self, point: Union[Point, np.ndarray], steps: int) -> np.ndarray:
        """Forward orbit `(steps + 1, 2)` starting at `point`.

        Orbits leaving every bounded region run off to infinity without raising.
        """
        start = point.as_array() if isinstance(point, Point) else np.asarray(point, dtype=float)
        out = np.empty((steps + 1, 2), dtype=float)
        out[0] = start
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(steps):
                out[k + 1] = self.apply_array(out[k][None, :])[0]
        return out

    def forward_word(self: Self, point: Union[Point, np.ndarray], depth: int, *, strict: bool = False) -> SymbolWord:
        """Symbols of `point, F(point), ..., F^{depth-1}(point)`.

        Raises:
            LocusAmbiguousError: If `strict` and an iterate falls in the dead zone.
        """
        with np.errstate(invalid="ignore"):
            values = self.classify_array(self.orbit(point, max(depth - 1, 0)))[:depth]
        word = SymbolWord(tuple(Symbol(int(v)) for v in values))
        if strict and not word.is_concrete:
            position = next(k for k, s in enumerate(word) if s is Symbol.PLUS_MINUS)
            msg = f"Iterate {position} lies within {self.locus_eps_} of the critical locus."
            raise LocusAmbiguousError(msg, position=position)
        return word

    def _resolve_location(self: Self, poly: WuPolyline, where: PointOrMarker) -> Union[float, None]:
        if isinstance(where, Marker):
            return float(where.index)
        if isinstance(where, Point):
            location, distance = locate(poly, where.as_array())
            return location if distance <= self.snap_tol_ else None
        return float(where)

    def itinerary_of(
        self: Self,
        poly: WuPolyline,
        where: PointOrMarker,
        fwd_depth: int,
        *,
        strict: bool = False,
    ) -> TwoSidedWindow:
        """Itinerary window of a point of the polyline.

        The right word comes from forward iteration. For points lying on `poly` the left word is read through the
        polyline lineage and preceded by an all-plus tail; a `Point` away from the polyline gets a forward only
        window, since its backward orbit is not determined.

        Arguments:
            poly: Unstable manifold polyline.
            where: A `Marker`, a fractional vertex index or a `Point`.
            fwd_depth: Number of forward symbols.
            strict: Raise instead of emitting `~`.

        Raises:
            LocusAmbiguousError: If `strict` and some tracked point falls in the dead zone.
        """
        location = self._resolve_location(poly, where)
        if location is None:
            point = where.as_array()  # type: ignore[union-attr]
            logger.debug("Point %s is not on the polyline, returning a forward window.", point)
            return TwoSidedWindow(
                left_word=SymbolWord(()),
                left_tail_all_plus=False,
                right_word=self.forward_word(point, fwd_depth, strict=strict),
            )

        left = backward_symbols(poly, location, self.classify)
        if strict and not left.is_concrete:
            msg = f"A backward iterate of location {location} lies within {self.locus_eps_} of the critical locus."
            raise LocusAmbiguousError(msg, location=location)

        return TwoSidedWindow(
            left_word=left,
            left_tail_all_plus=True,
            right_word=self.forward_word(poly.point_at(location), fwd_depth, strict=strict),
        )

    def _kneading_set_from_locations(
        self: Self,
        poly: WuPolyline,
        critical: Dict[int, float],
        depth: int,
    ) -> KneadingSet:
        """Kneading set of critical points given by their subscript and location on `poly`.

        Raises:
            LocusAmbiguousError: If a turning point does not land right of the locus.
        """
        entries: Dict[int, KneadingSequence] = {}
        for index, location in sorted(critical.items()):
            z = poly.point_at(location)
            arc_code = backward_symbols(poly, location, self.classify)
            tail = self.forward_word(self.apply_array(z[None, :])[0], depth)
            if tail[0] is not Symbol.PLUS:
                msg = f"Turning point {index} has first symbol {tail[0].char!r}, expected '+'."
                raise LocusAmbiguousError(msg, index=index)
            if not tail.is_concrete:
                logger.warning("Kneading tail of z_%s enters the dead zone: %s", index, tail)
            entries[index] = KneadingSequence(arc_code=arc_code, tail=tail)
            logger.debug("z_%s: %s", index, entries[index])

        return KneadingSet.from_mapping(entries)
