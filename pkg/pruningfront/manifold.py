from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np

from pruningfront.symbols import Symbol
from pruningfront.symbols import SymbolWord
from pruningfront.utils._geometry import project_onto_segments
from pruningfront.utils._types import Location
from pruningfront.utils._types import MarkerKind

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self


@dataclass(frozen=True)
class Point:
    """A point of the plane with finite coordinates.

    Raises:
        ValueError: If a coordinate is not finite.
    """

    __slots__ = ("x", "y")

    x: float
    y: float

    def __post_init__(self: Self) -> None:
        """Post init used to validate the coordinates."""
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            msg = f"Point coordinates must be finite, found ({self.x}, {self.y})."
            raise ValueError(msg)

    @classmethod
    def from_array(cls, xy: np.ndarray) -> Point:
        """Point from a `(2,)` array."""
        return cls(x=float(xy[0]), y=float(xy[1]))

    def as_array(self: Self) -> np.ndarray:
        """Coordinates as a `(2,)` float array."""
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class Marker:
    """Basic point `z_i^j` sitting at vertex `index` of a polyline (`j = 0` for critical points)."""

    __slots__ = ("index", "subscript", "superscript")

    index: int
    subscript: int
    superscript: int

    @property
    def kind(self: Self) -> MarkerKind:
        """`"critical"` for crossings of the locus, `"postcritical"` otherwise."""
        return "critical" if self.superscript == 0 else "postcritical"


def cumulative_arclength(vertices: np.ndarray, origin_index: int) -> np.ndarray:
    """Signed arclength of every vertex, zero at `origin_index`."""
    lengths = np.sqrt((np.diff(vertices, axis=0) ** 2).sum(axis=1))
    phi = np.concatenate(([0.0], np.cumsum(lengths)))
    return phi - phi[origin_index]


def _read_only(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class WuPolyline:
    """Ordered chain of vertices approximating an arc of the unstable manifold of the fixed point.

    Vertices are ordered by increasing arclength `φ`, which is zero at the fixed point (`origin_index`) and negative on
    the branch holding the first critical point. Arrays are read only.

    When the polyline was obtained by mapping a previous one, `previous` is that polyline and `parents[k]` is the
    fractional vertex index in `previous` of the preimage of vertex `k`. Following the lineage down to the root gives
    the backward orbit of any point without inverting the map.

    Arguments:
        vertices: `(N, 2)` coordinates.
        origin_index: Vertex of the fixed point.
        markers: Basic points on the polyline.
        generation: Generation index, counted in map applications from the root arc (the Lozi root is `-1`).
        parents: Fractional parent locations, `None` for a root.
        previous: Parent polyline, `None` for a root.
    """

    vertices: np.ndarray
    origin_index: int
    markers: Tuple[Marker, ...] = ()
    generation: int = 0
    parents: Optional[np.ndarray] = None
    previous: Optional[WuPolyline] = None
    arclength: np.ndarray = field(init=False)

    def __post_init__(self: Self) -> None:
        """Post init used to validate shapes and freeze the arrays."""
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 2:  # noqa: PLR2004
            msg = f"`vertices` must have shape (N, 2) with N >= 2, found {vertices.shape}."
            raise ValueError(msg)
        if not 0 <= self.origin_index < len(vertices):
            msg = f"`origin_index` {self.origin_index} is outside the polyline."
            raise ValueError(msg)
        if (self.parents is None) != (self.previous is None):
            msg = "`parents` and `previous` must be given together."
            raise ValueError(msg)
        if self.parents is not None and len(self.parents) != len(vertices):
            msg = f"`parents` has {len(self.parents)} entries for {len(vertices)} vertices."
            raise ValueError(msg)

        object.__setattr__(self, "vertices", _read_only(vertices))
        object.__setattr__(self, "arclength", _read_only(cumulative_arclength(vertices, self.origin_index)))
        object.__setattr__(self, "markers", tuple(sorted(self.markers, key=lambda m: m.index)))
        if self.parents is not None:
            object.__setattr__(self, "parents", _read_only(self.parents))

    def __len__(self: Self) -> int:
        return len(self.vertices)

    @property
    def origin(self: Self) -> np.ndarray:
        """Coordinates of the fixed point vertex."""
        return self.vertices[self.origin_index]

    @property
    def crossings(self: Self) -> Tuple[int, ...]:
        """Vertex indices of the critical markers."""
        return tuple(m.index for m in self.markers if m.superscript == 0)

    @property
    def segment_lengths(self: Self) -> np.ndarray:
        """Length of every segment."""
        return np.diff(self.arclength)

    @property
    def extent(self: Self) -> Tuple[float, float]:
        """Arclength reached on the negative and on the positive branch (both non-negative)."""
        return float(-self.arclength[0]), float(self.arclength[-1])

    def marker(self: Self, subscript: int, superscript: int = 0) -> Optional[Marker]:
        """The marker of `z_i^j`, if present."""
        for m in self.markers:
            if m.subscript == subscript and m.superscript == superscript:
                return m
        return None

    def points_at(self: Self, locations: np.ndarray) -> np.ndarray:
        """Coordinates at fractional vertex indices, `(M, 2)`."""
        locations = np.asarray(locations, dtype=float)
        grid = np.arange(len(self.vertices))
        return np.stack(
            (np.interp(locations, grid, self.vertices[:, 0]), np.interp(locations, grid, self.vertices[:, 1])),
            axis=-1,
        )

    def point_at(self: Self, location: Location) -> np.ndarray:
        """Coordinates at a fractional vertex index."""
        return self.points_at(np.array([location]))[0]

    def arclength_at(self: Self, location: Union[Location, np.ndarray]) -> np.ndarray:
        """Arclength at fractional vertex indices."""
        return np.interp(location, np.arange(len(self.vertices)), self.arclength)

    def location_of_arclength(self: Self, phi: Union[float, np.ndarray]) -> np.ndarray:
        """Fractional vertex index at arclength `phi`."""
        return np.interp(phi, self.arclength, np.arange(len(self.vertices)))

    def parent_locations(self: Self, locations: Union[Location, np.ndarray]) -> np.ndarray:
        """Fractional locations in `previous` of the preimages of the given locations."""
        if self.parents is None:
            msg = "A root polyline has no parents."
            raise ValueError(msg)
        return np.interp(locations, np.arange(len(self.vertices)), self.parents)

    def lineage(self: Self) -> List[WuPolyline]:
        """This polyline followed by all its ancestors."""
        chain: List[WuPolyline] = [self]
        while chain[-1].previous is not None:
            chain.append(chain[-1].previous)  # type: ignore[arg-type]
        return chain


def refine(poly: WuPolyline, seg_tol: float) -> WuPolyline:
    """Subdivides every segment longer than `seg_tol` into equal pieces.

    Vertices are inserted by linear interpolation, so the geometry and the lineage (parents are interpolated too) are
    unchanged; marker and origin indices are remapped.
    """
    if seg_tol <= 0:
        msg = f"`seg_tol` must be positive, found {seg_tol}."
        raise ValueError(msg)

    pieces = np.maximum(np.ceil(poly.segment_lengths / seg_tol).astype(int), 1)
    new_index = np.concatenate(([0], np.cumsum(pieces)))
    seg_of = np.repeat(np.arange(len(pieces)), pieces)
    offset = np.arange(len(seg_of)) - new_index[seg_of]
    locations = np.concatenate((seg_of + offset / pieces[seg_of], [len(poly) - 1]))

    parents = None if poly.parents is None else np.interp(locations, np.arange(len(poly)), poly.parents)
    return WuPolyline(
        vertices=poly.points_at(locations),
        origin_index=int(new_index[poly.origin_index]),
        markers=tuple(Marker(int(new_index[m.index]), m.subscript, m.superscript) for m in poly.markers),
        generation=poly.generation,
        parents=parents,
        previous=poly.previous,
    )


def locate(poly: WuPolyline, point: np.ndarray) -> Tuple[float, float]:
    """Fractional vertex index of the point of `poly` nearest to `point`, and the distance to it."""
    return project_onto_segments(poly.vertices, np.asarray(point, dtype=float))


def sample_locations(
    poly: WuPolyline,
    count: int,
    rng: np.random.Generator,
    phi_range: Optional[Tuple[float, float]] = None,
) -> np.ndarray:
    """Locations drawn uniformly in arclength, sorted along the polyline.

    Arguments:
        poly: Polyline to sample.
        count: Number of samples.
        rng: Random generator.
        phi_range: Arclength interval, defaults to the whole polyline.
    """
    lo, hi = phi_range if phi_range is not None else (float(poly.arclength[0]), float(poly.arclength[-1]))
    phi = np.sort(rng.uniform(lo, hi, size=count))
    return poly.location_of_arclength(phi)


def sample_points(
    poly: WuPolyline,
    count: int,
    rng: np.random.Generator,
    phi_range: Optional[Tuple[float, float]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Locations drawn by `sample_locations` together with their coordinates `(count, 2)`."""
    locations = sample_locations(poly, count, rng, phi_range)
    return locations, poly.points_at(locations)


def backward_symbols(
    poly: WuPolyline,
    location: Location,
    classify: Callable[[np.ndarray], Symbol],
) -> SymbolWord:
    """Left word `w` of the itinerary `+^∞ w · ...` of the point at `location`.

    The preimages are read off the lineage: the k-th preimage is the parent location in the k-th ancestor. The root
    arc lies right of the locus together with its whole backward orbit, hence its symbols are dropped.
    """
    symbols: List[Symbol] = []
    current, loc = poly, float(location)
    while current.previous is not None:
        loc = float(current.parent_locations(loc))
        current = current.previous
        if current.previous is None:
            break
        symbols.append(classify(current.point_at(loc)))
    return SymbolWord(tuple(reversed(symbols))).lstrip_plus()


def index_crossings(
    origin_index: int,
    crossing_locations: np.ndarray,
) -> Dict[Location, int]:
    """Subscripts of critical points: `0, 1, ...` outward on the negative branch, `-1, -2, ...` on the positive one.

    Keys are the given (possibly fractional) vertex locations.
    """
    locations = np.sort(np.asarray(crossing_locations))
    negative = locations[locations < origin_index][::-1]
    positive = locations[locations > origin_index]
    subscripts: Dict[Location, int] = {k.item(): i for i, k in enumerate(negative)}
    subscripts.update({k.item(): -(i + 1) for i, k in enumerate(positive)})
    return subscripts
