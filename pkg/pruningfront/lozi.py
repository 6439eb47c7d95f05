from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from pruningfront.core import PointOrMarker
from pruningfront.core import _CoreMapEngine
from pruningfront.errors import BudgetExceededError
from pruningfront.errors import NotMisiurewiczError
from pruningfront.errors import WindowTooDeepError
from pruningfront.folding import FoldingPattern
from pruningfront.kneading import KneadingSet
from pruningfront.manifold import Marker
from pruningfront.manifold import Point
from pruningfront.manifold import WuPolyline
from pruningfront.manifold import index_crossings
from pruningfront.manifold import refine
from pruningfront.symbols import SymbolWord
from pruningfront.symbols import TwoSidedWindow
from pruningfront.symbols import expand_plus_minus
from pruningfront.utils._geometry import bounding_box
from pruningfront.utils._geometry import box_polygon
from pruningfront.utils._geometry import clip_half_plane
from pruningfront.utils._types import BoundingBox

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoziParams:
    """Parameters of the Lozi map `L(x, y) = (1 + y - a|x|, b x)`.

    Raises:
        ValueError: If `a` or `b` is not finite.

    Examples:
        ```python
        from pruningfront.lozi import LoziParams

        LoziParams(a=1.8, b=0.3).in_misiurewicz, LoziParams(a=1.7, b=0.5).in_misiurewicz
        # (True, False)
        ```
    """

    __slots__ = ("a", "b")

    a: float
    b: float

    def __post_init__(self: Self) -> None:
        """Post init used to validate the parameters."""
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            msg = f"Lozi parameters must be finite, found a={self.a}, b={self.b}."
            raise ValueError(msg)

    @property
    def in_misiurewicz(self: Self) -> bool:
        """Whether `(a, b)` lies in the Misiurewicz parameter set `b > 0, a√2 - b > 2, 2a + b < 4`."""
        return self.b > 0 and self.a * math.sqrt(2) - self.b > 2 and 2 * self.a + self.b < 4  # noqa: PLR2004


def misiurewicz_check(params: LoziParams) -> bool:
    """Whether the parameters lie in the Misiurewicz set."""
    return params.in_misiurewicz


def lozi_apply_array(params: LoziParams, xy: np.ndarray) -> np.ndarray:
    """Lozi map on every row of a `(N, 2)` array."""
    x, y = xy[..., 0], xy[..., 1]
    return np.stack((1 + y - params.a * np.abs(x), params.b * x), axis=-1)


def lozi_inverse_array(params: LoziParams, xy: np.ndarray) -> np.ndarray:
    """Inverse Lozi map `L^{-1}(x, y) = (y/b, x - 1 + a|y/b|)` on every row of a `(N, 2)` array."""
    x, y = xy[..., 0], xy[..., 1]
    u = y / params.b
    return np.stack((u, x - 1 + params.a * np.abs(u)), axis=-1)


def lozi_apply(params: LoziParams, point: Point) -> Point:
    """Image of a point.

    Examples:
        ```python
        from pruningfront.lozi import LoziParams, lozi_apply
        from pruningfront.manifold import Point

        lozi_apply(LoziParams(1.8, 0.3), Point(0.0, 0.0))
        # Point(x=1.0, y=0.0)
        ```
    """
    return Point.from_array(lozi_apply_array(params, point.as_array()))


def lozi_inverse(params: LoziParams, point: Point) -> Point:
    """Preimage of a point."""
    return Point.from_array(lozi_inverse_array(params, point.as_array()))


def fixed_point(params: LoziParams) -> Point:
    """Fixed point `X = (1/(1+a-b), b/(1+a-b))` of the right branch."""
    x = 1 / (1 + params.a - params.b)
    return Point(x, params.b * x)


def second_fixed_point(params: LoziParams) -> Point:
    """Fixed point `Y = (1/(1-a-b), b/(1-a-b))` of the left branch."""
    x = 1 / (1 - params.a - params.b)
    return Point(x, params.b * x)


def unstable_direction(params: LoziParams) -> Tuple[float, np.ndarray]:
    """Expanding eigenvalue `(-a - √(a² + 4b))/2` of the right branch and its unit eigenvector, along `(λ, b)`."""
    lam = (-params.a - math.sqrt(params.a**2 + 4 * params.b)) / 2
    vector = np.array([lam, params.b], dtype=float)
    return lam, vector / np.linalg.norm(vector)


def attractor_bounding_box(
    params: LoziParams,
    margin: float = 0.05,
    iterations: int = 20_000,
    transient: int = 100,
) -> BoundingBox:
    """Bounding box of a long orbit started on the unstable manifold, padded by `margin` times its size.

    Used in place of the forward invariant triangle of the Misiurewicz parameter set.
    """
    _, vector = unstable_direction(params)
    current = fixed_point(params).as_array() + 1e-2 * vector
    samples = np.empty((iterations, 2), dtype=float)
    for k in range(transient + iterations):
        current = lozi_apply_array(params, current)
        if k >= transient:
            samples[k - transient] = current
    return bounding_box(samples, margin)


def _split_at_axis(
    vertices: np.ndarray,
    parents: np.ndarray,
    eps: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Inserts a vertex wherever a segment crosses the y-axis.

    Returns:
        New vertices, their fractional parents, the new index of every old vertex and the indices of the crossing
        vertices. Vertices inside the dead zone whose neighbours lie on opposite sides count as crossings.
    """
    x = vertices[:, 0]
    sx = np.where(x > eps, 1, np.where(x < -eps, -1, 0))
    ks = np.flatnonzero(sx[:-1] * sx[1:] < 0)

    t = x[ks] / (x[ks] - x[ks + 1])
    inserted = vertices[ks] + t[:, None] * (vertices[ks + 1] - vertices[ks])
    inserted[:, 0] = 0.0
    inserted_parents = parents[ks] + t * (parents[ks + 1] - parents[ks])

    old = np.arange(len(vertices))
    old_to_new = old + np.searchsorted(ks, old, side="left")
    new_vertices = np.insert(vertices, ks + 1, inserted, axis=0)
    new_parents = np.insert(parents, ks + 1, inserted_parents)

    inner = np.flatnonzero(sx[1:-1] == 0) + 1
    on_axis = inner[sx[inner - 1] * sx[inner + 1] < 0]
    crossings = np.sort(np.concatenate((ks + 1 + np.arange(len(ks)), old_to_new[on_axis])))
    return new_vertices, new_parents, old_to_new, crossings


class LoziEngine(_CoreMapEngine):
    """Ground truth engine for Lozi maps in the Misiurewicz parameter set.

    The unstable manifold is grown by generations: `G_{-1}` is the straight arc `[z_0, z_0^1]` of the unstable
    eigenline through `X` (the right branch is linear, so this piece is exact) and `G_k = L(G_{k-1})` split at every
    crossing of the y-axis. Each generation keeps a reference to the previous one together with the fractional parent
    of every vertex, which gives exact backward orbits. Generations are computed once and cached.

    Arguments:
        a: Slope parameter.
        b: Contraction parameter.
        locus_eps: Dead zone half width around the y-axis.
        seg_tol: Maximum segment length of polylines returned by `grow_wu`.
        max_vertices: Vertex budget of a generation.
        snap_tol: Distance under which a query point is taken to lie on a polyline.
        max_generations: Generation budget.
        max_region_depth: Longest window accepted by `itinerary_to_region`.
        max_region_vertices: Polygon vertex budget of `itinerary_to_region`.

    Raises:
        NotMisiurewiczError: If `(a, b)` is outside the Misiurewicz set.

    Examples:
        ```python
        from pruningfront.lozi import LoziEngine

        engine = LoziEngine(a=1.8, b=0.3)
        str(engine.folding_pattern_of(1))
        # '1 0 . 1'
        ```
    """

    _repr_attrs = ("a_", "b_", "locus_eps_", "seg_tol_", "max_vertices_", "max_generations_")

    def __init__(  # noqa: PLR0913
        self: Self,
        *,
        a: float,
        b: float,
        locus_eps: float = 1e-9,
        seg_tol: float = 1e-2,
        max_vertices: int = 2_000_000,
        snap_tol: float = 1e-6,
        max_generations: int = 40,
        max_region_depth: int = 48,
        max_region_vertices: int = 4096,
    ) -> None:
        self.max_generations_ = max_generations
        self.max_region_depth_ = max_region_depth
        self.max_region_vertices_ = max_region_vertices
        super().__init__(
            a=a,
            b=b,
            locus_eps=locus_eps,
            seg_tol=seg_tol,
            max_vertices=max_vertices,
            snap_tol=snap_tol,
        )
        self.params_ = LoziParams(a=float(a), b=float(b))
        self._generations: List[WuPolyline] = [self._seed()]
        self._box: Optional[BoundingBox] = None

    def _validate_arguments(self: Self) -> None:
        """Validates the engine attributes and the Misiurewicz condition."""
        super()._validate_arguments()

        _int_names = ("max_generations_", "max_region_depth_", "max_region_vertices_")
        _values = tuple(getattr(self, _attr) for _attr in _int_names)
        if not all(type(v) is int for v in _values):
            msg = f"(`{'`, `'.join(_int_names)}`) arguments must be of type `int`."
            raise TypeError(msg)
        if not all(v >= 1 for v in _values):
            msg = f"(`{'`, `'.join(_int_names)}`) must be at least 1. Found ({', '.join(map(str, _values))})"
            raise ValueError(msg)

        if not LoziParams(a=float(self.a_), b=float(self.b_)).in_misiurewicz:
            msg = f"(a, b) = ({self.a_}, {self.b_}) is outside the Misiurewicz parameter set."
            raise NotMisiurewiczError(msg, a=self.a_, b=self.b_)

    def apply_array(self: Self, xy: np.ndarray) -> np.ndarray:
        """Lozi map on every row."""
        return lozi_apply_array(self.params_, xy)

    def classify_array(self: Self, xy: np.ndarray) -> np.ndarray:
        """`-1` left of the y-axis, `1` right of it, `0` within `locus_eps` of it."""
        x = xy[:, 0]
        return np.where(x > self.locus_eps_, 1, np.where(x < -self.locus_eps_, -1, 0))

    @property
    def fixed_point(self: Self) -> Point:
        """The fixed point `X`."""
        return fixed_point(self.params_)

    def bounding_box(self: Self) -> BoundingBox:
        """Cached `attractor_bounding_box` of the engine parameters."""
        if self._box is None:
            self._box = attractor_bounding_box(self.params_)
        return self._box

    def _seed(self: Self) -> WuPolyline:
        lam, vector = unstable_direction(self.params_)
        x_point = fixed_point(self.params_).as_array()
        t0 = -x_point[0] / vector[0]
        z0 = x_point + t0 * vector
        z0[0] = 0.0
        return WuPolyline(
            vertices=np.stack((z0, x_point, x_point + lam * t0 * vector)),
            origin_index=1,
            markers=(Marker(0, 0, 0), Marker(2, 0, 1)),
            generation=-1,
        )

    def _next_generation(self: Self, prev: WuPolyline) -> WuPolyline:
        n = len(prev)
        image = lozi_apply_array(self.params_, prev.vertices)[::-1]
        parents = (n - 1 - np.arange(n)).astype(float)

        vertices, parents, old_to_new, crossings = _split_at_axis(image, parents, self.locus_eps_)
        if len(vertices) > self.max_vertices_:
            msg = f"Generation {prev.generation + 1} needs {len(vertices)} vertices, budget is {self.max_vertices_}."
            raise BudgetExceededError(msg, generation=prev.generation, vertices=len(vertices))

        origin_index = int(old_to_new[n - 1 - prev.origin_index])
        subscripts = index_crossings(origin_index, crossings)
        markers = [Marker(int(k), i, 0) for k, i in subscripts.items()]
        markers.extend(Marker(int(old_to_new[n - 1 - m.index]), m.subscript, m.superscript + 1) for m in prev.markers)

        logger.debug("Generation %s: %s vertices, %s crossings", prev.generation + 1, len(vertices), len(crossings))
        return WuPolyline(
            vertices=vertices,
            origin_index=origin_index,
            markers=tuple(markers),
            generation=prev.generation + 1,
            parents=parents,
            previous=prev,
        )

    def generation(self: Self, k: int) -> WuPolyline:
        """The arc `G_k = L^{k+1}([z_0, z_0^1])`, `k >= -1`.

        Raises:
            BudgetExceededError: If `k` exceeds `max_generations` or the vertex budget is hit.
        """
        if k < -1:
            msg = f"Generations start at -1, found {k}."
            raise ValueError(msg)
        if k > self.max_generations_:
            msg = f"Generation {k} exceeds the budget of {self.max_generations_} generations."
            raise BudgetExceededError(msg, generation=self.max_generations_)
        while len(self._generations) < k + 2:
            self._generations.append(self._next_generation(self._generations[-1]))
        return self._generations[k + 1]

    def grow_generations(self: Self, generations: int) -> WuPolyline:
        """The polyline carrying a folding pattern of `generations` complete generations, `G_{generations-1}`."""
        return self.generation(generations - 1)

    def grow_wu(self: Self, target_arclength: float, seg_tol: Optional[float] = None) -> WuPolyline:
        """Smallest generation reaching `target_arclength` on both branches, refined to `seg_tol`.

        Arguments:
            target_arclength: Arclength to reach on each side of `X`.
            seg_tol: Segment tolerance, defaults to the engine `seg_tol`.

        Raises:
            ValueError: If `target_arclength` is not positive.
            BudgetExceededError: If the generation or vertex budget is hit first.
        """
        if not target_arclength > 0:
            msg = f"`target_arclength` must be positive, found {target_arclength}."
            raise ValueError(msg)

        for k in range(-1, self.max_generations_ + 1):
            poly = self.generation(k)
            if min(poly.extent) >= target_arclength:
                logger.info("Arclength %s reached at generation %s", target_arclength, k)
                return refine(poly, seg_tol or self.seg_tol_)

        msg = f"Arclength {target_arclength} not reached within {self.max_generations_} generations."
        raise BudgetExceededError(msg, generation=self.max_generations_, reached=min(poly.extent))

    def folding_pattern_of(self: Self, generations: int) -> FoldingPattern:
        """Folding pattern read off the markers of `G_{generations-1}`."""
        poly = self.grow_generations(generations)
        left = [m for m in poly.markers if m.index < poly.origin_index][::-1]
        right = [m for m in poly.markers if m.index > poly.origin_index]
        return FoldingPattern(
            left=tuple(0 if m.superscript == 0 else 1 for m in left),
            right=tuple(0 if m.superscript == 0 else 1 for m in right),
            generations=generations,
        )

    def kneading_set_of(self: Self, count: int, depth: int) -> KneadingSet:
        """Kneading sequences of the `count` critical points nearest `X` in index.

        Indices run over `-floor(count/2) .. ceil(count/2) - 1`. Generations are grown until every requested critical
        point is present.

        Raises:
            ValueError: If `count` or `depth` is smaller than 1.
            BudgetExceededError: If a critical point does not appear within the budget.
        """
        if count < 1 or depth < 1:
            msg = f"`count` and `depth` must be at least 1, found ({count}, {depth})."
            raise ValueError(msg)

        wanted = set(range(-(count // 2), (count + 1) // 2))
        for k in range(-1, self.max_generations_ + 1):
            poly = self.generation(k)
            critical = {m.subscript: float(m.index) for m in poly.markers if m.superscript == 0}
            if wanted.issubset(critical):
                return self._kneading_set_from_locations(poly, {i: critical[i] for i in wanted}, depth)

        msg = f"Critical points {sorted(wanted)} not all found within {self.max_generations_} generations."
        raise BudgetExceededError(msg, generation=self.max_generations_)

    def _region_of_concrete(self: Self, left: SymbolWord, right: SymbolWord, box: BoundingBox) -> np.ndarray:
        polygon = box_polygon(box)
        constraints: List[Tuple[np.ndarray, float]] = []

        def _add_box(matrix: np.ndarray, offset: np.ndarray) -> None:
            xmin, xmax, ymin, ymax = box
            constraints.extend(
                (
                    (matrix[0], offset[0] - xmin),
                    (-matrix[0], xmax - offset[0]),
                    (matrix[1], offset[1] - ymin),
                    (-matrix[1], ymax - offset[1]),
                ),
            )

        a, b = self.params_.a, self.params_.b
        matrix, offset = np.eye(2), np.zeros(2)
        for k, symbol in enumerate(right):
            s = int(symbol)
            constraints.append((s * matrix[0], s * offset[0]))
            if k == len(right) - 1:
                break
            branch = np.array([[-a * s, 1.0], [b, 0.0]])
            matrix, offset = branch @ matrix, branch @ offset + np.array([1.0, 0.0])
            _add_box(matrix, offset)

        matrix, offset = np.eye(2), np.zeros(2)
        for symbol in reversed(left):
            s = int(symbol)
            branch = np.array([[0.0, 1 / b], [1.0, a * s / b]])
            matrix, offset = branch @ matrix, branch @ offset + np.array([0.0, -1.0])
            constraints.append((s * matrix[0], s * offset[0]))
            _add_box(matrix, offset)

        for normal, constant in constraints:
            scale = float(np.linalg.norm(normal))
            if scale == 0:
                if constant < 0:
                    return np.empty((0, 2))
                continue
            polygon = clip_half_plane(polygon, normal / scale, constant / scale)
            if len(polygon) == 0:
                break
            if len(polygon) > self.max_region_vertices_:
                msg = f"Region polygon exceeds {self.max_region_vertices_} vertices."
                raise WindowTooDeepError(msg, vertices=len(polygon))
        return polygon

    def itinerary_to_region(self: Self, window: TwoSidedWindow) -> List[np.ndarray]:
        """Convex polygons of the points whose stored symbols match `window`.

        Every prescribed symbol selects an affine branch, so each coordinate becomes a half-plane pulled back to
        the plane of `P`: forward coordinates through `L`, backward ones through the branch inverse. Every tracked
        iterate must also stay in the bounding box of the attractor. A `~` symbol allows both closed sides, which is
        why several polygons may come back. The implicit all-plus tail of `window` is not constrained.

        Raises:
            WindowTooDeepError: If the window is longer than `max_region_depth` or a polygon exceeds the vertex
                budget.
        """
        length = len(window.left_word) + len(window.right_word)
        if length > self.max_region_depth_:
            msg = f"Window of length {length} exceeds the region depth budget {self.max_region_depth_}."
            raise WindowTooDeepError(msg, depth=length)

        box = self.bounding_box()
        n_left = len(window.left_word)
        regions: List[np.ndarray] = []
        for word in expand_plus_minus(window.left_word + window.right_word):
            polygon = self._region_of_concrete(word[:n_left], word[n_left:], box)
            if len(polygon) >= 3:  # noqa: PLR2004
                regions.append(polygon)
        return regions


def engine_of(params: LoziParams, **kwargs: float) -> LoziEngine:
    """Engine for `params`, extra keyword arguments are passed to `LoziEngine`."""
    return LoziEngine(a=params.a, b=params.b, **kwargs)  # type: ignore[arg-type]


def grow_generations(params: LoziParams, generations: int) -> WuPolyline:
    """Functional form of `LoziEngine.grow_generations`."""
    return engine_of(params).grow_generations(generations)


def grow_wu(params: LoziParams, target_arclength: float, seg_tol: float = 1e-2) -> WuPolyline:
    """Functional form of `LoziEngine.grow_wu`."""
    return engine_of(params, seg_tol=seg_tol).grow_wu(target_arclength)


def folding_pattern_of(params: LoziParams, generations: int) -> FoldingPattern:
    """Functional form of `LoziEngine.folding_pattern_of`."""
    return engine_of(params).folding_pattern_of(generations)


def kneading_set_of(params: LoziParams, count: int, depth: int) -> KneadingSet:
    """Functional form of `LoziEngine.kneading_set_of`."""
    return engine_of(params).kneading_set_of(count, depth)


def itinerary_of(
    params: LoziParams,
    poly: WuPolyline,
    where: PointOrMarker,
    fwd_depth: int,
    *,
    strict: bool = False,
) -> TwoSidedWindow:
    """Functional form of `LoziEngine.itinerary_of`."""
    return engine_of(params).itinerary_of(poly, where, fwd_depth, strict=strict)


def itinerary_to_region(params: LoziParams, window: TwoSidedWindow) -> List[np.ndarray]:
    """Functional form of `LoziEngine.itinerary_to_region`."""
    return engine_of(params).itinerary_to_region(window)

