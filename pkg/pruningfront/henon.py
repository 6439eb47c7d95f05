from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from pruningfront.core import _CoreMapEngine
from pruningfront.errors import BudgetExceededError
from pruningfront.errors import NoCandidatesError
from pruningfront.errors import OrderingAmbiguousError
from pruningfront.errors import UnstableEigenvalueMissingError
from pruningfront.kneading import KneadingSet
from pruningfront.manifold import Point
from pruningfront.manifold import WuPolyline
from pruningfront.manifold import index_crossings
from pruningfront.symbols import Symbol

if sys.version_info >= (3, 11):  # pragma: no cover
    from typing import Self
else:  # pragma: no cover
    from typing_extensions import Self

logger = logging.getLogger(__name__)

PLAUSIBLE_A = (1.0, 2.0)
"""Range of `a` outside of which a warning is logged."""


@dataclass(frozen=True)
class HenonParams:
    """Parameters of the Hénon map `F(x, y) = (1 + y - a x², b x)`, orientation reversing case `b > 0`.

    Raises:
        ValueError: If a parameter is not finite or `b <= 0`.
    """

    __slots__ = ("a", "b")

    a: float
    b: float

    def __post_init__(self: Self) -> None:
        """Post init used to validate the parameters."""
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            msg = f"Hénon parameters must be finite, found a={self.a}, b={self.b}."
            raise ValueError(msg)
        if self.b <= 0:
            msg = f"`b` must be strictly positive, found {self.b}."
            raise ValueError(msg)
        if not PLAUSIBLE_A[0] <= self.a <= PLAUSIBLE_A[1]:
            logger.warning("a = %s is outside the plausibility window %s.", self.a, PLAUSIBLE_A)

    @property
    def plausible(self: Self) -> bool:
        """Whether `a` lies in the plausibility window."""
        return PLAUSIBLE_A[0] <= self.a <= PLAUSIBLE_A[1]


def henon_apply_array(params: HenonParams, xy: np.ndarray) -> np.ndarray:
    """Hénon map on every row of a `(N, 2)` array."""
    x, y = xy[..., 0], xy[..., 1]
    return np.stack((1 + y - params.a * x * x, params.b * x), axis=-1)


def henon_inverse_array(params: HenonParams, xy: np.ndarray) -> np.ndarray:
    """Inverse map `F^{-1}(x, y) = (y/b, x - 1 + a (y/b)²)` on every row."""
    x, y = xy[..., 0], xy[..., 1]
    u = y / params.b
    return np.stack((u, x - 1 + params.a * u * u), axis=-1)


def henon_apply(params: HenonParams, point: Point) -> Point:
    """Image of a point.

    Examples:
        ```python
        from pruningfront.henon import HenonParams, henon_apply
        from pruningfront.manifold import Point

        henon_apply(HenonParams(1.4, 0.3), Point(0.0, 0.0))
        # Point(x=1.0, y=0.0)
        ```
    """
    return Point.from_array(henon_apply_array(params, point.as_array()))


def henon_inverse(params: HenonParams, point: Point) -> Point:
    """Preimage of a point."""
    return Point.from_array(henon_inverse_array(params, point.as_array()))


def henon_jacobian(params: HenonParams, point: Point) -> np.ndarray:
    """Jacobian `[[-2 a x, 1], [b, 0]]`, of determinant `-b`."""
    return np.array([[-2 * params.a * point.x, 1.0], [params.b, 0.0]])


def fixed_points(params: HenonParams) -> Tuple[Point, Point]:
    """Both fixed points, roots of `a x² + (1 - b) x - 1 = 0`; the first one (`X`) has positive abscissa."""
    c = 1 - params.b
    root = math.sqrt(c * c + 4 * params.a)
    xs = ((-c + root) / (2 * params.a), (-c - root) / (2 * params.a))
    return Point(xs[0], params.b * xs[0]), Point(xs[1], params.b * xs[1])


def unstable_direction(params: HenonParams) -> Tuple[float, np.ndarray]:
    """Expanding eigenvalue at `X` and its unit eigenvector, oriented towards decreasing `x`.

    Raises:
        UnstableEigenvalueMissingError: If no eigenvalue has modulus above 1.
    """
    x = fixed_points(params)[0].x
    lam = -params.a * x - math.sqrt(params.a**2 * x * x + params.b)
    if abs(lam) <= 1:
        msg = f"The fixed point has no expanding eigenvalue (|λ| = {abs(lam)})."
        raise UnstableEigenvalueMissingError(msg, eigenvalue=lam)
    vector = np.array([lam, params.b], dtype=float)
    vector /= np.linalg.norm(vector)
    return lam, vector if vector[0] < 0 else -vector


def stable_directions(params: HenonParams, xy: np.ndarray, horizon: int) -> np.ndarray:
    """Most contracted direction at every row of `xy`, pulling a vector back from `F^horizon` with normalisation."""
    orbit = [np.asarray(xy, dtype=float)]
    for _ in range(horizon):
        orbit.append(henon_apply_array(params, orbit[-1]))

    v = np.zeros_like(orbit[0])
    v[:, 1] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for point in reversed(orbit[:-1]):
            v = np.stack((v[:, 1] / params.b, v[:, 0] + 2 * params.a * point[:, 0] * v[:, 1] / params.b), axis=-1)
            v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


def stable_direction(params: HenonParams, point: Point, horizon: int) -> np.ndarray:
    """Most contracted direction at a single point."""
    return stable_directions(params, point.as_array()[None, :], horizon)[0]


def contraction_scores(params: HenonParams, xy: np.ndarray, tangents: np.ndarray, j_max: int) -> np.ndarray:
    """`min_{n <= j_max} log‖DF^n τ‖ / n` for every point and unit tangent."""
    points, v = np.asarray(xy, dtype=float), np.asarray(tangents, dtype=float)
    total = np.zeros(len(points))
    best = np.full(len(points), np.inf)
    with np.errstate(divide="ignore"):
        for n in range(1, j_max + 1):
            v = np.stack((-2 * params.a * points[:, 0] * v[:, 0] + v[:, 1], params.b * v[:, 0]), axis=-1)
            norm = np.linalg.norm(v, axis=1)
            total += np.log(norm)
            v /= np.where(norm > 0, norm, 1.0)[:, None]
            best = np.minimum(best, total / n)
            points = henon_apply_array(params, points)
    return best


def grow_wu(  # noqa: PLR0913
    params: HenonParams,
    target_arclength: float,
    seg_tol: float = 1e-3,
    *,
    seed_eps: float = 1e-8,
    max_vertices: int = 2_000_000,
    max_generations: int = 200,
) -> WuPolyline:
    """Unstable manifold of `X` grown until both branches reach `target_arclength`.

    The seed is the segment `X ± seed_eps v` along the unstable eigenvector. Every vertex keeps its seed coordinate
    `r`; each generation maps the previous vertices and, wherever an image segment is longer than `seg_tol`, inserts
    the image of the seed point at the middle seed coordinate. Parents are recovered from the seed coordinates, so the
    lineage works exactly as for the Lozi engine.

    Raises:
        UnstableEigenvalueMissingError: If `X` has no expanding eigenvalue.
        BudgetExceededError: If the vertex or generation budget is hit, or the seed coordinate runs out of precision.
    """
    if not target_arclength > 0 or not seg_tol > 0 or not seed_eps > 0:
        msg = "`target_arclength`, `seg_tol` and `seed_eps` must be strictly positive."
        raise ValueError(msg)

    _, direction = unstable_direction(params)
    x_point = fixed_points(params)[0].as_array()

    def _seed_points(roots: np.ndarray) -> np.ndarray:
        return x_point + ((1 - roots) * seed_eps)[:, None] * direction

    roots = np.array([0.0, 1.0, 2.0])
    poly = WuPolyline(vertices=_seed_points(roots), origin_index=1, generation=0)
    total = len(poly)

    for generation in range(1, max_generations + 1):
        new_roots = roots[::-1].copy()
        vertices = henon_apply_array(params, poly.vertices)[::-1]
        while True:
            long = np.flatnonzero(np.sqrt((np.diff(vertices, axis=0) ** 2).sum(axis=1)) > seg_tol)
            if len(long) == 0:
                break
            middle = (new_roots[long] + new_roots[long + 1]) / 2
            if np.any((middle == new_roots[long]) | (middle == new_roots[long + 1])):
                msg = "The seed coordinate ran out of precision; decrease `seed_eps` or the target arclength."
                raise BudgetExceededError(msg, generation=generation)
            inserted = _seed_points(middle)
            for _ in range(generation):
                inserted = henon_apply_array(params, inserted)
            vertices = np.insert(vertices, long + 1, inserted, axis=0)
            new_roots = np.insert(new_roots, long + 1, middle)
            if total + len(vertices) > max_vertices:
                msg = f"Vertex budget {max_vertices} exceeded at generation {generation}."
                raise BudgetExceededError(msg, generation=generation, vertices=total + len(vertices))

        order = np.argsort(roots)
        poly = WuPolyline(
            vertices=vertices,
            origin_index=int(np.flatnonzero(new_roots == 1.0)[0]),
            generation=generation,
            parents=np.interp(new_roots, roots[order], order.astype(float)),
            previous=poly,
        )
        roots, total = new_roots, total + len(vertices)
        logger.debug("Generation %s: %s vertices, extent %s", generation, len(vertices), poly.extent)
        if min(poly.extent) >= target_arclength:
            return poly

    msg = f"Arclength {target_arclength} not reached within {max_generations} generations."
    raise BudgetExceededError(msg, generation=max_generations, reached=min(poly.extent))


@dataclass(frozen=True)
class CriticalCandidate:
    """A point of the unstable manifold where its tangent lines up with the stable direction.

    Arguments:
        location: Fractional vertex index on the polyline.
        point: Coordinates.
        score: `min_n log‖DF^n τ‖ / n` of the tangent `τ`.
        stability: Displacement of the candidate when the stable direction horizon grows.
        arclength: Arclength coordinate `φ`.
        index: Subscript `i` of `z_i`.
        tangent_alignment: `|τ · e_s|` at the candidate.
    """

    __slots__ = ("location", "point", "score", "stability", "arclength", "index", "tangent_alignment")

    location: float
    point: Point
    score: float
    stability: float
    arclength: float
    index: int
    tangent_alignment: float

    def to_dict(self: Self) -> Dict[str, Any]:
        """JSON ready dictionary."""
        return {
            "index": self.index,
            "location": self.location,
            "x": self.point.x,
            "y": self.point.y,
            "score": self.score,
            "stability": self.stability,
            "arclength": self.arclength,
            "tangent_alignment": self.tangent_alignment,
        }


def _unit(vectors: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vectors, axis=1, keepdims=True)
    return vectors / np.where(norm > 0, norm, 1.0)


def _alignment(tangents: np.ndarray, stable: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cross and dot products of tangents with the stable directions, oriented so that the dot is non-negative."""
    dot = (tangents * stable).sum(axis=1)
    stable = np.where(dot[:, None] < 0, -stable, stable)
    cross = tangents[:, 0] * stable[:, 1] - tangents[:, 1] * stable[:, 0]
    return cross, np.abs(dot)


def _crossing_locations(
    params: HenonParams,
    poly: WuPolyline,
    ks: np.ndarray,
    tangents: np.ndarray,
    horizon: int,
) -> np.ndarray:
    """Locations where the alignment changes sign between vertices `ks` and `ks + 1`."""
    both = np.concatenate((ks, ks + 1))
    cross, _ = _alignment(tangents[both], stable_directions(params, poly.vertices[both], horizon))
    c0, c1 = cross[: len(ks)], cross[len(ks) :]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(c0 != c1, c0 / (c0 - c1), 0.5)
    return ks + np.clip(frac, 0.0, 1.0)


def detect_critical_points(  # noqa: PLR0913
    params: HenonParams,
    poly: WuPolyline,
    j_max: int = 10,
    score_threshold: Optional[float] = None,
    *,
    score_margin: float = 1.0,
    critical_window: float = 0.25,
    dedup_radius: float = 1e-2,
    min_alignment: float = 0.5,
    stability_step: int = 5,
) -> List[CriticalCandidate]:
    """Heuristic critical points of the unstable manifold polyline.

    Near the y-axis (`|x| <= critical_window`) the tangent of the polyline is compared with the stable direction
    obtained with horizon `j_max`. A sign change of their cross product between consecutive vertices, while the two
    directions are roughly parallel, is located by linear interpolation. A candidate is kept when its tangent
    contracts at a rate close to `b` (`score <= score_threshold`, by default `log(b) + score_margin`). Candidates
    closer than `dedup_radius` in arclength are merged keeping the lowest score.

    Arguments:
        params: Map parameters.
        poly: Unstable manifold polyline.
        j_max: Horizon of the stable direction and of the contraction score.
        score_threshold: Largest accepted score.
        score_margin: Margin over `log(b)` of the default threshold.
        critical_window: Half width of the scanned strip around the y-axis.
        dedup_radius: Arclength radius of the merge.
        min_alignment: Smallest `|τ · e_s|` at a sign change.
        stability_step: Horizon increase used to measure stability.

    Returns:
        Candidates sorted by arclength, indexed outward from `X`.

    Raises:
        NoCandidatesError: If no candidate survives.
    """
    threshold = math.log(params.b) + score_margin if score_threshold is None else score_threshold
    tangents = _unit(np.gradient(poly.vertices, axis=0))

    near = np.abs(poly.vertices[:, 0]) <= critical_window
    ks = np.flatnonzero(near[:-1] & near[1:])
    if len(ks) == 0:
        msg = f"No vertex within {critical_window} of the y-axis."
        raise NoCandidatesError(msg)

    idx = np.unique(np.concatenate((ks, ks + 1)))
    cross_all = np.full(len(poly), np.nan)
    dot_all = np.full(len(poly), np.nan)
    cross_all[idx], dot_all[idx] = _alignment(tangents[idx], stable_directions(params, poly.vertices[idx], j_max))

    changes = ks[
        (cross_all[ks] * cross_all[ks + 1] <= 0)
        & (cross_all[ks] != cross_all[ks + 1])
        & (np.minimum(dot_all[ks], dot_all[ks + 1]) > min_alignment)
    ]
    if len(changes) == 0:
        msg = "The tangent never lines up with the stable direction near the y-axis."
        raise NoCandidatesError(msg)

    locations = _crossing_locations(params, poly, changes, tangents, j_max)
    points = poly.points_at(locations)
    frac = (locations - changes)[:, None]
    tau = _unit((1 - frac) * tangents[changes] + frac * tangents[changes + 1])
    scores = contraction_scores(params, points, tau, j_max)
    _, alignment = _alignment(tau, stable_directions(params, points, j_max))

    keep = scores <= threshold
    logger.debug("%s sign changes, %s below the score threshold %s", len(changes), int(keep.sum()), threshold)
    if not keep.any():
        msg = f"No candidate has a contraction score below {threshold}."
        raise NoCandidatesError(msg, threshold=threshold)

    changes, locations, points, scores, alignment = (
        changes[keep],
        locations[keep],
        points[keep],
        scores[keep],
        alignment[keep],
    )
    phi = poly.arclength_at(locations)

    selected: List[int] = []
    for k in np.argsort(phi):
        if selected and phi[k] - phi[selected[-1]] < dedup_radius:
            if scores[k] < scores[selected[-1]]:
                selected[-1] = int(k)
            continue
        selected.append(int(k))
    chosen = np.array(selected, dtype=int)

    moved = poly.points_at(_crossing_locations(params, poly, changes[chosen], tangents, j_max + stability_step))
    stability = np.linalg.norm(moved - points[chosen], axis=1)
    subscripts = index_crossings(poly.origin_index, locations[chosen])

    return [
        CriticalCandidate(
            location=float(locations[k]),
            point=Point.from_array(points[k]),
            score=float(scores[k]),
            stability=float(s),
            arclength=float(phi[k]),
            index=subscripts[locations[k].item()],
            tangent_alignment=float(alignment[k]),
        )
        for k, s in zip(chosen, stability)
    ]


@dataclass(frozen=True, eq=False)
class CriticalLocus:
    """Approximate critical locus: candidates ordered top to bottom and joined by straight connectors.

    Above the highest and below the lowest candidate the locus continues vertically.

    Arguments:
        points: `(K, 2)` candidate coordinates, by decreasing `y`.
        indices: Subscripts of the candidates in the same order.
    """

    __slots__ = ("points", "indices")

    points: np.ndarray
    indices: Tuple[int, ...]

    def offsets(self: Self, xy: np.ndarray) -> np.ndarray:
        """Horizontal offset of every row of `xy` from the locus (positive on the right)."""
        ys, xs = self.points[::-1, 1], self.points[::-1, 0]
        return xy[:, 0] - np.interp(xy[:, 1], ys, xs)

    def classify(self: Self, xy: np.ndarray, eps: float) -> np.ndarray:
        """`-1` left of the locus, `1` right of it, `0` within `eps`."""
        d = self.offsets(xy)
        return np.where(d > eps, 1, np.where(d < -eps, -1, 0))


def approx_critical_locus(candidates: List[CriticalCandidate], resolution: float = 1e-9) -> CriticalLocus:
    """Joins the candidates top to bottom.

    Raises:
        NoCandidatesError: If `candidates` is empty.
        OrderingAmbiguousError: If two candidates are not vertically separated by more than `resolution`.
    """
    if not candidates:
        msg = "An approximate critical locus needs at least one candidate."
        raise NoCandidatesError(msg)

    ordered = sorted(candidates, key=lambda c: -c.point.y)
    for upper, lower in zip(ordered, ordered[1:]):
        if upper.point.y - lower.point.y <= resolution:
            msg = f"Candidates z_{upper.index} and z_{lower.index} are not vertically separated at {resolution}."
            raise OrderingAmbiguousError(msg, indices=[upper.index, lower.index], resolution=resolution)

    return CriticalLocus(
        points=np.array([[c.point.x, c.point.y] for c in ordered], dtype=float),
        indices=tuple(c.index for c in ordered),
    )


def locus_side(locus: CriticalLocus, point: Point, eps: float = 1e-9) -> Symbol:
    """Side of the approximate critical locus on which `point` falls."""
    return Symbol(int(locus.classify(point.as_array()[None, :], eps)[0]))


def connector_clearance(locus: CriticalLocus, orbit: np.ndarray, connector_eps: float) -> Tuple[int, ...]:
    """Connectors whose interior comes within `connector_eps` of a sample of the attractor.

    Returns:
        Indices `k` of the offending connectors between locus points `k` and `k + 1`.
    """
    offending: List[int] = []
    for k in range(len(locus.points) - 1):
        start, end = locus.points[k], locus.points[k + 1]
        seg = end - start
        length = float(np.linalg.norm(seg))
        t = ((orbit - start) @ seg) / (length * length)
        interior = (t * length > connector_eps) & ((1 - t) * length > connector_eps)
        dist = np.linalg.norm(orbit - (start + t[:, None] * seg), axis=1)
        if np.any(interior & (dist <= connector_eps)):
            offending.append(k)
    return tuple(offending)


def attractor_orbit(params: HenonParams, iterations: int = 20_000, transient: int = 100) -> np.ndarray:
    """Orbit samples `(iterations, 2)` started next to `X` on its unstable manifold."""
    _, direction = unstable_direction(params)
    current = fixed_points(params)[0].as_array() + 1e-3 * direction
    samples = np.empty((iterations, 2), dtype=float)
    for k in range(transient + iterations):
        current = henon_apply_array(params, current)
        if k >= transient:
            samples[k - transient] = current
    return samples


class HenonEngine(_CoreMapEngine):
    """Best effort engine for orientation reversing Hénon maps.

    Critical points are located heuristically (`detect_critical_points`) and joined into an approximate critical
    locus; symbols are read by the side of that locus on which a point falls. Every output of this engine is
    heuristic and is flagged as such when serialised.

    Arguments:
        a: Quadratic parameter.
        b: Contraction parameter.
        locus_eps: Dead zone half width around the approximate locus.
        seg_tol: Maximum segment length of grown polylines.
        max_vertices: Vertex budget over all generations.
        snap_tol: Distance under which a query point is taken to lie on a polyline.
        seed_eps: Half length of the seed segment.
        j_max: Horizon of the stable direction and of the contraction score.
        score_margin: The score threshold is `log(b) + score_margin`.
        critical_window: Half width of the strip scanned for critical points.
        dedup_radius: Arclength radius under which candidates are merged.
        resolution: Vertical separation required between locus points.
        connector_eps: Clearance required between connectors and the attractor.
        locus_arclength: Starting arclength of the search for critical points.
        locus_count: Number of critical points nearest `X` joined into the locus.
        max_generations: Generation budget of `grow_wu`.

    Examples:
        ```python
        from pruningfront.henon import HenonEngine

        engine = HenonEngine(a=1.9, b=0.025)
        kset = engine.kneading_set_of(count=3, depth=10)
        kset.indices
        # (-1, 0, 1)
        ```
    """

    _repr_attrs = ("a_", "b_", "locus_eps_", "seg_tol_", "seed_eps_", "j_max_", "score_margin_")

    def __init__(  # noqa: PLR0913
        self: Self,
        *,
        a: float,
        b: float,
        locus_eps: float = 1e-9,
        seg_tol: float = 1e-3,
        max_vertices: int = 2_000_000,
        snap_tol: float = 1e-6,
        seed_eps: float = 1e-8,
        j_max: int = 10,
        score_margin: float = 1.0,
        critical_window: float = 0.25,
        dedup_radius: float = 1e-2,
        resolution: float = 1e-9,
        connector_eps: float = 1e-6,
        locus_arclength: float = 2.0,
        locus_count: int = 8,
        max_generations: int = 200,
    ) -> None:
        self.seed_eps_ = seed_eps
        self.j_max_ = j_max
        self.score_margin_ = score_margin
        self.critical_window_ = critical_window
        self.dedup_radius_ = dedup_radius
        self.resolution_ = resolution
        self.connector_eps_ = connector_eps
        self.locus_arclength_ = locus_arclength
        self.locus_count_ = locus_count
        self.max_generations_ = max_generations
        super().__init__(
            a=a,
            b=b,
            locus_eps=locus_eps,
            seg_tol=seg_tol,
            max_vertices=max_vertices,
            snap_tol=snap_tol,
        )
        self.params_ = HenonParams(a=float(a), b=float(b))
        self._polylines: Dict[Tuple[float, float], WuPolyline] = {}
        self._locus: Optional[CriticalLocus] = None

    def _validate_arguments(self: Self) -> None:
        """Validates the engine attributes."""
        super()._validate_arguments()

        _real_names = (
            "seed_eps_",
            "score_margin_",
            "critical_window_",
            "dedup_radius_",
            "resolution_",
            "connector_eps_",
            "locus_arclength_",
        )
        _values = tuple(getattr(self, _attr) for _attr in _real_names)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in _values):
            msg = f"(`{'`, `'.join(_real_names)}`) arguments must be real numbers."
            raise TypeError(msg)
        if not all(math.isfinite(v) and v > 0 for v in _values):
            msg = f"(`{'`, `'.join(_real_names)}`) must be strictly positive. Found ({', '.join(map(str, _values))})"
            raise ValueError(msg)

        _int_names = ("j_max_", "locus_count_", "max_generations_")
        _ints = tuple(getattr(self, _attr) for _attr in _int_names)
        if not all(type(v) is int for v in _ints):
            msg = f"(`{'`, `'.join(_int_names)}`) arguments must be of type `int`."
            raise TypeError(msg)
        if not all(v >= 1 for v in _ints):
            msg = f"(`{'`, `'.join(_int_names)}`) must be at least 1. Found ({', '.join(map(str, _ints))})"
            raise ValueError(msg)

        if self.b_ <= 0:
            msg = f"`b` must be strictly positive, found {self.b_}."
            raise ValueError(msg)

    @property
    def score_threshold_(self: Self) -> float:
        """`log(b) + score_margin`."""
        return math.log(self.b_) + self.score_margin_

    @property
    def locus_(self: Self) -> CriticalLocus:
        """Approximate critical locus through the `locus_count` critical points nearest `X`, built once per engine."""
        if self._locus is None:
            _, found = self._find_candidates(self.locus_count_)
            self._locus = self.approx_critical_locus([found[i] for i in sorted(found)])
        return self._locus

    def apply_array(self: Self, xy: np.ndarray) -> np.ndarray:
        """Hénon map on every row."""
        return henon_apply_array(self.params_, xy)

    def classify_array(self: Self, xy: np.ndarray) -> np.ndarray:
        """Side of every row with respect to the approximate critical locus."""
        return self.locus_.classify(xy, self.locus_eps_)

    @property
    def fixed_point(self: Self) -> Point:
        """The fixed point `X`."""
        return fixed_points(self.params_)[0]

    def grow_wu(self: Self, target_arclength: float, seg_tol: Optional[float] = None) -> WuPolyline:
        """Cached `grow_wu` with the engine settings."""
        key = (float(target_arclength), float(seg_tol or self.seg_tol_))
        if key not in self._polylines:
            self._polylines[key] = grow_wu(
                self.params_,
                key[0],
                key[1],
                seed_eps=self.seed_eps_,
                max_vertices=self.max_vertices_,
                max_generations=self.max_generations_,
            )
        return self._polylines[key]

    def detect_critical_points(
        self: Self,
        poly: WuPolyline,
        j_max: Optional[int] = None,
        score_threshold: Optional[float] = None,
    ) -> List[CriticalCandidate]:
        """`detect_critical_points` with the engine settings."""
        return detect_critical_points(
            self.params_,
            poly,
            j_max or self.j_max_,
            score_threshold,
            score_margin=self.score_margin_,
            critical_window=self.critical_window_,
            dedup_radius=self.dedup_radius_,
        )

    def approx_critical_locus(self: Self, candidates: List[CriticalCandidate]) -> CriticalLocus:
        """`approx_critical_locus` at the engine resolution; connectors too close to the attractor are logged."""
        locus = approx_critical_locus(candidates, self.resolution_)
        offending = connector_clearance(locus, attractor_orbit(self.params_), self.connector_eps_)
        for k in offending:
            logger.warning(
                "Connector between z_%s and z_%s comes within %s of the attractor.",
                locus.indices[k],
                locus.indices[k + 1],
                self.connector_eps_,
            )
        return locus

    def _find_candidates(
        self: Self,
        count: int,
        max_doublings: int = 12,
    ) -> Tuple[WuPolyline, Dict[int, CriticalCandidate]]:
        """Grows the polyline, doubling its arclength from `locus_arclength`, until the `count` candidates nearest `X`
        are found.

        Returns:
            The polyline and the wanted candidates by index.

        Raises:
            BudgetExceededError: If the candidates are not all found within `max_doublings` doublings.
        """
        wanted = set(range(-(count // 2), (count + 1) // 2))
        target = self.locus_arclength_
        for _ in range(max_doublings):
            poly = self.grow_wu(target)
            try:
                candidates = self.detect_critical_points(poly)
            except NoCandidatesError:
                candidates = []
            found = {c.index: c for c in candidates}
            if wanted.issubset(found):
                return poly, {i: found[i] for i in wanted}
            logger.info("Found %s of %s candidates at arclength %s", len(wanted & set(found)), count, target)
            target *= 2

        msg = f"Critical points {sorted(wanted)} not all found within {max_doublings} doublings of the arclength."
        raise BudgetExceededError(msg, reached=target)

    def kneading_set_of(self: Self, count: int, depth: int, max_doublings: int = 12) -> KneadingSet:
        """Kneading sequences of the `count` critical points nearest `X` in index.

        Symbols are read against the engine locus, which does not depend on `count`.

        Raises:
            ValueError: If `count` or `depth` is smaller than 1.
            BudgetExceededError: If the candidates are not all found within the budget.
            LocusAmbiguousError: If a turning point does not land right of the locus.
        """
        if count < 1 or depth < 1:
            msg = f"`count` and `depth` must be at least 1, found ({count}, {depth})."
            raise ValueError(msg)

        poly, found = self._find_candidates(count, max_doublings)
        return self._kneading_set_from_locations(poly, {i: c.location for i, c in found.items()}, depth)
