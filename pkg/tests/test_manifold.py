from __future__ import annotations

from contextlib import nullcontext as does_not_raise

import numpy as np
import pytest

from pruningfront.manifold import Marker
from pruningfront.manifold import Point
from pruningfront.manifold import WuPolyline
from pruningfront.manifold import backward_symbols
from pruningfront.manifold import index_crossings
from pruningfront.manifold import locate
from pruningfront.manifold import refine
from pruningfront.manifold import sample_locations
from pruningfront.manifold import sample_points
from pruningfront.symbols import Symbol

VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [2.0, 1.0]])


@pytest.fixture()
def polyline() -> WuPolyline:
    """Unit step polyline with the origin on its second vertex."""
    return WuPolyline(vertices=VERTICES, origin_index=1, markers=(Marker(3, -1, 0), Marker(0, 0, 1)))


@pytest.mark.parametrize(
    "x, y, context",
    [
        (0.0, 1.0, does_not_raise()),
        (float("nan"), 1.0, pytest.raises(ValueError, match="must be finite")),
        (0.0, float("inf"), pytest.raises(ValueError, match="must be finite")),
    ],
)
def test_point(x, y, context):
    """Tests point validation and array conversions."""
    with context:
        point = Point(x, y)
        assert Point.from_array(point.as_array()) == point


def test_marker_kind():
    """Tests the kind of critical and post-critical markers."""
    assert Marker(0, 1, 0).kind == "critical"
    assert Marker(0, 1, 2).kind == "postcritical"


@pytest.mark.parametrize(
    "kwargs, match",
    [
        ({"vertices": np.zeros((1, 2)), "origin_index": 0}, "must have shape"),
        ({"vertices": np.zeros((3, 3)), "origin_index": 0}, "must have shape"),
        ({"vertices": VERTICES, "origin_index": 4}, "outside the polyline"),
        ({"vertices": VERTICES, "origin_index": 0, "parents": np.zeros(4)}, "must be given together"),
    ],
)
def test_polyline_validation(kwargs, match):
    """Tests the shape checks of polylines."""
    with pytest.raises(ValueError, match=match):
        WuPolyline(**kwargs)


def test_polyline_accessors(polyline: WuPolyline):
    """Tests arclength, markers and interpolation along a polyline."""
    np.testing.assert_allclose(polyline.arclength, [-1.0, 0.0, 1.0, 2.0])
    assert polyline.extent == (1.0, 2.0)
    assert len(polyline) == 4
    np.testing.assert_allclose(polyline.origin, [1.0, 0.0])
    np.testing.assert_allclose(polyline.segment_lengths, [1.0, 1.0, 1.0])

    assert polyline.markers == (Marker(0, 0, 1), Marker(3, -1, 0))
    assert polyline.crossings == (3,)
    assert polyline.marker(-1) == Marker(3, -1, 0)
    assert polyline.marker(5) is None

    np.testing.assert_allclose(polyline.point_at(1.5), [1.0, 0.5])
    assert polyline.arclength_at(2.5) == pytest.approx(1.5)
    assert polyline.location_of_arclength(-0.5) == pytest.approx(0.5)
    assert polyline.lineage() == [polyline]

    with pytest.raises(ValueError, match="no parents"):
        polyline.parent_locations(1.0)
    with pytest.raises(ValueError, match="read-only"):
        polyline.vertices[0, 0] = 5.0


def test_refine(polyline: WuPolyline):
    """Tests that refinement keeps the geometry and remaps the indices."""
    fine = refine(polyline, 0.5)

    assert len(fine) == 7
    assert fine.origin_index == 2
    assert fine.markers == (Marker(0, 0, 1), Marker(6, -1, 0))
    assert fine.segment_lengths.max() <= 0.5
    np.testing.assert_allclose(fine.arclength, [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0])

    with pytest.raises(ValueError, match="must be positive"):
        refine(polyline, 0.0)


def test_locate(polyline: WuPolyline):
    """Tests snapping a point onto the polyline."""
    location, distance = locate(polyline, np.array([1.25, 0.5]))
    assert location == pytest.approx(1.5)
    assert distance == pytest.approx(0.25)


def test_sample_locations(polyline: WuPolyline):
    """Tests that samples are sorted, inside the requested range and reproducible."""
    locations = sample_locations(polyline, 50, np.random.default_rng(7), phi_range=(0.0, 1.0))
    assert (np.diff(locations) >= 0).all()
    assert ((locations >= 1.0) & (locations <= 2.0)).all()

    again, points = sample_points(polyline, 50, np.random.default_rng(7), phi_range=(0.0, 1.0))
    np.testing.assert_array_equal(again, locations)
    assert points.shape == (50, 2)
    np.testing.assert_allclose(points[:, 0], 1.0)


def test_backward_symbols_of_lineage():
    """Tests that backward symbols are read through the parents, skipping the root."""
    root = WuPolyline(vertices=VERTICES, origin_index=1)
    middle = WuPolyline(
        vertices=-VERTICES,
        origin_index=1,
        parents=np.arange(4, dtype=float),
        previous=root,
    )
    top = WuPolyline(vertices=VERTICES, origin_index=1, parents=np.arange(4, dtype=float), previous=middle)

    def classify(xy: np.ndarray) -> Symbol:
        return Symbol.MINUS if xy[0] < 0 else Symbol.PLUS

    assert str(backward_symbols(top, 2.0, classify)) == "-"
    assert str(backward_symbols(middle, 2.0, classify)) == ""
    assert top.lineage() == [top, middle, root]


def test_index_crossings():
    """Tests that subscripts grow outward on each branch of the origin."""
    subscripts = index_crossings(5, np.array([2.0, 7.5, 4.0, 9.0]))
    assert subscripts == {4.0: 0, 2.0: 1, 7.5: -1, 9.0: -2}
