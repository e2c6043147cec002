import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esslab.errors import EmptySetError, KindMismatchError, UnboundedSetError
from esslab.spectra import (CircleSpectralSet, PointCloud, RealSpectralSet,
                            canonical_circle, canonical_line, cloud_to_set,
                            directed_hausdorff, dumps, from_jsonable,
                            hausdorff_distance, sample, to_jsonable,
                            union_and_close, union_with_diagnostic)

TWO_PI = 2.0 * math.pi


def interval_set(*ivs, points=()):
    return canonical_line(ivs, points)


# ---------------------------------------------------------------------------
# union_and_close
# ---------------------------------------------------------------------------

def test_union_idempotent():
    s = interval_set((-2.0, 2.0))
    assert union_and_close([s, s]) == s


def test_union_touching_intervals_fuse():
    u = union_and_close([interval_set((0.0, 1.0)), interval_set((1.0, 2.0))])
    assert u.intervals == ((0.0, 2.0),)


def test_union_points_dedupe():
    a = canonical_line((), [-1.0])
    b = canonical_line((), [1.0])
    u = union_and_close([a, b, b])
    assert u.points == (-1.0, 1.0)
    assert u.intervals == ()


def test_union_absorbs_point_in_interval():
    u = union_and_close([interval_set((0.0, 1.0)), canonical_line((), [0.5])])
    assert u.points == ()
    assert u.intervals == ((0.0, 1.0),)


def test_union_mixed_kinds_raises():
    with pytest.raises(KindMismatchError):
        union_and_close([interval_set((0, 1)), canonical_circle(((0, 1),), ())])


def test_union_unbounded_flags_or():
    a = RealSpectralSet(unbounded_above=True)
    b = interval_set((0.0, 1.0))
    u = union_and_close([a, b])
    assert u.unbounded_above and not u.unbounded_below


def test_union_diagnostic_reports_closure_work():
    a = interval_set((0.0, 1.0))
    b = interval_set((1.0 + 1e-12, 2.0))  # separated below tau_merge
    u, closed = union_with_diagnostic([a, b])
    assert u.intervals == ((0.0, 2.0),)
    assert not closed
    _, closed2 = union_with_diagnostic([a, interval_set((2.0, 3.0))])
    assert closed2


finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


@st.composite
def line_sets(draw):
    n = draw(st.integers(0, 4))
    ivs = []
    for _ in range(n):
        lo = draw(finite)
        width = draw(st.floats(min_value=0.0, max_value=10.0))
        ivs.append((lo, lo + width))
    pts = draw(st.lists(finite, max_size=3))
    return canonical_line(ivs, pts)


@settings(max_examples=60, deadline=None)
@given(line_sets(), line_sets())
def test_union_commutative(a, b):
    assert union_and_close([a, b]) == union_and_close([b, a])


@settings(max_examples=60, deadline=None)
@given(line_sets(), line_sets(), line_sets())
def test_union_associative(a, b, c):
    left = union_and_close([union_and_close([a, b]), c])
    right = union_and_close([a, union_and_close([b, c])])
    assert left == right


@settings(max_examples=60, deadline=None)
@given(line_sets(), line_sets())
def test_union_monotone(a, b):
    u = union_and_close([a, b])
    if not a.is_empty() and not u.is_empty():
        assert directed_hausdorff(a, u) <= 1e-12


# ---------------------------------------------------------------------------
# hausdorff_distance
# ---------------------------------------------------------------------------

def test_hausdorff_identical_sets():
    s = interval_set((0.0, 1.0))
    assert hausdorff_distance(s, s) == 0.0


def test_hausdorff_singletons():
    assert hausdorff_distance(canonical_line((), [0.0]),
                              canonical_line((), [3.0])) == 3.0


def test_hausdorff_endpoint_excess():
    assert hausdorff_distance(interval_set((0.0, 1.0)),
                              interval_set((0.0, 2.0))) == 1.0


def test_hausdorff_interior_gap_maximizer():
    # sup over [0,10] of the distance to {0, 10} peaks at the midpoint
    a = interval_set((0.0, 10.0))
    b = canonical_line((), [0.0, 10.0])
    assert hausdorff_distance(a, b) == pytest.approx(5.0)


def test_hausdorff_empty_raises():
    with pytest.raises(EmptySetError):
        hausdorff_distance(RealSpectralSet(), interval_set((0, 1)))


def test_hausdorff_unbounded_flag_raises():
    with pytest.raises(UnboundedSetError):
        hausdorff_distance(RealSpectralSet(points=(0.0,), unbounded_above=True),
                           interval_set((0, 1)))


def test_hausdorff_circle_geodesic():
    a = canonical_circle((), [0.1])
    b = canonical_circle((), [TWO_PI - 0.1])
    assert hausdorff_distance(a, b) == pytest.approx(0.2, abs=1e-12)


def test_hausdorff_circle_arc_vs_points():
    arc = canonical_circle(((0.0, math.pi),), ())
    pts = canonical_circle((), [0.0, math.pi])
    assert hausdorff_distance(arc, pts) == pytest.approx(math.pi / 2, abs=1e-12)


def test_hausdorff_full_circle_covers_everything():
    full = canonical_circle(((0.0, TWO_PI),), ())
    pt = canonical_circle((), [1.234])
    assert directed_hausdorff(pt, full) == 0.0


@settings(max_examples=40, deadline=None)
@given(line_sets(), line_sets(), line_sets())
def test_hausdorff_triangle_inequality(a, b, c):
    if any(s.is_empty() for s in (a, b, c)):
        return
    dab = hausdorff_distance(a, b)
    dbc = hausdorff_distance(b, c)
    dac = hausdorff_distance(a, c)
    assert dac <= dab + dbc + 1e-9


def test_hausdorff_cloud_vs_set():
    cloud = PointCloud(np.array([0.0, 0.5, 1.0]))
    assert hausdorff_distance(cloud, interval_set((0.0, 1.0))) == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# sample / cloud_to_set
# ---------------------------------------------------------------------------

def test_sample_uniform_with_endpoints():
    cloud = sample(interval_set((-2.0, 2.0)), 3)
    assert np.allclose(cloud.sorted_values(), [-2.0, 0.0, 2.0])


def test_sample_isolated_point_only():
    cloud = sample(canonical_line((), [1.0]), 5)
    assert list(cloud.sorted_values()) == [1.0]


def test_sample_arc_uniform():
    cloud = sample(canonical_circle(((0.0, math.pi),), ()), 3)
    assert np.allclose(cloud.sorted_values(), [0.0, math.pi / 2, math.pi])


def test_sample_empty_raises():
    with pytest.raises(EmptySetError):
        sample(RealSpectralSet(), 3)


def test_cloud_to_set_gap_clustering():
    cloud = PointCloud(np.array([0.0, 0.01, 0.02, 5.0]))
    s = cloud_to_set(cloud, 0.1)
    assert s.intervals == ((0.0, 0.02),)
    assert s.points == (5.0,)


def test_cloud_to_set_empty():
    s = cloud_to_set(PointCloud(np.array([])), 0.1)
    assert s.is_empty()


def test_cloud_to_set_free_jacobi_oracle():
    # independent oracle: explicit eigenvalues 2 cos(k pi / (N+1))
    n = 2000
    ev = 2.0 * np.cos(np.arange(1, n + 1) * math.pi / (n + 1))
    s = cloud_to_set(PointCloud(np.sort(ev)), 0.05)
    assert hausdorff_distance(s, interval_set((-2.0, 2.0))) <= 0.01


def test_cloud_to_set_circle_wraparound():
    angles = np.array([TWO_PI - 0.02, TWO_PI - 0.01, 0.0, 0.01, 0.02, 3.0])
    s = cloud_to_set(PointCloud(angles, kind="circle"), 0.1)
    assert len(s.arcs) == 1
    lo, hi = s.arcs[0]
    assert lo == pytest.approx(TWO_PI - 0.02)
    assert hi - lo == pytest.approx(0.04)
    assert s.points == (3.0,)


def test_cloud_to_set_full_circle():
    angles = np.linspace(0, TWO_PI, 100, endpoint=False)
    s = cloud_to_set(PointCloud(angles, kind="circle"), 0.1)
    assert s.is_full_circle()


@settings(max_examples=30, deadline=None)
@given(line_sets(), st.integers(50, 200))
def test_sample_roundtrip_recovers_set(s, n):
    if s.is_empty():
        return
    cloud = sample(s, n)
    vals = cloud.sorted_values()
    spacing = max((float(np.max(np.diff(vals))) if len(vals) > 1 else 0.1), 1e-6)
    back = cloud_to_set(cloud, spacing * 1.01)
    assert hausdorff_distance(back, s) <= 2 * spacing + 1e-9


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_json_roundtrip_line():
    s = canonical_line([(0.0, 1.0)], [2.5], unbounded_above=True)
    assert from_jsonable(to_jsonable(s)) == s
    assert '"kind": "line"' in dumps(s)


def test_json_roundtrip_circle():
    s = canonical_circle([(6.0, 6.6)], [1.0])
    assert from_jsonable(to_jsonable(s)) == s
