import cmath
import math

import numpy as np
import pytest

from esslab.errors import UnsupportedClassError, WindowError
from esslab.jacobi import FiniteJacobi, PeriodicJacobi, band_spectrum
from esslab.limits import (BlockSumLimit, DiagonalLimit, PeriodicCoreLimit,
                           RawWindowLimit, cluster_to_member,
                           detect_right_limits, limit_spectrum,
                           right_limit_set)
from esslab.sequences import ScenarioSpec, window
from esslab.spectra import hausdorff_distance

TWO_PI = 2.0 * math.pi


def periodic2():
    return ScenarioSpec("jacobi", "periodic", {"a": [1.0, 1.0], "b": [1.0, -1.0]})


def decaying():
    return ScenarioSpec("jacobi", "decaying_a",
                        {"a_law": {"name": "inverse", "c": 1.0},
                         "b_table": [1.0, -1.0]})


def sparse():
    return ScenarioSpec("jacobi", "sparse",
                        {"bump_b": [1.0], "positions": {"law": "squares"}},
                        declared={"raw_halfwidth": 128})


# ---------------------------------------------------------------------------
# structural right limits
# ---------------------------------------------------------------------------

def test_periodic_gives_translates():
    rls = right_limit_set(periodic2())
    assert len(rls.members) == 2
    assert all(isinstance(m, PeriodicCoreLimit) for m in rls.members)
    cores = {m.core.b for m in rls.members}
    assert cores == {(1.0, -1.0), (-1.0, 1.0)}


def test_translation_closure_of_periodic_members():
    rls = right_limit_set(periodic2())
    cores = {m.core.b for m in rls.members}
    for m in rls.members:
        shifted = m.core.translate(1)
        assert shifted.b in cores


def test_decaying_gives_alternating_diagonal():
    rls = right_limit_set(decaying())
    assert all(isinstance(m, DiagonalLimit) for m in rls.members)
    assert {tuple(m.values) for m in rls.members} == {(1.0, -1.0), (-1.0, 1.0)}


def test_barrios_lopez_gives_rotated_family():
    spec = ScenarioSpec("cmv", "barrios_lopez", {"modulus": 0.5})
    rls = right_limit_set(spec)
    assert rls.parametrized
    members = rls.sampled_members(8)
    assert len(members) == 8
    for m in members:
        assert abs(abs(m.core.alpha[0]) - 0.5) < 1e-14


def test_sparse_gives_free_plus_bump():
    rls = right_limit_set(sparse())
    kinds = [m.tag for m in rls.members]
    assert kinds == ["periodic_core", "raw_window"]


def test_custom_table_unsupported():
    spec = ScenarioSpec("jacobi", "custom_table",
                        {"a": {"tail": {"constant": 1.0}},
                         "b": {"tail": {"constant": 0.0}}})
    with pytest.raises(UnsupportedClassError):
        right_limit_set(spec)


def test_members_rewitnessed_at_large_centers():
    # recurrence: every structural member matches windows arbitrarily far out
    spec = periodic2()
    rls = right_limit_set(spec)
    for scale in (100, 10000, 1000000):
        seen = set()
        for c in range(scale, scale + 2):
            w = window(spec, c, 3)
            seen.add(tuple(w.values))
        assert len(seen) == 2  # both translates appear


# ---------------------------------------------------------------------------
# numeric detector
# ---------------------------------------------------------------------------

def test_detect_periodic_two_clusters():
    clusters = detect_right_limits(periodic2(), 3, range(10, 501), 1e-9)
    assert len(clusters) == 2
    assert all(c.recurrent for c in clusters)


def test_detect_sparse_families():
    spec = sparse()
    centers = sorted({k * k for k in range(8, 60)} | {k * k + 30 for k in range(8, 60)})
    clusters = detect_right_limits(spec, 3, centers, 1e-9)
    recurrent = [c for c in clusters if c.recurrent]
    assert len(recurrent) == 2  # bump-centered window and free window


def test_detect_quasi_covers_phase_circle():
    spec = ScenarioSpec("jacobi", "quasi_periodic",
                        {"freq": [1.0],
                         "b_function": {"terms": [{"amp": 1.0, "k": [1]}]},
                         "slip": {"name": "sqrt"}})
    centers = np.unique(np.geomspace(1000, 1000000, 400).astype(int))
    clusters = detect_right_limits(spec, 3, centers, 0.05)
    # representative central phases should cover the circle to radius <= 0.1
    phases = []
    for c in clusters:
        b_mid = c.representative.values[3][1]
        n = c.representative.center
        # b = cos(n + sqrt n): recover the phase set via arccos branches
        phases.extend([math.acos(max(-1.0, min(1.0, b_mid))),
                       TWO_PI - math.acos(max(-1.0, min(1.0, b_mid)))])
    phases = np.sort(np.array(phases))
    gaps = np.diff(np.concatenate([phases, [phases[0] + TWO_PI]]))
    assert np.max(gaps) <= 0.2


def test_detector_matches_structural_for_periodic():
    spec = periodic2()
    clusters = detect_right_limits(spec, 4, range(20, 400), 1e-10)
    member_windows = set()
    for m in right_limit_set(spec).members:
        core = m.core
        member_windows.add(tuple((core.a[k % 2], core.b[k % 2]) for k in range(-4, 5)))
    for c in clusters:
        assert tuple(c.representative.values) in member_windows


# ---------------------------------------------------------------------------
# limit_spectrum dispatch
# ---------------------------------------------------------------------------

def test_limit_spectrum_free_two_sided():
    s = limit_spectrum(PeriodicCoreLimit(PeriodicJacobi((1.0,), (0.0,))))
    assert s.intervals[0] == pytest.approx((-2.0, 2.0), abs=1e-9)


def test_limit_spectrum_diagonal_points():
    s = limit_spectrum(DiagonalLimit((1.0, -1.0), "jacobi"))
    assert s.points == (-1.0, 1.0) and s.intervals == ()


def test_limit_spectrum_diagonal_inf_flags():
    s = limit_spectrum(DiagonalLimit((0.0, math.inf), "jacobi"))
    assert s.unbounded_above and not s.unbounded_below
    assert s.points == (0.0,)


def test_limit_spectrum_block_sum():
    blk = FiniteJacobi((0.0, 0.0), (1.0,))
    s = limit_spectrum(BlockSumLimit((blk,), "jacobi"))
    assert np.allclose(s.points, [-1.0, 1.0], atol=1e-9)


def test_limit_spectrum_cmv_diagonal():
    vals = (cmath.exp(1j * 0.5), cmath.exp(2j))
    s = limit_spectrum(DiagonalLimit(vals, "cmv"))
    assert np.allclose(s.points, [0.5, 2.0], atol=1e-12)


def test_limit_spectrum_raw_window_free():
    member = RawWindowLimit(lambda j: (1.0, 0.0), 128, "jacobi")
    s = limit_spectrum(member)
    assert hausdorff_distance(s, band_spectrum(PeriodicJacobi((1.0,), (0.0,)))) <= 0.05


def test_limit_spectrum_raw_window_bump_bound_state():
    # free chain plus a single-site bump g has a bound state at sqrt(4 + g^2)
    g = 1.0
    member = RawWindowLimit(lambda j: (1.0, g if j == 0 else 0.0), 128, "jacobi")
    s = limit_spectrum(member)
    expected = math.sqrt(4.0 + g * g)
    assert s.points and min(abs(p - expected) for p in s.points) < 1e-6
    assert s.intervals[0] == pytest.approx((-2.0, 2.0), abs=0.05)


def test_limit_spectrum_raw_window_too_small():
    member = RawWindowLimit(lambda j: (1.0, 0.0), 16, "jacobi")
    with pytest.raises(WindowError):
        limit_spectrum(member)


def test_cluster_to_member_roundtrip():
    spec = periodic2()
    clusters = detect_right_limits(spec, 40, range(100, 400), 1e-9)
    member = cluster_to_member(clusters[0], "jacobi")
    assert member.value(0) == clusters[0].representative.values[40]
