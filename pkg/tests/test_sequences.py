import cmath
import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from esslab.errors import DomainError, IndexError_, ScenarioError
from esslab.sequences import (BUILTIN_SLIPS, RotatedConstantTorus, ScenarioSpec,
                              d_metric, distance_to_torus, make_slip,
                              phase_mod_2pi, spec_from_json, window)


def free_spec():
    return ScenarioSpec("jacobi", "periodic", {"a": [1.0], "b": [0.0]})


def bl_spec(a=0.5):
    return ScenarioSpec("cmv", "barrios_lopez", {"modulus": a, "slip": {"name": "sqrt"}})


# ---------------------------------------------------------------------------
# stream_value
# ---------------------------------------------------------------------------

def test_periodic_jacobi_values():
    spec = ScenarioSpec("jacobi", "periodic", {"a": [1.0, 1.0], "b": [1.0, -1.0]})
    a, b = spec.value(5)
    assert (a, b) == (1.0, -1.0)


def test_quasi_periodic_cos_at_zero():
    spec = ScenarioSpec("jacobi", "quasi_periodic",
                        {"freq": [1.0],
                         "b_function": {"terms": [{"amp": 1.0, "k": [1]}]},
                         "slip": {"name": "sqrt"}})
    a, b = spec.value(0)
    assert a == 1.0
    assert b == pytest.approx(1.0)


def test_barrios_lopez_direct_formula():
    spec = bl_spec()
    expected = 0.5 * cmath.exp(2j)  # e^{i sqrt(4)}
    assert spec.value(4) == pytest.approx(expected)


def test_negative_index_raises():
    with pytest.raises(IndexError_):
        free_spec().value(-1)


def test_determinism_bit_for_bit():
    spec = bl_spec()
    vals1 = [spec.value(n) for n in (0, 17, 123456)]
    spec2 = bl_spec()
    vals2 = [spec2.value(n) for n in (0, 17, 123456)]
    assert vals1 == vals2


def test_sparse_bump_lookup():
    spec = ScenarioSpec("jacobi", "sparse",
                        {"bump_b": [7.0], "positions": {"law": "squares"}})
    # bump at k^2 for k >= 1; background elsewhere
    assert spec.value(4) == (1.0, 7.0)
    assert spec.value(5) == (1.0, 0.0)
    assert spec.value(100) == (1.0, 7.0)


def test_decaying_a_table():
    spec = ScenarioSpec("jacobi", "decaying_a",
                        {"a_law": {"name": "inverse", "c": 1.0},
                         "b_table": [1.0, -1.0]})
    a2, b2 = spec.value(2)
    assert a2 == pytest.approx(1.0 / 3.0)
    assert b2 == 1.0


def test_custom_table_paired_decay():
    spec = ScenarioSpec("jacobi", "custom_table",
                        {"a": {"tail": {"law": {"name": "paired_decay"}}},
                         "b": {"tail": {"constant": 0.0}}})
    a_vals = [spec.value(n)[0] for n in range(6)]
    assert a_vals == [1.0, 1.0, 1.0, 0.5, 1.0, pytest.approx(1.0 / 3.0)]


def test_prefix_override_applied():
    spec = free_spec().with_prefix_override({"b": {3: 9.0}})
    assert spec.value(3)[1] == 9.0
    assert spec.value(4)[1] == 0.0


def test_unknown_kind_rejected():
    with pytest.raises(ScenarioError):
        ScenarioSpec("cmv", "sparse", {"bump_b": [1.0]})


def test_spec_json_roundtrip():
    spec = bl_spec()
    again = spec_from_json(spec.to_jsonable())
    assert again.value(10) == spec.value(10)


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

def test_window_free():
    w = window(free_spec(), 10, 1)
    assert w.values == ((1.0, 0.0),) * 3


def test_window_origin_boundary_absent():
    w = window(free_spec(), 0, 2)
    assert w.values[0] is None and w.values[1] is None
    assert w.values[2] == (1.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 500), st.integers(0, 6), st.integers(-6, 6))
def test_window_consistency(center, half, ell):
    if abs(ell) > half:
        return
    spec = ScenarioSpec("jacobi", "periodic", {"a": [1.0, 2.0, 3.0], "b": [0.0, 1.0, -1.0]})
    w = window(spec, center, half)
    idx = center + ell
    expected = spec.value(idx) if idx >= 0 else None
    assert w.values[ell + half] == expected


# ---------------------------------------------------------------------------
# slips and extended-precision phases
# ---------------------------------------------------------------------------

def test_slip_modulus_vanishes():
    for desc in BUILTIN_SLIPS:
        f = make_slip(desc)
        spreads = []
        for n in (10**4, 10**6, 10**8):
            spreads.append(max(abs(f(n) - f(n + m)) for m in range(-8, 9)))
        assert spreads[0] > spreads[1] > spreads[2], desc
        assert spreads[-1] < 0.05, desc


def test_phase_reduction_against_mpmath():
    mpmath.mp.dps = 60
    for n in (10**6, 10**8):
        got = phase_mod_2pi(1.0, float(n), math.sqrt(n))
        exact = mpmath.fmod(mpmath.mpf(n) + mpmath.sqrt(n), 2 * mpmath.pi)
        err = abs(got - float(exact))
        err = min(err, abs(err - 2 * math.pi))
        assert err < 1e-10, (n, err)


def test_phase_reduction_plain_double_would_fail():
    # sanity: the naive reduction loses ~1e-8 at n = 1e8, the dd one does not
    n = 10**8
    naive = (1.0 * n + math.sqrt(n)) % (2 * math.pi)
    good = phase_mod_2pi(1.0, float(n), math.sqrt(n))
    assert abs(naive - good) > 1e-11


# ---------------------------------------------------------------------------
# d_metric
# ---------------------------------------------------------------------------

def test_d_metric_identical():
    r = d_metric([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert r.value == 0.0


def test_d_metric_single_difference():
    r = d_metric([1.0, 0.0], [0.0, 0.0])
    assert r.value == 1.0


def test_d_metric_geometric_series():
    c = 0.3
    n = 60
    r = d_metric([c] * n, [0.0] * n)
    assert r.value == pytest.approx(c / (1 - math.exp(-1.0)), rel=1e-12)
    assert r.tail_bound < 1e-20


def test_d_metric_pairs_sum_both_components():
    r = d_metric([(1.0, 2.0)], [(0.5, 1.0)])
    assert r.value == pytest.approx(1.5)


def test_d_metric_length_mismatch_raises():
    with pytest.raises(DomainError):
        d_metric([1.0], [1.0, 2.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8),
       st.lists(st.floats(-5, 5), min_size=8, max_size=8),
       st.lists(st.floats(-5, 5), min_size=8, max_size=8))
def test_d_metric_triangle(u, v, w):
    u = (u * 8)[:8]
    duv = d_metric(u, v).value
    dvw = d_metric(v, w).value
    duw = d_metric(u, w).value
    assert duw <= duv + dvw + 1e-12
    assert d_metric(u, v).value == d_metric(v, u).value


# ---------------------------------------------------------------------------
# distance_to_torus
# ---------------------------------------------------------------------------

def test_distance_to_torus_member_is_zero():
    torus = RotatedConstantTorus(0.5)
    member = torus.member_window(0.25, 30)
    assert distance_to_torus(member, torus) < 1e-6


def test_distance_to_torus_perturbation_at_origin():
    torus = RotatedConstantTorus(0.5)
    member = torus.member_window(0.0, 30)
    member[0] = member[0] + 0.37
    d = distance_to_torus(member, torus)
    assert d == pytest.approx(0.37, abs=2e-4)


def test_barrios_lopez_windows_approach_torus():
    spec = bl_spec()
    torus = RotatedConstantTorus(0.5)
    ds = []
    for center in (100, 1000, 10000):
        vals = [spec.value(center + k) for k in range(40)]
        ds.append(distance_to_torus(vals, torus))
    assert ds[0] > ds[1] > ds[2]
