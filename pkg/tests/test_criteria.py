import cmath
import math

import numpy as np
import pytest

from esslab.criteria import (CMVBlock, TargetSet, build_cmv_limit_window,
                             build_jacobi_limit_window, chihara_check,
                             chihara_residuals, cmv_limit_form_check,
                             finite_block_eigs, golinskii_decay_spectrum,
                             krein_band_entries, krein_check,
                             limit_form_check)
from esslab.errors import ScenarioError, StructureError
from esslab.jacobi import FiniteJacobi
from esslab.sequences import ScenarioSpec
from esslab.esscore import (decaying_alternating, free_jacobi,
                            paired_krein_stream, period2_jacobi)

TWO_PI = 2.0 * math.pi
TARGETS = TargetSet((-1.0, 1.0))


# ---------------------------------------------------------------------------
# krein band entries
# ---------------------------------------------------------------------------

def test_krein_free_diagonal_entry_is_one():
    for row in (0, 3, 57):
        entries = krein_band_entries(free_jacobi(), TARGETS, row)
        # a_n^2 + a_{n-1}^2 + (b_n - x1)(b_n - x2) = 1 + 1 - 1 (row 0: a_{-1} = 0)
        expected = 1.0 if row >= 1 else 0.0
        assert entries[2] == pytest.approx(expected)


def test_krein_entries_match_explicit_l2_formulas():
    spec = period2_jacobi()
    x1, x2 = -0.7, 0.4
    t = TargetSet((x1, x2))
    for row in (1, 2, 5, 10):
        entries = krein_band_entries(spec, t, row)
        a = lambda n: spec.value(n)[0] if n >= 0 else 0.0
        b = lambda n: spec.value(n)[1]
        diag = a(row) ** 2 + a(row - 1) ** 2 + (b(row) - x1) * (b(row) - x2)
        off1 = a(row) * (b(row) - x2) + a(row) * (b(row + 1) - x1)
        off2 = a(row) * a(row + 1)
        assert entries[2] == pytest.approx(diag, abs=1e-12)
        assert entries[3] == pytest.approx(off1, abs=1e-12)
        assert entries[4] == pytest.approx(off2, abs=1e-12)


def test_krein_paired_decay_rate():
    spec = paired_krein_stream()
    sups = []
    for k in (50, 100, 200):
        entries = krein_band_entries(spec, TARGETS, 2 * k)
        sups.append(np.max(np.abs(entries)))
    # band entries at row 2k decay like 1/k
    assert sups[0] == pytest.approx(1.0 / 50, rel=0.2)
    assert sups[2] == pytest.approx(1.0 / 200, rel=0.2)


def test_krein_diagonal_stream_all_zero():
    spec = ScenarioSpec("jacobi", "decaying_a",
                        {"a_law": {"name": "geometric", "c": 0.0, "ratio": 0.5},
                         "b_table": [1.0, -1.0]})
    entries = krein_band_entries(spec, TARGETS, 10)
    assert np.max(np.abs(entries)) == 0.0


# ---------------------------------------------------------------------------
# krein / chihara checks
# ---------------------------------------------------------------------------

def test_krein_check_free_fails_at_row_one():
    verdict = krein_check(free_jacobi(), TARGETS, 400, tol=0.05)
    assert not verdict.holds
    assert verdict.witness_row == 1


def test_krein_check_paired_holds():
    verdict = krein_check(paired_krein_stream(), TARGETS, 10000, tol=0.05)
    assert verdict.holds
    assert verdict.tail_sup < 0.05


def test_krein_check_decaying_alternating_holds():
    verdict = krein_check(decaying_alternating(), TARGETS, 2000, tol=0.05)
    assert verdict.holds


def test_chihara_residuals_paired_vanish():
    spec = paired_krein_stream()
    r50 = np.abs(chihara_residuals(spec, -1.0, 1.0, 100))
    r500 = np.abs(chihara_residuals(spec, -1.0, 1.0, 1000))
    assert np.all(r500 <= r50)
    assert np.max(r500) < 5e-3


def test_chihara_residuals_free_constant_one():
    r = chihara_residuals(free_jacobi(), -1.0, 1.0, 10)
    assert r[0] == pytest.approx(1.0)


def test_chihara_residuals_diagonal_alternating_zero():
    spec = ScenarioSpec("jacobi", "decaying_a",
                        {"a_law": {"name": "geometric", "c": 0.0, "ratio": 0.5},
                         "b_table": [1.0, -1.0]})
    assert np.max(np.abs(chihara_residuals(spec, -1.0, 1.0, 7))) == 0.0


def test_krein_chihara_verdicts_agree_on_corpus():
    scenarios = [free_jacobi(), period2_jacobi(), decaying_alternating(),
                 paired_krein_stream()]
    for spec in scenarios:
        k = krein_check(spec, TARGETS, 2000, tol=0.05)
        c = chihara_check(spec, -1.0, 1.0, 2000, tol=0.05)
        assert k.holds == c.holds, spec.label


# ---------------------------------------------------------------------------
# limit forms (Jacobi)
# ---------------------------------------------------------------------------

def test_limit_form_dimer_chain():
    a = [1.0 if n % 2 == 0 else 0.0 for n in range(9)]
    b = [0.0] * 10
    res = limit_form_check(a, b, -1.0, 1.0)
    assert res.holds_a and res.holds_b and res.equivalent


def test_limit_form_diagonal_alternating():
    a = [0.0] * 9
    b = [1.0 if n % 2 == 0 else -1.0 for n in range(10)]
    res = limit_form_check(a, b, -1.0, 1.0)
    assert res.holds_a and res.holds_b


def test_limit_form_shifted_b_fails_both():
    a = [1.0 if n % 2 == 0 else 0.0 for n in range(9)]
    b = [0.5] * 10
    res = limit_form_check(a, b, -1.0, 1.0)
    assert not res.holds_a and not res.holds_b and res.equivalent


def test_limit_form_equivalence_property_jacobi():
    rng = np.random.default_rng(101)
    segments = ["point", "pair"]
    for trial in range(1000):
        x1 = rng.uniform(-2, 0.5)
        x2 = x1 + rng.uniform(0.3, 2.0)
        layout = [segments[rng.integers(0, 2)] for _ in range(rng.integers(2, 6))]
        a, b = build_jacobi_limit_window(x1, x2, layout, rng)
        res = limit_form_check(a, b, x1, x2, tol=1e-12)
        assert res.holds_a and res.holds_b, (trial, layout)
        assert res.residual_a < 1e-12 and res.residual_b < 1e-12


def test_limit_form_perturbed_instances_fail_both_ways():
    rng = np.random.default_rng(55)
    for _ in range(200):
        layout = ["pair", "point"]
        a, b = build_jacobi_limit_window(-1.0, 1.0, layout, rng)
        b = [v + 0.05 for v in b]
        res = limit_form_check(a, b, -1.0, 1.0, tol=1e-9)
        assert not res.holds_a and not res.holds_b


# ---------------------------------------------------------------------------
# limit forms (CMV)
# ---------------------------------------------------------------------------

def test_cmv_limit_form_unimodular_chain():
    lam1, lam2 = cmath.exp(0.4j), cmath.exp(-1.1j)
    rng = np.random.default_rng(7)
    al = build_cmv_limit_window(lam1, lam2, ["point"] * 6, rng)
    res = cmv_limit_form_check(al, lam1, lam2)
    assert res.holds_a and res.holds_b


def test_cmv_limit_form_constructed_block():
    lam1, lam2 = cmath.exp(0.9j), cmath.exp(2.5j)
    rng = np.random.default_rng(8)
    al = build_cmv_limit_window(lam1, lam2, ["point", "pair", "point"], rng)
    res = cmv_limit_form_check(al, lam1, lam2)
    assert res.holds_a and res.holds_b
    assert res.residual_a < 1e-12 and res.residual_b < 1e-12


def test_cmv_limit_form_det_perturbation_fails():
    lam1, lam2 = cmath.exp(0.9j), cmath.exp(2.5j)
    rng = np.random.default_rng(9)
    al = build_cmv_limit_window(lam1, lam2, ["point", "pair", "point"], rng)
    # perturb a boundary coefficient phase: determinant condition breaks
    k = 3
    al[k] = al[k] * cmath.exp(0.1j) if abs(abs(al[k]) - 1) < 1e-9 else al[k]
    res = cmv_limit_form_check(al, lam1, lam2, tol=1e-6)
    assert not res.holds_a and not res.holds_b


def test_cmv_limit_form_equivalence_property():
    rng = np.random.default_rng(202)
    segments = ["point", "pair"]
    done = 0
    while done < 1000:
        t1, t2 = rng.uniform(0, TWO_PI, 2)
        if abs(cmath.exp(1j * t1) - cmath.exp(1j * t2)) < 0.3:
            continue
        lam1, lam2 = cmath.exp(1j * t1), cmath.exp(1j * t2)
        layout = [segments[rng.integers(0, 2)] for _ in range(rng.integers(2, 5))]
        try:
            al = build_cmv_limit_window(lam1, lam2, layout, rng)
        except ScenarioError:
            continue
        res = cmv_limit_form_check(al, lam1, lam2, tol=1e-12)
        assert res.holds_a and res.holds_b, (done, layout)
        done += 1


# ---------------------------------------------------------------------------
# golinskii
# ---------------------------------------------------------------------------

def test_golinskii_real_modulus_to_minus_one():
    spec = ScenarioSpec("cmv", "decaying_a",
                        {"defect_law": {"name": "inverse", "c": 1.0},
                         "phase_table": [0.0]})
    res = golinskii_decay_spectrum(spec, 100000)
    assert res.warning is None
    assert len(res.spectrum.points) == 1
    assert res.spectrum.points[0] == pytest.approx(math.pi, abs=1e-4)


def test_golinskii_rotating_phases():
    spec = ScenarioSpec("cmv", "decaying_a",
                        {"defect_law": {"name": "inverse", "c": 1.0},
                         "phase_table": [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]})
    res = golinskii_decay_spectrum(spec, 100000)
    assert len(res.spectrum.points) == 1
    assert res.spectrum.points[0] == pytest.approx(0.5 * math.pi, abs=1e-4)


def test_golinskii_hypothesis_warning():
    spec = ScenarioSpec("cmv", "periodic", {"alpha": [[0.5, 0.0]]})
    res = golinskii_decay_spectrum(spec, 1000)
    assert res.warning is not None


# ---------------------------------------------------------------------------
# finite blocks
# ---------------------------------------------------------------------------

def test_block_eigs_jacobi_2x2():
    vals = finite_block_eigs(FiniteJacobi((0.0, 0.0), (1.0,)))
    assert np.allclose(sorted(vals), [-1.0, 1.0], atol=1e-9)


def test_block_eigs_cmv_k1():
    a0 = cmath.exp(0.3j)
    a1 = cmath.exp(-0.8j)
    roots = finite_block_eigs(CMVBlock((a0, a1)))
    assert len(roots) == 1
    assert roots[0] == pytest.approx(-np.conj(a1) * a0, abs=1e-10)


def test_block_eigs_cmv_k2_matches_targets():
    lam1, lam2 = cmath.exp(0.9j), cmath.exp(2.5j)
    rng = np.random.default_rng(31)
    al = build_cmv_limit_window(lam1, lam2, ["pair"], rng)
    # the pair occupies indices 0..2 of the window; its block is (a0, a1, a2)
    block = CMVBlock(tuple(al[:3]))
    roots = sorted(finite_block_eigs(block), key=lambda z: cmath.phase(z))
    expected = sorted([lam1, lam2], key=lambda z: cmath.phase(z))
    assert np.allclose(roots, expected, atol=1e-9)


def test_block_eigs_cmv_unimodular_and_against_numpy():
    rng = np.random.default_rng(17)
    for k in (2, 3, 4, 6, 8):
        alpha = [cmath.exp(1j * rng.uniform(0, TWO_PI))]
        alpha += [(rng.uniform(-0.6, 0.6) + 1j * rng.uniform(-0.6, 0.6))
                  for _ in range(k - 1)]
        alpha += [cmath.exp(1j * rng.uniform(0, TWO_PI))]
        block = CMVBlock(tuple(alpha))
        roots = finite_block_eigs(block)
        assert all(abs(abs(r) - 1.0) < 1e-10 for r in roots)
        ref = np.linalg.eigvals(block.dense())
        got = np.sort(np.mod(np.angle(np.array(roots)), TWO_PI))
        want = np.sort(np.mod(np.angle(ref), TWO_PI))
        assert np.max(np.abs(got - want)) < 1e-8, k


def test_block_eigs_malformed_block_raises():
    with pytest.raises(StructureError):
        CMVBlock((0.5, 0.3, cmath.exp(1j)))  # boundary not unimodular
