"""Finite-essential-spectrum criteria for Jacobi and CMV operators.

Krein's criterion: sigma_ess(J) lies in {x_1..x_l} iff P(J) = prod (J - x_j)
is compact, operationalized here as the decay of P(J)'s band entries along
dyadic row horizons.  For l = 2 the band entries are, explicitly,

    <d_n,   P d_n>   = a_n^2 + a_{n-1}^2 + (b_n - x_1)(b_n - x_2)
    <d_{n+1}, P d_n> = a_n (b_n - x_2) + a_n (b_{n+1} - x_1)
    <d_{n+2}, P d_n> = a_n a_{n+1}

which are also Chihara's three necessary-and-sufficient limits.  On the
two-sided limit operators the same content takes a block form (isolated
sites carry x_1 or x_2; 2x2 blocks have trace x_1 + x_2 and determinant
x_1 x_2), and the equivalence of the block form with the entrywise form is
checked here as a machine property, for Jacobi and for the CMV analog.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DomainError, ScenarioError, StructureError
from .cmv import theta
from .jacobi import FiniteJacobi, eigenvalues
from .sequences import ScenarioSpec
from .spectra import CircleSpectralSet, canonical_circle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TargetSet:
    """The finite candidate essential spectrum: distinct reals (Jacobi) or
    distinct unimodular points (CMV)."""

    values: tuple

    def __post_init__(self):
        if len(self.values) < 1:
            raise ScenarioError("TargetSet needs at least one value")
        vals = list(self.values)
        for i, u in enumerate(vals):
            for v in vals[i + 1:]:
                if abs(u - v) < 1e-12:
                    raise ScenarioError("TargetSet values must be distinct")

    @property
    def ell(self) -> int:
        return len(self.values)


# ---------------------------------------------------------------------------
# banded polynomial arithmetic
# ---------------------------------------------------------------------------

def _shift(arr: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(arr)
    if k == 0:
        return arr.copy()
    if k > 0:
        out[:-k] = arr[k:]
    else:
        out[-k:] = arr[:k]
    return out


def _banded_multiply(a: dict, b: dict, n: int) -> dict:
    out: dict[int, np.ndarray] = {}
    for o1, arr1 in a.items():
        for o2, arr2 in b.items():
            o = o1 + o2
            term = arr1 * _shift(arr2, o1)
            if o in out:
                out[o] += term
            else:
                out[o] = term
    for o, arr in out.items():
        if o > 0:
            arr[n - o:] = 0.0
        elif o < 0:
            arr[:-o] = 0.0
    return out


def _jacobi_bands(spec: ScenarioSpec, n: int) -> dict:
    pairs = [spec.value(k) for k in range(n)]
    b = np.array([p[1] for p in pairs])
    a = np.array([p[0] for p in pairs])
    up = a.copy()
    up[-1] = 0.0  # entry (n-1, n) is outside the window
    down = _shift(up, -1)
    return {0: b, 1: up, -1: down}


def krein_polynomial_bands(spec: ScenarioSpec, targets: TargetSet, n: int) -> dict:
    """Diagonals of P(J) = prod_j (J - x_j) restricted to the first n rows."""
    bands = None
    for x in targets.values:
        factor = _jacobi_bands(spec, n)
        factor[0] = factor[0] - float(x)
        bands = factor if bands is None else _banded_multiply(bands, factor, n)
    return bands


def krein_band_entries(spec: ScenarioSpec, targets: TargetSet, row: int) -> np.ndarray:
    """The 2l+1 band entries (offsets -l..l) of row ``row`` of P(J).

    Offsets reaching below the origin do not exist and are reported as 0.
    """
    ell = targets.ell
    size = row + ell + 2
    bands = krein_polynomial_bands(spec, targets, size)
    out = np.zeros(2 * ell + 1)
    for k in range(-ell, ell + 1):
        arr = bands.get(k)
        if arr is not None and 0 <= row + k < size:
            out[k + ell] = arr[row]
    return out


@dataclass(frozen=True)
class DecayVerdict:
    holds: bool
    witness_row: int | None          # 1-based, first row with sup >= tol
    tail_sup: float
    level_sups: tuple[tuple[int, float], ...]  # (dyadic level start, sup)
    profile: tuple[tuple[int, float], ...]     # sampled (row, sup) pairs

    def to_jsonable(self) -> dict:
        return {
            "verdict": "holds" if self.holds else "fails",
            "witness": self.witness_row,
            "tail_sup": self.tail_sup,
            "decay_profile": [[r, s] for r, s in self.profile],
            "level_sups": [[r, s] for r, s in self.level_sups],
        }


def _decay_verdict(row_sups: np.ndarray, tol: float) -> DecayVerdict:
    n = len(row_sups)
    tail = float(np.max(row_sups[n // 2:]))
    levels = []
    start = 8
    while start < n:
        stop = min(2 * start, n)
        levels.append((start, float(np.max(row_sups[start:stop]))))
        start = stop
    sups = [s for _, s in levels[-4:]]
    monotone = all(s2 <= s1 + 1e-12 for s1, s2 in zip(sups, sups[1:]))
    holds = tail < tol and monotone
    witness = None
    if not holds:
        bad = np.nonzero(row_sups >= tol)[0]
        witness = int(bad[0]) + 1 if len(bad) else None
    step = max(1, n // 32)
    profile = tuple((int(r) + 1, float(row_sups[r])) for r in range(0, n, step))
    return DecayVerdict(holds, witness, tail, tuple(levels), profile)


def krein_check(spec: ScenarioSpec, targets: TargetSet, horizon: int,
                tol: float = 1e-3) -> DecayVerdict:
    """P(J) compactness, operationalized: the sup of band-entry magnitudes
    over rows [horizon/2, horizon) must fall below tol, with nonincreasing
    sups over dyadic sub-horizons."""
    if horizon < 100:
        raise ScenarioError("krein_check needs a horizon of at least 100 rows")
    # build a margin past the horizon so no inspected row feels the cut
    bands = krein_polynomial_bands(spec, targets, horizon + targets.ell + 2)
    sups = np.max(np.abs(np.stack(list(bands.values()))), axis=0)[:horizon]
    return _decay_verdict(sups, tol)


def chihara_residuals(spec: ScenarioSpec, x1: float, x2: float, n: int) -> np.ndarray:
    """Left-hand sides of Chihara's three conditions at index n:
    (a_n^2 + a_{n-1}^2 + (b_n-x1)(b_n-x2),  a_n (b_n + b_{n+1} - x1 - x2),
     a_n a_{n+1})."""
    a_n, b_n = spec.value(n)
    a_prev = spec.value(n - 1)[0] if n >= 1 else 0.0
    a_next, b_next = spec.value(n + 1)
    return np.array([
        a_n ** 2 + a_prev ** 2 + (b_n - x1) * (b_n - x2),
        a_n * (b_n + b_next - x1 - x2),
        a_n * a_next,
    ])


def chihara_check(spec: ScenarioSpec, x1: float, x2: float, horizon: int,
                  tol: float = 1e-3) -> DecayVerdict:
    if horizon < 100:
        raise ScenarioError("chihara_check needs a horizon of at least 100 rows")
    pairs = [spec.value(k) for k in range(horizon + 1)]
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    a_prev = np.concatenate([[0.0], a[:-1]])
    r1 = a ** 2 + a_prev ** 2 + (b - x1) * (b - x2)
    r2 = a[:-1] * (b[:-1] + b[1:] - x1 - x2)
    r3 = a[:-1] * a[1:]
    sups = np.abs(r1[:horizon])
    sups = np.maximum(sups, np.abs(r2[:horizon]))
    sups = np.maximum(sups, np.abs(r3[:horizon]))
    return _decay_verdict(sups, tol)


# ---------------------------------------------------------------------------
# limit forms: block conditions vs entrywise conditions (Jacobi)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitFormResult:
    holds_a: bool
    holds_b: bool
    residual_a: float
    residual_b: float

    @property
    def equivalent(self) -> bool:
        return self.holds_a == self.holds_b


def limit_form_check(a_table, b_table, x1: float, x2: float,
                     tol: float = DEFAULT.exact_form) -> LimitFormResult:
    """Block form vs entrywise form of P(J~) = 0 on a two-sided window.

    Block form: a~_n a~_{n+1} = 0; isolated sites carry x1 or x2; 2x2 blocks
    have trace x1 + x2 and determinant x1 x2.  Entrywise form: the three
    band-entry families of P(J~) vanish (the diagonal family pairs b~_n with
    its adjacent couplings a~_{n-1}, a~_n).
    """
    a = [float(v) for v in a_table]
    b = [float(v) for v in b_table]
    if len(a) != len(b) - 1:
        raise ScenarioError("window needs len(a) == len(b) - 1")
    s, q = x1 + x2, x1 * x2
    res_a = 0.0
    for n in range(len(a) - 1):
        res_a = max(res_a, abs(a[n] * a[n + 1]))
    for n in range(1, len(b) - 1):
        if abs(a[n - 1]) <= tol and abs(a[n]) <= tol:
            res_a = max(res_a, min(abs(b[n] - x1), abs(b[n] - x2)))
    for n in range(len(a)):
        if abs(a[n]) > tol:
            res_a = max(res_a, abs(b[n] + b[n + 1] - s),
                        abs(b[n] * b[n + 1] - a[n] ** 2 - q))
    res_b = 0.0
    for n in range(1, len(b) - 1):
        res_b = max(res_b, abs(a[n - 1] ** 2 + a[n] ** 2 + (b[n] - x1) * (b[n] - x2)))
    for n in range(len(a)):
        res_b = max(res_b, abs(a[n] * (b[n] + b[n + 1] - s)))
    for n in range(len(a) - 1):
        res_b = max(res_b, abs(a[n] * a[n + 1]))
    return LimitFormResult(res_a <= tol, res_b <= tol, res_a, res_b)


def cmv_limit_form_check(alpha_table, lam1: complex, lam2: complex,
                         tol: float = DEFAULT.exact_form) -> LimitFormResult:
    """CMV analog on a two-sided window of Verblunsky limits.

    Block form: rho~_n rho~_{n+1} = 0; doubly-decoupled sites carry
    w_n = -conj(a~_{n+1}) a~_n in {lam1, lam2}; blocks with rho~_n > 0 have
    trace w_{n-1} + w_n = lam1 + lam2 and determinant
    a~_{n-1} conj(a~_{n+1}) = lam1 lam2.  Entrywise form: the tridiagonal
    band entries of (G - lam1)(G - lam2) vanish, where G is the matrix whose
    diagonal is g_n = -conj(a~_n) a~_{n-1}, subdiagonal rho~_n and
    superdiagonal -conj(a~_{n+1}) a~_{n-1} rho~_n once rho rho = 0 holds.
    """
    al = [complex(v) for v in alpha_table]
    m = len(al)
    if m < 4:
        raise ScenarioError("cmv window needs at least 4 coefficients")
    # work with rho^2 = 1 - |alpha|^2: the sqrt would halve the significant
    # digits of near-unimodular entries and put an ~1e-8 floor under exact
    # instances; the conditions are algebraically unchanged (x=0 iff x^2=0)
    rho2 = [max(0.0, 1.0 - abs(v) ** 2) for v in al]
    zero2 = math.sqrt(max(tol, 1e-15))  # rho^2 threshold for "decoupled"
    w = [-al[j + 1].conjugate() * al[j] for j in range(m - 1)]
    s, q = lam1 + lam2, lam1 * lam2
    res_a = 0.0
    for n in range(m - 1):
        res_a = max(res_a, rho2[n] * rho2[n + 1])
    for n in range(m - 1):
        if rho2[n] <= zero2 and rho2[n + 1] <= zero2:
            res_a = max(res_a, min(abs(w[n] - lam1), abs(w[n] - lam2)))
    for n in range(1, m - 1):
        if rho2[n] > zero2:
            res_a = max(res_a, abs(w[n - 1] + w[n] - s),
                        abs(al[n - 1] * al[n + 1].conjugate() - q))
    # entrywise route: g_n = w_{n-1}
    res_b = 0.0
    for n in range(m - 1):
        res_b = max(res_b, rho2[n] * rho2[n + 1])
    for n in range(1, m - 1):
        res_b = max(res_b, rho2[n] * abs(w[n - 1] + w[n] - s))
    for n in range(2, m - 1):
        g_n = w[n - 1]
        val = ((g_n - lam1) * (g_n - lam2)
               - rho2[n] * al[n + 1].conjugate() * al[n - 1]
               - rho2[n - 1] * al[n].conjugate() * al[n - 2])
        res_b = max(res_b, abs(val))
    return LimitFormResult(res_a <= tol, res_b <= tol, res_a, res_b)


# ---------------------------------------------------------------------------
# Golinskii: |alpha_n| -> 1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GolinskiiResult:
    spectrum: CircleSpectralSet
    warning: str | None

    def to_jsonable(self) -> dict:
        from .spectra import to_jsonable
        out = {"spectrum": to_jsonable(self.spectrum)}
        if self.warning:
            out["warning"] = self.warning
        return out


def golinskii_decay_spectrum(spec: ScenarioSpec, horizon: int,
                             cluster_gap: float = 0.05) -> GolinskiiResult:
    """Limit points of {-conj(alpha_{j+1}) alpha_j} estimated from tail values
    over [horizon/2, horizon); valid when |alpha_n| -> 1."""
    if spec.is_jacobi:
        raise ScenarioError("golinskii_decay_spectrum needs a CMV scenario")
    lo = horizon // 2
    alphas = [complex(spec.value(j)) for j in range(lo, horizon + 1)]
    warning = None
    worst = max(1.0 - abs(a) for a in alphas)
    if worst > 0.1:
        warning = (f"hypothesis |alpha_n| -> 1 violated on the tail: "
                   f"max(1 - |alpha|) = {worst:.3f}")
    prods = [-alphas[k + 1].conjugate() * alphas[k] for k in range(len(alphas) - 1)]
    angles = np.array([cmath.phase(z) % TWO_PI for z in prods])
    order = np.argsort(angles)
    sorted_angles = angles[order]
    # circular clustering: cut at every gap >= cluster_gap; representative is
    # the latest-index member of each cluster (closest to the limit)
    gaps = np.diff(sorted_angles)
    wrap = sorted_angles[0] + TWO_PI - sorted_angles[-1]
    cuts = np.nonzero(gaps >= cluster_gap)[0]
    groups = np.split(np.arange(len(sorted_angles)), cuts + 1)
    if wrap < cluster_gap and len(groups) > 1:
        groups[0] = np.concatenate([groups[-1], groups[0]])
        groups = groups[:-1]
    reps = []
    for g in groups:
        members = order[g]
        reps.append(float(angles[members.max()]))
    return GolinskiiResult(canonical_circle((), sorted(reps)), warning)


# ---------------------------------------------------------------------------
# finite blocks (including the CMV two-factor blocks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CMVBlock:
    """k x k decoupled CMV block: boundary coefficients unimodular, interior
    strictly inside the disk."""

    alpha: tuple  # alpha~_0 .. alpha~_k

    def __post_init__(self):
        k = self.k
        if k < 1 or k > 8:
            raise ScenarioError("CMV blocks supported for 1 <= k <= 8")
        if abs(abs(self.alpha[0]) - 1) > 1e-12 or abs(abs(self.alpha[k]) - 1) > 1e-12:
            raise StructureError("CMV block boundary coefficients must be unimodular")
        if any(abs(a) >= 1.0 for a in self.alpha[1:k]):
            raise StructureError("CMV block interior coefficients must satisfy |alpha| < 1")

    @property
    def k(self) -> int:
        return len(self.alpha) - 1

    def dense(self) -> np.ndarray:
        k = self.k
        al = [complex(a) for a in self.alpha]
        f1 = np.zeros((k, k), dtype=complex)
        f2 = np.zeros((k, k), dtype=complex)

        def place(mat, pos, j):
            mat[pos:pos + 2, pos:pos + 2] = theta(al[j]).matrix()

        if k % 2 == 0:
            for i, j in enumerate(range(1, k, 2)):
                place(f1, 2 * i, j)
            f2[0, 0] = -al[0]
            for i, j in enumerate(range(2, k - 1, 2)):
                place(f2, 2 * i + 1, j)
            f2[k - 1, k - 1] = al[k].conjugate()
        else:
            for i, j in enumerate(range(1, k - 1, 2)):
                place(f1, 2 * i, j)
            f1[k - 1, k - 1] = al[k].conjugate()
            f2[0, 0] = -al[0]
            for i, j in enumerate(range(2, k, 2)):
                place(f2, 2 * i + 1, j)
        return f1 @ f2


def _char_poly(u: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients via Faddeev-LeVerrier:
    p(z) = z^k - c_1 z^{k-1} - ... - c_k."""
    k = u.shape[0]
    coeffs = np.zeros(k + 1, dtype=complex)
    coeffs[0] = 1.0
    m = u.copy()
    for j in range(1, k + 1):
        c = np.trace(m) / j
        coeffs[j] = -c
        if j < k:
            m = u @ (m - c * np.eye(k))
    return coeffs


def _unimodular_roots(coeffs: np.ndarray, k: int, det: complex,
                      tol_angle: float = 1e-11) -> list[complex]:
    """All k roots of a monic degree-k polynomial whose roots lie on the unit
    circle, via the rotated-real phase scan."""
    delta = cmath.phase(det)

    def rval(thetas: np.ndarray) -> np.ndarray:
        zs = np.exp(1j * thetas)
        p = np.zeros_like(zs)
        for c in coeffs:
            p = p * zs + c
        rotor = np.exp(0.5j * (k * math.pi - delta - k * thetas))
        return (p * rotor).real

    m = max(64, 16 * k)
    for _ in range(8):
        thetas = np.arange(m + 1) * (TWO_PI / m)
        vals = rval(thetas[:-1])
        vals = np.append(vals, vals[0] * (-1.0) ** k)
        found = []
        for i in range(m):
            v0, v1 = vals[i], vals[i + 1]
            if v0 == 0.0:
                found.append(thetas[i])
            elif v1 != 0.0 and (v0 < 0) != (v1 < 0):
                a_, b_ = thetas[i], thetas[i + 1]
                fa = v0
                while b_ - a_ > tol_angle:
                    mid = 0.5 * (a_ + b_)
                    fm = rval(np.array([mid]))[0]
                    if fm == 0.0:
                        a_ = b_ = mid
                        break
                    if (fm < 0) == (fa < 0):
                        a_, fa = mid, fm
                    else:
                        b_ = mid
                found.append(0.5 * (a_ + b_))
        if len(found) == k:
            return [cmath.exp(1j * (t % TWO_PI)) for t in sorted(found)]
        m *= 2
    raise StructureError(
        f"found {len(found)} unimodular roots of a degree-{k} block polynomial; "
        "the block is not unitary to tolerance")


def finite_block_eigs(block) -> list:
    """Eigenvalues of a decoupled finite block.

    Jacobi blocks go through the bisection eigensolver; CMV blocks (k <= 8)
    through characteristic-polynomial root isolation on the circle, which
    doubles as the unimodularity check.
    """
    if isinstance(block, FiniteJacobi):
        return [float(x) for x in eigenvalues(block)]
    if isinstance(block, CMVBlock):
        u = block.dense()
        det = complex(np.linalg.det(u))
        coeffs = _char_poly(u)
        roots = _unimodular_roots(coeffs, block.k, det)
        for r in roots:
            # residual check: p(r) ~ 0 certifies the located root
            val = complex(0)
            for c in coeffs:
                val = val * r + c
            if abs(val) > 1e-8 * max(1.0, float(np.max(np.abs(coeffs)))):
                raise StructureError(f"root residual {abs(val):.3e} too large")
        return roots
    raise ScenarioError(f"unsupported block type {type(block).__name__}")


# ---------------------------------------------------------------------------
# exact-instance constructors for the equivalence property suites
# ---------------------------------------------------------------------------

def build_jacobi_limit_window(x1: float, x2: float, layout, rng) -> tuple[list, list]:
    """Two-sided (a, b) window satisfying the block form exactly.

    layout: sequence of "point" / "pair" segment labels.
    """
    lo, hi = min(x1, x2), max(x1, x2)
    a: list[float] = []
    b: list[float] = []
    for seg in layout:
        if seg == "point":
            b.append(x1 if rng.random() < 0.5 else x2)
            a.append(0.0)
        elif seg == "pair":
            t = lo + (hi - lo) * (0.1 + 0.8 * rng.random())
            b.append(t)
            b.append((x1 + x2) - t)
            a.append(math.sqrt((t - x1) * (x2 - t)))
            a.append(0.0)
        else:
            raise ScenarioError(f"unknown layout segment {seg!r}")
    return a[:-1], b


def build_cmv_limit_window(lam1: complex, lam2: complex, layout, rng) -> list[complex]:
    """Two-sided alpha window satisfying the CMV block form exactly.

    Unimodular runs chain through alpha_{n+1} = -conj(w) alpha_n with
    w in {lam1, lam2}.  A "pair" inserts one interior coefficient: with
    psi = arg(lam1 lam2) the trace equation collapses to the single real
    constraint Re(u) = -(s e^{-i psi/2}).real / 2 on u = alpha_n
    conj(alpha_{n-1}) e^{i psi/2}, leaving Im(u) free inside the disk, and
    the determinant equation fixes alpha_{n+1} = conj(lam1 lam2) alpha_{n-1}.
    """
    s, q = lam1 + lam2, lam1 * lam2
    if abs(lam1 - lam2) < 1e-8:
        raise ScenarioError("pair blocks need distinct targets")

    def extend_point(al: list[complex]):
        w = lam1 if rng.random() < 0.5 else lam2
        al.append(-w.conjugate() * al[-1])

    psi = cmath.phase(q)
    root = cmath.exp(-0.5j * psi)
    re_u = -0.5 * (s * root).real  # the imaginary part vanishes identically
    cap = math.sqrt(max(0.0, 1.0 - re_u * re_u))
    al = [cmath.exp(1j * TWO_PI * rng.random())]
    for seg in layout:
        if seg == "point":
            extend_point(al)
        elif seg == "pair":
            c1 = al[-1]  # alpha_{n-1}, unimodular
            t = (2.0 * rng.random() - 1.0) * 0.9 * cap
            al.append(complex(re_u, t) * c1 * root)   # alpha_n, interior
            al.append(q.conjugate() * c1)             # alpha_{n+1}, unimodular
        else:
            raise ScenarioError(f"unknown layout segment {seg!r}")
    extend_point(al)  # trailing boundary so every block is closed
    return al
