"""Jacobi operator numerics.

Finite symmetric tridiagonal truncations with a Sturm-count bisection
eigensolver, the Floquet discriminant of periodic two-sided Jacobi operators
with its band spectrum {x : Delta(x) in [-2, 2]}, and Weyl trial-vector
residuals.  The eigensolver is deliberately bisection-based: simple to
verify against the count function, and every acceptance check that uses it
is cross-validated against a structurally independent route.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (FamilyMismatchError, ResolutionError, ScenarioError,
                     SupportError)
from .sequences import ScenarioSpec
from .spectra import RealSpectralSet, canonical_line


@dataclass(frozen=True)
class FiniteJacobi:
    """N x N symmetric tridiagonal block: diagonal b, off-diagonal a >= 0."""

    b: tuple[float, ...]
    a: tuple[float, ...]

    def __post_init__(self):
        if len(self.b) < 1 or len(self.a) != len(self.b) - 1:
            raise ScenarioError("FiniteJacobi needs len(a) == len(b) - 1 >= 0")
        if any(x < 0 for x in self.a):
            raise ScenarioError("FiniteJacobi needs a_j >= 0")

    @property
    def n(self) -> int:
        return len(self.b)

    def dense(self) -> np.ndarray:
        m = np.diag(np.asarray(self.b, dtype=float))
        if self.a:
            a = np.asarray(self.a, dtype=float)
            m += np.diag(a, 1) + np.diag(a, -1)
        return m

    def matvec(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi)
        out = np.asarray(self.b, dtype=float) * phi
        if self.a:
            a = np.asarray(self.a, dtype=float)
            out[:-1] = out[:-1] + a * phi[1:]
            out[1:] = out[1:] + a * phi[:-1]
        return out


@dataclass(frozen=True)
class PeriodicJacobi:
    """Two-sided periodic Jacobi operator, period p >= 1, all a_j > 0."""

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        if len(self.a) != len(self.b) or len(self.a) < 1:
            raise ScenarioError("PeriodicJacobi needs equal nonempty a, b")
        if min(self.a) <= 0:
            raise ScenarioError("PeriodicJacobi needs a_j > 0 "
                                "(a_j = 0 limits decouple; use block limits)")

    @property
    def period(self) -> int:
        return len(self.a)

    def translate(self, shift: int) -> "PeriodicJacobi":
        p = self.period
        s = shift % p
        return PeriodicJacobi(self.a[s:] + self.a[:s], self.b[s:] + self.b[:s])


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def truncate(spec: ScenarioSpec, n: int) -> FiniteJacobi:
    """Principal n x n truncation from stream indices 0 .. n-1."""
    if not spec.is_jacobi:
        raise FamilyMismatchError("truncate needs a Jacobi scenario")
    if n < 1:
        raise ScenarioError("truncation size must be >= 1")
    pairs = [spec.value(k) for k in range(n)]
    b = tuple(p[1] for p in pairs)
    a = tuple(pairs[k][0] for k in range(n - 1))
    return FiniteJacobi(b, a)


def gershgorin_interval(m) -> tuple[float, float]:
    if isinstance(m, PeriodicJacobi):
        a = list(m.a)
        b = list(m.b)
        p = len(a)
        lo = min(b[j] - (a[j - 1] + a[j]) for j in range(p))
        hi = max(b[j] + (a[j - 1] + a[j]) for j in range(p))
        return lo, hi
    b = np.asarray(m.b, dtype=float)
    a = np.asarray(m.a, dtype=float) if m.a else np.zeros(0)
    left = np.zeros(len(b))
    right = np.zeros(len(b))
    if len(a):
        left[1:] += a
        right[:-1] += a
    row = left + right
    return float(np.min(b - row)), float(np.max(b + row))


# ---------------------------------------------------------------------------
# Sturm counts and bisection eigenvalues
# ---------------------------------------------------------------------------

def sturm_counts(m: FiniteJacobi, xs: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each shift, via the LDL sign count.

    Zero pivots are nudged to -pivmin (the conventional guard), which is the
    same as perturbing the shift by an ulp.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    b = np.asarray(m.b, dtype=float)
    a2 = np.square(np.asarray(m.a, dtype=float)) if m.a else np.zeros(0)
    amax = float(np.max(np.abs(m.a))) if m.a else 0.0
    pivmin = max(1.0, amax * amax) * 1e-292
    d = b[0] - xs
    d = np.where(np.abs(d) < pivmin, -pivmin, d)
    count = (d < 0).astype(np.int64)
    for k in range(1, len(b)):
        d = (b[k] - xs) - a2[k - 1] / d
        d = np.where(np.abs(d) < pivmin, -pivmin, d)
        count += d < 0
    return count


def sturm_count(m: FiniteJacobi, x: float) -> int:
    return int(sturm_counts(m, np.array([x]))[0])


def eigenvalues(m: FiniteJacobi, tol: float = DEFAULT.eig) -> np.ndarray:
    """All eigenvalues, each bracketed to width <= tol, ascending."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = m.n
    glo, ghi = gershgorin_interval(m)
    span = max(ghi - glo, tol)
    los = np.full(n, glo - 0.5 * tol)
    his = np.full(n, ghi + 0.5 * tol)
    need = np.arange(1, n + 1)
    sweeps = int(math.ceil(math.log2((span + tol) / tol))) + 2
    for _ in range(sweeps):
        mids = 0.5 * (los + his)
        counts = sturm_counts(m, mids)
        above = counts >= need
        his = np.where(above, mids, his)
        los = np.where(above, los, mids)
        if np.max(his - los) <= tol:
            break
    return 0.5 * (los + his)


# ---------------------------------------------------------------------------
# Floquet discriminant and band spectrum
# ---------------------------------------------------------------------------

def _transfer_product(p: PeriodicJacobi, x: float):
    """Ordered product T_{p-1} ... T_0 of one-step transfer matrices,
    rescaled when entries threaten overflow; returns (matrix, log_scale)."""
    a, b = p.a, p.b
    per = p.period
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    for j in range(per):
        ainv = 1.0 / a[j]
        t00 = (x - b[j]) * ainv
        t01 = -a[j - 1] * ainv  # cyclic: a_{-1} = a_{p-1}
        n00 = t00 * m00 + t01 * m10
        n01 = t00 * m01 + t01 * m11
        n10, n11 = m00, m01
        m00, m01, m10, m11 = n00, n01, n10, n11
        mx = max(abs(m00), abs(m01), abs(m10), abs(m11))
        if mx > 1e150:
            inv = 1.0 / mx
            m00 *= inv
            m01 *= inv
            m10 *= inv
            m11 *= inv
            log_scale += math.log(mx)
    return (m00, m01, m10, m11), log_scale


def discriminant(p: PeriodicJacobi, x: float) -> float:
    """Delta(x) = tr prod_j [[(x-b_j)/a_j, -a_{j-1}/a_j], [1, 0]], a_0 = a_p."""
    (m00, _, _, m11), log_scale = _transfer_product(p, float(x))
    tr = m00 + m11
    if log_scale == 0.0:
        return tr
    if log_scale < 700.0:
        return tr * math.exp(log_scale)
    if tr == 0.0:
        return 0.0
    return math.copysign(math.inf, tr)


def _scan_roots(f, lo: float, hi: float, n_grid: int, targets, width: float):
    """Grid-scan f over [lo, hi], bisect every sign change of f - c for each
    target c.  Returns ({c: sorted roots}, {c: change count})."""
    xs = np.linspace(lo, hi, n_grid)
    vals = np.array([f(x) for x in xs])
    roots: dict[float, list[float]] = {}
    counts: dict[float, int] = {}
    for c in targets:
        g = vals - c
        found = []
        changes = 0
        for i in range(len(xs) - 1):
            g0, g1 = g[i], g[i + 1]
            if g0 == 0.0:
                found.append(xs[i])
                continue
            if g1 == 0.0:
                continue
            if (g0 < 0) != (g1 < 0):
                changes += 1
                a_, b_ = xs[i], xs[i + 1]
                fa = g0
                while b_ - a_ > width:
                    mid = 0.5 * (a_ + b_)
                    fm = f(mid) - c
                    if fm == 0.0:
                        a_ = b_ = mid
                        break
                    if (fm < 0) == (fa < 0):
                        a_, fa = mid, fm
                    else:
                        b_ = mid
                found.append(0.5 * (a_ + b_))
        if g[-1] == 0.0:
            found.append(xs[-1])
        roots[c] = sorted(found)
        counts[c] = changes
    return roots, counts


def band_spectrum(p: PeriodicJacobi, tol: Tolerances = DEFAULT) -> RealSpectralSet:
    """{x : Delta(x) in [-2, 2]} as at most p disjoint closed bands.

    Band edges come from scan-then-bisection on Delta -+ 2 over the
    Gershgorin interval; the grid doubles until the sign pattern is stable
    across two refinements.  Double roots (closed gaps) produce no sign
    change and therefore never split a band.
    """
    glo, ghi = gershgorin_interval(p)
    pad = max(1e-6, 1e-9 * (ghi - glo))
    lo, hi = glo - pad, ghi + pad
    f = lambda x: discriminant(p, x)

    n_grid = 64 * p.period + 1
    prev_sig = None
    stable = 0
    for _ in range(10):
        roots, counts = _scan_roots(f, lo, hi, n_grid, (2.0, -2.0), tol.root)
        sig = (counts[2.0], counts[-2.0])
        if sig == prev_sig:
            stable += 1
            if stable >= 2:
                break
        else:
            stable = 0
        prev_sig = sig
        n_grid = 2 * (n_grid - 1) + 1
    else:
        raise ResolutionError(
            f"band-edge sign pattern did not stabilize at grid {n_grid}")
    if counts[2.0] > p.period or counts[-2.0] > p.period:
        raise ResolutionError(
            "more sign changes than polynomial degree allows; "
            f"scan resolution {n_grid} over [{lo}, {hi}]")

    edges = sorted(set(roots[2.0]) | set(roots[-2.0]))
    cuts = [lo] + edges + [hi]
    intervals = []
    for left, right in zip(cuts, cuts[1:]):
        if right - left <= 0:
            continue
        if abs(f(0.5 * (left + right))) <= 2.0:
            intervals.append((max(left, glo), min(right, ghi)))
    return canonical_line(intervals, (), tau=tol.merge)


# ---------------------------------------------------------------------------
# Weyl residuals and Bloch trial data
# ---------------------------------------------------------------------------

def weyl_residual(m: FiniteJacobi, lam: float, phi: np.ndarray) -> float:
    """||(J - lam) phi|| / ||phi|| for phi supported strictly inside the window."""
    phi = np.asarray(phi)
    if phi.shape != (m.n,):
        raise SupportError(f"phi must have length {m.n}")
    norm = np.linalg.norm(phi)
    if norm == 0:
        raise SupportError("phi must be nonzero")
    if m.n >= 2 and (phi[0] != 0 or phi[-1] != 0):
        raise SupportError("phi support must leave a one-entry margin "
                           "at both window edges")
    res = m.matvec(phi) - lam * phi
    return float(np.linalg.norm(res) / norm)


def bloch_vector(p: PeriodicJacobi, lam: float, length: int) -> np.ndarray:
    """Bounded two-sided solution of (J - lam) u = 0 sampled on length sites.

    Requires lam strictly inside a band (|Delta| < 2) so the monodromy has a
    unimodular eigenvalue pair; the complex Floquet solution is returned.
    """
    delta = discriminant(p, lam)
    if abs(delta) >= 2.0:
        raise ScenarioError(f"lam={lam} not in the open band interior "
                            f"(|Delta| = {abs(delta):.3f})")
    (m00, m01, m10, m11), log_scale = _transfer_product(p, lam)
    mono = np.array([[m00, m01], [m10, m11]]) * math.exp(log_scale)
    evals, evecs = np.linalg.eig(mono)
    k = int(np.argmax(np.abs(np.imag(evals))))
    v = evecs[:, k]  # (u_0, u_{-1})
    u = np.zeros(length, dtype=complex)
    u_prev, u_cur = v[1], v[0]
    u[0] = u_cur
    a, b = p.a, p.b
    per = p.period
    for n in range(length - 1):
        u_next = ((lam - b[n % per]) * u_cur - a[(n - 1) % per] * u_prev) / a[n % per]
        u_prev, u_cur = u_cur, u_next
        u[n + 1] = u_cur
    return u


# ---------------------------------------------------------------------------
# CSV serialization (index, a, b), 1-based rows, a blank on the last row
# ---------------------------------------------------------------------------

def to_csv(m: FiniteJacobi) -> str:
    buf = io.StringIO()
    buf.write("index,a,b\n")
    for k in range(m.n):
        a = repr(m.a[k]) if k < m.n - 1 else ""
        buf.write(f"{k + 1},{a},{m.b[k]!r}\n")
    return buf.getvalue()


def from_csv(text: str) -> FiniteJacobi:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    b = tuple(float(r[2]) for r in rows)
    a = tuple(float(r[1]) for r in rows if r[1] != "")
    return FiniteJacobi(b, a)
