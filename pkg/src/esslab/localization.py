"""Tent partitions of unity and the localization estimate they power.

The tent of scale L is psi_L(n) = (n-1)/L on n = 1..L and (2L-1-n)/L on
n = L..2L-1 (zero elsewhere); its translates j_alpha(n) = psi_L(n-alpha)/c_L
with c_L^2 = sum psi_L^2 satisfy sum_alpha j_alpha^2 = 1.  For a Jacobi
operator J the commutator error operator

    C = 2 sum_alpha [j_alpha, J]^* [j_alpha, J]

controls localization: some alpha has
||(J-lam) j_alpha phi||^2 <= {2 (||(J-lam) phi|| / ||phi||)^2 + ||C||} ||j_alpha phi||^2,
and ||C|| = O(L^-2).

Because [j_alpha, J] only has first off-diagonal entries, every
[j,J]^*[j,J] lives on offsets {0, +-2}; summing over all alpha gives an
exact translation-invariant autocorrelation, so C is assembled in closed
form and splits into two independent tridiagonal chains (even and odd
sites).  Its norm is therefore computed by the same certified Sturm
bisection used for eigenvalues, not by power iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import ScenarioError, SupportError, WindowError
from .jacobi import FiniteJacobi, gershgorin_interval, sturm_counts
from .sequences import ScenarioSpec


# ---------------------------------------------------------------------------
# tents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TentPartition:
    scale: int
    psi: tuple[float, ...]  # psi_L(1), ..., psi_L(2L-1)
    c: float

    @property
    def degenerate(self) -> bool:
        return self.c == 0.0


def tent_values(scale: int) -> TentPartition:
    if scale < 1:
        raise ScenarioError("tent scale must be >= 1")
    psi = []
    for n in range(1, 2 * scale):
        if n <= scale:
            psi.append((n - 1) / scale)
        else:
            psi.append((2 * scale - 1 - n) / scale)
    c = math.sqrt(sum(v * v for v in psi))
    return TentPartition(scale, tuple(psi), c)


def _psi_at(tent: TentPartition, m: int) -> float:
    # psi_L(m) for any integer m; support is [1, 2L-1]
    if 1 <= m <= 2 * tent.scale - 1:
        return tent.psi[m - 1]
    return 0.0


@dataclass(frozen=True)
class PartitionIdentityReport:
    residual: float
    boundary: bool
    boundary_sums: tuple[tuple[int, float], ...]


def partition_identity_residual(scale: int, sites) -> PartitionIdentityReport:
    """sup over sites of |sum_{alpha>=1} j_{alpha,L}(n)^2 - 1| (1-based sites).

    Exact translation invariance makes the sum identically 1 for n >= 2L;
    sites closer to the origin report their true (sub-unit) sums and flag
    the boundary.
    """
    tent = tent_values(scale)
    if tent.degenerate:
        raise ScenarioError("L = 1 tent is identically zero (degenerate scale)")
    c2 = tent.c ** 2
    worst = 0.0
    boundary = []
    for n in sites:
        if n < 1:
            raise ScenarioError(f"site {n} below the stream origin")
        total = sum(_psi_at(tent, n - alpha) ** 2
                    for alpha in range(max(1, n - 2 * scale + 1), n))
        resid = abs(total / c2 - 1.0)
        if n < 2 * scale:
            boundary.append((n, total / c2))
        worst = max(worst, resid)
    return PartitionIdentityReport(worst, bool(boundary), tuple(boundary))


# ---------------------------------------------------------------------------
# the commutator operator C on a window
# ---------------------------------------------------------------------------

def _step_autocorrelation(scale: int) -> tuple[float, float]:
    """(corr0, corr1) of the tent increment sequence psi(m+1) - psi(m):
    corr_k = sum_m step(m) step(m-k).  The increments are (L-1) values +1/L
    followed by (L-1) values -1/L, so corr0 = (2L-2)/L^2 and
    corr1 = (2L-5)/L^2 (one sign flip at the apex)."""
    L = scale
    if L == 1:
        return 0.0, 0.0
    corr0 = (2 * L - 2) / L ** 2
    corr1 = (2 * L - 5) / L ** 2 if L >= 2 else 0.0
    return corr0, corr1


def commutator_bands(window: FiniteJacobi, scale: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and second-off-diagonal of C = 2 sum_alpha [j_a, J]*[j_a, J]
    on the window (first off-diagonal vanishes identically).

    Summing the tent translates over all alpha turns the alpha-sum into the
    autocorrelation of the tent increments:
      C(n, n)   = 2 c_L^-2 corr0 (a_{n-1}^2 + a_n^2)
      C(n, n+2) = -2 c_L^-2 corr1 a_n a_{n+1}
    """
    tent = tent_values(scale)
    if tent.degenerate:
        raise ScenarioError("degenerate tent (L = 1) gives C = 0")
    corr0, corr1 = _step_autocorrelation(scale)
    c2inv = 1.0 / tent.c ** 2
    w = window.n
    a = np.zeros(w + 1)
    if window.a:
        a[1:w] = np.asarray(window.a, dtype=float)
    diag = 2.0 * c2inv * corr0 * (a[:-1] ** 2 + a[1:] ** 2)
    off2 = -2.0 * c2inv * corr1 * a[1:w - 1] * a[2:w] if w >= 3 else np.zeros(0)
    return diag, off2


def _lambda_max_tridiag(diag: np.ndarray, off: np.ndarray, rel_tol: float) -> float:
    fj = FiniteJacobi(tuple(diag.tolist()), tuple(np.abs(off).tolist()))
    lo, hi = gershgorin_interval(fj)
    hi += max(1.0, abs(hi)) * 1e-12
    n = fj.n
    scale = max(abs(lo), abs(hi), 1e-30)
    while hi - lo > rel_tol * scale:
        mid = 0.5 * (lo + hi)
        if sturm_counts(fj, np.array([mid]))[0] >= n:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def commutator_C_norm(spec: ScenarioSpec, scale: int, window_start: int,
                      window_len: int, tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """(||C||, ||C|| L^2) for the window [window_start, window_start + window_len).

    Needs window_len >= 8L.  C splits into even/odd tridiagonal chains, so
    the norm is the larger chain's top eigenvalue, bisected to relative
    accuracy tol.cnorm_rel.
    """
    if not spec.is_jacobi:
        raise ScenarioError("commutator_C_norm needs a Jacobi scenario")
    if window_len < 8 * scale:
        raise WindowError(f"window length {window_len} < 8 L = {8 * scale}")
    pairs = [spec.value(window_start + k) for k in range(window_len)]
    b = tuple(p[1] for p in pairs)
    a = tuple(pairs[k][0] for k in range(window_len - 1))
    return commutator_C_norm_window(FiniteJacobi(b, a), scale, tol)


def commutator_C_norm_window(window: FiniteJacobi, scale: int,
                             tol: Tolerances = DEFAULT) -> tuple[float, float]:
    diag, off2 = commutator_bands(window, scale)
    norm = 0.0
    for start in (0, 1):
        d = diag[start::2]
        o = off2[start::2]
        if len(d) == 0:
            continue
        norm = max(norm, _lambda_max_tridiag(d, o[:len(d) - 1], tol.cnorm_rel))
    return norm, norm * scale * scale


# ---------------------------------------------------------------------------
# trial-function localization (the alpha-selection estimate)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizeResult:
    alpha: int
    vector: np.ndarray
    ratio: float
    bound: float  # sqrt(2 (||A phi||/||phi||)^2 + ||C||)


def tent_weights(scale: int, alpha: int, length: int) -> np.ndarray:
    """j_alpha(n) = psi_L(n - alpha) / c_L on window sites 0..length-1."""
    tent = tent_values(scale)
    if tent.degenerate:
        raise ScenarioError("L = 1 tent is identically zero (degenerate scale)")
    return np.array([_psi_at(tent, n - alpha) for n in range(length)]) / tent.c


def commutator_apply(diag: np.ndarray, off2: np.ndarray, phi: np.ndarray) -> np.ndarray:
    out = diag * phi
    if len(off2):
        out[:-2] = out[:-2] + off2 * phi[2:]
        out[2:] = out[2:] + off2 * phi[:-2]
    return out


def commutator_quadratic_form(window: FiniteJacobi, scale: int, phi: np.ndarray) -> float:
    """<phi, C phi> from the closed-form bands."""
    phi = np.asarray(phi, dtype=complex)
    diag, off2 = commutator_bands(window, scale)
    return float(np.real(np.vdot(phi, commutator_apply(diag, off2, phi))))


def localize_trial(window: FiniteJacobi, lam: float, phi: np.ndarray, scale: int,
                   tol: Tolerances = DEFAULT) -> LocalizeResult:
    """Pick the tent translate minimizing ||(J-lam) j_a phi|| / ||j_a phi||.

    The minimizer obeys ratio^2 <= 2 (||(J-lam)phi||/||phi||)^2 + ||C||;
    a floating-point violation beyond a 1e-10 relative grace raises.
    """
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (window.n,):
        raise SupportError(f"phi must have length {window.n}")
    nrm = np.linalg.norm(phi)
    if nrm == 0:
        raise SupportError("phi must be nonzero on the window")
    w = window.n
    best = None
    for alpha in range(1 - 2 * scale, w - 1):
        weights = tent_weights(scale, alpha, w)
        v = weights * phi
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        ratio = np.linalg.norm(window.matvec(v) - lam * v) / vn
        if best is None or ratio < best[1]:
            best = (alpha, float(ratio), v)
    if best is None:
        raise SupportError("all tent translates annihilate phi")
    base = np.linalg.norm(window.matvec(phi) - lam * phi) / nrm
    cnorm, _ = commutator_C_norm_window(window, scale, tol)
    bound_sq = 2.0 * base * base + cnorm
    alpha, ratio, vec = best
    if ratio * ratio > bound_sq * (1.0 + 1e-10):
        raise ScenarioError(
            f"localization inequality violated: ratio^2 = {ratio**2:.6e} "
            f"> bound = {bound_sq:.6e}")
    return LocalizeResult(alpha, vec, ratio, math.sqrt(bound_sq))
