"""CMV operator numerics.

The CMV matrix of Verblunsky coefficients {alpha_j} is the five-diagonal
unitary C = L M with L = Theta_0 + Theta_2 + ..., M = 1 + Theta_1 + ...,
where Theta(alpha) = [[conj(alpha), rho], [rho, -alpha]], rho^2 = 1 - |alpha|^2
and Theta_j acts on span(delta_j, delta_{j+1}).  The two-sided (extended)
version drops the 1 block: M~ = ... + Theta_{-1} + Theta_1 + ...

Also here: the Szego recursion for the monic polynomials, zeros of
paraorthogonal polynomials via a phase-winding scan (they are simple and
unimodular), and the discriminant D(theta) = e^{-ip theta/2} Tr T_p(e^{i theta})
of a periodic coefficient sequence, with band arcs {|D| <= 2}.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DomainError, ResolutionError, ScenarioError, WindowError
from .spectra import CircleSpectralSet, canonical_circle

TWO_PI = 2.0 * math.pi


def _rho(alpha: complex) -> float:
    # sqrt((1-|a|)(1+|a|)) stays accurate as |alpha| -> 1
    m = abs(alpha)
    return math.sqrt(max(0.0, (1.0 - m) * (1.0 + m)))


@dataclass(frozen=True)
class ThetaBlock:
    alpha: complex
    rho: float

    def matrix(self) -> np.ndarray:
        return np.array([[np.conj(self.alpha), self.rho],
                         [self.rho, -self.alpha]], dtype=complex)


def theta(alpha: complex) -> ThetaBlock:
    alpha = complex(alpha)
    m = abs(alpha)
    if m > 1.0 + 1e-14:
        raise DomainError(f"|alpha| = {m} exceeds 1 beyond tolerance")
    if m > 1.0:
        alpha /= m
    return ThetaBlock(alpha, _rho(alpha))


# ---------------------------------------------------------------------------
# finite CMV matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteCMV:
    """Principal n x n block of C = L M, possibly with the last coefficient
    replaced by a unimodular beta (paraorthogonal mode, which makes the block
    unitary)."""

    alpha: tuple[complex, ...]
    boundary: str  # "truncated" | "paraorthogonal"

    @property
    def n(self) -> int:
        return len(self.alpha)

    def dense(self) -> np.ndarray:
        return _cmv_entries(lambda j: -1.0 if j == -1 else self.alpha[j], 0, self.n)

    def is_unitary(self, tol: float = 1e-12) -> bool:
        c = self.dense()
        return bool(np.max(np.abs(c.conj().T @ c - np.eye(self.n))) < tol)


def _cmv_entries(alpha, lo: int, hi: int) -> np.ndarray:
    """Rows/columns lo..hi-1 of the (extended) CMV matrix from coefficients
    alpha(j); the one-sided matrix is the special case alpha(-1) = -1, lo = 0.

    Row pattern (all j in Z, rho_j = rho(alpha_j)):
      C(2k,   2k-1) = conj(a_2k) r_{2k-1}     C(2k+1, 2k-1) = r_2k r_{2k-1}
      C(2k,   2k)   = -conj(a_2k) a_{2k-1}    C(2k+1, 2k)   = -r_2k a_{2k-1}
      C(2k,   2k+1) = r_2k conj(a_{2k+1})     C(2k+1, 2k+1) = -a_2k conj(a_{2k+1})
      C(2k,   2k+2) = r_2k r_{2k+1}           C(2k+1, 2k+2) = -a_2k r_{2k+1}
    """
    n = hi - lo
    out = np.zeros((n, n), dtype=complex)

    def put(i, j, v):
        if lo <= j < hi:
            out[i - lo, j - lo] = v

    for i in range(lo, hi):
        if i % 2 == 0:
            a_i, a_m = complex(alpha(i)), complex(alpha(i - 1))
            a_p = complex(alpha(i + 1)) if i + 1 < hi else 0.0
            r_i, r_m = _rho(a_i), _rho(a_m)
            put(i, i - 1, np.conj(a_i) * r_m)
            put(i, i, -np.conj(a_i) * a_m)
            if i + 1 < hi:
                put(i, i + 1, r_i * np.conj(a_p))
                put(i, i + 2, r_i * _rho(a_p))
        else:
            a_i, a_m = complex(alpha(i)), complex(alpha(i - 1))
            a_mm = complex(alpha(i - 2))
            r_i, r_m = _rho(a_i), _rho(a_m)
            put(i, i - 2, r_m * _rho(a_mm))
            put(i, i - 1, -r_m * a_mm)
            put(i, i, -a_m * np.conj(a_i))
            if i + 1 < hi:
                put(i, i + 1, -a_m * r_i)
    return out


def build_cmv(alpha, boundary: str = "truncated", beta: complex | None = None) -> FiniteCMV:
    """Finite CMV block from n Verblunsky coefficients.

    ``paraorthogonal`` replaces the final coefficient by beta on the unit
    circle, decoupling the matrix from the rest of the half line.
    """
    coeffs = [theta(a).alpha for a in alpha]
    if not coeffs:
        raise ScenarioError("build_cmv needs at least one coefficient")
    if boundary == "paraorthogonal":
        if beta is None:
            raise DomainError("paraorthogonal mode needs beta")
        beta = complex(beta)
        if abs(abs(beta) - 1.0) > 1e-12:
            raise DomainError(f"|beta| = {abs(beta)} must be 1")
        coeffs[-1] = beta / abs(beta)
    elif boundary != "truncated":
        raise ScenarioError(f"unknown boundary mode {boundary!r}")
    return FiniteCMV(tuple(coeffs), boundary)


def build_extended_cmv_window(alpha, lo: int, hi: int) -> np.ndarray:
    """Rows/columns lo..hi-1 of the extended CMV matrix C~ = L~ M~.

    ``alpha`` maps any index in [lo-2, hi+1] to a coefficient in the closed
    unit disk; a missing index raises a window error.
    """
    def wrapped(j):
        try:
            v = alpha(j)
        except (KeyError, IndexError) as exc:
            raise WindowError(
                f"extended window needs alpha at index {j} "
                f"(one-block margin around [{lo}, {hi}))") from exc
        if v is None:
            raise WindowError(f"extended window needs alpha at index {j}")
        return theta(v).alpha

    if hi <= lo:
        raise WindowError("empty window")
    return _cmv_entries(wrapped, lo, hi)


def to_triplets_csv(c: FiniteCMV) -> str:
    buf = io.StringIO()
    buf.write("row,col,re,im\n")
    m = c.dense()
    rows, cols = np.nonzero(m)
    for i, j in sorted(zip(rows.tolist(), cols.tolist())):
        v = m[i, j]
        buf.write(f"{i},{j},{v.real!r},{v.imag!r}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Szego recursion
# ---------------------------------------------------------------------------

def szego_phi(alpha, z: complex) -> tuple[complex, complex]:
    """Monic OPUC pair (Phi_n, Phi*_n) from Phi_0 = Phi*_0 = 1:
    Phi_{k+1} = z Phi_k - conj(alpha_k) Phi*_k,  Phi*_{k+1} = Phi*_k - alpha_k z Phi_k.
    """
    phi, phis = complex(1.0), complex(1.0)
    for a in alpha:
        a = complex(a)
        phi, phis = z * phi - np.conj(a) * phis, phis - a * z * phi
    return phi, phis


def _szego_scaled(alphas, zs: np.ndarray):
    """(Phi, Phi*, log of the positive rescaling) vectorized over z, with
    periodic renormalization so nothing overflows at large degree."""
    phi = np.ones_like(zs, dtype=complex)
    phis = np.ones_like(zs, dtype=complex)
    logs = np.zeros(zs.shape, dtype=float)
    for k, a in enumerate(alphas):
        a = complex(a)
        phi, phis = zs * phi - np.conj(a) * phis, phis - a * zs * phi
        if (k + 1) % 64 == 0:
            mag = np.maximum(np.abs(phi), np.abs(phis))
            mag = np.where(mag > 0, mag, 1.0)
            phi /= mag
            phis /= mag
            logs += np.log(mag)
    return phi, phis, logs


def _refine_brackets(f, los, f_los, his, f_his, tol: float) -> list[float]:
    """Vectorized bisection on sign-change brackets, evaluating only the
    still-active ones.  Bisection (sign information alone) is the right tool
    here: near exponentially pinched zeros the function values span hundreds
    of orders of magnitude and secant-type steps stall."""
    los = los.copy()
    his = his.copy()
    f_los = f_los.copy()
    # an exact zero on the grid sneaks in as f = 0 at an endpoint
    hit_lo = f_los == 0.0
    his[hit_lo] = los[hit_lo]
    hit_hi = f_his == 0.0
    los[hit_hi] = his[hit_hi]
    f_los[hit_hi] = 0.0
    for _ in range(64):
        active = (his - los) > tol
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        mids = 0.5 * (los[idx] + his[idx])
        fm = f(mids)
        exact = fm == 0.0
        go_right = ((fm < 0) == (f_los[idx] < 0)) & ~exact
        lo_new = np.where(go_right | exact, mids, los[idx])
        hi_new = np.where(go_right & ~exact, his[idx], mids)
        los[idx] = lo_new
        his[idx] = hi_new
        f_los[idx] = np.where(go_right, fm, f_los[idx])
    return (0.5 * (los + his)).tolist()


def paraorthogonal_zeros(alpha, beta: complex, tol: float = DEFAULT.zero_angle,
                         max_refine: int = 6) -> np.ndarray:
    """The n zeros (n = len(alpha) + 1) of z Phi_{n-1}(z) - conj(beta) Phi*_{n-1}(z),
    as sorted angles in [0, 2pi).

    On |z| = 1 the function equals a unimodular rotor times a real function
    R(theta); the zeros are simple, so they are located as sign changes of R
    on a refining grid (8n points initially) and bisected to angular
    tolerance ``tol``.  A winding-count mismatch (found != n) after maximal
    refinement raises a resolution error.
    """
    alpha = [complex(a) for a in alpha]
    if any(abs(a) >= 1.0 for a in alpha):
        raise DomainError("paraorthogonal zeros need interior |alpha_j| < 1")
    beta = complex(beta)
    if abs(abs(beta) - 1.0) > 1e-12:
        raise DomainError("beta must lie on the unit circle")
    beta /= abs(beta)
    n = len(alpha) + 1
    phi_beta = math.atan2(beta.imag, beta.real)

    def rval(thetas: np.ndarray) -> np.ndarray:
        zs = np.exp(1j * thetas)
        phi, phis, _ = _szego_scaled(alpha, zs)
        f = zs * phi - np.conj(beta) * phis
        rotor = np.exp(-0.5j * (n * thetas + math.pi - phi_beta))
        return (f * rotor).real

    m = 8 * n
    for _ in range(max_refine + 1):
        thetas = np.arange(m + 1) * (TWO_PI / m)
        vals = rval(thetas[:-1])
        vals = np.append(vals, vals[0] * (-1.0) ** n)  # R(2pi) = (-1)^n R(0)
        zeros = []
        brackets = []
        for k in range(m):
            v0, v1 = vals[k], vals[k + 1]
            if v0 == 0.0:
                zeros.append(thetas[k])
            elif v1 != 0.0 and (v0 < 0) != (v1 < 0):
                brackets.append((thetas[k], thetas[k + 1], v0, v1))
        if brackets:
            los = np.array([b[0] for b in brackets])
            his = np.array([b[1] for b in brackets])
            f_los = np.array([b[2] for b in brackets])
            f_his = np.array([b[3] for b in brackets])
            zeros.extend(_refine_brackets(rval, los, f_los, his, f_his, tol))
        zeros = sorted(t % TWO_PI for t in zeros)
        if len(zeros) == n:
            return np.array(zeros)
        m *= 2
    raise ResolutionError(
        f"found {len(zeros)} zero candidates, expected {n}, at grid {m // 2}")


# ---------------------------------------------------------------------------
# periodic coefficients: discriminant and band arcs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicVerblunsky:
    alpha: tuple[complex, ...]

    def __post_init__(self):
        if not self.alpha:
            raise ScenarioError("PeriodicVerblunsky needs a nonempty table")
        if max(abs(a) for a in self.alpha) >= 1.0:
            raise DomainError("PeriodicVerblunsky needs |alpha_j| < 1 "
                              "(unimodular entries decouple; use diagonal limits)")

    @property
    def period(self) -> int:
        return len(self.alpha)

    def rotated(self, lam: complex) -> "PeriodicVerblunsky":
        return PeriodicVerblunsky(tuple(lam * a for a in self.alpha))


def _cmv_disc_complex(p: PeriodicVerblunsky, th: float) -> complex:
    z = complex(math.cos(th), math.sin(th))
    m = np.eye(2, dtype=complex)
    for a in p.alpha:
        r = _rho(a)
        step = np.array([[z, -np.conj(a)], [-a * z, 1.0]], dtype=complex) / r
        m = step @ m
    pref = complex(math.cos(0.5 * p.period * th), -math.sin(0.5 * p.period * th))
    return pref * (m[0, 0] + m[1, 1])


def cmv_discriminant(p: PeriodicVerblunsky, th: float) -> float:
    """D(theta) = e^{-ip theta/2} Tr prod_j rho_j^{-1} [[z, -conj(a_j)], [-a_j z, 1]],
    z = e^{i theta}, theta in [0, 4pi) (double cover; for odd p,
    D(theta + 2pi) = -D(theta)).  Real on the unit circle; the imaginary part
    is a rounding diagnostic and is asserted small.
    """
    d = _cmv_disc_complex(p, float(th))
    if abs(d.imag) > 1e-10 * max(1.0, abs(d.real)):
        raise ResolutionError(
            f"discriminant imaginary part {d.imag:.3e} exceeds diagnostic bound")
    return d.real


def cmv_band_arcs(p: PeriodicVerblunsky, tol: Tolerances = DEFAULT) -> CircleSpectralSet:
    """{theta mod 2pi : |D(theta)| <= 2}: at most p disjoint closed arcs.

    theta is scanned over the double cover [0, 4pi] (so odd periods need no
    branch bookkeeping) and the resulting segments are projected mod 2pi.
    """
    f = lambda th: cmv_discriminant(p, th)
    n_grid = 64 * p.period + 1
    from .jacobi import _scan_roots  # same scan-then-bisect machinery
    prev_sig = None
    stable = 0
    for _ in range(10):
        roots, counts = _scan_roots(f, 0.0, 2.0 * TWO_PI, n_grid, (2.0, -2.0), tol.root)
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
            f"arc-edge sign pattern did not stabilize at grid {n_grid}")
    if counts[2.0] > 2 * p.period or counts[-2.0] > 2 * p.period:
        raise ResolutionError("more arc edges than the double cover allows")

    edges = sorted(set(roots[2.0]) | set(roots[-2.0]))
    cuts = [0.0] + edges + [2.0 * TWO_PI]
    segments = []
    for left, right in zip(cuts, cuts[1:]):
        if right - left <= 0:
            continue
        if abs(f(0.5 * (left + right))) <= 2.0:
            segments.append((left, right))
    # project the double cover onto [0, 2pi)
    arcs = []
    for left, right in segments:
        for shift in (0.0, TWO_PI):
            lo = max(left, shift)
            hi = min(right, shift + TWO_PI)
            if hi > lo:
                arcs.append((lo - shift, hi - shift))
    return canonical_circle(arcs, (), tau=tol.merge)
