"""Right limits of parameter streams.

A right limit of a one-sided stream is a two-sided operator obtained as an
entrywise limit of windows centered at n_j -> infinity.  For the structural
scenario classes the right-limit set is known exactly (translates of a
periodic core, a parametrized torus family, diagonal operators, bump
translates, ...); for arbitrary tables a greedy sup-norm window-clustering
detector approximates it.

limit_spectrum dispatches each two-sided structure to the matching spectral
computation: periodic cores go through the discriminant, diagonal operators
are multiplication operators, block sums collect finite-block eigenvalues,
and raw windows fall back to central-window truncation eigenvalues (always
labeled approximate).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import ScenarioError, UnsupportedClassError, WindowError
from .jacobi import FiniteJacobi, PeriodicJacobi, band_spectrum, eigenvalues
from .cmv import PeriodicVerblunsky, cmv_band_arcs, paraorthogonal_zeros
from .sequences import (ParamWindow, ScenarioSpec, TWO_PI, make_decay,
                        make_slip, window)
from .spectra import (CircleSpectralSet, PointCloud, RealSpectralSet,
                      canonical_circle, canonical_line, cloud_to_set,
                      union_and_close)

# ---------------------------------------------------------------------------
# two-sided limit structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicCoreLimit:
    core: object  # PeriodicJacobi | PeriodicVerblunsky
    provenance: str = ""
    tag = "periodic_core"
    approximate = False


@dataclass(frozen=True)
class DiagonalLimit:
    """Diagonal two-sided operator: real multiplication values for Jacobi
    (a == 0 limits; +-inf markers allowed), unimodular complex diagonal for
    decoupled CMV limits."""

    values: tuple
    family: str
    provenance: str = ""
    tag = "diagonal"
    approximate = False


@dataclass(frozen=True)
class BlockSumLimit:
    blocks: tuple
    family: str
    provenance: str = ""
    tag = "block_sum"
    approximate = False


@dataclass(frozen=True)
class RawWindowLimit:
    """Explicit two-sided table on [-halfwidth, halfwidth]; value(j) returns
    an (a, b) pair or alpha.  Spectra from this structure are approximate."""

    value: Callable[[int], object]
    halfwidth: int
    family: str
    provenance: str = ""
    tag = "raw_window"
    approximate = True


@dataclass
class RightLimitSet:
    members: list
    family: str
    provenance: str
    family_sampler: Callable[[int], list] | None = None
    default_grid: int = 0

    @property
    def parametrized(self) -> bool:
        return self.family_sampler is not None

    def sampled_members(self, grid: int | None = None) -> list:
        if not self.parametrized:
            return list(self.members)
        return self.family_sampler(grid or self.default_grid)

    def to_jsonable(self) -> dict:
        return {
            "family": self.family,
            "provenance": self.provenance,
            "parametrized": self.parametrized,
            "member_count": len(self.members),
            "members": [describe_member(m) for m in self.members[:64]],
        }


def describe_member(m) -> dict:
    out = {"structure": m.tag, "provenance": m.provenance}
    if isinstance(m, PeriodicCoreLimit):
        core = m.core
        if isinstance(core, PeriodicJacobi):
            out["a"] = list(core.a)
            out["b"] = list(core.b)
        else:
            out["alpha"] = [[z.real, z.imag] for z in core.alpha]
    elif isinstance(m, DiagonalLimit):
        if m.family == "jacobi":
            out["values"] = [v if math.isfinite(v) else repr(v) for v in m.values]
        else:
            out["values"] = [[z.real, z.imag] for z in m.values]
    elif isinstance(m, BlockSumLimit):
        out["block_sizes"] = [getattr(b, "n", len(b)) for b in m.blocks]
    elif isinstance(m, RawWindowLimit):
        out["halfwidth"] = m.halfwidth
    return out


# ---------------------------------------------------------------------------
# structural right limits per scenario class
# ---------------------------------------------------------------------------

def right_limit_set(spec: ScenarioSpec) -> RightLimitSet:
    """Exact structural description of the right-limit set.

    CustomTable streams have no certified structural route; use
    detect_right_limits for those.
    """
    handler = _HANDLERS.get((spec.family, spec.kind))
    if handler is None:
        raise UnsupportedClassError(
            f"no structural right-limit route for {spec.family}/{spec.kind}; "
            "use detect_right_limits")
    return handler(spec)


def _jacobi_periodic(spec):
    p = spec.params
    core = PeriodicJacobi(tuple(float(x) for x in p["a"]),
                          tuple(float(x) for x in p["b"]))
    members = [PeriodicCoreLimit(core.translate(s), f"translate+{s}")
               for s in range(core.period)]
    return RightLimitSet(members, "jacobi", "cyclic translates of the periodic core")


def _cmv_periodic(spec):
    def as_complex(v):
        if isinstance(v, (list, tuple)):
            return complex(float(v[0]), float(v[1]))
        return complex(v)

    table = [as_complex(v) for v in spec.params["alpha"]]
    core = PeriodicVerblunsky(tuple(table))
    members = []
    for s in range(core.period):
        rot = core.alpha[s:] + core.alpha[:s]
        members.append(PeriodicCoreLimit(PeriodicVerblunsky(rot), f"translate+{s}"))
    return RightLimitSet(members, "cmv", "cyclic translates of the periodic core")


def _jacobi_slipped(spec):
    from .sequences import CosSeries
    p = spec.params
    period = int(p["period"])
    b_series = CosSeries.parse(p["b_series"], 1)
    a_series = CosSeries.parse(p["a_series"], 1) if p.get("a_series") else None
    scale = TWO_PI / period

    def member_at(x: float) -> PeriodicCoreLimit:
        b = tuple(b_series.eval_at_angles(((j + x) * scale,)) for j in range(period))
        if a_series is None:
            a = (1.0,) * period
        else:
            a = tuple(a_series.eval_at_angles(((j + x) * scale,)) for j in range(period))
        return PeriodicCoreLimit(PeriodicJacobi(a, b), f"phase x={x:.6f}")

    def sampler(m: int) -> list:
        return [member_at(i / m) for i in range(m)]

    return RightLimitSet(sampler(32), "jacobi",
                         "translation family of the slipped periodic core",
                         family_sampler=sampler, default_grid=32)


def _jacobi_quasi(spec):
    from .sequences import CosSeries
    p = spec.params
    freq = tuple(float(f) for f in p["freq"])
    series = CosSeries.parse(p["b_function"], len(freq))
    a_const = float(p.get("a_const", 1.0))
    dim = len(freq)
    halfwidth = int(spec.declared.get("raw_halfwidth", 256))

    def member_at(xs: tuple) -> RawWindowLimit:
        def value(j: int, _xs=xs):
            theta = tuple(freq[i] * j + _xs[i] for i in range(dim))
            return (a_const, series.eval_at_angles(theta))

        label = ",".join(f"{x:.6f}" for x in xs)
        return RawWindowLimit(value, halfwidth, "jacobi", f"torus phase ({label})")

    def sampler(m: int) -> list:
        grids = [tuple()]
        for _ in range(dim):
            grids = [g + (TWO_PI * i / m,) for g in grids for i in range(m)]
        return [member_at(g) for g in grids]

    grid = 24 if dim == 1 else 8
    return RightLimitSet(sampler(grid), "jacobi",
                         "sampling-function family over the phase torus "
                         "(members are almost periodic; spectra approximate)",
                         family_sampler=sampler, default_grid=grid)


def _jacobi_sparse(spec):
    p = spec.params
    back_a = float(p.get("background", {}).get("a", 1.0))
    back_b = float(p.get("background", {}).get("b", 0.0))
    bump_b = [float(x) for x in p["bump_b"]]
    bump_a = [float(x) for x in p["bump_a"]] if p.get("bump_a") else None
    free = PeriodicCoreLimit(PeriodicJacobi((back_a,), (back_b,)), "gap windows")
    width = len(bump_b)
    halfwidth = int(spec.declared.get("raw_halfwidth", 192))

    def value(j: int):
        if 0 <= j < width:
            a = bump_a[j] if (bump_a and j < len(bump_a)) else back_a
            return (a, bump_b[j])
        return (back_a, back_b)

    bump = RawWindowLimit(value, halfwidth, "jacobi", "bump-centered windows")
    return RightLimitSet([free, bump], "jacobi",
                         "free background plus one bump translate")


def _jacobi_decaying(spec):
    table = [float(x) for x in spec.params["b_table"]]
    q = len(table)
    members = [DiagonalLimit(tuple(table[s:] + table[:s]), "jacobi", f"translate+{s}")
               for s in range(q)]
    return RightLimitSet(members, "jacobi",
                         "a_n -> 0: diagonal limits running through the b-limit set")


def _jacobi_torus(spec):
    members = []
    for k, m in enumerate(spec.params["torus"]["members"]):
        core = PeriodicJacobi(tuple(float(x) for x in m["a"]),
                              tuple(float(x) for x in m["b"]))
        for s in range(core.period):
            members.append(PeriodicCoreLimit(core.translate(s),
                                             f"torus member {k} translate+{s}"))
    return RightLimitSet(members, "jacobi", "declared isospectral family members")


def _cmv_rotated_family(modulus: float, provenance: str):
    def member_at(t: float) -> PeriodicCoreLimit:
        lam = cmath.exp(2j * math.pi * t)
        return PeriodicCoreLimit(PeriodicVerblunsky((lam * modulus,)),
                                 f"lambda = exp(2 pi i {t:.6f})")

    def sampler(m: int) -> list:
        return [member_at(i / m) for i in range(m)]

    return RightLimitSet(sampler(16), "cmv", provenance,
                         family_sampler=sampler, default_grid=16)


def _cmv_barrios(spec):
    return _cmv_rotated_family(
        float(spec.params["modulus"]),
        "rotated constant sequences lambda*a over the unit circle")


def _cmv_torus(spec):
    return _cmv_rotated_family(
        float(spec.params["torus"]["modulus"]),
        "rotated constant isospectral torus (asymptotic target)")


def _cmv_decaying(spec):
    phases = [float(x) for x in spec.params["phase_table"]]
    q = len(phases)
    lam = [cmath.exp(1j * ph) for ph in phases]
    members = []
    for s in range(q):
        rot = lam[s:] + lam[:s]
        diag = tuple(-rot[(j + 1) % q].conjugate() * rot[j] for j in range(q))
        members.append(DiagonalLimit(diag, "cmv", f"translate+{s}"))
    return RightLimitSet(members, "cmv",
                         "|alpha_n| -> 1: decoupled diagonal extended CMV limits")


_HANDLERS = {
    ("jacobi", "periodic"): _jacobi_periodic,
    ("jacobi", "slipped_periodic"): _jacobi_slipped,
    ("jacobi", "quasi_periodic"): _jacobi_quasi,
    ("jacobi", "sparse"): _jacobi_sparse,
    ("jacobi", "decaying_a"): _jacobi_decaying,
    ("jacobi", "torus_asymptotic"): _jacobi_torus,
    ("cmv", "periodic"): _cmv_periodic,
    ("cmv", "barrios_lopez"): _cmv_barrios,
    ("cmv", "torus_asymptotic"): _cmv_torus,
    ("cmv", "decaying_a"): _cmv_decaying,
}


# ---------------------------------------------------------------------------
# numeric detector
# ---------------------------------------------------------------------------

@dataclass
class LimitCluster:
    representative: ParamWindow
    centers: list[int]
    radius: float
    recurrent: bool

    def to_jsonable(self) -> dict:
        return {
            "center": self.representative.center,
            "halfwidth": self.representative.halfwidth,
            "n_members": len(self.centers),
            "radius": self.radius,
            "recurrent": self.recurrent,
        }


def _window_dist(u: ParamWindow, v: ParamWindow) -> float:
    worst = 0.0
    for x, y in zip(u.values, v.values):
        if x is None or y is None:
            if x is not y:
                return math.inf
            continue
        if isinstance(x, tuple):
            worst = max(worst, abs(x[0] - y[0]), abs(x[1] - y[1]))
        else:
            worst = max(worst, abs(x - y))
    return worst


def detect_right_limits(spec: ScenarioSpec, halfwidth: int, centers,
                        eps: float) -> list[LimitCluster]:
    """Greedy sup-norm clustering of stream windows.

    Clusters are ordered by first appearance; a cluster is flagged transient
    (recurrent=False) unless it reappears in the top decade of centers, since
    a right limit needs witnesses along a subsequence tending to infinity.
    """
    centers = sorted(int(c) for c in centers)
    if not centers:
        raise ScenarioError("detect_right_limits needs a nonempty center schedule")
    if centers[0] <= halfwidth:
        raise ScenarioError("centers must exceed the window halfwidth")
    top = centers[-1] / 10.0
    clusters: list[LimitCluster] = []
    for c in centers:
        w = window(spec, c, halfwidth)
        placed = False
        for cl in clusters:
            d = _window_dist(cl.representative, w)
            if d <= eps:
                cl.centers.append(c)
                cl.radius = max(cl.radius, d)
                placed = True
                break
        if not placed:
            clusters.append(LimitCluster(w, [c], 0.0, False))
    for cl in clusters:
        cl.recurrent = any(c >= top for c in cl.centers)
    return clusters


def cluster_to_member(cl: LimitCluster, family: str) -> RawWindowLimit:
    rep = cl.representative
    vals = rep.values

    def value(j: int, _vals=vals, _h=rep.halfwidth):
        idx = j + _h
        if 0 <= idx < len(_vals) and _vals[idx] is not None:
            return _vals[idx]
        raise WindowError(f"cluster window has no value at offset {j}")

    return RawWindowLimit(value, rep.halfwidth, family,
                          f"detected cluster at center {rep.center}")


# ---------------------------------------------------------------------------
# spectra of two-sided limits
# ---------------------------------------------------------------------------

def limit_spectrum(member, tol: Tolerances = DEFAULT, gap_tol: float = 0.05):
    if isinstance(member, PeriodicCoreLimit):
        if isinstance(member.core, PeriodicJacobi):
            return band_spectrum(member.core, tol)
        return cmv_band_arcs(member.core, tol)

    if isinstance(member, DiagonalLimit):
        if member.family == "jacobi":
            finite = [float(v) for v in member.values if math.isfinite(v)]
            return canonical_line(
                (), sorted(set(finite)), tau=tol.merge,
                unbounded_above=any(v == math.inf for v in member.values),
                unbounded_below=any(v == -math.inf for v in member.values))
        angles = sorted({_angle(z) for z in member.values})
        return canonical_circle((), angles, tau=tol.merge)

    if isinstance(member, BlockSumLimit):
        if member.family == "jacobi":
            pts = []
            for blk in member.blocks:
                pts.extend(eigenvalues(blk, tol.eig).tolist())
            return canonical_line((), sorted(set(pts)), tau=tol.merge)
        from .criteria import finite_block_eigs
        angles = []
        for blk in member.blocks:
            angles.extend(_angle(z) for z in finite_block_eigs(blk))
        return canonical_circle((), sorted(set(angles)), tau=tol.merge)

    if isinstance(member, RawWindowLimit):
        return _raw_window_spectrum(member, tol, gap_tol)

    raise ScenarioError(f"unknown limit structure {type(member).__name__}")


def _angle(z: complex) -> float:
    a = math.atan2(z.imag, z.real)
    return a + TWO_PI if a < 0 else a


def _raw_window_spectrum(member: RawWindowLimit, tol: Tolerances, gap_tol: float):
    h = member.halfwidth
    size = 2 * h + 1
    if size < 64:
        raise WindowError(f"raw window has {size} sites; need at least 64")
    # persistence across two window sizes: bulk spectrum stays put, states
    # created by the artificial cuts move with the cut and are dropped
    small_h = max(32, (3 * h) // 4)
    clouds = []
    for lo, hi in ((-h, h), (-small_h, small_h)):
        idx = range(lo, hi + 1)
        if member.family == "jacobi":
            pairs = [member.value(j) for j in idx]
            b = tuple(p[1] for p in pairs)
            a = tuple(pairs[k][0] for k in range(len(pairs) - 1))
            clouds.append(np.sort(eigenvalues(FiniteJacobi(b, a), tol.eig)))
        else:
            alphas = [complex(member.value(j)) for j in list(idx)[:-1]]
            clouds.append(np.sort(paraorthogonal_zeros(alphas, -1.0, tol.zero_angle)))
    big, small = clouds
    keep = _persistent(big, small, tol.persist_delta,
                       circle=(member.family == "cmv"))
    kind = "line" if member.family == "jacobi" else "circle"
    return cloud_to_set(PointCloud(keep, kind=kind), gap_tol)


def _persistent(values: np.ndarray, probe: np.ndarray, delta: float,
                circle: bool) -> np.ndarray:
    if circle:
        ext = np.concatenate([probe - TWO_PI, probe, probe + TWO_PI])
    else:
        ext = probe
    ext = np.sort(ext)
    pos = np.searchsorted(ext, values)
    left = np.abs(values - ext[np.clip(pos - 1, 0, len(ext) - 1)])
    right = np.abs(ext[np.clip(pos, 0, len(ext) - 1)] - values)
    return values[np.minimum(left, right) <= delta]


def union_of_limit_spectra(members, tol: Tolerances = DEFAULT,
                           gap_tol: float = 0.05):
    spectra = [limit_spectrum(m, tol, gap_tol) for m in members]
    return union_and_close(spectra, tol.merge), spectra
