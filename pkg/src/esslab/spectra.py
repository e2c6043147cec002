"""Spectral-set algebra on the real line and on the unit circle.

Sets are finite unions of closed intervals (or closed arcs, stored as angle
pairs) plus finitely many isolated points, always kept in canonical form:
components sorted, pairwise disjoint beyond the merge tolerance, points
outside every interval.  These are the value types every spectral
computation in the package returns, and the Hausdorff distance between them
is the convergence metric used by all cross-checks.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import EmptySetError, KindMismatchError, UnboundedSetError

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealSpectralSet:
    """Closed subset of the line: disjoint closed intervals plus isolated points.

    ``unbounded_above``/``unbounded_below`` record membership of +/-inf in the
    extended sense used for diagonal limits with b_n -> +/-inf; the flags take
    part in unions but carry no geometry.
    """

    intervals: tuple[tuple[float, float], ...] = ()
    points: tuple[float, ...] = ()
    unbounded_above: bool = False
    unbounded_below: bool = False

    @property
    def kind(self) -> str:
        return "line"

    def is_empty(self) -> bool:
        return not self.intervals and not self.points and not (
            self.unbounded_above or self.unbounded_below)

    def components(self) -> list[tuple[float, float]]:
        comps = [(lo, hi) for lo, hi in self.intervals]
        comps += [(p, p) for p in self.points]
        comps.sort()
        return comps

    def total_length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


@dataclass(frozen=True)
class CircleSpectralSet:
    """Closed subset of the unit circle, stored through angles.

    An arc is a pair (lo, hi) with lo in [0, 2pi) and 0 < hi - lo <= 2pi;
    hi > 2pi encodes wraparound through angle 0.  The full circle is the
    single arc (0, 2pi).
    """

    arcs: tuple[tuple[float, float], ...] = ()
    points: tuple[float, ...] = ()

    @property
    def kind(self) -> str:
        return "circle"

    def is_empty(self) -> bool:
        return not self.arcs and not self.points

    def is_full_circle(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0][1] - self.arcs[0][0] >= TWO_PI - 1e-15

    def components(self) -> list[tuple[float, float]]:
        comps = [(lo, hi) for lo, hi in self.arcs]
        comps += [(p, p) for p in self.points]
        comps.sort()
        return comps

    def total_length(self) -> float:
        return sum(hi - lo for lo, hi in self.arcs)


@dataclass
class PointCloud:
    """Finite multiset of reals (line) or angles (circle), with provenance."""

    values: np.ndarray
    kind: str = "line"
    meta: dict = field(default_factory=dict)

    def sorted_values(self) -> np.ndarray:
        return np.sort(np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)


SpectralSet = RealSpectralSet | CircleSpectralSet


# ---------------------------------------------------------------------------
# canonicalization
# ---------------------------------------------------------------------------

def _merge_components(comps: list[tuple[float, float]], tau: float) -> list[tuple[float, float]]:
    if not comps:
        return []
    comps = sorted(comps)
    out = [list(comps[0])]
    for lo, hi in comps[1:]:
        if lo - out[-1][1] <= tau:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def canonical_line(intervals, points, tau: float = DEFAULT.merge,
                   unbounded_above: bool = False,
                   unbounded_below: bool = False) -> RealSpectralSet:
    comps = [(float(lo), float(hi)) for lo, hi in intervals]
    for lo, hi in comps:
        if hi < lo:
            raise ValueError(f"interval with hi < lo: [{lo}, {hi}]")
    comps += [(float(p), float(p)) for p in points]
    merged = _merge_components(comps, tau)
    ivs, pts = [], []
    for lo, hi in merged:
        # components no wider than the merge tolerance are points (the merge
        # cannot distinguish them from one)
        if hi - lo > tau:
            ivs.append((lo, hi))
        else:
            pts.append(0.5 * (lo + hi))
    return RealSpectralSet(tuple(ivs), tuple(pts), unbounded_above, unbounded_below)


def _normalize_angle(theta: float) -> float:
    t = math.fmod(float(theta), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    # fmod can land exactly on 2pi after the correction
    if t >= TWO_PI:
        t -= TWO_PI
    return t


def canonical_circle(arcs, points, tau: float = DEFAULT.merge) -> CircleSpectralSet:
    comps = []
    for lo, hi in arcs:
        lo, hi = float(lo), float(hi)
        if hi < lo:
            raise ValueError(f"arc with hi < lo: [{lo}, {hi}]")
        length = min(hi - lo, TWO_PI)
        start = _normalize_angle(lo)
        comps.append((start, start + length))
    comps += [(a, a) for a in map(_normalize_angle, points)]
    if not comps:
        return CircleSpectralSet()
    # split wraparound components at 2pi so linear merging applies
    split = []
    for lo, hi in comps:
        if hi > TWO_PI:
            split.append((0.0, hi - TWO_PI))
            split.append((lo, TWO_PI))
        else:
            split.append((lo, hi))
    merged = _merge_components(split, tau)
    # rejoin across the 0/2pi seam
    if len(merged) >= 2 and merged[0][0] <= tau and TWO_PI - merged[-1][1] <= tau:
        first, last = merged[0], merged.pop()
        merged[0] = (last[0] - TWO_PI, first[1])
    total = sum(hi - lo for lo, hi in merged)
    if total >= TWO_PI - tau and len(merged) == 1:
        return CircleSpectralSet(((0.0, TWO_PI),))
    arcs_out, pts_out = [], []
    for lo, hi in merged:
        if hi - lo > tau:
            start = _normalize_angle(lo)
            arcs_out.append((start, start + (hi - lo)))
        else:
            pts_out.append(_normalize_angle(0.5 * (lo + hi)))
    arcs_out.sort()
    pts_out.sort()
    return CircleSpectralSet(tuple(arcs_out), tuple(pts_out))


# ---------------------------------------------------------------------------
# union and closure
# ---------------------------------------------------------------------------

def union_and_close(sets, tau: float = DEFAULT.merge) -> SpectralSet:
    """Closure of the union, in canonical form.

    Components within ``tau`` of each other fuse; isolated points inside (or
    within tau of) an interval are absorbed.  All inputs must share a kind.
    """
    sets = list(sets)
    if not sets:
        raise EmptySetError("union_and_close needs at least one set")
    kinds = {s.kind for s in sets}
    if len(kinds) != 1:
        raise KindMismatchError(f"mixed kinds in union: {sorted(kinds)}")
    if kinds == {"line"}:
        ivs = [iv for s in sets for iv in s.intervals]
        pts = [p for s in sets for p in s.points]
        return canonical_line(
            ivs, pts, tau,
            unbounded_above=any(s.unbounded_above for s in sets),
            unbounded_below=any(s.unbounded_below for s in sets),
        )
    arcs = [a for s in sets for a in s.arcs]
    pts = [p for s in sets for p in s.points]
    return canonical_circle(arcs, pts, tau)


def union_with_diagnostic(sets, tau: float = DEFAULT.merge):
    """union_and_close plus a flag: was the raw union already closed?

    The raw union of finitely many canonical sets is closed as a point set;
    the diagnostic reports whether fusing at tolerance ``tau`` changed
    anything relative to fusing at tolerance 0, i.e. whether taking the
    closure of the sampled union did any work.
    """
    closed = union_and_close(sets, tau)
    raw = union_and_close(sets, 0.0)
    return closed, raw == closed


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _line_components(obj) -> list[tuple[float, float]]:
    if isinstance(obj, PointCloud):
        if len(obj) == 0:
            return []
        return [(v, v) for v in obj.sorted_values()]
    return obj.components()


def _dist_to_components(x: float, starts, comps) -> float:
    """Distance from x to a union of sorted closed components."""
    i = bisect_left(starts, x)
    best = math.inf
    if i < len(comps):
        lo, hi = comps[i]
        best = min(best, max(lo - x, 0.0))
    if i > 0:
        lo, hi = comps[i - 1]
        if x <= hi:
            return 0.0
        best = min(best, x - hi)
    return best


def _directed_sup(a_comps, b_comps) -> float:
    """sup over the set A of the distance to B, exact for interval unions.

    The maximizers are endpoints of A or midpoints of B's gaps interior to A,
    so no sampling is needed.
    """
    starts = [c[0] for c in b_comps]
    candidates = []
    for lo, hi in a_comps:
        candidates.append(lo)
        candidates.append(hi)
    for (l1, h1), (l2, h2) in zip(b_comps, b_comps[1:]):
        mid = 0.5 * (h1 + l2)
        for lo, hi in a_comps:
            if lo <= mid <= hi:
                candidates.append(mid)
                break
    return max(_dist_to_components(x, starts, b_comps) for x in candidates)


def _check_distance_args(a, b):
    kinds = {getattr(a, "kind"), getattr(b, "kind")}
    if len(kinds) != 1:
        raise KindMismatchError(f"mixed kinds in distance: {sorted(kinds)}")
    for obj in (a, b):
        if isinstance(obj, PointCloud):
            if len(obj) == 0:
                raise EmptySetError("distance on an empty point cloud")
        elif obj.is_empty():
            raise EmptySetError("distance on an empty spectral set")
        if isinstance(obj, RealSpectralSet) and (obj.unbounded_above or obj.unbounded_below):
            raise UnboundedSetError("distance undefined on a set flagged unbounded")
    return kinds.pop()


def _circle_cover_components(obj) -> list[tuple[float, float]]:
    if isinstance(obj, PointCloud):
        comps = [(float(_normalize_angle(v)),) * 2 for v in obj.sorted_values()]
    else:
        if obj.is_full_circle():
            return [(-TWO_PI, TWO_PI)]
        comps = obj.components()
    out = []
    for lo, hi in comps:
        for shift in (-TWO_PI, 0.0, TWO_PI):
            out.append((lo + shift, hi + shift))
    return sorted(out)


def directed_hausdorff(a, b) -> float:
    """sup_{x in a} dist(x, b); geodesic metric on the circle."""
    kind = _check_distance_args(a, b)
    if kind == "line":
        return _directed_sup(_line_components(a), _line_components(b))
    a_cover = _circle_cover_components(a)
    b_cover = _circle_cover_components(b)
    # restrict A candidates to one fundamental copy
    a_base = [c for c in a_cover if 0.0 <= c[0] < TWO_PI or (c[0] < 0.0 <= c[1])]
    return _directed_sup(a_base, b_cover)


def hausdorff_distance(a, b) -> float:
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


# ---------------------------------------------------------------------------
# sampling and cloud conversion
# ---------------------------------------------------------------------------

def sample(s: SpectralSet, n: int) -> PointCloud:
    """Spread ~n points over s, proportional to component length.

    Every interval/arc contributes both endpoints and isolated points are
    always included, so the output may exceed n for fragmented sets.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if s.is_empty():
        raise EmptySetError("cannot sample an empty set")
    circle = isinstance(s, CircleSpectralSet)
    comps = s.arcs if circle else s.intervals
    values = list(s.points)
    total = sum(hi - lo for lo, hi in comps)
    for lo, hi in comps:
        if circle and hi - lo >= TWO_PI - 1e-15:
            values.extend(np.linspace(0.0, TWO_PI, max(n, 2), endpoint=False))
            continue
        k = max(2, int(round(n * (hi - lo) / total))) if total > 0 else 2
        values.extend(np.linspace(lo, hi, k))
    if circle:
        values = [_normalize_angle(v) for v in values]
    values = np.unique(np.asarray(values, dtype=float))
    return PointCloud(values, kind=s.kind)


def _cluster_runs(values: np.ndarray, gap_tol: float) -> list[np.ndarray]:
    if len(values) == 0:
        return []
    cuts = np.nonzero(np.diff(values) >= gap_tol)[0]
    return np.split(values, cuts + 1)


def cloud_to_set(cloud: PointCloud, gap_tol: float) -> SpectralSet:
    """Cluster a cloud into intervals (runs of >= 3 close points) and points."""
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    values = cloud.sorted_values()
    if cloud.kind == "circle":
        return _circle_cloud_to_set(values, gap_tol)
    intervals, points = [], []
    for run in _cluster_runs(values, gap_tol):
        if len(run) >= 3:
            intervals.append((float(run[0]), float(run[-1])))
        else:
            points.extend(float(v) for v in run)
    return canonical_line(intervals, points, tau=0.0)


def _circle_cloud_to_set(values: np.ndarray, gap_tol: float) -> CircleSpectralSet:
    if len(values) == 0:
        return CircleSpectralSet()
    values = np.array([_normalize_angle(v) for v in values])
    values.sort()
    gaps = np.diff(values)
    wrap_gap = values[0] + TWO_PI - values[-1]
    if len(values) >= 3 and (len(gaps) == 0 or gaps.max(initial=0.0) < gap_tol) and wrap_gap < gap_tol:
        return CircleSpectralSet(((0.0, TWO_PI),))
    # unroll starting after the largest gap so no cluster straddles the seam
    cut = int(np.argmax(np.append(gaps, wrap_gap)))
    rolled = np.roll(values, -(cut + 1))
    rolled = np.where(rolled < rolled[0] - 1e-15, rolled + TWO_PI, rolled)
    arcs, points = [], []
    for run in _cluster_runs(rolled, gap_tol):
        if len(run) >= 3:
            arcs.append((float(run[0]), float(run[-1])))
        else:
            points.extend(float(v) for v in run)
    return canonical_circle(arcs, points, tau=0.0)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def to_jsonable(s: SpectralSet) -> dict:
    out = {
        "intervals": [[lo, hi] for lo, hi in
                      (s.intervals if isinstance(s, RealSpectralSet) else s.arcs)],
        "points": list(s.points),
        "kind": s.kind,
    }
    if isinstance(s, RealSpectralSet):
        if s.unbounded_above:
            out["unbounded_above"] = True
        if s.unbounded_below:
            out["unbounded_below"] = True
    return out


def from_jsonable(d: dict) -> SpectralSet:
    kind = d.get("kind", "line")
    if kind == "line":
        return canonical_line(
            d.get("intervals", ()), d.get("points", ()),
            unbounded_above=bool(d.get("unbounded_above", False)),
            unbounded_below=bool(d.get("unbounded_below", False)),
        )
    if kind == "circle":
        return canonical_circle(d.get("intervals", ()), d.get("points", ()))
    raise KindMismatchError(f"unknown kind {kind!r}")


def dumps(s: SpectralSet) -> str:
    return json.dumps(to_jsonable(s), sort_keys=True)
