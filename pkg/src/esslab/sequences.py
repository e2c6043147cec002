"""Parameter streams for Jacobi and CMV scenarios.

A ScenarioSpec is a declarative, immutable description of a semi-infinite
coefficient stream (indexed n = 0, 1, 2, ...).  Evaluation is pure and
bit-reproducible; trigonometric phases at large index are reduced mod 2pi in
double-double arithmetic so slipped scenarios keep phase fidelity ~1e-10 even
at n = 1e8.

Also here: window extraction, the exponentially weighted sequence metric
d(kappa, lambda) = sum e^{-n} |kappa_n - lambda_n|, and the distance from a
window to a parametrized torus of sequences.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, IndexError_, ScenarioError

TWO_PI = 2.0 * math.pi
# double-double split of 2pi
TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16

_SPLITTER = 134217729.0  # 2**27 + 1


# ---------------------------------------------------------------------------
# double-double phase reduction
# ---------------------------------------------------------------------------

def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float):
    p = a * b
    ta = _SPLITTER * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLITTER * b
    bhi = tb - (tb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def reduce_mod(coef: float, n: float, extra: float, mod_hi: float, mod_lo: float) -> float:
    """coef*n + extra reduced to [0, mod), computed in double-double."""
    hi, lo = _two_prod(coef, n)
    s, e = _two_sum(hi, extra)
    lo += e
    k = math.floor((s + lo) / mod_hi)
    if k != 0.0:
        mh, me = _two_prod(float(k), mod_hi)
        s, e = _two_sum(s, -mh)
        lo += e - me - float(k) * mod_lo
    r = s + lo
    while r < 0.0:
        r += mod_hi
    while r >= mod_hi:
        r -= mod_hi
    return r


def phase_mod_2pi(coef: float, n: float, extra: float = 0.0) -> float:
    return reduce_mod(coef, n, extra, TWO_PI_HI, TWO_PI_LO)


# ---------------------------------------------------------------------------
# slip functions: f(n) with sup_{|m|<=L} |f(n) - f(n+m)| -> 0
# ---------------------------------------------------------------------------

def make_slip(desc) -> Callable[[float], float]:
    if desc is None:
        return lambda n: 0.0
    name = desc.get("name", "zero")
    scale = float(desc.get("scale", 1.0))
    if name == "zero":
        return lambda n: 0.0
    if name == "sqrt":
        return lambda n: scale * math.sqrt(n)
    if name == "pow":
        gamma = float(desc.get("gamma", 0.7))
        if not 0.0 < gamma < 1.0:
            raise ScenarioError(f"pow slip needs gamma in (0,1), got {gamma}")
        return lambda n: scale * n ** gamma
    if name == "log":
        return lambda n: scale * math.log(n + 1.0)
    if name == "table":
        values = [float(v) for v in desc["values"]]
        last = values[-1] if values else 0.0
        return lambda n: values[int(n)] if int(n) < len(values) else last
    raise ScenarioError(f"unknown slip {name!r}")


BUILTIN_SLIPS = ({"name": "sqrt"}, {"name": "pow", "gamma": 0.7}, {"name": "log"})


# ---------------------------------------------------------------------------
# decay laws: positive sequences -> 0
# ---------------------------------------------------------------------------

def make_decay(desc) -> Callable[[int], float]:
    name = desc.get("name", "inverse")
    c = float(desc.get("c", 1.0))
    if name == "inverse":
        return lambda n: c / (n + 1.0)
    if name == "power":
        gamma = float(desc.get("gamma", 1.0))
        return lambda n: c / (n + 1.0) ** gamma
    if name == "geometric":
        ratio = float(desc.get("ratio", 0.5))
        if not 0.0 < ratio < 1.0:
            raise ScenarioError(f"geometric law needs ratio in (0,1), got {ratio}")
        return lambda n: c * ratio ** n
    if name == "paired_decay":
        # couplings 1, 1/1, 1, 1/2, 1, 1/3, ...: strong pairs separated by
        # bridges eps_k = unit/k that vanish, leaving 2x2 blocks in the limit
        unit = float(desc.get("unit", 1.0))
        return lambda n: 1.0 if n % 2 == 0 else unit / ((n + 1) // 2)
    raise ScenarioError(f"unknown decay law {name!r}")


# ---------------------------------------------------------------------------
# cosine series on a d-torus (radian convention)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CosSeries:
    """W(theta) = mean + sum_j amp_j cos(k_j . theta + phase_j), theta in R^d."""

    mean: float
    amps: tuple[float, ...]
    harmonics: tuple[tuple[int, ...], ...]
    phases: tuple[float, ...]

    @staticmethod
    def parse(desc, dim: int) -> "CosSeries":
        terms = desc.get("terms", [])
        amps, ks, phases = [], [], []
        for t in terms:
            amps.append(float(t["amp"]))
            k = t.get("k", [1])
            if isinstance(k, int):
                k = [k]
            if len(k) != dim:
                raise ScenarioError(f"harmonic {k} does not match torus dimension {dim}")
            ks.append(tuple(int(ki) for ki in k))
            phases.append(float(t.get("phase", 0.0)))
        return CosSeries(float(desc.get("mean", 0.0)), tuple(amps), tuple(ks), tuple(phases))

    def eval_at_angles(self, theta) -> float:
        val = self.mean
        for amp, k, ph in zip(self.amps, self.harmonics, self.phases):
            arg = ph + sum(ki * ti for ki, ti in zip(k, theta))
            val += amp * math.cos(arg)
        return val

    def eval_stream(self, freq, n: int, slip: float) -> float:
        # each term reduces to a single effective frequency k.freq, so the
        # whole phase can go through one double-double reduction
        val = self.mean
        for amp, k, ph in zip(self.amps, self.harmonics, self.phases):
            omega = sum(ki * fi for ki, fi in zip(k, freq))
            ksum = sum(k)
            arg = phase_mod_2pi(omega, float(n), ph + ksum * slip)
            val += amp * math.cos(arg)
        return val

    def sup_bound(self) -> float:
        return abs(self.mean) + sum(abs(a) for a in self.amps)


# ---------------------------------------------------------------------------
# scenario spec
# ---------------------------------------------------------------------------

JACOBI_KINDS = ("periodic", "slipped_periodic", "quasi_periodic", "sparse",
                "decaying_a", "torus_asymptotic", "custom_table")
CMV_KINDS = ("periodic", "barrios_lopez", "decaying_a", "torus_asymptotic",
             "custom_table")


@dataclass(frozen=True)
class ScenarioSpec:
    """Immutable description of a one-sided parameter stream."""

    family: str                # "jacobi" | "cmv"
    kind: str
    params: dict
    label: str = ""
    prefix_override: dict = field(default_factory=dict)
    declared: dict = field(default_factory=dict)
    _eval: Callable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in ("jacobi", "cmv"):
            raise ScenarioError(f"unknown family {self.family!r}")
        kinds = JACOBI_KINDS if self.family == "jacobi" else CMV_KINDS
        if self.kind not in kinds:
            raise ScenarioError(
                f"kind {self.kind!r} not supported for family {self.family!r}")
        object.__setattr__(self, "_eval", _build_evaluator(self))

    @property
    def is_jacobi(self) -> bool:
        return self.family == "jacobi"

    def value(self, n: int):
        """Stream value at index n: an (a_n, b_n) pair or a complex alpha_n."""
        if n < 0:
            raise IndexError_(f"stream index {n} below origin 0")
        v = self._eval(int(n))
        ov = self.prefix_override
        if ov:
            if self.is_jacobi:
                a, b = v
                a = float(ov.get("a", {}).get(n, a))
                b = float(ov.get("b", {}).get(n, b))
                if a < 0:
                    raise ScenarioError("override gives a_n < 0")
                return (a, b)
            alt = ov.get("alpha", {}).get(n)
            if alt is not None:
                alt = _as_complex(alt)
                if abs(alt) > 1 + 1e-14:
                    raise ScenarioError("override gives |alpha_n| > 1")
                return alt
        return v

    def with_prefix_override(self, override: dict) -> "ScenarioSpec":
        norm = {comp: {int(k): v for k, v in table.items()}
                for comp, table in override.items()}
        return ScenarioSpec(self.family, self.kind, self.params,
                            self.label, norm, self.declared)

    def to_jsonable(self) -> dict:
        out = {"family": self.family, "kind": self.kind, "params": self.params}
        if self.label:
            out["label"] = self.label
        if self.prefix_override:
            out["prefix_override"] = {
                comp: {str(k): v for k, v in table.items()}
                for comp, table in self.prefix_override.items()}
        if self.declared:
            out["declared"] = self.declared
        return out


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _tail_fn(desc, what: str) -> Callable[[int], float]:
    if "periodic" in desc:
        table = [float(x) for x in desc["periodic"]]
        if not table:
            raise ScenarioError(f"empty periodic tail for {what}")
        return lambda n: table[n % len(table)]
    if "constant" in desc:
        c = float(desc["constant"])
        return lambda n: c
    if "law" in desc:
        return make_decay(desc["law"])
    raise ScenarioError(f"tail rule for {what} needs 'periodic', 'constant' or 'law'")


def _build_evaluator(spec: ScenarioSpec) -> Callable[[int], object]:
    p = spec.params
    if spec.family == "jacobi":
        return _build_jacobi(spec.kind, p)
    return _build_cmv(spec.kind, p)


def _build_jacobi(kind: str, p: dict) -> Callable[[int], tuple]:
    if kind == "periodic":
        a = [float(x) for x in p["a"]]
        b = [float(x) for x in p["b"]]
        if len(a) != len(b) or not a:
            raise ScenarioError("periodic jacobi needs equal nonempty a, b tables")
        if min(a) <= 0:
            raise ScenarioError("periodic jacobi needs a_j > 0")
        per = len(a)
        return lambda n: (a[n % per], b[n % per])

    if kind == "slipped_periodic":
        period = int(p["period"])
        if period < 1:
            raise ScenarioError("slipped_periodic needs integer period >= 1")
        b_series = CosSeries.parse(p["b_series"], 1)
        a_series = CosSeries.parse(p["a_series"], 1) if p.get("a_series") else None
        slip = make_slip(p.get("slip"))
        scale = TWO_PI / period

        def val(n):
            t = reduce_mod(1.0, float(n), slip(n), float(period), 0.0)
            theta = (t * scale,)
            b = b_series.eval_at_angles(theta)
            a = a_series.eval_at_angles(theta) if a_series else 1.0
            if a <= 0:
                raise ScenarioError(f"slipped_periodic a-series nonpositive at n={n}")
            return (a, b)

        return val

    if kind == "quasi_periodic":
        freq = tuple(float(f) for f in p["freq"])
        series = CosSeries.parse(p["b_function"], len(freq))
        slip = make_slip(p.get("slip"))
        a_const = float(p.get("a_const", 1.0))
        if a_const <= 0:
            raise ScenarioError("quasi_periodic needs a_const > 0")
        return lambda n: (a_const, series.eval_stream(freq, n, slip(n)))

    if kind == "sparse":
        bump_b = [float(x) for x in p["bump_b"]]
        bump_a = [float(x) for x in p["bump_a"]] if p.get("bump_a") else None
        back_a = float(p.get("background", {}).get("a", 1.0))
        back_b = float(p.get("background", {}).get("b", 0.0))
        width = len(bump_b)
        pos = p.get("positions", {"law": "squares"})
        if "list" in pos:
            xs = sorted(int(x) for x in pos["list"])
            if any(x2 - x1 <= width for x1, x2 in zip(xs, xs[1:])):
                raise ScenarioError("explicit sparse positions overlap a bump width")

            def locate(n):
                i = bisect.bisect_right(xs, n) - 1
                return xs[i] if i >= 0 and n - xs[i] < width else None
        else:
            scale = int(pos.get("scale", 1))
            offset = int(pos.get("offset", 0))
            k0 = max(1, width)  # gap 2k+1 must exceed the bump width

            def locate(n, _s=scale, _o=offset, _k0=k0):
                if n < _o + _s * _k0 * _k0:
                    return None
                k = int(math.isqrt(max(0, (n - _o) // _s)))
                for kk in (k + 1, k, k - 1):
                    if kk >= _k0:
                        x = _o + _s * kk * kk
                        if x <= n < x + width:
                            return x
                return None

        def val(n):
            x = locate(n)
            if x is None:
                return (back_a, back_b)
            j = n - x
            a = bump_a[j] if (bump_a and j < len(bump_a)) else back_a
            return (a, bump_b[j])

        return val

    if kind == "decaying_a":
        decay = make_decay(p.get("a_law", {"name": "inverse"}))
        b_table = [float(x) for x in p["b_table"]]
        if not b_table:
            raise ScenarioError("decaying_a needs a nonempty b_table")
        q = len(b_table)
        return lambda n: (decay(n), b_table[n % q])

    if kind == "torus_asymptotic":
        members = p["torus"]["members"]
        if not members:
            raise ScenarioError("torus_asymptotic needs at least one torus member")
        a0 = [float(x) for x in members[0]["a"]]
        b0 = [float(x) for x in members[0]["b"]]
        per = len(a0)
        approach = p.get("approach", {"name": "geometric", "ratio": 0.9, "c": 0.5})
        eps = make_decay(approach)
        # multiplicative on a (keeps positivity), additive on b
        return lambda n: (a0[n % per] * (1.0 + eps(n)), b0[n % per] + eps(n))

    if kind == "custom_table":
        a_desc, b_desc = p["a"], p["b"]
        a_prefix = [float(x) for x in a_desc.get("prefix", [])]
        b_prefix = [float(x) for x in b_desc.get("prefix", [])]
        a_tail = _tail_fn(a_desc.get("tail", {"constant": 1.0}), "a")
        b_tail = _tail_fn(b_desc.get("tail", {"constant": 0.0}), "b")

        def val(n):
            a = a_prefix[n] if n < len(a_prefix) else a_tail(n)
            b = b_prefix[n] if n < len(b_prefix) else b_tail(n)
            if a < 0:
                raise ScenarioError(f"custom table gives a_{n} < 0")
            return (a, b)

        return val

    raise ScenarioError(f"unhandled jacobi kind {kind!r}")


def _build_cmv(kind: str, p: dict) -> Callable[[int], complex]:
    if kind == "periodic":
        alpha = [_as_complex(v) for v in p["alpha"]]
        if not alpha:
            raise ScenarioError("periodic cmv needs a nonempty alpha table")
        if max(abs(a) for a in alpha) >= 1.0:
            raise ScenarioError("periodic cmv needs |alpha_j| < 1")
        per = len(alpha)
        return lambda n: alpha[n % per]

    if kind == "barrios_lopez":
        a = float(p["modulus"])
        if not 0.0 < a < 1.0:
            raise ScenarioError("barrios_lopez needs modulus in (0,1)")
        slip = make_slip(p.get("slip", {"name": "sqrt"}))

        def val(n):
            phi = phase_mod_2pi(0.0, 0.0, slip(n))
            return a * complex(math.cos(phi), math.sin(phi))

        return val

    if kind == "decaying_a":
        # CMV reading of a_n -> 0: rho_n -> 0, i.e. |alpha_n| -> 1
        defect = make_decay(p.get("defect_law", {"name": "inverse"}))
        phases = [float(x) for x in p["phase_table"]]
        if not phases:
            raise ScenarioError("cmv decaying_a needs a nonempty phase_table")
        q = len(phases)

        def val(n):
            r = min(1.0, max(0.0, 1.0 - defect(n)))
            phi = phases[n % q]
            return r * complex(math.cos(phi), math.sin(phi))

        return val

    if kind == "torus_asymptotic":
        torus = p["torus"]
        if torus.get("kind", "rotated_constant") != "rotated_constant":
            raise ScenarioError("cmv torus_asymptotic supports the rotated_constant torus")
        a = float(torus["modulus"])
        if not 0.0 < a < 1.0:
            raise ScenarioError("rotated_constant torus needs modulus in (0,1)")
        defect = make_decay(p.get("approach", {"name": "inverse", "c": 0.5}))
        slip = make_slip(p.get("slip", {"name": "sqrt"}))

        def val(n):
            phi = phase_mod_2pi(0.0, 0.0, slip(n))
            r = a * min(1.0, max(0.0, 1.0 - defect(n)))
            return r * complex(math.cos(phi), math.sin(phi))

        return val

    if kind == "custom_table":
        desc = p["alpha"]
        prefix = [_as_complex(v) for v in desc.get("prefix", [])]
        tail_desc = desc.get("tail", {"constant": [0.0, 0.0]})
        if "periodic" in tail_desc:
            table = [_as_complex(v) for v in tail_desc["periodic"]]
            tail = lambda n: table[n % len(table)]
        else:
            c = _as_complex(tail_desc["constant"])
            tail = lambda n: c

        def val(n):
            v = prefix[n] if n < len(prefix) else tail(n)
            if abs(v) > 1 + 1e-14:
                raise ScenarioError(f"custom cmv table gives |alpha_{n}| > 1")
            return v

        return val

    raise ScenarioError(f"unhandled cmv kind {kind!r}")


def spec_from_json(obj) -> ScenarioSpec:
    if isinstance(obj, str):
        obj = json.loads(obj)
    override = {comp: {int(k): v for k, v in table.items()}
                for comp, table in obj.get("prefix_override", {}).items()}
    return ScenarioSpec(
        family=obj["family"], kind=obj["kind"], params=obj.get("params", {}),
        label=obj.get("label", ""), prefix_override=override,
        declared=obj.get("declared", {}))


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamWindow:
    """Stream values at center-L .. center+L; None marks positions below the origin."""

    center: int
    halfwidth: int
    values: tuple
    family: str

    def __len__(self) -> int:
        return 2 * self.halfwidth + 1

    def one_sided(self) -> tuple:
        """Values from the center rightward (relative index 0, 1, ...)."""
        return self.values[self.halfwidth:]


def stream_value(spec: ScenarioSpec, n: int):
    return spec.value(n)


def window(spec: ScenarioSpec, center: int, halfwidth: int) -> ParamWindow:
    if center < 0 or halfwidth < 0:
        raise IndexError_("window needs center >= 0 and halfwidth >= 0")
    vals = []
    for ell in range(-halfwidth, halfwidth + 1):
        idx = center + ell
        vals.append(spec.value(idx) if idx >= 0 else None)
    return ParamWindow(center, halfwidth, tuple(vals), spec.family)


# ---------------------------------------------------------------------------
# the sequence metric and torus distance
# ---------------------------------------------------------------------------

def _abs_diff(u, v) -> float:
    if isinstance(u, tuple):
        return abs(u[0] - v[0]) + abs(u[1] - v[1])
    return abs(u - v)


@dataclass(frozen=True)
class DMetricResult:
    value: float
    tail_bound: float
    n_terms: int

    def total_upper(self) -> float:
        return self.value + self.tail_bound


def d_metric(kappa, lam, sup_bound: float | None = None) -> DMetricResult:
    """sum_{n<N} e^{-n} |kappa_n - lambda_n| with a rigorous tail bound.

    ``sup_bound`` bounds |kappa_n - lambda_n| on the unseen tail; when omitted
    it is taken from the largest observed term difference magnitudes.
    """
    kappa, lam = list(kappa), list(lam)
    if len(kappa) != len(lam):
        raise DomainError("d_metric needs windows of equal length "
                          "(pad by the stream's tail rule first)")
    n_terms = len(kappa)
    total = 0.0
    max_abs = 0.0
    for n, (u, v) in enumerate(zip(kappa, lam)):
        diff = _abs_diff(u, v)
        total += math.exp(-n) * diff
        max_abs = max(max_abs, diff)
    sup = max_abs if sup_bound is None else float(sup_bound)
    tail = math.exp(-n_terms) / (1.0 - math.exp(-1.0)) * sup
    return DMetricResult(total, tail, n_terms)


class RotatedConstantTorus:
    """The isospectral circle {lambda * a : lambda on the unit circle} of
    constant Verblunsky coefficients with modulus a."""

    def __init__(self, modulus: float):
        if not 0.0 < modulus < 1.0:
            raise ScenarioError("rotated_constant torus needs modulus in (0,1)")
        self.modulus = modulus

    def member_window(self, t: float, length: int) -> list[complex]:
        lam = complex(math.cos(TWO_PI * t), math.sin(TWO_PI * t))
        return [lam * self.modulus] * length

    def members_on_grid(self, m: int):
        return [i / m for i in range(m)]


class FiniteTorus:
    """A torus given by an explicit finite list of window generators."""

    def __init__(self, generators):
        if not generators:
            raise ScenarioError("empty torus parametrization")
        self.generators = list(generators)

    def member_window(self, t: int, length: int):
        gen = self.generators[int(t)]
        return [gen(n) for n in range(length)]

    def members_on_grid(self, m: int):
        return list(range(len(self.generators)))


def distance_to_torus(window_values, torus, grid: int = 16,
                      refine_tol: float = 1e-6, max_depth: int = 12,
                      sup_bound: float | None = None) -> float:
    """min over sampled torus members of d_metric(window, member).

    The sampling grid doubles until the minimum stops moving by more than
    ``refine_tol`` (continuous parametrizations) or immediately for finite
    member lists.
    """
    values = list(window_values)

    def best_on(params) -> float:
        return min(
            d_metric(values, torus.member_window(t, len(values)), sup_bound).value
            for t in params)

    if isinstance(torus, FiniteTorus):
        return best_on(torus.members_on_grid(0))
    m = max(2, grid)
    best = best_on(torus.members_on_grid(m))
    for _ in range(max_depth):
        m *= 2
        nxt = best_on(torus.members_on_grid(m))
        if abs(best - nxt) < refine_tol:
            return min(best, nxt)
        best = nxt
    return best
