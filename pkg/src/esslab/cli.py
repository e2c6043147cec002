"""Command-line runner.

Subcommands
-----------
spectrum     --scenario FILE --method {structural|truncation|discriminant}
             [--n SIZE] [--persist SIZE] [--gap-tol G] [--out PATH]
rightlimits  --scenario FILE [--detect --L INT --eps FLOAT [--centers LIST]]
verify       TAG [--budget N1,N2,...] [--out PATH]
sweep        --scenario FILE --sizes LIST --reference structural [--out PATH]
criteria     {krein|chihara|golinskii} --scenario FILE [--targets LIST]
             [--horizon N] [--ctol TOL]
             (negative targets need the equals form: --targets=-1,1)

All results print as JSON on stdout; --out writes CSV plot data plus a
``<out>.meta.json`` sidecar carrying full provenance (scenario, tolerances,
git describe).  CSV headers: ``N,hausdorff`` for sweeps, ``N,distance`` for
verify rows, ``L,c_L,C_norm,C_norm_L2`` for the localization tag,
``index,value`` / ``index,theta`` for point clouds.  Outputs are
byte-identical across runs for identical inputs.

Exit codes: 0 success or pass, 1 verification/criterion fail, 2 usage error,
3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from dataclasses import asdict
from pathlib import Path

from . import esscore, spectra
from .config import DEFAULT, Tolerances
from .criteria import (TargetSet, chihara_check, golinskii_decay_spectrum,
                       krein_check)
from .errors import EsslabError, RegistryError, ScenarioError
from .cmv import PeriodicVerblunsky, cmv_band_arcs
from .jacobi import PeriodicJacobi, band_spectrum
from .limits import detect_right_limits, right_limit_set
from .sequences import ScenarioSpec, spec_from_json


def _load_scenario(path: str) -> ScenarioSpec:
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        return spec_from_json(json.loads(p.read_text()))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario file {path}: {exc}") from exc


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=10)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unavailable"


def _tolerances(args) -> Tolerances:
    kw = {}
    for flag, name in (("tol_merge", "merge"), ("tol_eig", "eig"),
                       ("tol_root", "root"), ("tol_zero", "zero_angle"),
                       ("tol_persist", "persist_delta")):
        v = getattr(args, flag, None)
        if v is not None:
            kw[name] = v
    return DEFAULT.override(**kw) if kw else DEFAULT


def emit_plot_data(rows, header: str, path: str, provenance: dict) -> None:
    """Write deterministic CSV rows plus a JSON provenance sidecar."""
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    out = Path(path)
    try:
        out.write_text("\n".join(lines) + "\n")
        sidecar = dict(provenance)
        sidecar["git_describe"] = _git_describe()
        Path(str(out) + ".meta.json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        raise EsslabError(f"cannot write plot data to {path}: {exc}") from exc


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _add_tol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-merge", type=float, help="structural union merge tolerance")
    p.add_argument("--tol-eig", type=float, help="eigenvalue bracket width")
    p.add_argument("--tol-root", type=float, help="band-edge bisection width")
    p.add_argument("--tol-zero", type=float, help="unit-circle zero angle tolerance")
    p.add_argument("--tol-persist", type=float, help="persistence filter radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esslab",
        description="Essential spectra of Jacobi and CMV operators via right limits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="essential spectrum of a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--method", choices=["structural", "truncation", "discriminant"],
                   default="structural")
    p.add_argument("--n", "--N", dest="n", type=int, default=2000,
                   help="truncation size (truncation method)")
    p.add_argument("--persist", type=int, default=None,
                   help="second truncation size for the persistence filter")
    p.add_argument("--gap-tol", type=float, default=esscore.DEFAULT_GAP_TOL)
    p.add_argument("--out", help="write the point cloud / set samples as CSV")
    _add_tol_flags(p)

    p = sub.add_parser("rightlimits", help="right-limit set of a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--detect", action="store_true",
                   help="numeric window-clustering detector instead of the structural route")
    p.add_argument("--L", type=int, default=8, help="window halfwidth (detector)")
    p.add_argument("--eps", type=float, default=1e-8, help="cluster radius (detector)")
    p.add_argument("--centers", default=None,
                   help="comma list of window centers (detector)")
    _add_tol_flags(p)

    p = sub.add_parser("verify", help="run a named theorem verification")
    p.add_argument("tag")
    p.add_argument("--budget", default=None, help="comma list of sizes")
    p.add_argument("--out", help="write distance rows as CSV")
    _add_tol_flags(p)

    p = sub.add_parser("sweep", help="truncation-vs-structural convergence sweep")
    p.add_argument("--scenario", required=True)
    p.add_argument("--sizes", required=True, help="comma list of truncation sizes")
    p.add_argument("--reference", choices=["structural"], default="structural")
    p.add_argument("--out", help="write (N, hausdorff) rows as CSV")
    _add_tol_flags(p)

    p = sub.add_parser("criteria", help="finite-essential-spectrum criteria")
    p.add_argument("which", choices=["krein", "chihara", "golinskii"])
    p.add_argument("--scenario", required=True)
    p.add_argument("--targets", default=None, help="comma list of target values "
                   "(reals for jacobi, angles for cmv)")
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--ctol", type=float, default=1e-3,
                   help="band-entry decay tolerance")
    _add_tol_flags(p)

    return parser


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ScenarioError(f"malformed number list {text!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(round(x)) for x in _float_list(text)]


def _provenance(args, spec: ScenarioSpec | None, tol: Tolerances) -> dict:
    prov = {
        "command": " ".join(sys.argv[1:]) if sys.argv[1:] else args.command,
        "tolerances": asdict(tol),
        "seeds": None,  # the library is deterministic; no RNG feeds results
    }
    if spec is not None:
        prov["scenario"] = spec.to_jsonable()
    return prov


def _cmd_spectrum(args) -> int:
    tol = _tolerances(args)
    spec = _load_scenario(args.scenario)
    if args.method == "structural":
        res = esscore.essential_spectrum(spec, tol, gap_tol=args.gap_tol)
        _print_json(res.to_jsonable())
        if args.out:
            cloud = spectra.sample(res.spectrum, 512)
            _emit_cloud(cloud, args, spec, tol)
        return 0
    if args.method == "truncation":
        cloud = esscore.truncation_spectrum(spec, args.n, persistence=args.persist,
                                            tol=tol)
        out = {
            "cloud_size": len(cloud),
            "meta": cloud.meta,
            "spectrum": spectra.to_jsonable(
                spectra.cloud_to_set(cloud, args.gap_tol)),
            "approximate": True,
        }
        _print_json(out)
        if args.out:
            _emit_cloud(cloud, args, spec, tol)
        return 0
    # discriminant route: periodic cores only
    if spec.kind != "periodic":
        raise ScenarioError("--method discriminant needs a periodic scenario")
    if spec.is_jacobi:
        core = PeriodicJacobi(tuple(float(x) for x in spec.params["a"]),
                              tuple(float(x) for x in spec.params["b"]))
        s = band_spectrum(core, tol)
    else:
        def as_complex(v):
            return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
        core = PeriodicVerblunsky(tuple(as_complex(v)
                                        for v in spec.params["alpha"]))
        s = cmv_band_arcs(core, tol)
    _print_json(spectra.to_jsonable(s))
    if args.out:
        _emit_cloud(spectra.sample(s, 512), args, spec, tol)
    return 0


def _emit_cloud(cloud, args, spec, tol) -> None:
    col = "theta" if cloud.kind == "circle" else "value"
    rows = [(i, float(v)) for i, v in enumerate(cloud.sorted_values())]
    emit_plot_data(rows, f"index,{col}", args.out, _provenance(args, spec, tol))


def _cmd_rightlimits(args) -> int:
    tol = _tolerances(args)
    spec = _load_scenario(args.scenario)
    if args.detect:
        if args.centers:
            centers = _int_list(args.centers)
        else:
            centers = esscore._geometric_centers(max(50, 4 * args.L), 100000, 24)
        clusters = detect_right_limits(spec, args.L, centers, args.eps)
        _print_json({"clusters": [c.to_jsonable() for c in clusters],
                     "halfwidth": args.L, "eps": args.eps})
        return 0
    rls = right_limit_set(spec)
    _print_json(rls.to_jsonable())
    return 0


def _cmd_verify(args) -> int:
    tol = _tolerances(args)
    budget = _int_list(args.budget) if args.budget else None
    report = esscore.verify_theorem(args.tag, budget, tol)
    _print_json(report.to_jsonable())
    if args.out:
        if args.tag == "localization":
            rows = report.details["csv_rows"]
            emit_plot_data(rows, "L,c_L,C_norm,C_norm_L2", args.out,
                           _provenance(args, None, tol))
        else:
            emit_plot_data(report.rows, "N,distance", args.out,
                           _provenance(args, None, tol))
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    tol = _tolerances(args)
    spec = _load_scenario(args.scenario)
    sizes = sorted(_int_list(args.sizes))
    if not sizes:
        raise ScenarioError("sweep needs at least one size")
    ref = esscore.essential_spectrum(spec, tol).spectrum
    rows = []
    for n in sizes:
        cloud = esscore.truncation_spectrum(spec, n,
                                            persistence=int(round(1.5 * n)),
                                            tol=tol)
        rows.append((n, spectra.hausdorff_distance(cloud, ref)))
    _print_json({"reference": "structural", "rows": [[n, d] for n, d in rows]})
    if args.out:
        emit_plot_data(rows, "N,hausdorff", args.out, _provenance(args, spec, tol))
    return 0


def _cmd_criteria(args) -> int:
    tol = _tolerances(args)
    spec = _load_scenario(args.scenario)
    if args.which == "golinskii":
        res = golinskii_decay_spectrum(spec, args.horizon)
        _print_json(res.to_jsonable())
        return 0
    if not args.targets:
        raise ScenarioError(f"criteria {args.which} needs --targets")
    values = _float_list(args.targets)
    if args.which == "chihara":
        if len(values) != 2:
            raise ScenarioError("chihara needs exactly two targets")
        verdict = chihara_check(spec, values[0], values[1], args.horizon, args.ctol)
    else:
        verdict = krein_check(spec, TargetSet(tuple(values)), args.horizon,
                              args.ctol)
    out = verdict.to_jsonable()
    out["criterion"] = args.which
    _print_json(out)
    return 0 if verdict.holds else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    handlers = {
        "spectrum": _cmd_spectrum,
        "rightlimits": _cmd_rightlimits,
        "verify": _cmd_verify,
        "sweep": _cmd_sweep,
        "criteria": _cmd_criteria,
    }
    try:
        return handlers[args.command](args)
    except (ScenarioError, RegistryError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except EsslabError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
