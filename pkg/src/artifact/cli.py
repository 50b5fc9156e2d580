"""Command-line driver: solve, uniformize, action, grams, verify <suite>, chains.

Every subcommand writes report.json and tables/*.csv under --out and exits 0
only when all executed checks pass.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import chains
from .accessory import RESIDUAL_TARGET
from .errors import ArtifactError
from .fuchsian_ode import PunctureConfig
from .grams import gram_report
from .liouville import action
from .suites import SUITES, ExperimentManifest, ManifestError, Workspace, run_suite
from .uniformizer import SolvedUniformization

EXIT_OK, EXIT_CHECKS_FAILED, EXIT_ERROR = 0, 1, 2


def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _write(out: Path, report: dict, tables: dict) -> None:
    (out / "tables").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2))
    for name, (header, rows) in tables.items():
        with open(out / "tables" / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def _config(args, manifest: ExperimentManifest) -> PunctureConfig:
    if args.point:
        return PunctureConfig(tuple(complex(p.replace(" ", "")) for p in args.point))
    return manifest.configs[0]


def cmd_solve(args, manifest) -> int:
    cfg = _config(args, manifest)
    s = SolvedUniformization.solve(cfg)
    ok = s.residual < RESIDUAL_TARGET
    report = {"command": "solve", "point": [_pair(w) for w in cfg.finite_punctures],
              "c": [_pair(c) for c in s.acc.c], "residual": s.residual,
              "realization_residual": s.realization_residual, "pass": ok}
    rows = [[i, c.real, c.imag] for i, c in enumerate(s.acc.c)]
    _write(args.out, report, {"accessory": (["index", "re", "im"], rows)})
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_uniformize(args, manifest) -> int:
    cfg = _config(args, manifest)
    s = SolvedUniformization.solve(cfg)
    cusps = []
    rows = []
    for i in range(cfg.n):
        exact = s.exact_h(i)
        four = s.local_fourier(i)
        cusps.append({"index": i, "h": exact.h, "h_error": exact.error, "h_fourier": four.h,
                      "fourier": {str(k): _pair(v) for k, v in four.fourier.items()}})
        rows.append([i, exact.h, exact.error, four.h])
    samples = s.metric_samples(s.probe_points(manifest.liouville_probes, manifest.liouville_clearance))
    worst = max(m.residual / m.density for m in samples)
    ok = worst < 1e-6
    report = {"command": "uniformize", "point": [_pair(w) for w in cfg.finite_punctures],
              "cusps": cusps, "liouville_residual": worst, "pass": ok}
    metric = [[m.w.real, m.w.imag, m.density, m.residual] for m in samples]
    _write(args.out, report, {"cusps": (["index", "h", "h_error", "h_fourier"], rows),
                              "metric": (["w_re", "w_im", "density", "residual"], metric)})
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_action(args, manifest) -> int:
    cfg = _config(args, manifest)
    s = SolvedUniformization.solve(cfg)
    res = action(s, manifest.quad_control)
    report = json.loads(res.to_json())
    report.update({"command": "action", "point": [_pair(w) for w in cfg.finite_punctures]})
    dev = abs(res.extrapolated - res.S)
    report["cross_check"] = {"deviation": dev, "tolerance": 3 * res.extrapolation_error + 1e-9,
                             "pass": dev <= 3 * res.extrapolation_error + 1e-9}
    rows = [[d, v] for d, v in zip(res.deltas, res.partial)]
    _write(args.out, report, {"action_deltas": (["delta", "S_delta"], rows)})
    return EXIT_OK if report["cross_check"]["pass"] else EXIT_CHECKS_FAILED


def cmd_grams(args, manifest) -> int:
    cfg = _config(args, manifest)
    s = SolvedUniformization.solve(cfg)
    g = gram_report(s, manifest.quad_control, tz=not args.no_tz)
    report = json.loads(g.to_json())
    report.update({"command": "grams", "hermitian_defect": g.hermitian_defect(),
                   "positive_definite": g.positive_definite()})
    ok = g.positive_definite() and g.hermitian_defect() < 1e-8
    report["pass"] = ok
    rows = []
    for name, m in [("wp", g.wp)] + [(f"tz{i}", m) for i, m in g.tz.items()]:
        for (j, k), v in np.ndenumerate(m):
            rows.append([name, j, k, v.real, v.imag])
    _write(args.out, report, {"grams": (["metric", "j", "k", "re", "im"], rows)})
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_verify(args, manifest) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    ws = Workspace(manifest)
    reports = [run_suite(n, manifest, ws) for n in names]
    combined = {"command": "verify", "pass": all(r.passed for r in reports),
                "suites": [r.to_json() for r in reports]}
    rows = []
    for r in reports:
        for row in r.rows:
            j = row.to_json()
            rows.append([r.suite, j["identity"], json.dumps(j["point"]), json.dumps(j["left"]),
                         json.dumps(j["right"]), j["deviation"], j["tol"], j["pass"], j["anchor"], j["note"]])
    header = ["suite", "identity", "point", "left", "right", "deviation", "tol", "pass", "anchor", "note"]
    _write(args.out, combined, {name: (header, [x for x in rows if x[0] == name]) for name in names})
    for r in reports:
        print(f"{r.suite}: {'PASS' if r.passed else 'FAIL'} "
              f"({sum(x.passed for x in r.rows)}/{len(r.rows)} checks)")
    return EXIT_OK if combined["pass"] else EXIT_CHECKS_FAILED


def cmd_chains(args, manifest) -> int:
    results = []
    conv = chains.find_convention()
    for g, n in chains.admissible_types(manifest.max_genus, manifest.max_punctures):
        try:
            results.append(json.loads(chains.check_cycle(g, n, conv).to_json()))
        except ArtifactError as exc:
            results.append({"identity": "cycle", "g": g, "n": n, "pass": False, "convention": conv.label,
                            "defect": getattr(exc, "defect", None) or [str(exc)]})
    for g in manifest.schottky_ranks:
        try:
            results.append(json.loads(chains.check_schottky(g, conv).to_json()))
        except ArtifactError as exc:
            results.append({"identity": "schottky", "g": g, "n": 0, "pass": False, "convention": conv.label,
                            "defect": getattr(exc, "defect", None) or [str(exc)]})
    ok = all(r["pass"] for r in results)
    rows = [[r["identity"], r["g"], r["n"], r["pass"], r["convention"], len(r["defect"])] for r in results]
    _write(args.out, {"command": "chains", "pass": ok, "checks": results},
           {"chains": (["identity", "g", "n", "pass", "convention", "defect_terms"], rows)})
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


COMMANDS = {"solve": cmd_solve, "uniformize": cmd_uniformize, "action": cmd_action,
            "grams": cmd_grams, "verify": cmd_verify, "chains": cmd_chains}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="JSON or TOML experiment manifest")
    p.add_argument("--precision", type=int, default=None, help="floating point bits (53 only)")
    p.add_argument("--threads", type=int, default=None, help="moduli points run concurrently")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "uniformize", "action", "grams"):
        sp = sub.add_parser(name)
        sp.add_argument("--point", action="append", help="finite puncture, e.g. 0.5+0.3j (repeat for n > 4)")
        if name == "grams":
            sp.add_argument("--no-tz", action="store_true", help="skip the Eisenstein-weighted Grams")
    sv = sub.add_parser("verify")
    sv.add_argument("suite", choices=sorted(SUITES) + ["all"])
    sub.add_parser("chains")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        data = {}
        if args.config:
            m = ExperimentManifest.load(args.config)
            data = m.to_json()
        elif args.command == "verify":
            from .suites import DEFAULT_POINTS
            if args.suite in DEFAULT_POINTS:
                data["points"] = DEFAULT_POINTS[args.suite]
        for key in ("precision", "threads"):
            if getattr(args, key) is not None:
                data[key] = getattr(args, key)
        manifest = ExperimentManifest.from_dict(data)
    except (ManifestError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    args.out = args.out or Path(manifest.out)
    try:
        return COMMANDS[args.command](args, manifest)
    except ArtifactError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        _write(args.out, {"command": args.command, "pass": False, "error": f"{type(exc).__name__}: {exc}"}, {})
        return EXIT_CHECKS_FAILED


if __name__ == "__main__":
    sys.exit(main())
