"""Command-line interface.

Exit codes: 0 success, 2 usage, 3 solver precondition violation, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import GcamPoseError, NoRealRoots
from .experiments import (
    bench_solvers,
    run_minimal_solver,
    run_stability_experiment,
    solver_spec,
    SOLVER_NAMES,
    _ransac_for,
)
from .finitefield import (
    DEFAULT_PRIME,
    MIN_PRIME,
    CONFIG_TYPES,
    count_solutions_fp,
    equations_for_scene,
    synth_instance_fp,
    verify_theorems,
)
from .geometry import AffineCorrespondence, PointCorrespondence
from .io import (
    correspondence_file_to_dict,
    dump_json,
    load_json,
    parse_correspondence_file,
    write_report_csv,
    write_report_sidecar,
    SchemaError,
)
from .ransac import RansacConfig, ransac_estimate
from .solvers import solve_17pt_linear, solve_2ac_gcam, solve_2ac_mono, solve_6pt_gcam
from .synth import PAPER_SIDES, SyntheticConfig, synth_scene

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_IO = 0, 2, 3, 4


def _solution_set_to_dict(sols) -> dict:
    return {
        "solver": sols.solver,
        "candidates": [
            {
                "R": [float(v) for v in c.pose.R.ravel()],
                "t": [float(v) for v in c.pose.t],
                "residual": c.residual,
                "scale_valid": c.scale_valid,
                "selection_score": c.selection_score,
                "cayley": list(c.cayley) if c.cayley is not None else None,
            }
            for c in sols.candidates
        ],
    }


def cmd_synth(args) -> int:
    if args.side not in PAPER_SIDES:
        print(f"warning: square side {args.side} px is a non-standard value", file=sys.stderr)
    cfg = SyntheticConfig(
        motion=args.mode,
        pixel_sigma=args.sigma,
        square_side=args.side,
        correspondence_mode=args.layout,
        n_acs=args.n_acs,
        n_ground=min(args.n_acs // 2, 50),
    )
    scene = synth_scene(cfg, args.seed)
    doc = correspondence_file_to_dict(scene.rig, scene.acs, scene.pose)
    try:
        dump_json(doc, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _load(path):
    try:
        return load_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)


def _pick(corr, indices, n, want_type):
    typed = [c for c in corr if isinstance(c, want_type)] if want_type else list(corr)
    if indices:
        try:
            chosen = [corr[i] for i in indices]
        except IndexError:
            print("error: correspondence index out of range", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        if want_type and not all(isinstance(c, want_type) for c in chosen):
            print("error: selected correspondences have the wrong type", file=sys.stderr)
            raise SystemExit(EXIT_PRECONDITION)
        typed = chosen
    if len(typed) < n:
        name = "affine" if want_type is AffineCorrespondence else "point"
        print(f"error: need {n} {name} correspondences, found {len(typed)}", file=sys.stderr)
        raise SystemExit(EXIT_PRECONDITION)
    return typed[:n] if n else typed


def cmd_solve(args) -> int:
    doc = _load(getattr(args, "in"))
    try:
        rig, corr, _ = parse_correspondence_file(doc)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    indices = [int(i) for i in args.indices.split(",")] if args.indices else None
    spec = solver_spec(args.solver)
    try:
        if spec["kind"] == "2ac":
            acs = _pick(corr, indices, 2, AffineCorrespondence)
            if args.solver == "2ac-mono":
                sols = solve_2ac_mono(acs[0], acs[1])
            else:
                sols = solve_2ac_gcam(acs[0], acs[1], rig, variant=spec["variant"])
        elif spec["kind"] == "6pt":
            pcs = [c.point_only() if isinstance(c, AffineCorrespondence) else c
                   for c in _pick(corr, indices, 6, None)]
            sols = solve_6pt_gcam(pcs, rig, variant=spec["variant"])
        else:
            pcs = [c.point_only() if isinstance(c, AffineCorrespondence) else c
                   for c in _pick(corr, indices, 0, None)]
            sols = solve_17pt_linear(pcs, rig)
    except NoRealRoots:
        sols = None
    except (GcamPoseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    doc = _solution_set_to_dict(sols) if sols is not None else {"solver": args.solver, "candidates": []}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_ransac(args) -> int:
    doc = _load(getattr(args, "in"))
    try:
        rig, corr, _ = parse_correspondence_file(doc)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    cfg = RansacConfig(
        confidence=args.confidence,
        inlier_threshold_deg=args.threshold_deg,
        max_iterations=args.max_iterations,
        seed=args.seed,
    )

    class _SceneShim:
        pass

    shim = _SceneShim()
    shim.rig = rig
    shim.acs = tuple(c for c in corr if isinstance(c, AffineCorrespondence))
    shim.pcs = tuple(
        c.point_only() if isinstance(c, AffineCorrespondence) else c for c in corr
    )
    try:
        pose, mask, stats = _ransac_for(args.solver, shim, cfg)
    except (GcamPoseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    out = {
        "pose": {"R": [float(v) for v in pose.R.ravel()], "t": [float(v) for v in pose.t]},
        "inliers": [bool(b) for b in mask],
        "iterations": stats["iterations"],
        "inlier_count": stats["inliers"],
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_verify_zp(args) -> int:
    if args.prime < MIN_PRIME:
        print(f"error: prime {args.prime} too small (minimum {MIN_PRIME}); "
              "products would overflow residue assumptions", file=sys.stderr)
        return EXIT_USAGE
    configs = sorted(CONFIG_TYPES) if args.config == "all" else [args.config]
    any_failures = False
    for config in configs:
        total_checks, failures, checks = 0, 0, None
        for k in range(args.trials):
            scene = synth_instance_fp(config, args.prime, args.seed + k)
            rep = verify_theorems(scene)
            total_checks += len(rep["checks"])
            failures += rep["failures"]
            if checks is None:
                checks = rep["checks"]
        summary = {
            "config": config,
            "p": args.prime,
            "seed": args.seed,
            "trials": args.trials,
            "total_checks": total_checks,
            "failures": failures,
            "checks": checks if args.trials == 1 else None,
            "solution_count": None,
        }
        if args.count:
            scene = synth_instance_fp(config, args.prime, args.seed)
            eqs = equations_for_scene(scene, variant=args.variant)
            summary["solution_count"] = count_solutions_fp(eqs)
            summary["variant"] = eqs.metadata.get("variant")
        any_failures |= failures > 0
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 1 if any_failures else EXIT_OK


def cmd_stability(args) -> int:
    report = run_stability_experiment(args.solver, trials=args.trials, seed=args.seed)
    doc = report.to_dict()
    if args.out:
        rows = []
        samples = report.samples.get(args.solver, {})
        n = len(samples.get("eps_R_chordal", []))
        for i in range(n):
            rows.append(
                (i, args.solver, "", samples["eps_t"][i], "", samples["eps_R_chordal"][i],
                 report.timings_us.get(args.solver, ""))
            )
        try:
            write_report_csv(args.out, rows)
            write_report_sidecar(args.out, doc["config"], args.seed)
            dump_json(doc["histograms"], str(args.out) + ".hist.json")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    print(json.dumps({k: v for k, v in doc.items() if k != "histograms"}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.runs == 0:
        print(json.dumps({}))
        return EXIT_OK
    out = bench_solvers(solvers=args.solvers.split(",") if args.solvers else SOLVER_NAMES,
                        runs=args.runs, seed=args.seed)
    if args.out:
        try:
            dump_json(out, args.out)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gcampose", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic correspondence file")
    p.add_argument("--mode", choices=("forward", "sideways", "random"), default="random")
    p.add_argument("--sigma", type=float, default=0.0, help="pixel noise std dev")
    p.add_argument("--side", type=float, default=30.0, help="affinity square side (px)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layout", choices=("inter", "intra", "mixed", "mono"), default="inter")
    p.add_argument("--n-acs", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("solve", help="run one minimal solver on a dataset")
    p.add_argument("--in", required=True)
    p.add_argument("--solver", choices=SOLVER_NAMES, required=True)
    p.add_argument("--indices", default=None, help="comma-separated correspondence indices")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("ransac", help="robust estimation over a dataset")
    p.add_argument("--in", required=True)
    p.add_argument("--solver", choices=SOLVER_NAMES, required=True)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--threshold-deg", type=float, default=0.1)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_ransac)

    p = sub.add_parser("verify-zp", help="exact theorem checks on Z_p instances")
    p.add_argument("--config", choices=tuple(sorted(CONFIG_TYPES)) + ("all",), default="all")
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", action="store_true", help="also count solutions (Groebner)")
    p.add_argument("--variant", default="auto", choices=("auto", "E1", "E1+E2"))
    p.set_defaults(fn=cmd_verify_zp)

    p = sub.add_parser("stability", help="noise-free stability histograms")
    p.add_argument("--solver", choices=SOLVER_NAMES, default="2ac-inter-56")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV path (JSON sidecars written next to it)")
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("bench", help="solver timing benchmark")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solvers", default=None, help="comma-separated subset")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
