"""Stability, noise-sweep and timing experiment runners.

All randomness flows from a base seed; per-trial seeds are derived
deterministically so paired-seed comparisons across configurations see the
same scenes. Trials can run in worker processes when GCAM_POSE_THREADS > 1.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GcamPoseError, NoModelFound
from .metrics import chordal_rotation_error, rotation_error, translation_errors
from .ransac import RansacConfig, pair_sampler, ransac_estimate, stratified_sixpt_sampler
from .solvers import solve_17pt_linear, solve_2ac_gcam, solve_2ac_mono, solve_6pt_gcam
from .synth import SyntheticConfig, inject_outliers, synth_scene

SOLVER_NAMES = (
    "2ac-mono",
    "2ac-inter-56",
    "2ac-inter-48",
    "2ac-intra",
    "6pt-inter-56",
    "6pt-inter-48",
    "6pt-intra",
    "17pt",
)

_SPECS = {
    "2ac-mono": dict(mode="mono", sample=2, kind="2ac"),
    "2ac-inter-56": dict(mode="inter", sample=2, kind="2ac", variant="E1"),
    "2ac-inter-48": dict(mode="inter", sample=2, kind="2ac", variant="E1+E2"),
    "2ac-intra": dict(mode="intra", sample=2, kind="2ac", variant="E1+E2"),
    "6pt-inter-56": dict(mode="inter", sample=6, kind="6pt", variant="E1"),
    "6pt-inter-48": dict(mode="inter", sample=6, kind="6pt", variant="E1+E2"),
    "6pt-intra": dict(mode="intra", sample=6, kind="6pt", variant="E1+E2"),
    "17pt": dict(mode="mixed", sample=17, kind="17pt"),
}


def solver_spec(name: str) -> dict:
    if name not in _SPECS:
        raise ValueError(f"unknown solver {name!r}; choose from {SOLVER_NAMES}")
    return dict(_SPECS[name])


def run_minimal_solver(name: str, scene, sample=None, normalize_frame=None):
    """One solver call on a scene's (or explicit) minimal sample; returns SolutionSet."""
    spec = solver_spec(name)
    if spec["kind"] == "2ac":
        acs = sample if sample is not None else scene.acs[: spec["sample"]]
        if name == "2ac-mono":
            return solve_2ac_mono(acs[0], acs[1])
        return solve_2ac_gcam(
            acs[0], acs[1], scene.rig, variant=spec["variant"], normalize_frame=normalize_frame
        )
    if spec["kind"] == "6pt":
        pcs = sample if sample is not None else scene.pcs[: spec["sample"]]
        return solve_6pt_gcam(
            pcs, scene.rig, variant=spec["variant"], normalize_frame=normalize_frame
        )
    pcs = sample if sample is not None else scene.pcs
    return solve_17pt_linear(pcs, scene.rig)


def _trial_seed(base: int, trial: int) -> int:
    return base * 1_000_003 + trial


@dataclass
class ExperimentReport:
    name: str
    config: dict
    seed: int
    samples: dict = dc_field(default_factory=dict)  # label -> {metric -> list}
    timings_us: dict = dc_field(default_factory=dict)

    def add(self, label: str, **metrics):
        slot = self.samples.setdefault(label, {})
        for k, v in metrics.items():
            slot.setdefault(k, []).append(float(v))

    def median(self, label: str, metric: str) -> float:
        vals = [v for v in self.samples[label][metric] if np.isfinite(v)]
        return float(np.median(vals)) if vals else float("nan")

    def medians(self) -> dict:
        return {
            label: {m: self.median(label, m) for m in metrics}
            for label, metrics in self.samples.items()
        }

    def log10_histogram(self, label: str, metric: str, lo=-17.0, hi=2.0, width=0.5):
        vals = np.array(self.samples[label][metric])
        vals = vals[np.isfinite(vals) & (vals > 0)]
        edges = np.arange(lo, hi + width, width)
        counts, edges = np.histogram(np.log10(np.clip(vals, 10.0**lo, 10.0**hi)), bins=edges)
        return counts, edges

    def log10_mode(self, label: str, metric: str) -> float:
        counts, edges = self.log10_histogram(label, metric)
        if counts.sum() == 0:
            return float("nan")
        k = int(np.argmax(counts))
        return float((edges[k] + edges[k + 1]) / 2.0)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "config": self.config,
            "seed": self.seed,
            "medians": self.medians(),
            "timings_us": self.timings_us,
        }
        out["histograms"] = {
            label: {
                metric: {
                    "counts": self.log10_histogram(label, metric)[0].tolist(),
                    "edges": self.log10_histogram(label, metric)[1].tolist(),
                    "mode_log10": self.log10_mode(label, metric),
                }
                for metric in metrics
            }
            for label, metrics in self.samples.items()
        }
        return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("GCAM_POSE_THREADS", "1")))
    except ValueError:
        return 1


def _map_trials(fn, args_list):
    n = _workers()
    if n == 1 or len(args_list) < 4:
        return [fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, args_list, chunksize=max(1, len(args_list) // (8 * n))))


def _stability_trial(args):
    name, base_cfg, seed, normalize_frame = args
    spec = solver_spec(name)
    cfg = base_cfg.with_(
        correspondence_mode=spec["mode"],
        n_acs=spec["sample"],
        n_ground=min(1, spec["sample"]),
        pixel_sigma=0.0,
    )
    try:
        scene = synth_scene(cfg, seed)
        t0 = time.perf_counter()
        sols = run_minimal_solver(name, scene, normalize_frame=normalize_frame)
        dt = (time.perf_counter() - t0) * 1e6
    except GcamPoseError:
        return float("inf"), float("inf"), float("nan")
    rotations = [c.pose.R for c in sols.candidates]
    eps_chordal = chordal_rotation_error(scene.pose.R, rotations)
    eps_t = float("inf")
    for c in sols.candidates:
        if name == "2ac-mono" or not c.scale_valid:
            tn = np.linalg.norm(scene.pose.t)
            if tn > 0 and np.linalg.norm(c.pose.t) > 0:
                e, _ = translation_errors(scene.pose.t / tn, c.pose.t / np.linalg.norm(c.pose.t))
            else:
                e = float("inf")
        else:
            e, _ = translation_errors(scene.pose.t, c.pose.t)
        eps_t = min(eps_t, e)
    return eps_chordal, eps_t, dt


def run_stability_experiment(
    config_class: str,
    trials: int = 10000,
    seed: int = 0,
    base_config: SyntheticConfig | None = None,
    normalize_frame: bool | None = None,
) -> ExperimentReport:
    """Noise-free error distributions for one solver class (log10 histograms)."""
    base = base_config or SyntheticConfig()
    report = ExperimentReport(
        "stability", {"solver": config_class, "trials": trials, "normalize_frame": normalize_frame}, seed
    )
    args = [(config_class, base, _trial_seed(seed, k), normalize_frame) for k in range(trials)]
    times = []
    for eps_chordal, eps_t, dt in _map_trials(_stability_trial, args):
        report.add(config_class, eps_R_chordal=eps_chordal, eps_t=eps_t)
        if np.isfinite(dt):
            times.append(dt)
    if times:
        report.timings_us[config_class] = float(np.mean(times))
    return report


def _sweep_trial(args):
    name, base_cfg, sigma, side, seed, ransac_cfg = args
    spec = solver_spec(name)
    cfg = base_cfg.with_(
        correspondence_mode=spec["mode"], pixel_sigma=sigma, square_side=side
    )
    scene = synth_scene(cfg, seed)
    try:
        pose, mask, stats = _ransac_for(name, scene, ransac_cfg)
    except (NoModelFound, GcamPoseError):
        return float("inf"), float("inf"), float("inf")
    eps_R = rotation_error(scene.pose.R, pose.R)
    try:
        eps_t, eps_dir = translation_errors(scene.pose.t, pose.t)
    except GcamPoseError:
        eps_t, eps_dir = float("inf"), float("inf")
    return eps_R, eps_t, eps_dir


def _ransac_for(name: str, scene, ransac_cfg: RansacConfig):
    spec = solver_spec(name)
    rig = scene.rig
    if spec["kind"] == "2ac":
        corr = scene.acs
        if name == "2ac-mono":
            solver = lambda s: solve_2ac_mono(s[0], s[1])
            sampler = None
        else:
            variant = spec["variant"]
            solver = lambda s: solve_2ac_gcam(s[0], s[1], rig, variant=variant)
            if spec["mode"] == "inter":
                want = lambda a, b: (b.cam_first, b.cam_second) == (a.cam_second, a.cam_first) and a.cam_first != a.cam_second
            else:
                want = lambda a, b: a.cam_first == a.cam_second and b.cam_first == b.cam_second and a.cam_first != b.cam_first
            sampler = pair_sampler(want)
    elif spec["kind"] == "6pt":
        corr = scene.pcs
        variant = spec["variant"]
        solver = lambda s: solve_6pt_gcam(s, rig, variant=variant)
        sampler = stratified_sixpt_sampler
    else:
        corr = scene.pcs
        solver = lambda s: solve_17pt_linear(s, rig)
        sampler = lambda rng, cs: tuple(cs[i] for i in rng.choice(len(cs), size=17, replace=False))
    return ransac_estimate(corr, solver, rig, ransac_cfg, sampler=sampler)


def run_noise_sweep(
    motion: str,
    sigmas,
    solvers,
    trials: int = 1000,
    seed: int = 0,
    side: float = 30.0,
    ransac_cfg: RansacConfig | None = None,
    base_config: SyntheticConfig | None = None,
) -> ExperimentReport:
    """Median errors per noise level per solver, RANSAC-wrapped, paired seeds."""
    base = (base_config or SyntheticConfig()).with_(motion=motion)
    rcfg = ransac_cfg or RansacConfig(max_iterations=50)
    report = ExperimentReport(
        "noise_sweep",
        {"motion": motion, "sigmas": list(sigmas), "solvers": list(solvers), "trials": trials, "side": side},
        seed,
    )
    for sigma in sigmas:
        for name in solvers:
            args = [
                (name, base, float(sigma), side, _trial_seed(seed, k), rcfg)
                for k in range(trials)
            ]
            for eps_R, eps_t, eps_dir in _map_trials(_sweep_trial, args):
                report.add(f"{name}@{sigma}", eps_R=eps_R, eps_t=eps_t, eps_t_dir=eps_dir)
    return report


def run_ransac_benchmark(
    trials: int = 100,
    outlier_fraction: float = 0.3,
    sigma: float = 1.0,
    solver: str = "2ac-inter-56",
    seed: int = 0,
    ransac_cfg: RansacConfig | None = None,
) -> ExperimentReport:
    """Outlier-contaminated robust estimation: pose error and inlier precision."""
    rcfg = ransac_cfg or RansacConfig(max_iterations=200)
    spec = solver_spec(solver)
    base = SyntheticConfig(pixel_sigma=sigma, correspondence_mode=spec["mode"])
    report = ExperimentReport(
        "ransac_benchmark",
        {"solver": solver, "outlier_fraction": outlier_fraction, "sigma": sigma, "trials": trials},
        seed,
    )
    for k in range(trials):
        s = _trial_seed(seed, k)
        scene = synth_scene(base, s)
        corrupted, true_mask = inject_outliers(scene, outlier_fraction, s + 1)
        try:
            pose, mask, stats = _ransac_for(solver, corrupted, rcfg)
        except (NoModelFound, GcamPoseError):
            report.add(solver, eps_R=float("inf"), precision=0.0, recall=0.0, iterations=rcfg.max_iterations)
            continue
        found = int(mask.sum())
        true_pos = int((mask & true_mask).sum())
        precision = true_pos / found if found else 0.0
        recall = true_pos / int(true_mask.sum())
        report.add(
            solver,
            eps_R=rotation_error(corrupted.pose.R, pose.R),
            precision=precision,
            recall=recall,
            iterations=stats["iterations"],
        )
    return report


def bench_solvers(solvers=SOLVER_NAMES, runs: int = 200, seed: int = 0) -> dict:
    """Mean/median microseconds per solver call on prepared noise-free samples."""
    out = {}
    for name in solvers:
        spec = solver_spec(name)
        n = spec["sample"] if spec["kind"] != "17pt" else 17
        cfg = SyntheticConfig(
            correspondence_mode=spec["mode"], n_acs=max(n, spec["sample"]), n_ground=1, pixel_sigma=0.0
        )
        scenes = [synth_scene(cfg, _trial_seed(seed, k)) for k in range(runs)]
        times = []
        for scene in scenes:
            t0 = time.perf_counter()
            try:
                run_minimal_solver(name, scene)
            except GcamPoseError:
                continue
            times.append((time.perf_counter() - t0) * 1e6)
        arr = np.array(times) if times else np.array([float("nan")])
        out[name] = {
            "mean_us": float(np.mean(arr)),
            "median_us": float(np.median(arr)),
            "runs": len(times),
        }
    return out
