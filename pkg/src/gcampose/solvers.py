"""Minimal pose solvers: 2AC single camera, 2AC rig (cases 1-9), 6pt rig, 17pt linear."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _dense
from .constraints import (
    ac_rows_gcam,
    ac_rows_single,
    case_category,
    classify_case,
    equations_gcam,
    equations_single,
    equations_sixpt,
    pc_row_gcam,
)
from .errors import (
    DegenerateInput,
    InsufficientSpan,
    NoRealRoots,
    OneDimensionalFamily,
    RankCollapse,
    RankDeficientTemplate,
    ScaleUnobservable,
)
from .geometry import (
    Pose,
    Rig,
    RigCamera,
    cayley_to_rotation,
    normalize_rig_frame,
    skew,
    transform_rig_frame,
    untransform_pose,
)
from .polysolve import SolverConfig, default_config, solve_trivariate_system

_NULLSPACE_TOL = 1e-6


@dataclass(frozen=True)
class PoseCandidate:
    pose: Pose
    residual: float
    scale_valid: bool = True
    selection_score: float | None = None
    cayley: tuple | None = None


@dataclass(frozen=True)
class SolutionSet:
    candidates: tuple
    solver: str
    diagnostics: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))

    def __len__(self):
        return len(self.candidates)

    def best(self) -> PoseCandidate:
        if not self.candidates:
            raise NoRealRoots(f"{self.solver}: empty solution set")
        return self.candidates[0]


def _rows_dense(poly_matrix) -> np.ndarray:
    """PolyMatrix of quadratic entries -> (rows, cols, 10) coefficient array."""
    out = np.zeros((poly_matrix.rows, poly_matrix.cols, 10))
    for i in range(poly_matrix.rows):
        for j in range(poly_matrix.cols):
            out[i, j] = _dense.poly_to_vec(poly_matrix[i, j], 2)
    return out


def _eval_exps2(root):
    exps = np.array(_dense.monomials(2))
    q = np.asarray(root, dtype=float)
    return (q[0] ** exps[:, 0]) * (q[1] ** exps[:, 1]) * (q[2] ** exps[:, 2])


def _eval_rows(rows_dense: np.ndarray, root) -> np.ndarray:
    exps = np.array(_dense.monomials(2))
    q = np.asarray(root, dtype=float)
    mono = (q[0] ** exps[:, 0]) * (q[1] ** exps[:, 1]) * (q[2] ** exps[:, 2])
    return rows_dense @ mono


def recover_translation_single(mbar_eval: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit translation direction from the 5-row block plus the dropped-row score.

    mbar_eval is the full 6x3 stack evaluated at a candidate rotation; the sixth
    row is the retained excess constraint. Sign is left to the caller (cheirality).
    """
    block = mbar_eval[:5]
    _, sv, Vt = np.linalg.svd(block)
    if sv[1] < _NULLSPACE_TOL * max(sv[0], 1e-30):
        raise RankCollapse(f"second singular value {sv[1]:.2e} too small")
    t = Vt[-1]
    score = abs(float(mbar_eval[5] @ t))
    return t, score


def recover_translation_gcam(m_eval: np.ndarray, tol: float = _NULLSPACE_TOL) -> np.ndarray:
    """Metric translation from the 6x4 stack evaluated at a candidate rotation.

    Raises ScaleUnobservable when the nullspace is two-dimensional (the
    degenerate-motion translation family) or the homogeneous coordinate of the
    null vector vanishes; the exception carries the translation direction.
    """
    _, sv, Vt = np.linalg.svd(m_eval)
    if sv[2] < tol * max(sv[0], 1e-30):
        u, w = Vt[-2], Vt[-1]
        d = u * w[3] - w * u[3]
        n = np.linalg.norm(d[:3])
        direction = d[:3] / n if n > 0 else None
        raise ScaleUnobservable("two-dimensional translation family", direction=direction)
    v = Vt[-1]
    if abs(v[3]) < tol * np.linalg.norm(v):
        n = np.linalg.norm(v[:3])
        raise ScaleUnobservable(
            "homogeneous coordinate vanished", direction=v[:3] / n if n > 0 else None
        )
    return v[:3] / v[3]


def _triangulation_depths(R, t, x, xp):
    """Depths (lambda1, lambda2) with lambda2*xp = lambda1*R x + t."""
    A = np.column_stack([R @ x, -np.asarray(xp, dtype=float)])
    sol, *_ = np.linalg.lstsq(A, -np.asarray(t, dtype=float), rcond=None)
    return sol[0], sol[1]


def _cheirality_sign(R, t, acs) -> int:
    """+1 or -1: orient t so triangulated points sit in front of both views."""
    best_sign, best_count = 1, -1
    for sign in (1, -1):
        count = 0
        for ac in acs:
            l1, l2 = _triangulation_depths(R, sign * t, ac.x, ac.xp)
            count += (l1 > 0) + (l2 > 0)
        if count > best_count:
            best_sign, best_count = sign, count
    return best_sign


def solve_2ac_mono(ac1, ac2, cfg: SolverConfig | None = None) -> SolutionSet:
    """Relative pose of a single camera from two ACs; translation up to scale.

    Candidates are ranked by the dropped-row selection score, then residual.
    """
    if (
        np.linalg.norm(ac1.x - ac2.x) < 1e-9
        and np.linalg.norm(ac1.xp - ac2.xp) < 1e-9
    ):
        raise DegenerateInput("both correspondences share the same image points")
    eqs = equations_single(ac1, ac2)
    roots = _solve_roots(eqs, cfg)
    rows = np.vstack([_dense.dense_rows_single(ac1), _dense.dense_rows_single(ac2)])
    cands = []
    for root in roots:
        m_eval = _eval_rows(rows, root)
        try:
            t, score = recover_translation_single(m_eval)
        except RankCollapse:
            continue
        R = cayley_to_rotation(np.asarray(root))
        t = t * _cheirality_sign(R, t, (ac1, ac2))
        res = float(np.abs(m_eval @ t).max())
        cands.append(
            PoseCandidate(Pose(R, t), res, scale_valid=False, selection_score=score, cayley=root)
        )
    cands.sort(key=lambda c: (c.selection_score, c.residual))
    return SolutionSet(cands, "2ac-mono", {"n_roots": len(roots)})


def _solve_roots(eqs, cfg):
    """solve_trivariate_system with one expansion-degree bump on rank failure."""
    if cfg is None:
        cfg = default_config(eqs.expected_solution_count)
    try:
        return solve_trivariate_system(eqs, cfg)
    except RankDeficientTemplate:
        bumped = SolverConfig(
            expansion_degree=cfg.expansion_degree + 1,
            basis_size=cfg.basis_size,
            real_tolerance=cfg.real_tolerance,
            residual_tolerance=cfg.residual_tolerance,
        )
        return solve_trivariate_system(eqs, bumped)


def _gcam_candidates(eqs, blocks_dense, roots, frame=None) -> list:
    """Translation recovery + optional frame un-transformation for each root."""
    cands = []
    for root in roots:
        m_eval = _eval_rows(blocks_dense, root)
        R = cayley_to_rotation(np.asarray(root))
        scale_valid = True
        try:
            t = recover_translation_gcam(m_eval)
        except ScaleUnobservable as exc:
            scale_valid = False
            t = exc.direction if exc.direction is not None else np.zeros(3)
        res = float(np.abs(m_eval @ np.append(t, 1.0)).max()) if scale_valid else float(
            np.abs(m_eval[:, :3] @ t).max()
        )
        pose = Pose(R, t)
        if frame is not None:
            pose = untransform_pose(pose, *frame)
        cands.append(PoseCandidate(pose, res, scale_valid=scale_valid, cayley=root))
    cands.sort(key=lambda c: c.residual)
    return cands


def solve_2ac_gcam(
    ac1,
    ac2,
    rig: Rig,
    case: int | None = None,
    variant: str = "auto",
    cfg: SolverConfig | None = None,
    normalize_frame: bool | None = None,
) -> SolutionSet:
    """Rig relative pose from two ACs, routed by the camera-pair case.

    Case 6 defaults to the 56-root path, cases 1-5 and 7 to the 48-root path
    (case 7 through the rig-frame normalization), cases 8/9 to the
    single-camera solver with rotation-only output.
    """
    detected = classify_case(ac1, ac2)
    if case is not None and case != detected:
        raise ValueError(f"declared case {case} but correspondences classify as {detected}")
    case = detected
    category = case_category(case)
    if category == "mono_like":
        return _solve_mono_like(ac1, ac2, rig, case, cfg)
    if normalize_frame is None:
        normalize_frame = category == "intra"
    frame = None
    solve_rig = rig
    if normalize_frame:
        cam_a = rig[ac1.cam_first]
        cam_b = _other_camera(rig, ac1, ac2)
        R0, t0 = normalize_rig_frame(cam_a.s, cam_b.s)
        solve_rig, _ = transform_rig_frame(rig, Pose.identity(), R0, t0)
        frame = (R0, t0)
    eqs = equations_gcam(ac1, ac2, solve_rig, variant=variant)
    if eqs.one_dimensional:
        raise OneDimensionalFamily("intra-camera pair with E1 only; use E1+E2")
    roots = _solve_roots(eqs, cfg)
    blocks = np.vstack(
        [_dense.dense_rows_gcam(ac1, solve_rig), _dense.dense_rows_gcam(ac2, solve_rig)]
    )
    cands = _gcam_candidates(eqs, blocks, roots, frame)
    name = {"inter": "2ac-inter", "intra": "2ac-intra", "general": "2ac-case15"}[category]
    if category == "inter":
        name += "-56" if eqs.metadata.get("variant") == "E1" else "-48"
    return SolutionSet(cands, name, {"case": case, "n_roots": len(roots)})


def _other_camera(rig, ac1, ac2) -> RigCamera:
    cams = {ac1.cam_first, ac1.cam_second, ac2.cam_first, ac2.cam_second}
    cams.discard(ac1.cam_first)
    if not cams:
        raise DegenerateInput("correspondences touch a single camera")
    return rig[cams.pop()]


def _solve_mono_like(ac1, ac2, rig, case, cfg) -> SolutionSet:
    """Cases 8/9: both ACs share one camera pair; rotation via the mono solver."""
    i, j = ac1.cam_first, ac1.cam_second
    Qi, si = rig[i].Q, rig[i].s
    Qj, sj = rig[j].Q, rig[j].s
    mono = solve_2ac_mono(ac1, ac2, cfg)
    cands = []
    for c in mono.candidates:
        R = Qj @ c.pose.R @ Qi.T
        t = Qj @ c.pose.t - R @ si + sj  # unit-scale virtual translation; scale unknown
        cands.append(
            PoseCandidate(
                Pose(R, t),
                c.residual,
                scale_valid=False,
                selection_score=c.selection_score,
                cayley=c.cayley,
            )
        )
    return SolutionSet(cands, f"2ac-case{case}", {"case": case, "n_roots": len(mono)})


def solve_6pt_gcam(
    pcs,
    rig: Rig,
    layout: str = "auto",
    variant: str = "auto",
    cfg: SolverConfig | None = None,
    normalize_frame: bool | None = None,
) -> SolutionSet:
    """Rig relative pose from six PCs (inter default: 56-root path; intra: 48)."""
    pcs = list(pcs)
    if len(pcs) != 6:
        raise InsufficientSpan(f"need 6 point correspondences, got {len(pcs)}")
    all_intra = all(pc.cam_first == pc.cam_second for pc in pcs)
    detected = "intra" if all_intra else "inter"
    if layout != "auto" and layout != detected:
        raise ValueError(f"declared layout {layout!r} but correspondences are {detected}")
    layout = detected
    if normalize_frame is None:
        normalize_frame = layout == "intra"
    frame = None
    solve_rig = rig
    if normalize_frame:
        cams = sorted({pc.cam_first for pc in pcs} | {pc.cam_second for pc in pcs})
        if len(cams) < 2:
            raise DegenerateInput("intra six-point set touches a single camera")
        R0, t0 = normalize_rig_frame(rig[cams[0]].s, rig[cams[1]].s)
        solve_rig, _ = transform_rig_frame(rig, Pose.identity(), R0, t0)
        frame = (R0, t0)
    eqs = equations_sixpt(pcs, solve_rig, variant=variant)
    if eqs.one_dimensional:
        raise OneDimensionalFamily("intra six-point set with E1 only; use E1+E2")
    roots = _solve_roots(eqs, cfg)
    blocks = np.vstack([_dense.dense_pc_row(pc, solve_rig) for pc in pcs])
    cands = _gcam_candidates(eqs, blocks, roots, frame)
    name = f"6pt-{layout}"
    if layout == "inter":
        name += "-56" if eqs.metadata.get("variant") == "E1" else "-48"
    return SolutionSet(cands, name, {"n_roots": len(roots)})


def solve_17pt_linear(pcs, rig: Rig) -> SolutionSet:
    """Linear solve of the generalized epipolar constraint from >= 17 PCs.

    Unknowns are R and G = [t]x R stacked into R^18; the nullspace vector is
    projected onto the rotation manifold and t unskewed from G R^T.
    """
    pcs = list(pcs)
    if len(pcs) < 17:
        raise InsufficientSpan(f"need at least 17 point correspondences, got {len(pcs)}")
    pairs = {(pc.cam_first, pc.cam_second) for pc in pcs}
    if len(pairs) < 2:
        raise InsufficientSpan("correspondences span a single camera pair; scale unobservable")
    rows = np.empty((len(pcs), 18))
    for k, pc in enumerate(pcs):
        ci, cj = rig[pc.cam_first], rig[pc.cam_second]
        xj = cj.Q @ pc.xp
        xi = ci.Q @ pc.x
        coeff_G = np.outer(xj, xi)
        coeff_R = np.outer(xj, skew(ci.s) @ xi) + np.outer(skew(cj.s) @ xj, xi)
        rows[k, :9] = coeff_R.ravel()
        rows[k, 9:] = coeff_G.ravel()
    _, sv, Vt = np.linalg.svd(rows, full_matrices=True)
    rank = int((sv > 1e-9 * sv[0]).sum())
    if rank >= 17:
        null_vecs = [Vt[-1]]
    elif rank == 16:
        # axial rig (two centers, or collinear centers): the coefficient space is
        # 17-dimensional, so consistent data leaves a 2-dim nullspace; resolve it
        # by requiring the R-block to be a scaled rotation (R R^T = s^2 I).
        null_vecs = _axial_nullspace_candidates(Vt[-2], Vt[-1])
        if not null_vecs:
            raise NoRealRoots("no rotation-consistent vector in the axial nullspace")
    else:
        raise InsufficientSpan(
            f"rank {rank} < 16; correspondences do not span the camera pairs"
        )
    best = None
    for v in null_vecs:
        for sign in (1.0, -1.0):
            Rraw = sign * v[:9].reshape(3, 3)
            Graw = sign * v[9:].reshape(3, 3)
            U, S, Wt = np.linalg.svd(Rraw)
            Rhat = U @ np.diag([1.0, 1.0, np.linalg.det(U @ Wt)]) @ Wt
            if np.linalg.det(Rhat) < 0:
                continue
            scale = S.mean()
            if scale <= 0:
                continue
            if np.linalg.norm(Rraw - scale * Rhat) > 0.5 * scale:
                continue  # R-block nowhere near a scaled rotation: wrong sign
            G = Graw / scale
            M = G @ Rhat.T
            t = np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]]) / 2.0
            res = _gec_residual(pcs, rig, Rhat, t)
            if best is None or res < best[0]:
                best = (res, Rhat, t)
    if best is None:
        raise NoRealRoots("no valid rotation from the linear nullspace")
    res, R, t = best
    cand = PoseCandidate(Pose(R, t), res, scale_valid=True)
    return SolutionSet([cand], "17pt", {"n_pcs": len(pcs), "rank": rank})


def _axial_nullspace_candidates(v1, v2):
    """Combinations a*v1 + b*v2 whose leading 3x3 block is a scaled rotation.

    R(a,b) R(a,b)^T = a^2 A + ab B + b^2 C must be a multiple of I; the five
    trace-free conditions are linear in (a^2, ab, b^2) and the rank-1 symmetric
    structure of [[a^2, ab], [ab, b^2]] picks (a, b).
    """
    R1, R2 = v1[:9].reshape(3, 3), v2[:9].reshape(3, 3)
    A = R1 @ R1.T
    B = R1 @ R2.T + R2 @ R1.T
    C = R2 @ R2.T
    rows = []
    for M in (A, B, C):
        rows.append(
            [M[0, 1], M[0, 2], M[1, 2], M[0, 0] - M[1, 1], M[1, 1] - M[2, 2]]
        )
    L = np.array(rows).T  # (5, 3) acting on (a^2, ab, b^2)
    _, _, Wt = np.linalg.svd(L)
    x, y, z = Wt[-1]
    S = np.array([[x, y], [y, z]])
    w, V = np.linalg.eigh(S)
    out = []
    for k in np.argsort(np.abs(w))[::-1]:
        if abs(w[k]) < 1e-12:
            continue
        a, b = np.sqrt(abs(w[k])) * V[:, k]
        out.append(a * v1 + b * v2)
        break
    return out


def _gec_residual(pcs, rig, R, t) -> float:
    from .geometry import generalized_essential

    pose = Pose(R, t)
    worst = 0.0
    for pc in pcs:
        E = generalized_essential(pose, rig[pc.cam_first], rig[pc.cam_second])
        worst = max(worst, abs(float(pc.xp @ E @ pc.x)))
    return worst
