"""Hidden-variable constraint matrices and minor-quotient equation systems.

Each affine correspondence contributes three rows linear in the translation;
stacking two correspondences gives the 6x3 (single camera) or 6x4 (rig)
coefficient matrix whose rank deficiency yields rotation-only equations: the
minor determinants all carry the factor q_x^2+q_y^2+q_z^2+1, which is divided
out exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from . import _dense
from .errors import AngleAtPi, NonzeroRemainder, NoSharedTriple
from .fields import REAL, RealField
from .geometry import AffineCorrespondence, PointCorrespondence, Rig  # noqa: F401  (public API types)
from .poly import Poly3, PolyMatrix, det_poly, exact_quotient

MONO_SOLUTIONS = 20
INTER_E1_SOLUTIONS = 56
E1_E2_SOLUTIONS = 48
CASE15_E1_SOLUTIONS = 64


class SourceConfig(str, Enum):
    MONO_2AC = "mono_2ac"
    GCAM_CASE1TO5 = "gcam_case1to5"
    GCAM_INTER = "gcam_inter"
    GCAM_INTRA = "gcam_intra"
    SIXPT_INTER = "sixpt_inter"
    SIXPT_INTRA = "sixpt_intra"


@dataclass(frozen=True)
class EquationSystem:
    polys: tuple
    tags: tuple
    expected_solution_count: int
    source_config: SourceConfig
    case: int | None = None
    one_dimensional: bool = False
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.polys) != len(self.tags):
            raise ValueError("one tag per polynomial")


def cayley_numerator_matrix(field=REAL) -> PolyMatrix:
    """(q_x^2+q_y^2+q_z^2+1) * R_cayley as a 3x3 quadratic polynomial matrix."""
    f = field.from_int

    def p(terms):
        return Poly3.from_terms({e: f(c) for e, c in terms.items()}, field)

    rows = [
        [
            p({(0, 0, 0): 1, (2, 0, 0): 1, (0, 2, 0): -1, (0, 0, 2): -1}),
            p({(1, 1, 0): 2, (0, 0, 1): -2}),
            p({(1, 0, 1): 2, (0, 1, 0): 2}),
        ],
        [
            p({(1, 1, 0): 2, (0, 0, 1): 2}),
            p({(0, 0, 0): 1, (2, 0, 0): -1, (0, 2, 0): 1, (0, 0, 2): -1}),
            p({(0, 1, 1): 2, (1, 0, 0): -2}),
        ],
        [
            p({(1, 0, 1): 2, (0, 1, 0): -2}),
            p({(0, 1, 1): 2, (1, 0, 0): 2}),
            p({(0, 0, 0): 1, (2, 0, 0): -1, (0, 2, 0): -1, (0, 0, 2): 1}),
        ],
    ]
    return PolyMatrix.from_rows(rows)


# ---------------------------------------------------------------------------
# row construction


def _scale_vec(vec, a, field):
    return [p.scale(a) for p in vec]


def _add_vec(u, v):
    return [a + b for a, b in zip(u, v)]


def _cross_num_poly(a, v):
    """Cross product of a numeric 3-vector with a polynomial 3-vector."""
    return [
        v[2].scale(a[1]) - v[1].scale(a[2]),
        v[0].scale(a[2]) - v[2].scale(a[0]),
        v[1].scale(a[0]) - v[0].scale(a[1]),
    ]


def _matvec(M: PolyMatrix, x):
    out = []
    for i in range(3):
        acc = M[i, 0].scale(x[0])
        acc = acc + M[i, 1].scale(x[1])
        acc = acc + M[i, 2].scale(x[2])
        out.append(acc)
    return out


def _num_times_polymat(A, M: PolyMatrix) -> PolyMatrix:
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            acc = M[0, j].scale(A[i][0])
            acc = acc + M[1, j].scale(A[i][1])
            acc = acc + M[2, j].scale(A[i][2])
            row.append(acc)
        rows.append(row)
    return PolyMatrix.from_rows(rows)


def _polymat_times_num(M: PolyMatrix, A) -> PolyMatrix:
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            acc = M[i, 0].scale(A[0][j])
            acc = acc + M[i, 1].scale(A[1][j])
            acc = acc + M[i, 2].scale(A[2][j])
            row.append(acc)
        rows.append(row)
    return PolyMatrix.from_rows(rows)


def _skew_rows(v):
    return [[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]]


def ac_rows_single(ac, field=REAL) -> PolyMatrix:
    """3x3 coefficient matrix of one AC for a single camera (columns multiply t).

    Rows: -(x' x Qx)^T, -(x' x Qc1 + a1 x Qx)^T, -(x' x Qc2 + a2 x Qx)^T, with Q
    the homogenized Cayley matrix, c1/c2 the first two columns of Q and a1/a2
    the columns of the local affinity lifted to 3-vectors. Accepts any object
    with x/xp 3-vectors and a 2x2 A whose entries live in the field.
    """
    Q = cayley_numerator_matrix(field)
    zero = field.from_int(0)
    x, xp = list(ac.x), list(ac.xp)
    a1 = [ac.A[0][0], ac.A[1][0], zero]
    a2 = [ac.A[0][1], ac.A[1][1], zero]
    Qx = _matvec(Q, x)
    Qc1 = [Q[0, 0], Q[1, 0], Q[2, 0]]
    Qc2 = [Q[0, 1], Q[1, 1], Q[2, 1]]
    r1 = [(-p) for p in _cross_num_poly(xp, Qx)]
    r2 = [(-p) for p in _add_vec(_cross_num_poly(xp, Qc1), _cross_num_poly(a1, Qx))]
    r3 = [(-p) for p in _add_vec(_cross_num_poly(xp, Qc2), _cross_num_poly(a2, Qx))]
    return PolyMatrix.from_rows([r1, r2, r3])


def _transpose3(M):
    return [[M[j][i] for j in range(3)] for i in range(3)]


def _essential_columns(rig, cam_i: int, cam_j: int, field=REAL):
    """E_k split by translation component: [E_x, E_y, E_z, E_const], each 3x3 polys."""
    Q = cayley_numerator_matrix(field)
    zero, one = field.from_int(0), field.from_int(1)
    Qi = rig[cam_i].Q
    si = rig[cam_i].s
    Qj = rig[cam_j].Q
    sj = rig[cam_j].s
    QjT = _transpose3(Qj)
    cols = []
    for c in range(3):
        e = [zero, zero, zero]
        e[c] = one
        M1 = _num_times_polymat(_skew_rows(e), Q)
        cols.append(_polymat_times_num(_num_times_polymat(QjT, M1), Qi))
    T1 = _polymat_times_num(Q, _skew_rows(si))
    T2 = _num_times_polymat(_skew_rows(sj), Q)
    diff = PolyMatrix.from_rows(
        [[T1[i, j] - T2[i, j] for j in range(3)] for i in range(3)]
    )
    cols.append(_polymat_times_num(_num_times_polymat(QjT, diff), Qi))
    return cols


def ac_rows_gcam(ac, rig, field=REAL) -> PolyMatrix:
    """3x4 coefficient matrix of one AC for a rig; columns multiply (t_x,t_y,t_z,1)."""
    cols = _essential_columns(rig, ac.cam_first, ac.cam_second, field)
    zero = field.from_int(0)
    x, xp = list(ac.x), list(ac.xp)
    a1 = [ac.A[0][0], ac.A[1][0], zero]
    a2 = [ac.A[0][1], ac.A[1][1], zero]
    rows = [[None] * 4 for _ in range(3)]
    for c, E in enumerate(cols):
        Ex = _matvec(E, x)
        acc = Ex[0].scale(xp[0]) + Ex[1].scale(xp[1]) + Ex[2].scale(xp[2])
        rows[0][c] = acc
        ET = PolyMatrix.from_rows([[E[j, i] for j in range(3)] for i in range(3)])
        ETxp = _matvec(ET, xp)
        for k, a in ((1, a1), (2, a2)):
            acc = ETxp[k - 1]
            acc = acc + Ex[0].scale(a[0]) + Ex[1].scale(a[1]) + Ex[2].scale(a[2])
            rows[k][c] = acc
    return PolyMatrix.from_rows(rows)


def pc_row_gcam(pc, rig, field=REAL) -> PolyMatrix:
    """1x4 epipolar row of one PC for a rig."""
    cols = _essential_columns(rig, pc.cam_first, pc.cam_second, field)
    x, xp = list(pc.x), list(pc.xp)
    row = []
    for E in cols:
        Ex = _matvec(E, x)
        row.append(Ex[0].scale(xp[0]) + Ex[1].scale(xp[1]) + Ex[2].scale(xp[2]))
    return PolyMatrix.from_rows([row])


# ---------------------------------------------------------------------------
# case taxonomy


def classify_case(ac1, ac2) -> int:
    """Case number 1..9 for a pair of correspondences.

    6 = inter (crossed camera pair), 7 = intra (two distinct cameras),
    8 = both through one camera, 9 = both through one ordered camera pair;
    1..5 = the remaining layouts, numbered by how many distinct cameras they
    touch and where the shared camera sits (convention documented in code).
    """
    p1 = (ac1.cam_first, ac1.cam_second)
    p2 = (ac2.cam_first, ac2.cam_second)
    intra1 = p1[0] == p1[1]
    intra2 = p2[0] == p2[1]
    if p1 == p2:
        return 8 if intra1 else 9
    if intra1 and intra2:
        return 7
    if p2 == (p1[1], p1[0]) and not intra1:
        return 6
    cams = {p1[0], p1[1], p2[0], p2[1]}
    if len(cams) == 4:
        return 1
    if len(cams) == 3:
        if intra1 or intra2:
            return 4
        if p1[0] == p2[0] or p1[1] == p2[1]:
            return 2
        return 3
    return 5


def case_category(case: int) -> str:
    """Solver routing bucket: 'mono_like', 'inter', 'intra' or 'general'."""
    if case in (8, 9):
        return "mono_like"
    if case == 6:
        return "inter"
    if case == 7:
        return "intra"
    return "general"


# ---------------------------------------------------------------------------
# equation emission


def _emit_minors_real(M, with_e2: bool):
    """Dense fast path: 15 quotiented 4x4 minors (+ per-block 3x3) of a 6x4 stack."""
    quads = list(itertools.combinations(range(6), 4))
    dets = _dense.det4_from_blocks(M, quads)
    quots, rel = _dense.quotient_by_norm(dets, 8)
    _check_rel(rel)
    polys = [_dense.vec_to_poly(_norm_vec(v), 6) for v in quots]
    tags = ["E1"] * len(polys)
    if with_e2:
        E2in = M[:, :3, :].reshape(2, 3, 3, 10)
        d3 = _dense.det3_batch(E2in)
        q3, rel3 = _dense.quotient_by_norm(d3, 6)
        _check_rel(rel3)
        polys += [_dense.vec_to_poly(_norm_vec(v), 4) for v in q3]
        tags += ["E2", "E2"]
    return polys, tags


def _norm_vec(v):
    s = np.abs(v).max()
    return v / s if s > 0 else v


def _check_rel(rel, tol=1e-9):
    if rel > tol:
        raise NonzeroRemainder(f"minor not divisible: relative remainder {rel:.2e}")


def _emit_minors_exact(rows, row_sets):
    out = []
    for sel in row_sets:
        sub = PolyMatrix.from_rows([rows[i] for i in sel])
        out.append(exact_quotient(det_poly(sub)))
    return out


def equations_single(ac1: AffineCorrespondence, ac2: AffineCorrespondence, field=REAL) -> EquationSystem:
    """10 quartic equations from the 5x3 stack (last row dropped), 20 solutions.

    The dropped sixth row is kept in metadata for downstream solution selection.
    """
    triples = list(itertools.combinations(range(5), 3))
    if isinstance(field, RealField):
        R = np.vstack([_dense.dense_rows_single(ac1), _dense.dense_rows_single(ac2)])
        dets = _dense.det3_batch(R[np.array(triples)])
        quots, rel = _dense.quotient_by_norm(dets, 6)
        _check_rel(rel)
        polys = [_dense.vec_to_poly(_norm_vec(v), 4) for v in quots]
        dropped = tuple(_dense.vec_to_poly(v, 2) for v in R[5])
    else:
        m1, m2 = ac_rows_single(ac1, field), ac_rows_single(ac2, field)
        rows = [[m1[i, j] for j in range(3)] for i in range(3)]
        rows += [[m2[i, j] for j in range(3)] for i in range(3)]
        polys = _emit_minors_exact(rows, triples)
        dropped = tuple(rows[5])
    return EquationSystem(
        polys=polys,
        tags=("E1",) * len(polys),
        expected_solution_count=MONO_SOLUTIONS,
        source_config=SourceConfig.MONO_2AC,
        metadata={"dropped_row": dropped, "row_triples": tuple(triples)},
    )


def equations_gcam(
    ac1,
    ac2,
    rig,
    variant: str = "auto",
    field=REAL,
) -> EquationSystem:
    """Minor-quotient system of the stacked 6x4 rig constraint matrix.

    variant: 'E1' (15 sextics) or 'E1+E2' (adds the two quartic 3x3-block
    quotients); 'auto' picks E1 for the inter case and E1+E2 otherwise.
    """
    case = classify_case(ac1, ac2)
    category = case_category(case)
    if variant == "auto":
        variant = "E1" if category == "inter" else "E1+E2"
    with_e2 = variant == "E1+E2"
    if isinstance(field, RealField):
        M = np.vstack([_dense.dense_rows_gcam(ac1, rig), _dense.dense_rows_gcam(ac2, rig)])
        polys, tags = _emit_minors_real(M, with_e2)
    else:
        blocks = [ac_rows_gcam(ac1, rig, field), ac_rows_gcam(ac2, rig, field)]
        rows = [[blk[i, j] for j in range(4)] for blk in blocks for i in range(3)]
        quads = list(itertools.combinations(range(6), 4))
        polys = _emit_minors_exact(rows, quads)
        tags = ["E1"] * 15
        if with_e2:
            for blk in blocks:
                sub = blk.submatrix(range(3), range(3))
                polys.append(exact_quotient(det_poly(sub)))
                tags.append("E2")
    one_dim = category == "intra" and not with_e2
    if category == "inter":
        expected = INTER_E1_SOLUTIONS if not with_e2 else E1_E2_SOLUTIONS
        source = SourceConfig.GCAM_INTER
    elif category == "intra":
        expected = E1_E2_SOLUTIONS
        source = SourceConfig.GCAM_INTRA
    else:
        expected = E1_E2_SOLUTIONS if with_e2 else CASE15_E1_SOLUTIONS
        source = SourceConfig.GCAM_CASE1TO5
    return EquationSystem(
        polys=polys,
        tags=tags,
        expected_solution_count=expected,
        source_config=source,
        case=case,
        one_dimensional=one_dim,
        metadata={"variant": variant},
    )


def equations_sixpt(
    pcs,
    rig,
    variant: str = "auto",
    field=REAL,
) -> EquationSystem:
    """Six-point system: 15 sextic minors of the 6x4 stack, plus one quartic per
    same-camera-pair triple when E2 is requested."""
    pcs = list(pcs)
    if len(pcs) != 6:
        raise ValueError(f"need exactly 6 point correspondences, got {len(pcs)}")
    all_intra = all(pc.cam_first == pc.cam_second for pc in pcs)
    if variant == "auto":
        variant = "E1" if not all_intra else "E1+E2"
    with_e2 = variant == "E1+E2"
    by_pair: dict = {}
    for k, pc in enumerate(pcs):
        by_pair.setdefault((pc.cam_first, pc.cam_second), []).append(k)
    triples = [
        tri
        for ks in by_pair.values()
        for tri in itertools.combinations(ks, 3)
    ]
    if with_e2 and not triples:
        raise NoSharedTriple("E2 requested but no camera pair is shared by three PCs")
    quads = list(itertools.combinations(range(6), 4))
    if isinstance(field, RealField):
        M = np.vstack([_dense.dense_pc_row(pc, rig) for pc in pcs])
        dets = _dense.det4_from_blocks(M, quads)
        quots, rel = _dense.quotient_by_norm(dets, 8)
        _check_rel(rel)
        polys = [_dense.vec_to_poly(_norm_vec(v), 6) for v in quots]
        tags = ["E1"] * 15
        if with_e2:
            tri_in = M[np.array(triples)][:, :, :3, :]
            d3 = _dense.det3_batch(tri_in)
            q3, rel3 = _dense.quotient_by_norm(d3, 6)
            _check_rel(rel3)
            polys += [_dense.vec_to_poly(_norm_vec(v), 4) for v in q3]
            tags += ["E2"] * len(triples)
    else:
        row_mats = [pc_row_gcam(pc, rig, field) for pc in pcs]
        rows = [[rm[0, j] for j in range(4)] for rm in row_mats]
        polys = _emit_minors_exact(rows, quads)
        tags = ["E1"] * 15
        if with_e2:
            for tri in triples:
                sub = PolyMatrix.from_rows([rows[k][:3] for k in tri])
                polys.append(exact_quotient(det_poly(sub)))
                tags.append("E2")
    one_dim = all_intra and not with_e2
    expected = E1_E2_SOLUTIONS if with_e2 else INTER_E1_SOLUTIONS
    return EquationSystem(
        polys=polys,
        tags=tags,
        expected_solution_count=expected,
        source_config=SourceConfig.SIXPT_INTRA if all_intra else SourceConfig.SIXPT_INTER,
        one_dimensional=one_dim,
        metadata={"variant": variant, "shared_triples": tuple(triples)},
    )


def rotation_angle_constraint(theta: float) -> Poly3:
    """q_x^2 + q_y^2 + q_z^2 - tan^2(theta/2) = 0 for a known rotation angle."""
    if abs(theta) >= math.pi:
        raise AngleAtPi(f"|theta| = {abs(theta)} >= pi")
    c = math.tan(theta / 2.0) ** 2
    return Poly3.from_terms(
        {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0, (0, 0, 0): -c}, REAL
    )
