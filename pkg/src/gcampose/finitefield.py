"""Exact instantiation of random scenes in Z_p and theorem verification.

Random problem instances are built so that every latent relation between the
equation coefficients holds exactly modulo p: rotations come from Cayley
vectors, plane normals are exact unit vectors (rejection-sampled square
roots), and affinities are derived from exact plane homographies. On such
instances minor divisibility and the rank-2 block property can be checked
with zero tolerance, and quotient-ring dimensions counted via a Groebner
basis.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .constraints import (
    ac_rows_gcam,
    ac_rows_single,
    equations_gcam,
    equations_single,
    equations_sixpt,
    pc_row_gcam,
)
from .errors import ExhaustedRetries, NotZeroDimensional, PlaneThroughCenter, DegenerateProjection
from .fields import PrimeField
from .poly import Poly3, grevlex_key

DEFAULT_PRIME = 30011
MIN_PRIME = 101

CONFIG_TYPES = {
    "mono": None,
    "case15": ((0, 0), (0, 1)),
    "inter": ((0, 1), (1, 0)),
    "intra": ((0, 0), (1, 1)),
    "sixpt-inter": ((0, 1),) * 3 + ((1, 0),) * 3,
    "sixpt-intra": ((0, 0),) * 3 + ((1, 1),) * 3,
}


def fp_sqrt(a: int, p: int) -> int | None:
    """Square root in Z_p via Tonelli-Shanks; None when a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return r


def random_unit_normal_fp(p: int, rng: random.Random, retries: int = 64) -> list[int]:
    """Vector n with n . n = 1 (mod p), by rejection over quadratic residues."""
    for _ in range(retries):
        v = [rng.randrange(p) for _ in range(3)]
        n2 = sum(x * x for x in v) % p
        if n2 == 0:
            continue
        w = fp_sqrt(pow(n2, p - 2, p), p)
        if w is None:
            continue
        return [(x * w) % p for x in v]
    raise ExhaustedRetries(f"no unit normal after {retries} draws")


def fp_signed_distance(n, point_on_plane, y0, p: int) -> int:
    """d0 = n . (y0 - point_on_plane) in Z_p."""
    return sum(n[i] * (y0[i] - point_on_plane[i]) for i in range(3)) % p


def fp_homography(R, t, n, d: int, p: int):
    """Plane-induced homography H = R + (1/d) t n^T, exact in Z_p."""
    if d % p == 0:
        raise PlaneThroughCenter("signed distance is zero mod p")
    di = pow(d % p, p - 2, p)
    return [[(R[i][j] + di * t[i] * n[j]) % p for j in range(3)] for i in range(3)]


def fp_affine_from_homography(H, x, p: int):
    """(A 2x2, projected point) of the first-order homography approximation at x."""
    s = sum(H[2][j] * x[j] for j in range(3)) % p
    if s == 0:
        raise DegenerateProjection("h3 . x = 0 mod p")
    si = pow(s, p - 2, p)
    xp = [(sum(H[u][j] * x[j] for j in range(3)) * si) % p for u in range(3)]
    A = [[((H[u][v] - xp[u] * H[2][v]) * si) % p for v in range(2)] for u in range(2)]
    return A, xp


@dataclass(frozen=True)
class FpCamera:
    Q: tuple
    s: tuple


@dataclass(frozen=True)
class FpRig:
    cameras: tuple

    def __getitem__(self, i):
        return self.cameras[i]

    def __len__(self):
        return len(self.cameras)


@dataclass(frozen=True)
class FpAC:
    x: tuple
    xp: tuple
    cam_first: int
    cam_second: int
    A: tuple


@dataclass(frozen=True)
class FpPC:
    x: tuple
    xp: tuple
    cam_first: int
    cam_second: int


@dataclass(frozen=True)
class FpPlane:
    point: tuple
    normal: tuple


@dataclass(frozen=True)
class FpScene:
    prime: int
    config: str
    seed: int
    rig: FpRig
    R: tuple
    t: tuple
    cayley: tuple
    planes: tuple
    acs: tuple
    pcs: tuple = ()


def _rand_rotation_fp(p: int, rng: random.Random):
    """(R, cayley) with R exactly orthonormal mod p, from a random Cayley vector."""
    from .constraints import cayley_numerator_matrix

    field = PrimeField(p)
    Qnum = cayley_numerator_matrix(field)
    while True:
        q = tuple(rng.randrange(p) for _ in range(3))
        s = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + 1) % p
        if s == 0:
            continue
        si = pow(s, p - 2, p)
        R = tuple(
            tuple((Qnum[i, j].evaluate(q) * si) % p for j in range(3)) for i in range(3)
        )
        return R, q


def _matvec(M, v, p):
    return [sum(M[i][j] * v[j] for j in range(3)) % p for i in range(3)]


def _matmul(A, B, p):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) % p for j in range(3)] for i in range(3)]


def _transpose(M):
    return [[M[j][i] for j in range(3)] for i in range(3)]


def synth_instance_fp(config: str, prime: int = DEFAULT_PRIME, seed: int = 0) -> FpScene:
    """Consistent random instance whose constraints vanish exactly at the truth."""
    if config not in CONFIG_TYPES:
        raise ValueError(f"unknown config {config!r}; choose from {sorted(CONFIG_TYPES)}")
    if prime < MIN_PRIME:
        raise ValueError(f"prime {prime} too small; need >= {MIN_PRIME}")
    PrimeField(prime)  # validates primality
    p = prime
    rng = random.Random((seed, config, prime).__repr__())
    types = CONFIG_TYPES[config]
    R, qgt = _rand_rotation_fp(p, rng)
    t = tuple(rng.randrange(p) for _ in range(3))
    if types is None:  # single camera
        identity = tuple(tuple(int(i == j) for j in range(3)) for i in range(3))
        rig = FpRig((FpCamera(identity, (0, 0, 0)),))
        types = ((0, 0), (0, 0))
    else:
        cams = []
        ncams = max(max(a, b) for a, b in types) + 1
        for _ in range(ncams):
            Qc, _ = _rand_rotation_fp(p, rng)
            cams.append(FpCamera(Qc, tuple(rng.randrange(p) for _ in range(3))))
        rig = FpRig(tuple(cams))
    planes, acs, pcs = [], [], []
    for (i, j) in types:
        Qi, si = rig[i].Q, rig[i].s
        Qj, sj = rig[j].Q, rig[j].s
        QiT, QjT = _transpose(Qi), _transpose(Qj)
        Rp = _matmul(QjT, _matmul(R, Qi, p), p)
        tp = _matvec(QjT, [(sum(R[r][c] * si[c] for c in range(3)) + t[r] - sj[r]) % p for r in range(3)], p)
        for _ in range(256):
            X = [rng.randrange(p) for _ in range(3)]
            n = random_unit_normal_fp(p, rng)
            Xc = _matvec(QiT, [(X[k] - si[k]) % p for k in range(3)], p)
            nc = _matvec(QiT, n, p)
            d = sum(nc[k] * Xc[k] for k in range(3)) % p
            if d == 0 or Xc[2] == 0:
                continue
            X2 = [(sum(R[r][c] * X[c] for c in range(3)) + t[r]) % p for r in range(3)]
            Xcp = _matvec(QjT, [(X2[k] - sj[k]) % p for k in range(3)], p)
            if Xcp[2] == 0:
                continue
            zi = pow(Xc[2], p - 2, p)
            x = ((Xc[0] * zi) % p, (Xc[1] * zi) % p, 1)
            H = fp_homography(Rp, tp, nc, d, p)
            try:
                A, xp = fp_affine_from_homography(H, x, p)
            except DegenerateProjection:
                continue
            planes.append(FpPlane(tuple(X), tuple(n)))
            acs.append(FpAC(x, tuple(xp), i, j, tuple(tuple(r) for r in A)))
            pcs.append(FpPC(x, tuple(xp), i, j))
            break
        else:
            raise ExhaustedRetries("could not place a consistent correspondence")
    return FpScene(p, config, seed, rig, R, t, qgt, tuple(planes), tuple(acs), tuple(pcs))


def _zp_rank(M, p: int) -> int:
    rows = [list(r) for r in M]
    ncols = len(rows[0])
    rank, rr = 0, 0
    for c in range(ncols):
        piv = next((r for r in range(rr, len(rows)) if rows[r][c] % p), None)
        if piv is None:
            continue
        rows[rr], rows[piv] = rows[piv], rows[rr]
        iv = pow(rows[rr][c], p - 2, p)
        rows[rr] = [(v * iv) % p for v in rows[rr]]
        for r in range(len(rows)):
            if r != rr and rows[r][c] % p:
                f = rows[r][c]
                rows[r] = [(a - f * b) % p for a, b in zip(rows[r], rows[rr])]
        rank += 1
        rr += 1
        if rr == len(rows):
            break
    return rank


def verify_theorems(scene: FpScene, which=("T2", "T3", "T4", "T5")) -> dict:
    """Exact divisibility and rank checks on one Z_p instance.

    T2: every 3x3 minor of the single-camera 6x3 stack is divisible by the
    Cayley norm factor. T3: rank of each AC's leading 3x3 block is 2 at the
    truth. T4: 4x4 minors and leading 3x3 blocks of the rig stack divisible.
    T5: rank-2 property of same-camera-pair PC triples. Failures are reported,
    not raised.
    """
    from .errors import NonzeroRemainder
    from .poly import PolyMatrix, det_poly, exact_quotient

    field = PrimeField(scene.prime)
    p = scene.prime
    checks = []

    def record(name, ok):
        checks.append({"name": name, "pass": bool(ok)})

    def divisible(poly_matrix_rows, sel):
        sub = PolyMatrix.from_rows([poly_matrix_rows[i] for i in sel])
        try:
            q = exact_quotient(det_poly(sub))
        except NonzeroRemainder:
            return False, None
        return True, q

    if scene.config == "mono" and "T2" in which:
        rows = []
        for ac in scene.acs:
            m = ac_rows_single(ac, field)
            rows += [[m[i, j] for j in range(3)] for i in range(3)]
        for tri in itertools.combinations(range(6), 3):
            ok, q = divisible(rows, tri)
            root_ok = ok and (q.is_zero() or q.evaluate(scene.cayley) == 0)
            record(f"T2/minor{tri}", ok and root_ok)
    if scene.config in ("case15", "inter", "intra"):
        blocks = [ac_rows_gcam(ac, scene.rig, field) for ac in scene.acs]
        rows = [[blk[i, j] for j in range(4)] for blk in blocks for i in range(3)]
        if "T4" in which:
            for quad in itertools.combinations(range(6), 4):
                ok, q = divisible(rows, quad)
                root_ok = ok and (q.is_zero() or q.evaluate(scene.cayley) == 0)
                record(f"T4/minor{quad}", ok and root_ok)
            for k, blk in enumerate(blocks):
                sub = blk.submatrix(range(3), range(3))
                try:
                    exact_quotient(det_poly(sub))
                    record(f"T4/block{k}", True)
                except NonzeroRemainder:
                    record(f"T4/block{k}", False)
        if "T3" in which:
            for k, blk in enumerate(blocks):
                N = [[blk[i, j].evaluate(scene.cayley) for j in range(3)] for i in range(3)]
                record(f"T3/rank{k}", _zp_rank(N, p) == 2)
    if scene.config.startswith("sixpt"):
        row_mats = [pc_row_gcam(pc, scene.rig, field) for pc in scene.pcs]
        rows = [[rm[0, j] for j in range(4)] for rm in row_mats]
        if "T4" in which:
            for quad in itertools.combinations(range(6), 4):
                ok, q = divisible(rows, quad)
                root_ok = ok and (q.is_zero() or q.evaluate(scene.cayley) == 0)
                record(f"T4/minor{quad}", ok and root_ok)
        if "T5" in which:
            by_pair: dict = {}
            for k, pc in enumerate(scene.pcs):
                by_pair.setdefault((pc.cam_first, pc.cam_second), []).append(k)
            for pair, ks in sorted(by_pair.items()):
                for tri in itertools.combinations(ks, 3):
                    N = [[rows[k][j].evaluate(scene.cayley) for j in range(3)] for k in tri]
                    record(f"T5/rank{pair}{tri}", _zp_rank(N, p) == 2)
                    sub = PolyMatrix.from_rows([rows[k][:3] for k in tri])
                    try:
                        exact_quotient(det_poly(sub))
                        record(f"T5/div{pair}{tri}", True)
                    except NonzeroRemainder:
                        record(f"T5/div{pair}{tri}", False)
    return {
        "config": scene.config,
        "p": scene.prime,
        "seed": scene.seed,
        "checks": checks,
        "failures": sum(1 for c in checks if not c["pass"]),
    }


def equations_for_scene(scene: FpScene, variant: str = "auto"):
    """Emit the Z_p equation system matching the scene's configuration."""
    field = PrimeField(scene.prime)
    if scene.config == "mono":
        return equations_single(scene.acs[0], scene.acs[1], field=field)
    if scene.config.startswith("sixpt"):
        return equations_sixpt(scene.pcs, scene.rig, variant=variant, field=field)
    return equations_gcam(scene.acs[0], scene.acs[1], scene.rig, variant=variant, field=field)


def count_solutions_fp(eqs, degree_cap: int = 30) -> int:
    """Quotient-ring dimension of a Z_p system: count of standard monomials.

    The Groebner basis is computed in grevlex order; NotZeroDimensional is
    raised when the staircase has no finite complement.
    """
    import sympy

    polys = list(eqs.polys) if hasattr(eqs, "polys") else list(eqs)
    if not polys:
        raise NotZeroDimensional("empty system")
    field = polys[0].field
    if not isinstance(field, PrimeField):
        raise ValueError("count_solutions_fp expects Z_p polynomials")
    p = field.p
    qx, qy, qz = sympy.symbols("qx qy qz")
    exprs = []
    for f in polys:
        expr = 0
        for (a, b, c), co in f.terms.items():
            cc = co if co <= p // 2 else co - p
            expr += cc * qx**a * qy**b * qz**c
        exprs.append(expr)
    gb = sympy.groebner(exprs, qx, qy, qz, modulus=p, order="grevlex")
    lead = [tuple(g.monoms(order="grevlex")[0]) for g in gb.polys]
    if all(sum(e) == 0 for e in lead):
        return 0
    count, d = 0, 0
    max_lead = max(sum(e) for e in lead)
    while True:
        layer = sum(
            1
            for e in itertools.product(range(d + 1), repeat=3)
            if sum(e) == d and not any(all(e[i] >= le[i] for i in range(3)) for le in lead)
        )
        if layer == 0 and d > max_lead:
            return count
        count += layer
        d += 1
        if d > degree_cap:
            raise NotZeroDimensional(
                f"standard monomials still appear at degree {degree_cap}"
            )


def standard_monomial_basis(eqs, degree_cap: int = 30):
    """Grevlex standard monomials of the system's ideal (sorted)."""
    import sympy

    polys = list(eqs.polys) if hasattr(eqs, "polys") else list(eqs)
    field = polys[0].field
    p = field.p
    qx, qy, qz = sympy.symbols("qx qy qz")
    exprs = []
    for f in polys:
        expr = 0
        for (a, b, c), co in f.terms.items():
            cc = co if co <= p // 2 else co - p
            expr += cc * qx**a * qy**b * qz**c
        exprs.append(expr)
    gb = sympy.groebner(exprs, qx, qy, qz, modulus=p, order="grevlex")
    lead = [tuple(g.monoms(order="grevlex")[0]) for g in gb.polys]
    out, d = [], 0
    max_lead = max(sum(e) for e in lead)
    while True:
        layer = [
            e
            for e in itertools.product(range(d + 1), repeat=3)
            if sum(e) == d and not any(all(e[i] >= le[i] for i in range(3)) for le in lead)
        ]
        if not layer and d > max_lead:
            return sorted(out, key=grevlex_key)
        out += layer
        d += 1
        if d > degree_cap:
            raise NotZeroDimensional("no finite staircase")


def random_recombination(eqs, seed: int = 0):
    """Same ideal, new generators: an invertible random linear recombination."""
    rng = random.Random(seed)
    polys = list(eqs.polys)
    field = polys[0].field
    p = field.p
    n = len(polys)
    while True:
        A = [[rng.randrange(p) for _ in range(n)] for _ in range(n)]
        if _zp_rank(A, p) == n:
            break
    out = []
    for i in range(n):
        acc = Poly3.zero(field)
        for j in range(n):
            acc = acc + polys[j].scale(A[i][j])
        out.append(acc)
    return out
