"""Numeric root finding for the emitted trivariate systems.

Pipeline: expand every equation by monomial multiples up to the profile's
expansion degree, eliminate the non-basis monomial columns by least squares,
assemble the multiplication-by-q_x action matrix on the quotient basis, and
read candidate roots off its eigenvectors. Roots are Newton-polished and
filtered by system residual.

Profiles are frozen from exact Z_p rank experiments:

* 20 solutions (single camera): degree 5, basis = all monomials of degree <= 3.
* 56 solutions (15 sextic minors): degree 7, basis = all monomials of degree
  <= 5. The minor ideal has a one-dimensional excess at infinity, so the 8
  degree-7 monomials without a q_x factor can never be eliminated; they are
  quarantined out of the elimination and verified to stay out of the needed
  reductions.
* 48 solutions (sextics + two quartics): degree 7, spanning set = all 56
  monomials of degree <= 5. The 8 spurious eigenpairs fail the residual gate;
  the relaxed basis is far better conditioned than the exact 48-monomial
  staircase on structured rigs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._dense import monomial_index, monomials, poly_to_vec
from .constraints import EquationSystem
from .errors import NoRealRoots, OneDimensionalFamily, RankDeficientTemplate
from .poly import grevlex_key


@dataclass(frozen=True)
class SolverConfig:
    expansion_degree: int
    basis_size: int
    real_tolerance: float = 1e-6
    residual_tolerance: float = 1e-6

    def __post_init__(self):
        if self.basis_size not in (20, 48, 56):
            raise ValueError(f"unsupported basis size {self.basis_size}")


def default_config(expected_solution_count: int) -> SolverConfig:
    if expected_solution_count == 20:
        return SolverConfig(expansion_degree=5, basis_size=20)
    if expected_solution_count in (48, 56):
        return SolverConfig(expansion_degree=7, basis_size=expected_solution_count)
    raise ValueError(f"no solver profile for {expected_solution_count} solutions")


@lru_cache(maxsize=None)
def _profile(basis_size: int, expansion_degree: int):
    """Column layout for one solver profile: (order, col_of, n_elim, n_quar, basis)."""
    if basis_size == 20:
        basis_cap = 3
        quarantine = ()
    else:
        basis_cap = 5
        quarantine = tuple((0, a, expansion_degree - a) for a in range(expansion_degree + 1))
        if basis_size == 48:
            quarantine = ()
    basis = tuple(sorted((m for m in monomials(basis_cap)), key=grevlex_key))
    bset = set(basis)
    qset = set(quarantine)
    elim = sorted(
        (m for m in monomials(expansion_degree) if m not in bset and m not in qset),
        key=grevlex_key,
        reverse=True,
    )
    order = tuple(elim) + tuple(sorted(qset, key=grevlex_key, reverse=True)) + basis
    col_of = {m: i for i, m in enumerate(order)}
    return order, col_of, len(elim), len(qset), basis


@lru_cache(maxsize=None)
def _shift_index(basis_size: int, expansion_degree: int, poly_degree: int):
    """Column indices of each monomial shift: (n_multipliers, n_coeffs) int array."""
    _, col_of, _, _, _ = _profile(basis_size, expansion_degree)
    mults = monomials(expansion_degree - poly_degree)
    src = monomials(poly_degree)
    idx = np.empty((len(mults), len(src)), dtype=np.intp)
    for i, m in enumerate(mults):
        for j, e in enumerate(src):
            idx[i, j] = col_of[(m[0] + e[0], m[1] + e[1], m[2] + e[2])]
    return idx


def _dense_system(eqs: EquationSystem):
    """Coefficient matrix (neq, 84) on the degree-6 grid plus per-poly degrees."""
    C = np.zeros((len(eqs.polys), len(monomials(6))))
    degs = []
    for i, p in enumerate(eqs.polys):
        d = p.degree()
        if d > 6:
            raise ValueError(f"equation degree {d} > 6 unsupported")
        degs.append(6 if d > 4 else 4)
        C[i] = poly_to_vec(p, 6)
    return C, degs


@lru_cache(maxsize=None)
def _eval_tables(cap: int):
    exps = np.array(monomials(cap))
    return exps


def _monomial_values(roots: np.ndarray, cap: int) -> np.ndarray:
    """Vandermonde-style matrix of monomial values: (n_roots, n_monomials)."""
    exps = _eval_tables(cap)
    powers = [np.ones((roots.shape[0], cap + 1)) for _ in range(3)]
    for v in range(3):
        for d in range(1, cap + 1):
            powers[v][:, d] = powers[v][:, d - 1] * roots[:, v]
    return powers[0][:, exps[:, 0]] * powers[1][:, exps[:, 1]] * powers[2][:, exps[:, 2]]


def evaluate_system(C: np.ndarray, roots: np.ndarray, cap: int = 6) -> np.ndarray:
    """Residual matrix (n_roots, n_eqs) for a dense coefficient matrix."""
    V = _monomial_values(np.atleast_2d(roots), cap)
    return V @ C.T


@lru_cache(maxsize=None)
def _deriv_tables(cap: int):
    """Scatter tables of d/dv (x^e) = e_v * x^(e - unit_v) per variable."""
    exps = _eval_tables(cap)
    ix = monomial_index(cap)
    out = []
    for v in range(3):
        rows, cols, scale = [], [], []
        for j, e in enumerate(exps):
            if e[v] > 0:
                e2 = list(e)
                e2[v] -= 1
                rows.append(j)
                cols.append(ix[tuple(e2)])
                scale.append(e[v])
        out.append((np.array(rows), np.array(cols), np.array(scale, dtype=float)))
    return out


def newton_polish(C: np.ndarray, roots: np.ndarray, iters: int = 3, cap: int = 6) -> np.ndarray:
    """Gauss-Newton refinement of roots against the full system, batched."""
    roots = np.atleast_2d(roots).copy()
    deriv = _deriv_tables(cap)
    D = []
    for v in range(3):
        rws, cls, sc = deriv[v]
        Dv = np.zeros_like(C)
        Dv[:, cls] = C[:, rws] * sc
        D.append(Dv)
    for _ in range(iters):
        V = _monomial_values(roots, cap)
        F = V @ C.T  # (n, neq)
        J = np.empty((roots.shape[0], C.shape[0], 3))
        for v in range(3):
            J[:, :, v] = V @ D[v].T
        JTJ = np.einsum("nev,new->nvw", J, J)
        JTF = np.einsum("nev,ne->nv", J, F)
        try:
            delta = np.linalg.solve(JTJ, JTF[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = np.stack(
                [np.linalg.lstsq(JTJ[i], JTF[i], rcond=None)[0] for i in range(len(roots))]
            )
        ok = np.isfinite(delta).all(axis=1) & (np.linalg.norm(delta, axis=1) < 1.0)
        roots[ok] -= delta[ok]
    return roots


def solve_trivariate_system(eqs: EquationSystem, cfg: SolverConfig | None = None):
    """All real roots (q_x, q_y, q_z) of the emitted system.

    Raises OneDimensionalFamily for systems flagged as having extraneous root
    families, RankDeficientTemplate when elimination fails at the configured
    expansion degree, and NoRealRoots when nothing survives filtering.
    """
    if eqs.one_dimensional:
        raise OneDimensionalFamily(
            f"{eqs.source_config.value} with variant {eqs.metadata.get('variant')} "
            "has a one-dimensional family of extraneous roots"
        )
    if cfg is None:
        cfg = default_config(eqs.expected_solution_count)
    C, degs = _dense_system(eqs)
    order, col_of, n_elim, n_quar, basis = _profile(cfg.basis_size, cfg.expansion_degree)
    blocks = []
    for i, d in enumerate(degs):
        idx = _shift_index(cfg.basis_size, cfg.expansion_degree, d)
        vec = C[i][: len(monomials(d))] if d < 6 else C[i]
        blk = np.zeros((idx.shape[0], len(order)))
        np.put_along_axis(blk, idx, np.broadcast_to(vec, idx.shape), axis=1)
        blocks.append(blk)
    mac = np.vstack(blocks)
    A = mac[:, :n_elim]
    rest = mac[:, n_elim:]
    T, _, rank, _ = np.linalg.lstsq(A, -rest, rcond=None)
    if rank < n_elim:
        raise RankDeficientTemplate(
            f"eliminated {rank}/{n_elim} columns at expansion degree "
            f"{cfg.expansion_degree}; raise expansion_degree"
        )
    nB = len(basis)
    b_index = {m: i for i, m in enumerate(basis)}
    action = np.zeros((nB, nB))
    for bi, m in enumerate(basis):
        shifted = (m[0] + 1, m[1], m[2])
        if shifted in b_index:
            action[bi, b_index[shifted]] = 1.0
        else:
            action[bi] = T[col_of[shifted] ][n_quar:]
    eigvals, eigvecs = np.linalg.eig(action)
    i1 = b_index[(0, 0, 0)]
    ixyz = [b_index[(1, 0, 0)], b_index[(0, 1, 0)], b_index[(0, 0, 1)]]
    raw = []
    for k in range(nB):
        v = eigvecs[:, k]
        if abs(v[i1]) < 1e-12:
            continue
        v = v / v[i1]
        q = v[ixyz]
        if np.abs(q.imag).max() > cfg.real_tolerance * (1.0 + abs(eigvals[k])):
            continue
        raw.append(q.real)
    if not raw:
        raise NoRealRoots("no real eigenvector candidates")
    roots = newton_polish(C, np.array(raw))
    res = np.abs(evaluate_system(C, roots)).max(axis=1)
    scale = np.abs(C).max()
    keep = res <= cfg.residual_tolerance * max(scale, 1.0)
    roots, res = roots[keep], res[keep]
    # dedupe, best residual first, capped at the expected root count
    out, out_res = [], []
    for i in np.argsort(res):
        r = roots[i]
        if any(np.linalg.norm(r - o) <= 1e-8 * (1.0 + np.linalg.norm(r)) for o in out):
            continue
        out.append(r)
        out_res.append(res[i])
        if len(out) >= eqs.expected_solution_count:
            break
    if not out:
        raise NoRealRoots("all candidates failed the residual gate")
    return [tuple(r) for r in out]
