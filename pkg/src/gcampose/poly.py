"""Sparse trivariate polynomials in (q_x, q_y, q_z) over a pluggable field.

Exponent triples are the dict keys; no zero coefficient is ever stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable

from .errors import NonSquare, NonzeroRemainder
from .fields import REAL, RealField

Exponent = tuple[int, int, int]


def _grlex_key(e: Exponent):
    # graded lexicographic with q_x > q_y > q_z
    return (e[0] + e[1] + e[2], e)


def grevlex_key(e: Exponent):
    """Sort key for graded reverse lexicographic order, q_x > q_y > q_z."""
    return (e[0] + e[1] + e[2], -e[2], -e[1])


@dataclass(frozen=True)
class Poly3:
    """Sparse polynomial; immutable. ``terms`` maps exponent triples to coefficients."""

    terms: dict
    field: object = dc_field(default=REAL)

    @classmethod
    def from_terms(cls, terms: dict, field=REAL) -> "Poly3":
        clean = {tuple(e): c for e, c in terms.items() if not field.is_zero(c)}
        return cls(clean, field)

    @classmethod
    def zero(cls, field=REAL) -> "Poly3":
        return cls({}, field)

    @classmethod
    def constant(cls, c, field=REAL) -> "Poly3":
        return cls.from_terms({(0, 0, 0): c}, field)

    @classmethod
    def variable(cls, i: int, field=REAL) -> "Poly3":
        e = [0, 0, 0]
        e[i] = 1
        return cls({tuple(e): field.from_int(1)}, field)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def __add__(self, other: "Poly3") -> "Poly3":
        f = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = f.add(out.get(e, f.from_int(0)), c)
            if f.is_zero(v):
                out.pop(e, None)
            else:
                out[e] = v
        return Poly3(out, f)

    def __neg__(self) -> "Poly3":
        f = self.field
        return Poly3({e: f.neg(c) for e, c in self.terms.items()}, f)

    def __sub__(self, other: "Poly3") -> "Poly3":
        return self + (-other)

    def __mul__(self, other: "Poly3") -> "Poly3":
        f = self.field
        out: dict = {}
        zero = f.from_int(0)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                v = f.add(out.get(e, zero), f.mul(c1, c2))
                if f.is_zero(v):
                    out.pop(e, None)
                else:
                    out[e] = v
        return Poly3(out, f)

    def scale(self, a) -> "Poly3":
        f = self.field
        if f.is_zero(a):
            return Poly3({}, f)
        return Poly3({e: f.mul(c, a) for e, c in self.terms.items()}, f)

    def evaluate(self, point):
        """Evaluate at (q_x, q_y, q_z); result lives in the coefficient field."""
        f = self.field
        x, y, z = point
        acc = f.from_int(0)
        for (a, b, c), co in self.terms.items():
            m = co
            for base, exp in ((x, a), (y, b), (z, c)):
                for _ in range(exp):
                    m = f.mul(m, base)
            acc = f.add(acc, m)
        return acc

    def max_abs_coeff(self) -> float:
        return max((self.field.abs(c) for c in self.terms.values()), default=0.0)

    def normalized(self) -> "Poly3":
        """Scale to unit max-|coefficient| (real field only; identity over Z_p)."""
        if not isinstance(self.field, RealField) or not self.terms:
            return self
        s = self.max_abs_coeff()
        return Poly3({e: c / s for e, c in self.terms.items()}, self.field)

    def leading_exponent(self) -> Exponent:
        return max(self.terms, key=_grlex_key)

    def __repr__(self):
        if not self.terms:
            return "Poly3(0)"
        parts = []
        for e in sorted(self.terms, key=_grlex_key, reverse=True):
            parts.append(f"{self.terms[e]}*x^{e[0]}y^{e[1]}z^{e[2]}")
        return "Poly3(" + " + ".join(parts) + ")"


def cayley_norm_poly(field=REAL) -> Poly3:
    """q_x^2 + q_y^2 + q_z^2 + 1, the common factor of the constraint minors."""
    one = field.from_int(1)
    return Poly3({(2, 0, 0): one, (0, 2, 0): one, (0, 0, 2): one, (0, 0, 0): one}, field)


@dataclass(frozen=True)
class PolyMatrix:
    """Rectangular grid of Poly3 entries sharing one coefficient field."""

    entries: tuple

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Poly3]]) -> "PolyMatrix":
        tup = tuple(tuple(r) for r in rows)
        if tup and any(len(r) != len(tup[0]) for r in tup):
            raise ValueError("ragged rows")
        return cls(tup)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def submatrix(self, row_idx, col_idx) -> "PolyMatrix":
        return PolyMatrix(tuple(tuple(self.entries[r][c] for c in col_idx) for r in row_idx))

    def evaluate(self, point):
        """Numeric matrix (nested lists) of entry evaluations at a point."""
        return [[e.evaluate(point) for e in row] for row in self.entries]


def det_poly(m: PolyMatrix) -> Poly3:
    """Cofactor-expansion determinant of a square PolyMatrix of size <= 4."""
    if m.rows != m.cols:
        raise NonSquare(f"matrix is {m.rows}x{m.cols}")
    if m.rows == 0:
        raise NonSquare("empty matrix")
    if m.rows > 4:
        raise NonSquare("determinant supported up to 4x4")
    return _det(m.entries)


def _det(e) -> Poly3:
    n = len(e)
    if n == 1:
        return e[0][0]
    if n == 2:
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]
    # expand along the last column: for the constraint matrices that column holds
    # the lowest-degree (or constant-term) entries
    total = None
    rows = list(range(n))
    for i in rows:
        minor = tuple(tuple(e[r][c] for c in range(n - 1)) for r in rows if r != i)
        term = e[i][n - 1] * _det(minor)
        sign = (-1) ** (i + n - 1)
        term = term if sign > 0 else -term
        total = term if total is None else total + term
    return total


def divide(f: Poly3, divisor: Poly3) -> tuple[Poly3, Poly3]:
    """Multivariate long division ordered by graded lex: f = quot*divisor + rem."""
    if divisor.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    fld = f.field
    lead = divisor.leading_exponent()
    lead_coeff = divisor.terms[lead]
    work = dict(f.terms)
    quot: dict = {}
    rem: dict = {}
    while work:
        e = max(work, key=_grlex_key)
        c = work.pop(e)
        if fld.is_zero(c):
            continue
        if all(e[i] >= lead[i] for i in range(3)):
            m = (e[0] - lead[0], e[1] - lead[1], e[2] - lead[2])
            q = fld.div(c, lead_coeff)
            quot[m] = fld.add(quot.get(m, fld.from_int(0)), q)
            for de, dc in divisor.terms.items():
                if de == lead:
                    continue
                ee = (m[0] + de[0], m[1] + de[1], m[2] + de[2])
                v = fld.sub(work.get(ee, fld.from_int(0)), fld.mul(q, dc))
                if fld.is_zero(v):
                    work.pop(ee, None)
                else:
                    work[ee] = v
        else:
            rem[e] = c
    return Poly3.from_terms(quot, fld), Poly3.from_terms(rem, fld)


def exact_quotient(f: Poly3, divisor: Poly3 | None = None, rel_tol: float = 1e-9) -> Poly3:
    """Quotient of an exactly-divisible polynomial; raises NonzeroRemainder otherwise.

    Over Z_p divisibility must be exact; over the reals the remainder norm must stay
    below rel_tol times the dividend norm (round-off from an analytically divisible
    construction).
    """
    if divisor is None:
        divisor = cayley_norm_poly(f.field)
    quot, rem = divide(f, divisor)
    if f.field.exact:
        if not rem.is_zero():
            raise NonzeroRemainder("division not exact over Z_p", remainder=rem)
    else:
        scale = f.max_abs_coeff()
        if scale > 0 and rem.max_abs_coeff() > rel_tol * scale:
            raise NonzeroRemainder(
                f"remainder {rem.max_abs_coeff():.3e} exceeds {rel_tol:.1e} x {scale:.3e}",
                remainder=rem,
            )
    return quot
