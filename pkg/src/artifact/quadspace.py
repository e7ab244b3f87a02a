"""The quadratic space V attached to K = Q(i).

An element ``[alpha; b, c]`` stands for the matrix ``((alpha, -b), (c, -alpha'))``
with ``alpha`` in K and ``b, c`` in Q; the quadratic form is
``q = Nm(alpha) - b*c``.  SL_2(K) acts by ``gamma * M = gamma M (gamma')^{-1}``
where ``'`` is complex conjugation applied entrywise.

Integral elements used by the enumeration code are plain 4-tuples
``(x, y, b, c)`` with ``alpha = x + y*i``; :class:`VMatrix` is the exact,
rational-entry form used at the API boundary.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .padic import PadicContext, PrecisionError, QuadExtScalar, _embed_entry

__all__ = [
    "Gauss",
    "VMatrix",
    "DivisorSpec",
    "quad_form",
    "chi4",
    "act_matrix",
    "act_integral",
    "fm_eval",
    "enumerate_sigma0",
    "sigma0_array",
    "is_norm_from_K",
    "sum_two_squares_table",
    "mat_mul",
    "mat_inv",
    "mat_det",
    "to_gauss_matrix",
]


# ---------------------------------------------------------------------------
# Gaussian rationals


@dataclass(frozen=True)
class Gauss:
    """An element re + im*i of Q(i) with exact rational coordinates."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def of(cls, v) -> "Gauss":
        if isinstance(v, Gauss):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        if isinstance(v, tuple):
            return cls(Fraction(v[0]), Fraction(v[1]))
        return cls(Fraction(v))

    def __add__(self, o):
        o = Gauss.of(o)
        return Gauss(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Gauss(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-Gauss.of(o))

    def __rsub__(self, o):
        return Gauss.of(o) - self

    def __mul__(self, o):
        o = Gauss.of(o)
        return Gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> "Gauss":
        return Gauss(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "Gauss":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of 0 in Q(i)")
        return Gauss(self.re / n, -self.im / n)

    def __truediv__(self, o):
        return self * Gauss.of(o).inverse()

    def __rtruediv__(self, o):
        return Gauss.of(o) * self.inverse()

    def is_integral(self) -> bool:
        return self.re.denominator == 1 and self.im.denominator == 1

    def as_ints(self) -> tuple[int, int]:
        if not self.is_integral():
            raise ValueError(f"{self} is not a Gaussian integer")
        return int(self.re), int(self.im)

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


I = Gauss(0, 1)


def to_gauss_matrix(m) -> tuple:
    """Normalize a 2x2 nested sequence into a tuple of four Gauss entries."""
    if len(m) == 4 and not isinstance(m[0], (list, tuple)):
        a, b, c, d = m
    else:
        (a, b), (c, d) = m
    return tuple(Gauss.of(x) for x in (a, b, c, d))


def mat_mul(A, B) -> tuple:
    a, b, c, d = to_gauss_matrix(A)
    e, f, g, h = to_gauss_matrix(B)
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_det(A) -> Gauss:
    a, b, c, d = to_gauss_matrix(A)
    return a * d - b * c


def mat_inv(A) -> tuple:
    a, b, c, d = to_gauss_matrix(A)
    det = a * d - b * c
    return (d / det, -b / det, -c / det, a / det)


def _mat_conj(A) -> tuple:
    return tuple(x.conj() for x in to_gauss_matrix(A))


# ---------------------------------------------------------------------------
# V-matrices


@dataclass(frozen=True)
class VMatrix:
    """``[alpha; b, c]``, i.e. the matrix ((alpha, -b), (c, -alpha'))."""

    alpha: Gauss
    b: Fraction
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Gauss.of(self.alpha))
        object.__setattr__(self, "b", Fraction(self.b))
        object.__setattr__(self, "c", Fraction(self.c))

    @classmethod
    def from_tuple(cls, t) -> "VMatrix":
        x, y, b, c = t
        return cls(Gauss(x, y), b, c)

    def as_tuple(self) -> tuple[int, int, int, int]:
        x, y = self.alpha.as_ints()
        if self.b.denominator != 1 or self.c.denominator != 1:
            raise ValueError("not an integral V-matrix")
        return (x, y, int(self.b), int(self.c))

    def matrix(self) -> tuple:
        return (self.alpha, Gauss(-self.b), Gauss(self.c), -self.alpha.conj())

    @classmethod
    def from_matrix(cls, m) -> "VMatrix":
        a, b, c, d = to_gauss_matrix(m)
        if b.im != 0 or c.im != 0 or d != -a.conj():
            raise ValueError("matrix does not lie in V")
        return cls(a, -b.re, c.re)

    def __neg__(self):
        return VMatrix(-self.alpha, -self.b, -self.c)

    def __repr__(self):
        return f"[{self.alpha}; {self.b}, {self.c}]"


def quad_form(M) -> Fraction:
    """q([alpha; b, c]) = Nm(alpha) - b*c."""
    if not isinstance(M, VMatrix):
        x, y, b, c = M
        return x * x + y * y - b * c
    return M.alpha.norm() - M.b * M.c


def chi4(M, p: int | None = None) -> int:
    """chi_4 of the lower-left entry, read on its prime-to-p numerator.

    Since p = 1 mod 4, chi_4(p) = 1 and powers of p in the numerator or the
    denominator do not change the value.
    """
    c = M.c if isinstance(M, VMatrix) else Fraction(M[3]) if isinstance(M, tuple) else Fraction(M)
    num = c.numerator
    if p is not None and num:
        while num % p == 0:
            num //= p
    return (0, 1, 0, -1)[num % 4]


def act_matrix(gamma, M: VMatrix) -> VMatrix:
    """gamma * M = gamma M (gamma')^{-1}; gamma needs a rational determinant."""
    g = to_gauss_matrix(gamma)
    det = mat_det(g)
    if det.im != 0 or det.re == 0:
        raise ValueError("act_matrix needs det(gamma) in Q^x")
    prod = mat_mul(mat_mul(g, M.matrix()), mat_inv(_mat_conj(g)))
    try:
        return VMatrix.from_matrix(prod)
    except ValueError as exc:
        raise ValueError("malformed gamma: result leaves V") from exc


def act_integral(gamma, M: tuple) -> tuple:
    """act_matrix on integer tuples for gamma in GL_2(Z[i]) (det a unit or rational).

    ``gamma`` is given as four (re, im) integer pairs.  The result is
    returned as an integer tuple when integral, otherwise a VMatrix.
    """
    res = act_matrix(gamma, VMatrix.from_tuple(M))
    try:
        return res.as_tuple()
    except ValueError:
        return res


# ---------------------------------------------------------------------------
# F_M


def fm_eval(M, tau, ctx: PadicContext) -> QuadExtScalar:
    """F_M(tau) = c*tau1*tau2 - iota2(alpha)*tau1 - iota1(alpha)*tau2 + b.

    The pairing of iota2 with tau1 (and iota1 with tau2) is what makes
    ``F_{gamma*M}(gamma tau)`` a multiple of ``F_M(tau)`` when gamma acts on
    tau1 through iota1 and on tau2 through iota2.
    """
    M = M if isinstance(M, VMatrix) else VMatrix.from_tuple(M)
    t1, t2 = tau
    a1 = _embed_entry(M.alpha, ctx, 1)
    a2 = _embed_entry(M.alpha, ctx, 2)
    val = ctx.quad(M.c) * t1 * t2 - a2 * t1 - a1 * t2 + ctx.quad(M.b)
    if val.is_zero() or val.prec < ctx.N:
        raise PrecisionError("tau lies too close to the divisor of F_M")
    return val


# ---------------------------------------------------------------------------
# Divisors


def _factorint(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_norm_from_K(d: int) -> bool:
    """True when d = x^2 + y^2 for integers x, y (d > 0)."""
    if d <= 0:
        return d == 0
    return all(e % 2 == 0 for q, e in _factorint(d).items() if q % 4 == 3)


@dataclass(frozen=True)
class DivisorSpec:
    """Formal sum sum n_i (d_i) of non-norms, with the even/odd parity flag."""

    terms: tuple[tuple[int, int], ...]
    parity: str = "even"

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        merged: dict[int, int] = {}
        for d, n in self.terms:
            d, n = int(d), int(n)
            if d <= 0:
                raise ValueError("divisor entries must be positive integers")
            merged[d] = merged.get(d, 0) + n
        object.__setattr__(self, "terms", tuple(sorted((d, n) for d, n in merged.items() if n)))

    def validate_against(self, p: int) -> None:
        for d, _ in self.terms:
            if is_norm_from_K(d):
                raise ValueError(f"{d} is a norm from Q(i)")
            if d % p == 0:
                raise ValueError(f"{d} is not coprime to p = {p}")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.terms)

    def __iter__(self):
        return iter(self.terms)


# ---------------------------------------------------------------------------
# Enumeration of Sigma_{d,v}(0, oo)


@lru_cache(maxsize=8)
def sum_two_squares_table(n: int) -> list[list[tuple[int, int]]]:
    """reps[k] = all (x, y) with x^2 + y^2 = k, for 0 <= k <= n."""
    reps: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
    r = math.isqrt(n)
    for x in range(-r, r + 1):
        xx = x * x
        ymax = math.isqrt(n - xx)
        for y in range(-ymax, ymax + 1):
            reps[xx + y * y].append((x, y))
    return reps


def _divisors_upto(n: int) -> list[list[int]]:
    divs: list[list[int]] = [[] for _ in range(n + 1)]
    for e in range(1, n + 1):
        for m in range(e, n + 1, e):
            divs[m].append(e)
    return divs


def sigma0_array(d: int, v: int, p: int, require_coprime: bool = True) -> np.ndarray:
    """Sigma_{d,v}(0, oo) as an (m, 4) int64 array of (x, y, b, c), sorted.

    All integral [x + y i; b, c] with x^2 + y^2 - b c = d p^v and b c < 0,
    in lexicographic order on (b, c, x, y).  Divisors need d prime to p;
    pure counting (weights) may switch that check off.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    if is_norm_from_K(d):
        raise ValueError(f"{d} is a norm from Q(i)")
    if require_coprime and d % p == 0:
        raise ValueError(f"{d} must be coprime to p = {p}")
    n = d * p**v
    reps = sum_two_squares_table(n)
    divs = _divisors_upto(n)
    buf = array("q")
    for m in range(1, n + 1):  # b c = -m, so x^2 + y^2 = n - m
        rs = reps[n - m]
        if not rs:
            continue
        for e in divs[m]:
            f = m // e
            for b, c in ((e, -f), (-e, f)):
                for x, y in rs:
                    buf.extend((x, y, b, c))
    arr = np.frombuffer(buf, dtype=np.int64).reshape(-1, 4).copy()
    order = np.lexsort((arr[:, 1], arr[:, 0], arr[:, 3], arr[:, 2]))
    return arr[order]


def enumerate_sigma0(d: int, v: int, ctx_or_p, require_coprime: bool = True) -> list[VMatrix]:
    """The finite set Sigma_{d,v}(0, oo) as a list of VMatrix, canonically ordered."""
    p = ctx_or_p.p if hasattr(ctx_or_p, "p") else int(ctx_or_p)
    rows = sigma0_array(d, v, p, require_coprime)
    return [VMatrix.from_tuple(tuple(int(t) for t in row)) for row in rows]
