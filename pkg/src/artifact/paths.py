"""Cusps, modular-symbol paths and intersection numbers over Z[i].

A path ``(r, s)`` between cusps of P^1(Q(i)) is written, via Gaussian
continued fractions, as a sum of translates ``gamma(0, oo)`` with gamma in
SL_2(Z[i]).  Reducing each gamma modulo Gamma_0(2) and using a fixed
relation for each of the six cosets expresses the path through the two
base pairs ``(0, oo)`` and ``(0, (1+i)/2)`` with coefficients in Gamma_0(2).

Intersection numbers use the Hermitian form attached to M = [alpha; b, c]::

    f_M(x : y) = c |x|^2 + b |y|^2 - 2 Re(alpha conj(x) y)

so that Delta_M . (r, s) = (sign f_M(s) - sign f_M(r)) / 2.  At r = 0,
s = oo this is sign(c) when bc < 0 and 0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .quadspace import (
    Gauss,
    VMatrix,
    act_matrix,
    chi4,
    enumerate_sigma0,
    mat_inv,
    mat_mul,
    quad_form,
    to_gauss_matrix,
)

__all__ = [
    "Cusp",
    "INFINITY",
    "ZERO",
    "HALF",
    "PathChain",
    "COSET_REPS",
    "BASE_0INF",
    "BASE_0HALF",
    "gauss_round",
    "gauss_gcd",
    "in_gamma0_2",
    "intersect_base",
    "intersect_path",
    "intersect",
    "manin_decompose",
    "coset_reduce",
    "base_pair_decompose",
    "enumerate_sigma_path",
    "identity",
]


def gauss_round(z: Gauss) -> Gauss:
    """Nearest Gaussian integer; halves round toward zero in each coordinate."""

    def rnd(q: Fraction) -> int:
        f = q.numerator // q.denominator
        rem = q - f
        if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and f < 0):
            return f + 1
        return f

    return Gauss(rnd(z.re), rnd(z.im))


def gauss_gcd(a: Gauss, b: Gauss) -> Gauss:
    while b != Gauss(0):
        q = gauss_round(a / b)
        a, b = b, a - q * b
    return a


_UNITS = (Gauss(1), Gauss(0, 1), Gauss(-1), Gauss(0, -1))


@dataclass(frozen=True)
class Cusp:
    """A point (a : c) of P^1(Q(i)) with a, c coprime Gaussian integers.

    The unit ambiguity is removed by making the first nonzero coordinate of
    ``c`` (of ``a`` when c = 0) lie in the quarter plane re > 0, im >= 0.
    """

    a: Gauss
    c: Gauss

    @classmethod
    def of(cls, value) -> "Cusp":
        if isinstance(value, Cusp):
            return value
        if value is None or (isinstance(value, str) and value in ("oo", "inf", "∞")):
            return INFINITY
        if isinstance(value, tuple) and len(value) == 2 and all(isinstance(v, Gauss) for v in value):
            return cls.make(*value)
        z = Gauss.of(value)
        den = z.re.denominator * z.im.denominator
        return cls.make(z * den, Gauss(den))

    @classmethod
    def make(cls, a, c) -> "Cusp":
        a, c = Gauss.of(a), Gauss.of(c)
        if a == Gauss(0) and c == Gauss(0):
            raise ValueError("(0 : 0) is not a cusp")
        # clear denominators, then divide out the gcd
        den = 1
        for x in (a, c):
            for t in (x.re, x.im):
                den = den * t.denominator // _gcd(den, t.denominator)
        a, c = a * den, c * den
        g = gauss_gcd(a, c)
        a, c = a / g, c / g
        lead = c if c != Gauss(0) else a
        for u in _UNITS:
            w = lead * u
            if w.re > 0 and w.im >= 0:
                return cls(a * u, c * u)
        raise AssertionError("unreachable")

    @property
    def is_infinity(self) -> bool:
        return self.c == Gauss(0)

    def value(self) -> Gauss:
        return self.a / self.c

    def act(self, gamma) -> "Cusp":
        A, B, C, D = to_gauss_matrix(gamma)
        return Cusp.make(A * self.a + B * self.c, C * self.a + D * self.c)

    def __repr__(self):
        return "oo" if self.is_infinity else repr(self.value())


def _gcd(x: int, y: int) -> int:
    while y:
        x, y = y, x % y
    return abs(x)


INFINITY = Cusp(Gauss(1), Gauss(0))
ZERO = Cusp(Gauss(0), Gauss(1))
HALF = Cusp.make(Gauss(1, 1), Gauss(2))

BASE_0INF = (ZERO, INFINITY)
BASE_0HALF = (ZERO, HALF)


def identity() -> tuple:
    return to_gauss_matrix(((1, 0), (0, 1)))


def _m(a, b, c, d) -> tuple:
    return tuple(Gauss.of(x) for x in (a, b, c, d))


i_ = Gauss(0, 1)

#: Representatives g_1..g_6 of Gamma_0(2) \ SL_2(Z[i]).
COSET_REPS: tuple[tuple, ...] = (
    _m(1, 0, 0, 1),
    _m(0, i_, i_, 0),
    _m(i_, 0, i_ + 1, -i_),
    _m(i_, -i_, 1 - 2 * i_, i_ - 1),
    _m(i_, 0, i_ + 2, -i_),
    _m(i_, 0, 2 * i_ - 1, -i_),
)

# (g_k 0, g_k oo) written on the two base pairs with Gamma_0(2) coefficients;
# entries are (sign, gamma, base) with base 0 = (0, oo) and 1 = (0, (1+i)/2).
_COSET_RELATIONS: tuple[tuple, ...] = (
    ((1, _m(1, 0, 0, 1), 0),),
    ((-1, _m(i_, 0, 0, -i_), 0),),
    ((1, _m(1, 0, 0, 1), 1),),
    ((-1, _m(i_ - 2, 1, 4, -i_ - 2), 1),),
    ((-1, _m(-i_, i_, -2, i_ + 2), 0), (1, _m(i_, 0, 2, -i_), 0)),
    ((-1, _m(1, i_, 2 * i_ + 2, 2 * i_ - 1), 0), (1, _m(i_, 0, 2 * i_ - 2, -i_), 0)),
)


def in_gamma0_2(gamma) -> bool:
    z = to_gauss_matrix(gamma)[2]
    return (z / 2).is_integral()


@dataclass(frozen=True)
class PathChain:
    """Formal sum of sign * gamma(base) with gamma in Gamma_0(2).

    ``base`` is 0 for (0, oo) and 1 for (0, (1+i)/2).
    """

    terms: tuple[tuple[int, tuple, int], ...]

    def boundary(self) -> dict[Cusp, int]:
        out: dict[Cusp, int] = {}
        for sign, gamma, base in self.terms:
            r, s = (BASE_0INF, BASE_0HALF)[base]
            for cusp, e in ((s, sign), (r, -sign)):
                key = cusp.act(gamma)
                out[key] = out.get(key, 0) + e
        return {k: v for k, v in out.items() if v}

    def translate(self, gamma) -> "PathChain":
        """gamma * chain, for gamma in Gamma_0(2)."""
        g = to_gauss_matrix(gamma)
        return PathChain(tuple((s, mat_mul(g, h), b) for s, h, b in self.terms))

    def __len__(self):
        return len(self.terms)

    def to_record(self) -> list:
        def enc(m):
            return [[str(x.re), str(x.im)] for x in m]

        return [[s, enc(g), b] for s, g, b in self.terms]


# ---------------------------------------------------------------------------
# Intersection numbers


def _hermitian(M: VMatrix, cusp: Cusp) -> Fraction:
    x, y = cusp.a, cusp.c
    return M.c * x.norm() + M.b * y.norm() - 2 * (M.alpha * x.conj() * y).re


def _sgn(v) -> int:
    return (v > 0) - (v < 0)


def intersect_path(M, r, s) -> int:
    """Delta_M . (r, s) for arbitrary cusps r, s."""
    M = M if isinstance(M, VMatrix) else VMatrix.from_tuple(M)
    fr, fs = _hermitian(M, Cusp.of(r)), _hermitian(M, Cusp.of(s))
    if fr == 0 or fs == 0:
        raise ValueError("cusp lies on the geodesic of M (q(M) is a norm)")
    return (_sgn(fs) - _sgn(fr)) // 2


def intersect_base(M) -> int:
    """Delta_M . (0, oo): sign(c) if bc < 0, else 0."""
    if isinstance(M, VMatrix):
        b, c = M.b, M.c
    else:
        b, c = M[2], M[3]
    if quad_form(M) <= 0:
        raise ValueError("intersect_base needs q(M) > 0")
    return _sgn(c) if b * c < 0 else 0


def intersect(M, chain: PathChain) -> int:
    """Total intersection of Delta_M with a chain, summed term by term."""
    M = M if isinstance(M, VMatrix) else VMatrix.from_tuple(M)
    total = 0
    for sign, gamma, base in chain.terms:
        Mg = act_matrix(mat_inv(gamma), M)
        if base == 0:
            total += sign * intersect_base(Mg)
        else:
            total += sign * intersect_path(Mg, ZERO, HALF)
    return total


# ---------------------------------------------------------------------------
# Manin trick and coset reduction


def _manin_from_zero(target: Cusp) -> list[tuple[int, tuple]]:
    """Chain for (0, target) from the continued fraction of target."""
    if target == ZERO:
        return []
    out = [(1, identity())]  # (0, oo)
    if target.is_infinity:
        return out
    # convergents p_k / q_k of a/c, starting from p_{-1}/q_{-1} = oo and p_{-2}/q_{-2} = 0
    p_prev2, q_prev2 = Gauss(0), Gauss(1)
    p_prev, q_prev = Gauss(1), Gauss(0)
    a, c = target.a, target.c
    while c != Gauss(0):
        t = gauss_round(a / c)
        a, c = c, a - t * c
        pk, qk = t * p_prev + p_prev2, t * q_prev + q_prev2
        gamma = (pk, p_prev, qk, q_prev)
        det = pk * q_prev - p_prev * qk
        # det is a unit; rescale the second column so that det = 1
        gamma = (pk, p_prev * det.inverse(), qk, q_prev * det.inverse())
        out.append((1, gamma))
        p_prev2, q_prev2, p_prev, q_prev = p_prev, q_prev, pk, qk
    return out


def manin_decompose(r, s) -> list[tuple[int, tuple]]:
    """(r, s) as sum of sign * (gamma 0, gamma oo) with gamma in SL_2(Z[i])."""
    r, s = Cusp.of(r), Cusp.of(s)
    if r == s:
        return []
    pos = _manin_from_zero(s)
    neg = _manin_from_zero(r)
    return pos + [(-sg, g) for sg, g in neg]


def coset_reduce(gamma) -> tuple[tuple, int]:
    """gamma = gamma' g_k with gamma' in Gamma_0(2); returns (gamma', k)."""
    g = to_gauss_matrix(gamma)
    for k, rep in enumerate(COSET_REPS, start=1):
        gp = mat_mul(g, mat_inv(rep))
        if in_gamma0_2(gp):
            return gp, k
    raise ValueError("gamma is not in SL_2(Z[i])")


def _adjacent(r: Cusp, s: Cusp):
    """gamma in SL_2(Z[i]) with gamma 0 = r and gamma oo = s, or None.

    Among the unit rescalings, one that is itself a coset representative
    is preferred so that the published single-term relations come out
    verbatim.
    """
    det = s.a * r.c - r.a * s.c
    if det.norm() != 1:
        return None
    inv = det.inverse()
    cands = [(s.a * u, r.a * inv / u, s.c * u, r.c * inv / u) for u in _UNITS]
    for g in cands:
        if g in COSET_REPS:
            return g
    return cands[0]


def base_pair_decompose(r, s) -> PathChain:
    """(r, s) written on the base pairs (0, oo) and (0, (1+i)/2)."""
    r, s = Cusp.of(r), Cusp.of(s)
    terms: list[tuple[int, tuple, int]] = []
    adj = _adjacent(r, s) if r != s else None
    pieces = [(1, adj)] if adj is not None else manin_decompose(r, s)
    for sign, gamma in pieces:
        gp, k = coset_reduce(gamma)
        for rs, h, base in _COSET_RELATIONS[k - 1]:
            terms.append((sign * rs, mat_mul(gp, h), base))
    return PathChain(tuple(terms))


# ---------------------------------------------------------------------------
# Sigma over a chain

_G3 = COSET_REPS[2]


def enumerate_sigma_path(
    d: int, v: int, chain: PathChain, p: int, require_coprime: bool = True
) -> list[tuple[VMatrix, int]]:
    """All M meeting the chain, with exponent chi_4(M) * intersect(M, chain).

    The candidate pool is the union of the chain translates of
    Sigma_{d,v}(0, oo) (composed with g_3 for the second base pair).
    """
    base = enumerate_sigma0(d, v, p, require_coprime)
    seen: dict[VMatrix, None] = {}
    for _, gamma, b in chain.terms:
        g = gamma if b == 0 else mat_mul(gamma, _G3)
        for M0 in base:
            seen.setdefault(act_matrix(g, M0), None)
    out = []
    for M in seen:
        e = chi4(M, p) * sum(
            sg * intersect_path(M, *(c.act(gm) for c in (BASE_0INF, BASE_0HALF)[bb]))
            for sg, gm, bb in chain.terms
        )
        if e:
            out.append((M, e))
    return out


def chain_from_pairs(pairs: Iterable[tuple[int, tuple, int]]) -> PathChain:
    return PathChain(tuple(pairs))
