"""Special points on X_p: small RM/CM points and big ATR points.

Small points come from a real quadratic field E = Q(sqrt(Delta)) in which p
is inert: a norm-one unit acts on the basis (omega, 1) of O_E by a matrix
gamma_u in SL_2(Z), whose two fixed points in Q_{p^2} are paired up.

Big ATR points come from the tower::

    F = Q(sqrt(D)),  E = F(sqrt(n alpha)),  K = Q(i),  L = K(sqrt(beta)),  M = E(i)

where alpha = (a + b sqrt(D))/2 has norm -m^2 and beta = n a + 2 n m i.
A unit u of E with Nm_{E/F}(u) = 1 gives u~ = Nm_{M/L}(u) in L, and
multiplication by u~ on an O_K-basis of O_L is the matrix gamma_u in
SL_2(Z[i]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy
from sympy.solvers.diophantine.diophantine import diop_DN

from .padic import (
    NonResidueError,
    PadicContext,
    QuadExtScalar,
    hensel_sqrt,
    moebius_act,
)
from .quadspace import Gauss, is_norm_from_K, mat_det, to_gauss_matrix

__all__ = [
    "RealQuadElt",
    "LElt",
    "ATRData",
    "SpecialPoint",
    "NumberFieldElement",
    "pell_negative_square",
    "build_atr_fields",
    "norm_one_unit_real",
    "gamma_from_unit_real",
    "atr_norm_one_unit",
    "gamma_from_atr_unit",
    "fixed_points",
    "small_points",
    "atr_points",
    "relative_norm",
    "sqrt_in_quad_ext",
    "is_fundamental_discriminant",
    "kronecker",
    "polredabs",
]


# ---------------------------------------------------------------------------
# Exact arithmetic in Q(sqrt(D)) and in L = K(sqrt(beta))


@dataclass(frozen=True)
class RealQuadElt:
    """x + y sqrt(D) with rational x, y."""

    x: Fraction
    y: Fraction
    D: int

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    def _c(self, o):
        return o if isinstance(o, RealQuadElt) else RealQuadElt(Fraction(o), Fraction(0), self.D)

    def __add__(self, o):
        o = self._c(o)
        return RealQuadElt(self.x + o.x, self.y + o.y, self.D)

    __radd__ = __add__

    def __neg__(self):
        return RealQuadElt(-self.x, -self.y, self.D)

    def __sub__(self, o):
        return self + (-self._c(o))

    def __mul__(self, o):
        o = self._c(o)
        return RealQuadElt(self.x * o.x + self.D * self.y * o.y, self.x * o.y + self.y * o.x, self.D)

    __rmul__ = __mul__

    def conj(self):
        return RealQuadElt(self.x, -self.y, self.D)

    def norm(self) -> Fraction:
        return self.x * self.x - self.D * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def inverse(self):
        n = self.norm()
        return RealQuadElt(self.x / n, -self.y / n, self.D)

    def __truediv__(self, o):
        return self * self._c(o).inverse()

    def real(self, sign: int = 1) -> float:
        return float(self.x) + sign * float(self.y) * math.sqrt(self.D)

    def sqrt(self) -> "RealQuadElt | None":
        """A square root in the same field, or None."""
        if self.y == 0 and self.x >= 0:
            r = _rat_sqrt(self.x)
            if r is not None:
                return RealQuadElt(r, 0, self.D)
        if self.y == 0:
            r = _rat_sqrt(self.x / self.D) if self.x * self.D > 0 else None
            return RealQuadElt(0, r, self.D) if r is not None else None
        n = _rat_sqrt(self.norm()) if self.norm() >= 0 else None
        if n is None:
            return None
        for s in (n, -n):
            t2 = self.trace() + 2 * s
            t = _rat_sqrt(t2) if t2 > 0 else None
            if t:
                cand = (self + s) / t
                if cand * cand == self:
                    return cand
        return None


def _rat_sqrt(q: Fraction) -> Fraction | None:
    q = Fraction(q)
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class LElt:
    """A + B s in L = K(s), s^2 = beta, with A, B in Q(i)."""

    A: Gauss
    B: Gauss
    beta: Gauss

    def __mul__(self, o: "LElt") -> "LElt":
        return LElt(self.A * o.A + self.B * o.B * self.beta, self.A * o.B + self.B * o.A, self.beta)

    def conj(self) -> "LElt":
        return LElt(self.A, -self.B, self.beta)

    def norm(self) -> Gauss:
        return self.A * self.A - self.B * self.B * self.beta

    def trace(self) -> Gauss:
        return self.A * 2


@dataclass(frozen=True)
class NumberFieldElement:
    """Coordinates in the power basis of a defining polynomial, with a field tag."""

    coords: tuple[Fraction, ...]
    poly: tuple[int, ...]
    tag: str

    def minpoly(self) -> sympy.Poly:
        x = sympy.Symbol("x")
        f = sympy.Poly(list(self.poly), x)
        y = sympy.Symbol("y")
        elt = sum(sympy.Rational(c.numerator, c.denominator) * y**k for k, c in enumerate(self.coords))
        res = sympy.resultant(f.as_expr().subs(x, y), x - elt, y)
        return sympy.Poly(sympy.factor_list(res)[1][0][0], x)


# ---------------------------------------------------------------------------
# Pell-type equations and real quadratic units


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return sympy.ntheory.factor_.core(abs(D)) == abs(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and sympy.ntheory.factor_.core(abs(m)) == abs(m)
    return False


def kronecker(a: int, n: int) -> int:
    return int(sympy.jacobi_symbol(a % n, n)) if n % 2 else int(sympy.ntheory.residue_ntheory.kronecker_symbol(a, n))


def pell_negative_square(D: int) -> tuple[int, int, int]:
    """Minimal (a, b, m), b first and then a, with a^2 - D b^2 = -4 m^2."""
    if D <= 0:
        raise ValueError("D must be positive")
    if not is_norm_from_K(D):
        raise ValueError(f"Q(sqrt({D})) has no element of norm -1 (D is not a sum of two squares)")
    b = 1
    while True:
        Db2 = D * b * b
        for a in range(1, math.isqrt(Db2) + 1):
            rest = Db2 - a * a
            if rest > 0 and rest % 4 == 0:
                m = math.isqrt(rest // 4)
                if m * m * 4 == rest:
                    return a, b, m
        b += 1


def norm_one_unit_real(Delta: int) -> RealQuadElt:
    """Fundamental norm-one unit of the maximal order of Q(sqrt(Delta))."""
    if not is_fundamental_discriminant(Delta) or Delta < 0:
        raise ValueError(f"{Delta} is not a positive fundamental discriminant")
    best = None
    for N in (4, -4):
        sols = diop_DN(Delta, N)
        for x, y in sols:
            x, y = abs(int(x)), abs(int(y))
            if y == 0:
                continue
            if best is None or (y, x) < (best[1], best[0]):
                best = (x, y, N)
    x, y, N = best
    u = RealQuadElt(Fraction(x, 2), Fraction(y, 2), Delta)
    return u * u if N == -4 else u


def _omega_real(Delta: int) -> RealQuadElt:
    return RealQuadElt(Fraction(Delta % 2, 2), Fraction(1, 2), Delta)


def gamma_from_unit_real(u: RealQuadElt) -> tuple[tuple[int, int], tuple[int, int]]:
    """Matrix of multiplication by u on the basis (omega, 1)."""
    Delta = u.D
    w = _omega_real(Delta)
    # u = e + f omega
    f = u.y * 2
    e = u.x - f * w.x
    # omega^2 = t omega + n with t = Tr(omega), n = -Nm(omega)
    t, n = w.trace(), -w.norm()
    A, B = e + f * t, f * n
    C, Dd = f, e
    entries = [A, B, C, Dd]
    if any(x.denominator != 1 for x in entries):
        raise ValueError("unit is not integral on the basis (omega, 1)")
    A, B, C, Dd = (int(x) for x in entries)
    if A * Dd - B * C != 1:
        raise ValueError("gamma_u does not have determinant 1")
    return ((A, B), (C, Dd))


# ---------------------------------------------------------------------------
# ATR tower


@dataclass
class ATRData:
    D: int
    n: int
    a: int
    b: int
    m: int
    E_poly: tuple[int, ...]
    L_poly: tuple[int, ...]
    M_poly: tuple[int, ...]
    beta: Gauss
    d_rel: Gauss
    q: int
    omega_L: tuple[Gauss, Gauss, Gauss] = field(default=None)  # (t, delta, beta_red)

    @property
    def alpha(self) -> RealQuadElt:
        return RealQuadElt(Fraction(self.a, 2), Fraction(self.b, 2), self.D)


def _poly_coeffs(expr, x) -> tuple[int, ...]:
    return tuple(int(c) for c in sympy.Poly(expr, x).all_coeffs())


def _gauss_factor_squares(beta: Gauss) -> tuple[Gauss, Gauss]:
    """beta = pi^2 * beta_red with beta_red free of square Gaussian-prime factors."""
    x, y = beta.as_ints()
    N = x * x + y * y
    g = Gauss(1)
    red = beta
    for ell, e in sympy.factorint(N).items():
        if e < 2:
            continue
        if ell % 4 == 3:
            cands = [Gauss(ell)]
        elif ell == 2:
            cands = [Gauss(1, 1)]
        else:
            r = next(r for r in range(1, ell) if (r * r + 1) % ell == 0)
            cands = []
            gg = _ggcd(Gauss(ell), Gauss(r, 1))
            cands = [gg, gg.conj()]
        for pi in cands:
            while True:
                cand = red / (pi * pi)
                if cand.is_integral():
                    red, g = cand, g * pi
                else:
                    break
    return g, red


def _ggcd(a: Gauss, b: Gauss) -> Gauss:
    from .paths import gauss_gcd

    return gauss_gcd(a, b)


def _maximal_order_generator(beta: Gauss) -> tuple[Gauss, Gauss]:
    """(t, delta) such that O_L = O_K[(t + s)/delta], s^2 = beta square-free.

    Tries delta in 2, 1+i, 1 (largest index first) and t over Z[i]/delta.
    """
    for delta in (Gauss(2), Gauss(1, 1), Gauss(1)):
        reps = [Gauss(x, y) for x in range(2) for y in range(2)] if delta != Gauss(1) else [Gauss(0)]
        for t in reps:
            tr = (t * 2) / delta
            nm = (t * t - beta) / (delta * delta)
            if tr.is_integral() and nm.is_integral():
                return t, delta
    return Gauss(0), Gauss(1)


def build_atr_fields(D: int, n: int) -> ATRData:
    """The fields E, L, M of the ATR tower for (D, n)."""
    if not is_fundamental_discriminant(D) or D < 0:
        raise ValueError(f"{D} is not a positive fundamental discriminant")
    a, b, m = pell_negative_square(D)
    x = sympy.Symbol("x")
    alpha = RealQuadElt(Fraction(a, 2), Fraction(b, 2), D)
    if (alpha * n).sqrt() is not None:
        raise ValueError("n*alpha is a square in F: E degenerates")
    E = x**4 - n * a * x**2 - n * n * m * m
    L = x**4 - 2 * n * a * x**2 + n * n * (a * a + 4 * m * m)
    if len(sympy.factor_list(E)[1]) != 1 or len(sympy.factor_list(L)[1]) != 1:
        raise ValueError("E or L is not a quartic field")
    y = sympy.Symbol("y")
    Mpoly = sympy.resultant(E.subs(x, y), (x - y) ** 2 + 1, y)
    Mpoly = sympy.Poly(Mpoly, x)
    if not Mpoly.is_irreducible:
        raise ValueError("E(i) is not an octic field")
    beta = Gauss(n * a, 2 * n * m)
    g, red = _gauss_factor_squares(beta)
    t, delta = _maximal_order_generator(red)
    d_rel = red * 4 / (delta * delta)
    q = int(d_rel.norm())
    return ATRData(
        D=D,
        n=n,
        a=a,
        b=b,
        m=m,
        E_poly=_poly_coeffs(E, x),
        L_poly=_poly_coeffs(L, x),
        M_poly=tuple(int(c) for c in Mpoly.all_coeffs()),
        beta=beta,
        d_rel=d_rel,
        q=q,
        omega_L=(t, delta, red, g),
    )


def polredabs(poly: Sequence[int]) -> tuple[int, ...]:
    """PARI's canonical reduced defining polynomial (coefficients from the top down).

    Tables of number fields quote this normal form, so it is the one to
    compare against when a field is given by a printed polynomial.
    """
    import cypari

    pari = cypari.pari
    f = pari(" + ".join(f"({int(c)})*x^{k}" for k, c in enumerate(reversed(tuple(poly)))))
    return tuple(int(c) for c in pari.Vec(pari.polredabs(f)))


def _real_trace_candidates(D: int, lmax: int):
    """O_F elements T = (k + l sqrt(D))/2 with |T'| <= 2, in increasing T."""
    sq = math.sqrt(D)
    for l in range(1, lmax + 1):
        centre = l * sq
        for k in range(math.floor(centre - 4) - 1, math.ceil(centre + 4) + 2):
            if (k - l * D) % 2:
                continue
            if abs(k - centre) <= 4 + 1e-9:
                yield RealQuadElt(Fraction(k, 2), Fraction(l, 2), D)


def atr_norm_one_unit(data: ATRData, budget: int = 10**7) -> tuple[RealQuadElt, RealQuadElt]:
    """A generator u = (T + y w)/2 of the units of E with Nm_{E/F}(u) = 1.

    Returned as (T, y) in F, where w = sqrt(n alpha).  The search runs over
    traces T = u + 1/u in O_F ordered by size: |T| <= 2 at the complex place,
    so T has small conjugate and the first hit is the generator.
    """
    D, n = data.D, data.n
    nalpha = data.alpha * n
    lmax = budget
    for T in _real_trace_candidates(D, lmax):
        disc = T * T - 4
        if disc.x == 0 and disc.y == 0:
            continue
        y = (disc / nalpha).sqrt()
        if y is not None:
            if y.real(1) < 0:
                y = -y
            return T, y
    raise RuntimeError("unit search budget exhausted")


def gamma_from_atr_unit(data: ATRData, unit: tuple[RealQuadElt, RealQuadElt]) -> tuple[tuple, LElt]:
    """u~ = Nm_{M/L}(u) and its multiplication matrix on (omega_L, 1)."""
    T, y = unit
    n, m, b = data.n, data.m, data.b
    beta = data.beta
    i_ = Gauss(0, 1)
    nmi = i_ * (n * m)
    # u = (T + y w)/2, sigma(u) = (T' + y' w')/2 with w w' = n m i and
    # sqrt(D) (w' - w) = -(beta - 4 n m i) s / (n b).
    t0, t1, y0, y1 = T.x, T.y, y.x, y.y
    P = t0 * y0 - t1 * y1 * data.D
    Q = t1 * y0 - t0 * y1
    A = (Gauss(T.norm()) + Gauss(y.norm()) * nmi) / 4
    B = (Gauss(P) - Gauss(Q) * (beta - nmi * 4) / (n * b)) / 4
    ut = LElt(A, B, beta)
    if ut.norm() != Gauss(1):
        raise ValueError("relative norm of u~ is not 1")
    t, delta, red, g = data.omega_L
    # s = g * s_red with s_red^2 = red; express u~ = A + (B g) s_red
    Bp = B * g
    A_, B_ = A, Bp
    gamma = (A_ + B_ * t, B_ * (red - t * t) / delta, B_ * delta, A_ - B_ * t)
    if not all(x.is_integral() for x in gamma):
        raise ValueError("u~ is not integral on the chosen O_K-basis of O_L")
    if mat_det(gamma) != Gauss(1):
        raise ValueError("gamma_u does not have determinant 1")
    return gamma, LElt(A_, B_, red)


def relative_norm(x, kind: str):
    """Relative norms along the degree-2 steps used here.

    ``kind`` is ``"F/Q"`` for RealQuadElt, ``"L/K"`` for LElt, or ``"E/F"``
    for a pair (T, y) meaning (T + y w)/2.
    """
    if kind == "F/Q" and isinstance(x, RealQuadElt):
        return x.norm()
    if kind == "L/K" and isinstance(x, LElt):
        return x.norm()
    if kind == "E/F" and isinstance(x, tuple):
        T, y, nalpha = x
        return (T * T - y * y * nalpha) / 4
    raise ValueError(f"unsupported tower step {kind!r} for {type(x).__name__}")


# ---------------------------------------------------------------------------
# Fixed points


def sqrt_in_quad_ext(z, ctx: PadicContext) -> QuadExtScalar:
    """Square root of a base-field element z that is a non-square in Q_p.

    omega^2 = r with r the least non-residue, so sqrt(z) = sqrt(z/r) omega.
    """
    zz = z if not isinstance(z, QuadExtScalar) else z.components()[0]
    zs = ctx.scalar(zz) if not hasattr(zz, "unit") else zz
    try:
        root = hensel_sqrt(zs, ctx)
        return QuadExtScalar.from_pair(ctx, root, _zero(ctx, root))
    except NonResidueError:
        pass
    root = hensel_sqrt(zs / ctx.scalar(ctx.r), ctx)
    return QuadExtScalar.from_pair(ctx, _zero(ctx, root), root)


def _zero(ctx, like):
    from .padic import PadicScalar

    return PadicScalar(ctx.p, like.absprec, 0, 0)


@dataclass
class SpecialPoint:
    kind: str
    gamma_u: tuple
    tau: tuple[QuadExtScalar, QuadExtScalar]
    reflex: str
    branch: tuple[int, int]
    data: object = None

    def cusp_target(self):
        """gamma_u(oo) as a cusp."""
        from .paths import Cusp

        g = to_gauss_matrix(self.gamma_u)
        return Cusp.make(g[0], g[2])


def _embedded_fixed_roots(gamma, ctx: PadicContext, which: int) -> list[QuadExtScalar]:
    from .padic import _embed_entry

    A, B, C, D = (_embed_entry(e, ctx, which) for e in to_gauss_matrix(gamma))
    tr = A + D
    disc = tr * tr - 4
    a_comp, b_comp = disc.components()
    if not b_comp.is_zero():
        raise ValueError("discriminant of the fixed-point quadratic is not in Q_p")
    try:
        hensel_sqrt(a_comp, ctx)
        raise ValueError("fixed points lie in Q_p: p is not inert at this place")
    except NonResidueError:
        pass
    root = sqrt_in_quad_ext(a_comp, ctx)
    out = []
    for sgn in (1, -1):
        out.append(((A - D) + root * sgn) / (C * 2))
    return out


def fixed_points(gamma, kind: str, ctx: PadicContext, branch: tuple[int, int] = (0, 0)) -> SpecialPoint:
    """Fixed point pair of gamma_u on X_p for the given branch choice.

    For small points (``gamma`` over Z) branch (i, i) is RM and (i, j), i != j,
    is CM.  For bigATR points tau_1 is fixed by iota_1(gamma) and tau_2 by
    iota_2(gamma); the branch picks the square root sign in each.
    """
    r1 = _embedded_fixed_roots(gamma, ctx, 1)
    r2 = _embedded_fixed_roots(gamma, ctx, 2)
    tau = (r1[branch[0]], r2[branch[1]])
    if kind in ("smallRM", "smallCM"):
        kind = "smallRM" if branch[0] == branch[1] else "smallCM"
    for t in tau:
        if t.components()[1].is_zero():
            raise ValueError("tau lies in Q_p")
    img = moebius_act(to_gauss_matrix(gamma), tau, ctx)
    for a, b in zip(img, tau):
        if not a.agrees(b, ctx.N):
            raise ValueError("fixed-point check failed")
    reflex = {"smallRM": "real quadratic", "smallCM": "imaginary quadratic", "bigATR": "ATR"}[kind]
    return SpecialPoint(kind, gamma, tau, reflex, branch)


def small_points(Delta: int, ctx: PadicContext) -> list[SpecialPoint]:
    """The four pairings (RM and CM) for Q(sqrt(Delta))."""
    if kronecker(Delta, ctx.p) != -1:
        raise ValueError(f"p = {ctx.p} is not inert in Q(sqrt({Delta}))")
    u = norm_one_unit_real(Delta)
    gamma = gamma_from_unit_real(u)
    out = []
    for br in ((0, 0), (1, 1), (0, 1), (1, 0)):
        pt = fixed_points(gamma, "smallRM", ctx, br)
        pt.data = u
        out.append(pt)
    return out


def atr_points(D: int, n: int, ctx: PadicContext, unit=None) -> list[SpecialPoint]:
    """The four branch pairings of the big ATR point attached to (D, n)."""
    data = build_atr_fields(D, n)
    unit = unit or atr_norm_one_unit(data)
    gamma, ut = gamma_from_atr_unit(data, unit)
    out = []
    for br in ((0, 0), (0, 1), (1, 0), (1, 1)):
        pt = fixed_points(gamma, "bigATR", ctx, br)
        pt.data = (data, unit, ut)
        out.append(pt)
    return out
