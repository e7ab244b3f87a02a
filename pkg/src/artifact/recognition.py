"""Recognition of computed p-adic values and the prime-support criterion.

Values live in the unramified quadratic extension ``Q_p(omega)``.  A value
``x = A + B*omega`` satisfies an integral polynomial ``P`` modulo ``p^M``
exactly when both coordinates of ``P(x)`` vanish, so algebraic dependence
is found by reducing the integer lattice of coefficient vectors subject to
two linear congruences.  Lattice reduction is delegated to FLINT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import flint
import mpmath
import sympy

from .padic import PadicContext, PadicScalar, QuadExtScalar
from .quadspace import Gauss

__all__ = [
    "RecognizedValue",
    "SupportReport",
    "Witness",
    "conj_triv",
    "algdep",
    "poly_residual",
    "norm_factorization",
    "support_criterion",
    "allowed_primes",
    "splitting_pattern",
    "field_of_definition",
    "fields_isomorphic",
    "abelianity_diagnostics",
    "DEFAULT_SLACK",
    "DEGREE_LADDER",
]

DEFAULT_SLACK = 5
DEGREE_LADDER = (1, 2, 4, 8)


# ---------------------------------------------------------------------------
# Trivial and conjugate parts


def conj_triv(J: QuadExtScalar) -> tuple[QuadExtScalar, QuadExtScalar]:
    """Return ``(J * conj(J), J / conj(J))``.

    The second entry has norm one by construction and is a unit even when
    J carries a power of p.
    """
    if J.is_zero():
        raise ValueError("conj_triv expects a nonzero value")
    c = J.conj()
    return J * c, J * c.inverse()


# ---------------------------------------------------------------------------
# Algebraic dependence


@dataclass(frozen=True)
class RecognizedValue:
    """Outcome of a recognition attempt.

    ``poly`` lists integer coefficients from the constant term upward, is
    content-free and has positive leading coefficient.  ``flag`` is one of
    ``"a"`` (small height), ``"l"`` (smooth norm inside an allowed set) or
    ``"unrecognized"``, in which case ``poly`` is empty.
    """

    poly: tuple[int, ...]
    flag: str
    precision: int
    residual: int = 0
    field_poly: tuple[int, ...] = ()
    norm: tuple[tuple[int, int], ...] = ()
    norm_sign: int = 1
    palindromic: bool = False

    @property
    def degree(self) -> int:
        return len(self.poly) - 1 if self.poly else 0

    @property
    def height(self) -> int:
        return max((abs(c) for c in self.poly), default=0)

    @property
    def recognized(self) -> bool:
        return self.flag != "unrecognized"

    def to_record(self) -> dict:
        return {
            "poly": list(self.poly),
            "flag": self.flag,
            "precision": self.precision,
            "residual": self.residual,
            "field": list(self.field_poly),
            "norm": [list(t) for t in self.norm],
            "norm_sign": self.norm_sign,
            "palindromic": self.palindromic,
        }


def _as_quad(x, ctx: PadicContext) -> QuadExtScalar:
    if isinstance(x, QuadExtScalar):
        return x
    if isinstance(x, PadicScalar):
        return QuadExtScalar.from_pair(ctx, x, PadicScalar(ctx.p, x.absprec, 0, 0))
    return ctx.quad(x)


def _coords(x: QuadExtScalar, M: int) -> tuple[int, int]:
    """Integers (A, B) with x = A + B*omega mod p^M; needs val(x) >= 0."""
    mod = x.p**M
    s = x.p**x.val
    return (x.a * s) % mod, (x.b * s) % mod


def _qmul(u, v, r, mod):
    return ((u[0] * v[0] + r * u[1] * v[1]) % mod, (u[0] * v[1] + u[1] * v[0]) % mod)


def _qinv(u, r, mod):
    n = (u[0] * u[0] - r * u[1] * u[1]) % mod
    ni = pow(n, -1, mod)
    return (u[0] * ni % mod, -u[1] * ni % mod)


def _val_pair(u, p, M) -> int:
    a, b = u
    if a == 0 and b == 0:
        return M
    v = 0
    while a % p == 0 and b % p == 0:
        a //= p
        b //= p
        v += 1
    return v


def poly_residual(poly: Sequence[int], x, ctx: PadicContext, M: int | None = None) -> int:
    """Valuation of ``poly(x)`` (capped at the precision M)."""
    x = _as_quad(x, ctx)
    M = min(ctx.N, x.absprec) if M is None else M
    mod = ctx.p**M
    u = _coords(x, M)
    acc = (0, 0)
    for c in reversed(poly):
        acc = _qmul(acc, u, ctx.r, mod)
        acc = ((acc[0] + c) % mod, acc[1])
    return _val_pair(acc, ctx.p, M)


def _power_coords(u, n, r, mod):
    out = [(1, 0)]
    for _ in range(n):
        out.append(_qmul(out[-1], u, r, mod))
    return out


def _kernel_vectors(cols: list[tuple[int, int]], p: int, M: int) -> list[list[int]]:
    """Short integer vectors c with sum c_k * cols[k] = 0 mod p^M (both coordinates)."""
    n = len(cols)
    mod = p**M
    W = mod << (n + 2)
    rows = []
    for k, (a, b) in enumerate(cols):
        row = [0] * n + [W * a, W * b]
        row[k] = 1
        rows.append(row)
    rows.append([0] * n + [W * mod, 0])
    rows.append([0] * n + [0, W * mod])
    red = flint.fmpz_mat(rows).lll()
    out = []
    for i in range(red.nrows()):
        vec = [int(red[i, j]) for j in range(n + 2)]
        if vec[n] == 0 and vec[n + 1] == 0 and any(vec[:n]):
            out.append(vec[:n])
    return out


def _normalize(poly: list[int]) -> tuple[int, ...]:
    while poly and poly[-1] == 0:
        poly.pop()
    g = 0
    for c in poly:
        g = math.gcd(g, c)
    if g == 0:
        return ()
    poly = [c // g for c in poly]
    if poly[-1] < 0:
        poly = [-c for c in poly]
    return tuple(poly)


def _palindromic_to_poly(c: Sequence[int]) -> list[int]:
    """c_0 + sum_j c_j (x^j + x^-j), multiplied by x^k."""
    k = len(c) - 1
    poly = [0] * (2 * k + 1)
    poly[k] = c[0]
    for j in range(1, k + 1):
        poly[k + j] += c[j]
        poly[k - j] += c[j]
    return poly


def _irreducible_part(poly: tuple[int, ...], x, ctx, M) -> tuple[tuple[int, ...], int]:
    """The irreducible factor of ``poly`` vanishing most strongly at x."""
    fac = flint.fmpz_poly(list(poly)).factor()[1]
    best, best_res = poly, -1
    for f, _ in fac:
        cand = _normalize([int(c) for c in f.coeffs()])
        if len(cand) < 2:
            continue
        res = poly_residual(cand, x, ctx, M)
        if res > best_res or (res == best_res and len(cand) < len(best)):
            best, best_res = cand, res
    return best, best_res


def _candidates(x: QuadExtScalar, deg: int, palin: bool, ctx, M) -> list[tuple[int, ...]]:
    mod = ctx.p**M
    u = _coords(x, M)
    if palin:
        k = deg // 2
        pw = _power_coords(u, k, ctx.r, mod)
        ipw = _power_coords(_qinv(u, ctx.r, mod), k, ctx.r, mod)
        cols = [(1, 0)] + [
            ((pw[j][0] + ipw[j][0]) % mod, (pw[j][1] + ipw[j][1]) % mod) for j in range(1, k + 1)
        ]
        vecs = _kernel_vectors(cols, ctx.p, M)
        polys = [_palindromic_to_poly(v) for v in vecs]
    else:
        cols = _power_coords(u, deg, ctx.r, mod)
        polys = _kernel_vectors(cols, ctx.p, M)
    out = []
    for pl in polys:
        t = _normalize(list(pl))
        if len(t) >= 2:
            out.append(t)
    out.sort(key=lambda t: (max(abs(c) for c in t), len(t)))
    return out


def _evidence(poly: Sequence[int], res: int, p: int, norm_one: bool, in_base: bool) -> float:
    """Digits by which ``poly`` vanishing to ``res`` digits beats a random match.

    A palindromic polynomial has about half as many free coefficients.  An
    x in Q_p, or a norm-one x searched palindromically (x + 1/x lies in
    Q_p), imposes one condition per digit instead of two.
    """
    d = len(poly) - 1
    palin = tuple(poly) == tuple(reversed(poly)) and d % 2 == 0
    k = d // 2 + 1 if palin else d + 1
    c = 1 if in_base or (palin and norm_one) else 2
    h = max(abs(int(a)) for a in poly)
    return c * res - k * math.log(2 * h + 1, p)


def algdep(
    x,
    ctx: PadicContext,
    max_deg: int = 8,
    palindromic: bool | None = None,
    slack: int = DEFAULT_SLACK,
    allowed: Iterable[int] | None = None,
    ladder: Sequence[int] = DEGREE_LADDER,
) -> RecognizedValue:
    """Search for a small integral polynomial vanishing at ``x``.

    Degrees are tried along ``ladder``.  With ``palindromic=None`` the
    palindromic search is used automatically when ``x`` has norm one at
    the working precision; degree one is always searched without the
    symmetry constraint so that rational values such as 1 are caught.

    Every candidate must vanish at ``x`` modulo ``p ** need`` with
    ``need = max(M - slack, ceil(M / 2))`` and must beat chance: a
    polynomial with ``k`` free coefficients of size at most ``h`` meets
    ``c`` independent p-adic conditions to ``res`` digits by accident about
    ``(2h + 1) ** k / p ** (c * res)`` times, and the excess digits
    ``c * res - k * log_p(2h + 1)`` measure the evidence.  Flag ``"a"``
    needs positive evidence and ``height ** (deg + 1) < p ** (M / 2)``.
    Flag ``"l"`` needs ``allowed``, a norm supported on it, and at least
    ``slack`` digits of evidence.

    >>> from artifact.padic import make_context
    >>> ctx = make_context(5, 3, 0)
    >>> algdep(57, ctx, max_deg=2).poly
    (1, 0, 1)
    """
    x = _as_quad(x, ctx)
    if x.is_zero():
        raise ValueError("cannot recognize an exact zero")
    if x.val < 0:
        # recognize 1/x and reverse: P(x) = 0 iff x^deg P(1/x) = 0
        rec = algdep(x.inverse(), ctx, max_deg, palindromic, slack, allowed, ladder)
        if not rec.recognized:
            return rec
        poly = _normalize(list(reversed(rec.poly)))
        sign, fac = norm_factorization(poly)
        return RecognizedValue(poly, rec.flag, rec.precision, rec.residual, poly, fac, sign, rec.palindromic)
    M = min(ctx.N, x.absprec)
    need = max(M - slack, (M + 1) // 2)
    nm = x.norm() - 1
    norm_one = x.val == 0 and (nm.is_zero() or nm.val >= M)
    in_base = x.components()[1].absprec >= M and x.components()[1].is_zero()
    if palindromic is None:
        palindromic = norm_one
    allowed_set = set(allowed) if allowed is not None else None
    bound = ctx.p ** (M / 2)

    for deg in ladder:
        if deg > max_deg:
            break
        modes = [False]
        if palindromic and deg >= 2 and deg % 2 == 0:
            modes = [True]
        for palin in modes:
            for cand in _candidates(x, deg, palin, ctx, M)[:3]:
                poly, res = _irreducible_part(cand, x, ctx, M)
                if res < need or poly[0] == 0:
                    continue
                h = max(abs(c) for c in poly)
                d = len(poly) - 1
                ev = _evidence(poly, res, ctx.p, norm_one, in_base)
                sign, fac = norm_factorization(poly)
                flag = None
                if ev > 0 and h ** (d + 1) < bound:
                    flag = "a"
                elif allowed_set is not None and ev >= slack and all(l in allowed_set for l, _ in fac):
                    flag = "l"
                if flag is None:
                    continue
                sym = poly == tuple(reversed(poly)) or poly == tuple(-c for c in reversed(poly))
                return RecognizedValue(
                    poly=poly,
                    flag=flag,
                    precision=M,
                    residual=res,
                    field_poly=poly,
                    norm=fac,
                    norm_sign=sign,
                    palindromic=sym,
                )
    return RecognizedValue((), "unrecognized", M)


# ---------------------------------------------------------------------------
# Norms


def norm_factorization(poly: Sequence[int]) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Sign and signed prime exponents of the norm of a root of ``poly``.

    ``poly`` is listed from the constant term upward and must be
    irreducible; the norm is ``(-1)^deg * poly[0] / poly[-1]``.

    >>> norm_factorization((1, 0, 1))
    (1, ())
    >>> norm_factorization((-12, 1))
    (1, ((2, 2), (3, 1)))
    """
    poly = tuple(int(c) for c in poly)
    if len(poly) < 2 or poly[-1] == 0:
        raise ValueError("need a polynomial of positive degree")
    f = flint.fmpz_poly(list(poly))
    if not _is_irreducible(f):
        raise ValueError("polynomial is reducible; recognize at lower degree")
    deg = len(poly) - 1
    nm = Fraction((-1) ** deg * poly[0], poly[-1])
    if nm == 0:
        raise ValueError("root is zero")
    sign = 1 if nm > 0 else -1
    exps: dict[int, int] = {}
    for part, e in ((abs(nm.numerator), 1), (nm.denominator, -1)):
        if part > 1:
            for l, k in flint.fmpz(part).factor():
                exps[int(l)] = exps.get(int(l), 0) + e * int(k)
    return sign, tuple(sorted((l, k) for l, k in exps.items() if k))


def _is_irreducible(f: flint.fmpz_poly) -> bool:
    _, fac = f.factor()
    return len(fac) == 1 and fac[0][1] == 1


# ---------------------------------------------------------------------------
# Support criterion


@dataclass(frozen=True)
class Witness:
    s: int
    n: int
    k: int  # multiplier: s^2 q - n^2 = 4 l p k


def _witnesses_for(s: int, q: int, p: int) -> Iterable[tuple[int, int]]:
    """Pairs (n, s^2 q - n^2) with 0 <= n < s sqrt(q) and 4p | s^2 q - n^2."""
    target = s * s * q
    top = math.isqrt(target)
    if top * top == target:
        top -= 1
    for n in range(top + 1):
        v = target - n * n
        if v % (4 * p) == 0:
            yield n, v


def support_criterion(ell: int, S: Iterable[int], q: int, p: int) -> Witness | None:
    """A witness (s, n) with ``4 ell p | s^2 q - n^2`` and ``|n| < s sqrt(q)``.

    Returns ``None`` after exhausting every admissible n; the search is
    skipped outright when ``4 ell p`` exceeds every ``s^2 q``.
    """
    if ell == p:
        raise ValueError("the criterion is stated for primes different from p")
    S = sorted(set(S))
    if not S or 4 * ell * p > max(S) ** 2 * q:
        return None
    m = 4 * ell * p
    for s in S:
        for n, v in _witnesses_for(s, q, p):
            if v % m == 0:
                return Witness(s, n, v // m)
    return None


def splitting_pattern(data, ell: int) -> tuple[tuple[int, int], ...]:
    """Ramification and residue degrees ``(e, f)`` over Q of the primes of L above ell.

    L is the quadratic extension ``K(sqrt(beta))`` of ``K = Q(i)`` stored in
    an ATR record; the pattern is read off prime by prime of K.
    """
    _, delta, red, _ = data.omega_L
    rx, ry = red.as_ints()
    out = []
    if ell == 2:
        # the prime 1 + i has residue field F_2
        if delta == Gauss(2):
            t = data.omega_L[0]
            c = (t * t - red) * Gauss(Fraction(1, 4))
            tx, ty = t.as_ints()
            cx, cy = c.as_ints()
            t_unit = (tx + ty) % 2 == 1
            c_unit = (cx + cy) % 2 == 1
            if t_unit and c_unit:
                out.append((2, 2))
            elif t_unit:
                out += [(2, 1), (2, 1)]
            else:
                out.append((4, 1))
        else:
            out.append((4, 1))
        return tuple(sorted(out))
    if ell % 4 == 3:
        nrm = (rx * rx + ry * ry) % ell
        if nrm == 0:
            return ((2, 2),)
        if pow(nrm, (ell - 1) // 2, ell) == 1:
            return ((1, 2), (1, 2))
        return ((1, 4),)
    root = _sqrt_minus_one(ell)
    for i_img in (root, ell - root):
        b = (rx + ry * i_img) % ell
        if b == 0:
            out.append((2, 1))
        elif pow(b, (ell - 1) // 2, ell) == 1:
            out += [(1, 1), (1, 1)]
        else:
            out.append((1, 2))
    return tuple(sorted(out))


def _sqrt_minus_one(ell: int) -> int:
    a = 2
    while pow(a, (ell - 1) // 2, ell) != ell - 1:
        a += 1
    return pow(a, (ell - 1) // 4, ell)


@dataclass
class SupportReport:
    q: int
    p: int
    support: tuple[int, ...]
    allowed: tuple[int, ...] = ()
    filtered: tuple[int, ...] = ()
    witnesses: dict = field(default_factory=dict)
    patterns: dict = field(default_factory=dict)
    ramified: tuple[int, ...] = ()

    @property
    def removed(self) -> tuple[int, ...]:
        keep = set(self.filtered)
        return tuple(l for l in self.allowed if l not in keep)

    def to_record(self) -> dict:
        return {
            "q": self.q,
            "p": self.p,
            "support": list(self.support),
            "allowed": list(self.allowed),
            "filtered": list(self.filtered),
            "ramified": list(self.ramified),
            "witnesses": {str(l): [w.s, w.n, w.k] for l, w in sorted(self.witnesses.items())},
        }


def allowed_primes(S: Iterable[int], q: int, p: int, L=None) -> SupportReport:
    """Every prime ell != p passing the support criterion, then the Frobenius filter.

    The filter drops ell when every prime of L above it has residue degree
    one over Q.  The completion of L at a prime over p is the unramified
    quadratic extension of Q_p, and a norm-one value cannot pick up
    valuation at primes whose residue field is too small to see the
    conjugation.  Without ``L`` the filtered list equals the allowed list.
    Primes dividing the relative discriminant are listed in ``ramified``.
    """
    S = tuple(sorted(set(S)))
    rep = SupportReport(q=q, p=p, support=S)
    if not S:
        return rep
    wit: dict[int, Witness] = {}
    for s in S:
        for n, v in _witnesses_for(s, q, p):
            rest = v // (4 * p)
            if rest <= 1:
                continue
            for l, _ in flint.fmpz(rest).factor():
                l = int(l)
                if l == p or l in wit:
                    continue
                wit[l] = Witness(s, n, rest // l)
    rep.allowed = tuple(sorted(wit))
    rep.witnesses = wit
    if L is None:
        rep.filtered = rep.allowed
        return rep
    keep, ram = [], []
    for l in rep.allowed:
        pat = splitting_pattern(L, l)
        rep.patterns[l] = pat
        if any(e > 1 for e, _ in pat):
            ram.append(l)
        if any(f > 1 for _, f in pat):
            keep.append(l)
    rep.filtered = tuple(keep)
    rep.ramified = tuple(ram)
    return rep


# ---------------------------------------------------------------------------
# Fields


def field_of_definition(K_disc: int, chi_disc: int, p: int) -> int:
    """Field of definition of the cocycle attached to (K, chi) at p.

    Fields are named by quadratic discriminants; ``1`` stands for Q and a
    trivial character.  The answer is Q unless chi is non-trivial, K is the
    field cut out by chi and p splits in K, in which case it is that field.

    >>> field_of_definition(-4, -4, 13)
    -4
    >>> field_of_definition(5, -4, 13)
    1
    """
    from .points import kronecker

    if chi_disc == 1:
        return 1
    if K_disc == chi_disc and kronecker(K_disc, p) == 1:
        return chi_disc
    return 1


def _roots(poly: Sequence[int], dps: int) -> list:
    with mpmath.workdps(dps):
        return mpmath.polyroots(list(reversed(poly)), maxsteps=400, extraprec=2 * dps)


def _express(phi, theta, n: int, dps: int) -> list[Fraction] | None:
    """Rational h of degree < n with h(theta) = phi, guessed by lattice reduction."""
    with mpmath.workdps(dps):
        scale = mpmath.mpf(10) ** (dps - 10)
        pw = [mpmath.mpf(1)]
        for _ in range(n - 1):
            pw.append(pw[-1] * theta)
        vals = pw + [phi]
        rows = []
        m = len(vals)
        for k, z in enumerate(vals):
            row = [0] * m + [int(mpmath.nint(scale * mpmath.re(z))), int(mpmath.nint(scale * mpmath.im(z)))]
            row[k] = 1
            rows.append(row)
    red = flint.fmpz_mat(rows).lll()
    best = [int(red[0, j]) for j in range(m)]
    if best[-1] == 0:
        return None
    den = -best[-1]
    return [Fraction(c, den) for c in best[:-1]]


def fields_isomorphic(f: Sequence[int], g: Sequence[int], max_dps: int = 1600) -> bool:
    """Decide whether Q[x]/f and Q[x]/g are the same field.

    Polynomials are given from the constant term upward.  A candidate
    isomorphism ``h`` with ``g(h(x)) = 0 mod f`` is guessed numerically and
    then verified exactly, so a ``True`` answer is a proof.
    """
    fz, gz = [int(c) for c in f], [int(c) for c in g]
    f, g = flint.fmpq_poly(fz), flint.fmpq_poly(gz)
    n = f.degree()
    if n != g.degree() or not _is_irreducible(flint.fmpz_poly(fz)):
        return False
    if _real_roots(fz) != _real_roots(gz):
        return False
    dps = 100
    while dps <= max_dps:
        ths = _roots(fz, dps)
        phs = _roots(gz, dps)
        theta = ths[0]
        for phi in phs:
            h = _express(phi, theta, n, dps)
            if h is None:
                continue
            hp = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in h])
            if (g(hp) % f).is_zero():
                return True
        dps *= 2
    return False


def _real_roots(poly: Sequence[int]) -> int:
    x = sympy.Symbol("x")
    return sympy.Poly(list(reversed(poly)), x).count_roots()


def abelianity_diagnostics(j_poly: Sequence[int], E_poly: Sequence[int] | None = None) -> dict:
    """Degree and ramification data for the extension generated by a recognized value.

    Reports the field discriminant of Q(j) and, when ``E_poly`` is given,
    the relative degree [E(j) : E], the norm of the relative discriminant,
    whether that norm is a power of 2, and whether adjoining i removes the
    remaining ramification.  Field discriminants need PARI (through the
    optional ``cypari`` package); without it the report says so.
    """
    rep: dict = {"available": False}
    j = tuple(int(c) for c in j_poly)
    if len(j) == 2:
        rep.update(available=True, degree=1, disc=1, rel_degree=1, rel_disc_norm=1,
                   unramified_outside_2=True, unramified_over_K=True)
        return rep
    try:
        import cypari
    except ImportError:
        rep["reason"] = "field discriminants need the optional cypari package"
        return rep
    pari = cypari.pari

    def polstr(c):
        return " + ".join(f"({int(a)})*x^{k}" for k, a in enumerate(c))

    J = pari(polstr(j))
    rep["available"] = True
    rep["degree"] = int(pari.poldegree(J))
    rep["field"] = [int(c) for c in reversed(pari.Vec(pari.polredabs(J)))]
    rep["disc"] = int(pari.nfdisc(J))
    if E_poly is None:
        return rep
    E = pari(polstr(E_poly))
    comp = _compositum_containing(pari, E, J)
    dE = int(pari.nfdisc(E))
    dEJ = int(pari.nfdisc(comp))
    rel = int(pari.poldegree(comp)) // int(pari.poldegree(E))
    relnorm = Fraction(abs(dEJ), abs(dE) ** rel)
    rep["rel_degree"] = rel
    rep["rel_disc_norm"] = int(relnorm) if relnorm.denominator == 1 else str(relnorm)
    rep["unramified_outside_2"] = relnorm.denominator == 1 and _is_power_of(int(relnorm), 2)
    K = pari("x^2 + 1")
    EK = _compositum_containing(pari, E, K)
    EKJ = _compositum_containing(pari, EK, J)
    relK = int(pari.poldegree(EKJ)) // int(pari.poldegree(EK))
    rep["unramified_over_K"] = abs(int(pari.nfdisc(EKJ))) == abs(int(pari.nfdisc(EK))) ** relK
    return rep


def _compositum_containing(pari, A, B):
    """The smallest compositum of Q[x]/A and Q[x]/B."""
    comp = pari.polcompositum(A, B)
    best = min(comp, key=lambda c: int(pari.poldegree(c)))
    return pari.polredbest(best)


def _is_power_of(n: int, b: int) -> bool:
    if n < 1:
        return False
    while n % b == 0:
        n //= b
    return n == 1
