"""Truncated arithmetic in Q_p and its unramified quadratic extension.

Every value is stored as ``p**val * unit`` where the unit is an integer
residue known modulo ``p**prec`` (``prec`` is the *relative* precision).
Elements of the quadratic extension carry a pair of residues ``(a, b)``
standing for ``a + b*omega`` with ``omega**2 = r``, ``r`` the least
quadratic non-residue modulo p.

The hot loops of the cocycle engine work on raw residues for speed; the
classes here are the public, precision-tracking face of the same data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "PrecisionError",
    "NonResidueError",
    "PadicContext",
    "PadicScalar",
    "QuadExtScalar",
    "make_context",
    "hensel_sqrt",
    "poly_roots",
    "moebius_act",
    "valuation",
]


class PrecisionError(ArithmeticError):
    """Raised when a result would silently fall below the working precision."""


class NonResidueError(ValueError):
    """The requested square root lives in the quadratic extension, not in Q_p."""


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _least_nonresidue(p: int) -> int:
    for r in range(2, p):
        if pow(r, (p - 1) // 2, p) == p - 1:
            return r
    raise ValueError(f"no quadratic non-residue modulo {p}")


def _hensel_root_minus_one(p: int, digits: int) -> int:
    root = next(x for x in range(1, (p - 1) // 2 + 1) if (x * x + 1) % p == 0)
    mod = p
    target = p**digits
    while mod < target:
        mod = min(mod * mod, target)
        root = (root - (root * root + 1) * pow(2 * root, -1, mod)) % mod
    return root


@dataclass(frozen=True)
class PadicContext:
    """Prime, precision budget and the fixed embedding of Z[i] into Z_p.

    ``iota`` is the Hensel lift of the root of -1 whose residue lies in
    ``1..(p-1)/2``; the first embedding sends ``i`` to ``iota`` and the
    second sends it to ``-iota``.
    """

    p: int
    N: int
    G: int
    iota: int
    r: int

    @property
    def prec(self) -> int:
        return self.N + self.G

    @property
    def modulus(self) -> int:
        return self.p**self.prec

    def embed(self, x: int, y: int) -> tuple[int, int]:
        """Images of the Gaussian integer x + y*i under both embeddings."""
        m = self.modulus
        return ((x + y * self.iota) % m, (x - y * self.iota) % m)

    def scalar(self, value) -> "PadicScalar":
        return PadicScalar.from_rational(value, self.p, self.prec)

    def quad(self, a, b=0) -> "QuadExtScalar":
        return QuadExtScalar.from_rationals(self, a, b)

    def with_precision(self, N: int, G: int | None = None) -> "PadicContext":
        return make_context(self.p, N, self.G if G is None else G)


def make_context(p: int, N: int, G: int = 10) -> PadicContext:
    """Build the context for prime ``p``, ``N`` digits and ``G`` guard digits.

    >>> make_context(13, 1, 0).iota
    5
    """
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p % 4 != 1:
        raise ValueError(f"p = {p} must be 1 mod 4 so that chi_4(p) = 1 and p splits in Q(i)")
    if N < 1 or G < 0:
        raise ValueError("need N >= 1 and G >= 0")
    return PadicContext(p, N, G, _hensel_root_minus_one(p, N + G), _least_nonresidue(p))


# ---------------------------------------------------------------------------
# Base field


class PadicScalar:
    """``p**val * unit`` with the unit known modulo ``p**prec``.

    The exact zero is the instance with ``unit == 0``; its ``val`` is then
    the absolute precision to which it is known to vanish.
    """

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val: int, unit: int, prec: int):
        self.p, self.val, self.prec = p, val, prec
        self.unit = unit % p**prec if prec > 0 else 0
        if self.unit and self.unit % p == 0:
            raise ValueError("unit part must be prime to p")

    @classmethod
    def from_rational(cls, value, p: int, prec: int) -> "PadicScalar":
        q = Fraction(value)
        if q == 0:
            return cls(p, prec, 0, 0)
        num, den = q.numerator, q.denominator
        vn, vd = valuation(num, p), valuation(den, p)
        num //= p**vn
        den //= p**vd
        mod = p**prec
        return cls(p, vn - vd, num * pow(den, -1, mod), prec)

    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def absprec(self) -> int:
        return self.val if self.is_zero() else self.val + self.prec

    def _make(self, val, unit, prec):
        return PadicScalar(self.p, val, unit, prec)

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        return PadicScalar.from_rational(other, self.p, max(self.prec, 1) + max(self.val, 0))

    def __neg__(self):
        return self._make(self.val, -self.unit, self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        absprec = min(self.absprec, other.absprec)
        if self.is_zero():
            return other._truncate(absprec)
        if other.is_zero():
            return self._truncate(absprec)
        v = min(self.val, other.val)
        mod = self.p ** (absprec - v) if absprec > v else 1
        total = (self.unit * self.p ** (self.val - v) + other.unit * self.p ** (other.val - v)) % mod
        if total == 0:
            return self._make(absprec, 0, 0)
        extra = valuation(total, self.p)
        return self._make(v + extra, total // self.p**extra, absprec - v - extra)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def _truncate(self, absprec):
        if self.is_zero():
            return self._make(min(self.val, absprec), 0, 0)
        if absprec <= self.val:
            return self._make(absprec, 0, 0)
        return self._make(self.val, self.unit, min(self.prec, absprec - self.val))

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            z = self if self.is_zero() else other
            nz = other if self.is_zero() else self
            return self._make(z.val + (nz.val if not nz.is_zero() else z.val), 0, 0)
        prec = min(self.prec, other.prec)
        return self._make(self.val + other.val, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of a p-adic zero")
        return self._make(-self.val, pow(self.unit, -1, self.p**self.prec), self.prec)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if self.is_zero():
            return self if n else self._make(0, 1, self.prec)
        return self._make(self.val * n, pow(self.unit, n, self.p**self.prec), self.prec)

    def __eq__(self, other):
        try:
            d = self - other
        except (TypeError, ValueError):
            return NotImplemented
        return d.is_zero()

    def __hash__(self):
        return hash((self.p, self.val, self.unit))

    def residue(self, digits: int) -> int:
        """Integer representative modulo ``p**digits`` (requires val >= 0)."""
        if self.is_zero():
            return 0
        if self.val < 0:
            raise ValueError("negative valuation has no integral residue")
        return (self.unit * self.p**self.val) % self.p**digits

    def digits(self) -> list[int]:
        """Base-p digits of the unit, least significant first."""
        out, u = [], self.unit
        for _ in range(self.prec):
            out.append(u % self.p)
            u //= self.p
        return out

    def to_record(self) -> dict:
        return {"val": self.val, "digits": ",".join(map(str, self.digits()))}

    @classmethod
    def from_record(cls, rec: dict, p: int) -> "PadicScalar":
        ds = [int(t) for t in rec["digits"].split(",") if t != ""]
        unit = sum(d * p**k for k, d in enumerate(ds))
        return cls(p, rec["val"], unit, len(ds))

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.val})"
        return f"{self.p}^{self.val}*{self.unit} + O({self.p}^{self.absprec})"


def hensel_sqrt(a, ctx: PadicContext) -> PadicScalar:
    """Square root in Q_p on the canonical branch.

    The residue of the unit part of the root is taken in ``1..(p-1)/2``.
    Raises :class:`NonResidueError` when the root is not in Q_p.

    >>> hensel_sqrt(-1, make_context(5, 3, 0)).residue(3)
    57
    """
    x = a if isinstance(a, PadicScalar) else ctx.scalar(a)
    p = ctx.p
    if x.is_zero():
        return PadicScalar(p, x.val // 2, 0, 0)
    if x.val % 2:
        raise NonResidueError("odd valuation: the root is ramified")
    u0 = x.unit % p
    if pow(u0, (p - 1) // 2, p) != 1:
        raise NonResidueError(f"{u0} is not a square modulo {p}")
    root = next(t for t in range(1, (p - 1) // 2 + 1) if (t * t - u0) % p == 0)
    mod = p
    target = p**x.prec
    while mod < target:
        mod = min(mod * mod, target)
        root = (root - (root * root - x.unit) * pow(2 * root, -1, mod)) % mod
    return PadicScalar(p, x.val // 2, root, x.prec)


# ---------------------------------------------------------------------------
# Unramified quadratic extension


class QuadExtScalar:
    """``p**val * (a + b*omega)`` with ``(a, b)`` known modulo ``p**prec``.

    Not both of ``a, b`` are divisible by p unless the value is the zero
    marker (``a == b == 0``), in which case ``val`` is the absolute
    precision of the vanishing.
    """

    __slots__ = ("ctx", "val", "a", "b", "prec")

    def __init__(self, ctx: PadicContext, val: int, a: int, b: int, prec: int):
        self.ctx, self.val, self.prec = ctx, val, prec
        if prec <= 0:
            self.a = self.b = 0
            return
        m = ctx.p**prec
        self.a, self.b = a % m, b % m
        p = ctx.p
        if (self.a or self.b) and self.a % p == 0 and self.b % p == 0:
            raise ValueError("unit part divisible by p; normalize first")

    @classmethod
    def normalized(cls, ctx, val, a, b, prec) -> "QuadExtScalar":
        """Shift common powers of p out of (a, b) before building."""
        p = ctx.p
        m = p**prec if prec > 0 else 1
        a, b = a % m, b % m
        if a == 0 and b == 0:
            return cls(ctx, val + max(prec, 0), 0, 0, 0)
        while a % p == 0 and b % p == 0:
            a //= p
            b //= p
            val += 1
            prec -= 1
        return cls(ctx, val, a, b, prec)

    @classmethod
    def from_rationals(cls, ctx, a, b=0) -> "QuadExtScalar":
        pa, pb = PadicScalar.from_rational(a, ctx.p, ctx.prec), PadicScalar.from_rational(b, ctx.p, ctx.prec)
        return cls.from_pair(ctx, pa, pb)

    @classmethod
    def from_pair(cls, ctx, a: PadicScalar, b: PadicScalar) -> "QuadExtScalar":
        if a.is_zero() and b.is_zero():
            return cls(ctx, min(a.val, b.val), 0, 0, 0)
        vals = [s.val for s in (a, b) if not s.is_zero()]
        v = min(vals)
        absprec = min(a.absprec, b.absprec)
        p = ctx.p
        ua = 0 if a.is_zero() else a.unit * p ** (a.val - v)
        ub = 0 if b.is_zero() else b.unit * p ** (b.val - v)
        return cls.normalized(ctx, v, ua, ub, absprec - v)

    @property
    def p(self):
        return self.ctx.p

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def absprec(self) -> int:
        return self.val if self.is_zero() else self.val + self.prec

    def components(self) -> tuple[PadicScalar, PadicScalar]:
        """The pair (A, B) of base-field elements with self = A + B*omega."""
        p = self.p
        out = []
        for u in (self.a, self.b):
            if u == 0:
                out.append(PadicScalar(p, self.absprec, 0, 0))
            else:
                e = valuation(u, p)
                out.append(PadicScalar(p, self.val + e, u // p**e, self.prec - e))
        return out[0], out[1]

    def in_base_field(self) -> bool:
        return self.b == 0

    def _coerce(self, other) -> "QuadExtScalar":
        if isinstance(other, QuadExtScalar):
            return other
        if isinstance(other, PadicScalar):
            return QuadExtScalar.from_pair(self.ctx, other, PadicScalar(self.p, other.absprec, 0, 0))
        return QuadExtScalar.from_rationals(self.ctx, other)

    def __neg__(self):
        return QuadExtScalar(self.ctx, self.val, -self.a, -self.b, self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        absprec = min(self.absprec, other.absprec)
        if self.is_zero() and other.is_zero():
            return QuadExtScalar(self.ctx, absprec, 0, 0, 0)
        v = min(x.val for x in (self, other) if not x.is_zero())
        p = self.p
        if absprec <= v:
            return QuadExtScalar(self.ctx, absprec, 0, 0, 0)
        sa = self.a * p ** (self.val - v) if not self.is_zero() else 0
        sb = self.b * p ** (self.val - v) if not self.is_zero() else 0
        oa = other.a * p ** (other.val - v) if not other.is_zero() else 0
        ob = other.b * p ** (other.val - v) if not other.is_zero() else 0
        return QuadExtScalar.normalized(self.ctx, v, sa + oa, sb + ob, absprec - v)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            z = self if self.is_zero() else other
            nz = other if self.is_zero() else self
            return QuadExtScalar(self.ctx, z.val + (0 if nz.is_zero() else nz.val), 0, 0, 0)
        prec = min(self.prec, other.prec)
        r = self.ctx.r
        a = self.a * other.a + r * self.b * other.b
        b = self.a * other.b + self.b * other.a
        return QuadExtScalar(self.ctx, self.val + other.val, a, b, prec)

    __rmul__ = __mul__

    def conj(self) -> "QuadExtScalar":
        """Frobenius: a + b*omega -> a - b*omega."""
        return QuadExtScalar(self.ctx, self.val, self.a, -self.b, self.prec)

    def norm(self) -> PadicScalar:
        if self.is_zero():
            return PadicScalar(self.p, 2 * self.val, 0, 0)
        n = self.a * self.a - self.ctx.r * self.b * self.b
        # (a, b) not both divisible by p and r a non-residue, so n is a unit
        return PadicScalar(self.p, 2 * self.val, n, self.prec)

    def inverse(self) -> "QuadExtScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in the quadratic extension")
        m = self.p**self.prec
        ninv = pow((self.a * self.a - self.ctx.r * self.b * self.b) % m, -1, m)
        return QuadExtScalar(self.ctx, -self.val, self.a * ninv, -self.b * ninv, self.prec)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExtScalar(self.ctx, 0, 1, 0, self.prec if not self.is_zero() else self.ctx.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            d = self - other
        except (TypeError, ValueError):
            return NotImplemented
        return d.is_zero()

    def __hash__(self):
        return hash((self.val, self.a, self.b))

    def agrees(self, other, digits: int) -> bool:
        """True when self and other agree modulo ``p**digits`` (absolute)."""
        d = self - other
        if d.is_zero():
            return d.val >= digits
        return d.val >= digits

    def to_record(self) -> dict:
        A, B = self.components()
        return {"a": A.to_record(), "b": B.to_record()}

    @classmethod
    def from_record(cls, ctx, rec: dict) -> "QuadExtScalar":
        A = PadicScalar.from_record(rec["a"], ctx.p)
        B = PadicScalar.from_record(rec["b"], ctx.p)
        return cls.from_pair(ctx, A, B)

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.val})"
        return f"{self.p}^{self.val}*({self.a} + {self.b}*w) + O({self.p}^{self.absprec})"


def _qpoly(coeffs, a, b, r, m):
    """Horner evaluation of an integer polynomial at a + b*omega modulo m."""
    va, vb = 0, 0
    for c in reversed(coeffs):
        va, vb = (va * a + r * vb * b + c) % m, (va * b + vb * a) % m
    return va, vb


def poly_roots(poly, ctx: PadicContext) -> list[QuadExtScalar]:
    """Integral roots in the unramified quadratic extension that are simple modulo p.

    ``poly`` lists integer coefficients from the constant term upward.  Each
    residue root is found by search over the p^2 residues and lifted by
    Newton's method to the full working precision.
    """
    p, r = ctx.p, ctx.r
    coeffs = [int(c) for c in poly]
    deriv = [k * c for k, c in enumerate(coeffs)][1:]
    out = []
    for a0 in range(p):
        for b0 in range(p):
            if _qpoly(coeffs, a0, b0, r, p) != (0, 0):
                continue
            da, db = _qpoly(deriv, a0, b0, r, p)
            if (da * da - r * db * db) % p == 0:
                continue  # multiple root modulo p
            a, b, mod = a0, b0, p
            while mod < ctx.modulus:
                mod = min(mod * mod, ctx.modulus)
                fa, fb = _qpoly(coeffs, a, b, r, mod)
                da, db = _qpoly(deriv, a, b, r, mod)
                ninv = pow((da * da - r * db * db) % mod, -1, mod)
                ia, ib = da * ninv, -db * ninv
                a = (a - (fa * ia + r * fb * ib)) % mod
                b = (b - (fa * ib + fb * ia)) % mod
            out.append(QuadExtScalar.normalized(ctx, 0, a, b, ctx.prec))
    return out


def _embed_entry(entry, ctx: PadicContext, which: int) -> QuadExtScalar:
    """Image of a Gaussian rational (anything with .re/.im or a number) under iota_which."""
    re, im = (entry.re, entry.im) if hasattr(entry, "re") else (Fraction(entry), Fraction(0))
    p, prec = ctx.p, ctx.prec
    sign = 1 if which == 1 else -1
    value = PadicScalar.from_rational(re, p, prec + 10) + PadicScalar.from_rational(
        Fraction(im), p, prec + 10
    ) * PadicScalar(p, 0, sign * ctx.iota, prec)
    return QuadExtScalar.from_pair(ctx, value, PadicScalar(p, value.absprec, 0, 0))


def moebius_act(gamma, tau, ctx: PadicContext):
    """Act on a point of H_p x H_p: iota_1(gamma) on tau_1, iota_2(gamma) on tau_2.

    ``gamma`` is a 2x2 nested sequence of Gaussian rationals (objects with
    ``re``/``im`` attributes, or plain rationals).
    """
    if len(gamma) == 4:
        gamma = ((gamma[0], gamma[1]), (gamma[2], gamma[3]))
    out = []
    guard_floor = ctx.N
    for which, t in ((1, tau[0]), (2, tau[1])):
        (A, B), (C, D) = [[_embed_entry(e, ctx, which) for e in row] for row in gamma]
        num = A * t + B
        den = C * t + D
        if den.is_zero() or den.prec < guard_floor:
            raise PrecisionError("denominator lost precision: point too close to the boundary")
        out.append(num / den)
    return out[0], out[1]
