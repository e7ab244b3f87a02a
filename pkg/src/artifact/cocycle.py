"""Assembly and evaluation of the cocycles Phi_{D,v} and J_D.

For a divisor D = sum n_i (d_i) the finite products

    Phi_{D,v}(r, s)(tau) = prod_i prod_{M in Sigma_{d_i,v}(r,s)} F_M(tau)^(n_i chi_4(M) (Delta_M . (r,s)))

are evaluated by splitting (r, s) into Gamma_0(2)-translates of the two base
pairs.  Each translate gamma(base) only needs the base enumeration
Sigma_{d,v}(0, oo), because

    F_{gamma M}(tau) = F_M(gamma^{-1} tau) j(iota_1 gamma^{-1}, tau_1) j(iota_2 gamma^{-1}, tau_2).

Three families of matrices are supported:

``"full"``
    every integral M with q(M) = d p^v,
``"primitive"``
    the M that are not p times an integral matrix,
``"iwahori"``
    the M whose lower-left entry c is prime to p.

The last one is only stable under Gamma_0(2p), but it is the family on
which the degree-p^2 operator ``up_square`` propagates exactly from one
level to the next.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .padic import PadicContext, PrecisionError, QuadExtScalar, moebius_act, _embed_entry
from .paths import (
    COSET_REPS,
    Cusp,
    PathChain,
    base_pair_decompose,
)
from .quadspace import DivisorSpec, Gauss, mat_inv, mat_mul, sigma0_array, to_gauss_matrix

__all__ = [
    "sigma4",
    "NewformTable",
    "ingest_newforms",
    "parse_newforms",
    "DivisorReport",
    "validate_divisor",
    "weight",
    "SigmaCache",
    "phi_eval_direct",
    "phi_eval_path",
    "up_square",
    "JResult",
    "j_eval",
    "j_eval_odd",
    "FAMILIES",
]

FAMILIES = ("full", "primitive", "iwahori")


def sigma4(n: int) -> int:
    """Sum of the divisors of n that are not divisible by 4.

    >>> sigma4(6), sigma4(24), sigma4(21)
    (12, 12, 32)
    """
    if n < 1:
        raise ValueError("sigma4 needs n >= 1")
    total = 0
    for e in range(1, math.isqrt(n) + 1):
        if n % e == 0:
            for f in {e, n // e}:
                if f % 4:
                    total += f
    return total


# ---------------------------------------------------------------------------
# Newform data


@dataclass
class NewformTable:
    level: int
    forms: list[tuple[str, dict[int, tuple[int, ...]], tuple[int, ...] | None]] = field(default_factory=list)
    n_max: int = 0

    def coefficient(self, label: str, n: int) -> tuple[int, ...]:
        for lab, an, _ in self.forms:
            if lab == label:
                if n not in an:
                    raise KeyError(f"a_{n} missing for {label}")
                return an[n]
        raise KeyError(label)


_ROW = re.compile(r"^level=(\d+)\s+label=(\S+)\s+(?:field=(\S+)\s+)?an=(\S*)\s*(?:field=(\S+))?\s*$")


def _parse_coeff(tok: str) -> tuple[int, ...]:
    tok = tok.strip()
    if tok.startswith("["):
        if not tok.endswith("]"):
            raise ValueError(f"malformed vector {tok!r}")
        return tuple(int(t) for t in tok[1:-1].split(";") if t != "")
    return (int(tok),)


def _parse_field(tok: str | None) -> tuple[int, ...] | None:
    if not tok:
        return None
    import sympy

    x = sympy.Symbol("x")
    return tuple(int(c) for c in sympy.Poly(sympy.sympify(tok.replace("^", "**")), x).all_coeffs())


def parse_newforms(text: str, p: int | None = None) -> NewformTable:
    """Parse newform records ``level=<int> label=<str> an=<n:value,...>``."""
    table: NewformTable | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _ROW.match(line)
        if not m:
            raise ValueError(f"line {lineno}: malformed newform record")
        level, label, f1, an_tok, f2 = m.groups()
        level = int(level)
        if table is None:
            table = NewformTable(level)
        elif table.level != level:
            raise ValueError(f"line {lineno}: mixed levels {table.level} and {level}")
        an: dict[int, tuple[int, ...]] = {}
        for item in filter(None, an_tok.split(",")):
            if ":" not in item:
                raise ValueError(f"line {lineno}: coefficient {item!r} lacks n:")
            k, v = item.split(":", 1)
            an[int(k)] = _parse_coeff(v)
        fld = _parse_field(f1 or f2)
        if fld is None and any(len(v) > 1 for v in an.values()):
            raise ValueError(f"line {lineno}: vector coefficients need a field= attribute")
        table.forms.append((label, an, fld))
    if table is None:
        if p is None:
            raise ValueError("empty newform file and no p to infer the level")
        table = NewformTable(4 * p)
    if p is not None and table.level != 4 * p:
        raise ValueError(f"level {table.level} does not equal 4p = {4 * p}")
    table.n_max = min((max(an) if an else 0) for _, an, _ in table.forms) if table.forms else 0
    return table


def ingest_newforms(path, p: int | None = None) -> NewformTable:
    with open(path, encoding="utf-8") as fh:
        return parse_newforms(fh.read(), p)


# ---------------------------------------------------------------------------
# Divisor conditions


@dataclass
class DivisorReport:
    cond1: tuple[int, int]
    cond2: dict[str, tuple[int, ...]]
    weights_odd: tuple[int, int] | None = None

    @property
    def passed(self) -> bool:
        return self.cond1 == (0, 0) and all(not any(r) for r in self.cond2.values())


def validate_divisor(D: DivisorSpec, forms: NewformTable | None, p: int) -> DivisorReport:
    """Residuals of the weight conditions and of the newform condition."""
    D.validate_against(p)
    r1 = sum(n * sigma4(d) for d, n in D)
    r2 = sum((-1) ** d * n * sigma4(d) for d, n in D)
    cond2: dict[str, tuple[int, ...]] = {}
    if forms is not None:
        if forms.level != 4 * p:
            raise ValueError(f"newform level {forms.level} is not 4p = {4 * p}")
        if not forms.forms:
            warnings.warn("no newforms supplied: the newform condition holds vacuously", stacklevel=2)
        for label, an, _ in forms.forms:
            res: list[int] = []
            for d, n in D:
                if d not in an:
                    raise KeyError(f"a_{d} missing for newform {label}")
                vec = an[d]
                if len(res) < len(vec):
                    res.extend([0] * (len(vec) - len(res)))
                for k, c in enumerate(vec):
                    res[k] += n * c
            cond2[label] = tuple(res)
    rep = DivisorReport((r1, r2), cond2)
    if D.parity == "odd":
        rep.weights_odd = (
            sum(n * sigma4(d * p) for d, n in D),
            sum((-1) ** d * n * sigma4(d * p) for d, n in D),
        )
    return rep


def weight(d: int, v: int, chain: PathChain, p: int) -> int:
    """Sum of the exponents chi_4(M) (Delta_M . chain) over Sigma_{d,v}.

    Intersection numbers are invariant under the action, so a term
    sign * gamma(base) contributes sign * sum chi_4(g M0) sign(c(M0)) over
    M0 in Sigma_{d,v}(0, oo), with g = gamma (times g_3 for the second base
    pair).  A weight is a pure count, so d need not be prime to p here.
    """
    rows = sigma0_array(d, v, p, require_coprime=False)
    if not rows.shape[0]:
        return 0
    sgn = np.sign(rows[:, 3])
    total = 0
    for s, gamma, base in chain.terms:
        g = gamma if base == 0 else mat_mul(gamma, _G3)
        total += s * int(np.dot(_chi4_array(_c_exact(rows, g), p), sgn))
    return total


def _c_exact(rows: np.ndarray, g) -> np.ndarray:
    """Lower-left entries of g*M as exact integers (object arrays when large)."""
    big = max(abs(int(t)) for e in to_gauss_matrix(g) for t in (e.re, e.im))
    arr = rows if big**2 * int(np.abs(rows).max()) < 2**58 else rows.astype(object)
    _, _, z, t = to_gauss_matrix(g)
    zr, zi, tr, ti = int(z.re), int(z.im), int(t.re), int(t.im)
    x, y, b, c = (arr[:, k] for k in range(4))
    return (tr * tr + ti * ti) * c + (zr * zr + zi * zi) * b + 2 * ((zr * tr + zi * ti) * x - (zi * tr - zr * ti) * y)


def _chi4_array(c: np.ndarray, p: int) -> np.ndarray:
    """chi_4 of the prime-to-p part of each entry (0 for even or zero entries)."""
    c = c.copy()
    mask = (c % p == 0) & (c != 0)
    while mask.any():
        c[mask] //= p
        mask = (c % p == 0) & (c != 0)
    table = np.array([0, 1, 0, -1], dtype=np.int64)
    return table[(c % 4).astype(np.int64)]


# ---------------------------------------------------------------------------
# Sigma caches


class SigmaCache:
    """Memoized Sigma_{d,v}(0, oo) arrays, optionally backed by a directory."""

    def __init__(self, p: int, directory=None):
        self.p = p
        self.directory = directory
        self._mem: dict[tuple[int, int], np.ndarray] = {}

    def get(self, d: int, v: int) -> np.ndarray:
        key = (d, v)
        if key not in self._mem:
            arr = None
            if self.directory is not None:
                from .io import load_sigma_cache

                arr = load_sigma_cache(self.directory, self.p, d, v)
            if arr is None:
                arr = sigma0_array(d, v, self.p)
                if self.directory is not None:
                    from .io import save_sigma_cache

                    save_sigma_cache(self.directory, self.p, d, v, arr)
            self._mem[key] = arr
        return self._mem[key]

    def family(self, d: int, v: int, family: str) -> np.ndarray:
        arr = self.get(d, v)
        p = self.p
        if family == "full":
            return arr
        if family == "primitive":
            keep = np.any(arr % p != 0, axis=1)
            return arr[keep]
        if family == "iwahori":
            # p must not divide c (the filter is applied after translation)
            return arr
        raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Vectorized evaluation kernel


def _dtype_for(P: int, r: int):
    # products of two residues plus r times another must fit in int64
    return np.int64 if (r + 3) * P * P < 2**63 else object


def _split_point(t: QuadExtScalar, K: int) -> tuple[int, int, int, int]:
    """t = p^{-k} (u + v omega) with u, v integers mod p^K; returns (k, u, v, absprec)."""
    p = t.ctx.p
    if t.is_zero():
        raise PrecisionError("point has lost all precision")
    k = max(0, -t.val)
    shift = t.val + k
    mod = p**K
    return k, (t.a * p**shift) % mod, (t.b * p**shift) % mod, t.prec + shift


def _prod_tree(a: np.ndarray, b: np.ndarray, P: int, r: int) -> tuple[int, int]:
    """Product of the elements a + b omega modulo P."""
    if len(a) == 0:
        return 1, 0
    while len(a) > 1:
        if len(a) % 2:
            a = np.concatenate([a, np.ones(1, dtype=a.dtype)])
            b = np.concatenate([b, np.zeros(1, dtype=b.dtype)])
        a0, a1, b0, b1 = a[0::2], a[1::2], b[0::2], b[1::2]
        na = (a0 * a1 % P + r * (b0 * b1 % P)) % P
        nb = (a0 * b1 % P + b0 * a1 % P) % P
        a, b = na, nb
    return int(a[0]), int(b[0])


@dataclass
class _Rows:
    """Rows of a base set prepared for evaluation: entries mod P and exponents."""

    x: np.ndarray
    y: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray  # integer exponents (already multiplied by n_i)


def _c_exact_mod(rows: np.ndarray, g, m: int) -> np.ndarray:
    """Lower-left entry of g*M modulo m, computed with integer arithmetic.

    c' = |t|^2 c + |z|^2 b + 2 Re(z conj(t) alpha) for g = (., .; z, t).
    """
    _, _, z, t = to_gauss_matrix(g)
    zr, zi = int(z.re), int(z.im)
    tr, ti = int(t.re), int(t.im)
    x, y, b, c = (rows[:, k] % m for k in range(4))
    nt = (tr * tr + ti * ti) % m
    nz = (zr * zr + zi * zi) % m
    # w = z conj(t) = (zr tr + zi ti) + (zi tr - zr ti) i ; Re(w alpha) = wr x - wi y
    wr = (zr * tr + zi * ti) % m
    wi = (zi * tr - zr * ti) % m
    return (nt * c + nz * b + 2 * (wr * x - wi * y)) % m


def _eval_translated(
    rows: np.ndarray,
    exps: np.ndarray,
    g,
    tau: tuple[QuadExtScalar, QuadExtScalar],
    ctx: PadicContext,
    family: str,
    monic: bool,
) -> tuple[QuadExtScalar, int]:
    """prod over rows of F_{g*M}(tau)^{e}, computed as F_M(g^{-1} tau) times automorphy.

    Returns the value and the total exponent actually used (after filtering).
    """
    p, r = ctx.p, ctx.r
    if len(rows) == 0:
        return QuadExtScalar(ctx, 0, 1, 0, ctx.prec), 0
    # filters and characters need c(gM) exactly modulo 4 and p
    c4 = _c_exact_mod(rows, g, 4)
    chi = np.where(c4 == 1, 1, np.where(c4 == 3, -1, 0)).astype(np.int64)
    cp = _c_exact_mod(rows, g, p)
    # chi_4 is read on the prime-to-p part; p = 1 mod 4 so the residue mod 4
    # of c equals that of its prime-to-p part as long as c is odd.
    e = exps * chi
    keep = e != 0
    if family == "iwahori":
        keep &= cp != 0
    rows, e = rows[keep], e[keep]
    W = int(e.sum())
    ginv = mat_inv(g)
    sigma = moebius_act(ginv, tau, ctx)
    val, a, b, prec = _eval_rows(rows, e, sigma, ctx)
    out = QuadExtScalar.normalized(ctx, val, a, b, prec) if prec > 0 else None
    if out is None:
        raise PrecisionError("no precision left in the product")
    if W:
        # automorphy: F_{gM}(tau) = F_M(g^{-1} tau) j(iota_1 g^{-1}, tau_1) j(iota_2 g^{-1}, tau_2)
        A, B, C, D = to_gauss_matrix(ginv)
        jf = None
        for which, t in ((1, tau[0]), (2, tau[1])):
            Ce, De = _embed_entry(C, ctx, which), _embed_entry(D, ctx, which)
            j = Ce * t + De
            jf = j if jf is None else jf * j
        out = out * jf**W
    if monic and len(rows):
        # F_M / c(gM): divide by the rational constant prod c(gM)^e
        P = p ** (ctx.prec + 2)
        cvals = _c_exact_mod(rows.astype(object), g, P).tolist()
        num, den = 1, 1
        for cv, ev in zip(cvals, e.tolist()):
            if ev > 0:
                num = num * pow(int(cv), ev, P) % P
            else:
                den = den * pow(int(cv), -ev, P) % P
        out = out * ctx.quad(Fraction(den, num))
    return out, W


def _eval_rows(rows: np.ndarray, e: np.ndarray, sigma, ctx: PadicContext) -> tuple[int, int, int, int]:
    """prod F_M(sigma)^{e_M} over integral rows M, as (val, a, b, relprec)."""
    p, r = ctx.p, ctx.r
    K = ctx.prec
    k1, u1, v1, pr1 = _split_point(sigma[0], K)
    k2, u2, v2, pr2 = _split_point(sigma[1], K)
    Keff = min(K, pr1, pr2)
    if Keff <= 0:
        raise PrecisionError("point has no precision left")
    P = p**Keff
    dt = _dtype_for(P, r)
    x, y, b, c = (rows[:, k].astype(dt) for k in range(4))
    io = ctx.iota % P
    pk1, pk2 = p**k1 % P, p**k2 % P
    a1 = (x + io * y) % P * pk1 % P
    a2 = (x - io * y) % P * pk2 % P
    T12a = (u1 * u2 + r * v1 * v2) % P
    T12b = (u1 * v2 + u2 * v1) % P
    S = p ** (k1 + k2) % P
    Fa = (c % P * T12a % P - a2 * (u1 % P) % P - a1 * (u2 % P) % P + b % P * S) % P
    Fb = (c % P * T12b % P - a2 * (v1 % P) % P - a1 * (v2 % P) % P) % P
    # valuations
    vals = np.zeros(len(Fa), dtype=np.int64)
    zero = (Fa == 0) & (Fb == 0)
    if np.any(zero):
        raise PrecisionError("tau is too close to the divisor of some F_M")
    mask = (Fa % p == 0) & (Fb % p == 0)
    while np.any(mask):
        Fa = np.where(mask, Fa // p, Fa)
        Fb = np.where(mask, Fb // p, Fb)
        vals += mask
        mask = (Fa % p == 0) & (Fb % p == 0)
    vmax = int(vals[e != 0].max()) if np.any(e != 0) else 0
    total_val = int((vals * e).sum()) - (k1 + k2) * int(e.sum())
    prec = Keff - vmax
    if prec <= 0:
        raise PrecisionError("F_M values too divisible by p for the working precision")
    # product with exponents, grouped by exponent value
    num_a, num_b = 1, 0
    den_a, den_b = 1, 0
    for ev in np.unique(e):
        ev = int(ev)
        if ev == 0:
            continue
        sel = e == ev
        pa, pb = _prod_tree(Fa[sel], Fb[sel], P, r)
        qa, qb = _pow_quad(pa, pb, abs(ev), P, r)
        if ev > 0:
            num_a, num_b = (num_a * qa + r * num_b * qb) % P, (num_a * qb + num_b * qa) % P
        else:
            den_a, den_b = (den_a * qa + r * den_b * qb) % P, (den_a * qb + den_b * qa) % P
    nrm = (den_a * den_a - r * den_b * den_b) % P
    inv = pow(nrm, -1, P)
    ia, ib = den_a * inv % P, -den_b * inv % P
    ra, rb = (num_a * ia + r * num_b * ib) % P, (num_a * ib + num_b * ia) % P
    return total_val, ra, rb, prec


def _pow_quad(a: int, b: int, n: int, P: int, r: int) -> tuple[int, int]:
    ra, rb = 1, 0
    while n:
        if n & 1:
            ra, rb = (ra * a + r * rb * b) % P, (ra * b + rb * a) % P
        a, b = (a * a + r * b * b) % P, (2 * a * b) % P
        n >>= 1
    return ra, rb


# ---------------------------------------------------------------------------
# Phi and J


_G3 = COSET_REPS[2]


def _base_rows(D: DivisorSpec, v: int, cache: SigmaCache, family: str) -> tuple[np.ndarray, np.ndarray]:
    """Stacked rows of Sigma_{d_i,v}(0, oo) with exponents n_i sign(c)."""
    arrs, exps = [], []
    for d, n in D:
        arr = cache.family(d, v, family)
        arrs.append(arr)
        exps.append(n * np.sign(arr[:, 3]).astype(np.int64))
    if not arrs:
        return np.zeros((0, 4), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(arrs), np.concatenate(exps)


def phi_eval_direct(
    D: DivisorSpec,
    v: int,
    chain: PathChain,
    tau,
    ctx: PadicContext,
    family: str = "full",
    monic: bool = False,
    cache: SigmaCache | None = None,
) -> QuadExtScalar:
    """Phi_{D,v}(chain)(tau) as a finite product over the chosen family."""
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    cache = cache or SigmaCache(ctx.p)
    rows, exps = _base_rows(D, v, cache, family)
    result = QuadExtScalar(ctx, 0, 1, 0, ctx.prec)
    for sign, gamma, base in chain.terms:
        g = gamma if base == 0 else mat_mul(gamma, _G3)
        val, _ = _eval_translated(rows, exps, g, tau, ctx, family, monic)
        result = result * (val if sign > 0 else val.inverse())
    return result


def phi_eval_path(D, v, r, s, tau, ctx, **kw) -> QuadExtScalar:
    return phi_eval_direct(D, v, base_pair_decompose(r, s), tau, ctx, **kw)


def _delta(a: Gauss, p: int) -> tuple:
    return to_gauss_matrix(((1, a), (0, p)))


def up_square(
    evaluator: Callable[[Cusp, Cusp, tuple], QuadExtScalar],
    r,
    s,
    tau,
    ctx: PadicContext,
) -> QuadExtScalar:
    """(U Phi)(r, s)(tau) = prod_a Phi(delta_a r, delta_a s)(delta_a tau), delta_a = (1, a; 0, p).

    ``a`` runs over the transversal x + y i, 0 <= x, y < p, of Z[i]/p.
    The evaluator takes two cusps and a point.
    """
    p = ctx.p
    r, s = Cusp.of(r), Cusp.of(s)
    out = QuadExtScalar(ctx, 0, 1, 0, ctx.prec)
    for x in range(p):
        for y in range(p):
            dl = _delta(Gauss(x, y), p)
            t = moebius_act(dl, tau, ctx)
            out = out * evaluator(r.act(dl), s.act(dl), t)
    return out


@dataclass
class JResult:
    value: QuadExtScalar
    iterations: int
    precision: int
    converged: bool
    family: str
    factors: list = field(default_factory=list)


def _levels(parity: str, start: int) -> Iterable[int]:
    v = start
    while True:
        yield v
        v += 2


def j_eval(
    D: DivisorSpec,
    chain: PathChain,
    tau,
    ctx: PadicContext,
    target: int | None = None,
    family: str = "iwahori",
    max_level: int | None = None,
    cache: SigmaCache | None = None,
) -> JResult:
    """Truncated product of Phi over increasing levels until the factor is 1 mod p^target.

    Even parity uses levels 0, 2, 4, ...; odd parity uses 1, 3, 5, ...  The
    level-0 (or level-1) term is always the full set; higher levels use
    ``family``.  The default ``"iwahori"`` makes level ``start + 2k`` equal to
    the k-th iterate of ``up_square`` applied to level ``start + 2``, which is
    the truncation of the overconvergent product.
    """
    target = ctx.N if target is None else target
    cache = cache or SigmaCache(ctx.p)
    start = 0 if D.parity == "even" else 1
    cap = 4 * target if max_level is None else max_level
    if not chain.terms:
        one = QuadExtScalar(ctx, 0, 1, 0, ctx.prec)
        return JResult(one, 0, ctx.prec, True, family)
    value = phi_eval_direct(D, start, chain, tau, ctx, "full", cache=cache)
    factors = [value]
    it = 0
    converged = False
    achieved = 0
    for v in _levels(D.parity, start + 2):
        if v > cap:
            break
        it += 1
        fac = phi_eval_direct(
            D, v, chain, tau, ctx, family, monic=(family == "iwahori"), cache=cache
        )
        factors.append(fac)
        value = value * fac
        d = fac - 1
        achieved = d.val if not d.is_zero() else d.val
        if achieved >= target:
            converged = True
            break
    rel = 0 if value.is_zero() else value.prec
    return JResult(value, it, min(achieved, rel), converged, family, factors)


def j_eval_odd(D: DivisorSpec, chain: PathChain, tau, ctx: PadicContext, **kw) -> JResult:
    odd = DivisorSpec(D.terms, "odd")
    return j_eval(odd, chain, tau, ctx, **kw)
