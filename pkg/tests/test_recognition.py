import math
from fractions import Fraction
import random

import flint
import pytest

from artifact.padic import make_context, poly_roots
from artifact.points import build_atr_fields
from artifact.recognition import (
    DEFAULT_SLACK,
    abelianity_diagnostics,
    algdep,
    allowed_primes,
    conj_triv,
    field_of_definition,
    fields_isomorphic,
    norm_factorization,
    poly_residual,
    support_criterion,
)


def _need(M, slack=DEFAULT_SLACK):
    return max(M - slack, (M + 1) // 2)


def _synthetic(rng, p, degrees=(1, 2, 4), height=9):
    """A random irreducible integer polynomial with a root simple mod p in Q_{p^2}."""
    while True:
        deg = rng.choice(degrees)
        c = [rng.randint(-height, height) for _ in range(deg)] + [rng.randint(1, height)]
        f = flint.fmpz_poly(c)
        _, fac = f.factor()
        if len(fac) != 1 or fac[0][1] != 1 or c[0] == 0:
            continue
        g = math.gcd(*c)
        c = [x // g for x in c]
        return c


def test_algdep_examples():
    ctx = make_context(5, 3, 0)
    assert algdep(57, ctx, max_deg=2).poly == (1, 0, 1)
    ctx = make_context(13, 20, 0)
    one = algdep(1, ctx)
    assert one.poly == (-1, 1) and one.norm == ()
    with pytest.raises(ValueError):
        algdep(0, ctx)
    # a single digit is no evidence for anything
    assert not algdep(ctx.quad(3, 1), make_context(5, 1, 0)).recognized
    # negative valuation: 1/13 is recognized through its reciprocal
    assert algdep(ctx.quad(Fraction(1, 13)), ctx).poly == (-1, 13)


def test_algdep_synthetic_inputs_respect_residual_bound():
    rng = random.Random(2024)
    ctx = make_context(13, 40, 0)
    hits = tried = 0
    while tried < 100:
        c = _synthetic(rng, 13)
        roots = poly_roots(c, ctx)
        if not roots:
            continue
        tried += 1
        x = rng.choice(roots)
        rec = algdep(x, ctx, max_deg=4)
        if rec.recognized:
            assert poly_residual(rec.poly, x, ctx, 40) >= _need(40)
            hits += rec.poly == tuple(c)
    assert hits >= 95


def test_worked_example_quartic_from_synthetic_root(expected):
    ex = expected["worked_example"]
    P = (ex["d"], ex["a"], ex["b"], ex["a"], ex["d"])
    ctx = make_context(13, 400, 0)
    x = poly_roots(P, ctx)[0]
    assert ((x.norm() - 1).is_zero() or (x.norm() - 1).val >= 400)
    # too tall for the small-height flag; the smooth-norm flag accepts it
    assert algdep(x, ctx, max_deg=4).flag == "unrecognized"
    rec = algdep(x, ctx, max_deg=4, allowed=[])
    assert rec.flag == "l" and rec.poly == P and rec.palindromic and rec.norm == ()
    # at lower precision the same search must refuse rather than invent
    low = make_context(13, 200, 0)
    assert algdep(poly_roots(P, low)[0], low, max_deg=4, allowed=[]).flag == "unrecognized"


def test_norm_factorization():
    assert norm_factorization((-1, 1)) == (1, ())
    assert norm_factorization((1, 0, 1)) == (1, ())
    assert norm_factorization((31**4, 0, 1)) == (1, ((31, 4),))
    assert norm_factorization((1, 0, 0, 0, 6, 0, 0, 0, 1)) == (1, ())
    assert norm_factorization((3, 2)) == (-1, ((2, -1), (3, 1)))
    with pytest.raises(ValueError):
        norm_factorization((1, 2, 1))


def test_conj_triv_parts():
    ctx = make_context(13, 10, 0)
    J = ctx.quad(3, 5)
    triv, conj = conj_triv(J)
    assert triv.in_base_field()
    assert (conj.norm() - 1).is_zero() or (conj.norm() - 1).val >= 10
    triv, conj = conj_triv(ctx.quad(13 * 13, 13))
    assert triv.val == 2 and conj.val == 0
    with pytest.raises(ValueError):
        conj_triv(ctx.quad(0))


def test_support_criterion_examples(expected):
    S, q = (3, 15, 21), 6057
    w = support_criterion(659, S, q, 13)
    assert w is not None and (w.s**2 * q - w.n**2) % (4 * 659 * 13) == 0 and w.n**2 < w.s**2 * q
    assert support_criterion(25447, S, q, 13) is not None
    assert support_criterion(10**7 + 19, S, q, 13) is None
    with pytest.raises(ValueError):
        support_criterion(13, S, q, 13)


def test_allowed_primes_brute_force(expected):
    ex = expected["worked_example"]
    data = build_atr_fields(ex["D"], ex["n"])
    S = (3, 15, 21)
    rep = allowed_primes(S, data.q, 13, data)
    assert set(ex["support"]) <= set(rep.filtered) <= set(rep.allowed)
    for l, w in rep.witnesses.items():
        assert (w.s**2 * data.q - w.n**2) % (4 * l * 13) == 0
    bound = max(S) ** 2 * data.q // (4 * 13)
    allowed = set(rep.allowed)
    for l in range(2, 3000):
        if l == 13 or not flint.fmpz(l).is_prime():
            continue
        brute = any(
            (s * s * data.q - n * n) % (4 * l * 13) == 0
            for s in S
            for n in range(math.isqrt(s * s * data.q - 1) + 1)
        )
        assert brute == (l in allowed), l
    assert max(rep.allowed) <= bound
    assert allowed_primes((), data.q, 13).allowed == ()


def test_field_of_definition():
    assert field_of_definition(-4, 1, 13) == 1
    assert field_of_definition(-4, -4, 13) == -4
    assert field_of_definition(5, -4, 13) == 1
    assert field_of_definition(-4, -4, 7) == 1


def test_fields_isomorphic():
    assert fields_isomorphic([1, 0, 1], [2, 2, 1])
    assert not fields_isomorphic([1, 0, 1], [2, 0, 1])
    assert not fields_isomorphic([1, 0, 1], [1, 0, 0, 1])


def test_abelianity_diagnostics(expected):
    assert abelianity_diagnostics([-1, 1])["unramified_outside_2"]
    E = list(reversed(expected["atr_673_3"]["E"]))
    rep = abelianity_diagnostics(expected["worked_example"]["field"], E)
    assert rep["rel_degree"] == 2 and rep["rel_disc_norm"] == 16
    assert rep["unramified_outside_2"]
    cm = abelianity_diagnostics(expected["small_cm_41"]["field"])
    assert abs(cm["disc"]) == expected["small_cm_41"]["disc"]
