import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.padic import (
    NonResidueError,
    PadicScalar,
    QuadExtScalar,
    hensel_sqrt,
    make_context,
    moebius_act,
)
from artifact.quadspace import Gauss


@pytest.mark.parametrize("p,iota", [(5, 2), (13, 5), (17, 4)])
def test_context_root_of_minus_one(p, iota, expected):
    ctx = make_context(p, 1, 0)
    assert ctx.iota == iota == expected["iota"][str(p)]
    big = make_context(p, 30, 5)
    assert (big.iota**2 + 1) % big.modulus == 0
    assert 1 <= big.iota % p <= (p - 1) // 2


@pytest.mark.parametrize("p", [3, 7, 11, 4])
def test_context_rejects_bad_primes(p):
    with pytest.raises(ValueError):
        make_context(p, 3)


def test_hensel_sqrt_examples(expected):
    ctx = make_context(5, 3, 0)
    r = hensel_sqrt(ctx.scalar(-1), ctx)
    assert r.residue(3) == expected["hensel_minus_one_p5_N3"]
    assert hensel_sqrt(ctx.scalar(4), ctx).residue(3) == 2
    with pytest.raises(NonResidueError):
        hensel_sqrt(ctx.scalar(2), ctx)


def _rand_unit(ctx, rng):
    m = ctx.modulus
    while True:
        a, b = rng.randrange(m), rng.randrange(m)
        if a % ctx.p or b % ctx.p:
            return QuadExtScalar(ctx, 0, a, b, ctx.prec)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_norm_is_multiplicative(seed):
    ctx = make_context(13, 5, 2)
    rng = random.Random(seed)
    x, y = _rand_unit(ctx, rng), _rand_unit(ctx, rng)
    assert (x * y).norm() == x.norm() * y.norm()
    assert x.conj().conj() == x
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x + y).conj() == x.conj() + y.conj()
    assert (x * x.inverse() - 1).val >= ctx.prec


def test_conj_of_base_field_is_identity():
    ctx = make_context(5, 6, 0)
    a = ctx.quad(17)
    assert a.conj() == a
    x = QuadExtScalar(ctx, 0, 3, 4, ctx.prec)
    A, B = x.components()
    assert x.norm() == A * A - B * B * ctx.r


def test_record_round_trip():
    ctx = make_context(13, 8, 2)
    x = QuadExtScalar(ctx, 2, 1234, 99, ctx.prec - 2)
    assert QuadExtScalar.from_record(ctx, x.to_record()) == x


def _rand_tau(ctx, rng):
    m = ctx.modulus
    return (QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec), QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec))


def _rand_gamma(rng):
    while True:
        a, b, c = (Gauss(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(3))
        if a.norm() == 0:
            continue
        d = (Gauss(1) + b * c) / a
        if d.is_integral():
            return (a, b, c, d)


def test_moebius_identity_and_translation():
    ctx = make_context(5, 8, 4)
    rng = random.Random(1)
    tau = _rand_tau(ctx, rng)
    one, zero = Gauss(1), Gauss(0)
    t = moebius_act((one, zero, zero, one), tau, ctx)
    assert t[0] == tau[0] and t[1] == tau[1]
    s = moebius_act((one, one, zero, one), tau, ctx)
    assert s[0] == tau[0] + 1 and s[1] == tau[1] + 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_moebius_is_a_left_action(seed):
    from artifact.quadspace import mat_mul

    ctx = make_context(5, 8, 6)
    rng = random.Random(seed)
    g, h = _rand_gamma(rng), _rand_gamma(rng)
    tau = _rand_tau(ctx, rng)
    lhs = moebius_act(mat_mul(g, h), tau, ctx)
    rhs = moebius_act(g, moebius_act(h, tau, ctx), ctx)
    for a, b in zip(lhs, rhs):
        assert a.agrees(b, ctx.N)


def test_padic_scalar_arithmetic():
    s = PadicScalar.from_rational(10, 5, 6)
    assert s.val == 1 and s.unit % 5 == 2
    assert (s * s.inverse()) == PadicScalar.from_rational(1, 5, 6)
    with pytest.raises(ZeroDivisionError):
        PadicScalar.from_rational(0, 5, 6).inverse()
