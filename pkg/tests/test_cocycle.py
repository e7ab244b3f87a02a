import random
from fractions import Fraction

import numpy as np
import pytest

from artifact.cocycle import (
    SigmaCache,
    j_eval,
    parse_newforms,
    phi_eval_direct,
    phi_eval_path,
    sigma4,
    up_square,
    validate_divisor,
    weight,
)
from artifact.io import data_path, parse_divisor_label
from artifact.padic import QuadExtScalar, make_context, moebius_act
from artifact.paths import COSET_REPS, INFINITY, ZERO, Cusp, PathChain, base_pair_decompose, identity
from artifact.quadspace import DivisorSpec, Gauss, to_gauss_matrix
from artifact.cocycle import ingest_newforms

HALF = Cusp.of((Fraction(1, 2), Fraction(1, 2)))
D_EVEN = DivisorSpec([(6, 1), (24, -1)], "even")


def _tau(ctx, rng):
    m = ctx.modulus
    return (
        QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec),
        QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec),
    )


def _close(a, b, digits):
    return (a - b).is_zero() or (a - b).val >= digits


def test_sigma4_values():
    assert [sigma4(n) for n in (1, 2, 3, 4, 6, 8, 24)] == [1, 3, 4, 3, 12, 3, 12]
    with pytest.raises(ValueError):
        sigma4(0)


@pytest.mark.parametrize("d", [3, 6, 7, 14, 21])
def test_weight_is_four_sigma(d):
    w = weight(d, 0, PathChain(((1, identity(), 0),)), 13)
    assert w == 4 * sigma4(d)


@pytest.mark.parametrize("d,r,s", [(3, "0", "oo"), (6, "1/3", "2+i"), (7, (Fraction(1, 2), Fraction(1, 2)), "oo")])
def test_weight_matches_path_enumeration(d, r, s):
    from artifact.paths import enumerate_sigma_path

    chain = base_pair_decompose(_cusp(r), _cusp(s))
    assert weight(d, 0, chain, 13) == sum(e for _, e in enumerate_sigma_path(d, 0, chain, 13))


def _cusp(v):
    if v == "oo":
        return INFINITY
    if isinstance(v, tuple):
        return Cusp.of(v)
    z = complex(v.replace("i", "j")) if "i" in v else None
    if z is not None:
        return Cusp.of((Fraction(int(z.real)), Fraction(int(z.imag))))
    return Cusp.of((Fraction(v), Fraction(0)))


def test_newform_parsing_errors():
    good = "level=20 label=20.2.a.a an=1:1,2:0,3:-2\n"
    t = parse_newforms(good, 5)
    assert t.coefficient("20.2.a.a", 3) == (-2,)
    with pytest.raises(ValueError):
        parse_newforms("level=20 label=x an=1:1,2\n", 5)
    with pytest.raises(ValueError):
        parse_newforms(good, 7)
    with pytest.raises(ValueError):
        parse_newforms("level=68 label=x an=1:[1;0]\n", 17)
    v = parse_newforms("level=68 label=x field=x^2-3 an=1:[1;0],2:[0;1]\n", 17)
    assert v.forms[0][2] == (1, 0, -3)


@pytest.mark.parametrize(
    "label,p,ok",
    [("6_24_even", 5, True), ("3·3·15_21_odd", 13, True), ("6·6_14_odd", 17, True), ("3_6_even", 5, False)],
)
def test_validate_divisor_bundled(label, p, ok):
    forms = ingest_newforms(data_path(f"newforms_{4 * p}.txt"), p)
    rep = validate_divisor(parse_divisor_label(label), forms, p)
    assert rep.passed is ok


def test_validate_divisor_missing_coefficient():
    forms = parse_newforms("level=20 label=f an=1:1,6:2\n", 5)
    with pytest.raises(KeyError):
        validate_divisor(D_EVEN, forms, 5)


@pytest.fixture(scope="module")
def setting():
    ctx = make_context(5, 6, 4)
    return ctx, SigmaCache(5), random.Random(11)


def test_antisymmetry_and_three_terms(setting):
    ctx, cache, rng = setting
    tau = _tau(ctx, rng)
    r, s, t = ZERO, INFINITY, HALF
    kw = dict(family="full", cache=cache)
    rs = phi_eval_path(D_EVEN, 0, r, s, tau, ctx, **kw)
    sr = phi_eval_path(D_EVEN, 0, s, r, tau, ctx, **kw)
    st = phi_eval_path(D_EVEN, 0, s, t, tau, ctx, **kw)
    rt = phi_eval_path(D_EVEN, 0, r, t, tau, ctx, **kw)
    assert _close(rs * sr, QuadExtScalar(ctx, 0, 1, 0, ctx.prec), ctx.N)
    assert _close(rs * st, rt, ctx.N)


def test_gamma0_2_equivariance(setting):
    ctx, cache, rng = setting
    i = Gauss(0, 1)
    g = to_gauss_matrix(((1, i), (2, 1 + 2 * i)))
    tau = _tau(ctx, rng)
    gt = moebius_act(g, tau, ctx)
    lhs = phi_eval_path(D_EVEN, 0, ZERO.act(g), INFINITY.act(g), gt, ctx, family="full", cache=cache)
    rhs = phi_eval_path(D_EVEN, 0, ZERO, INFINITY, tau, ctx, family="full", cache=cache)
    assert _close(lhs, rhs, ctx.N)


def test_up_square_propagates_on_iwahori_family(setting):
    ctx, cache, rng = setting
    tau = _tau(ctx, rng)

    def ev(a, b, t):
        return phi_eval_direct(D_EVEN, 2, base_pair_decompose(a, b), t, ctx, "iwahori", True, cache)

    lifted = up_square(ev, ZERO, INFINITY, tau, ctx)
    direct = phi_eval_direct(D_EVEN, 4, base_pair_decompose(ZERO, INFINITY), tau, ctx, "iwahori", True, cache)
    assert _close(lifted, direct, ctx.N)


def test_j_eval_shape(setting):
    ctx, cache, rng = setting
    tau = _tau(ctx, rng)
    res = j_eval(D_EVEN, base_pair_decompose(ZERO, INFINITY), tau, ctx, target=4, max_level=4, cache=cache)
    assert res.family == "iwahori" and 1 <= res.iterations <= 2
    assert len(res.factors) == res.iterations + 1
    assert all(f.val == 0 for f in res.factors[1:])
    empty = j_eval(D_EVEN, PathChain(()), tau, ctx)
    assert empty.converged and (empty.value - 1).is_zero()
    with pytest.raises(ValueError):
        phi_eval_direct(D_EVEN, 0, PathChain(()), tau, ctx, family="bogus")


def test_sigma_cache_directory(tmp_path):
    c1 = SigmaCache(5, tmp_path)
    a = c1.get(6, 0)
    assert list(tmp_path.glob("*.npy"))
    b = SigmaCache(5, tmp_path).get(6, 0)
    assert np.array_equal(a, b)
    prim = c1.family(6, 2, "primitive")
    assert np.all(np.any(prim % 5 != 0, axis=1))
