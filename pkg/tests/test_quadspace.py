import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.padic import QuadExtScalar, make_context, moebius_act
from artifact.quadspace import (
    DivisorSpec,
    Gauss,
    VMatrix,
    act_matrix,
    chi4,
    enumerate_sigma0,
    fm_eval,
    is_norm_from_K,
    mat_mul,
    quad_form,
    sigma0_array,
)


def V(x, y, b, c):
    return VMatrix.from_tuple((x, y, b, c))


def test_quad_form_examples():
    assert quad_form(V(1, 2, 1, -1)) == 6
    assert quad_form(V(0, 0, 1, 1)) == -1


@pytest.mark.parametrize("c,expect", [(3, -1), (2, 0), (Fraction(9, 25), 1), (1, 1), (75, -1)])
def test_chi4(c, expect):
    assert chi4(VMatrix(Gauss(0), Fraction(1), Fraction(c)), 5) == expect


def test_act_examples():
    one, zero = Gauss(1), Gauss(0)
    M = V(1, 2, 1, -1)
    assert act_matrix((one, zero, zero, one), M) == M
    assert act_matrix((one, one, zero, one), M).as_tuple() == (0, 2, 2, -1)


def _rand_sl2(rng):
    while True:
        a, b, c = (Gauss(rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(3))
        if a.norm() == 0:
            continue
        d = (Gauss(1) + b * c) / a
        if d.is_integral():
            return (a, b, c, d)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_action_preserves_q_and_composes(seed):
    rng = random.Random(seed)
    g, h = _rand_sl2(rng), _rand_sl2(rng)
    M = V(*(rng.randint(-9, 9) for _ in range(4)))
    assert quad_form(act_matrix(g, M)) == quad_form(M)
    assert act_matrix(mat_mul(g, h), M) == act_matrix(g, act_matrix(h, M))


def test_fm_trivial_cases():
    ctx = make_context(13, 6, 2)
    m = ctx.modulus
    rng = random.Random(5)
    tau = (QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec), QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec))
    assert fm_eval(V(0, 0, 7, 0), tau, ctx) == ctx.quad(7)
    assert fm_eval(V(0, 0, 0, 1), tau, ctx) == tau[0] * tau[1]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_fm_equivariance(seed):
    """F_{gM}(g tau) = F_M(tau) / (j(iota_1 g^-1, g tau_1) j(iota_2 g^-1, g tau_2))."""
    from artifact.padic import _embed_entry

    ctx = make_context(5, 8, 6)
    rng = random.Random(seed)
    g = _rand_sl2(rng)
    M = V(*(rng.randint(-9, 9) for _ in range(4)))
    m = ctx.modulus
    tau = (QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec), QuadExtScalar(ctx, 0, rng.randrange(m), 1, ctx.prec))
    gt = moebius_act(g, tau, ctx)
    lhs = fm_eval(act_matrix(g, M), gt, ctx)
    c, d = g[2], g[3]
    # j(g, tau) = c tau + d through the matching embedding
    j1 = _embed_entry(c, ctx, 1) * tau[0] + _embed_entry(d, ctx, 1)
    j2 = _embed_entry(c, ctx, 2) * tau[1] + _embed_entry(d, ctx, 2)
    rhs = fm_eval(M, tau, ctx) * (j1 * j2).inverse()
    assert lhs.agrees(rhs, ctx.N - 2)


def test_sigma_count_and_postconditions(expected):
    S = enumerate_sigma0(3, 0, 5)
    assert len(S) == expected["sigma_count_3_0"]
    for M in S:
        assert quad_form(M) == 3 and M.b * M.c < 0
    assert set(S) == {-M for M in S}


@pytest.mark.parametrize("d,v,p", [(6, 2, 5), (21, 1, 13), (14, 0, 17)])
def test_sigma_array_is_complete(d, v, p):
    """Compare against a naive brute force over (b, c, x, y)."""
    q = d * p**v
    arr = sigma0_array(d, v, p)
    brute = set()
    for b in range(-q, q + 1):
        if b == 0:
            continue
        for c in range(-q, q + 1):
            if c == 0 or b * c >= 0 or -b * c > q:
                continue
            r = q + b * c
            t = int(r**0.5) + 1
            for x in range(-t, t + 1):
                y2 = r - x * x
                if y2 < 0:
                    continue
                y = int(round(y2**0.5))
                for yy in {y, -y}:
                    if yy * yy == y2:
                        brute.add((x, yy, b, c))
    got = {tuple(r) for r in arr.tolist()}
    assert got == brute
    keys = np.lexsort((arr[:, 1], arr[:, 0], arr[:, 3], arr[:, 2]))
    assert np.array_equal(keys, np.arange(arr.shape[0]))


def test_sigma_rejects_norms_and_multiples_of_p():
    with pytest.raises(ValueError):
        sigma0_array(5, 0, 13)
    with pytest.raises(ValueError):
        sigma0_array(15, 0, 5)


def test_divisor_spec_merges_terms():
    D = DivisorSpec([(3, 1), (15, 1), (3, 1), (21, -1)], "odd")
    assert D.terms == ((3, 2), (15, 1), (21, -1))
    assert D.support == (3, 15, 21)
    assert not is_norm_from_K(21) and is_norm_from_K(13)
    with pytest.raises(ValueError):
        DivisorSpec([(3, 1)], "neither")
