import random
import pytest
from hypothesis import assume, given, settings, strategies as st

from artifact.paths import (
    COSET_REPS,
    HALF,
    INFINITY,
    ZERO,
    Cusp,
    PathChain,
    base_pair_decompose,
    coset_reduce,
    enumerate_sigma_path,
    identity,
    in_gamma0_2,
    intersect,
    intersect_base,
    intersect_path,
    manin_decompose,
)
from artifact.quadspace import (
    Gauss,
    VMatrix,
    act_matrix,
    chi4,
    enumerate_sigma0,
    is_norm_from_K,
    mat_inv,
    mat_mul,
    quad_form,
    to_gauss_matrix,
)

i_ = Gauss(0, 1)


def V(x, y, b, c):
    return VMatrix.from_tuple((x, y, b, c))


def _rand_cusp(rng, size=30):
    while True:
        a = Gauss(rng.randint(-size, size), rng.randint(-size, size))
        c = Gauss(rng.randint(-size, size), rng.randint(-size, size))
        if a != Gauss(0) or c != Gauss(0):
            return Cusp.make(a, c)


def _boundary_of_pairs(pairs):
    out = {}
    for sg, g in pairs:
        for cusp, e in ((INFINITY.act(g), sg), (ZERO.act(g), -sg)):
            out[cusp] = out.get(cusp, 0) + e
    return {k: v for k, v in out.items() if v}


def _expected_boundary(r, s):
    return {} if r == s else {s: 1, r: -1}


def test_intersect_base_examples():
    assert intersect_base(V(1, 2, 1, -1)) == -1
    assert intersect_base(V(1, 2, 1, 1)) == 0
    assert intersect_base(V(0, 0, -3, 1)) == 1


def test_manin_trivial_cases():
    (sg, g), = manin_decompose(ZERO, INFINITY)
    assert sg == 1 and g == identity()
    assert manin_decompose(HALF, HALF) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_manin_and_base_pairs_telescope(seed):
    rng = random.Random(seed)
    r, s = _rand_cusp(rng), _rand_cusp(rng)
    assert _boundary_of_pairs(manin_decompose(r, s)) == _expected_boundary(r, s)
    chain = base_pair_decompose(r, s)
    assert chain.boundary() == _expected_boundary(r, s)
    assert all(in_gamma0_2(g) for _, g, _ in chain.terms)


def test_cosets_are_distinct_and_cover():
    for j, gj in enumerate(COSET_REPS):
        for k, gk in enumerate(COSET_REPS):
            assert in_gamma0_2(mat_mul(gj, mat_inv(gk))) == (j == k)
    gp, k = coset_reduce(COSET_REPS[1])
    assert k == 2 and gp == identity()


def test_published_relations():
    g2, g4 = COSET_REPS[1], COSET_REPS[3]
    ch = base_pair_decompose(ZERO.act(g2), INFINITY.act(g2))
    assert [(s, b) for s, _, b in ch.terms] == [(-1, 0)]
    assert ch.terms[0][1] == to_gauss_matrix(((i_, 0), (0, -i_)))
    ch = base_pair_decompose(ZERO.act(g4), INFINITY.act(g4))
    assert [(s, b) for s, _, b in ch.terms] == [(-1, 1)]
    assert ch.terms[0][1] == to_gauss_matrix(((i_ - 2, 1), (4, -i_ - 2)))
    (s, g, b), = base_pair_decompose(ZERO, INFINITY).terms
    assert (s, b) == (1, 0) and g == identity()


def _rand_sl2(rng):
    while True:
        a, b, c = (Gauss(rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(3))
        if a.norm() == 0:
            continue
        d = (Gauss(1) + b * c) / a
        if d.is_integral():
            return (a, b, c, d)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_coset_reduce_random(seed):
    g = _rand_sl2(random.Random(seed))
    gp, k = coset_reduce(g)
    assert in_gamma0_2(gp) and mat_mul(gp, COSET_REPS[k - 1]) == to_gauss_matrix(g)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_intersection_laws(seed):
    rng = random.Random(seed)
    M = V(rng.randint(-6, 6), rng.randint(-6, 6), rng.randint(1, 6), -rng.randint(1, 6))
    assume(not is_norm_from_K(quad_form(M)))
    r, s, t = (_rand_cusp(rng, 12) for _ in range(3))
    rs, st_, tr = intersect_path(M, r, s), intersect_path(M, s, t), intersect_path(M, t, r)
    assert rs + st_ + tr == 0
    assert intersect_path(M, s, r) == -rs
    assert intersect(M, base_pair_decompose(r, s)) == rs
    g = _rand_sl2(rng)
    assert intersect_path(act_matrix(g, M), r.act(g), s.act(g)) == rs


def test_sigma_path_on_base_pair_recovers_sigma0():
    chain = PathChain(((1, identity(), 0),))
    got = dict(enumerate_sigma_path(3, 0, chain, 5))
    for M in enumerate_sigma0(3, 0, 5):
        e = chi4(M, 5) * (1 if M.c > 0 else -1)
        assert got.get(M, 0) == e
    assert enumerate_sigma_path(3, 0, PathChain(()), 5) == []


@pytest.mark.parametrize("d", [3, 6, 7, 14])
def test_weight_sign_law(d):
    from artifact.cocycle import weight

    w0 = weight(d, 0, PathChain(((1, identity(), 0),)), 5)
    wg = weight(d, 0, PathChain(((1, COSET_REPS[2], 0),)), 5)
    assert wg == (-1) ** d * w0
