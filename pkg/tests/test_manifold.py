import random
from fractions import Fraction as Q

import golden
import pytest

from lieconformal.enveloping import UElem
from lieconformal.errors import AxiomFailure, NotNilpotent
from lieconformal.manifold import integrate, point_add


def rand_point(rng, M, depth=1, bound=4):
    keys = M.basis.keys_up_to_depth(depth)
    out = {}
    for k in rng.sample(keys, k=min(len(keys), rng.randint(1, 3))):
        num = rng.randint(-bound, bound)
        if num:
            out[k] = Q(num, rng.randint(1, 3))
    return out


def test_integrate_shapes():
    assert integrate(golden.heisenberg()).N == 2
    assert integrate(golden.abelian2()).N == 1
    assert integrate(golden.n3_current()).N == 3
    assert integrate(golden.mixed()).N == 2
    with pytest.raises(NotNilpotent) as err:
        integrate(golden.virasoro())
    assert err.value.stable_generators
    with pytest.raises(AxiomFailure):
        integrate(golden.corrupted_heisenberg())


def test_product_examples():
    M = integrate(golden.heisenberg())
    a = M.basis.key_for_symbol((0, 0))
    k = M.basis.key_for_symbol((1, 0))
    alpha, beta = Q(3, 2), Q(-2)
    out = M.product({a: alpha}, {a: beta}, 1)
    assert out == {k: alpha * beta}
    # every index-zero product of points vanishes here
    rng = random.Random(2)
    for _ in range(10):
        assert M.product(rand_point(rng, M), rand_point(rng, M), 0) == {}


def test_identity_slice_sum():
    # with all corrections killed, the index -1 product is the sum
    M = integrate(golden.abelian2())
    rng = random.Random(5)
    for _ in range(50):
        p, q = rand_point(rng, M, 2), rand_point(rng, M, 2)
        assert M.product(p, q, -1) == point_add(p, q)
        # and the products are linear in each slot separately
        for n in range(-3, 2):
            double = M.product({k: 2 * v for k, v in p.items()}, q, n)
            base = M.product(p, q, n)
            only_q = M.product({}, q, n)
            assert double == point_add(
                {k: 2 * v for k, v in point_add(base, {k2: -v2 for k2, v2 in only_q.items()}).items()},
                only_q,
            )


def test_abelian_matches_trivial_vertex_products():
    # the integrated structure of a zero bracket coincides with the
    # enveloping products of vacuum-shifted elements
    M = integrate(golden.abelian2())
    rng = random.Random(9)
    for _ in range(20):
        p, q = rand_point(rng, M, 1), rand_point(rng, M, 1)
        Ep, Eq = M.exponential_element(p), M.exponential_element(q)
        for n in range(-3, 3):
            expect = M.basis.expand(M.env.pi(M.env.nth(Ep, Eq, n)))
            assert M.product(p, q, n) == expect


def test_truncation_bounds():
    M = integrate(golden.heisenberg())
    a0 = M.basis.key_for_symbol((0, 0))
    a1 = M.basis.key_for_symbol((0, 1))
    assert M.truncation_bound({a0: Q(1)}, {a0: Q(1)}) == 2
    # golden value frozen from the degree scan over the support pairs
    assert M.truncation_bound({a0: Q(1), a1: Q(1)}, {a0: Q(1), a1: Q(2)}) == 4
    Ma = integrate(golden.abelian1())
    b0 = Ma.basis.key_for_symbol((0, 0))
    assert Ma.truncation_bound({b0: Q(1)}, {b0: Q(2)}) == 0


def test_window_consistency_and_probe():
    rng = random.Random(33)
    for build in [golden.heisenberg, golden.abelian2, golden.n3_current, golden.mixed]:
        M = integrate(build())
        for _ in range(12):
            p, q = rand_point(rng, M), rand_point(rng, M)
            res = M.product_window(p, q, -3, 3)
            for n in range(-3, 4):
                assert res.slices[n] == M.product(p, q, n)
        # vanishing holds at and well past the reported bound
        for _ in range(50):
            p, q = rand_point(rng, M), rand_point(rng, M)
            bound = M.truncation_bound(p, q)
            for n in range(bound, bound + 5):
                assert M.product(p, q, n) == {}


def test_exponential_oracle_all_nilpotent():
    rng = random.Random(77)
    for build in [golden.heisenberg, golden.n3_current, golden.mixed]:
        M = integrate(build())
        for _ in range(8):
            p, q = rand_point(rng, M), rand_point(rng, M)
            Ep, Eq = M.exponential_element(p), M.exponential_element(q)
            for n in range(-4, 4):
                expect = M.basis.expand(M.env.pi(M.env.nth(Ep, Eq, n)))
                assert M.product(p, q, n) == expect, (build.__name__, n)


def test_corollary_pruning_is_sound():
    # recomputing products without the degree cutoff changes nothing
    M = integrate(golden.heisenberg())
    a0 = M.basis.key_for_symbol((0, 0))
    k0 = M.basis.key_for_symbol((1, 0))
    p = {a0: Q(2), k0: Q(1)}
    q = {a0: Q(-1)}
    for n in range(-3, 3):
        pruned = M.product(p, q, n)
        full = {}
        # direct sum over all support pairs regardless of total degree
        from itertools import combinations_with_replacement

        from lieconformal.lawtable import midx_factorial, midx_from_word, word_from_midx

        supp_p, supp_q = sorted(p), sorted(q)
        for sp in range(0, 5):
            for wl in combinations_with_replacement(supp_p, sp):
                for sq in range(0, 5):
                    for wr in combinations_with_replacement(supp_q, sq):
                        if sp == 0 and sq == 0:
                            continue
                        k = midx_from_word(wl)
                        kp = midx_from_word(wr)
                        u = UElem.monomial(word_from_midx(k))
                        v = UElem.monomial(word_from_midx(kp))
                        vec = M.env.pi(M.env.nth(u, v, n))
                        norm = Q(1, midx_factorial(k) * midx_factorial(kp))
                        ca = M._power(p, k) * M._power(q, kp) * norm
                        if ca == 0:
                            continue
                        for pos, c in M.basis.expand(vec).items():
                            nv = full.get(pos, 0) + c * ca
                            if nv == 0:
                                full.pop(pos, None)
                            else:
                                full[pos] = nv
        assert pruned == full, n


def test_axiom_suite_and_fault_injection():
    for build in [golden.heisenberg, golden.abelian2, golden.mixed]:
        M = integrate(build())
        report = M.check_axioms(8, seed=5, window=(-4, 4))
        assert report["pass"], (build.__name__, report)

    M = integrate(golden.heisenberg())
    a0 = M.basis.key_for_symbol((0, 0))
    k0 = M.basis.key_for_symbol((1, 0))
    a1 = M.basis.key_for_symbol((0, 1))
    # corrupt one shifted table cell, then the identity must fail
    key = (((a1, 1),), ((a0, 1),), 2)
    M.table_entry(*key)
    M._table[key] = {k0: Q(5)}
    report = M.check_axioms(8, seed=5, window=(-4, 4))
    jac = [c for c in report["checks"] if c["axiom"] == "jacobi"][0]
    assert not jac["pass"]
    assert "witness" in jac and jac["witness"]["ltj"]


def test_roundtrip_all_nilpotent():
    for build in [golden.abelian1, golden.abelian2, golden.heisenberg,
                  golden.n3_current, golden.mixed]:
        pres = build()
        M = integrate(pres)
        recon, change = M.tangent_presentation()
        assert recon == pres, build.__name__
        # the recorded change of basis reproduces every basis vector
        for bv in M.basis._order:
            assert change[M.basis.label(bv.key)] == bv.vec
        assert M.translation_slice_consistent(1)


def test_jacobi_residual_golden_spread():
    rng = random.Random(3)
    for build in [golden.heisenberg, golden.n3_current, golden.mixed]:
        M = integrate(build())
        pts = [rand_point(rng, M) for _ in range(3)]
        for l in (-1, 0, 1):
            for t in (-1, 0, 1):
                for j in (-1, 0, 1):
                    assert not M.jacobi_residual(*pts, l, t, j), (build.__name__, l, t, j)


def test_composed_products_match_exponential_oracle():
    # both substitution slots of the composed products agree with the
    # iterated enveloping products of coordinate exponentials
    rng = random.Random(55)
    for build in [golden.heisenberg, golden.n3_current, golden.mixed]:
        M = integrate(build())
        keys = M.basis.keys_up_to_depth(0)
        for _ in range(2):
            pts = []
            for _ in range(3):
                pt = {}
                for kk in rng.sample(keys, k=min(2, len(keys))):
                    v = rng.randint(-2, 2)
                    if v:
                        pt[kk] = Q(v)
                pts.append(pt)
            a, b, c = pts
            Ea, Eb, Ec = (M.exponential_element(p) for p in pts)
            for p in range(-2, 2):
                for q in range(-2, 2):
                    inner = M.env.nth(Eb, Ec, q)
                    expect = M.basis.expand(M.env.pi(M.env.nth(Ea, inner, p)))
                    assert M.composed(a, b, c, p, q) == expect
                    inner = M.env.nth(Ea, Eb, q)
                    expect = M.basis.expand(M.env.pi(M.env.nth(inner, Ec, p)))
                    assert M.composed_first(a, b, c, p, q) == expect
