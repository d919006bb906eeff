import itertools

import numpy as np
import pytest

from hofa.errors import NotASubgroupError, NotHomomorphismError
from hofa.group import make_group
from hofa.homs import Hom, hom_from_table, quotient


def _all_homs(src, tgt):
    # brute force: every assignment of basis images that respects orders
    out = []
    for imgs in itertools.product(range(tgt.order), repeat=src.rank):
        try:
            out.append(Hom(src, tgt, [tgt.element(i) for i in imgs]))
        except NotHomomorphismError:
            pass
    return out


def _is_hom_table(src, tgt, table):
    return all(
        table[src.index(src.add(a, b))] == tgt.index(tgt.add(tgt.element(table[src.index(a)]), tgt.element(table[src.index(b)])))
        for a in map(tuple, src.elements.tolist())
        for b in map(tuple, src.elements.tolist())
    )


@pytest.mark.parametrize("src,tgt", [([4], [2]), ([2, 2], [4]), ([6], [3, 2]), ([4], [6])])
def test_homs_are_homomorphisms(src, tgt):
    A, B = make_group(src), make_group(tgt)
    homs = _all_homs(A, B)
    assert homs
    for h in homs:
        assert _is_hom_table(A, B, h.table().tolist())
        assert hom_from_table(A, B, h.table()) is not None


def test_count_of_homs():
    # |Hom(Z_m, Z_n)| = gcd(m, n)
    for m, n in [(4, 6), (5, 10), (6, 9), (7, 3)]:
        assert len(_all_homs(make_group([m]), make_group([n]))) == np.gcd(m, n)


def test_rejects_non_homomorphism():
    with pytest.raises(NotHomomorphismError):
        Hom(make_group([3]), make_group([2]), [[1]])
    A = make_group([4])
    assert hom_from_table(A, make_group([4]), [0, 1, 3, 2]) is None


def test_dual_is_precomposition():
    A, B = make_group([2, 4]), make_group([4, 2])
    for h in _all_homs(A, B)[::3]:
        hd = h.dual()
        for chi in map(tuple, B.elements.tolist()):
            pulled = A.character(hd(chi)).values
            assert np.allclose(pulled, B.character(chi).values[h.table()])


def test_compose_and_identity():
    A, B, C = make_group([6]), make_group([3]), make_group([6])
    f = Hom(A, B, [[1]])
    g = Hom(B, C, [[2]])
    gf = g.compose(f)
    assert np.array_equal(gf.table(), g.table()[f.table()])
    assert Hom.identity(A).is_injective() and Hom.identity(A).is_surjective()
    assert Hom.zero(A, B).kernel() == list(range(6))
    assert f.image() == [0, 1, 2]


@pytest.mark.parametrize("factors,gens", [([4], [(2,)]), ([2, 4], [(1, 2)]), ([6], []), ([3, 3], [(1, 1)]), ([2, 2], [(1, 0), (0, 1)])])
def test_quotient(factors, gens):
    T = make_group(factors)
    sub = T.generated_subgroup(gens)
    Q, pi = quotient(T, sub)
    assert Q.order * len(sub) == T.order
    assert sorted(pi.kernel()) == sorted(sub)
    assert pi.is_surjective()


def test_quotient_rejects_non_subgroup():
    with pytest.raises(NotASubgroupError):
        quotient(make_group([4]), [0, 1])
