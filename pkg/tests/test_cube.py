import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hofa.cube import (
    CubeAutomorphism,
    CubeLabeling,
    Face,
    all_automorphisms,
    apply_cube_automorphism,
    bdk_decompose,
    bdk_generator,
    bdk_membership,
    enumerate_faces,
    eval_face_product,
    labeling_from_code,
    member_codes,
    psi_S,
    recompose,
)
from hofa.errors import IncompleteSystemError, InvalidDimensionError
from hofa.gowers import FunctionSystem, conv_k, gowers_inner
from hofa.group import GroupFunction, e, make_group


def test_face_enumeration():
    assert enumerate_faces(2, 2) == [Face(0b11, 0)]
    assert len(enumerate_faces(2, 1)) == 4
    assert [f.members() for f in enumerate_faces(1, 0)] == [[0], [1]]
    for d in range(5):
        for n in range(d + 1):
            faces = enumerate_faces(d, n)
            assert len(faces) == len(set(faces)) == (2 ** (d - n)) * len(list(itertools.combinations(range(d), n)))
            assert faces == sorted(faces)


def test_face_rejects_overlap():
    with pytest.raises(InvalidDimensionError):
        Face(0b01, 0b01)


def test_psi_S():
    g = make_group([5])
    pt = [(1,), (2,), (3,)]
    assert psi_S(0, pt, g) == (1,)
    assert psi_S(0b11, pt, g) == (1,)
    assert psi_S(0b11, [(4,), (0,), (0,)], g) == (4,)


def test_eval_face_product():
    g = make_group([3])
    ones = {S: GroupFunction.constant(g) for S in range(4)}
    pt = [(1,), (2,), (0,)]
    assert eval_face_product(ones, Face(0b11, 0), pt, g) == 1
    f = GroupFunction(g, [1, 2, 3])
    sys = dict(ones)
    sys[0b10] = f
    assert eval_face_product(sys, Face(0, 0b10), pt, g) == f.values[g.index(psi_S(0b10, pt, g))]
    with pytest.raises(IncompleteSystemError):
        eval_face_product({0: f}, Face(0b01, 0), pt, g)


def test_face_products_give_gowers_inner():
    g = make_group([3])
    rng = np.random.default_rng(0)
    chis = [g.character((int(c),)) for c in rng.integers(0, 3, 2)]
    sys = {0: chis[0], 1: chis[1].conj()}
    total = np.mean([eval_face_product(sys, Face(1, 0), [(x,), (t,)], g) for x in range(3) for t in range(3)])
    assert abs(total - gowers_inner(FunctionSystem.from_functions(chis))) < 1e-12


def test_membership_examples():
    g = make_group([2])
    for k in (1, 2):
        assert bdk_membership(CubeLabeling.zero(g, 2), k)
    codes = member_codes(g, 2, 1)
    assert len(codes) == 8
    for code in range(16):
        h = labeling_from_code(code, g, 2)
        assert bdk_membership(h, 1) == (int(h.table.sum()) % 2 == 0)


def test_generator_examples():
    z2, z4 = make_group([2]), make_group([4])
    face = Face(0b01, 0)
    assert bdk_generator(face, (1,), 2, z2).table[:, 0].tolist() == [1, 1, 0, 0]
    assert bdk_generator(face, (1,), 2, z4).table[:, 0].tolist() == [1, 3, 0, 0]
    assert bdk_generator(face, (0,), 2, z4).is_zero()
    with pytest.raises(InvalidDimensionError):
        bdk_generator(face, (1,), 2, z4, k=2)


@given(st.sampled_from([[2], [3], [4], [2, 2]]), st.integers(1, 3), st.data())
def test_generators_are_members_and_decompose(factors, d, data):
    g = make_group(factors)
    k = data.draw(st.integers(1, d))
    face = data.draw(st.sampled_from(enumerate_faces(d, k)))
    a = tuple(data.draw(st.integers(0, n - 1)) for n in g.factors)
    h = bdk_generator(face, a, d, g)
    assert bdk_membership(h, k)
    fac = bdk_decompose(h, k)
    assert recompose(fac, d, g) == h
    assert all(f.dim == k for f, _ in fac)


def test_decompose_zero_and_nonmembers():
    g = make_group([2])
    assert bdk_decompose(CubeLabeling.zero(g, 3), 2) == []
    for code in range(256):
        h = labeling_from_code(code, g, 3)
        fac = bdk_decompose(h, 2)
        assert (fac is not None) == bdk_membership(h, 2)
        if fac is not None:
            assert recompose(fac, 3, g) == h


def test_decompose_is_reproducible():
    g = make_group([3])
    h = bdk_generator(Face(0b110, 0b001), (2,), 3, g) + bdk_generator(Face(0b011, 0), (1,), 3, g)
    assert bdk_decompose(h, 2) == bdk_decompose(h, 2)


def test_automorphisms():
    g = make_group([2])
    h = labeling_from_code(0b10110100, g, 3)
    assert apply_cube_automorphism(CubeAutomorphism.identity(3), h) == h
    flip = CubeAutomorphism((0, 1, 2), 0b111)
    assert apply_cube_automorphism(flip, apply_cube_automorphism(flip, h)) == h
    for s in all_automorphisms(3):
        for t in all_automorphisms(3)[:6]:
            st_ = s.compose(t)
            for S in range(8):
                assert st_(S) == s(t(S))
        assert all(s.inverse()(s(S)) == S for S in range(8))


def test_membership_preserved_by_automorphisms():
    g = make_group([2])
    for k in (1, 2):
        for code in range(16):
            h = labeling_from_code(code, g, 2)
            m = bdk_membership(h, k)
            for s in all_automorphisms(2):
                assert bdk_membership(apply_cube_automorphism(s, h), k) == m


def _quadratic_system(rng, p, d):
    a = rng.integers(0, p, 1 << d)
    b = rng.integers(0, p, 1 << d)
    x = np.arange(p)
    tab = np.stack([e((a[s] * x * x + b[s] * x) / p) for s in range(1 << d)])
    return a, FunctionSystem(make_group([p]), d, tab)


@pytest.mark.parametrize("p", [5, 7])
@pytest.mark.parametrize("d", [2, 3])
def test_quadratic_face_condition_finite_bound(p, d):
    """A (d-1)-face whose quadratic parts do not cancel forces ||Conv_d|| <= p^(-1/4)."""
    rng = np.random.default_rng(p * 10 + d)
    seen = 0
    for _ in range(40):
        a, F = _quadratic_system(rng, p, d)
        bad = any(sum(a[S] for S in f.members()) % p for f in enumerate_faces(d, d - 1))
        if bad:
            seen += 1
            assert conv_k(F).norm2() <= p ** -0.25 + 1e-12
    assert seen


def test_quadratic_face_condition_is_not_exact_at_finite_scale():
    g = make_group([5])
    q = GroupFunction(g, e(np.arange(5) ** 2 / 5))
    one = GroupFunction.constant(g)
    F = FunctionSystem.from_functions([q, one, one, one])
    # the face {0, {1}} carries the nontrivial quadratic q, yet Conv_2 = E_x q(x) != 0
    assert abs(conv_k(F).norm2() - 5 ** -0.5) < 1e-12
