import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hofa.errors import InvalidGroupError, InvalidThresholdError, NotASubgroupError
from hofa.group import (
    GroupFunction,
    dominant_spectrum,
    e,
    fourier_transform,
    inverse_fourier_transform,
    make_group,
)

factor_lists = st.lists(st.integers(1, 6), min_size=1, max_size=3)


def naive_dft(f):
    g = f.group
    n = g.order
    out = np.zeros(n, dtype=complex)
    for c in range(n):
        chi = g.element(c)
        out[c] = sum(f.values[x] * np.conj(e(g.pairing(chi, g.element(x)) / g.exponent)) for x in range(n)) / n
    return out


def test_make_group_basics():
    assert make_group([6]).order == 6
    g = make_group([2, 2])
    assert g.order == 4 and g.exponent == 2
    h = make_group([4, 3])
    assert h.order == 12
    assert h.add((3, 2), (1, 1)) == (0, 0)


def test_bad_factors():
    with pytest.raises(InvalidGroupError):
        make_group([0])
    with pytest.raises(InvalidGroupError):
        make_group([3, -2])


def test_index_order_last_factor_fastest():
    g = make_group([2, 3])
    assert [g.element(i) for i in range(6)] == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert all(g.index(g.element(i)) == i for i in range(6))


@given(factor_lists)
def test_group_axioms(factors):
    g = make_group(factors)
    add = g.add_table
    n = g.order
    assert np.all(add[0] == np.arange(n))
    assert np.array_equal(add, add.T)
    assert np.all(add[np.arange(n), g.neg_index] == 0)
    i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    assert np.array_equal(add[add[i, j], k], add[i, add[j, k]])


@given(factor_lists)
def test_characters_multiplicative_exactly(factors):
    g = make_group(factors)
    tab = g.character_angle_table
    add = g.add_table
    L = g.exponent
    # chi(a + b) = chi(a) + chi(b) in exact angles
    assert np.array_equal(tab[:, add].reshape(g.order, -1) % L,
                          ((tab[:, :, None] + tab[:, None, :]) % L).reshape(g.order, -1))
    # pointwise product of characters is the character of the sum
    assert np.array_equal((tab[:, None, :] + tab[None, :, :]) % L, tab[add])


def test_fourier_of_character_and_delta():
    g = make_group([4])
    fh = fourier_transform(g.character((3,)))
    assert abs(fh[3] - 1) < 1e-12 and np.max(np.abs(np.delete(fh, 3))) < 1e-12
    fh = fourier_transform(GroupFunction.indicator(g, [0]))
    assert np.allclose(fh, 0.25, atol=1e-15)


@pytest.mark.parametrize("factors", [[8], [2, 4], [3, 2, 2]])
def test_fourier_matches_naive_dft(factors):
    rng = np.random.default_rng(1)
    g = make_group(factors)
    f = GroupFunction(g, rng.normal(size=g.order) + 1j * rng.normal(size=g.order))
    fh = fourier_transform(f)
    assert np.max(np.abs(fh - naive_dft(f))) < 1e-12
    assert inverse_fourier_transform(g, fh).allclose(f, 1e-12)


@given(factor_lists, st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_parseval_and_shift_invariance(factors, seed):
    rng = np.random.default_rng(seed)
    g = make_group(factors)
    f = GroupFunction(g, rng.normal(size=g.order) + 1j * rng.normal(size=g.order))
    h = GroupFunction(g, rng.normal(size=g.order) + 1j * rng.normal(size=g.order))
    fh = fourier_transform(f)
    assert abs(np.sum(np.abs(fh) ** 2) - f.norm2() ** 2) <= 1e-9 * f.norm2() ** 2
    t = int(rng.integers(g.order))
    assert abs(f.shift(t).inner(h.shift(t)) - f.inner(h)) < 1e-12


def test_dominant_spectrum_examples():
    g = make_group([8])
    f = g.character((1,)) * 0.9 + g.character((5,)) * 0.05
    spec = dominant_spectrum(f, 0.1)
    assert len(spec) == 1 and spec[0][0] == (1,) and abs(spec[0][1] - 0.9) < 1e-12
    spec = dominant_spectrum(GroupFunction.constant(g), 0.5)
    assert spec[0][0] == (0,) and abs(spec[0][1] - 1) < 1e-12


def test_dominant_spectrum_planted():
    g = make_group([3, 5])
    coeffs = np.zeros(g.order, dtype=complex)
    coeffs[[2, 7, 11]] = [0.5, 0.3, 0.2]
    f = inverse_fourier_transform(g, coeffs)
    spec = dominant_spectrum(f, 0.15)
    assert [g.index(c) for c, _ in spec] == [2, 7, 11]


def test_dominant_spectrum_ties_and_threshold():
    g = make_group([6])
    f = g.character((4,)) + g.character((1,))
    assert [c for c, _ in dominant_spectrum(f, 0.5)] == [(1,), (4,)]
    with pytest.raises(InvalidThresholdError):
        dominant_spectrum(f, 0.0)


def test_subgroups_and_annihilators():
    g = make_group([2, 4])
    sub = g.generated_subgroup([(0, 2)])
    assert sub == [0, 2]
    ann = g.annihilator(sub)
    # characters (m1, m2) with m2 * 2 / 4 integral: m2 even
    assert sorted(g.element(i) for i in ann) == [(0, 0), (0, 2), (1, 0), (1, 2)]
    with pytest.raises(NotASubgroupError):
        g.annihilator([0, 1])


def test_function_json_round_trip():
    g = make_group([3])
    f = GroupFunction(g, [1, 1j, -1])
    assert GroupFunction.from_json(f.to_json()).allclose(f, 0)
