import itertools

import numpy as np
import pytest

from hofa.errors import (
    ActionError,
    CocycleError,
    NotASubgroupError,
    NotHomomorphismError,
    NotInjectiveError,
    PreconditionError,
)
from hofa.group import make_group
from hofa.homs import Hom
from hofa.nilpattern import (
    NilMorphism,
    Refutation,
    canonical_circular,
    check_nilmorphism,
    circular_decompose,
    circular_reconstruct,
    core,
    heisenberg_pattern,
    interpret_epi,
    interpret_mono,
    is_abelian,
    is_circular,
    lift,
    make_nilpattern,
    nilpattern_from_json,
    pure_quadratic_morphism,
    shift_modulation_model,
    split_hom,
    split_pattern,
    trivial_pattern,
    triple_commutators_trivial,
    verify_nilmorphism,
    widen_center,
)
from hofa.polydeg import quadratic_phase


def _group_facts(N):
    """Brute-force structure from the multiplication table alone."""
    mt = N.mul_table()
    n = N.order
    for a in range(n):
        assert np.array_equal(mt[mt[a]], mt[a][mt])  # (a b) c = a (b c) for all b, c
    assert np.array_equal(mt[0], np.arange(n)) and np.array_equal(mt[:, 0], np.arange(n))
    assert np.all(np.any(mt == 0, axis=1))
    center = [x for x in range(n) if np.array_equal(mt[x], mt[:, x])]
    inv = np.argmax(mt == 0, axis=1)
    comms = {int(mt[mt[a, b], mt[inv[a], inv[b]]]) for a in range(n) for b in range(n)}
    return set(center), comms


def _z_elements(N):
    return {int(v) for v in N.central(np.arange(N.m))}


@pytest.mark.parametrize(
    "N,order,core_size",
    [
        (trivial_pattern(4), 4, 4),
        (split_pattern(make_group([2]), 2), 8, 4),
        (heisenberg_pattern(3), 27, 9),
        (split_pattern(make_group([2, 2]), 2), 32, 8),
    ],
)
def test_pattern_axioms(N, order, core_size):
    assert N.order == order == N.T.order ** 2 * N.m
    assert core(N).size == core_size == N.order // N.T.order
    center, comms = _group_facts(N)
    Z = _z_elements(N)
    assert Z <= center
    assert comms <= Z


def test_trivial_pattern_is_z():
    N = trivial_pattern(5)
    assert is_abelian(N)
    C = core(N)
    assert np.all(C.first_degree == 0)
    assert np.array_equal(C.action_table(), (np.arange(5)[:, None] + np.arange(5)[None, :]) % 5)


def test_heisenberg_commutators_fill_center():
    N = heisenberg_pattern(3)
    _, comms = _group_facts(N)
    assert comms == _z_elements(N)
    assert not is_abelian(N)
    assert sorted(set(core(N).first_degree.tolist())) == [0, 1, 2]


def test_core_action_and_first_degree():
    N = heisenberg_pattern(3)
    C = core(N)
    act = C.action_table()
    ts = N.t_element(np.arange(N.nT))
    for n in range(N.order):
        for c in range(C.size):
            # n (x t) T = n x T for every t in T
            assert np.all(N.coset(N.mul(n, N.mul(C.representatives[c], ts))) == act[n, c])
    # first degree map is well defined on cosets
    for x in range(N.order):
        assert N.first_degree(N.coset(x)) == N.decode(x)[0]


def test_construction_errors():
    T = make_group([3])
    with pytest.raises(CocycleError):
        make_nilpattern(T, 3, (np.zeros((3, 3)), np.array([[0, 0, 0], [0, 0, 1], [0, 0, 0]])))
    with pytest.raises(ActionError):
        make_nilpattern(make_group([4]), 2)


def test_normalization_by_coboundary():
    T = make_group([2])
    # omega(chi1, chi2) = u^chi2 for u = (1, 1) is a coboundary shift of zero
    wz = np.array([[(1 + j) % 2 for j in range(2)] for _ in range(2)])
    N = make_nilpattern(T, 2, (np.ones((2, 2)), wz))
    assert N.omega_t[0, 0] == 0 and N.omega_z[0, 0] == 0
    center, comms = _group_facts(N)
    assert comms <= _z_elements(N) <= center


def test_json_round_trip():
    N = heisenberg_pattern(3)
    M = nilpattern_from_json(N.to_json())
    assert np.array_equal(M.mul_table(), N.mul_table())


def test_interpret_epi_identity_and_full():
    N = heisenberg_pattern(3)
    I0 = interpret_epi(N, [0])
    assert I0.pattern.order == N.order
    assert sorted(I0.core_map.tolist()) == list(range(N.core_size))
    full = interpret_epi(N, range(3))
    assert full.pattern.T.order == 1 and full.pattern.order == N.m
    # |N'| / |T3|: N' is the preimage of the trivial character
    assert full.info["preimage_order"] // full.info["T3_order"] == full.pattern.order
    img = full.core_map
    assert len(set(img.tolist())) == N.m
    assert np.all(N.first_degree(img) == 0)
    with pytest.raises(NotASubgroupError):
        interpret_epi(split_pattern(make_group([4]), 4), [0, 1])


def test_interpret_epi_commutes_with_duals():
    N = split_pattern(make_group([2, 4]), 4)
    T = N.T
    sub = T.generated_subgroup([(0, 2)])
    I = interpret_epi(N, sub)
    ahat = I.alpha.dual().table()
    c2 = np.arange(I.pattern.core_size)
    assert np.array_equal(N.first_degree(I.core_map), ahat[I.pattern.first_degree(c2)])
    ann = set(T.annihilator(sub))
    assert set(N.first_degree(I.core_map).tolist()) == ann


def test_interpret_mono_identity():
    N = heisenberg_pattern(3)
    I = interpret_mono(N, Hom.identity(N.T))
    assert I.pattern.order == N.order
    assert np.array_equal(I.pattern.mul_table(), N.mul_table())


def test_interpret_mono_from_trivial():
    N = trivial_pattern(2)
    I = interpret_mono(N, Hom.zero(N.T, make_group([2])))
    assert I.pattern.order == 2 * 2 * 2
    assert np.all(I.core_map == I.pattern.core_z(np.arange(I.pattern.core_size)))


def test_interpret_mono_z2_into_z4():
    N = split_pattern(make_group([2]), 4)
    alpha = Hom(N.T, make_group([4]), [[2]])
    I = interpret_mono(N, alpha)
    N2 = I.pattern
    assert N2.order == 64 == I.info["K_order"] * I.info["M_order"] // I.info["H_order"]
    center, comms = _group_facts(N2)
    assert comms <= _z_elements(N2) <= center
    fibers = np.bincount(I.core_map, minlength=N.core_size)
    assert np.all(fibers == N2.core_size // N.core_size)
    with pytest.raises(NotInjectiveError):
        interpret_mono(N, Hom.zero(N.T, make_group([4])))


def _affine_oracle(A, vals, m):
    # psi into the trivial pattern is a nil-morphism iff every b -> psi(a+b) - psi(b) is affine
    gens = list(itertools.product(range(m), repeat=A.rank))
    homs = [(A.elements @ np.array(g)) % m for g in gens]
    homs = [h for h in homs if all(h[A.add_table[i, j]] == (h[i] + h[j]) % m for i in range(A.order) for j in range(A.order))]
    for a in range(A.order):
        d = (vals[A.add_table[a]] - vals) % m
        if not any(np.all((d - h - d[0]) % m == 0) for h in homs):
            return False
    return True


def test_verify_pure_quadratic():
    q = quadratic_phase(7, 3, 1)
    psi = pure_quadratic_morphism(q)
    A = q.group
    phi = verify_nilmorphism(A, trivial_pattern(7), psi)
    assert isinstance(phi, NilMorphism) and check_nilmorphism(phi)
    # chi_a(b) = 2 a b * 3: the linear part of Delta_a psi
    for a in range(7):
        assert np.array_equal(phi.chi_values(a), (6 * a * np.arange(7)) % 7)


def test_verify_agrees_with_affine_oracle():
    rng = np.random.default_rng(0)
    A = make_group([4])
    N = trivial_pattern(8)
    refuted = 0
    for trial in range(60):
        if trial % 3 == 0:
            a, b = rng.integers(0, 8, 2)
            vals = pure_quadratic_morphism(quadratic_phase(4, int(a) * 2 % 8, int(b), half=True)) if (a * 2 * 4 + b) % 2 == 0 else rng.integers(0, 8, 4)
        else:
            vals = rng.integers(0, 8, 4)
        res = verify_nilmorphism(A, N, vals)
        assert isinstance(res, NilMorphism) == _affine_oracle(A, np.asarray(vals), 8)
        if isinstance(res, Refutation):
            refuted += 1
            assert 0 <= res.a < 4 and 0 <= res.b < 4
        else:
            assert check_nilmorphism(res)
    assert refuted


def test_orbit_representation_has_trivial_chi():
    N = split_pattern(make_group([3]), 3)
    A = make_group([3])
    g = N.encode(1, 0, 0)
    els = [N.identity]
    for _ in range(2):
        els.append(int(N.mul(els[-1], g)))
    psi = [int(N.coset(x)) for x in els]
    phi = verify_nilmorphism(A, N, psi)
    assert isinstance(phi, NilMorphism)
    assert not np.any(phi.chi)
    cert = split_hom(A, N, psi)
    assert all(xi == (0,) for _, xi, _ in cert.components())


def test_lift_examples():
    A = make_group([4])
    N = trivial_pattern(4)
    L = lift(A, N, np.zeros(4, dtype=int))
    assert np.array_equal(L.psi2, np.arange(4) * L.pattern.m)
    q = quadratic_phase(4, 1, 0, half=True)
    Nq = trivial_pattern(8)
    psi = pure_quadratic_morphism(q)
    L = lift(A, Nq, psi)
    assert not np.any(L.pattern.omega_t) and not np.any(L.pattern.omega_z)
    assert np.array_equal(L.core_map[L.psi2], psi)
    assert np.array_equal(L.pattern.first_degree(L.psi2), np.arange(4))
    assert isinstance(verify_nilmorphism(A, L.pattern, L.psi2), NilMorphism)


def test_lift_heisenberg_orbit():
    N = heisenberg_pattern(3)
    A = make_group([3])
    g = N.encode(1, 1, 0)
    els = [N.identity]
    for _ in range(2):
        els.append(int(N.mul(els[-1], g)))
    psi = np.array([int(N.coset(x)) for x in els])
    assert isinstance(verify_nilmorphism(A, N, psi), NilMorphism)
    L = lift(A, N, psi)
    assert np.array_equal(L.core_map[L.psi2], psi)
    assert isinstance(verify_nilmorphism(A, L.pattern, L.psi2), NilMorphism)
    cert = split_hom(A, N, psi)
    assert all(cert.checks.values())


def test_lift_errors():
    A = make_group([4])
    N = split_pattern(make_group([2]), 4)
    with pytest.raises(NotHomomorphismError):
        lift(A, N, [0, 4, 0, 0])
    with pytest.raises(PreconditionError):
        lift(make_group([8]), trivial_pattern(4), np.zeros(8, dtype=int))
    N2, cmap = widen_center(trivial_pattern(4), 8)
    assert np.array_equal(cmap, 2 * np.arange(4))
    assert isinstance(lift(make_group([8]), N2, np.zeros(8, dtype=int)).psi2, np.ndarray)


def test_split_pure_quadratic_z5():
    A = make_group([5])
    psi = pure_quadratic_morphism(quadratic_phase(5, 1, 0))
    cert = split_hom(A, trivial_pattern(5), psi)
    # Delta_t psi(b) = 2 t b + t^2: chi_t = 2t and c_t = t^2
    assert cert.components() == [((t,), ((2 * t) % 5,), (t * t) % 5) for t in range(5)]
    assert all(cert.checks.values())
    with pytest.raises(PreconditionError):
        split_hom(A, trivial_pattern(5), (psi + 1) % 5)


def test_circular_decompose():
    N = split_pattern(make_group([2]), 4)
    phi = canonical_circular(N)
    assert is_circular(N, phi)
    comps = circular_decompose(N, phi)
    assert np.allclose(comps[1], 1) and np.allclose(np.delete(comps, 1, axis=0), 0)
    inv = np.repeat(np.array([2.0, -1.0]), 4)
    comps = circular_decompose(N, inv)
    assert np.allclose(comps[0], inv) and np.allclose(comps[1:], 0)
    rng = np.random.default_rng(5)
    f = rng.normal(size=8) + 1j * rng.normal(size=8)
    comps = circular_decompose(N, f)
    assert np.max(np.abs(circular_reconstruct(N, comps) - f)) < 1e-12
    # oracle: on each fiber f_i is the i-th Fourier coefficient in z
    fib = f.reshape(2, 4)
    coef = np.fft.fft(fib, axis=1) / 4
    for i in range(4):
        assert np.allclose(comps[i].reshape(2, 4), coef[:, i][:, None])
    with pytest.raises(PreconditionError):
        circular_decompose(N, f, phi=np.ones(8))


def test_canonical_circular():
    N = trivial_pattern(6)
    phi = canonical_circular(N)
    assert np.allclose(phi, np.exp(2j * np.pi * np.arange(6) / 6))
    H = heisenberg_pattern(3)
    ph = canonical_circular(H)
    assert ph[0] == 1
    c = np.arange(H.core_size)
    for z in range(3):
        assert np.allclose(ph[H.z_act_core(z, c)], np.exp(2j * np.pi * z / 3) * ph)


@pytest.mark.parametrize("factors,m", [([2], 2), ([3], 3), ([2, 2], 2), ([4], 2)])
def test_shift_modulation_model_two_step(factors, m):
    A = make_group(factors)
    G = shift_modulation_model(A, m)
    assert G.m % A.exponent == 0 and G.m % m == 0
    assert G.order == A.order ** 2 * G.m
    assert triple_commutators_trivial(G)
    assert not is_abelian(G)
