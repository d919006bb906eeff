"""Finite quadratic nil-patterns.

A nil-pattern of type (T, Z_m) is a central extension

    0 -> T x Z_m -> N -> T^ -> 0

realized on triples (chi, t, z) with chi in T^, t in T, z in Z_m (z stands
for the root of unity e(z/m)).  With a cocycle omega = (omega_T, omega_Z)
on T^ x T^ the product is

    (chi1, t1, z1)(chi2, t2, z2)
        = (chi1 + chi2, t1 + t2 + omega_T, z1 + z2 + m<chi2, t1> + omega_Z)

i.e. T^ acts on T x Z by (t, z)^chi = (t, z + m<chi, t>), where <chi, t>
is the pairing in Q/Z.  This needs exp(T) | m so that chi(t) lies in Z_m.

Indexing: element (chi, t, z) has index (chi * |T| + t) * m + z, with chi
and t indexed as elements of T (characters share the factor structure).
The core C(N) is the left coset space of T.  The coset of (chi, t, z) is
determined by (chi, z); its index is chi * m + z and its representative
(the least element) is (chi, 0, z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import term_budget
from .errors import (
    ActionError,
    CocycleError,
    CommutatorError,
    InternalConsistencyError,
    NonCentralError,
    NotASubgroupError,
    NotHomomorphismError,
    NotInjectiveError,
    PreconditionError,
)
from .group import FiniteAbelianGroup, GroupFunction, e, make_group
from .homs import Hom, hom_from_table, quotient


class NilPattern:
    """Validated finite nil-pattern; build through ``make_nilpattern``."""

    def __init__(self, T: FiniteAbelianGroup, m: int, omega_t, omega_z):
        self.T = T
        self.m = int(m)
        nT = T.order
        self.nT = nT
        self.omega_t = np.asarray(omega_t, dtype=np.int64).reshape(nT, nT)
        self.omega_z = np.asarray(omega_z, dtype=np.int64).reshape(nT, nT) % self.m
        self.order = nT * nT * self.m
        self.core_size = nT * self.m
        # pair[chi, t] = m <chi, t> mod m
        self.pair = (T.character_angle_table * (self.m // T.exponent)) % self.m
        self.addT = T.add_table.astype(np.int64)
        self.negT = T.neg_index

    def __repr__(self):
        return f"NilPattern(T={list(self.T.factors)}, m={self.m})"

    # -- encoding -------------------------------------------------------------
    def encode(self, chi, t, z):
        return (np.asarray(chi) * self.nT + np.asarray(t)) * self.m + np.asarray(z) % self.m

    def decode(self, x):
        x = np.asarray(x, dtype=np.int64)
        z = x % self.m
        ct = x // self.m
        return ct // self.nT, ct % self.nT, z

    identity = 0

    def mul(self, x, y):
        c1, t1, z1 = self.decode(x)
        c2, t2, z2 = self.decode(y)
        c = self.addT[c1, c2]
        t = self.addT[self.addT[t1, t2], self.omega_t[c1, c2]]
        z = (z1 + z2 + self.pair[c2, t1] + self.omega_z[c1, c2]) % self.m
        return self.encode(c, t, z)

    def inv(self, x):
        c, t, z = self.decode(x)
        cn = self.negT[c]
        tn = self.negT[self.addT[t, self.omega_t[c, cn]]]
        zn = (-z - self.pair[cn, t] - self.omega_z[c, cn]) % self.m
        return self.encode(cn, tn, zn)

    def commutator(self, x, y):
        """x y x^-1 y^-1."""
        return self.mul(self.mul(x, y), self.mul(self.inv(x), self.inv(y)))

    def central(self, z):
        """Index of the central element e(z/m)."""
        return self.encode(0, 0, np.asarray(z) % self.m)

    def t_element(self, t):
        return self.encode(0, t, 0)

    def mul_table(self) -> np.ndarray:
        if self.order**2 > term_budget():
            raise PreconditionError(f"multiplication table of size {self.order}^2 exceeds budget")
        x = np.arange(self.order)
        return self.mul(x[:, None], x[None, :])

    # -- core -----------------------------------------------------------------
    def coset(self, x):
        c, _, z = self.decode(x)
        return c * self.m + z

    def coset_rep(self, c):
        c = np.asarray(c, dtype=np.int64)
        return self.encode(c // self.m, 0, c % self.m)

    def act_on_core(self, n, c):
        """Left action n . (x T) = (n x) T."""
        return self.coset(self.mul(n, self.coset_rep(c)))

    def first_degree(self, c):
        return np.asarray(c, dtype=np.int64) // self.m

    def core_z(self, c):
        return np.asarray(c, dtype=np.int64) % self.m

    def z_act_core(self, z, c):
        c = np.asarray(c, dtype=np.int64)
        return (c // self.m) * self.m + (c + np.asarray(z)) % self.m

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        coc = {}
        for i in range(self.nT):
            for j in range(self.nT):
                if self.omega_t[i, j] or self.omega_z[i, j]:
                    coc[f"({i},{j})"] = [int(self.omega_t[i, j]), int(self.omega_z[i, j])]
        return {"T": self.T.to_json(), "Zm": self.m, "cocycle": coc}


def parse_cocycle(T: FiniteAbelianGroup, obj: dict):
    nT = T.order
    wt = np.zeros((nT, nT), dtype=np.int64)
    wz = np.zeros((nT, nT), dtype=np.int64)
    for key, (ti, zi) in obj.items():
        i, j = (int(s) for s in key.strip("()").split(","))
        wt[i, j] = ti
        wz[i, j] = zi
    return wt, wz


def nilpattern_from_json(obj: dict) -> NilPattern:
    T = make_group(obj["T"])
    wt, wz = parse_cocycle(T, obj.get("cocycle", {}))
    return make_nilpattern(T, obj["Zm"], (wt, wz))


def _cocycle_defect(T, m, wt, wz, pair):
    """First (i, j, k) violating omega(i,j)^k + omega(i+j,k) = omega(j,k) + omega(i,j+k)."""
    addT = T.add_table.astype(np.int64)
    n = T.order
    i = np.arange(n)[:, None, None]
    j = np.arange(n)[None, :, None]
    k = np.arange(n)[None, None, :]
    ij = addT[i, j]
    jk = addT[j, k]
    lt = addT[wt[i, j], wt[ij, k]]
    rt = addT[wt[j, k], wt[i, jk]]
    lz = (wz[i, j] + pair[k, wt[i, j]] + wz[ij, k]) % m
    rz = (wz[j, k] + wz[i, jk]) % m
    bad = np.argwhere((lt != rt) | (lz != rz))
    return tuple(int(v) for v in bad[0]) if bad.size else None


def make_nilpattern(T: FiniteAbelianGroup, m: int, omega=None, check_commutators: str = "auto") -> NilPattern:
    """Validate a cocycle and build the nil-pattern.

    ``omega`` is a pair (omega_T, omega_Z) of (|T|, |T|) integer tables
    indexed by character indices, or None for the trivial cocycle.  A
    non-normalized cocycle is shifted by the coboundary of u = omega(0, 0):
    omega'(chi1, chi2) = omega(chi1, chi2) - u^{chi2}.

    Raises ActionError (exp(T) does not divide m), CocycleError,
    NonCentralError or CommutatorError naming the violated axiom.
    """
    m = int(m)
    if m < 1:
        raise ActionError(f"Z_m needs m >= 1, got {m}")
    if m % T.exponent:
        raise ActionError(
            f"the action (t, z)^chi = (t, z chi(t)) needs chi(t) in Z_{m}; exp(T) = {T.exponent} does not divide {m}"
        )
    nT = T.order
    if omega is None:
        wt = np.zeros((nT, nT), dtype=np.int64)
        wz = np.zeros((nT, nT), dtype=np.int64)
    else:
        wt, wz = (np.asarray(w, dtype=np.int64).reshape(nT, nT) for w in omega)
        if np.any(wt < 0) or np.any(wt >= nT):
            raise CocycleError("omega_T entries must be element indices of T")
        wz = wz % m
    pair = (T.character_angle_table * (m // T.exponent)) % m
    bad = _cocycle_defect(T, m, wt, wz, pair)
    if bad is not None:
        raise CocycleError(f"cocycle identity (associativity) fails at characters {bad}")
    u_t, u_z = int(wt[0, 0]), int(wz[0, 0])
    if u_t or u_z:
        negu = T.neg_index[u_t]
        wt = T.add_table.astype(np.int64)[wt, negu]
        wz = (wz - u_z - pair[:, u_t][None, :]) % m
        if _cocycle_defect(T, m, wt, wz, pair) is not None:
            raise InternalConsistencyError("normalization broke the cocycle identity")
    if np.any(wt[0, :]) or np.any(wt[:, 0]) or np.any(wz[0, :]) or np.any(wz[:, 0]):
        raise InternalConsistencyError("cocycle not normalized after coboundary shift")
    N = NilPattern(T, m, wt, wz)
    _validate(N, check_commutators)
    return N


def _validate(N: NilPattern, check_commutators: str) -> None:
    T = N.T
    # action of T^ on T x Z by conjugation: x^{-1} (0, t, z) x = (0, t, z + m<chi, t>)
    chi = np.arange(N.nT)[:, None, None]
    t = np.arange(N.nT)[None, :, None]
    z = np.arange(N.m)[None, None, :]
    x = N.encode(chi, 0, 0)
    h = N.encode(0, t, z)
    conj = N.mul(N.mul(N.inv(x), h), x)
    if not np.array_equal(conj, N.encode(0, t, (z + N.pair[chi, t]) % N.m)):
        raise ActionError("conjugation does not realize (t, z)^chi = (t, z chi(t))")
    # Z central
    allx = np.arange(N.order)[:, None]
    zs = N.central(np.arange(N.m))[None, :]
    if not np.array_equal(N.mul(allx, zs), N.mul(zs, allx)):
        raise NonCentralError("Z is not central")
    # N' inside Z: the T-part of a commutator is omega_T(chi1,chi2) - omega_T(chi2,chi1)
    if not np.array_equal(N.omega_t, N.omega_t.T):
        i, j = np.argwhere(N.omega_t != N.omega_t.T)[0]
        raise CommutatorError(f"commutators leave Z: omega_T is not symmetric at characters ({i}, {j})")
    if check_commutators == "exhaustive" or (check_commutators == "auto" and N.order**2 <= 10**6):
        xs = np.arange(N.order)
        for start in range(0, N.order, max(1, 10**6 // N.order)):
            blk = xs[start:start + max(1, 10**6 // N.order)][:, None]
            com = N.commutator(blk, xs[None, :])
            c, tt, _ = N.decode(com)
            if np.any(c) or np.any(tt):
                raise CommutatorError("a commutator lies outside Z")


# -- standard examples --------------------------------------------------------


def trivial_pattern(m: int) -> NilPattern:
    """|T| = 1, N = Z_m."""
    return make_nilpattern(make_group([]), m)


def split_pattern(T: FiniteAbelianGroup, m: int) -> NilPattern:
    """omega = 0: N = T^ acting on T x Z_m."""
    return make_nilpattern(T, m)


def heisenberg_pattern(p: int) -> NilPattern:
    """T = Z_p, Z = Z_p, omega_Z(chi_i, chi_j) = i j mod p; order p^3, N' = Z."""
    T = make_group([p])
    i = np.arange(p)
    return make_nilpattern(T, p, (np.zeros((p, p), dtype=np.int64), np.outer(i, i) % p))


# -- cores ---------------------------------------------------------------------


@dataclass
class Core:
    pattern: NilPattern
    size: int
    representatives: np.ndarray
    first_degree: np.ndarray

    def act(self, n, c):
        return self.pattern.act_on_core(n, c)

    def action_table(self) -> np.ndarray:
        """(|N|, |C(N)|) table of n . c."""
        N = self.pattern
        return N.act_on_core(np.arange(N.order)[:, None], np.arange(self.size)[None, :])


def core(N: NilPattern) -> Core:
    """Left cosets of T, their least representatives and the first degree map."""
    c = np.arange(N.core_size)
    return Core(N, N.core_size, N.coset_rep(c), N.first_degree(c))


# -- interpretations -------------------------------------------------------------


@dataclass
class Interpretation:
    """A nil-pattern N2 obtained from N along alpha: T -> T2.

    ``core_map[c2]`` is the image in C(N) of the coset c2 of C(N2).
    """

    source: NilPattern
    pattern: NilPattern
    alpha: Hom
    core_map: np.ndarray
    kind: str
    info: dict = field(default_factory=dict)


def pushforward(N: NilPattern, alpha: Hom, m: int | None = None) -> tuple[NilPattern, np.ndarray]:
    """The pattern of type T2 with cocycle (alpha x id) o omega o (alpha^ x alpha^).

    Returns the pattern and the core map (mu, z) -> (alpha^ mu, z).
    """
    if alpha.src != N.T:
        raise PreconditionError("alpha must start at the type group of the pattern")
    m = N.m if m is None else int(m)
    if m % N.m:
        raise PreconditionError(f"new center Z_{m} must contain Z_{N.m}")
    scale = m // N.m
    T2 = alpha.tgt
    ahat = alpha.dual().table()  # character index of T2 -> character index of T
    atab = alpha.table()
    wt = atab[N.omega_t[ahat[:, None], ahat[None, :]]]
    wz = N.omega_z[ahat[:, None], ahat[None, :]] * scale
    N2 = make_nilpattern(T2, m, (wt, wz))
    c2 = np.arange(N2.core_size)
    mu, z = c2 // m, c2 % m
    if scale == 1:
        cmap = ahat[mu] * N.m + z
    else:
        cmap = np.where(z % scale == 0, ahat[mu] * N.m + z // scale, -1)
    return N2, cmap


def widen_center(N: NilPattern, m2: int) -> tuple[NilPattern, np.ndarray]:
    """Same pattern with Z_m replaced by Z_{m2} (m | m2), z -> z m2/m.

    Returns the widened pattern and the injective core map C(N) -> C(N2).
    """
    if m2 % N.m:
        raise PreconditionError(f"Z_{N.m} does not embed in Z_{m2}")
    k = m2 // N.m
    N2 = make_nilpattern(N.T, m2, (N.omega_t, N.omega_z * k))
    c = np.arange(N.core_size)
    return N2, (c // N.m) * m2 + (c % N.m) * k


def interpret_epi(N: NilPattern, T3_idx, verify: bool = True) -> Interpretation:
    """Interpretation along the projection T -> T/T3.

    N' is the preimage of the annihilator of T3 under N -> T^; T3 is
    central in N' and N2 = N'/T3 has type T/T3.  The core map is the
    induced injection C(N2) -> C(N).
    """
    T = N.T
    sub = sorted(set(int(i) for i in T3_idx))
    if not T.is_subgroup(sub):
        raise NotASubgroupError("T3 is not a subgroup of T")
    Q, pi = quotient(T, sub)
    N2, cmap = pushforward(N, pi)
    if len(set(cmap.tolist())) != N2.core_size:
        raise InternalConsistencyError("induced core map is not injective")
    info = {}
    if verify and N.order <= 20000:
        info = _verify_epi(N, N2, pi, sub)
    return Interpretation(N, N2, pi, cmap, "epi", info)


def _verify_epi(N, N2, pi, sub):
    """Check N' -> N2, (chi, t, z) -> (alpha^-1 chi, pi t, z) is onto with kernel T3."""
    ann = N.T.annihilator(sub)
    ahat = pi.dual().table()
    back = {int(c): mu for mu, c in enumerate(ahat)}
    ptab = pi.table()
    chi, t, z = np.meshgrid(np.array(ann), np.arange(N.nT), np.arange(N.m), indexing="ij")
    Np = N.encode(chi, t, z).reshape(-1)
    c, t, z = N.decode(Np)
    img = N2.encode(np.array([back[int(v)] for v in c]), ptab[t], z)
    # T3 central in N'
    t3 = N.encode(0, np.array(sub), 0)
    if not np.array_equal(N.mul(Np[:, None], t3[None, :]), N.mul(t3[None, :], Np[:, None])):
        raise InternalConsistencyError("T3 is not central in the preimage N'")
    rng = np.random.default_rng(0)
    a = rng.choice(Np, size=min(4000, Np.size))
    b = rng.choice(Np, size=a.size)
    pos = {int(x): i for i, x in enumerate(Np)}
    ia = np.array([pos[int(x)] for x in a])
    ib = np.array([pos[int(x)] for x in b])
    ab = N.mul(a, b)
    iab = np.array([pos[int(x)] for x in ab])
    if not np.array_equal(img[iab], N2.mul(img[ia], img[ib])):
        raise InternalConsistencyError("quotient map is not a homomorphism")
    if len(set(img.tolist())) != N2.order:
        raise InternalConsistencyError("quotient map is not onto")
    if len(Np) != N2.order * len(sub):
        raise InternalConsistencyError("order bookkeeping |N'| = |N2| |T3| fails")
    return {"preimage_order": int(len(Np)), "T3_order": len(sub)}


def interpret_mono(N: NilPattern, alpha: Hom, verify: bool = True) -> Interpretation:
    """Interpretation along an injective alpha: T -> T2.

    K = N x_{T^} T2^ (subdirect product via alpha^), M = T2 x Z and
    H = T x Z embedded in both; N2 = K x_H M.  The returned pattern is the
    coordinate model of N2 and ``info`` records the structural checks:
    the map K x M -> N2, ((mu, t, z), (s, w)) -> (mu, alpha t, z)(0, s, w)
    is a homomorphism from the semidirect product with kernel {(h, h^-1)}.
    The core map C(N2) -> C(N) is onto.
    """
    if not alpha.is_injective():
        raise NotInjectiveError("alpha is not injective")
    T2 = alpha.tgt
    m = N.m
    if m % T2.exponent:
        raise PreconditionError(
            f"Z_{m} cannot carry the characters of T2 (exponent {T2.exponent}); widen the center first"
        )
    N2, cmap = pushforward(N, alpha)
    ahat = alpha.dual()
    if not ahat.is_surjective():
        raise InternalConsistencyError("dual of an injective map is not onto")
    if len(set(cmap.tolist())) != N.core_size:
        raise InternalConsistencyError("induced core map is not onto")
    info = {}
    if verify and N2.order <= 20000:
        info = _verify_mono(N, N2, alpha)
    return Interpretation(N, N2, alpha, cmap, "mono", info)


def _verify_mono(N, N2, alpha):
    T2 = alpha.tgt
    m = N.m
    atab = alpha.table()
    ahat = alpha.dual().table()
    # K = {(mu, t, z)}: the element of N is (ahat mu, t, z)
    nK = T2.order * N.nT * m
    nM = T2.order * m
    nH = N.nT * m
    rng = np.random.default_rng(1)
    size = min(3000, nK * nM)

    def k_mul(a, b):
        mu1, t1, z1 = a
        mu2, t2, z2 = b
        n = N.mul(N.encode(ahat[mu1], t1, z1), N.encode(ahat[mu2], t2, z2))
        _, t, z = N.decode(n)
        return T2.add_table[mu1, mu2].astype(np.int64), t, z

    def phi(k, mm):
        mu, t, z = k
        s, w = mm
        return N2.mul(N2.encode(mu, atab[t], z), N2.encode(0, s, w))

    def rand_k():
        return (rng.integers(0, T2.order, size), rng.integers(0, N.nT, size), rng.integers(0, m, size))

    def rand_m():
        return (rng.integers(0, T2.order, size), rng.integers(0, m, size))

    k1, k2 = rand_k(), rand_k()
    m1, m2 = rand_m(), rand_m()
    # semidirect product: (k1, m1)(k2, m2) = (k1 k2, m1^{k2} m2) with (s, w)^k = (s, w + m<tau k, s>)
    kk = k_mul(k1, k2)
    s1, w1 = m1
    s2, w2 = m2
    m1k2 = (s1, (w1 + N2.pair[k2[0], s1]) % m)
    mm = (T2.add_table[m1k2[0], s2].astype(np.int64), (m1k2[1] + w2) % m)
    lhs = N2.mul(phi(k1, m1), phi(k2, m2))
    rhs = phi(kk, mm)
    if not np.array_equal(lhs, rhs):
        raise InternalConsistencyError("K x_H M -> N2 is not a homomorphism")
    # kernel contains {(phi2(h), phi1(h)^-1)}
    tt, zz = (g.reshape(-1) for g in np.meshgrid(np.arange(N.nT), np.arange(m), indexing="ij"))
    ker = phi((np.zeros_like(tt), tt, zz), (T2.neg_index[atab[tt]], (-zz) % m))
    if np.any(ker != 0):
        raise InternalConsistencyError("amalgamation relation is not in the kernel")
    if nK * nM // nH != N2.order:
        raise InternalConsistencyError("order bookkeeping |N2| = |K||M|/|H| fails")
    return {"K_order": nK, "M_order": nM, "H_order": nH}


# -- nil-morphisms ---------------------------------------------------------------


@dataclass
class NilMorphism:
    """psi: A -> C(N) with witnesses psi(a + b) = chi_a(b) n_a psi(b).

    ``n`` holds the element index n_a; ``chi`` holds chi_a on the standard
    generators of A (as z-values in Z_m).
    """

    A: FiniteAbelianGroup
    pattern: NilPattern
    psi: np.ndarray
    n: np.ndarray
    chi: np.ndarray

    @property
    def normalized(self) -> bool:
        return int(self.psi[0]) == 0

    def chi_values(self, a: int) -> np.ndarray:
        """chi_a on every element of A."""
        return (self.A.elements @ self.chi[a]) % self.pattern.m

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "pattern": self.pattern.to_json(),
            "psi": self.psi.tolist(),
            "n": self.n.tolist(),
            "chi": self.chi.tolist(),
        }


@dataclass
class Refutation:
    a: int
    b: int
    reason: str

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "reason": self.reason}


def _hom_to_z(A: FiniteAbelianGroup, vals: np.ndarray, m: int):
    """If b -> vals[b] (mod m) is a homomorphism A -> Z_m return generator images, else first bad b."""
    gens = np.array([vals[A.index(g)] for g in A.basis()], dtype=np.int64).reshape(A.rank)
    for j, n in enumerate(A.factors):
        if (n * gens[j]) % m:
            return None, A.index(A.basis()[j])
    pred = (A.elements @ gens) % m
    bad = np.nonzero(pred != vals % m)[0]
    if bad.size:
        return None, int(bad[0])
    return gens, None


def verify_nilmorphism(A: FiniteAbelianGroup, N: NilPattern, psi) -> NilMorphism | Refutation:
    """Find witnesses (n_a, chi_a) for every a, or a failing pair (a, b).

    For each a the candidates are n in x_a T x_0^{-1} (the elements with
    n psi(0) = psi(a)); for each the map b -> z(psi(a+b)) - z(n psi(b))
    must be a homomorphism A -> Z_m.
    """
    psi = np.asarray(psi, dtype=np.int64).reshape(-1)
    if psi.shape[0] != A.order:
        raise PreconditionError("psi must be total on A")
    if np.any(psi < 0) or np.any(psi >= N.core_size):
        raise PreconditionError("psi values must be core indices")
    add = A.add_table
    x0inv = N.inv(N.coset_rep(psi[0]))
    allb = np.arange(A.order)
    ns = np.empty(A.order, dtype=np.int64)
    chis = np.empty((A.order, A.rank), dtype=np.int64)
    for a in range(A.order):
        xa = N.coset_rep(psi[a])
        cands = N.mul(N.mul(xa, N.t_element(np.arange(N.nT))), x0inv)
        target = psi[add[a, allb]]
        first_bad = None
        found = False
        for n in cands:
            moved = N.act_on_core(n, psi)
            if np.any(N.first_degree(moved) != N.first_degree(target)):
                b = int(np.nonzero(N.first_degree(moved) != N.first_degree(target))[0][0])
                return Refutation(a, b, "first degree of psi(a+b) - psi(b) depends on b")
            diff = (N.core_z(target) - N.core_z(moved)) % N.m
            gens, bad = _hom_to_z(A, diff, N.m)
            if gens is not None:
                ns[a] = n
                chis[a] = gens
                found = True
                break
            if first_bad is None:
                first_bad = bad
        if not found:
            return Refutation(a, int(first_bad), "no n_a makes b -> psi(a+b)/(n_a psi(b)) a homomorphism into Z")
    return NilMorphism(A, N, psi, ns, chis)


def check_nilmorphism(phi: NilMorphism) -> bool:
    """Re-verify stored witnesses pointwise."""
    A, N = phi.A, phi.pattern
    allb = np.arange(A.order)
    for a in range(A.order):
        moved = N.act_on_core(phi.n[a], phi.psi)
        moved = N.z_act_core(phi.chi_values(a), moved)
        if not np.array_equal(moved, phi.psi[A.add_table[a, allb]]):
            return False
    return True


def pure_quadratic_morphism(phase, m: int | None = None) -> np.ndarray:
    """Core table of A -> C(trivial pattern Z_m) for an exact phase e(num/denom)."""
    m = phase.denom if m is None else m
    if m % phase.denom:
        raise PreconditionError("Z_m must contain the phase values")
    return (phase.num * (m // phase.denom)) % m


@dataclass
class Lift:
    A: FiniteAbelianGroup
    source: NilPattern
    pattern: NilPattern
    alpha: Hom
    psi2: np.ndarray
    core_map: np.ndarray


def lift(A: FiniteAbelianGroup, N: NilPattern, psi) -> Lift:
    """Lift psi: A -> C(N) to the interpretation of N along alpha^: T -> A^.

    alpha = c o psi must be a homomorphism A -> T^.  The lifted map is
    psi2(a) = (a, z(psi(a))); it satisfies g o psi2 = psi for the core map
    g(a, z) = (alpha(a), z) and its first degree map is the identity of A.
    Requires exp(A) | m (use ``widen_center`` first otherwise).
    """
    psi = np.asarray(psi, dtype=np.int64).reshape(-1)
    if psi.shape[0] != A.order:
        raise PreconditionError("psi must be total on A")
    alpha = hom_from_table(A, N.T, N.first_degree(psi))
    if alpha is None:
        raise NotHomomorphismError("c o psi is not a homomorphism A -> T^")
    if N.m % A.exponent:
        raise PreconditionError(f"Z_{N.m} cannot carry characters of A (exponent {A.exponent}); widen the center")
    ahat = alpha.dual()  # T -> A^
    N2, cmap = pushforward(N, ahat)
    psi2 = np.arange(A.order) * N2.m + N.core_z(psi)
    if not np.array_equal(cmap[psi2], psi):
        raise InternalConsistencyError("lift does not project back to psi")
    return Lift(A, N, N2, alpha, psi2, cmap)


@dataclass
class SplitCertificate:
    A: FiniteAbelianGroup
    pattern: NilPattern
    phi3: np.ndarray
    lift: Lift
    morphism: NilMorphism
    checks: dict

    def components(self):
        """phi3(a) as (a, xi_a, c_a) triples."""
        c, t, z = self.pattern.decode(self.phi3)
        return [(self.A.element(int(ci)), self.A.element(int(ti)), int(zi)) for ci, ti, zi in zip(c, t, z)]


def split_hom(A: FiniteAbelianGroup, N: NilPattern, psi) -> SplitCertificate:
    """Homomorphism phi3: A -> N2 with N2 -> A the identity on its image and
    N2 -> C(N2) -> C(N) equal to psi.

    t_a = l_a n_a where n_a is the witness for the lift psi2 and l_a is the
    element (0, xi_a, -lambda_a(a)) of A^ x Z representing chi_a.
    """
    psi = np.asarray(psi, dtype=np.int64).reshape(-1)
    if int(psi[0]) != 0:
        raise PreconditionError("split_hom needs a normalized nil-morphism (psi(0) = identity coset)")
    pre = verify_nilmorphism(A, N, psi)
    if isinstance(pre, Refutation):
        raise PreconditionError(f"psi is not a nil-morphism: {pre}")
    L = lift(A, N, psi)
    N2 = L.pattern
    phi2 = verify_nilmorphism(A, N2, L.psi2)
    if isinstance(phi2, Refutation):
        raise InternalConsistencyError(f"lift is not a nil-morphism: {phi2}")
    m = N2.m
    t = np.empty(A.order, dtype=np.int64)
    for a in range(A.order):
        lam = phi2.chi[a]
        xi = []
        for j, n in enumerate(A.factors):
            v = int(lam[j]) * n
            if v % m:
                raise InternalConsistencyError("chi_a is not representable by a character of A")
            xi.append(v // m)
        lam_a = int(A.elements[a] @ lam) % m
        la = N2.encode(0, A.index(xi), (-lam_a) % m)
        t[a] = N2.mul(la, phi2.n[a])
    checks = _check_split(A, N2, t, L, psi)
    return SplitCertificate(A, N2, t, L, phi2, checks)


def _check_split(A, N2, t, L, psi) -> dict:
    add = A.add_table
    a = np.arange(A.order)
    hom = np.array_equal(N2.mul(t[:, None], t[None, :]), t[add[a[:, None], a[None, :]]])
    proj = np.array_equal(N2.decode(t)[0], a)
    corem = np.array_equal(L.core_map[N2.coset(t)], psi)
    out = {"homomorphism": bool(hom), "section": bool(proj), "core_map": bool(corem)}
    if not all(out.values()):
        raise InternalConsistencyError(f"split certificate fails: {out}")
    return out


# -- circular functions ---------------------------------------------------------


def canonical_circular(N: NilPattern) -> np.ndarray:
    """f((chi, z) T) = e(z / m): circular with respect to the representatives (chi, 0, 0)."""
    return e(N.core_z(np.arange(N.core_size)) / N.m)


def is_circular(N: NilPattern, phi, tol: float = 1e-9) -> bool:
    phi = np.asarray(phi, dtype=complex)
    c = np.arange(N.core_size)
    for z in range(N.m):
        if np.max(np.abs(phi[N.z_act_core(z, c)] - e(z / N.m) * phi)) > tol:
            return False
    return True


def circular_decompose(N: NilPattern, f, phi=None, tol: float = 1e-9) -> np.ndarray:
    """Components f_i (i = 0..m-1, rows) with f = sum_i phi^i f_i and each f_i Z-invariant.

    f_i(x) = (1/m) sum_z f(z x) conj(phi(z x))^i.
    """
    f = np.asarray(f, dtype=complex).reshape(-1)
    if f.shape[0] != N.core_size:
        raise PreconditionError("f must be a function on the core")
    phi = canonical_circular(N) if phi is None else np.asarray(phi, dtype=complex)
    if np.max(np.abs(np.abs(phi) - 1)) > tol or not is_circular(N, phi, tol):
        raise PreconditionError("reference function is not a unimodular circular function")
    c = np.arange(N.core_size)
    comps = np.zeros((N.m, N.core_size), dtype=complex)
    for z in range(N.m):
        zc = N.z_act_core(z, c)
        fz = f[zc]
        pz = np.conj(phi[zc])
        for i in range(N.m):
            comps[i] += fz * pz**i
    return comps / N.m


def circular_reconstruct(N: NilPattern, comps, phi=None) -> np.ndarray:
    phi = canonical_circular(N) if phi is None else np.asarray(phi, dtype=complex)
    return sum(phi**i * comps[i] for i in range(comps.shape[0]))


# -- the 2-step model A x| (A^ x Z) ------------------------------------------------


def shift_modulation_model(A: FiniteAbelianGroup, m: int) -> NilPattern:
    """A x| (A^ x Z_{m'}) with (c, chi)^a = (c chi(a), chi), m' = lcm(m, exp A).

    Built as the interpretation of the trivial pattern Z_{m'} along the zero
    map into A^: elements (a, xi, z), a in A (= characters of A^).
    """
    mm = math.lcm(int(m), A.exponent)
    Nt = trivial_pattern(mm)
    alpha = Hom.zero(Nt.T, A)
    N2, _ = pushforward(Nt, alpha)
    return N2


def triple_commutators_trivial(N: NilPattern, block: int = 64) -> bool:
    """[[g1, g2], g3] = 1 for all triples (exhaustive)."""
    xs = np.arange(N.order)
    for s in range(0, N.order, block):
        g1 = xs[s:s + block][:, None]
        c12 = N.commutator(g1, xs[None, :]).reshape(-1)
        uniq = np.unique(c12)
        if np.any(N.commutator(uniq[:, None], xs[None, :]) != N.identity):
            return False
    return True


def is_abelian(N: NilPattern) -> bool:
    xs = np.arange(N.order)
    for s in range(0, N.order, 256):
        blk = xs[s:s + 256, None]
        if not np.array_equal(N.mul(blk, xs[None, :]), N.mul(xs[None, :], blk)):
            return False
    return True
