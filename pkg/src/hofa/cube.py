"""Faces of the discrete cube {0,1}^d and the labeling groups B_{d,k}.

Subsets of [d] = {1..d} are bitmasks (bit i-1 <-> i).  A face
Lambda(F, K) with F, K disjoint has members {S | K : S subset of F} and
dimension |F|.  A labeling h assigns an element of an abelian group A to
each of the 2^d subsets; A is written additively, so the "product" over a
face is a sum and a^{-1} is -a.

B_{d,k} is the set of labelings whose sum over every (d-k+1)-dimensional
face vanishes.  It is generated by the labelings g(Lambda, a) with
dim Lambda = k, g(S) = (-1)^{|S|} a on Lambda and 0 elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator

import numpy as np

from .errors import (
    IncompleteSystemError,
    InternalConsistencyError,
    InvalidDimensionError,
)
from .group import FiniteAbelianGroup


def popcount(s: int) -> int:
    return bin(s).count("1")


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` in increasing numeric order."""
    bits = [b for b in range(mask.bit_length()) if (mask >> b) & 1]
    for r in range(1 << len(bits)):
        yield sum(1 << bits[j] for j in range(len(bits)) if (r >> j) & 1)


def mask_of(subset) -> int:
    """{1, 3} -> 0b101."""
    return sum(1 << (i - 1) for i in subset)


def subset_of(mask: int) -> list[int]:
    return [b + 1 for b in range(mask.bit_length()) if (mask >> b) & 1]


@dataclass(frozen=True, order=True)
class Face:
    F: int
    K: int

    def __post_init__(self):
        if self.F & self.K:
            raise InvalidDimensionError(f"face needs disjoint F and K, got {self.F:b}, {self.K:b}")

    @property
    def dim(self) -> int:
        return popcount(self.F)

    def members(self) -> list[int]:
        return sorted(s | self.K for s in submasks(self.F))

    def __contains__(self, S: int) -> bool:
        return (S & ~self.F) == self.K


def enumerate_faces(d: int, n: int) -> list[Face]:
    """All n-dimensional faces of the d-cube, sorted by (F, K)."""
    if d < 0 or not 0 <= n <= d:
        raise InvalidDimensionError(f"need 0 <= n <= d, got n={n}, d={d}")
    full = (1 << d) - 1
    out = []
    for cols in combinations(range(d), n):
        F = sum(1 << c for c in cols)
        for K in submasks(full & ~F):
            out.append(Face(F, K))
    return sorted(out)


def psi_S(S: int, point, group: FiniteAbelianGroup) -> tuple[int, ...]:
    """psi_S(x, t_1..t_d) = x + sum_{i in S} t_i, point = (x, t_1, ..., t_d)."""
    acc = tuple(point[0])
    for i in subset_of(S):
        acc = group.add(acc, point[i])
    return acc


def eval_face_product(system, face: Face, point, group: FiniteAbelianGroup) -> complex:
    """prod_{S in face} f_S(psi_S(point)).

    ``system`` maps bitmasks to GroupFunctions (a dict, or anything
    indexable such as a FunctionSystem).
    """
    out = 1.0 + 0j
    for S in face.members():
        try:
            f = system[S]
        except (KeyError, IndexError):
            raise IncompleteSystemError(f"system has no entry for subset {subset_of(S)}") from None
        out *= f.values[group.index(psi_S(S, point, group))]
    return complex(out)


# -- labelings -------------------------------------------------------------


class CubeLabeling:
    """h: subsets of [d] -> A, stored as a (2^d, rank) array of element vectors."""

    def __init__(self, group: FiniteAbelianGroup, d: int, table):
        tab = np.asarray(table, dtype=np.int64).reshape(1 << d, group.rank)
        self.group = group
        self.d = d
        self.table = tab % np.array(group.factors, dtype=np.int64) if group.rank else tab

    @classmethod
    def zero(cls, group, d):
        return cls(group, d, np.zeros((1 << d, group.rank), dtype=np.int64))

    @classmethod
    def from_indices(cls, group, d, idx):
        return cls(group, d, group.elements[np.asarray(idx, dtype=np.int64)])

    def indices(self) -> np.ndarray:
        return self.group.indices_of(self.table)

    def __getitem__(self, S: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.table[S])

    def __add__(self, other):
        return CubeLabeling(self.group, self.d, self.table + other.table)

    def __sub__(self, other):
        return CubeLabeling(self.group, self.d, self.table - other.table)

    def __neg__(self):
        return CubeLabeling(self.group, self.d, -self.table)

    def __eq__(self, other):
        return (
            isinstance(other, CubeLabeling)
            and self.d == other.d
            and self.group == other.group
            and np.array_equal(self.table, other.table)
        )

    def is_zero(self) -> bool:
        return not self.table.any()

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "d": self.d, "values": self.table.tolist()}


def face_sum(h: CubeLabeling, face: Face) -> tuple[int, ...]:
    s = h.table[face.members()].sum(axis=0)
    return tuple(int(x) % n for x, n in zip(s, h.group.factors))


def bdk_membership(h: CubeLabeling, k: int) -> bool:
    """True iff h sums to 0 over every (d-k+1)-dimensional face."""
    d = h.d
    if not 1 <= k <= d:
        raise InvalidDimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    return all(not any(face_sum(h, f)) for f in enumerate_faces(d, d - k + 1))


def bdk_generator(face: Face, a, d: int, group: FiniteAbelianGroup, k: int | None = None) -> CubeLabeling:
    """g(face, a): (-1)^{|S|} a on the face, 0 elsewhere."""
    if k is not None and face.dim != k:
        raise InvalidDimensionError(f"generator for B_(d,{k}) needs a {k}-dimensional face, got {face.dim}")
    if (face.F | face.K) >> d:
        raise InvalidDimensionError(f"face does not fit in the {d}-cube")
    a = np.asarray(a, dtype=np.int64).reshape(group.rank)
    tab = np.zeros((1 << d, group.rank), dtype=np.int64)
    for S in face.members():
        tab[S] = a if popcount(S) % 2 == 0 else -a
    return CubeLabeling(group, d, tab)


def recompose(factors, d: int, group: FiniteAbelianGroup) -> CubeLabeling:
    out = CubeLabeling.zero(group, d)
    for face, a in factors:
        out = out + bdk_generator(face, a, d, group)
    return out


def _decompose(vals: dict, coords: list[int], k: int, group: FiniteAbelianGroup):
    """Factor a labeling of the subcube P(coords) into k-face generators.

    ``vals`` maps each subset of ``coords`` (bitmask) to an element vector.
    Faces and signs are relative to the subcube.
    """
    d = len(coords)
    mods = np.array(group.factors, dtype=np.int64)
    if k == d + 1:
        # condition on 0-dimensional faces: h must vanish
        if any(np.any(v % mods) for v in vals.values()):
            raise InternalConsistencyError("non-zero remainder where the face conditions force zero")
        return []
    if k == 0:
        out = []
        for S, v in sorted(vals.items()):
            v = v % mods
            if v.any():
                sign = 1 if popcount(S) % 2 == 0 else -1
                out.append((Face(0, S), (sign * v) % mods))
        return out
    i = coords[0]
    rest = coords[1:]
    bit = 1 << i
    rest_mask = sum(1 << c for c in rest)
    # restriction to sets containing i lies in B_{d-1,k-1}
    top = {S: vals[S | bit] for S in submasks(rest_mask)}
    factors = []
    for face, a in _decompose(top, rest, k - 1, group):
        factors.append((Face(face.F | bit, face.K), (-a) % mods))
    cur = {S: v.copy() for S, v in vals.items()}
    for face, a in factors:
        for S in face.members():
            cur[S] = cur[S] - (a if popcount(S) % 2 == 0 else -a)
    for S in submasks(rest_mask):
        if np.any(cur[S | bit] % mods):
            raise InternalConsistencyError("top half did not cancel")
    # remainder lives on sets avoiding i and lies in B_{d-1,k}
    bottom = {S: cur[S] for S in submasks(rest_mask)}
    factors.extend(_decompose(bottom, rest, k, group))
    return factors


def bdk_decompose(h: CubeLabeling, k: int):
    """Generators (face, a) summing to h, or None if h is not in B_{d,k}.

    Follows the induction on d: with i the smallest free coordinate, the
    restriction of h to sets containing i lies in B_{d-1,k-1}; its
    factors, lifted along i with inverted element, cancel that half, and
    the remainder lies in B_{d-1,k} on the sets avoiding i.
    """
    d = h.d
    if not 1 <= k <= d:
        raise InvalidDimensionError(f"need 1 <= k <= d, got k={k}, d={d}")
    if not bdk_membership(h, k):
        return None
    vals = {S: h.table[S].copy() for S in range(1 << d)}
    factors = _decompose(vals, list(range(d)), k, h.group)
    factors = [(f, tuple(int(x) for x in a)) for f, a in factors]
    if recompose(factors, d, h.group) != h:
        raise InternalConsistencyError("factorization does not recompose")
    return factors


# -- exhaustive enumeration -------------------------------------------------


def _encode(idx: np.ndarray, n: int) -> np.ndarray:
    """Labelings given by element indices (N, 2^d) -> integer codes."""
    m = idx.shape[-1]
    w = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return idx.astype(np.int64) @ w


def all_labelings(group: FiniteAbelianGroup, d: int) -> np.ndarray:
    """(|A|^{2^d}, 2^d) element indices, row = code in base |A|."""
    n = group.order
    m = 1 << d
    total = n**m
    codes = np.arange(total, dtype=np.int64)
    out = np.empty((total, m), dtype=np.int64)
    for j in range(m - 1, -1, -1):
        out[:, j] = codes % n
        codes //= n
    return out


def member_codes(group: FiniteAbelianGroup, d: int, k: int) -> np.ndarray:
    """Codes of all labelings satisfying the face conditions (exhaustive filter)."""
    labs = all_labelings(group, d)
    el = group.elements
    vecs = el[labs]  # (N, 2^d, rank)
    ok = np.ones(labs.shape[0], dtype=bool)
    mods = np.array(group.factors, dtype=np.int64)
    for face in enumerate_faces(d, d - k + 1):
        s = vecs[:, face.members(), :].sum(axis=1) % mods
        ok &= ~s.any(axis=1)
    return np.sort(_encode(labs[ok], group.order))


def closure_codes(group: FiniteAbelianGroup, d: int, k: int) -> np.ndarray:
    """Codes of the subgroup generated by all g(Lambda, a), dim Lambda = k (BFS)."""
    n = group.order
    gens = []
    for face in enumerate_faces(d, k):
        for a in group.basis():
            gens.append(bdk_generator(face, a, d, group).table)
    zero = np.zeros((1, 1 << d, group.rank), dtype=np.int64)
    seen = {0}
    frontier = zero
    while frontier.shape[0]:
        new = []
        for g in gens:
            cand = frontier + g[None]
            codes = _encode(group.indices_of(cand), n)
            for c, row in zip(codes.tolist(), cand):
                if c not in seen:
                    seen.add(c)
                    new.append(row)
        frontier = np.array(new, dtype=np.int64).reshape(-1, 1 << d, group.rank)
    return np.array(sorted(seen), dtype=np.int64)


def labeling_from_code(code: int, group: FiniteAbelianGroup, d: int) -> CubeLabeling:
    m = 1 << d
    idx = []
    for _ in range(m):
        idx.append(code % group.order)
        code //= group.order
    return CubeLabeling.from_indices(group, d, idx[::-1])


# -- automorphisms -----------------------------------------------------------


@dataclass(frozen=True)
class CubeAutomorphism:
    """S -> pi(S) xor K; ``perm[j]`` is the image of coordinate j+1 (0-based)."""

    perm: tuple[int, ...]
    flip: int = 0

    @property
    def d(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, d: int):
        return cls(tuple(range(d)), 0)

    def permute(self, S: int) -> int:
        return sum(1 << self.perm[b] for b in range(self.d) if (S >> b) & 1)

    def __call__(self, S: int) -> int:
        return self.permute(S) ^ self.flip

    def compose(self, other: "CubeAutomorphism") -> "CubeAutomorphism":
        """self after other."""
        perm = tuple(self.perm[other.perm[j]] for j in range(self.d))
        return CubeAutomorphism(perm, self.permute(other.flip) ^ self.flip)

    def inverse(self) -> "CubeAutomorphism":
        inv = [0] * self.d
        for j, p in enumerate(self.perm):
            inv[p] = j
        invp = CubeAutomorphism(tuple(inv), 0)
        return CubeAutomorphism(tuple(inv), invp.permute(self.flip))


def all_automorphisms(d: int) -> list[CubeAutomorphism]:
    return [CubeAutomorphism(p, K) for p in permutations(range(d)) for K in range(1 << d)]


def apply_cube_automorphism(sigma: CubeAutomorphism, h: CubeLabeling) -> CubeLabeling:
    """(sigma . h)(S) = h(sigma^{-1}(S))."""
    if sigma.d != h.d:
        raise InvalidDimensionError(f"automorphism of the {sigma.d}-cube applied to a {h.d}-cube labeling")
    inv = sigma.inverse()
    return CubeLabeling(h.group, h.d, h.table[[inv(S) for S in range(1 << h.d)]])
