"""Homomorphisms between finite abelian groups and quotients T / T3.

A homomorphism Z_{n_1} x ... x Z_{n_r} -> B is stored as the images of
the standard generators (an (r, rank B) integer matrix).
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import NotASubgroupError, NotHomomorphismError
from .group import FiniteAbelianGroup, make_group


class Hom:
    def __init__(self, src: FiniteAbelianGroup, tgt: FiniteAbelianGroup, images):
        img = np.asarray(images, dtype=np.int64).reshape(src.rank, tgt.rank)
        mods = np.array(tgt.factors, dtype=np.int64)
        if tgt.rank:
            img = img % mods
        for j, n in enumerate(src.factors):
            if tgt.rank and np.any((n * img[j]) % mods):
                raise NotHomomorphismError(
                    f"generator {j} has order dividing {n} but its image {tuple(img[j])} does not"
                )
        self.src = src
        self.tgt = tgt
        self.images = img

    def __repr__(self):
        return f"Hom({self.src!r} -> {self.tgt!r}, {self.images.tolist()})"

    @classmethod
    def zero(cls, src, tgt):
        return cls(src, tgt, np.zeros((src.rank, tgt.rank), dtype=np.int64))

    @classmethod
    def identity(cls, g):
        return cls(g, g, np.eye(g.rank, dtype=np.int64))

    def apply_vecs(self, vecs) -> np.ndarray:
        vecs = np.asarray(vecs, dtype=np.int64)
        out = vecs @ self.images
        if self.tgt.rank:
            out = out % np.array(self.tgt.factors, dtype=np.int64)
        return out

    def __call__(self, a) -> tuple[int, ...]:
        return tuple(int(x) for x in self.apply_vecs(np.asarray(a).reshape(1, -1))[0])

    def table(self) -> np.ndarray:
        """Target index of the image of every source element."""
        return self.tgt.indices_of(self.apply_vecs(self.src.elements))

    def is_injective(self) -> bool:
        return len(set(self.table().tolist())) == self.src.order

    def is_surjective(self) -> bool:
        return len(set(self.table().tolist())) == self.tgt.order

    def kernel(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.table() == 0)[0]]

    def image(self) -> list[int]:
        return sorted(set(self.table().tolist()))

    def dual(self) -> "Hom":
        """chi -> chi o self, as a map from characters of tgt to characters of src.

        Characters are frequency vectors; <chi, b> = sum chi_i b_i / n_i.
        """
        img = np.zeros((self.tgt.rank, self.src.rank), dtype=np.int64)
        for i, ni in enumerate(self.tgt.factors):
            for j, nj in enumerate(self.src.factors):
                val = Fraction(int(self.images[j, i]), ni) * nj
                if val.denominator != 1:
                    raise NotHomomorphismError("dual map is not integral; not a homomorphism")
                img[i, j] = int(val) % nj
        return Hom(self.tgt, self.src, img)

    def compose(self, first: "Hom") -> "Hom":
        """self after first."""
        return Hom(first.src, self.tgt, self.apply_vecs(first.images))


def hom_from_table(src: FiniteAbelianGroup, tgt: FiniteAbelianGroup, table) -> Hom | None:
    """The homomorphism with the given index table, or None if the table is not one."""
    table = np.asarray(table, dtype=np.int64)
    imgs = np.array([tgt.element(int(table[src.index(b)])) for b in src.basis()], dtype=np.int64)
    try:
        h = Hom(src, tgt, imgs.reshape(src.rank, tgt.rank))
    except NotHomomorphismError:
        return None
    return h if np.array_equal(h.table(), table) else None


def quotient(T: FiniteAbelianGroup, sub_idx) -> tuple[FiniteAbelianGroup, Hom]:
    """T / T3 as a product of cyclic groups, with the projection.

    Uses the Smith normal form of the relation matrix [diag(n) | T3 gens].
    Factors equal to 1 are dropped.
    """
    sub = sorted(set(int(i) for i in sub_idx))
    if not T.is_subgroup(sub):
        raise NotASubgroupError("T3 is not a subgroup")
    r = T.rank
    if r == 0:
        return make_group([]), Hom(T, make_group([]), np.zeros((0, 0)))
    cols = [[T.factors[j] if i == j else 0 for i in range(r)] for j in range(r)]
    cols += [list(T.element(i)) for i in sub if i]
    R = Matrix(cols).T  # r x (r + g)
    D, U, _ = smith_normal_decomp(R)
    diag = [abs(int(D[i, i])) if i < min(D.shape) else 0 for i in range(r)]
    keep = [i for i in range(r) if diag[i] != 1]
    if any(diag[i] == 0 for i in keep):
        raise NotASubgroupError("relation matrix is degenerate")
    Q = make_group([diag[i] for i in keep])
    Uarr = np.array(U.tolist(), dtype=np.int64)
    images = np.zeros((r, len(keep)), dtype=np.int64)
    for j in range(r):
        for qi, i in enumerate(keep):
            images[j, qi] = Uarr[i, j]
    pi = Hom(T, Q, images)
    if sorted(pi.kernel()) != sub or not pi.is_surjective():
        raise NotASubgroupError("quotient map construction failed")
    return Q, pi
