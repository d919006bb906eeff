"""Finite abelian groups, characters, and functions on them.

A group is a product of cyclic factors Z_{n_1} x ... x Z_{n_r}.  Elements
are integer vectors and are indexed in mixed-radix row-major order (last
factor fastest), so index(a) = sum a_j * stride_j.

Characters are indexed by frequency vectors of the same shape; the value
of the character m at a is e(sum m_j a_j / n_j) where e(x) = exp(2 pi i x).
Exact character values are stored as integer angles modulo the exponent
L = lcm(n_j): angle(m, a) = sum m_j a_j (L / n_j) mod L.
"""
from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidGroupError, InvalidThresholdError, NotASubgroupError

TWO_PI = 2.0 * np.pi


def e(x):
    """exp(2 pi i x), vectorized."""
    return np.exp(1j * TWO_PI * np.asarray(x, dtype=float))


class FiniteAbelianGroup:
    """Z_{n_1} x ... x Z_{n_r} with mixed-radix element indexing."""

    def __init__(self, factors: Iterable[int]):
        fs = []
        for n in factors:
            if isinstance(n, bool) or int(n) != n or int(n) < 1:
                raise InvalidGroupError(f"cyclic factor must be a positive integer, got {n!r}")
            fs.append(int(n))
        self.factors: tuple[int, ...] = tuple(fs)
        self.rank = len(fs)
        self.order = math.prod(fs)
        self.exponent = math.lcm(*fs) if fs else 1
        strides = [1] * self.rank
        for j in range(self.rank - 2, -1, -1):
            strides[j] = strides[j + 1] * fs[j + 1]
        self.strides: tuple[int, ...] = tuple(strides)

    def __repr__(self):
        return f"FiniteAbelianGroup({list(self.factors)})"

    def __eq__(self, other):
        return isinstance(other, FiniteAbelianGroup) and self.factors == other.factors

    def __hash__(self):
        return hash(("FiniteAbelianGroup", self.factors))

    def __len__(self):
        return self.order

    # -- element <-> index ------------------------------------------------
    def index(self, a: Sequence[int]) -> int:
        if len(a) != self.rank:
            raise InvalidGroupError(f"element {tuple(a)} has wrong length for {self}")
        return int(sum((int(x) % n) * s for x, n, s in zip(a, self.factors, self.strides)))

    def element(self, i: int) -> tuple[int, ...]:
        i = int(i)
        if not 0 <= i < self.order:
            raise InvalidGroupError(f"index {i} out of range for {self}")
        return tuple((i // s) % n for n, s in zip(self.factors, self.strides))

    @cached_property
    def elements(self) -> np.ndarray:
        """(order, rank) int64 array of element vectors in index order."""
        if self.rank == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.factors).reshape(self.rank, -1)
        return np.ascontiguousarray(grids.T.astype(np.int64))

    def indices_of(self, vecs: np.ndarray) -> np.ndarray:
        """Vectorized index() for an (..., rank) integer array."""
        vecs = np.asarray(vecs, dtype=np.int64)
        if self.rank == 0:
            return np.zeros(vecs.shape[:-1], dtype=np.int64)
        out = np.zeros(vecs.shape[:-1], dtype=np.int64)
        for j, (n, s) in enumerate(zip(self.factors, self.strides)):
            out += (vecs[..., j] % n) * s
        return out

    # -- arithmetic ---------------------------------------------------------
    def add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % n for x, y, n in zip(a, b, self.factors))

    def neg(self, a) -> tuple[int, ...]:
        return tuple((-x) % n for x, n in zip(a, self.factors))

    def sub(self, a, b) -> tuple[int, ...]:
        return tuple((x - y) % n for x, y, n in zip(a, b, self.factors))

    def scale(self, c: int, a) -> tuple[int, ...]:
        return tuple((c * x) % n for x, n in zip(a, self.factors))

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def basis(self) -> list[tuple[int, ...]]:
        """Standard generators e_j (one per factor, including trivial factors)."""
        out = []
        for j in range(self.rank):
            v = [0] * self.rank
            v[j] = 1 % self.factors[j]
            out.append(tuple(v))
        return out

    @cached_property
    def add_table(self) -> np.ndarray:
        """(order, order) int32 table of index(a + b)."""
        el = self.elements
        s = el[:, None, :] + el[None, :, :]
        return self.indices_of(s).astype(np.int32)

    @cached_property
    def neg_index(self) -> np.ndarray:
        return self.indices_of(-self.elements).astype(np.int64)

    def add_index(self, i: np.ndarray | int, j: np.ndarray | int) -> np.ndarray:
        """index(a_i + a_j) computed without materializing the full table."""
        el = self.elements
        return self.indices_of(el[np.asarray(i)] + el[np.asarray(j)])

    def element_order(self, a) -> int:
        o = 1
        for x, n in zip(a, self.factors):
            o = math.lcm(o, n // math.gcd(x % n, n))
        return o

    # -- characters ---------------------------------------------------------
    @property
    def dual(self) -> "FiniteAbelianGroup":
        """The character group; same factors, indexed by frequency vectors."""
        return self

    @cached_property
    def _weights(self) -> np.ndarray:
        return np.array([self.exponent // n for n in self.factors], dtype=np.int64)

    def pairing(self, chi, a) -> int:
        """Exact angle numerator of chi(a), modulo the exponent."""
        L = self.exponent
        return int(sum(int(m) * int(x) * (L // n) for m, x, n in zip(chi, a, self.factors)) % L)

    def character_angles(self, chi) -> np.ndarray:
        """Exact angle numerators (mod exponent) of the character chi on all elements."""
        chi = np.asarray(chi, dtype=np.int64).reshape(self.rank)
        return (self.elements @ (chi * self._weights)) % self.exponent

    def character(self, chi) -> "GroupFunction":
        return GroupFunction(self, e(self.character_angles(chi) / self.exponent))

    @cached_property
    def character_angle_table(self) -> np.ndarray:
        """(order, order) exact angle table: row = character index, column = element."""
        el = self.elements
        return ((el * self._weights) @ el.T) % self.exponent

    def is_subgroup(self, idx: Iterable[int]) -> bool:
        s = set(int(i) for i in idx)
        if 0 not in s:
            return False
        for i in s:
            for j in s:
                if int(self.add_index(i, j)) not in s:
                    return False
        return True

    def generated_subgroup(self, gens: Iterable[Sequence[int]]) -> list[int]:
        """Sorted element indices of the subgroup generated by gens."""
        seen = {0}
        frontier = [0]
        gidx = [self.index(g) for g in gens]
        while frontier:
            nxt = []
            for i in frontier:
                for g in gidx:
                    k = int(self.add_index(i, g))
                    if k not in seen:
                        seen.add(k)
                        nxt.append(k)
            frontier = nxt
        return sorted(seen)

    def annihilator(self, sub_idx: Iterable[int]) -> list[int]:
        """Indices of characters trivial on the given subgroup."""
        sub = list(sub_idx)
        if not self.is_subgroup(sub):
            raise NotASubgroupError("annihilator requires a subgroup")
        tab = self.character_angle_table[:, sub]
        return [int(i) for i in np.nonzero(np.all(tab == 0, axis=1))[0]]

    # -- JSON --------------------------------------------------------------
    def to_json(self) -> list[int]:
        return list(self.factors)


def make_group(factors: Iterable[int]) -> FiniteAbelianGroup:
    """Build Z_{n_1} x ... x Z_{n_r}; every factor must be >= 1."""
    return FiniteAbelianGroup(factors)


class GroupFunction:
    """Complex-valued function on a finite abelian group.

    Inner products are expectation normalized: <f, g> = E_x f(x) conj(g(x)).
    """

    __slots__ = ("group", "values")

    def __init__(self, group: FiniteAbelianGroup, values):
        v = np.asarray(values, dtype=complex).reshape(-1)
        if v.shape[0] != group.order:
            raise InvalidGroupError(f"expected {group.order} values, got {v.shape[0]}")
        self.group = group
        self.values = v

    def __repr__(self):
        return f"GroupFunction({self.group!r}, ...)"

    @classmethod
    def constant(cls, group, c=1.0):
        return cls(group, np.full(group.order, c, dtype=complex))

    @classmethod
    def indicator(cls, group, elems):
        v = np.zeros(group.order, dtype=complex)
        for a in elems:
            v[group.index(a) if not isinstance(a, (int, np.integer)) else int(a)] = 1.0
        return cls(group, v)

    def _check(self, other):
        if other.group != self.group:
            raise InvalidGroupError("functions live on different groups")

    def __add__(self, other):
        if isinstance(other, GroupFunction):
            self._check(other)
            return GroupFunction(self.group, self.values + other.values)
        return GroupFunction(self.group, self.values + other)

    def __sub__(self, other):
        if isinstance(other, GroupFunction):
            self._check(other)
            return GroupFunction(self.group, self.values - other.values)
        return GroupFunction(self.group, self.values - other)

    def __mul__(self, other):
        if isinstance(other, GroupFunction):
            self._check(other)
            return GroupFunction(self.group, self.values * other.values)
        return GroupFunction(self.group, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return GroupFunction(self.group, -self.values)

    def conj(self) -> "GroupFunction":
        return GroupFunction(self.group, np.conj(self.values))

    def shift(self, t) -> "GroupFunction":
        """x -> f(x + t)."""
        ti = t if isinstance(t, (int, np.integer)) else self.group.index(t)
        idx = self.group.add_index(np.arange(self.group.order), int(ti))
        return GroupFunction(self.group, self.values[idx])

    def reflect(self) -> "GroupFunction":
        """x -> f(-x)."""
        return GroupFunction(self.group, self.values[self.group.neg_index])

    def mean(self) -> complex:
        return complex(self.values.mean())

    def inner(self, other: "GroupFunction") -> complex:
        self._check(other)
        return complex(np.vdot(other.values, self.values) / self.group.order)

    def norm2(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def allclose(self, other, tol=1e-9) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.values - other.values)) <= tol)

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "values": [[float(z.real), float(z.imag)] for z in self.values],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GroupFunction":
        g = make_group(obj["group"])
        vals = np.array([complex(re, im) for re, im in obj["values"]], dtype=complex)
        return cls(g, vals)


def fourier_transform(f: GroupFunction) -> np.ndarray:
    """Coefficients fhat(chi) = <f, chi>, indexed like group elements."""
    g = f.group
    if g.rank == 0:
        return f.values.copy()
    arr = f.values.reshape(g.factors)
    return (np.fft.fftn(arr) / g.order).reshape(-1)


def inverse_fourier_transform(group: FiniteAbelianGroup, coeffs) -> GroupFunction:
    """f(x) = sum_chi fhat(chi) chi(x)."""
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    if group.rank == 0:
        return GroupFunction(group, c.copy())
    arr = c.reshape(group.factors)
    return GroupFunction(group, (np.fft.ifftn(arr) * group.order).reshape(-1))


def dominant_spectrum(f: GroupFunction, tau: float) -> list[tuple[tuple[int, ...], complex]]:
    """Characters with |fhat(chi)| >= tau, by decreasing magnitude.

    Ties (magnitudes equal to 12 decimal places) are broken by the
    lexicographically smaller frequency vector.
    """
    if not tau > 0:
        raise InvalidThresholdError(f"threshold must be positive, got {tau}")
    fh = fourier_transform(f)
    mags = np.abs(fh)
    keep = np.nonzero(mags >= tau * (1 - 1e-12))[0]
    # index order is lexicographic order of frequency vectors
    keyed = sorted(keep, key=lambda i: (-round(float(mags[i]), 12), int(i)))
    return [(f.group.element(int(i)), complex(fh[i])) for i in keyed]
