"""Degree-d phase functions, Leibman polynomial maps, quadratic phases.

Exact phases are stored as integer numerators over a common denominator:
f(x) = e(num[x] / denom).  The multiplicative derivative
Delta_t f(x) = f(x+t) conj(f(x)) then becomes num[x+t] - num[x] mod denom,
so "Delta_{t_1..t_{d+1}} f is the constant 1 function" is an exact integer
identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .config import term_budget
from .errors import (
    ExactnessError,
    IllDefinedPhaseError,
    InvalidOrderError,
    PreconditionError,
    ResourceError,
)
from .group import FiniteAbelianGroup, GroupFunction, e, make_group


class ExactPhase:
    """Unimodular function x -> e(num[x] / denom) with integer numerators."""

    def __init__(self, group: FiniteAbelianGroup, numerators, denom: int):
        if int(denom) < 1:
            raise PreconditionError(f"denominator must be positive, got {denom}")
        num = np.asarray(numerators, dtype=np.int64).reshape(-1)
        if num.shape[0] != group.order:
            raise PreconditionError(f"expected {group.order} numerators, got {num.shape[0]}")
        self.group = group
        self.denom = int(denom)
        self.num = num % self.denom

    def __repr__(self):
        return f"ExactPhase({self.group!r}, denom={self.denom})"

    def __eq__(self, other):
        if not isinstance(other, ExactPhase) or other.group != self.group:
            return False
        L = math.lcm(self.denom, other.denom)
        return np.array_equal(self.num * (L // self.denom) % L, other.num * (L // other.denom) % L)

    def angle(self, x) -> Fraction:
        i = x if isinstance(x, (int, np.integer)) else self.group.index(x)
        return Fraction(int(self.num[int(i)]), self.denom)

    def to_function(self) -> GroupFunction:
        return GroupFunction(self.group, e(self.num / self.denom))

    def rescaled(self, denom: int) -> "ExactPhase":
        if denom % self.denom:
            raise PreconditionError(f"{denom} is not a multiple of {self.denom}")
        return ExactPhase(self.group, self.num * (denom // self.denom), denom)

    def __mul__(self, other: "ExactPhase") -> "ExactPhase":
        L = math.lcm(self.denom, other.denom)
        return ExactPhase(self.group, self.num * (L // self.denom) + other.num * (L // other.denom), L)

    def conj(self) -> "ExactPhase":
        return ExactPhase(self.group, -self.num, self.denom)

    def shift(self, t) -> "ExactPhase":
        ti = t if isinstance(t, (int, np.integer)) else self.group.index(t)
        return ExactPhase(self.group, self.num[self.group.add_index(np.arange(self.group.order), int(ti))], self.denom)

    def delta(self, t) -> "ExactPhase":
        """Delta_t f = f(. + t) conj(f)."""
        return self.shift(t) * self.conj()

    @classmethod
    def constant(cls, group, num=0, denom=1):
        return cls(group, np.full(group.order, num), denom)

    @classmethod
    def character(cls, group: FiniteAbelianGroup, chi) -> "ExactPhase":
        return cls(group, group.character_angles(chi), group.exponent)

    @classmethod
    def from_function(cls, f: GroupFunction, denom: int, tol: float = 1e-9) -> "ExactPhase":
        """Round a float unimodular function onto the grid (1/denom)Z, or refuse."""
        ang = np.angle(f.values) / (2 * np.pi) * denom
        num = np.rint(ang)
        if np.max(np.abs(np.abs(f.values) - 1)) > tol or np.max(np.abs(ang - num)) > tol * denom:
            raise ExactnessError(f"function is not exactly a phase with denominator {denom}")
        return cls(f.group, num.astype(np.int64), denom)

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "denom": self.denom, "numerators": self.num.tolist()}

    @classmethod
    def from_json(cls, obj) -> "ExactPhase":
        return cls(make_group(obj["group"]), obj["numerators"], obj["denom"])


@dataclass
class DegreeVerdict:
    holds: bool
    degree: int
    mode: str
    tuples_checked: int
    witness: tuple | None = None
    seed: int | None = None

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "degree": self.degree,
            "mode": self.mode,
            "tuples_checked": self.tuples_checked,
            "witness": list(self.witness) if self.witness is not None else None,
            "seed": self.seed,
        }


def _generator_indices(group: FiniteAbelianGroup) -> np.ndarray:
    idx = sorted({group.index(b) for b in group.basis()} - {0})
    return np.array(idx or [0], dtype=np.int64)


def is_degree_d(
    f: ExactPhase,
    d: int,
    mode: str = "auto",
    seed: int = 0,
    samples: int | None = None,
) -> DegreeVerdict:
    """Is Delta_{t_1..t_{d+1}} f identically 1?

    Modes:
      exhaustive  every (x, t_1..t_{d+1}); needs |A|^(d+2) within budget.
      generators  t_i restricted to the standard generators.  This is
                  an exact reduction: for fixed other arguments the set of
                  t with Delta_t psi == 1 is closed under addition since
                  Delta_{s+t} psi = Delta_s psi(. + t) Delta_t psi.
      random      ``samples`` (default 10|A|) random tuples, fixed seed;
                  a pass is evidence only.
      auto        exhaustive within budget, else generators.

    The witness on failure is (x, t_1, ..., t_{d+1}) as element indices.
    """
    if not isinstance(f, ExactPhase):
        raise ExactnessError("exact degree verification needs an ExactPhase, not float values")
    if d < 0:
        raise InvalidOrderError(f"degree must be >= 0, got {d}")
    g = f.group
    n = g.order
    m = d + 1
    if mode == "auto":
        mode = "exhaustive" if n ** (d + 2) <= term_budget() else "generators"
    if mode == "random":
        return _degree_random(f, d, seed, samples if samples is not None else 10 * n)
    if mode == "exhaustive":
        if n ** (d + 2) > term_budget():
            raise ResourceError(
                f"exhaustive degree check needs {n ** (d + 2)} tuples", n ** (d + 2), term_budget()
            )
        tvals = np.arange(n, dtype=np.int64)
    elif mode == "generators":
        tvals = _generator_indices(g)
        if n * len(tvals) ** m > term_budget():
            raise ResourceError("generator degree check exceeds budget", n * len(tvals) ** m, term_budget())
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    wit = kernels.degree_violation(f.num, f.denom, g.add_table, m, tvals)
    return DegreeVerdict(wit is None, d, mode, len(tvals) ** m, wit)


def _degree_random(f: ExactPhase, d: int, seed: int, samples: int) -> DegreeVerdict:
    g = f.group
    rng = np.random.default_rng(seed)
    m = d + 1
    x = rng.integers(0, g.order, samples)
    ts = rng.integers(0, g.order, (samples, m))
    acc = np.zeros(samples, dtype=np.int64)
    for s in range(1 << m):
        pos = x.copy()
        for i in range(m):
            if (s >> i) & 1:
                pos = g.add_index(pos, ts[:, i])
        sign = 1 if (m - bin(s).count("1")) % 2 == 0 else -1
        acc += sign * f.num[pos]
    bad = np.nonzero(acc % f.denom)[0]
    wit = None
    if bad.size:
        r = bad[0]
        wit = (int(x[r]),) + tuple(int(v) for v in ts[r])
    return DegreeVerdict(wit is None, d, "random", samples, wit, seed)


def exact_degree(f: ExactPhase, max_d: int = 8, mode: str = "auto") -> int | None:
    """Smallest d <= max_d with is_degree_d(f, d), else None."""
    for d in range(max_d + 1):
        if is_degree_d(f, d, mode):
            return d
    return None


# -- quadratic phases ---------------------------------------------------------


def quadratic_phase(N: int, a: int, b: int, half: bool = False) -> ExactPhase:
    """e((a x^2 + b x) / N) on Z_N, or e((a x^2 + b x) / 2N) with ``half``.

    The half-modulus phase is a function on Z_N only when a N + b is even.
    """
    N = int(N)
    g = make_group([N])
    x = np.arange(N, dtype=np.int64)
    if half:
        if (a * N + b) % 2:
            raise IllDefinedPhaseError(
                f"e((a x^2 + b x)/2N) with a={a}, b={b}, N={N} is not N-periodic (a N + b is odd)"
            )
        return ExactPhase(g, a * x * x + b * x, 2 * N)
    return ExactPhase(g, a * x * x + b * x, N)


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def quadratic_form_phase(p: int, M, b) -> ExactPhase:
    """e((x^T M x + b^T x) / p) on (Z_p)^n for an odd prime p and symmetric M."""
    if not (_is_prime(p) and p % 2):
        raise PreconditionError(f"quadratic forms are supported over odd primes, got {p}")
    M = np.asarray(M, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1) % p
    n = b.shape[0]
    if M.shape != (n, n) or not np.array_equal(M, M.T):
        raise PreconditionError("M must be a symmetric n x n matrix")
    g = make_group([p] * n)
    X = g.elements
    q = np.einsum("xi,ij,xj->x", X, M, X) + X @ b
    return ExactPhase(g, q, p)


# -- Leibman polynomial maps ----------------------------------------------------


class TableGroup:
    """Finite group given by a multiplication table on indices 0..order-1."""

    def __init__(self, mul_table, identity: int = 0, labels: Sequence | None = None):
        mt = np.asarray(mul_table, dtype=np.int64)
        self.mul_table = mt
        self.order = mt.shape[0]
        self.identity = int(identity)
        inv = np.empty(self.order, dtype=np.int64)
        rows, cols = np.nonzero(mt == self.identity)
        inv[rows] = cols
        self.inv_index = inv
        self.labels = list(labels) if labels is not None else list(range(self.order))

    @classmethod
    def from_abelian(cls, group: FiniteAbelianGroup) -> "TableGroup":
        return cls(group.add_table, 0, [tuple(v) for v in group.elements.tolist()])

    def index(self, label) -> int:
        return self.labels.index(label)


def heisenberg_group(n: int) -> TableGroup:
    """Upper unitriangular 3x3 matrices mod n: (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')."""
    el = [(a, b, c) for a in range(n) for b in range(n) for c in range(n)]
    pos = {v: i for i, v in enumerate(el)}
    mt = np.empty((len(el), len(el)), dtype=np.int64)
    for i, (a, b, c) in enumerate(el):
        for j, (a2, b2, c2) in enumerate(el):
            mt[i, j] = pos[((a + a2) % n, (b + b2) % n, (c + c2 + a * b2) % n)]
    return TableGroup(mt, 0, el)


@dataclass
class PolyMapWitness:
    """A map from an abelian group into a finite group, by target indices."""

    source: FiniteAbelianGroup
    target: TableGroup
    table: np.ndarray
    claimed_degree: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int64).reshape(-1)
        if self.table.shape[0] != self.source.order:
            raise PreconditionError("map table must be total on the source group")


def leibman_derivative(phi: PolyMapWitness, h) -> PolyMapWitness:
    """D_h phi(g) = phi(g)^{-1} phi(g + h)."""
    src = phi.source
    hi = h if isinstance(h, (int, np.integer)) else src.index(h)
    shifted = phi.table[src.add_index(np.arange(src.order), int(hi))]
    tab = phi.target.mul_table[phi.target.inv_index[phi.table], shifted]
    return PolyMapWitness(src, phi.target, tab)


def is_polynomial_map(phi: PolyMapWitness, k: int, mode: str = "auto", seed: int = 0,
                      samples: int | None = None) -> DegreeVerdict:
    """Does D_{h_{k+1}} ... D_{h_1} phi vanish (equal the identity) for all tuples?"""
    if k < 0:
        raise InvalidOrderError(f"degree must be >= 0, got {k}")
    src = phi.source
    n = src.order
    T = phi.target
    if mode == "auto":
        mode = "exhaustive" if n ** (k + 2) <= term_budget() else "random"
    if mode == "exhaustive":
        if n ** (k + 2) > term_budget():
            raise ResourceError("exhaustive polynomial check exceeds budget", n ** (k + 2), term_budget())
        # breadth-first over derivative tuples; tables stacked along axis 0
        tabs = phi.table[None, :]
        tuples = np.zeros((1, 0), dtype=np.int64)
        xs = np.arange(n)
        for _ in range(k + 1):
            shifted = tabs[:, src.add_table[xs][:, :]]  # (m, n, n): [m, x, h] = tab[m, x+h]
            new = T.mul_table[T.inv_index[tabs][:, :, None], shifted]  # (m, x, h)
            tabs = new.transpose(0, 2, 1).reshape(-1, n)
            tuples = np.concatenate(
                [np.repeat(tuples, n, axis=0), np.tile(np.arange(n), tuples.shape[0])[:, None]], axis=1
            )
        bad = np.nonzero(tabs != T.identity)
        wit = None
        if bad[0].size:
            r, x = bad[0][0], bad[1][0]
            wit = (int(x),) + tuple(int(v) for v in tuples[r])
        return DegreeVerdict(wit is None, k, "exhaustive", tuples.shape[0], wit)
    if mode == "random":
        rng = np.random.default_rng(seed)
        samples = samples if samples is not None else 10 * n
        for _ in range(samples):
            hs = rng.integers(0, n, k + 1)
            cur = phi
            for h in hs:
                cur = leibman_derivative(cur, int(h))
            bad = np.nonzero(cur.table != T.identity)[0]
            if bad.size:
                return DegreeVerdict(False, k, "random", samples, (int(bad[0]),) + tuple(int(h) for h in hs), seed)
        return DegreeVerdict(True, k, "random", samples, None, seed)
    raise PreconditionError(f"unknown mode {mode!r}")
