"""k-th order convolutions, Gowers inner products and U_k norms.

A system F = {f_S : S subset of [k]} is stored as a (2^k, |A|) array whose
row S (bitmask, bit i-1 <-> coordinate i) is f_S.

    Conv_k(F)(t_1..t_k) = E_x prod_S f_S(x + sum_{i in S} t_i)
    (F)_k = E_{x,t} prod_S c^{|S|} f_S(x + sum_{i in S} t_i)

where c is complex conjugation.  Brute-force evaluations are capped at
|A|^(k+1) summation terms (see ``config.term_budget``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import DEFAULT_TOL, term_budget
from .errors import (
    IncompleteSystemError,
    InternalConsistencyError,
    InvalidCoordinateError,
    InvalidGroupError,
    InvalidOrderError,
    PreconditionError,
    ResourceError,
)
from .group import FiniteAbelianGroup, GroupFunction, fourier_transform


def popcount(s: int) -> int:
    return bin(s).count("1")


def _check_budget(n: int, k: int, what: str) -> None:
    need = n ** (k + 1)
    budget = term_budget()
    if need > budget:
        raise ResourceError(
            f"{what}: {need} terms (|A|^(k+1) with |A|={n}, k={k}) exceeds budget {budget}",
            required=need,
            budget=budget,
        )


class FunctionSystem:
    """2^k functions on one group, indexed by bitmasks S."""

    def __init__(self, group: FiniteAbelianGroup, k: int, table):
        if k < 0:
            raise InvalidOrderError(f"order must be >= 0, got {k}")
        tab = np.asarray(table, dtype=complex)
        if tab.shape != (1 << k, group.order):
            raise IncompleteSystemError(
                f"system of order {k} needs shape {(1 << k, group.order)}, got {tab.shape}"
            )
        self.group = group
        self.k = k
        self.table = np.ascontiguousarray(tab)

    @classmethod
    def from_functions(cls, fs, k: int | None = None) -> "FunctionSystem":
        """Build from a list (index = bitmask) or a dict {bitmask: GroupFunction}."""
        if isinstance(fs, dict):
            if k is None:
                k = max(fs).bit_length() if fs else 0
            missing = [s for s in range(1 << k) if s not in fs]
            if missing:
                raise IncompleteSystemError(f"missing entries for subsets {missing}")
            fs = [fs[s] for s in range(1 << k)]
        fs = list(fs)
        if k is None:
            k = len(fs).bit_length() - 1
        if len(fs) != 1 << k:
            raise IncompleteSystemError(f"need {1 << k} functions, got {len(fs)}")
        group = fs[0].group
        for f in fs:
            if f.group != group:
                raise InvalidGroupError("all functions of a system must share one group")
        return cls(group, k, np.stack([f.values for f in fs]))

    @classmethod
    def constant(cls, f: GroupFunction, k: int) -> "FunctionSystem":
        return cls(f.group, k, np.tile(f.values, (1 << k, 1)))

    def __getitem__(self, s: int) -> GroupFunction:
        return GroupFunction(self.group, self.table[s])

    def conjugated(self) -> "FunctionSystem":
        """Apply c^{|S|} to each entry."""
        tab = self.table.copy()
        for s in range(1 << self.k):
            if popcount(s) % 2:
                tab[s] = np.conj(tab[s])
        return FunctionSystem(self.group, self.k, tab)

    def shifted(self, t) -> "FunctionSystem":
        """Every entry replaced by x -> f_S(x + t)."""
        ti = t if isinstance(t, (int, np.integer)) else self.group.index(t)
        idx = self.group.add_table[:, int(ti)]
        return FunctionSystem(self.group, self.k, self.table[:, idx])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.table)))

    def face(self, i: int, top: bool) -> "FunctionSystem":
        """The order-(k-1) system {f_{S (+i)} : S subset of [k] minus {i}}, relabelled.

        Coordinates other than i keep their relative order.
        """
        if not 1 <= i <= self.k:
            raise InvalidCoordinateError(f"coordinate {i} not in 1..{self.k}")
        rest = [j for j in range(self.k) if j != i - 1]
        rows = []
        for s in range(1 << (self.k - 1)):
            full = sum(1 << rest[b] for b in range(self.k - 1) if (s >> b) & 1)
            if top:
                full |= 1 << (i - 1)
            rows.append(self.table[full])
        return FunctionSystem(self.group, self.k - 1, np.stack(rows))


@dataclass
class MultiVarFunction:
    """Function on A^k, flat row-major over (t_1, ..., t_k) with t_k fastest."""

    group: FiniteAbelianGroup
    arity: int
    values: np.ndarray

    def __call__(self, *ts) -> complex:
        n = self.group.order
        idx = 0
        for t in ts:
            ti = t if isinstance(t, (int, np.integer)) else self.group.index(t)
            idx = idx * n + int(ti)
        return complex(self.values[idx])

    def norm2(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def inner(self, other: "MultiVarFunction") -> complex:
        return complex(np.vdot(other.values, self.values) / self.values.size)


def delta_t(f: GroupFunction, t) -> GroupFunction:
    """(Delta_t f)(x) = f(x + t) conj(f(x))."""
    return f.shift(t) * f.conj()


def conv_k(F: FunctionSystem) -> MultiVarFunction:
    """Conv_k(F) by direct summation."""
    _check_budget(F.group.order, F.k, "conv_k")
    vals = kernels.conv_table(F.table, F.group.add_table, F.k)
    return MultiVarFunction(F.group, F.k, vals)


def gowers_inner(F: FunctionSystem) -> complex:
    """(F)_k by direct summation."""
    _check_budget(F.group.order, F.k, "gowers_inner")
    return complex(kernels.conv_mean(F.conjugated().table, F.group.add_table, F.k))


def _root(val: complex, k: int, tol: float = DEFAULT_TOL) -> float:
    v = float(np.real(val))
    if v < 0:
        if v <= -tol:
            raise InternalConsistencyError(f"U_{k} power came out negative: {v}")
        v = 0.0
    return v ** (1.0 / (1 << k))


def uk_power(f: GroupFunction, k: int, method: str = "auto") -> float:
    """||f||_{U_k}^{2^k} (before root extraction, may carry rounding)."""
    if k < 1:
        raise InvalidOrderError(f"U_k needs k >= 1, got {k}")
    if method == "direct":
        return float(np.real(gowers_inner(FunctionSystem.constant(f, k))))
    if k == 1:
        return abs(f.mean()) ** 2
    if k == 2:
        return float(np.sum(np.abs(fourier_transform(f)) ** 4))
    # ||f||_{U_k}^{2^k} = E_t ||Delta_t f||_{U_{k-1}}^{2^{k-1}}
    g = f.group
    n = g.order
    vals = f.values
    cv = np.conj(vals)
    total = 0.0
    for t in range(n):
        d = GroupFunction(g, vals[g.add_table[:, t]] * cv)
        total += uk_power(d, k - 1, method)
    return total / n


def uk_norm(f: GroupFunction, k: int, method: str = "auto") -> float:
    """||f||_{U_k}.

    ``method``: "auto" (|E f| for k=1, Fourier for k=2, derivative
    recursion down to the Fourier formula for k >= 3) or "direct"
    (Gowers inner product of the constant system).
    """
    if k < 1:
        raise InvalidOrderError(f"U_k needs k >= 1, got {k}")
    if method not in ("auto", "direct"):
        raise PreconditionError(f"unknown method {method!r}")
    if k == 1 and method == "auto":
        return abs(f.mean())
    return _root(uk_power(f, k, method), k)


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    holds: bool
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds, **self.extra}


def _leq(lhs: float, rhs: float, tol: float = DEFAULT_TOL) -> bool:
    return lhs <= rhs * (1 + tol) + tol


def check_gcs(F: FunctionSystem, tol: float = DEFAULT_TOL) -> BoundReport:
    """|(F)_k| <= prod_S ||f_S||_{U_k} (Gowers-Cauchy-Schwarz), k = F.k."""
    lhs = abs(gowers_inner(F))
    rhs = float(np.prod([uk_norm(F[s], F.k) for s in range(1 << F.k)]))
    return BoundReport(lhs, rhs, _leq(lhs, rhs, tol))


def _require_bounded(F: FunctionSystem, tol: float) -> None:
    if F.sup_norm() > 1 + tol:
        raise PreconditionError(f"system must satisfy ||f_S||_inf <= 1, got {F.sup_norm()}")


def doubled_system(F: FunctionSystem) -> FunctionSystem:
    """Order-(k+1) system G with (G)_{k+1} = ||Conv_k(F)||_2^2.

    G_S = G_{S + {k+1}} = c^{|S|} f_S.
    """
    half = F.conjugated().table
    return FunctionSystem(F.group, F.k + 1, np.concatenate([half, half]))


def check_conv_l2_bound(F: FunctionSystem, tol: float = DEFAULT_TOL) -> BoundReport:
    """||Conv_k(F)||_2 <= prod_S ||f_S||_{U_{k+1}} for systems with ||f_S||_inf <= 1."""
    _require_bounded(F, tol)
    lhs = conv_k(F).norm2()
    rhs = float(np.prod([uk_norm(F[s], F.k + 1) for s in range(1 << F.k)]))
    return BoundReport(lhs, rhs, _leq(lhs, rhs, tol))


def check_l2int(F: FunctionSystem, i: int, tol: float = DEFAULT_TOL) -> BoundReport:
    """||Conv_k(F)||_2^2 against E_t prod_S ||f_S(x) f_{S+i}(x+t)||_{U_k}.

    ``rhs`` uses the norms to the first power; ``rhs_sharp`` squares them,
    which is what fixing t_i and bounding Conv_{k-1} gives.  Since every
    norm is at most 1 under the sup-norm precondition, lhs <= rhs_sharp
    <= rhs, and ``holds`` requires both.
    """
    if not 1 <= i <= F.k:
        raise InvalidCoordinateError(f"coordinate {i} not in 1..{F.k}")
    _require_bounded(F, tol)
    lhs = conv_k(F).norm2() ** 2
    bottom = F.face(i, top=False)
    top = F.face(i, top=True)
    g = F.group
    rhs = 0.0
    rhs_sharp = 0.0
    for t in range(g.order):
        shift = g.add_table[:, t]
        norms = [
            uk_norm(GroupFunction(g, bottom.table[s] * top.table[s][shift]), F.k)
            for s in range(1 << (F.k - 1))
        ]
        rhs += float(np.prod(norms))
        rhs_sharp += float(np.prod(norms) ** 2)
    rhs /= g.order
    rhs_sharp /= g.order
    holds = _leq(lhs, rhs_sharp, tol) and _leq(rhs_sharp, rhs, tol)
    return BoundReport(lhs, rhs, holds, {"rhs_sharp": rhs_sharp, "coordinate": i})


def convin_sides(F: FunctionSystem, i: int | None = None) -> tuple[complex, complex]:
    """Both sides of (F)_{k+1} = <Conv_k(bottom), Conv_k(top)> for a system of order k+1.

    bottom = {c^{|S|} f_S}, top = {c^{|S|} f_{S+i}} over S subset of [k+1] minus {i}.
    """
    if F.k < 1:
        raise InvalidOrderError("convolution identity needs a system of order >= 1")
    i = F.k if i is None else i
    lhs = gowers_inner(F)
    bottom = F.face(i, top=False).conjugated()
    top = F.face(i, top=True).conjugated()
    rhs = conv_k(bottom).inner(conv_k(top))
    return lhs, rhs


def classical_convolution(f: GroupFunction, g: GroupFunction) -> GroupFunction:
    """(f * g)(t) = E_x f(x) g(t - x), computed through the Fourier transform."""
    from .group import inverse_fourier_transform

    return inverse_fourier_transform(f.group, fourier_transform(f) * fourier_transform(g))
