"""Circle metric, concentrated means and correction of almost homomorphisms.

Circle points are angles in [0, 1) (x stands for e(x)).  The metric is
d(x, y) = shorter arc length / 2 pi, in [0, 1/2].  A central extension N
of the circle by a finite group B is stored as pairs (b, x) with

    (b1, x1)(b2, x2) = (b1 b2, x1 + x2 + beta(b1, b2))

for a normalized 2-cocycle beta.  Distances between points of different
circle cosets are infinite.

All correction arithmetic is exact: angles are converted to Fractions
(floats convert exactly) and then to integers over a common denominator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    InternalConsistencyError,
    NotConcentratedError,
    NotHomomorphismError,
    PreconditionError,
)
from .group import FiniteAbelianGroup, GroupFunction, dominant_spectrum, e, make_group

MAX_EPS = Fraction(1, 40)


def wrap(x):
    """Reduce an angle to [0, 1)."""
    if isinstance(x, Fraction) or isinstance(x, int):
        return Fraction(x) % 1
    return float(x) % 1.0


def circle_dist(x, y):
    """Shorter arc between e(x) and e(y), divided by 2 pi."""
    d = wrap(x - y)
    return min(d, 1 - d)


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _min_arc(vals: Sequence, period):
    """(start index in sorted order, span) of the shortest arc containing all values."""
    k = len(vals)
    if k == 1:
        return 0, period * 0
    gaps = [vals[i + 1] - vals[i] for i in range(k - 1)] + [vals[0] + period - vals[-1]]
    j = max(range(k), key=lambda i: gaps[i])
    return (j + 1) % k, period - gaps[j]


def concentrated_mean(samples, weights=None):
    """Weighted mean of circle points lying in an arc of length <= 1/3.

    The samples are lifted to the real line inside an interval of length
    at most 1/3 (starting after the largest gap), averaged and projected
    back.  Fractions give an exact result; floats give a float.
    """
    xs = list(samples)
    if not xs:
        raise PreconditionError("concentrated_mean needs at least one sample")
    exact = all(isinstance(x, (Fraction, int)) for x in xs) and (
        weights is None or all(isinstance(w, (Fraction, int)) for w in weights)
    )
    conv = _exact if exact else float
    xs = [wrap(conv(x)) for x in xs]
    ws = [conv(1)] * len(xs) if weights is None else [conv(w) for w in weights]
    if len(ws) != len(xs) or any(w < 0 for w in ws) or sum(ws) <= 0:
        raise PreconditionError("weights must be nonnegative, one per sample, not all zero")
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    sv = [xs[i] for i in order]
    start, span = _min_arc(sv, conv(1))
    if span > conv(1) / 3:
        a, b = order[start], order[start - 1]
        raise NotConcentratedError(
            f"samples span an arc of length {float(span):.6g} > 1/3", witness=(xs[a], xs[b])
        )
    base = sv[start]
    lifted = [x if x >= base else x + 1 for x in xs]
    mean = sum(w * x for w, x in zip(ws, lifted)) / sum(ws)
    return wrap(mean)


def _int_concentrated_mean(vals: list[int], period: int) -> int | None:
    """Sum of the lifted values (mean = result / len(vals) over ``period``), None if spread."""
    k = len(vals)
    sv = sorted(v % period for v in vals)
    start, span = _min_arc(sv, period)
    if 3 * span > period:
        return None
    base = sv[start]
    return sum(v if v >= base else v + period for v in sv)


# -- central extensions of the circle ------------------------------------------


class CircleExtension:
    """N = B x C with (b1,x1)(b2,x2) = (b1 b2, x1 + x2 + beta(b1,b2)).

    ``mul_table`` is the multiplication table of B (identity at index
    ``identity``); ``beta`` is a (|B|, |B|) table of angles.
    """

    def __init__(self, mul_table, beta=None, identity: int = 0):
        mt = np.asarray(mul_table, dtype=np.int64)
        nb = mt.shape[0]
        self.mul_table = mt
        self.order = nb
        self.identity = int(identity)
        inv = np.empty(nb, dtype=np.int64)
        r, c = np.nonzero(mt == self.identity)
        inv[r] = c
        self.inv_index = inv
        if beta is None:
            beta = [[Fraction(0)] * nb for _ in range(nb)]
        self.beta = [[wrap(_exact(beta[i][j])) for j in range(nb)] for i in range(nb)]
        e0 = self.identity
        if any(self.beta[e0][j] or self.beta[j][e0] for j in range(nb)):
            raise PreconditionError("beta must be normalized: beta(1, b) = beta(b, 1) = 0")
        D = _common_denominator([v for row in self.beta for v in row])
        bi = np.array([[int(v * D) for v in row] for row in self.beta], dtype=object)
        if D < 2**40:
            bi = bi.astype(np.int64)
        self.denom, self.beta_num = D, bi
        if nb**3 <= 10**7:
            i = np.arange(nb)
            lhs = bi[:, :, None] + bi[mt[:, :, None], i[None, None, :]]
            rhs = bi[None, :, :] + bi[i[:, None, None], mt[None, :, :]]
            bad = np.argwhere((lhs - rhs) % D != 0)
            if len(bad):
                raise PreconditionError(f"beta is not a 2-cocycle at {tuple(int(v) for v in bad[0])}")

    @classmethod
    def trivial(cls) -> "CircleExtension":
        return cls([[0]])

    @classmethod
    def cyclic(cls, n: int, beta=None) -> "CircleExtension":
        """B = Z_n (index = residue)."""
        i = np.arange(n)
        return cls((i[:, None] + i[None, :]) % n, beta)

    def mul(self, p, q):
        (b1, x1), (b2, x2) = p, q
        return int(self.mul_table[b1, b2]), wrap(x1 + x2 + self.beta[b1][b2])

    def inv(self, p):
        b, x = p
        bi = int(self.inv_index[b])
        return bi, wrap(-x - self.beta[b][bi])

    def dist(self, p, q):
        if p[0] != q[0]:
            return math.inf
        return circle_dist(p[1], q[1])


@dataclass
class AlmostHom:
    """h: A -> N as coset indices ``b`` and angles ``x``."""

    A: FiniteAbelianGroup
    ext: CircleExtension
    b: np.ndarray
    x: list

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=np.int64).reshape(-1)
        self.x = [wrap(_exact(v)) for v in self.x]
        if len(self.x) != self.A.order or self.b.shape[0] != self.A.order:
            raise PreconditionError("table must be total on A")
        add = self.A.add_table
        mt = self.ext.mul_table
        if not np.array_equal(self.b[add], mt[self.b[:, None], self.b[None, :]]):
            raise NotHomomorphismError("h modulo the circle is not a homomorphism A -> B")

    def __call__(self, a: int):
        return int(self.b[a]), self.x[a]

    def defect(self):
        """max_{a,b} d(h(a+b), h(a) h(b))."""
        return _defect(self)

    def __eq__(self, other):
        return (
            isinstance(other, AlmostHom)
            and np.array_equal(self.b, other.b)
            and all(p == q for p, q in zip(self.x, other.x))
        )

    def is_homomorphism(self, tol: float = 0.0) -> bool:
        return self.defect() <= tol


def _common_denominator(vals) -> int:
    D = 1
    for v in vals:
        D = math.lcm(D, v.denominator)
    return D


def _defect(h: AlmostHom):
    n = h.A.order
    add = h.A.add_table
    beta = h.ext.beta
    D = _common_denominator(h.x + [v for row in beta for v in row])
    X = [int(v * D) for v in h.x]
    B = [[int(v * D) for v in row] for row in beta]
    bb = h.b.tolist()
    worst = 0
    for a in range(n):
        xa, ba = X[a], bb[a]
        row = add[a].tolist()
        Ba = B[ba]
        for c in range(n):
            diff = (X[row[c]] - xa - X[c] - Ba[bb[c]]) % D
            dd = min(diff, D - diff)
            if dd > worst:
                worst = dd
    return Fraction(worst, D)


def symmetrize(h: AlmostHom) -> AlmostHom:
    """h' with h'(-a) = h'(a)^{-1} and d(h', h) <= eps.

    For a != -a the smaller index keeps h(a) and its partner gets the
    inverse.  For a = -a, h'(a) is the self-inverse element of the coset
    h(a)C closest to h(a) (ties to the smaller angle).
    """
    A, ext = h.A, h.ext
    neg = A.neg_index
    xs = list(h.x)
    for a in range(A.order):
        na = int(neg[a])
        if na == a:
            b = int(h.b[a])
            bt = ext.beta[b][b]
            # (b, x)^2 = (1, 2x + beta(b, b)) = identity  <=>  x = -beta/2 mod 1/2
            r0 = wrap(-bt / 2)
            cands = sorted({r0, wrap(r0 + Fraction(1, 2))})
            xs[a] = min(cands, key=lambda r: (circle_dist(r, h.x[a]), r))
        elif a < na:
            xs[na] = ext.inv((int(h.b[a]), h.x[a]))[1]
    return AlmostHom(A, ext, h.b.copy(), xs)


@dataclass
class HomCorrection:
    g: AlmostHom
    eps: Fraction
    defect: Fraction
    symmetrized_defect: Fraction
    max_deviation: Fraction

    def to_json(self) -> dict:
        return {
            "eps": float(self.eps),
            "defect": float(self.defect),
            "symmetrized_defect": float(self.symmetrized_defect),
            "max_deviation": float(self.max_deviation),
            "b": self.g.b.tolist(),
            "angles": [str(v) for v in self.g.x],
        }


def correct_almost_hom(h: AlmostHom, eps=None) -> HomCorrection:
    """Exact homomorphism g with g(a)C = h(a)C and d(g(a), h(a)) <= 4 eps.

    g(a) is the concentrated mean of h'(a1) h'(a - a1) over a1, where h'
    is the symmetrized map.  ``eps`` defaults to the measured defect and
    must be at most 1/40.
    """
    defect = h.defect()
    eps = defect if eps is None else _exact(eps)
    if eps > MAX_EPS:
        raise PreconditionError(f"eps = {float(eps):.6g} exceeds 1/40")
    if defect > eps:
        raise PreconditionError(f"measured defect {float(defect):.6g} exceeds the declared eps {float(eps):.6g}")
    hs = symmetrize(h)
    sdef = hs.defect()
    A, ext = h.A, h.ext
    n = A.order
    add = A.add_table
    D = _common_denominator(hs.x + [v for row in ext.beta for v in row])
    X = [int(v * D) for v in hs.x]
    B = [[int(v * D) for v in row] for row in ext.beta]
    bb = hs.b.tolist()
    sub = [[int(A.add_table[a, A.neg_index[c]]) for c in range(n)] for a in range(n)]
    gx = []
    for a in range(n):
        row = sub[a]
        samples = [X[c] + X[row[c]] + B[bb[c]][bb[row[c]]] for c in range(n)]
        s = _int_concentrated_mean(samples, D)
        if s is None:
            raise InternalConsistencyError(f"products h'(a1)h'(a-a1) for a={a} are not concentrated")
        gx.append(Fraction(s, D * n) % 1)
    g = AlmostHom(A, ext, h.b.copy(), gx)
    if g.defect() != 0:
        raise InternalConsistencyError("corrected map is not a homomorphism")
    dev = max(circle_dist(p, q) for p, q in zip(g.x, h.x))
    return HomCorrection(g, eps, defect, sdef, dev)


# -- eps-linear maps into finite tori ------------------------------------------


def linearity_defect(A: FiniteAbelianGroup, f) -> Fraction:
    """max_a min_c max_b d(f(a+b) - f(b), c), max over coordinates.

    ``f`` is an (|A|, r) table of angles.
    """
    cols = _columns(A, f)
    add = A.add_table
    worst = Fraction(0)
    for col in cols:
        for a in range(A.order):
            diffs = sorted(wrap(col[int(add[a, b])] - col[b]) for b in range(A.order))
            _, span = _min_arc(diffs, Fraction(1))
            worst = max(worst, span / 2)
    return worst


def _columns(A, f):
    rows = list(f)
    if len(rows) != A.order:
        raise PreconditionError("table must be total on A")
    r = len(rows[0]) if isinstance(rows[0], (list, tuple, np.ndarray)) else None
    if r is None:
        return [[wrap(_exact(v)) for v in rows]]
    return [[wrap(_exact(row[j])) for row in rows] for j in range(r)]


@dataclass
class LinearCorrection:
    offset: list
    hom: list  # per coordinate: list of angles over A
    deviation: list
    eps: list

    def value(self, a: int) -> list:
        return [wrap(o + h[a]) for o, h in zip(self.offset, self.hom)]

    def to_json(self) -> dict:
        return {
            "offset": [str(v) for v in self.offset],
            "hom": [[str(v) for v in col] for col in self.hom],
            "deviation": [float(v) for v in self.deviation],
            "eps": [float(v) for v in self.eps],
        }


def correct_eps_linear(A: FiniteAbelianGroup, f, eps=None) -> LinearCorrection:
    """Replace an almost linear map A -> C^r by offset + homomorphism, coordinatewise.

    For each coordinate, h(a) = f(a) - f(0) is an almost homomorphism into
    the circle; it is corrected exactly and f(0) is kept as the offset.
    """
    cols = _columns(A, f)
    offs, homs, devs, epss = [], [], [], []
    trivial = CircleExtension.trivial()
    for col in cols:
        h = AlmostHom(A, trivial, np.zeros(A.order, dtype=np.int64), [wrap(v - col[0]) for v in col])
        res = correct_almost_hom(h, eps)
        offs.append(col[0])
        homs.append(res.g.x)
        devs.append(max(circle_dist(col[0] + g, v) for g, v in zip(res.g.x, col)))
        epss.append(res.eps)
    return LinearCorrection(offs, homs, devs, epss)


# -- almost nil-morphisms ---------------------------------------------------------


@dataclass
class NilCorrectionFailure:
    stage: str
    reason: str
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"stage": self.stage, "reason": self.reason, **{k: _jsonable(v) for k, v in self.data.items()}}


@dataclass
class NilCorrection:
    morphism: object  # NilMorphism into the widened source pattern
    pattern: object
    displacement: float
    stages: dict

    def to_json(self) -> dict:
        return {
            "displacement": self.displacement,
            "Zm": self.pattern.m,
            "psi": self.morphism.psi.tolist(),
            "stages": {k: _jsonable(v) for k, v in self.stages.items()},
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def correct_almost_nilmorphism(A: FiniteAbelianGroup, N, chi, z, delta=None):
    """Nearby nil-morphism A -> C(N'), or a failure report naming the stage.

    ``chi[a]`` is the character index (first degree) of f(a) and ``z[a]``
    its angle in the circle fibre (the coset (chi, 0, z) T with z read as
    e(z)).  N' is N with its center widened so that the result is exact.

    Stages: projection (tau o f must be eps-linear and correct onto a
    homomorphism into T^), translate (normalize f(0)), restrict (factor
    interpretation onto the image), lift, fit (split map t_a modulo the
    center), almost-hom (correction in the circle extension N2 / Z),
    assemble (map back and verify).
    """
    from . import nilpattern as npat
    from .homs import Hom, hom_from_table

    chi = np.asarray(chi, dtype=np.int64).reshape(-1)
    z = [wrap(_exact(v)) for v in z]
    if chi.shape[0] != A.order or len(z) != A.order:
        raise PreconditionError("f must be total on A")
    T = N.T
    m = N.m
    stages: dict = {}
    # projection: coordinates of chi as angles chi_j / n_j
    coords = [[Fraction(int(v), n) for v, n in zip(T.element(int(c)), T.factors)] for c in chi]
    lin = linearity_defect(A, coords) if T.rank else Fraction(0)
    stages["projection_linearity"] = lin
    bound = MAX_EPS if delta is None else min(MAX_EPS, _exact(delta))
    if lin > bound:
        return NilCorrectionFailure("epsilon-linearity", "projection to T^ is not eps-linear", {"eps": lin})
    if T.rank:
        try:
            lc = correct_eps_linear(A, coords)
        except (PreconditionError, InternalConsistencyError) as exc:
            return NilCorrectionFailure("epsilon-linearity", str(exc), {"eps": lin})
        vals = [lc.value(a) for a in range(A.order)]
        newchi = []
        for a in range(A.order):
            v = []
            for ang, n in zip(vals[a], T.factors):
                k = ang * n
                if k.denominator != 1:
                    return NilCorrectionFailure("epsilon-linearity", "linear correction leaves T^", {"a": a})
                v.append(int(k) % n)
            newchi.append(T.index(v))
        stages["projection_changed"] = int(np.sum(np.array(newchi) != chi))
        chi = np.array(newchi, dtype=np.int64)
    # translate: n0 = (chi(0), 0, round(m z(0))) so that f(0) lands next to the identity coset
    z0 = Fraction(round(z[0] * m), m) % 1
    n0 = N.encode(int(chi[0]), 0, int(z0 * m) % m)
    n0inv = int(N.inv(n0))
    c0, t0, zz0 = (int(v) for v in N.decode(n0inv))
    chi1 = N.addT[c0, chi]
    z1 = [wrap(z[a] + Fraction(int(zz0) + int(N.pair[chi[a], t0]) + int(N.omega_z[c0, chi[a]]), m)) for a in range(A.order)]
    alpha = hom_from_table(A, T, chi1)
    if alpha is None:
        return NilCorrectionFailure("translate", "first degree map is not a homomorphism after translation")
    stages["translation"] = {"n0": int(n0)}
    # restrict to the preimage of the image H = alpha(A)
    H = sorted(set(chi1.tolist()))
    T3 = [t for t in range(T.order) if all(T.character_angle_table[h, t] == 0 for h in H)]
    interp = npat.interpret_epi(N, T3, verify=False)
    Nr = interp.pattern
    inj = interp.alpha.dual().table()  # character of T/T3 -> character of T
    back = {int(c): i for i, c in enumerate(inj)}
    mu = np.array([back[int(c)] for c in chi1], dtype=np.int64)
    stages["restrict"] = {"T3_order": len(T3), "type": list(Nr.T.factors)}
    # lift: N2 of type A^, psi2(a) = (a, z1(a)); the center is widened to carry A^
    mw = math.lcm(m, A.exponent)
    Nrw, _ = npat.widen_center(Nr, mw)
    ar = hom_from_table(A, Nr.T, mu)
    N2, _ = npat.pushforward(Nrw, ar.dual())
    n = A.order
    add = A.add_table
    # fit t_a = (a, xi_a, w_a): z1(a+b) - z1(b) - omega2_Z(a, b)/m ~ w_a + <xi_a, b>
    xis, ws = [], []
    for a in range(n):
        r = [wrap(z1[int(add[a, b])] - z1[b] - Fraction(int(N2.omega_z[a, b]), N2.m)) for b in range(n)]
        f = GroupFunction(A, e(np.array([float(v) for v in r])))
        spec = dominant_spectrum(f, 1e-12)
        xi = A.index(spec[0][0])
        resid = [wrap(r[b] - Fraction(int(A.character_angle_table[xi, b]), A.exponent)) for b in range(n)]
        try:
            w = concentrated_mean(resid)
        except NotConcentratedError as exc:
            return NilCorrectionFailure("fit", f"residual for a={a} is not concentrated: {exc}")
        xis.append(xi)
        ws.append(w)
    # the map a -> (a, xi_a) must be a homomorphism into B = N2 / Z
    nb = n * n
    bi = np.array([a * n + xis[a] for a in range(n)], dtype=np.int64)
    Ta = np.arange(n)
    mulB = np.empty((nb, nb), dtype=np.int64)
    for a1 in range(n):
        for x1 in range(n):
            i = a1 * n + x1
            a2 = np.repeat(np.arange(n), n)
            x2 = np.tile(np.arange(n), n)
            mulB[i] = N2.addT[a1, a2] * n + N2.addT[N2.addT[x1, x2], N2.omega_t[a1, a2]]
    if not np.array_equal(bi[add], mulB[bi[:, None], bi[None, :]]):
        return NilCorrectionFailure("fit", "fitted split map is not a homomorphism modulo the center")
    a2 = np.repeat(np.arange(n), n)
    x1 = np.tile(np.arange(n), n)
    beta = [[Fraction(0)] * nb for _ in range(nb)]
    for i in range(nb):
        a_1, x_1 = divmod(i, n)
        for j in range(nb):
            a_2 = j // n
            beta[i][j] = Fraction(int(N2.pair[a_2, x_1]) + int(N2.omega_z[a_1, a_2]), N2.m) % 1
    ext = CircleExtension(mulB, beta)
    h = AlmostHom(A, ext, bi, ws)
    hdef = h.defect()
    stages["almost_hom_defect"] = hdef
    if hdef > MAX_EPS:
        return NilCorrectionFailure("almost-hom", "fitted split map is not a 1/40-almost homomorphism", {"defect": hdef})
    corr = correct_almost_hom(h)
    stages["almost_hom_deviation"] = corr.max_deviation
    # assemble: coset of g(a) in C(N2) has z = g(a); map back through restrict and translation
    zf = list(corr.g.x)
    den = 1
    for v in zf + [Fraction(1, m)]:
        den = math.lcm(den, v.denominator)
    mf = math.lcm(m, den)
    Nw, _ = npat.widen_center(N, mf)
    k = mf // m
    n0w = Nw.encode(int(chi[0]), 0, (int(z0 * m) % m) * k)
    psi_n = chi1 * mf + np.array([int(v * mf) % mf for v in zf], dtype=np.int64)
    psi = Nw.act_on_core(n0w, psi_n)
    res = npat.verify_nilmorphism(A, Nw, psi)
    if isinstance(res, npat.Refutation):
        raise InternalConsistencyError(f"assembled map is not a nil-morphism: {res}")
    disp = 0.0
    for a in range(A.order):
        ca, za = int(psi[a]) // mf, Fraction(int(psi[a]) % mf, mf)
        if ca != int(chi[a]):
            disp = math.inf
            break
        disp = max(disp, float(circle_dist(za, z[a])))
    stages["Zm"] = mf
    return NilCorrection(res, Nw, disp, stages)
