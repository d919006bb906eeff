"""Quadratic phase dictionaries, greedy structure decompositions and correlation tests.

Dictionary phases on Z_N are tagged (a, b, D) for e((a x^2 + b x) / D):
D = N for odd N, and the half-modulus family D = 2N (b even, 0 <= a < N)
for even N, which contains every e((a x^2 + b x) / N).  On (Z_p)^n the
tags are (U, b) with U the upper triangular coefficients of x^T U x.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import term_budget
from .errors import InvalidGroupError, InvalidThresholdError, PreconditionError, ResourceError
from .gowers import uk_norm
from .group import FiniteAbelianGroup, GroupFunction, e, fourier_transform, make_group
from .polydeg import ExactPhase, _is_prime, quadratic_form_phase, quadratic_phase

_ROUND = 12


class PhaseDictionary:
    """All quadratic phases of a cyclic group or of (Z_p)^n with n <= 3, p <= 5."""

    def __init__(self, group: FiniteAbelianGroup):
        self.group = group
        f = group.factors
        if group.rank == 1:
            self.kind = "cyclic"
            N = f[0]
            self.denom = N if N % 2 else 2 * N
            self._quads = [(a,) for a in range(N)]
        elif len(set(f)) == 1 and _is_prime(f[0]) and f[0] % 2 and group.rank <= 3 and f[0] <= 5:
            self.kind = "form"
            p, n = f[0], group.rank
            self.denom = p
            npar = n * (n + 1) // 2
            self._quads = list(itertools.product(range(p), repeat=npar))
        else:
            raise InvalidGroupError(f"no quadratic dictionary for {group}: use Z_N or (Z_p)^n with odd p <= 5, n <= 3")
        size = len(self)
        if size * group.order > term_budget():
            raise ResourceError(
                f"dictionary has {size} entries on a group of order {group.order}",
                required=size * group.order,
                budget=term_budget(),
            )

    def __len__(self) -> int:
        return len(self._quads) * self.group.order

    def _quad_numerators(self, quad) -> np.ndarray:
        """Numerators (over ``denom``) of the pure quadratic part."""
        g = self.group
        if self.kind == "cyclic":
            x = np.arange(g.order, dtype=np.int64)
            return (quad[0] * x * x) % self.denom
        X = g.elements
        n = g.rank
        U = np.zeros((n, n), dtype=np.int64)
        U[np.triu_indices(n)] = quad
        return np.einsum("xi,ij,xj->x", X, U, X) % self.denom

    def _tag(self, quad, lin: int):
        if self.kind == "cyclic":
            step = 1 if self.denom == self.group.order else 2
            return (quad[0], step * lin, self.denom)
        return (tuple(quad), self.group.element(lin))

    def tags(self) -> list:
        return [self._tag(q, j) for q in self._quads for j in range(self.group.order)]

    def phase(self, tag) -> ExactPhase:
        g = self.group
        if self.kind == "cyclic":
            a, b, D = tag
            if D != self.denom:
                raise PreconditionError(f"tag {tag} does not belong to this dictionary")
            return quadratic_phase(g.order, a, b, half=(D != g.order))
        quad, b = tag
        p, n = g.factors[0], g.rank
        U = np.zeros((n, n), dtype=np.int64)
        U[np.triu_indices(n)] = quad
        inv2 = (p + 1) // 2
        M = ((U + U.T) * inv2) % p
        return quadratic_form_phase(p, M, b)

    def members(self):
        for t in self.tags():
            yield t, self.phase(t)

    def correlations(self, f: GroupFunction):
        """Yield (quad, coefficient array over linear parts) with <f, q> = E f conj(q)."""
        for quad in self._quads:
            qv = e(self._quad_numerators(quad) / self.denom)
            yield quad, fourier_transform(GroupFunction(self.group, f.values * np.conj(qv)))


def build_dictionary(group) -> PhaseDictionary:
    g = group if isinstance(group, FiniteAbelianGroup) else make_group(group)
    return PhaseDictionary(g)


def best_correlation(f: GroupFunction, dictionary: PhaseDictionary):
    """(tag, <f, q>) maximizing |<f, q>|, ties broken by the smaller tag."""
    if f.group != dictionary.group:
        raise PreconditionError("function and dictionary live on different groups")
    best = None
    for quad, co in dictionary.correlations(f):
        mags = np.round(np.abs(co), _ROUND)
        j = int(np.argmax(mags))
        cand = (-float(mags[j]), dictionary._tag(quad, j), complex(co[j]))
        if best is None or cand[:2] < best[:2]:
            best = cand
    return best[1], best[2]


@dataclass
class Decomposition:
    group: FiniteAbelianGroup
    structured: GroupFunction
    terms: list  # [(tag, coefficient)] kept in the structured part
    g: GroupFunction
    h: GroupFunction
    h_terms: list
    report: dict
    history: list = field(default_factory=list)
    stop_reason: str = ""

    def to_json(self) -> dict:
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]

        def tagj(t):
            return [list(x) if isinstance(x, tuple) else x for x in t]

        return {
            "terms": [{"tag": tagj(t), "coefficient": c(v)} for t, v in self.terms],
            "h_terms": [{"tag": tagj(t), "coefficient": c(v)} for t, v in self.h_terms],
            "report": {k: (c(v) if isinstance(v, complex) else v) for k, v in self.report.items()},
            "history": self.history,
            "stop_reason": self.stop_reason,
        }


def structure_decompose(
    f: GroupFunction,
    eps: float,
    theta: float,
    budget: int = 20,
    dictionary: PhaseDictionary | None = None,
) -> Decomposition:
    """Greedy split f = structured + h + g over quadratic phases.

    Each round adds the phase best correlated with the residual (if the
    correlation exceeds ``theta``) and refits f on the span of all chosen
    phases by least squares.  Terms with |coefficient| < eps / #terms are
    moved to h; g is the final residual.
    """
    if not theta > 0:
        raise InvalidThresholdError(f"theta must be positive, got {theta}")
    if f.sup_norm() > 1 + 1e-12:
        raise PreconditionError(f"structure_decompose needs |f| <= 1, got sup {f.sup_norm():.6g}")
    A = f.group
    D = dictionary or build_dictionary(A)
    tags, cols = [], []
    coef = np.zeros(0, dtype=complex)
    resid = f.values.astype(complex)
    history = [float(np.sqrt(np.mean(np.abs(resid) ** 2)))]
    stop = "budget exhausted"
    for _ in range(budget):
        tag, c = best_correlation(GroupFunction(A, resid), D)
        if abs(c) <= theta:
            stop = "below threshold"
            break
        if tag in tags:
            stop = "repeated phase"
            break
        tags.append(tag)
        cols.append(D.phase(tag).to_function().values)
        Q = np.stack(cols, axis=1)
        coef = np.linalg.lstsq(Q, f.values, rcond=None)[0]
        resid = f.values - Q @ coef
        history.append(float(np.sqrt(np.mean(np.abs(resid) ** 2))))
    r = len(tags)
    zero = np.zeros(A.order, dtype=complex)
    keep = [i for i in range(r) if abs(coef[i]) >= eps / r] if r else []
    drop = [i for i in range(r) if i not in keep]

    def span(idx):
        return sum((coef[i] * cols[i] for i in idx), zero.copy())

    S = GroupFunction(A, span(keep))
    H = GroupFunction(A, span(drop))
    G = GroupFunction(A, f.values - S.values - H.values)
    gh = G + H
    report = {
        "g_u3": uk_norm(G, 3),
        "f_u3": uk_norm(f, 3),
        "h_l2": H.norm2(),
        "h_g": complex(H.inner(G)),
        "h_structured": complex(H.inner(S)),
        "g_structured": complex(G.inner(S)),
        "f_energy": f.norm2() ** 2,
        "structured_energy": S.norm2() ** 2,
        "rest_energy": gh.norm2() ** 2,
        "cross_energy": 2 * float(np.real(S.inner(gh))),
        "iterations": r,
    }
    return Decomposition(
        A, S, [(tags[i], complex(coef[i])) for i in keep], G, H,
        [(tags[i], complex(coef[i])) for i in drop], report, history, stop,
    )


@dataclass
class CorrelationWitness:
    index: int  # 1-based position in the feature list
    tag: object
    value: complex
    character: tuple | None = None

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "tag": self.tag,
            "value": [float(np.real(self.value)), float(np.imag(self.value))],
            "character": list(self.character) if self.character is not None else None,
        }


def _check_features(features, delta):
    if not delta > 0:
        raise InvalidThresholdError(f"delta must be positive, got {delta}")
    if not features:
        raise PreconditionError("feature list is empty")
    return min(len(features), int(np.floor(1 / delta)))


def _feature(item):
    return item if isinstance(item, tuple) else (None, item)


def delta_correlates_monomial(f: GroupFunction, features, delta: float):
    """First feature i <= 1/delta with |<f, feature_i>| > delta, or None.

    ``features`` holds GroupFunctions or (tag, GroupFunction) pairs.
    """
    last = _check_features(features, delta)
    for i in range(last):
        tag, q = _feature(features[i])
        v = complex(f.inner(q))
        if abs(v) > delta:
            return CorrelationWitness(i + 1, tag, v)
    return None


def delta_correlates_twisted(f: GroupFunction, features, delta: float):
    """First i <= 1/delta and character chi with |<f, chi f_i>| > delta, or None.

    chi is the best character for f_i (one FFT of f conj(f_i)).
    """
    last = _check_features(features, delta)
    A = f.group
    for i in range(last):
        tag, q = _feature(features[i])
        co = fourier_transform(GroupFunction(A, f.values * np.conj(q.values)))
        mags = np.round(np.abs(co), _ROUND)
        j = int(np.argmax(mags))
        if abs(co[j]) > delta:
            return CorrelationWitness(i + 1, tag, complex(co[j]), A.element(j))
    return None
