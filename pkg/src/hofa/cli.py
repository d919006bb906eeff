"""Command line front end: ``hofa <subcommand> ...`` with JSON reports on stdout.

Exit status: 0 success, 1 refutation or failure report, 2 usage or
precondition error, 3 resource limit.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import HofaError, ResourceError

# -- schemas ------------------------------------------------------------------------

_FACTORS = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_ANGLE = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_COCYCLE = {
    "type": "object",
    "patternProperties": {
        r"^\(\d+,\d+\)$": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "function": {
        "type": "object",
        "required": ["group", "values"],
        "properties": {
            "group": _FACTORS,
            "values": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
    },
    "system": {
        "type": "object",
        "required": ["group", "functions"],
        "properties": {
            "group": _FACTORS,
            "functions": {
                "type": "object",
                "patternProperties": {r"^\d+$": {"anyOf": [{"type": "string"}, {"type": "object"}]}},
                "additionalProperties": False,
            },
        },
    },
    "phase": {
        "type": "object",
        "required": ["group", "denom", "numerators"],
        "properties": {
            "group": _FACTORS,
            "denom": {"type": "integer", "minimum": 1},
            "numerators": {"type": "array", "items": {"type": "integer"}},
        },
    },
    "labeling": {
        "type": "object",
        "required": ["values"],
        "properties": {
            "group": _FACTORS,
            "d": {"type": "integer", "minimum": 1},
            "values": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        },
    },
    "pattern": {
        "type": "object",
        "required": ["T", "Zm"],
        "properties": {"T": _FACTORS, "Zm": {"type": "integer", "minimum": 1}, "cocycle": _COCYCLE},
    },
    "morphism": {
        "type": "object",
        "required": ["A", "pattern", "psi"],
        "properties": {
            "A": _FACTORS,
            "pattern": {"$ref": "#/definitions/pattern"},
            "psi": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
    },
    "epi": {
        "type": "object",
        "required": ["pattern", "T3"],
        "properties": {
            "pattern": {"$ref": "#/definitions/pattern"},
            "T3": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
    },
    "mono": {
        "type": "object",
        "required": ["pattern", "T2", "images"],
        "properties": {
            "pattern": {"$ref": "#/definitions/pattern"},
            "T2": _FACTORS,
            "images": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        },
    },
    "almosthom": {
        "type": "object",
        "required": ["A", "values"],
        "properties": {
            "A": _FACTORS,
            "B": _FACTORS,
            "beta": {"type": "object", "additionalProperties": _ANGLE},
            "values": {
                "type": "object",
                "patternProperties": {
                    r"^\d+$": {"type": "array", "prefixItems": [{"type": "integer"}, _ANGLE], "minItems": 2, "maxItems": 2}
                },
                "additionalProperties": False,
            },
        },
    },
    "linear": {
        "type": "object",
        "required": ["A", "values"],
        "properties": {"A": _FACTORS, "values": {"type": "array", "items": {"type": "array", "items": _ANGLE}}},
    },
    "nilvalues": {
        "type": "object",
        "required": ["A", "pattern", "values"],
        "properties": {
            "A": _FACTORS,
            "pattern": {"$ref": "#/definitions/pattern"},
            "values": {"type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer"}, _ANGLE]}},
        },
    },
    "features": {
        "type": "object",
        "required": ["features"],
        "properties": {
            "features": {
                "type": "array",
                "items": {"type": "object", "required": ["values"], "properties": {"tag": {}, "values": {"type": "array"}}},
            }
        },
    },
}


class UsageError(Exception):
    pass


def _validate(obj, kind: str):
    schema = dict(SCHEMAS[kind])
    schema["definitions"] = {"pattern": SCHEMAS["pattern"]}
    try:
        jsonschema.Draft202012Validator(schema).validate(obj)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid {kind} input: {exc.message}") from None
    return obj


def _load(path: str, kind: str):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    return _validate(obj, kind)


# -- output -------------------------------------------------------------------------


def dumps(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        s = format(x, ".17g")
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- helpers ------------------------------------------------------------------------


def _angle(v) -> Fraction:
    return Fraction(v) if isinstance(v, str) else Fraction(float(v))


def _function(obj):
    from .group import GroupFunction

    return GroupFunction.from_json(obj)


def _system(path: str, k: int | None):
    from .gowers import FunctionSystem
    from .group import GroupFunction, make_group

    obj = _load(path, "system")
    g = make_group(obj["group"])
    base = Path(path).parent
    fs = {}
    for key, entry in obj["functions"].items():
        fobj = _load(str(base / entry), "function") if isinstance(entry, str) else _validate(
            {"group": obj["group"], **entry}, "function"
        )
        f = _function(fobj)
        if f.group != g:
            raise UsageError(f"function {key} lives on {f.group.factors}, not {g.factors}")
        fs[int(key)] = f
    return FunctionSystem.from_functions(fs, k)


def _pattern(obj):
    from .nilpattern import nilpattern_from_json

    return nilpattern_from_json(obj)


# -- commands -----------------------------------------------------------------------


def cmd_group(args):
    from .group import make_group

    g = make_group(args.group)
    out = {"factors": list(g.factors), "order": g.order, "exponent": g.exponent}
    if args.elements:
        out["elements"] = g.elements.tolist()
    return 0, out


def cmd_norm(args):
    from .gowers import uk_norm

    f = _function(_load(args.file, "function"))
    return 0, {"k": args.k, "norm": uk_norm(f, args.k, args.method)}


def cmd_conv(args):
    from .gowers import conv_k

    F = _system(args.file, args.k)
    c = conv_k(F)
    return 0, {"k": F.k, "l2": c.norm2(), "values": [complex(v) for v in c.values]}


def cmd_gowers_inner(args):
    from .gowers import gowers_inner

    F = _system(args.file, None)
    return 0, {"k": F.k, "value": complex(gowers_inner(F))}


def cmd_cube(args):
    from .cube import CubeLabeling, bdk_decompose, bdk_membership, closure_codes, member_codes
    from .group import make_group

    g = make_group(args.group)
    if args.census:
        mem = member_codes(g, args.d, args.k)
        clo = closure_codes(g, args.d, args.k)
        return 0, {"members": int(len(mem)), "closure": int(len(clo)), "equal": bool(np.array_equal(mem, clo))}
    path = args.member or args.decompose
    if path is None:
        raise UsageError("one of --member, --decompose, --census is required")
    obj = _load(path, "labeling")
    h = CubeLabeling(g, args.d, obj["values"])
    if args.member:
        ok = bdk_membership(h, args.k)
        return (0 if ok else 1), {"member": ok}
    fac = bdk_decompose(h, args.k)
    if fac is None:
        return 1, {"member": False}
    return 0, {"member": True, "factors": [{"F": f.F, "K": f.K, "a": list(a)} for f, a in fac]}


def cmd_poly(args):
    from .polydeg import ExactPhase, is_degree_d, quadratic_phase

    if args.action == "phase":
        return 0, quadratic_phase(args.N, args.a, args.b, args.half).to_json()
    f = ExactPhase.from_json(_load(args.file, "phase"))
    v = is_degree_d(f, args.degree, mode=args.check, seed=args.seed)
    return (0 if v.holds else 1), {"verdict": v.to_json()}


def cmd_nil(args):
    from . import nilpattern as npat
    from .group import make_group
    from .homs import Hom

    act = args.action
    if act in ("validate", "core"):
        N = _pattern(_load(args.file, "pattern"))
        out = {"order": N.order, "core_size": N.core_size, "abelian": npat.is_abelian(N)}
        if act == "core":
            c = npat.core(N)
            out["action"] = c.action_table().tolist() if N.order * N.core_size <= 10**6 else None
        return 0, out
    if act == "interpret-epi":
        obj = _load(args.file, "epi")
        it = npat.interpret_epi(_pattern(obj["pattern"]), obj["T3"])
        return 0, {"pattern": it.pattern.to_json(), "core_map": it.core_map.tolist(), "checks": it.info}
    if act == "interpret-mono":
        obj = _load(args.file, "mono")
        N = _pattern(obj["pattern"])
        it = npat.interpret_mono(N, Hom(N.T, make_group(obj["T2"]), obj["images"]))
        return 0, {"pattern": it.pattern.to_json(), "core_map": it.core_map.tolist(), "checks": it.info}
    if act == "correct":
        from .almosthom import correct_almost_nilmorphism

        obj = _load(args.file, "nilvalues")
        A = make_group(obj["A"])
        N = _pattern(obj["pattern"])
        chi = [int(v[0]) for v in obj["values"]]
        z = [_angle(v[1]) for v in obj["values"]]
        res = correct_almost_nilmorphism(A, N, chi, z, args.delta)
        return (1 if hasattr(res, "stage") else 0), res.to_json()
    obj = _load(args.file, "morphism")
    A = make_group(obj["A"])
    N = _pattern(obj["pattern"])
    psi = obj["psi"]
    if act == "verify":
        r = npat.verify_nilmorphism(A, N, psi)
        if isinstance(r, npat.Refutation):
            return 1, {"nilmorphism": False, "witness": r.to_json()}
        return 0, {"nilmorphism": True, "n": r.n.tolist(), "chi": r.chi.tolist()}
    if act == "lift":
        L = npat.lift(A, N, psi)
        return 0, {"pattern": L.pattern.to_json(), "psi2": L.psi2.tolist()}
    if act == "split":
        S = npat.split_hom(A, N, psi)
        return 0, {
            "pattern": S.pattern.to_json(),
            "phi3": S.phi3.tolist(),
            "components": [[list(a), list(x), z] for a, x, z in S.components()],
            "checks": S.checks,
        }
    raise UsageError(f"unknown nil action {act}")


def cmd_hom(args):
    from .almosthom import AlmostHom, CircleExtension, correct_almost_hom, correct_eps_linear
    from .group import make_group

    if args.action == "correct":
        obj = _load(args.file, "almosthom")
        A = make_group(obj["A"])
        if obj.get("B"):
            B = make_group(obj["B"])
            nb = B.order
            beta = [[Fraction(0)] * nb for _ in range(nb)]
            for key, v in obj.get("beta", {}).items():
                i, j = (int(s) for s in key.strip("()").split(","))
                beta[i][j] = _angle(v)
            ext = CircleExtension(B.add_table, beta)
        else:
            ext = CircleExtension.trivial()
        vals = obj["values"]
        if sorted(int(k) for k in vals) != list(range(A.order)):
            raise UsageError("values must list every element of A")
        b = [int(vals[str(a)][0]) for a in range(A.order)]
        x = [_angle(vals[str(a)][1]) for a in range(A.order)]
        res = correct_almost_hom(AlmostHom(A, ext, b, x), args.eps)
        return 0, res.to_json()
    obj = _load(args.file, "linear")
    A = make_group(obj["A"])
    f = [[_angle(v) for v in row] for row in obj["values"]]
    return 0, correct_eps_linear(A, f, args.eps).to_json()


def cmd_decomp(args):
    from .decompose import (
        best_correlation,
        build_dictionary,
        delta_correlates_monomial,
        delta_correlates_twisted,
        structure_decompose,
    )
    from .group import GroupFunction

    f = _function(_load(args.file, "function"))
    if args.action == "run":
        d = structure_decompose(f, args.eps, args.theta, args.budget)
        return 0, d.to_json()
    if args.features:
        feats = _load(args.features, "features")["features"]
        fl = []
        for item in feats:
            fo = _validate({"group": list(f.group.factors), "values": item["values"]}, "function")
            fl.append((item.get("tag"), _function(fo)))
        if args.delta is None:
            raise UsageError("--delta is required with --features")
        fn = delta_correlates_twisted if args.twisted else delta_correlates_monomial
        w = fn(f, fl, args.delta)
        return (0, {"witness": w.to_json()}) if w else (1, {"witness": None})
    tag, c = best_correlation(f, build_dictionary(f.group))
    return 0, {"tag": list(tag) if not isinstance(tag[0], tuple) else [list(tag[0]), list(tag[1])], "coefficient": c}


def cmd_spectrum(args):
    from .group import dominant_spectrum

    f = _function(_load(args.file, "function"))
    spec = dominant_spectrum(f, args.tau)
    return 0, {"tau": args.tau, "spectrum": [{"character": list(ch), "coefficient": c} for ch, c in spec]}


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hofa", description="Higher-order Fourier analysis on finite abelian groups")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["exact", "float"], default="float")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--budget-terms", type=int, default=None, help="override HOFA_BUDGET")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("group")
    s.add_argument("--group", type=int, nargs="+", required=True)
    s.add_argument("--elements", action="store_true")
    s.set_defaults(func=cmd_group)

    s = sub.add_parser("norm")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--method", choices=["auto", "direct"], default="auto")
    s.add_argument("file")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("conv")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("file")
    s.set_defaults(func=cmd_conv)

    s = sub.add_parser("gowers-inner")
    s.add_argument("file")
    s.set_defaults(func=cmd_gowers_inner)

    s = sub.add_parser("cube")
    s.add_argument("action", choices=["bdk"])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--group", type=int, nargs="+", required=True)
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--member")
    grp.add_argument("--decompose")
    grp.add_argument("--census", action="store_true")
    s.set_defaults(func=cmd_cube)

    s = sub.add_parser("poly")
    psub = s.add_subparsers(dest="action", required=True)
    v = psub.add_parser("verify")
    v.add_argument("--degree", type=int, required=True)
    v.add_argument("--check", choices=["auto", "exhaustive", "generators", "random"], default="auto")
    v.add_argument("file")
    v.set_defaults(func=cmd_poly)
    ph = psub.add_parser("phase")
    ph.add_argument("--group", dest="N", type=int, required=True)
    ph.add_argument("--a", type=int, required=True)
    ph.add_argument("--b", type=int, required=True)
    ph.add_argument("--half", action="store_true")
    ph.set_defaults(func=cmd_poly)

    s = sub.add_parser("nil")
    s.add_argument(
        "action", choices=["validate", "core", "interpret-epi", "interpret-mono", "lift", "verify", "split", "correct"]
    )
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("file")
    s.set_defaults(func=cmd_nil)

    s = sub.add_parser("hom")
    s.add_argument("action", choices=["correct", "eps-linear"])
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("file")
    s.set_defaults(func=cmd_hom)

    s = sub.add_parser("decomp")
    s.add_argument("action", choices=["run", "correlate"])
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--theta", type=float, default=0.2)
    s.add_argument("--budget", type=int, default=20)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--features", default=None)
    s.add_argument("--twisted", action="store_true")
    s.add_argument("file")
    s.set_defaults(func=cmd_decomp)

    s = sub.add_parser("spectrum")
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("file")
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    saved = os.environ.get("HOFA_BUDGET")
    if args.budget_terms is not None:
        os.environ["HOFA_BUDGET"] = str(args.budget_terms)
    header = {"tool-version": __version__, "seed": args.seed, "mode": args.mode}
    try:
        code, body = args.func(args)
    except UsageError as exc:
        code, body = 2, {"error": "usage", "message": str(exc)}
    except ResourceError as exc:
        code, body = 3, {"error": "resource", "message": str(exc)}
    except HofaError as exc:
        code, body = 2, {"error": type(exc).__name__, "message": str(exc)}
    finally:
        if saved is None:
            os.environ.pop("HOFA_BUDGET", None)
        else:
            os.environ["HOFA_BUDGET"] = saved
    text = dumps({**body, **header}) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
