"""JSON ingestion of problem instances, coefficients and operator expressions.

Complex numbers are written as [re, im]. A curve is given either by explicit
samples [[s, re, im], ...] or by a builder ({"type": "unit_circle", ...}).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import curves
from .errors import InputError
from .problem import ExponentSpec, PcSymbol, ProblemInstance, RadialWeightSpec
from .profiles import profile_from_dict


def as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise InputError(f"expected a complex number [re, im], got {v!r}")


def as_matrix(v):
    """A scalar [re, im] or an N x N nested list of [re, im] entries."""
    try:
        return np.array([[as_complex(v)]])
    except InputError:
        pass
    try:
        rows = [[as_complex(x) for x in row] for row in v]
    except (InputError, TypeError):
        raise InputError(f"expected a complex matrix, got {v!r}") from None
    m = np.array(rows, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("coefficient matrices must be square")
    return m


def curve_from_dict(d: dict) -> curves.CurveSpec:
    whirl = [(complex(w[0], w[1]), float(w[2])) for w in d.get("whirl_points", [])]
    if "builder" in d:
        b = dict(d["builder"])
        kind = b.pop("type", None)
        if "refine_at" in b:
            b["refine_at"] = [as_complex(t) for t in b["refine_at"]]
        try:
            if kind == "unit_circle":
                return curves.unit_circle(whirl_points=whirl, **b)
            if kind == "node_circle":
                c = curves.node_circle(**b)
            elif kind == "whirl_curve":
                c = curves.whirl_curve(**b)
            else:
                raise InputError(f"unknown curve builder {kind!r}")
        except TypeError as exc:
            raise InputError(f"bad curve builder arguments: {exc}") from None
        return curves.CurveSpec(c.s, c.points, tuple(c.whirl_points) + tuple(whirl))
    if "samples" not in d:
        raise InputError("curve needs 'samples' or 'builder'")
    arr = np.asarray(d["samples"], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InputError("curve samples must be [s, re, im] triples")
    return curves.CurveSpec(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], tuple(whirl))


def exponent_from_dict(d, curve) -> ExponentSpec:
    if isinstance(d, (int, float)):
        return ExponentSpec.constant(d)
    declared = d.get("declared_A")
    v = d.get("values")
    if isinstance(v, (int, float)):
        return ExponentSpec(float(v), declared)
    if not isinstance(v, list) or not v:
        raise InputError("exponent.values must be a number, a per-sample list or [s, p] pairs")
    if isinstance(v[0], list):
        table = np.asarray(v, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2:
            raise InputError("exponent table must hold [s, p] pairs")
        L = curve.s[-1] - curve.s[0]
        vals = np.interp(curve.s, table[:, 0], table[:, 1], period=L)
        return ExponentSpec(vals, declared)
    return ExponentSpec(np.asarray(v, dtype=float), declared)


def weight_from_dict(d, base: Path | None = None) -> RadialWeightSpec:
    nodes = []
    for node in (d or {}).get("nodes", []):
        prof = dict(node["profile"])
        if prof.get("type") == "csv" and base is not None:
            prof["path"] = str((base / prof["path"]).resolve())
        nodes.append((as_complex(node["t"]), profile_from_dict(prof)))
    return RadialWeightSpec(tuple(nodes))


def symbol_from_dict(d, curve) -> PcSymbol:
    if "piecewise" in d:
        pw = d["piecewise"]
        return PcSymbol.piecewise_constant(
            curve, [as_complex(t) for t in pw["breaks"]], [as_matrix(v) for v in pw["values"]]
        )
    if "constant" in d:
        return PcSymbol.constant(curve, as_matrix(d["constant"]))
    bg = d.get("background")
    if bg is None:
        raise InputError("symbol needs 'background', 'piecewise' or 'constant'")
    mats = np.array([as_matrix(v) for v in bg])
    jumps = [(as_complex(j["t"]), as_matrix(j["left"]), as_matrix(j["right"])) for j in d.get("jumps", [])]
    sym = PcSymbol(curve, mats, jumps)
    dim = d.get("dimension")
    if dim is not None and dim != sym.N:
        raise InputError(f"symbol dimension {dim} does not match the data ({sym.N})")
    return sym


def expr_from_dict(d, symbols: dict):
    from . import symbols as sy

    if not isinstance(d, dict) or "op" not in d:
        raise InputError(f"bad operator expression {d!r}")
    op = d["op"]
    if op in ("sum", "prod"):
        args = [expr_from_dict(a, symbols) for a in d.get("args", [])]
        if not args:
            raise InputError(f"'{op}' needs arguments")
        return sy.Sum(args) if op == "sum" else sy.Product(args)
    if op == "S":
        return sy.S()
    if op == "identity":
        return sy.Identity()
    if op == "compact":
        return sy.Compact()
    if op == "scalar":
        return sy.Scalar(as_complex(d["value"]))
    if op == "coef":
        ref = d.get("ref")
        if ref not in symbols:
            raise InputError(f"unknown symbol reference {ref!r}")
        return sy.Coef(symbols[ref], ref)
    if op in ("P", "Q"):
        return sy.P() if op == "P" else sy.Q()
    raise InputError(f"unknown operator {op!r}")


@dataclass
class InputBundle:
    problem: ProblemInstance
    symbol: PcSymbol | None = None
    symbols: dict = field(default_factory=dict)
    expr: object = None


def load_input(path) -> InputBundle:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file {path} does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"input is not valid JSON: {exc}") from None
    return bundle_from_dict(doc, path.parent)


def bundle_from_dict(doc: dict, base: Path | None = None) -> InputBundle:
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    try:
        curve = curve_from_dict(doc["curve"])
        exponent = exponent_from_dict(doc["exponent"], curve)
    except KeyError as exc:
        raise InputError(f"missing field {exc}") from None
    weight = weight_from_dict(doc.get("weight"), base)
    problem = ProblemInstance(curve, exponent, weight)
    syms = {}
    for name, sd in (doc.get("symbols") or {}).items():
        syms[name] = symbol_from_dict(sd, curve)
    symbol = None
    if "symbol" in doc:
        symbol = symbol_from_dict(doc["symbol"], curve)
        syms.setdefault("a", symbol)
    for s in syms.values():
        s.validate()
    expr = expr_from_dict(doc["expr"], syms) if "expr" in doc else None
    return InputBundle(problem, symbol, syms, expr)


def dump_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    Path(path).write_text(text)
    return text


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")
