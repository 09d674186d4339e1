"""JSON encoding of fields and series, plus a 17-significant-digit dumper."""
from __future__ import annotations

import json
import math

import numpy as np

from .series import ScalarSeries, TensorSeries
from .torus import ScalarField, SymTensorField, TorusGrid


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if s in ("0", "-0"):
        return "0.0"
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps(obj, indent: int | None = 2) -> str:
    """Deterministic JSON with every float written to 17 significant digits."""
    pad = "" if indent is None else "\n"

    def enc(o, level):
        ind = "" if indent is None else " " * (indent * (level + 1))
        end = "" if indent is None else " " * (indent * level)
        sep = ", " if indent is None else ",\n"
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{ind}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{" + pad + sep.join(items) + pad + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[" + pad + sep.join(ind + enc(v, level + 1) for v in o) + pad + end + "]"
        if isinstance(o, np.ndarray):
            return enc(o.tolist(), level)
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _fmt_float(float(o))
        if o is None:
            return "null"
        return json.dumps(o)

    return enc(obj, 0)


def _grid_header(grid: TorusGrid | None):
    if grid is None:
        return {"n": None, "periods": [], "samples": 0}
    return grid.to_dict()


def _grid_from(d) -> TorusGrid | None:
    if d.get("n") is None:
        return None
    return TorusGrid(int(d["n"]) - 1, tuple(d["periods"]), int(d["samples"]))


def to_dict(obj) -> dict:
    """Schema: {"kind", "n", "periods", "samples", "constant", "coefficients"} with row-major flattening."""
    if isinstance(obj, (ScalarSeries, TensorSeries)):
        kind = "scalar_series" if isinstance(obj, ScalarSeries) else "tensor_series"
        rows = [np.asarray(c).ravel().tolist() for c in obj.coeffs]
        const = obj.is_constant
        grid = obj.grid
    elif isinstance(obj, ScalarField):
        kind = "tensor_field" if isinstance(obj, SymTensorField) else "scalar_field"
        rows = [obj.values.ravel().tolist()]
        const = obj.is_constant
        grid = obj.grid
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    out = {"kind": kind}
    out.update(_grid_header(grid))
    out["constant"] = bool(const)
    out["coefficients"] = rows
    return out


def from_dict(d: dict):
    kind = d["kind"]
    grid = _grid_from(d)
    tensor = kind.startswith("tensor")
    comp = ()
    if tensor:
        dim = grid.boundary_dim if grid is not None else int(round(math.sqrt(len(d["coefficients"][0]))))
        comp = (dim, dim)
    lead = () if d.get("constant", True) or grid is None else grid.shape
    rows = np.array([np.asarray(r, dtype=float).reshape(lead + comp) for r in d["coefficients"]])
    if kind == "scalar_series":
        return ScalarSeries(rows, grid)
    if kind == "tensor_series":
        return TensorSeries(rows, grid)
    if kind == "scalar_field":
        return ScalarField(grid, rows[0])
    if kind == "tensor_field":
        return SymTensorField(grid, rows[0])
    raise ValueError(f"unknown kind {kind!r}")


def to_json(obj) -> str:
    return dumps(to_dict(obj), indent=None)


def from_json(text: str):
    return from_dict(json.loads(text))
