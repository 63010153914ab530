"""Structured-text (JSON) files for protocols and strategies, and numeric output.

Complex numbers are ``[re, im]`` pairs. Operators on a move space are given
blockwise, one matrix per total charge::

    {"blocks": [{"total": "0", "matrix": [[[1, 0], [0, 0]], ...]}, ...]}

Totals that are not listed are zero. ``{"dense": matrix}`` is also accepted.
Every float is written with 17 significant digits so reruns compare byte for
byte.
"""

import csv
import json
import math

import numpy as np

from .charges import ChargeSystem, charge_system, from_data
from .errors import SchemaError, SSRError
from .games import Protocol, Strategy, move_space

SCHEMA_VERSION = 1


# numbers -------------------------------------------------------------------------------


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return f"{x:.17g}"


def dumps(obj, indent=2, _level=0):
    """JSON text with 17-significant-digit floats; keys keep insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{fmt(obj.real)}, {fmt(obj.imag)}]"
    return fmt(obj)


def write_csv(path_or_file, header, rows):
    def emit(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as f:
            emit(f)


# complex arrays ------------------------------------------------------------------------


def encode_array(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_array(x) for x in a]


def decode_array(data, where, ndim):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(where, "expected a rectangular array of [re, im] pairs") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise SchemaError(where, f"expected a {ndim}-d array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _need(data, key, kind, where=""):
    path = f"{where}.{key}" if where else key
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(path, "missing field")
    if not isinstance(data[key], kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise SchemaError(path, f"expected {names}")
    return data[key]


# charge systems and shapes -------------------------------------------------------------


def encode_system(cs):
    try:
        if charge_system(cs.name).to_data() == cs.to_data():
            return cs.name
    except SSRError:
        pass
    return cs.to_data()


def decode_system(data, where="charge_system"):
    if isinstance(data, ChargeSystem):
        return data
    try:
        return charge_system(data) if isinstance(data, str) else from_data(data)
    except SchemaError as exc:
        raise SchemaError(f"{where}.{exc.where}", str(exc).split(": ", 1)[-1]) from None
    except SSRError as exc:
        raise SchemaError(where, str(exc)) from None


def encode_shape(cs, shape):
    return {cs.labels[q]: int(d) for q, d in enumerate(shape) if d}


def decode_shape(cs, data, where):
    if isinstance(data, list):
        if len(data) != len(cs):
            raise SchemaError(where, f"expected {len(cs)} dimensions")
        return tuple(int(d) for d in data)
    if not isinstance(data, dict):
        raise SchemaError(where, "expected a mapping from charge label to dimension")
    out = [0] * len(cs)
    for lab, d in data.items():
        try:
            q = cs.index(lab)
        except SSRError:
            raise SchemaError(f"{where}.{lab}", "unknown charge label") from None
        if not isinstance(d, int) or d < 0:
            raise SchemaError(f"{where}.{lab}", "dimension must be a nonnegative integer")
        out[q] = d
    return tuple(out)


# operators on move spaces ---------------------------------------------------------------


def encode_operator(space, w, tol=0.0):
    blocks = []
    for t, ids in space.total_grid().items():
        sub = w[np.ix_(ids, ids)]
        if np.max(np.abs(sub), initial=0.0) > tol:
            blocks.append({"total": space.cs.labels[t], "matrix": encode_array(sub)})
    return {"blocks": blocks}


def decode_operator(space, data, where):
    if not isinstance(data, dict):
        raise SchemaError(where, "expected {'blocks': [...]} or {'dense': matrix}")
    if "dense" in data:
        m = decode_array(data["dense"], f"{where}.dense", 2)
        if m.shape != (space.dim, space.dim):
            raise SchemaError(f"{where}.dense", f"expected a {space.dim}x{space.dim} matrix")
        return m
    grid = space.total_grid()
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for k, blk in enumerate(_need(data, "blocks", list, where)):
        here = f"{where}.blocks[{k}]"
        lab = _need(blk, "total", (str, int), here)
        try:
            t = space.cs.index(lab)
        except SSRError:
            raise SchemaError(f"{here}.total", f"unknown charge label {lab!r}") from None
        if t not in grid:
            raise SchemaError(f"{here}.total", f"no sector of total {lab} in this move space")
        ids = grid[t]
        m = decode_array(_need(blk, "matrix", list, here), f"{here}.matrix", 2)
        if m.shape != (len(ids), len(ids)):
            raise SchemaError(f"{here}.matrix", f"expected {len(ids)}x{len(ids)} for total {lab}")
        out[np.ix_(ids, ids)] = m
    return out


# protocols and strategies ---------------------------------------------------------------


def protocol_to_data(p):
    cs = p.cs
    spaces = {"A": move_space(cs, p.shape_a, p.shape_m, "A"), "B": move_space(cs, p.shape_b, p.shape_m, "B")}
    data = {
        "schema_version": SCHEMA_VERSION,
        "kind": "protocol",
        "name": p.name,
        "charge_system": encode_system(cs),
        "rounds": p.rounds,
        "shapes": {"A": encode_shape(cs, p.shape_a), "B": encode_shape(cs, p.shape_b), "M": encode_shape(cs, p.shape_m)},
        "initial": {"A": encode_array(p.xi_a), "B": encode_array(p.xi_b), "M": encode_array(p.xi_m)},
        "moves": {
            "A": [encode_operator(spaces["A"], w) for w in p.alice_moves],
            "B": [encode_operator(spaces["B"], w) for w in p.bob_moves],
        },
        "measurements": {
            "A": [encode_operator(spaces["A"], e) for e in p.alice_measure],
            "B": [encode_operator(spaces["B"], e) for e in p.bob_measure],
        },
    }
    if not p.trivial_total:
        data["initial_charges"] = {"A": cs.labels[p.charge_a], "B": cs.labels[p.charge_b]}
    return data


def _check_version(data):
    v = _need(data, "schema_version", int)
    if v != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported version {v}; this build reads {SCHEMA_VERSION}")


def protocol_from_data(data):
    if not isinstance(data, dict):
        raise SchemaError("$", "expected a JSON object")
    _check_version(data)
    cs = decode_system(_need(data, "charge_system", (str, dict)))
    rounds = _need(data, "rounds", int)
    shapes = _need(data, "shapes", dict)
    sa, sb, sm = (decode_shape(cs, _need(shapes, k, (dict, list), "shapes"), f"shapes.{k}") for k in "ABM")
    init = _need(data, "initial", dict)
    xi = {k: decode_array(_need(init, k, list, "initial"), f"initial.{k}", 1) for k in "ABM"}
    charges = data.get("initial_charges", {})
    qa, qb = (cs.index(charges[k]) if k in charges else None for k in "AB")
    spaces = {"A": move_space(cs, sa, sm, "A"), "B": move_space(cs, sb, sm, "B")}
    ops = {}
    for section in ("moves", "measurements"):
        sec = _need(data, section, dict)
        for k in "AB":
            items = _need(sec, k, list, section)
            ops[section, k] = tuple(decode_operator(spaces[k], w, f"{section}.{k}[{i}]") for i, w in enumerate(items))
    try:
        return Protocol(
            cs, rounds, sa, sb, sm, xi["A"], xi["B"], xi["M"],
            ops["moves", "A"], ops["moves", "B"], ops["measurements", "A"], ops["measurements", "B"],
            name=str(data.get("name", "protocol")), charge_a=qa, charge_b=qb,
        )
    except SSRError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("$", str(exc)) from None


def strategy_to_data(s, p):
    """``world`` is ``"I"`` for a strategy in ``p`` and ``"U"`` for one in a single-charge game."""
    cs = p.cs
    space = move_space(cs, s.shape, p.shape_m, s.party)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "strategy",
        "party": s.party,
        "world": p.world,
        "shape": encode_shape(cs, s.shape),
        "initial": encode_array(s.xi),
        "moves": [encode_operator(space, w) for w in s.moves],
    }


def strategy_from_data(data, p):
    """Strategy for game ``p``; ``p`` supplies the charge system and message shape."""
    if not isinstance(data, dict):
        raise SchemaError("$", "expected a JSON object")
    _check_version(data)
    party = _need(data, "party", str)
    if party not in ("A", "B"):
        raise SchemaError("party", "must be 'A' or 'B'")
    cs = p.cs
    shape = decode_shape(cs, _need(data, "shape", (dict, list)), "shape")
    space = move_space(cs, shape, p.shape_m, party)
    xi = decode_array(_need(data, "initial", list), "initial", 1)
    moves = tuple(decode_operator(space, w, f"moves[{i}]") for i, w in enumerate(_need(data, "moves", list)))
    return Strategy(party, shape, xi, moves, None)


def read_json(path):
    """Parse a JSON file, reporting syntax errors with their line and column."""
    with open(path) as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
