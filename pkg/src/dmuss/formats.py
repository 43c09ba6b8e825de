"""JSON file formats shared by the library and the command line.

Node and user indices are 1-based in every file.  Matrices are lists of
rows; payload, key and share streams are column-major (one list per symbol
position).
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Mapping

from .codec import Payload, ShareSet
from .errors import DmussError, SchemaError
from .galois import FieldMatrix, make_field
from .matching import MatchPlan
from .synthesis import DmussScheme
from .topology import AccessStructure, validate_access_structure, validate_rates


_FLAT_LIST = re.compile(r"\[\s*([^\[\]{}\"]*?)\s*\]")


def dumps(doc: Any) -> str:
    """Indented, key-sorted JSON with innermost scalar lists kept on one line."""
    text = json.dumps(doc, indent=2, sort_keys=True)
    return _FLAT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",") if x.strip()) + "]", text) + "\n"


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def write_json(path, doc: Any) -> None:
    Path(path).write_text(dumps(doc))


def _require(doc: Mapping, *keys):
    if not isinstance(doc, Mapping):
        raise SchemaError("expected a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise SchemaError(f"missing fields: {', '.join(missing)}")


def _int(x, what: str) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise SchemaError(f"{what} must be an integer, got {x!r}")
    return x


def _int_list(xs, what: str) -> list[int]:
    if not isinstance(xs, list):
        raise SchemaError(f"{what} must be a list")
    return [_int(x, what) for x in xs]


def _matrix(rows, field, n_rows: int, n_cols: int, what: str) -> FieldMatrix:
    if not isinstance(rows, list) or len(rows) != n_rows:
        raise SchemaError(f"{what} must have {n_rows} rows")
    grid = [_int_list(r, what) for r in rows]
    if any(len(r) != n_cols for r in grid):
        raise SchemaError(f"{what} rows must have {n_cols} entries")
    if any(not 0 <= x < field.q for r in grid for x in r):
        raise SchemaError(f"{what} entries must lie in [0, {field.q})")
    return FieldMatrix.from_rows(field, grid, n_cols)


# access structure + rates


def problem_from_json(doc: Mapping) -> tuple[AccessStructure, list]:
    _require(doc, "access_sets", "rates")
    sets = doc["access_sets"]
    if not isinstance(sets, list):
        raise SchemaError("access_sets must be a list of lists")
    raw = [_int_list(s, "node index") for s in sets]
    rates = doc["rates"]
    if not isinstance(rates, list) or any(isinstance(r, bool) or not isinstance(r, (int, float)) for r in rates):
        raise SchemaError("rates must be a list of numbers")
    try:
        a = validate_access_structure(raw)
    except DmussError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    if len(rates) != a.user_count:
        raise SchemaError(f"{len(rates)} rates for {a.user_count} access sets")
    return a, rates


def problem_to_json(a: AccessStructure, rates) -> dict:
    labels = a.labels
    return {
        "access_sets": [sorted(labels[n - 1] for n in s) for s in a.access_sets],
        "rates": list(rates),
    }


def load_problem(path) -> tuple[AccessStructure, list]:
    return problem_from_json(read_json(path))


# schemes


def scheme_to_json(s: DmussScheme) -> dict:
    doc = {
        "q": s.q,
        "N": s.node_count,
        "K": s.user_count,
        "rates": list(s.rates),
        "access_sets": s.access.sorted_sets(),
        "decoding": [m.to_rows() for m in s.decoding],
        "encoding": s.encoding.to_rows() if s.encoding is not None else None,
        "key_count": s.key_count,
        "seed": s.seed,
    }
    if s.access.labels != tuple(s.access.nodes):
        doc["node_labels"] = list(s.access.labels)
    if s.match_plan is not None:
        doc["match_plan"] = s.match_plan.to_dict()
        doc["retries"] = s.retries
    return doc


def scheme_from_json(doc: Mapping) -> DmussScheme:
    _require(doc, "q", "N", "K", "rates", "access_sets", "decoding", "encoding", "key_count")
    try:
        field = make_field(_int(doc["q"], "q"))
    except DmussError as exc:
        raise SchemaError(str(exc)) from exc
    N, K = _int(doc["N"], "N"), _int(doc["K"], "K")
    sets = doc["access_sets"]
    if not isinstance(sets, list) or len(sets) != K:
        raise SchemaError(f"access_sets must list {K} sets")
    raw = [_int_list(s, "node index") for s in sets]
    if any(not 1 <= n <= N for s in raw for n in s):
        raise SchemaError(f"node indices must lie in 1..{N}")
    labels = doc.get("node_labels")
    try:
        a = AccessStructure(
            tuple(frozenset(s) for s in raw), N, tuple(_int_list(labels, "label")) if labels else ()
        )
        rates = validate_rates(_int_list(doc["rates"], "rate"), K)
    except (ValueError, DmussError) as exc:
        raise SchemaError(str(exc)) from exc
    dec = doc["decoding"]
    if not isinstance(dec, list) or len(dec) != K:
        raise SchemaError(f"decoding must hold {K} matrices")
    decoding = tuple(_matrix(m, field, N, rates[k], f"decoding[{k + 1}]") for k, m in enumerate(dec))
    encoding = None if doc["encoding"] is None else _matrix(doc["encoding"], field, N, N, "encoding")
    seed = doc.get("seed")
    if seed is not None:
        _int(seed, "seed")
    plan = doc.get("match_plan")
    if plan is not None:
        if not isinstance(plan, Mapping) or not all(isinstance(row, Mapping) for row in plan.values()):
            raise SchemaError("match_plan must map users to {user: [nodes]} objects")
        try:
            plan = MatchPlan.from_dict(plan)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"match_plan: {exc}") from exc
    return DmussScheme(
        field, a, rates, decoding, encoding, _int(doc["key_count"], "key_count"),
        seed=seed, match_plan=plan, retries=_int(doc.get("retries", 0), "retries"),
    )


def load_scheme(path) -> DmussScheme:
    return scheme_from_json(read_json(path))


# payloads, keys and shares (column-major)


def _columns(doc: Mapping, height: int, what: str) -> list[list[int]]:
    L = _int(doc["L"], "L")
    cols = doc["columns"]
    if not isinstance(cols, list) or len(cols) != L:
        raise SchemaError(f"{what} must hold L = {L} columns")
    grid = [_int_list(c, what) for c in cols]
    if any(len(c) != height for c in grid):
        raise SchemaError(f"every {what} column must have {height} entries")
    return grid


def _transpose(cols: list[list[int]], height: int) -> list[list[int]]:
    return [[c[i] for c in cols] for i in range(height)]


def payload_from_json(doc: Mapping) -> Payload:
    _require(doc, "q", "rates", "L", "columns")
    rates = _int_list(doc["rates"], "rate")
    M = sum(rates)
    rows = _transpose(_columns(doc, M, "payload"), M)
    blocks, start = [], 0
    for r in rates:
        blocks.append(rows[start:start + r])
        start += r
    try:
        return Payload.from_blocks(_int(doc["q"], "q"), blocks, _int(doc["L"], "L"))
    except DmussError as exc:
        raise SchemaError(str(exc)) from exc


def payload_to_json(p: Payload) -> dict:
    rows = [r for b in p.blocks for r in b]
    return {"q": p.q, "rates": list(p.rates), "L": p.length,
            "columns": [[r[l] for r in rows] for l in range(p.length)]}


def keys_from_json(doc: Mapping) -> list[list[int]]:
    """Explicit key block as ``key_count x L`` rows."""
    _require(doc, "q", "key_count", "L", "columns")
    n = _int(doc["key_count"], "key_count")
    return _transpose(_columns(doc, n, "key"), n)


def keys_to_json(q: int, rows: list[list[int]], length: int) -> dict:
    return {"q": q, "key_count": len(rows), "L": length,
            "columns": [[r[l] for r in rows] for l in range(length)]}


def shares_from_json(doc: Mapping) -> ShareSet:
    _require(doc, "q", "N", "L", "columns")
    N = _int(doc["N"], "N")
    nodes = _int_list(doc["nodes"], "node") if "nodes" in doc else list(range(1, N + 1))
    if any(not 1 <= n <= N for n in nodes):
        raise SchemaError(f"share nodes must lie in 1..{N}")
    rows = _transpose(_columns(doc, len(nodes), "share"), len(nodes))
    try:
        return ShareSet.from_rows(_int(doc["q"], "q"), rows, nodes, _int(doc["L"], "L"))
    except DmussError as exc:
        raise SchemaError(str(exc)) from exc


def shares_to_json(y: ShareSet, node_count: int) -> dict:
    doc = {"q": y.q, "N": node_count, "L": y.length,
           "columns": [[r[l] for r in y.rows] for l in range(y.length)]}
    if list(y.nodes) != list(range(1, node_count + 1)):
        doc["nodes"] = list(y.nodes)
    return doc
