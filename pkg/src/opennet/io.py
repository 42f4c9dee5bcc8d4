"""Edge-list and role-file parsing, JSON/CSV serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from opennet.errors import ValidationError
from opennet.network import NetworkSpec


def parse_edge_text(text: str) -> NetworkSpec:
    """Parse ``source target [weight]`` lines; ``#`` starts a comment.

    Node labels get indices in order of first appearance.  The result has
    every node as both input and output until roles are applied.
    """
    labels: dict[str, int] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValidationError(f"expected 'source target [weight]', got {raw.strip()!r}", lineno)
        try:
            weight = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ValidationError(f"weight {parts[2]!r} is not a number", lineno) from None
        if not math.isfinite(weight) or weight < 0:
            raise ValidationError(f"weight {parts[2]} must be finite and non-negative", lineno)
        ends = [labels.setdefault(p, len(labels)) for p in parts[:2]]
        edges.append((ends[0], ends[1], weight))
    if not labels:
        raise ValidationError("edge list contains no edges")
    n = len(labels)
    return NetworkSpec(tuple(labels), tuple(edges), tuple(range(n)), tuple(range(n)))


def parse_edge_list(path) -> NetworkSpec:
    return parse_edge_text(Path(path).read_text(encoding="utf-8"))


def serialize_edge_list(spec: NetworkSpec) -> str:
    lines = [f"{spec.node_ids[s]} {spec.node_ids[t]} {w!r}" for s, t, w in spec.edges]
    return "\n".join(lines) + "\n"


def resolve_roles(spec: NetworkSpec, roles: dict) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Map ``{"inputs": [...], "outputs": [...]}`` labels to index sets.

    Missing ``outputs`` means every node is an output.
    """
    if not isinstance(roles, dict) or "inputs" not in roles:
        raise ValidationError('roles must be a JSON object with an "inputs" list')
    inputs = roles["inputs"]
    if not isinstance(inputs, list) or not inputs:
        raise ValidationError('"inputs" must be a non-empty list of node labels')
    ins = tuple(spec.index(str(x)) for x in inputs)
    outputs = roles.get("outputs")
    if outputs is None:
        outs = tuple(range(spec.n_nodes))
    else:
        if not isinstance(outputs, list) or not outputs:
            raise ValidationError('"outputs" must be a non-empty list of node labels')
        outs = tuple(spec.index(str(x)) for x in outputs)
    return ins, outs


def parse_roles(path, spec: NetworkSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
    try:
        roles = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from None
    return resolve_roles(spec, roles)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """JSON with shortest round-trip floats; non-finite numbers become ``null``."""
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
