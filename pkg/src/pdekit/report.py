"""Text rendering of rows and the JSON envelope shared by the CLI."""
from __future__ import annotations

import hashlib
import json

from .jetspace import jet_key

SCHEMA = "pdekit.result/1"


def render_scalar(c, field=None) -> str:
    if field is not None:
        return field.fmt(c)
    if hasattr(c, "numer") and hasattr(c, "denom") and hasattr(c.numer, "terms"):
        text = str(c.numer.as_expr()).replace("**", "^")
        den = str(c.denom.as_expr()).replace("**", "^")
        return text if den == "1" else f"({text})/({den})"
    return str(c)


def render_jet(jet, unknowns=None) -> str:
    k, mu = jet
    name = unknowns[k] if unknowns else f"y{k + 1}"
    return f"{name}[{','.join(str(e) for e in mu)}]"


def render_row(row, unknowns=None, vars=None, field=None) -> str:
    """Terms in descending jet order: ``y[0,2] - x1*y[1,0]``."""
    if not row:
        return "0"
    parts = []
    for jet in sorted(row, key=jet_key, reverse=True):
        c = render_scalar(row[jet], field)
        sym = render_jet(jet, unknowns)
        if " " in c and not (c.startswith("(") and c.endswith(")") and _balanced(c[1:-1])):
            # several terms: keep the sign inside the parentheses
            neg, term = False, f"({c})*{sym}"
        else:
            neg = c.startswith("-")
            body = c[1:] if neg else c
            term = sym if body == "1" else f"{body}*{sym}"
        parts.append((neg, term))
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, t in parts[1:]:
        out += (" - " if neg else " + ") + t
    return out


def _balanced(text: str) -> bool:
    depth = 0
    for ch in text:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def envelope(command: str, result, source: str, log=None, timing=None, version: str = "") -> dict:
    return {
        "schema": SCHEMA,
        "tool_version": version,
        "input_digest": input_digest(source),
        "command": command,
        "result": result,
        "completion_log": log or [],
        "timing": timing,
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_default)


def _default(o):
    if isinstance(o, (tuple, set, frozenset)):
        return list(o)
    return str(o)
