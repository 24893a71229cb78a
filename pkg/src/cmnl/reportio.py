"""Deterministic document and report serialization.

Two flavors of JSON output:
  dumps_document  - instance/assortment files; floats use shortest exact repr
                    so documents round-trip to equal objects.
  dumps_report    - machine-readable reports; floats carry 12 significant
                    digits; keys are sorted; output is byte-stable for fixed
                    inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from .model import ParseError

SCHEMA_VERSION = 1


def parse_json(text: str, what: str = "document") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON ({exc})") from None


def _fmt_float(x: float, sig: int | None) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    if sig is None:
        out = repr(float(x))
    else:
        out = format(float(x), f".{sig}g")
    # keep JSON-valid tokens (repr gives e.g. '1.0', format may give '1e+30')
    return out


def _dump(obj: Any, sig: int | None, indent: int, level: int) -> str:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj, sig)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_dump(x, sig, indent, level + 1) for x in obj]
        return "[\n" + ",\n".join(pad_in + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        keys = sorted(obj)
        items = [
            f"{json.dumps(str(k))}: {_dump(obj[k], sig, indent, level + 1)}"
            for k in keys
        ]
        return "{\n" + ",\n".join(pad_in + s for s in items) + "\n" + pad + "}"
    # numpy scalars and arrays reduce to the plain cases above
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):
        return _dump(obj.item(), sig, indent, level)
    if hasattr(obj, "tolist"):
        return _dump(obj.tolist(), sig, indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_document(obj: Any) -> str:
    return _dump(obj, sig=None, indent=2, level=0) + "\n"


def dumps_report(obj: Any) -> str:
    return _dump(obj, sig=12, indent=2, level=0) + "\n"


def digest_inputs(*parts: str | bytes) -> str:
    """Stable hex digest identifying the inputs a report was derived from."""
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, str):
            part = part.encode("utf-8")
        h.update(part)
        h.update(b"\x00")
    return h.hexdigest()[:16]


def make_report(command: str, inputs_digest: str, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs_digest": inputs_digest,
        "results": results,
    }
