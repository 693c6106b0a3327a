"""Machine-readable report emission.

JSON is emitted with sorted keys and every float serialized to 17
significant digits, so identical results give byte-identical files.  All
writes are atomic (temp file in the target directory, then rename); a run
never leaves a partially written report.  emit_report also writes a
manifest listing the sha-256 of every artifact.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile

import numpy as np


def _fmt_float(v):
    if math.isnan(v) or math.isinf(v):
        return "null"
    return format(v, ".17g")


def dumps_json(obj, indent=0):
    out = io.StringIO()
    _write_json(obj, out, indent)
    out.write("\n")
    return out.getvalue()


def _write_json(obj, out, depth):
    pad = "  " * depth
    pad_in = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        items = sorted(obj.items(), key=lambda kv: kv[0])
        for i, (k, v) in enumerate(items):
            out.write(f"{pad_in}{json.dumps(str(k))}: ")
            _write_json(v, out, depth + 1)
            out.write(",\n" if i + 1 < len(items) else "\n")
        out.write(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.write("[]")
            return
        out.write("[")
        for i, v in enumerate(seq):
            _write_json(v, out, depth + 1)
            if i + 1 < len(seq):
                out.write(", ")
        out.write("]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.write("true" if obj else "false")
    elif obj is None:
        out.write("null")
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.write(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.write(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def rows_to_csv(rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for row in rows:
        writer.writerow([
            _fmt_float(float(v)) if isinstance(v, (float, np.floating)) else v
            for v in row
        ])
    return out.getvalue()


def field_csv(mesh, values):
    rows = [("node", "x", "y", "value")]
    for i in range(mesh.n_nodes):
        rows.append((i, float(mesh.nodes[i, 0]), float(mesh.nodes[i, 1]), float(values[i])))
    return rows_to_csv(rows)


def measure_csv(weights):
    rows = [("node", "weight")]
    for i, w in enumerate(weights):
        rows.append((i, float(w)))
    return rows_to_csv(rows)


def plot_text(pairs):
    """Two-column whitespace format."""
    lines = [f"{_fmt_float(float(a))} {_fmt_float(float(b))}" for a, b in pairs]
    return "\n".join(lines) + "\n"


def write_atomic(path, text):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(out_dir, artifacts: dict):
    """Writes named artifacts plus a manifest of sha-256 digests.

    Returns the manifest dict.  File names are deterministic; callers pass
    fully formatted text content.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for name in sorted(artifacts):
        text = artifacts[name]
        write_atomic(os.path.join(out_dir, name), text)
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        entries.append({"name": name, "sha256": digest})
    manifest = {"files": entries}
    write_atomic(os.path.join(out_dir, "manifest.json"), dumps_json(manifest))
    return manifest
