"""Readers and writers for edge lists, CSV matrices, binary PGM and JSON reports.

Every writer goes through :func:`atomic_write`: data lands in a temporary
file in the target directory and is moved into place with ``os.replace``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, TruncatedData
from .graph import GraphTopology, WeightedLaplacian

SCHEMA_VERSION = 1


def atomic_write(path, data: bytes | str) -> None:
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


# -- edge lists -------------------------------------------------------------


def parse_edge_list(text: str):
    """Parse edge-list text.

    Lines are ``s t`` or ``s t weight``; ``loop k [weight]`` declares a
    self-loop; ``n <count>`` fixes the vertex count (otherwise the largest
    index plus one); ``#`` starts a comment.

    Returns
    -------
    topology : GraphTopology
    u : ndarray or None
        Edge weights in the topology's (sorted) edge order, if given.
    v : ndarray or None
        Length-``n`` self-loop weights, if any loop carried a weight.
    """
    n = None
    edges, weights, loops, loop_weights = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "n":
                if len(tok) != 2:
                    raise ValueError
                n = int(tok[1])
            elif tok[0] == "loop":
                if len(tok) not in (2, 3):
                    raise ValueError
                loops.append(int(tok[1]))
                loop_weights.append(float(tok[2]) if len(tok) == 3 else None)
            else:
                if len(tok) not in (2, 3):
                    raise ValueError
                edges.append((int(tok[0]), int(tok[1])))
                weights.append(float(tok[2]) if len(tok) == 3 else None)
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
    if n is None:
        indices = [i for e in edges for i in e] + loops
        n = max(indices) + 1 if indices else 1
    topology = GraphTopology(n, edges, loops)

    u = None
    if any(w is not None for w in weights):
        if any(w is None for w in weights):
            raise ValueError("either all edges carry a weight or none do")
        by_edge = {(min(s, t), max(s, t)): w for (s, t), w in zip(edges, weights)}
        u = np.array([by_edge[e] for e in topology.edges])
    v = None
    if any(w is not None for w in loop_weights):
        v = np.zeros(n)
        for k, w in zip(loops, loop_weights):
            v[k] = 0.0 if w is None else w
    return topology, u, v


def read_edge_list(path):
    return parse_edge_list(Path(path).read_text())


def format_edge_list(topology: GraphTopology, u=None, v=None) -> str:
    lines = [f"n {topology.n}"]
    for j, (s, t) in enumerate(topology.edges):
        lines.append(f"{s} {t}" if u is None else f"{s} {t} {_fmt(u[j])}")
    for k in topology.self_loops:
        lines.append(f"loop {k}" if v is None else f"loop {k} {_fmt(v[k])}")
    return "\n".join(lines) + "\n"


def write_edge_list(path, lap: WeightedLaplacian | GraphTopology) -> None:
    if isinstance(lap, WeightedLaplacian):
        text = format_edge_list(lap.topology, lap.u, lap.v)
    else:
        text = format_edge_list(lap)
    atomic_write(path, text)


# -- CSV --------------------------------------------------------------------


def read_matrix_csv(path) -> np.ndarray:
    """Numeric CSV (``#`` comments allowed) as a 2-D float array."""
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, dtype=float)
    return data


def format_matrix_csv(a) -> str:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return "".join(",".join(_fmt(x) for x in row) + "\n" for row in a)


def write_matrix_csv(path, a) -> None:
    atomic_write(path, format_matrix_csv(a))


read_samples_csv = read_matrix_csv
write_samples_csv = write_matrix_csv


def write_rows_csv(path, rows: list[dict], columns: list[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    atomic_write(path, buf.getvalue())


# -- PGM --------------------------------------------------------------------


def _pgm_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens after the magic number."""
    pos = 2
    tokens = []
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise MalformedHeader("header ended early")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise MalformedHeader("unterminated comment in header")
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    return tokens, pos + 1


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode binary (P5) PGM bytes with ``maxval <= 255`` into a float array."""
    if data[:2] != b"P5":
        raise MalformedHeader(f"unsupported magic {data[:2]!r}; only binary P5 is read")
    tokens, offset = _pgm_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeader("non-integer header field") from None
    if width < 1 or height < 1:
        raise MalformedHeader("image dimensions must be positive")
    if not 1 <= maxval <= 255:
        raise MalformedHeader(f"maxval {maxval} not supported (must be 1..255)")
    need = width * height
    payload = data[offset : offset + need]
    if len(payload) < need:
        raise TruncatedData(f"expected {need} pixel bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).astype(float)


def encode_pgm(image) -> bytes:
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()


def read_pgm(path) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path, image) -> None:
    """Write a P5 image, rounding and clipping to 0..255."""
    atomic_write(path, encode_pgm(image))


# -- JSON reports -----------------------------------------------------------


def _encode_floats(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return {"__float__": repr(obj)}
    if isinstance(obj, dict):
        return {k: _encode_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode_floats(v) for v in obj]
    if isinstance(obj, np.generic):
        return _encode_floats(obj.item())
    if isinstance(obj, np.ndarray):
        return _encode_floats(obj.tolist())
    return obj


def _decode_floats(obj):
    if isinstance(obj, dict):
        if set(obj) == {"__float__"}:
            return float(obj["__float__"])
        return {k: _decode_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode_floats(v) for v in obj]
    return obj


@dataclass
class RunReport:
    """JSON report written by every CLI subcommand.

    Non-finite floats are stored as ``{"__float__": "inf"}`` so the output
    stays strict JSON and decodes back to the same values.
    """

    subcommand: str
    inputs: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    timing_ms: dict | None = None
    schema: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out = {"schema": self.schema, "subcommand": self.subcommand, "inputs": self.inputs, "result": self.result}
        if self.timing_ms is not None:
            out["timing_ms"] = self.timing_ms
        return _encode_floats(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = _decode_floats(json.loads(text))
        return cls(
            subcommand=d["subcommand"],
            inputs=d.get("inputs", {}),
            result=d.get("result", {}),
            timing_ms=d.get("timing_ms"),
            schema=d.get("schema", SCHEMA_VERSION),
        )

    def write(self, path) -> None:
        atomic_write(path, self.to_json())
