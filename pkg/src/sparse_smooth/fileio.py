"""Plain-text formats for images, sampling patterns, measurements and manifests.

``.grid``   first line ``n n``, then n rows of n values
``.pat``    first line ``n L``, then L lines ``k l``
``.meas``   first line ``n L``, then L lines ``k l re im``
manifest    ``key=value`` lines

Floats are written with 17 significant digits, which round-trips IEEE doubles
exactly.
"""

from pathlib import Path

import numpy as np

from .operators import Measurement, SamplingPattern

__all__ = [
    "FormatError",
    "write_grid",
    "read_grid",
    "write_pattern",
    "read_pattern",
    "write_measurement",
    "read_measurement",
    "write_keyvalues",
    "read_keyvalues",
    "write_pgm",
]

_FMT = "%.17g"


class FormatError(ValueError):
    pass


def _fmt(v):
    return _FMT % v


def _lines(path):
    text = Path(path).read_text()
    return [ln for ln in text.splitlines() if ln.strip()]


def _header(line, path):
    try:
        a, b = (int(t) for t in line.split())
    except ValueError as exc:
        raise FormatError(f"{path}: bad header {line!r}") from exc
    return a, b


def write_grid(path, image):
    x = np.asarray(image, dtype=np.float64)
    n = x.shape[0]
    rows = [f"{n} {n}"]
    rows.extend(" ".join(_fmt(v) for v in row) for row in x)
    Path(path).write_text("\n".join(rows) + "\n")


def read_grid(path):
    lines = _lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    n, m = _header(lines[0], path)
    if n != m or len(lines) != n + 1:
        raise FormatError(f"{path}: expected {n} rows of a square grid")
    try:
        x = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric value") from exc
    if x.shape != (n, n):
        raise FormatError(f"{path}: expected {n} values per row")
    return x


def write_pattern(path, pattern):
    rows = [f"{pattern.n} {pattern.L}"]
    rows.extend(f"{k} {l}" for k, l in pattern.indices)
    Path(path).write_text("\n".join(rows) + "\n")


def _parse_indices(lines, path, ncols):
    try:
        vals = [ln.split() for ln in lines]
        if any(len(v) != ncols for v in vals):
            raise ValueError
        return vals
    except ValueError as exc:
        raise FormatError(f"{path}: expected {ncols} columns per line") from exc


def read_pattern(path, require_dc=True):
    lines = _lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    n, L = _header(lines[0], path)
    if len(lines) != L + 1:
        raise FormatError(f"{path}: header says {L} indices, found {len(lines) - 1}")
    vals = _parse_indices(lines[1:], path, 2)
    idx = np.array([[int(a), int(b)] for a, b in vals], dtype=np.int64).reshape(-1, 2)
    return SamplingPattern(n, idx, require_dc=require_dc)


def write_measurement(path, meas):
    p = meas.pattern
    rows = [f"{p.n} {p.L}"]
    rows.extend(
        f"{k} {l} {_fmt(v.real)} {_fmt(v.imag)}" for (k, l), v in zip(p.indices, meas.values)
    )
    Path(path).write_text("\n".join(rows) + "\n")


def read_measurement(path, pattern=None):
    """Read a ``.meas`` file; when ``pattern`` is given its index order must match."""
    lines = _lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    n, L = _header(lines[0], path)
    if len(lines) != L + 1:
        raise FormatError(f"{path}: header says {L} values, found {len(lines) - 1}")
    vals = _parse_indices(lines[1:], path, 4)
    idx = np.array([[int(v[0]), int(v[1])] for v in vals], dtype=np.int64).reshape(-1, 2)
    values = np.array([float(v[2]) + 1j * float(v[3]) for v in vals])
    if pattern is None:
        pattern = SamplingPattern(n, idx, require_dc=False)
    elif pattern.n != n or not np.array_equal(pattern.indices, idx):
        raise FormatError(f"{path}: indices do not match the sampling pattern")
    return Measurement(pattern, values)


def write_keyvalues(path, items):
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in items.items()))


def read_keyvalues(path):
    out = {}
    for ln in _lines(path):
        if "=" not in ln:
            raise FormatError(f"{path}: expected key=value, got {ln!r}")
        k, v = ln.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_pgm(path, image):
    """8-bit binary PGM; linear map from [min, max] to [0, 255] (constant images -> 0)."""
    x = np.asarray(image, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    px = np.clip(np.rint((x - lo) * scale), 0, 255).astype(np.uint8)
    h, w = px.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes())
