"""Plain-text table helpers: CSV with 17 significant digits and a raw grid dump."""

import csv
import json
import struct
from pathlib import Path

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    """Write a header row and data rows with LF endings.

    Floats use 17 significant digits so that reading the file back yields
    bit-identical doubles.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (header, columns) where numeric columns become float arrays."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [row for row in r if row]
    cols = {}
    for k, name in enumerate(header):
        raw = [row[k] for row in data]
        try:
            cols[name] = np.array([float(x) for x in raw])
        except ValueError:
            cols[name] = raw
    return header, cols


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


_MAGIC = b"AXGD"


def write_grid(path, values):
    """Binary dump: magic, ndim, dims as uint64, then little-endian doubles."""
    a = np.ascontiguousarray(values, dtype="<f8")
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", a.ndim))
        fh.write(struct.pack("<%dQ" % a.ndim, *a.shape))
        fh.write(a.tobytes())


def read_grid(path):
    buf = Path(path).read_bytes()
    if buf[:4] != _MAGIC:
        raise ValueError("not a grid dump")
    (ndim,) = struct.unpack_from("<Q", buf, 4)
    shape = struct.unpack_from("<%dQ" % ndim, buf, 12)
    off = 12 + 8 * ndim
    return np.frombuffer(buf[off:], dtype="<f8").reshape(shape).copy()
