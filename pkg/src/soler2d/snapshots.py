"""Binary snapshot records and the JSON manifest that lists them.

Record layout (little-endian, no padding)::

    offset  size       field
    0       8          t        float64
    8       8          n        int64
    16      8          m        float64
    24      32 n^2     psi      complex128[n, n, 2], row-major, (re, im) interleaved

Index ``[i, j, c]`` is spinor component ``c`` at grid point ``(x_1, x_2) =
(-L + i dx, -L + j dx)``. The time derivative is not stored; it is recomputed
from the equation on load.
"""

import json
from pathlib import Path

import numpy as np

from .evolve import History
from .grid import Grid

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
HEADER = np.dtype([("t", "<f8"), ("n", "<i8"), ("m", "<f8")])
BODY = np.dtype("<c16")


def record_name(k):
    return f"snap_{k:05d}.bin"


def write_record(path, t, mass, data):
    """Write one snapshot; ``data`` has the in-memory shape ``(2, n, n)``."""
    n = data.shape[-1]
    header = np.array([(t, n, mass)], dtype=HEADER)
    body = np.ascontiguousarray(np.moveaxis(data, 0, -1), dtype=BODY)
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(body.tobytes())


def read_record(path):
    """Return ``(t, n, m, data)`` with ``data`` of shape ``(2, n, n)``."""
    raw = Path(path).read_bytes()
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    n = int(header["n"])
    expected = HEADER.itemsize + BODY.itemsize * 2 * n * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for n={n}, found {len(raw)}")
    body = np.frombuffer(raw, dtype=BODY, offset=HEADER.itemsize).reshape(n, n, 2)
    return float(header["t"]), n, float(header["m"]), np.moveaxis(body, -1, 0).astype(complex)


class SnapshotWriter:
    """Streams snapshots to ``directory``; usable as an ``on_snapshot`` callback."""

    def __init__(self, directory, grid, mass, dt, stride_steps, linear_only=False, t0=2.0):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.meta = {"format_version": FORMAT_VERSION, "n": grid.n, "L": grid.L, "mass": float(mass),
                     "t0": float(t0), "dt": float(dt), "stride_steps": int(stride_steps),
                     "linear_only": bool(linear_only), "byte_order": "little",
                     "record_dtype": "header(t:f8, n:i8, m:f8) + complex128[n, n, 2]"}
        self.records = []

    def __call__(self, t, data, data_t=None):
        name = record_name(len(self.records))
        write_record(self.directory / name, t, self.meta["mass"], data)
        self.records.append({"file": name, "t": float(t)})

    def close(self):
        manifest = dict(self.meta, records=self.records)
        (self.directory / MANIFEST).write_text(json.dumps(manifest, indent=2))
        return self.directory / MANIFEST


def dump_history(history, directory):
    """Write every snapshot of ``history`` plus the manifest; returns the manifest path."""
    w = SnapshotWriter(directory, history.grid, history.mass, history.dt, history.stride_steps,
                       history.linear_only, history.t0)
    for t, data in zip(history.times, history.values):
        w(t, data)
    return w.close()


def load_history(directory):
    """Rebuild a :class:`History` from a manifest; ``d_t psi`` is recomputed."""
    directory = Path(directory)
    meta = json.loads((directory / MANIFEST).read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported snapshot format {meta.get('format_version')!r}")
    grid = Grid(int(meta["n"]), float(meta["L"]))
    hist = History(grid, meta["mass"], meta["dt"], meta["stride_steps"], meta["linear_only"], meta["t0"])
    for rec in meta["records"]:
        t, n, m, data = read_record(directory / rec["file"])
        if n != grid.n or m != hist.mass:
            raise ValueError(f"{rec['file']}: header (n={n}, m={m}) disagrees with manifest")
        hist.append(t, data)
    if len(hist):
        hist.epsilon = float(np.sqrt((np.abs(hist.values[0]) ** 2).sum(axis=0)).max())
    return hist
