"""Binary field snapshots and amplitude-table files.

Snapshot layout (little-endian): magic "NSFS", version u32 = 1, n u32,
L f64, t f64, ncomp u32, then ncomp * n^3 f64 values component-major with
the x index fastest, then y, then z.  load(save(x)) is byte-identical.
"""

import struct

import numpy as np

from ..errors import SnapshotFormatError

MAGIC = b"NSFS"
VERSION = 1
_HEADER = struct.Struct("<4sIIddI")

TABLE_MAGIC = b"NSAT"
TABLE_VERSION = 1


def snapshot_bytes(n: int, length: float, t: float, fields) -> bytes:
    arrays = [np.ascontiguousarray(f, dtype=float) for f in fields]
    for a in arrays:
        if a.shape != (n, n, n):
            raise SnapshotFormatError(f"field shape {a.shape} != ({n},{n},{n})")
    head = _HEADER.pack(MAGIC, VERSION, n, float(length), float(t), len(arrays))
    # x fastest: fortran-order ravel of (x, y, z)-indexed arrays
    body = b"".join(a.ravel(order="F").tobytes() for a in arrays)
    return head + body


def save_snapshot(path, n: int, length: float, t: float, fields):
    with open(path, "wb") as fh:
        fh.write(snapshot_bytes(n, length, t, fields))


def load_snapshot(path):
    """Returns (n, length, t, [fields]) after validating the length formula."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise SnapshotFormatError("file shorter than the snapshot header")
    magic, version, n, length, t, ncomp = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    want = _HEADER.size + 8 * ncomp * n**3
    if len(data) != want:
        raise SnapshotFormatError(
            f"truncated or padded payload: {len(data)} bytes, expected {want}")
    fields = []
    off = _HEADER.size
    for _ in range(ncomp):
        flat = np.frombuffer(data, dtype="<f8", count=n**3, offset=off)
        fields.append(flat.reshape((n, n, n), order="F").copy())
        off += 8 * n**3
    return n, length, t, fields


def save_table(path, table):
    """Amplitude table: magic NSAT, version, nk, m, order u32; kmax f64;
    k grid, nodes, weights f64; values complex128 (k, out, in) C-order;
    then a length-prefixed potential id string."""
    nk = len(table.k_grid)
    m = table.sphere.size
    head = struct.pack("<4sIIIId", TABLE_MAGIC, TABLE_VERSION, nk, m,
                       table.born_order, table.k_max)
    body = [
        np.ascontiguousarray(table.k_grid, dtype="<f8").tobytes(),
        np.ascontiguousarray(table.sphere.nodes, dtype="<f8").tobytes(),
        np.ascontiguousarray(table.sphere.weights, dtype="<f8").tobytes(),
        np.ascontiguousarray(table.values, dtype="<c16").tobytes(),
    ]
    pid = table.potential_id.encode("utf-8")
    body.append(struct.pack("<I", len(pid)) + pid)
    with open(path, "wb") as fh:
        fh.write(head + b"".join(body))


def load_table(path):
    from ..core.sphere import SphereGrid
    from ..scatter.born import AmplitudeTable

    with open(path, "rb") as fh:
        data = fh.read()
    head = struct.Struct("<4sIIIId")
    if len(data) < head.size:
        raise SnapshotFormatError("file shorter than the table header")
    magic, version, nk, m, order, kmax = head.unpack_from(data)
    if magic != TABLE_MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    if version != TABLE_VERSION:
        raise SnapshotFormatError(f"unsupported table version {version}")
    off = head.size
    def take(count, dtype):
        nonlocal off
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=off)
        off += arr.nbytes
        return arr
    k_grid = take(nk, "<f8").copy()
    nodes = take(3 * m, "<f8").reshape(m, 3).copy()
    weights = take(m, "<f8").copy()
    values = take(nk * m * m, "<c16").reshape(nk, m, m).copy()
    (plen,) = struct.unpack_from("<I", data, off)
    off += 4
    pid = data[off:off + plen].decode("utf-8")
    sphere = SphereGrid(nodes=nodes, weights=weights)
    return AmplitudeTable(k_grid, sphere, values, order, potential_id=pid)
