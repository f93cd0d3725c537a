"""Matrix I/O: matrix-market for sparse transforms, a little-endian dense
binary format for system matrices, and residual-history CSVs."""

import io
import struct
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .basis import SparseTransform

MAGIC = b"CFIEMAT1"
_DTYPE_CODES = {np.dtype(np.float64): 1, np.dtype(np.complex128): 2}
_CODE_DTYPES = {1: np.dtype(np.float64), 2: np.dtype(np.complex128)}


def write_transform(path, transform: SparseTransform) -> None:
    """Matrix-market coordinate file plus `<stem>.levels.csv` sidecar."""
    path = Path(path)
    scipy.io.mmwrite(str(path), transform.matrix, comment=f"kind={transform.kind}")
    sidecar = path.with_suffix(".levels.csv")
    lines = ["column,level"]
    lines += [f"{j},{int(l)}" for j, l in enumerate(transform.levels)]
    sidecar.write_text("\n".join(lines) + "\n")


def read_transform(path, kind: str) -> SparseTransform:
    path = Path(path)
    mat = sp.csc_matrix(scipy.io.mmread(str(path)))
    sidecar = path.with_suffix(".levels.csv")
    levels = np.zeros(mat.shape[1], dtype=np.int64)
    if sidecar.exists():
        rows = sidecar.read_text().strip().splitlines()[1:]
        for row in rows:
            j, l = row.split(",")
            levels[int(j)] = int(l)
    return SparseTransform(matrix=mat, levels=levels, kind=kind)


def write_dense(path, values: np.ndarray) -> None:
    """MAGIC | rows u64 | cols u64 | dtype u32 | row-major little-endian data."""
    values = np.ascontiguousarray(values)
    dtype = np.dtype(values.dtype)
    if dtype not in _DTYPE_CODES:
        values = values.astype(np.complex128)
        dtype = np.dtype(np.complex128)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<QQI", values.shape[0], values.shape[1],
                            _DTYPE_CODES[dtype]))
        f.write(values.astype(dtype.newbyteorder("<")).tobytes(order="C"))


def read_dense(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        rows, cols, code = struct.unpack("<QQI", f.read(20))
        if code not in _CODE_DTYPES:
            raise ValueError(f"unknown dtype code {code}")
        dtype = _CODE_DTYPES[code]
        data = np.frombuffer(f.read(), dtype=dtype.newbyteorder("<"))
    if data.size != rows * cols:
        raise ValueError("truncated dense matrix payload")
    return data.astype(dtype).reshape(rows, cols)


def residuals_csv(residuals) -> str:
    buf = io.StringIO()
    buf.write("iter,resid\n")
    for i, r in enumerate(residuals, start=1):
        buf.write(f"{i},{r:.12e}\n")
    return buf.getvalue()
