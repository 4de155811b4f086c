"""Reader/writer for the ``.nldt`` array container.

Layout (all little-endian)::

    magic   4 bytes  b"NLDT"
    version u8       1
    dtype   u8       0=float32 1=float64 2=complex64 3=complex128
    ndim    u8
    pad     u8       0
    extents ndim x u64
    payload row-major
"""
import struct

import numpy as np

MAGIC = b"NLDT"
VERSION = 1

DTYPES = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<c8"),
    3: np.dtype("<c16"),
}
_CODES = {np.dtype(v).newbyteorder("="): k for k, v in DTYPES.items()}


class ArrayFileError(Exception):
    """Malformed container. ``code`` is one of the class-level constants."""

    BAD_MAGIC = 1
    BAD_VERSION = 2
    BAD_DTYPE = 3
    TRUNCATED = 4

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def dtype_code(dtype):
    dt = np.dtype(dtype)
    if dt == np.bool_ or np.issubdtype(dt, np.integer):
        return 0
    try:
        return _CODES[dt.newbyteorder("=")]
    except KeyError:
        raise ArrayFileError(ArrayFileError.BAD_DTYPE, f"unsupported dtype {dt}") from None


def encode(array):
    """Serialize an array to bytes."""
    a = np.asarray(array)
    code = dtype_code(a.dtype)
    a = np.ascontiguousarray(a, dtype=DTYPES[code])
    header = MAGIC + struct.pack("<BBBB", VERSION, code, a.ndim, 0)
    header += struct.pack(f"<{a.ndim}Q", *a.shape)
    return header + a.tobytes(order="C")


def decode(buf):
    if len(buf) < 8 or buf[:4] != MAGIC:
        raise ArrayFileError(ArrayFileError.BAD_MAGIC, "bad magic")
    version, code, ndim, _ = struct.unpack("<BBBB", buf[4:8])
    if version != VERSION:
        raise ArrayFileError(ArrayFileError.BAD_VERSION, f"unsupported version {version}")
    if code not in DTYPES:
        raise ArrayFileError(ArrayFileError.BAD_DTYPE, f"unknown dtype code {code}")
    end = 8 + 8 * ndim
    if len(buf) < end:
        raise ArrayFileError(ArrayFileError.TRUNCATED, "truncated header")
    shape = struct.unpack(f"<{ndim}Q", buf[8:end])
    dt = DTYPES[code]
    nbytes = dt.itemsize * int(np.prod(shape, dtype=np.int64))
    if len(buf) - end < nbytes:
        raise ArrayFileError(
            ArrayFileError.TRUNCATED,
            f"truncated payload: expected {nbytes} bytes, found {len(buf) - end}")
    return np.frombuffer(buf, dtype=dt, count=nbytes // dt.itemsize, offset=end).reshape(shape).copy()


def write_array(path, array):
    with open(path, "wb") as fh:
        fh.write(encode(array))


def read_array(path):
    with open(path, "rb") as fh:
        return decode(fh.read())
