"""Versioned little-endian binary container for models and encoded datasets.

Layout::

    magic        8 bytes   b"CMDPIDS\\0"
    version      u16
    reserved     u16       always 0
    meta_len     u32
    meta         meta_len bytes of UTF-8 JSON (sorted keys)
    n_arrays     u32
    per array:   u16 name_len, name, u8 dtype code, u8 ndim, ndim x u64 dims
    data         raw array values in table order, little-endian
    crc32        u32 over every preceding byte

Writing is deterministic: identical inputs give identical bytes.
"""

import json
import struct
import zlib

import numpy as np

from .errors import BadMagicError, CorruptFileError, TruncatedFileError, VersionError

MAGIC = b"CMDPIDS\0"
VERSION = 1

_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<i8")}
_CODES = {np.dtype("float64"): 0, np.dtype("int64"): 1}


def dumps(meta, arrays):
    """Serialise ``meta`` (JSON-able dict) and ``arrays`` (name -> ndarray)."""
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    out = [MAGIC, struct.pack("<HHI", VERSION, 0, len(meta_bytes)), meta_bytes]
    out.append(struct.pack("<I", len(arrays)))
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        code = _CODES.get(arr.dtype)
        if code is None:
            raise TypeError(f"array {name!r}: unsupported dtype {arr.dtype}")
        encoded = name.encode()
        out.append(struct.pack("<HBB", len(encoded), code, arr.ndim) + encoded)
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        blobs.append(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())
    body = b"".join(out + blobs)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0
        self.meta_len = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise TruncatedFileError(
                f"file ends at byte {len(self.buf)}, needed {self.pos + n}")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _parse(r):
    try:
        meta = json.loads(r.take(r.meta_len).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"metadata block unreadable: {exc}") from None
    (n_arrays,) = r.unpack("<I")
    table = []
    for _ in range(n_arrays):
        name_len, code, ndim = r.unpack("<HBB")
        name = r.take(name_len).decode()
        shape = r.unpack(f"<{ndim}Q")
        if code not in _DTYPES:
            raise CorruptFileError(f"array {name!r}: unknown dtype code {code}")
        table.append((name, _DTYPES[code], shape))
    arrays = {}
    for name, dtype, shape in table:
        count = 1
        for d in shape:
            count *= d  # python ints: a corrupted dimension cannot overflow
        raw = r.take(count * dtype.itemsize)
        arrays[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
    r.take(4)  # crc
    return meta, arrays


def loads(buf):
    """Parse bytes produced by :func:`dumps`; returns ``(meta, arrays)``.

    A short file raises :class:`TruncatedFileError`; any other damage that
    the checksum or structure reveals raises :class:`CorruptFileError`.
    """
    r = _Reader(buf)
    if r.take(len(MAGIC)) != MAGIC:
        raise BadMagicError("not a cmdp-ids container (bad magic)")
    version, _, r.meta_len = r.unpack("<HHI")
    if version != VERSION:
        raise VersionError(f"container version {version}, this build reads {VERSION}")
    intact = len(buf) >= r.pos + 4 and zlib.crc32(buf[:-4]) == struct.unpack("<I", buf[-4:])[0]
    try:
        meta, arrays = _parse(r)
    except TruncatedFileError:
        if intact:
            raise CorruptFileError("checksum matches but the layout is inconsistent") from None
        raise
    except CorruptFileError:
        raise
    except (ValueError, UnicodeDecodeError, struct.error, MemoryError) as exc:
        raise CorruptFileError(f"unreadable array table: {exc}") from None
    if r.pos != len(buf):
        raise CorruptFileError(f"{len(buf) - r.pos} unexpected trailing bytes")
    if not intact:
        raise CorruptFileError("checksum mismatch")
    return meta, arrays


def write(path, meta, arrays):
    data = dumps(meta, arrays)
    with open(path, "wb") as fh:
        fh.write(data)


def read(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
