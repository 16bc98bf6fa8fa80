"""Readers and writers for the two on-disk formats the harness touches.

SFT holds one little-endian tensor: the magic bytes ``SFT1``, a dtype
code byte (0 float32, 1 uint8, 2 uint32), a rank byte (1 to 3), the
extents as uint32, then the row-major payload. PNM covers the binary
``P5``/``P6`` flavors with maxval 255. Everything is validated on the
way in; malformed files raise :class:`FormatError`.
"""

import struct

import numpy as np

MAGIC = b"SFT1"

_DTYPE_BY_CODE = {0: np.dtype("<f4"), 1: np.dtype("u1"), 2: np.dtype("<u4")}
_CODE_BY_DTYPE = {dt: code for code, dt in _DTYPE_BY_CODE.items()}


class FormatError(ValueError):
    """Malformed SFT or PNM content."""


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}")
    if len(blob) < 6:
        raise FormatError(f"{path}: truncated header")
    code, ndim = blob[4], blob[5]
    if code not in _DTYPE_BY_CODE:
        raise FormatError(f"{path}: unknown dtype code {code}")
    if not 1 <= ndim <= 3:
        raise FormatError(f"{path}: rank {ndim} outside 1..3")
    header_end = 6 + 4 * ndim
    if len(blob) < header_end:
        raise FormatError(f"{path}: truncated extents")
    shape = struct.unpack(f"<{ndim}I", blob[6:header_end])
    dtype = _DTYPE_BY_CODE[code]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(blob) - header_end != expected:
        raise FormatError(
            f"{path}: payload is {len(blob) - header_end} bytes, expected {expected}"
        )
    arr = np.frombuffer(blob, dtype=dtype, offset=header_end).reshape(shape)
    if dtype.kind == "f" and not np.isfinite(arr).all():
        raise FormatError(f"{path}: non-finite payload values")
    return arr.copy()


def write_tensor(arr, path) -> None:
    arr = np.asarray(arr)
    canon = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
    code = _CODE_BY_DTYPE.get(np.dtype(canon))
    if code is None:
        raise FormatError(f"dtype {arr.dtype} not storable (float32/uint8/uint32)")
    if not 1 <= arr.ndim <= 3:
        raise FormatError(f"rank {arr.ndim} outside 1..3")
    if arr.dtype.kind == "f" and not np.isfinite(arr).all():
        raise FormatError("refusing to write non-finite values")
    payload = np.ascontiguousarray(arr, dtype=_DTYPE_BY_CODE[code]).tobytes()
    header = MAGIC + bytes([code, arr.ndim]) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    with open(path, "wb") as fh:
        fh.write(header + payload)


def _read_pnm(path, kind):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:2] != kind:
        raise FormatError(f"{path}: expected {kind.decode()} PNM, got {blob[:2]!r}")
    pos, fields = 2, []
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated header")
        try:
            fields.append(int(blob[start:pos]))
        except ValueError:
            raise FormatError(f"{path}: bad header token {blob[start:pos]!r}")
    pos += 1  # the single whitespace byte terminating the header
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 supported, got {maxval}")
    channels = 3 if kind == b"P6" else 1
    need = width * height * channels
    if len(blob) - pos < need:
        raise FormatError(f"{path}: pixel data truncated")
    arr = np.frombuffer(blob, dtype=np.uint8, offset=pos, count=need)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return arr.reshape(shape).copy()


def read_image(path) -> np.ndarray:
    """H x W x 3 uint8 from a binary P6 file."""
    return _read_pnm(path, b"P6")


def read_mask(path) -> np.ndarray:
    """H x W uint8 from a binary P5 file."""
    return _read_pnm(path, b"P5")
