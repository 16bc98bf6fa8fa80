"""Bit-exact file I/O for feature tensors (SFT), images (PNM), and resampling.

SFT is a tiny language-neutral container for dense row-major arrays:

    offset  size        field
    0       4           magic ``b"SFT1"``
    4       1           dtype code: 0 = real32, 1 = uint8, 2 = uint32
    5       1           ndim (1..3)
    6       4 * ndim    extents, little-endian uint32, each >= 1
    ...     payload     row-major values, little-endian

Images are binary PNM: P5 (grayscale) and P6 (RGB), maxval 255 only.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

SFT_MAGIC = b"SFT1"

# hard cap on element count; guards allocation before trusting header extents
MAX_ELEMENTS = 1 << 31

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("u1"), 2: np.dtype("<u4")}
_CODE_FOR_KIND = {("f", 4): 0, ("u", 1): 1, ("u", 4): 2}


class SftError(ValueError):
    """Base class for SFT parse/serialize failures."""


class SftMagicError(SftError):
    """File does not start with the SFT1 magic bytes."""


class SftTruncatedError(SftError):
    """Payload or header ends before the declared size."""


class SftDimError(SftError):
    """Bad rank, zero extent, or extent product overflow."""


class SftPayloadError(SftError):
    """real32 payload contains NaN or Inf."""


class PnmError(ValueError):
    """Malformed or unsupported PNM file."""


def _atomic_write(path, data: bytes) -> None:
    """Write bytes via a temp file + rename so readers never see partials."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tensor(tensor: np.ndarray, path) -> None:
    """Serialize an array (float32, uint8, or uint32; 1-3 axes) as SFT."""
    arr = np.asarray(tensor)
    key = (arr.dtype.kind, arr.dtype.itemsize)
    if key not in _CODE_FOR_KIND:
        raise SftError(f"unsupported dtype {arr.dtype}; use float32, uint8, or uint32")
    if not 1 <= arr.ndim <= 3:
        raise SftDimError(f"rank {arr.ndim} outside 1..3")
    if arr.size == 0:
        raise SftDimError("zero extent")
    if arr.size > MAX_ELEMENTS:
        raise SftDimError(f"extent product {arr.size} exceeds {MAX_ELEMENTS}")
    if any(e > 0xFFFFFFFF for e in arr.shape):
        raise SftDimError("extent exceeds uint32 range")
    code = _CODE_FOR_KIND[key]
    if code == 0 and not np.isfinite(arr).all():
        raise SftPayloadError("real32 payload contains NaN or Inf")
    header = SFT_MAGIC + struct.pack("<BB", code, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = np.ascontiguousarray(arr, dtype=_DTYPE_CODES[code]).tobytes()
    _atomic_write(path, header + payload)


def read_tensor(path) -> np.ndarray:
    """Parse an SFT file; inverse of :func:`write_tensor`, bit for bit."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != SFT_MAGIC:
        raise SftMagicError(f"{path}: bad magic (expected {SFT_MAGIC!r})")
    if len(blob) < 6:
        raise SftTruncatedError(f"{path}: header cut short")
    code, ndim = struct.unpack_from("<BB", blob, 4)
    if code not in _DTYPE_CODES:
        raise SftError(f"{path}: unknown dtype code {code}")
    if not 1 <= ndim <= 3:
        raise SftDimError(f"{path}: rank {ndim} outside 1..3")
    header_end = 6 + 4 * ndim
    if len(blob) < header_end:
        raise SftTruncatedError(f"{path}: extents cut short")
    shape = struct.unpack_from(f"<{ndim}I", blob, 6)
    if any(e == 0 for e in shape):
        raise SftDimError(f"{path}: zero extent in {shape}")
    count = 1
    for e in shape:
        count *= e
    if count > MAX_ELEMENTS:
        raise SftDimError(f"{path}: extent product {count} exceeds {MAX_ELEMENTS}")
    dtype = _DTYPE_CODES[code]
    expected = header_end + count * dtype.itemsize
    if len(blob) < expected:
        raise SftTruncatedError(
            f"{path}: payload has {len(blob) - header_end} bytes, "
            f"need {count * dtype.itemsize}"
        )
    if len(blob) > expected:
        raise SftError(f"{path}: {len(blob) - expected} trailing bytes")
    arr = np.frombuffer(blob, dtype=dtype, count=count, offset=header_end)
    arr = arr.reshape(shape)
    if code == 0 and not np.isfinite(arr).all():
        raise SftPayloadError(f"{path}: real32 payload contains NaN or Inf")
    return arr.copy()


def _parse_pnm_header(blob: bytes, path):
    """Return (magic, width, height, maxval, payload offset).

    Tokens may be separated by any whitespace; ``#`` comments run to EOL.
    Exactly one whitespace byte separates maxval from the payload.
    """
    if len(blob) < 2 or blob[:1] != b"P" or blob[1:2] not in b"56":
        raise PnmError(f"{path}: not a binary PNM (P5/P6) file")
    magic = blob[:2].decode("ascii")
    tokens = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(blob):
            raise PnmError(f"{path}: header cut short")
        c = blob[pos : pos + 1]
        if c == b"#":
            eol = blob.find(b"\n", pos)
            pos = len(blob) if eol < 0 else eol + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end : end + 1].isspace():
                end += 1
            tok = blob[pos:end]
            if not tok.isdigit():
                raise PnmError(f"{path}: non-numeric header token {tok!r}")
            tokens.append(int(tok))
            pos = end
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise PnmError(f"{path}: missing whitespace before payload")
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise PnmError(f"{path}: degenerate size {width}x{height}")
    if maxval != 255:
        raise PnmError(f"{path}: maxval {maxval} unsupported (need 255)")
    return magic, width, height, maxval, pos + 1


def read_image(path) -> np.ndarray:
    """Read a binary P6 PPM as an H x W x 3 uint8 array."""
    with open(path, "rb") as fh:
        blob = fh.read()
    magic, width, height, _, offset = _parse_pnm_header(blob, path)
    if magic != "P6":
        raise PnmError(f"{path}: expected P6, got {magic}")
    need = width * height * 3
    if len(blob) - offset < need:
        raise PnmError(f"{path}: payload cut short")
    data = np.frombuffer(blob, dtype=np.uint8, count=need, offset=offset)
    return data.reshape(height, width, 3).copy()


def read_gray(path) -> np.ndarray:
    """Read a binary P5 PGM as an H x W uint8 array."""
    with open(path, "rb") as fh:
        blob = fh.read()
    magic, width, height, _, offset = _parse_pnm_header(blob, path)
    if magic != "P5":
        raise PnmError(f"{path}: expected P5, got {magic}")
    need = width * height
    if len(blob) - offset < need:
        raise PnmError(f"{path}: payload cut short")
    data = np.frombuffer(blob, dtype=np.uint8, count=need, offset=offset)
    return data.reshape(height, width).copy()


def write_image(image: np.ndarray, path) -> None:
    """Write an H x W x 3 uint8 array as binary P6, maxval 255."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 3:
        raise PnmError("write_image needs an H x W x 3 uint8 array")
    h, w = arr.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    _atomic_write(path, header + np.ascontiguousarray(arr).tobytes())


def write_gray(image: np.ndarray, path) -> None:
    """Write an H x W uint8 array as binary P5, maxval 255."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8 or arr.ndim != 2:
        raise PnmError("write_gray needs an H x W uint8 array")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    _atomic_write(path, header + np.ascontiguousarray(arr).tobytes())


def resample_bilinear(src: np.ndarray, target_hw) -> np.ndarray:
    """Resize a feature map to ``(H, W)`` with align-corners bilinear sampling.

    Target index i samples source coordinate ``i * (H_src - 1) / (H - 1)``
    (0 when H == 1), so corner samples coincide with source corners. Output
    values are clipped to the per-channel [min, max] of the source, which a
    convex blend can escape only by float rounding.
    """
    h, w = int(target_hw[0]), int(target_hw[1])
    if h < 1 or w < 1:
        raise ValueError(f"zero target extent ({h}, {w})")
    arr = np.asarray(src)
    if arr.dtype.kind != "f":
        raise ValueError("resample_bilinear needs a float feature map")
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"expected HxW or HxWxD map, got shape {arr.shape}")
    hs, ws, _ = arr.shape
    if (hs, ws) == (h, w):
        return src.copy()
    work = arr.astype(np.float64)
    ys = np.linspace(0.0, hs - 1.0, h)
    xs = np.linspace(0.0, ws - 1.0, w)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, hs - 1)
    x1 = np.minimum(x0 + 1, ws - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    top = work[y0][:, x0] * (1.0 - fx) + work[y0][:, x1] * fx
    bot = work[y1][:, x0] * (1.0 - fx) + work[y1][:, x1] * fx
    out = top * (1.0 - fy) + bot * fy
    lo = work.min(axis=(0, 1))
    hi = work.max(axis=(0, 1))
    out = np.clip(out, lo, hi)
    if squeeze:
        out = out[:, :, 0]
    return out.astype(src.dtype)
