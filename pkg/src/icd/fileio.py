"""Image and float-map I/O.

Display-range images travel as 8/16-bit PNG or PPM/PGM (via OpenCV, with the
BGR/RGB flip handled here); real-valued maps travel as PFM, which stores raw
float32 scanlines bottom-up and has no value-range restriction, so negative
chromaticity survives a round trip. Loads normalize to float64 in [0, 1]
(v / 255 or v / 65535); saves quantize with round(v * 255) after clipping.
"""

import hashlib

import cv2
import numpy as np

from .errors import IcdError, PfmFormatError, ShapeMismatchError

IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")


def load_image(path):
    """Read an 8- or 16-bit PNG/PPM/PGM as a float64 (H, W, 3) image in [0, 1].

    Grayscale inputs are replicated across the three channels.
    """
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IcdError(f"cannot read image file: {path}")
    if raw.dtype == np.uint8:
        img = raw.astype(np.float64) / 255.0
    elif raw.dtype == np.uint16:
        img = raw.astype(np.float64) / 65535.0
    else:
        raise IcdError(f"unsupported pixel type {raw.dtype} in {path}; expected 8- or 16-bit")
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    elif img.shape[2] == 4:
        img = img[..., :3]  # drop alpha
    if img.shape[2] != 3:
        raise IcdError(f"unsupported channel count {img.shape[2]} in {path}")
    if img.ndim == 3 and raw.ndim == 3:
        img = img[..., ::-1]  # OpenCV loads BGR
    return np.ascontiguousarray(img)


def save_image_png(path, img):
    """Quantize a unit-range float image to 8-bit and write it as PNG."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeMismatchError(f"expected an (H, W, 3) image, got {arr.shape}")
    q = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if not cv2.imwrite(str(path), np.ascontiguousarray(q[..., ::-1])):
        raise IcdError(f"cannot write image file: {path}")


def quantize_u8(img):
    """The PNG write quantization, exposed for round-trip comparisons."""
    return np.rint(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def _next_token(buf, pos):
    """Scan one whitespace-delimited ASCII token; returns (token, start, new_pos)."""
    n = len(buf)
    while pos < n and buf[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise PfmFormatError("unexpected end of header", start)
    return buf[start:pos], start, pos


def read_pfm(path):
    """Read a PFM file into a float64 (H, W) or (H, W, 3) array.

    Handles both endiannesses (negative scale = little endian) and flips the
    bottom-up scanline order to the usual top-down layout. Parse failures
    raise PfmFormatError carrying the byte offset of the problem.
    """
    with open(path, "rb") as fh:
        buf = fh.read()

    magic, magic_at, pos = _next_token(buf, 0)
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise PfmFormatError(f"bad magic {magic!r}; expected 'PF' or 'Pf'", magic_at)

    dims = []
    for name in ("width", "height"):
        tok, tok_at, pos = _next_token(buf, pos)
        try:
            val = int(tok)
        except ValueError:
            raise PfmFormatError(f"{name} is not an integer: {tok!r}", tok_at) from None
        if val <= 0:
            raise PfmFormatError(f"{name} must be positive, got {val}", tok_at)
        dims.append(val)
    width, height = dims

    tok, tok_at, pos = _next_token(buf, pos)
    try:
        scale = float(tok)
    except ValueError:
        raise PfmFormatError(f"scale is not a number: {tok!r}", tok_at) from None
    if scale == 0.0:
        raise PfmFormatError("scale must be nonzero", tok_at)
    pos += 1  # exactly one whitespace byte separates the header from the data

    count = width * height * channels
    need = count * 4
    if len(buf) - pos < need:
        raise PfmFormatError(
            f"truncated pixel data: need {need} bytes, have {len(buf) - pos}", len(buf)
        )
    dtype = "<f4" if scale < 0.0 else ">f4"
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos).astype(np.float64)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return np.ascontiguousarray(np.flipud(data.reshape(shape)))


def write_pfm(path, arr):
    """Write a float array as little-endian PFM (scale -1.0, float32).

    2-d arrays become single-channel 'Pf' maps; (H, W, 3) become 'PF'.
    """
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 2:
        magic = b"Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"PF"
    else:
        raise ShapeMismatchError(f"PFM stores (H, W) or (H, W, 3) arrays, got {arr.shape}")
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n")
        fh.write(f"{w} {h}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(np.flipud(arr).astype("<f4").tobytes())


def sha256_file(path):
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
