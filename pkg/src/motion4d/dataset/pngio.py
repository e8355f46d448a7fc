"""Minimal PNG I/O: 8-bit RGB writer (filter 0, fixed zlib level) and a
reader for 8-bit gray/RGB/RGBA non-interlaced files with all five scanline
filters. In-package so rendered artifacts stay byte-identical across runs."""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class PngError(RuntimeError):
    pass


def _chunk(tag: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + tag + data + struct.pack(
        ">I", zlib.crc32(tag + data) & 0xFFFFFFFF)


def write_png(path, image: np.ndarray):
    """Write an (H, W, 3) float [0,1] or uint8 array as an RGB8 PNG."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise PngError(f"expected (H, W, 3), got {img.shape}")
    if img.dtype != np.uint8:
        img = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    h, w = img.shape[:2]
    raw = bytearray()
    for row in range(h):
        raw.append(0)  # filter: None
        raw.extend(img[row].tobytes())
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    payload = _SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(
        b"IDAT", zlib.compress(bytes(raw), 6)) + _chunk(b"IEND", b"")
    Path(path).write_bytes(payload)


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw: bytes, h: int, stride: int, bpp: int) -> bytearray:
    out = bytearray(h * stride)
    pos = 0
    for row in range(h):
        ftype = raw[pos]
        pos += 1
        line = bytearray(raw[pos:pos + stride])
        pos += stride
        off = row * stride
        prev_off = off - stride
        if ftype == 0:
            pass
        elif ftype == 1:
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:
            if row > 0:
                for i in range(stride):
                    line[i] = (line[i] + out[prev_off + i]) & 0xFF
        elif ftype == 3:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                up = out[prev_off + i] if row > 0 else 0
                line[i] = (line[i] + ((left + up) >> 1)) & 0xFF
        elif ftype == 4:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                up = out[prev_off + i] if row > 0 else 0
                ul = out[prev_off + i - bpp] if (row > 0 and i >= bpp) else 0
                line[i] = (line[i] + _paeth(left, up, ul)) & 0xFF
        else:
            raise PngError(f"unknown scanline filter {ftype}")
        out[off:off + stride] = line
    return out


def read_png(path) -> np.ndarray:
    """Read a PNG as (H, W, 3) float32 in [0, 1]; gray/RGBA convert to RGB."""
    blob = Path(path).read_bytes()
    if not blob.startswith(_SIGNATURE):
        raise PngError(f"{path}: not a PNG")
    pos = 8
    width = height = None
    color_type = bit_depth = None
    idat = bytearray()
    while pos < len(blob):
        (length,) = struct.unpack_from(">I", blob, pos)
        tag = blob[pos + 4:pos + 8]
        data = blob[pos + 8:pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            width, height, bit_depth, color_type, _, _, interlace = struct.unpack(
                ">IIBBBBB", data)
            if bit_depth != 8:
                raise PngError(f"{path}: only 8-bit PNGs supported")
            if color_type not in (0, 2, 6):
                raise PngError(f"{path}: unsupported color type {color_type}")
            if interlace != 0:
                raise PngError(f"{path}: interlaced PNGs not supported")
        elif tag == b"IDAT":
            idat.extend(data)
        elif tag == b"IEND":
            break
    if width is None:
        raise PngError(f"{path}: missing IHDR")
    channels = {0: 1, 2: 3, 6: 4}[color_type]
    raw = zlib.decompress(bytes(idat))
    stride = width * channels
    pixels = np.frombuffer(bytes(_unfilter(raw, height, stride, channels)),
                           dtype=np.uint8).reshape(height, width, channels)
    if channels == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    elif channels == 4:
        pixels = pixels[:, :, :3]
    return pixels.astype(np.float32) / 255.0
