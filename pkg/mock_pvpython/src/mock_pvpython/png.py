"""Minimal RGB PNG writer (stdlib only) producing a non-uniform gradient."""

import struct
import zlib


def _chunk(tag: bytes, data: bytes) -> bytes:
    block = tag + data
    return (
        struct.pack(">I", len(data))
        + block
        + struct.pack(">I", zlib.crc32(block) & 0xFFFFFFFF)
    )


def gradient_png(width: int, height: int) -> bytes:
    """8-bit RGB PNG whose rows are rotations of a horizontal gradient."""
    if width < 1 or height < 1:
        raise ValueError("resolution must be positive")
    base = bytearray()
    for x in range(width):
        base += bytes(((x * 255) // max(width - 1, 1), (x * 7) % 256, 64))
    raw = bytearray()
    row_bytes = len(base)
    for y in range(height):
        shift = (3 * y) % row_bytes
        raw += b"\x00" + base[shift:] + base[:shift]
    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", header)
        + _chunk(b"IDAT", zlib.compress(bytes(raw), 1))
        + _chunk(b"IEND", b"")
    )


def read_dimensions(data: bytes) -> tuple[int, int]:
    """Parse width/height out of a PNG's IHDR (for tests)."""
    if data[:8] != b"\x89PNG\r\n\x1a\n" or data[12:16] != b"IHDR":
        raise ValueError("not a PNG")
    width, height = struct.unpack(">II", data[16:24])
    return width, height
