"""Canonical byte encoding of queries and answers.

Values are self-describing:

    0x01 index       u16
    0x02 u16 array   u16 count, then count x u16   (permutations, sigma_j by mask)
    0x03 sequence    u16 count, then count nested values

Bit vectors are a u16 bit length followed by the bits packed MSB-first.
All integers are big-endian.
"""

from __future__ import annotations

import struct

from ..errors import FrameError

INDEX = 0x01
ARRAY = 0x02
SEQUENCE = 0x03
U16_MAX = 0xFFFF


def _u16(value: int) -> bytes:
    if not 0 <= value <= U16_MAX:
        raise FrameError(f"{value} does not fit in 16 bits")
    return struct.pack(">H", value)


def encode_value(value) -> bytes:
    if isinstance(value, bool):
        raise FrameError("booleans are not a query type")
    if isinstance(value, int):
        return bytes([INDEX]) + _u16(value)
    if isinstance(value, tuple):
        if all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            return bytes([ARRAY]) + _u16(len(value)) + b"".join(_u16(v) for v in value)
        return bytes([SEQUENCE]) + _u16(len(value)) + b"".join(encode_value(v) for v in value)
    raise FrameError(f"cannot encode {type(value).__name__}")


def _decode(buf: bytes, pos: int):
    if pos >= len(buf):
        raise FrameError("truncated value")
    tag = buf[pos]
    pos += 1
    if tag == INDEX:
        if pos + 2 > len(buf):
            raise FrameError("truncated index")
        return struct.unpack_from(">H", buf, pos)[0], pos + 2
    if tag in (ARRAY, SEQUENCE):
        if pos + 2 > len(buf):
            raise FrameError("truncated length")
        count = struct.unpack_from(">H", buf, pos)[0]
        pos += 2
        if tag == ARRAY:
            end = pos + 2 * count
            if end > len(buf):
                raise FrameError("truncated array")
            return struct.unpack_from(f">{count}H", buf, pos), end
        items = []
        for _ in range(count):
            item, pos = _decode(buf, pos)
            items.append(item)
        return tuple(items), pos
    raise FrameError(f"unknown value tag 0x{tag:02x}")


def decode_value(buf: bytes):
    value, pos = _decode(buf, 0)
    if pos != len(buf):
        raise FrameError(f"{len(buf) - pos} trailing bytes after value")
    return value


def encode_bits(bits) -> bytes:
    bits = tuple(bits)
    packed = bytearray((len(bits) + 7) // 8)
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise FrameError("bit vectors hold only 0 and 1")
        if b:
            packed[i // 8] |= 0x80 >> (i % 8)
    return _u16(len(bits)) + bytes(packed)


def decode_bits(buf: bytes) -> tuple[int, ...]:
    if len(buf) < 2:
        raise FrameError("bit vector missing its length header")
    n = struct.unpack_from(">H", buf, 0)[0]
    body = buf[2:]
    if len(body) != (n + 7) // 8:
        raise FrameError(f"bit vector of {n} bits needs {(n + 7) // 8} bytes, got {len(body)}")
    bits = tuple(body[i // 8] >> (7 - i % 8) & 1 for i in range(n))
    if n % 8 and body[-1] & (0xFF >> (n % 8)):
        raise FrameError("nonzero padding bits")
    return bits
