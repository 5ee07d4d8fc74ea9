"""Minimal ABI decoding for event payloads.

Supported parameter types: uint256, address, bool (static) and bytes,
string (dynamic, head/tail layout).  Indexed dynamic parameters appear
in topics as a hash of the content, so they decode to the raw topic hex
rather than a value.
"""

from __future__ import annotations

STATIC_TYPES = ("uint256", "address", "bool")
DYNAMIC_TYPES = ("bytes", "string")


class DecodeError(ValueError):
    pass


def _word(data: bytes, offset: int) -> bytes:
    if offset + 32 > len(data):
        raise DecodeError(f"word at offset {offset} runs past end of data ({len(data)} bytes)")
    return data[offset : offset + 32]


def _decode_static(type_: str, word: bytes):
    if type_ == "uint256":
        return int.from_bytes(word, "big")
    if type_ == "address":
        if any(word[:12]):
            raise DecodeError("address word has nonzero padding")
        return "0x" + word[12:].hex()
    if type_ == "bool":
        v = int.from_bytes(word, "big")
        if v not in (0, 1):
            raise DecodeError(f"bool word out of range: {v}")
        return v == 1
    raise DecodeError(f"unsupported static type {type_!r}")


def decode_data(types: list[str], data: bytes):
    """Decode the non-indexed tail of an event.

    Returns one Python value per entry in `types`: int for uint256,
    lowercase 0x string for address, bool, bytes for bytes, str for
    string (invalid UTF-8 is replaced).
    """
    values = []
    for i, type_ in enumerate(types):
        head = _word(data, i * 32)
        if type_ in STATIC_TYPES:
            values.append(_decode_static(type_, head))
            continue
        if type_ not in DYNAMIC_TYPES:
            raise DecodeError(f"unsupported type {type_!r}")
        tail_at = int.from_bytes(head, "big")
        if tail_at % 32 != 0:
            raise DecodeError(f"dynamic offset {tail_at} not word aligned")
        length = int.from_bytes(_word(data, tail_at), "big")
        payload_at = tail_at + 32
        if payload_at + length > len(data):
            raise DecodeError(f"dynamic payload at {payload_at} length {length} out of bounds")
        payload = data[payload_at : payload_at + length]
        values.append(payload.decode("utf-8", errors="replace") if type_ == "string" else payload)
    return values


def decode_topic(type_: str, topic_hex: str):
    """Decode an indexed parameter from its 32-byte topic."""
    word = bytes.fromhex(topic_hex[2:] if topic_hex.startswith("0x") else topic_hex)
    if len(word) != 32:
        raise DecodeError("topic must be exactly 32 bytes")
    if type_ in STATIC_TYPES:
        return _decode_static(type_, word)
    if type_ in DYNAMIC_TYPES:
        # only the content hash is logged; surface it as-is
        return "0x" + word.hex()
    raise DecodeError(f"unsupported type {type_!r}")


def decode_event(params: list, topics: tuple[str, ...], data_hex: str) -> dict:
    """Decode a full event against its declared parameters.

    `params` entries need .name, .type and .indexed attributes.  The
    signature topic is topics[0]; indexed values follow in order.
    """
    indexed = [p for p in params if p.indexed]
    plain = [p for p in params if not p.indexed]
    if len(topics) != 1 + len(indexed):
        raise DecodeError(
            f"expected {1 + len(indexed)} topics for {len(indexed)} indexed params, got {len(topics)}"
        )
    data = bytes.fromhex(data_hex[2:] if data_hex.startswith("0x") else data_hex)
    out: dict = {}
    for p, topic in zip(indexed, topics[1:]):
        out[p.name] = decode_topic(p.type, topic)
    for p, value in zip(plain, decode_data([p.type for p in plain], data)):
        out[p.name] = value
    return out
