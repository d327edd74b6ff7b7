"""NDN Type-Length-Value codec.

Message layouts handled here (type and length octets use the standard NDN
variable-size number: one octet below 253, otherwise a 253/254/255 marker
followed by 2/4/8 big-endian octets):

    Interest = 0x05 len ( Name [Nonce] [InterestLifetime] extra* )
    Data     = 0x06 len ( Name [MetaInfo] Content SigInfo SigValue extra* )
    Name     = 0x07 len ( 0x08 len component-octets )*

Unknown TLVs with type > 31 are carried as opaque (type, value) pairs so a
decode/encode cycle is lossless; unknown types <= 31 are treated as critical
and rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from urllib.parse import quote, unquote_to_bytes

from .errors import MalformedTlv, OverheadAssumptionViolated

T_INTEREST = 0x05
T_DATA = 0x06
T_NAME = 0x07
T_NAME_COMPONENT = 0x08
T_NONCE = 0x0A
T_INTEREST_LIFETIME = 0x0C
T_META_INFO = 0x14
T_CONTENT = 0x15
T_SIGNATURE_INFO = 0x16
T_SIGNATURE_VALUE = 0x17
T_FRESHNESS_PERIOD = 0x19

# Unrecognized types at or below this value abort decoding.
CRITICAL_TYPE_MAX = 31

NONCE_LEN = 4


def encode_varnum(value: int) -> bytes:
    """Encode a type or length octet sequence."""
    if value < 0:
        raise ValueError("varnum must be non-negative")
    if value < 253:
        return bytes([value])
    if value <= 0xFFFF:
        return b"\xfd" + value.to_bytes(2, "big")
    if value <= 0xFFFFFFFF:
        return b"\xfe" + value.to_bytes(4, "big")
    return b"\xff" + value.to_bytes(8, "big")


def encode_uint(value: int) -> bytes:
    """Shortest 1/2/4/8-byte big-endian encoding of a non-negative integer."""
    if value < 0:
        raise ValueError("negative integer")
    for size in (1, 2, 4, 8):
        if value < 1 << (8 * size):
            return value.to_bytes(size, "big")
    raise ValueError("integer too large for 8 bytes")


class _Reader:
    """Cursor over immutable bytes; every read is bounds-checked."""

    __slots__ = ("buf", "pos", "end")

    def __init__(self, buf: bytes, pos: int = 0, end: int | None = None):
        self.buf = buf
        self.pos = pos
        self.end = len(buf) if end is None else end

    def remaining(self) -> int:
        return self.end - self.pos

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > self.end:
            raise MalformedTlv("truncated input")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def varnum(self) -> int:
        if self.pos >= self.end:
            raise MalformedTlv("truncated varnum")
        first = self.buf[self.pos]
        self.pos += 1
        if first < 253:
            return first
        size = {253: 2, 254: 4, 255: 8}[first]
        return int.from_bytes(self.take(size), "big")

    def tlv_header(self) -> tuple[int, int]:
        tlv_type = self.varnum()
        tlv_length = self.varnum()
        if tlv_length > self.remaining():
            raise MalformedTlv("declared length exceeds buffer")
        return tlv_type, tlv_length


@dataclass(frozen=True)
class TlvHeader:
    tlv_type: int
    tlv_length: int

    def encode(self) -> bytes:
        return encode_varnum(self.tlv_type) + encode_varnum(self.tlv_length)


@dataclass(frozen=True)
class NdnName:
    """Ordered sequence of opaque name components."""

    components: tuple[bytes, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(bytes(c) for c in self.components))
        for comp in self.components:
            if len(comp) > 0xFFFF:
                raise ValueError("component longer than 65535 bytes")

    @classmethod
    def from_uri(cls, uri: str) -> "NdnName":
        """Parse "/a/b/c"; percent-escapes are decoded per component."""
        uri = uri.strip()
        if uri in ("", "/"):
            return cls(())
        if uri.startswith("/"):
            uri = uri[1:]
        return cls(tuple(unquote_to_bytes(seg) for seg in uri.split("/")))

    def to_uri(self) -> str:
        if not self.components:
            return "/"
        return "/" + "/".join(
            quote(c, safe="-._~") for c in self.components
        )

    def component_count(self) -> int:
        return len(self.components)

    def is_prefix_of(self, other: "NdnName") -> bool:
        n = len(self.components)
        return n <= len(other.components) and other.components[:n] == self.components

    def suffix_after(self, prefix: "NdnName") -> "NdnName":
        if not prefix.is_prefix_of(self):
            raise ValueError("not a prefix")
        return NdnName(self.components[len(prefix.components):])

    def __add__(self, other: "NdnName") -> "NdnName":
        return NdnName(self.components + other.components)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class NdnInterest:
    name: NdnName = NdnName()
    nonce: bytes | None = None
    lifetime_ms: int | None = None
    # unknown non-critical TLVs, preserved verbatim
    extra: tuple[tuple[int, bytes], ...] = ()

    def __post_init__(self):
        if self.nonce is not None and len(self.nonce) != NONCE_LEN:
            raise ValueError("nonce must be 4 bytes")


@dataclass(frozen=True)
class NdnData:
    name: NdnName = NdnName()
    content: bytes = b""
    meta_freshness_ms: int | None = None
    sig_info: bytes = b""
    sig_value: bytes = b""
    extra: tuple[tuple[int, bytes], ...] = ()


def _tlv(tlv_type: int, value: bytes) -> bytes:
    return encode_varnum(tlv_type) + encode_varnum(len(value)) + value


def encode_name(name: NdnName) -> bytes:
    inner = b"".join(_tlv(T_NAME_COMPONENT, c) for c in name.components)
    return _tlv(T_NAME, inner)


def _decode_name_value(reader: _Reader) -> NdnName:
    comps = []
    while reader.remaining() > 0:
        tlv_type, tlv_length = reader.tlv_header()
        if tlv_type != T_NAME_COMPONENT:
            raise MalformedTlv("unexpected TLV inside Name")
        comps.append(reader.take(tlv_length))
    return NdnName(tuple(comps))


def decode_name(buf: bytes) -> NdnName:
    reader = _Reader(bytes(buf))
    tlv_type, tlv_length = reader.tlv_header()
    if tlv_type != T_NAME:
        raise MalformedTlv("not a Name TLV")
    name = _decode_name_value(_Reader(reader.buf, reader.pos, reader.pos + tlv_length))
    reader.pos += tlv_length
    if reader.remaining():
        raise MalformedTlv("trailing bytes after Name")
    return name


def read_name(reader: _Reader) -> NdnName:
    """Consume one Name TLV from the reader position."""
    tlv_type, tlv_length = reader.tlv_header()
    if tlv_type != T_NAME:
        raise MalformedTlv("expected Name TLV")
    name = _decode_name_value(_Reader(reader.buf, reader.pos, reader.pos + tlv_length))
    reader.pos += tlv_length
    return name


def encode_interest(interest: NdnInterest) -> bytes:
    body = encode_name(interest.name)
    if interest.nonce is not None:
        body += _tlv(T_NONCE, interest.nonce)
    if interest.lifetime_ms is not None:
        body += _tlv(T_INTEREST_LIFETIME, encode_uint(interest.lifetime_ms))
    for tlv_type, value in interest.extra:
        body += _tlv(tlv_type, value)
    return _tlv(T_INTEREST, body)


def decode_interest(buf: bytes) -> NdnInterest:
    reader = _Reader(bytes(buf))
    tlv_type, tlv_length = reader.tlv_header()
    if tlv_type != T_INTEREST:
        raise MalformedTlv("not an Interest TLV")
    inner = _Reader(reader.buf, reader.pos, reader.pos + tlv_length)
    reader.pos += tlv_length
    if reader.remaining():
        raise MalformedTlv("trailing bytes after Interest")

    name = read_name(inner)
    nonce = None
    lifetime = None
    extra = []
    while inner.remaining() > 0:
        t, length = inner.tlv_header()
        value = inner.take(length)
        if t == T_NONCE:
            if len(value) != NONCE_LEN:
                raise MalformedTlv("nonce must be 4 bytes")
            nonce = value
        elif t == T_INTEREST_LIFETIME:
            lifetime = int.from_bytes(value, "big")
        elif t <= CRITICAL_TYPE_MAX:
            raise MalformedTlv(f"unknown critical type 0x{t:02x}")
        else:
            extra.append((t, value))
    return NdnInterest(name=name, nonce=nonce, lifetime_ms=lifetime, extra=tuple(extra))


def encode_data(data: NdnData) -> bytes:
    body = encode_name(data.name)
    if data.meta_freshness_ms is not None:
        body += _tlv(T_META_INFO, _tlv(T_FRESHNESS_PERIOD, encode_uint(data.meta_freshness_ms)))
    body += _tlv(T_CONTENT, data.content)
    body += _tlv(T_SIGNATURE_INFO, data.sig_info)
    body += _tlv(T_SIGNATURE_VALUE, data.sig_value)
    for tlv_type, value in data.extra:
        body += _tlv(tlv_type, value)
    return _tlv(T_DATA, body)


def decode_data(buf: bytes) -> NdnData:
    reader = _Reader(bytes(buf))
    tlv_type, tlv_length = reader.tlv_header()
    if tlv_type != T_DATA:
        raise MalformedTlv("not a Data TLV")
    inner = _Reader(reader.buf, reader.pos, reader.pos + tlv_length)
    reader.pos += tlv_length
    if reader.remaining():
        raise MalformedTlv("trailing bytes after Data")

    name = read_name(inner)
    freshness = None
    content = b""
    sig_info = b""
    sig_value = b""
    extra = []
    while inner.remaining() > 0:
        t, length = inner.tlv_header()
        value = inner.take(length)
        if t == T_META_INFO:
            meta = _Reader(value)
            while meta.remaining() > 0:
                mt, ml = meta.tlv_header()
                mv = meta.take(ml)
                if mt == T_FRESHNESS_PERIOD:
                    freshness = int.from_bytes(mv, "big")
                # other meta fields are not modeled; keeping them would
                # break the field-identity round trip, so reject instead
                elif mt <= CRITICAL_TYPE_MAX:
                    raise MalformedTlv(f"unknown critical meta type 0x{mt:02x}")
                else:
                    raise MalformedTlv(f"unsupported meta type 0x{mt:02x}")
        elif t == T_CONTENT:
            content = value
        elif t == T_SIGNATURE_INFO:
            sig_info = value
        elif t == T_SIGNATURE_VALUE:
            sig_value = value
        elif t <= CRITICAL_TYPE_MAX:
            raise MalformedTlv(f"unknown critical type 0x{t:02x}")
        else:
            extra.append((t, value))
    return NdnData(name=name, content=content, meta_freshness_ms=freshness,
                   sig_info=sig_info, sig_value=sig_value, extra=tuple(extra))


def name_tlv_overhead_uncompressed(name: NdnName) -> int:
    """Header bytes a Name TLV spends on top of the raw component octets.

    Valid only while every header fits in one octet: each component below
    253 bytes and the summed Name payload below 253 bytes. The result then
    equals len(encode_name(name)) minus the component octets.
    """
    payload = 0
    for comp in name.components:
        if len(comp) >= 253:
            raise OverheadAssumptionViolated("component needs a multi-byte length")
        payload += 2 + len(comp)
    if payload >= 253:
        raise OverheadAssumptionViolated("name needs a multi-byte length")
    return 2 + 2 * name.component_count()
