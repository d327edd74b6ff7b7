"""Stateless header compression: presence bit fields and nibble-packed names.

Compressed name layout (component lengths are 1..15, lengths of two
consecutive components share one octet, a zero nibble is the stop marker):

    (len_a << 4 | len_b) a-octets b-octets ... (len_z << 4 | 0x0) z-octets
    (len_a << 4 | len_b) a-octets b-octets ... 0x00        -- even count

Compressed Interest body:

    bitfield [name] [nonce 4B] [lifetime u8-len + value]

    bit 0 nonce present          bit 3 CID chain in the frame
    bit 1 non-default lifetime   bit 4 name bytes present
    bit 2 HopID in the frame     bit 5 name is a plain Name TLV (fallback)

Compressed Data body:

    bitfield [name] [freshness u8-len + value] [content len+bytes]
             [sig-info len+bytes] [sig-value ...rest]

    bit 0 freshness   bit 2 sig-info   bit 4 HopID in the frame
    bit 1 content     bit 3 sig-value  bit 5 name bytes present
                                       bit 6 fallback Name TLV

Set bits follow the order the surviving fields appear in the body. When a
HopID rides in the frame, the Data name bytes hold only the suffix beyond
the pending request name; no name bytes at all means the name was elided
end to end and is rebuilt from per-hop state. Names with a component over
15 bytes (or an empty one) fall back to an embedded uncompressed Name TLV.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    ComponentTooLong,
    EmptyComponent,
    MalformedCompressedData,
    MalformedCompressedInterest,
    MalformedCompressedName,
)
from . import ndn
from .ndn import NdnData, NdnInterest, NdnName
from .stateful import CidTable, cid_compress, cid_decompress

MAX_COMPONENT_LEN = 15
DEFAULT_LIFETIME_MS = 4000

INT_BIT_NONCE = 0x01
INT_BIT_LIFETIME = 0x02
INT_BIT_HOP_ID = 0x04
INT_BIT_CID_CHAIN = 0x08
INT_BIT_NAME = 0x10
INT_BIT_FALLBACK = 0x20
INT_RESERVED = 0xC0

DATA_BIT_FRESHNESS = 0x01
DATA_BIT_CONTENT = 0x02
DATA_BIT_SIG_INFO = 0x04
DATA_BIT_SIG_VALUE = 0x08
DATA_BIT_HOP_ID = 0x10
DATA_BIT_NAME = 0x20
DATA_BIT_FALLBACK = 0x40
DATA_RESERVED = 0x80


def compressed_name_overhead(component_count: int) -> int:
    """Length and stop octets the nibble scheme spends on a name."""
    return (component_count + 2) // 2


def name_compression_saving(component_count: int) -> int:
    """Header bytes saved over the plain TLV encoding of the same name."""
    return (2 + 2 * component_count) - compressed_name_overhead(component_count)


def name_is_compressible(name: NdnName) -> bool:
    return all(1 <= len(c) <= MAX_COMPONENT_LEN for c in name.components)


def compress_name(name: NdnName) -> bytes:
    comps = name.components
    for c in comps:
        if len(c) == 0:
            raise EmptyComponent("zero-length component")
        if len(c) > MAX_COMPONENT_LEN:
            raise ComponentTooLong(f"{len(c)}-byte component exceeds 15")
    out = bytearray()
    i = 0
    while i + 1 < len(comps):
        out.append(len(comps[i]) << 4 | len(comps[i + 1]))
        out += comps[i]
        out += comps[i + 1]
        i += 2
    if i < len(comps):
        out.append(len(comps[i]) << 4)  # stop marker in the low nibble
        out += comps[i]
    else:
        out.append(0x00)  # even count: dedicated stop byte
    return bytes(out)


def read_compressed_name(buf: bytes, pos: int) -> tuple[NdnName, int]:
    """Consume one nibble-packed name starting at pos."""
    comps = []
    while True:
        if pos >= len(buf):
            raise MalformedCompressedName("input ends before the stop marker")
        octet = buf[pos]
        pos += 1
        hi, lo = octet >> 4, octet & 0x0F
        if hi == 0:
            if lo != 0:
                raise MalformedCompressedName(f"stop byte 0x{octet:02x} has a dangling length")
            break
        if pos + hi > len(buf):
            raise MalformedCompressedName("component truncated")
        comps.append(buf[pos:pos + hi])
        pos += hi
        if lo == 0:
            break
        if pos + lo > len(buf):
            raise MalformedCompressedName("component truncated")
        comps.append(buf[pos:pos + lo])
        pos += lo
    return NdnName(tuple(comps)), pos


def decompress_name(buf: bytes) -> NdnName:
    name, pos = read_compressed_name(bytes(buf), 0)
    if pos != len(buf):
        raise MalformedCompressedName("trailing bytes after the stop marker")
    return name


@dataclass(frozen=True)
class CodecOptions:
    """Context shared between compressor, decompressor, and frame builder.

    ``hop_id`` and ``cids`` describe what the surrounding frame carries;
    on the compress side they are chosen by the caller, on the decompress
    side they come from the parsed dispatch chain. ``request_name`` is the
    pending-table name used for the returning-response path.
    """

    cid_table: CidTable | None = None
    hop_id: int | None = None
    cids: tuple[int, ...] = ()
    request_name: NdnName | None = None


@dataclass(frozen=True)
class NamePlan:
    """How a name will travel: context ids, leftover components, fallback."""

    cids: tuple[int, ...]
    residual: NdnName
    fallback: bool


def plan_name(name: NdnName, cid_table: CidTable | None) -> NamePlan:
    """Choose between context elision, nibble packing, and TLV fallback."""
    cids, residual = cid_compress(name, cid_table)
    if name_is_compressible(residual):
        return NamePlan(tuple(cids), residual, False)
    return NamePlan((), name, True)


def plan_data_name(data_name: NdnName, opts: CodecOptions) -> NamePlan:
    """Name plan for a response; with per-hop state only the suffix travels."""
    if opts.hop_id is not None:
        if opts.request_name is None or not opts.request_name.is_prefix_of(data_name):
            raise ValueError("hop id given without a matching request name")
        suffix = data_name.suffix_after(opts.request_name)
        if name_is_compressible(suffix):
            return NamePlan((), suffix, False)
        return NamePlan((), suffix, True)
    return plan_name(data_name, opts.cid_table)


def _encode_uint_field(value: int) -> bytes:
    raw = ndn.encode_uint(value)
    return bytes([len(raw)]) + raw


def _read_uint_field(buf: bytes, pos: int, err) -> tuple[int, int]:
    if pos >= len(buf):
        raise err("truncated integer field")
    n = buf[pos]
    pos += 1
    if not 1 <= n <= 8 or pos + n > len(buf):
        raise err("bad integer field length")
    return int.from_bytes(buf[pos:pos + n], "big"), pos + n


def _read_varnum(buf: bytes, pos: int, err) -> tuple[int, int]:
    if pos >= len(buf):
        raise err("truncated length")
    first = buf[pos]
    pos += 1
    if first < 253:
        return first, pos
    size = {253: 2, 254: 4, 255: 8}[first]
    if pos + size > len(buf):
        raise err("truncated length")
    return int.from_bytes(buf[pos:pos + size], "big"), pos + size


def _encode_name_bytes(plan: NamePlan) -> tuple[bytes, int]:
    """Name octets for a body plus the name/fallback bits to set."""
    if plan.fallback:
        return ndn.encode_name(plan.residual), 1 | 2
    if plan.residual.components:
        return compress_name(plan.residual), 1
    return b"", 0


def compress_interest(interest: NdnInterest, opts: CodecOptions | None = None) -> bytes:
    """Compress an Interest into a dispatch body (bitfield onwards).

    The chosen context ids are recomputed from the table, so the caller
    building the frame must use the same plan (see plan_name).
    """
    opts = opts or CodecOptions()
    if interest.extra:
        raise ValueError("opaque extension TLVs cannot be compressed")
    plan = plan_name(interest.name, opts.cid_table)
    name_bytes, name_bits = _encode_name_bytes(plan)

    bits = 0
    if name_bits & 1:
        bits |= INT_BIT_NAME
    if name_bits & 2:
        bits |= INT_BIT_FALLBACK
    if plan.cids:
        bits |= INT_BIT_CID_CHAIN
    if opts.hop_id is not None:
        bits |= INT_BIT_HOP_ID
    body = bytearray([0])
    body += name_bytes
    if interest.nonce is not None:
        bits |= INT_BIT_NONCE
        body += interest.nonce
    if interest.lifetime_ms is not None and interest.lifetime_ms != DEFAULT_LIFETIME_MS:
        bits |= INT_BIT_LIFETIME
        body += _encode_uint_field(interest.lifetime_ms)
    body[0] = bits
    return bytes(body)


def decompress_interest(buf: bytes, opts: CodecOptions | None = None) -> NdnInterest:
    opts = opts or CodecOptions()
    buf = bytes(buf)
    err = MalformedCompressedInterest
    if not buf:
        raise err("empty body")
    bits = buf[0]
    pos = 1
    if bits & INT_RESERVED:
        raise err("reserved bits set")
    if bool(bits & INT_BIT_HOP_ID) != (opts.hop_id is not None):
        raise err("hop-id bit disagrees with the frame")
    if bool(bits & INT_BIT_CID_CHAIN) != bool(opts.cids):
        raise err("cid-chain bit disagrees with the frame")
    if bits & INT_BIT_FALLBACK and not bits & INT_BIT_NAME:
        raise err("fallback bit without name bytes")

    if bits & INT_BIT_FALLBACK:
        reader = ndn._Reader(buf, pos)
        try:
            residual = ndn.read_name(reader)
        except ndn.MalformedTlv as exc:
            raise err(f"bad fallback name: {exc}") from exc
        pos = reader.pos
    elif bits & INT_BIT_NAME:
        try:
            residual, pos = read_compressed_name(buf, pos)
        except MalformedCompressedName as exc:
            raise err(str(exc)) from exc
    else:
        residual = NdnName(())
    name = cid_decompress(opts.cids, residual, opts.cid_table) if opts.cids else residual

    nonce = None
    if bits & INT_BIT_NONCE:
        if pos + ndn.NONCE_LEN > len(buf):
            raise err("truncated nonce")
        nonce = buf[pos:pos + ndn.NONCE_LEN]
        pos += ndn.NONCE_LEN
    lifetime = DEFAULT_LIFETIME_MS
    if bits & INT_BIT_LIFETIME:
        lifetime, pos = _read_uint_field(buf, pos, err)
    if pos != len(buf):
        raise err("trailing bytes")
    return NdnInterest(name=name, nonce=nonce, lifetime_ms=lifetime)


def compress_data(data: NdnData, opts: CodecOptions | None = None) -> bytes:
    """Compress a Data message into a dispatch body.

    With a hop id in play the name shrinks to the suffix beyond the
    pending request name, or to nothing when both names are equal.
    """
    opts = opts or CodecOptions()
    if data.extra:
        raise ValueError("opaque extension TLVs cannot be compressed")
    plan = plan_data_name(data.name, opts)
    name_bytes, name_bits = _encode_name_bytes(plan)

    bits = 0
    if name_bits & 1:
        bits |= DATA_BIT_NAME
    if name_bits & 2:
        bits |= DATA_BIT_FALLBACK
    if opts.hop_id is not None:
        bits |= DATA_BIT_HOP_ID
    body = bytearray([0])
    body += name_bytes
    if data.meta_freshness_ms is not None:
        bits |= DATA_BIT_FRESHNESS
        body += _encode_uint_field(data.meta_freshness_ms)
    if data.content:
        bits |= DATA_BIT_CONTENT
        body += ndn.encode_varnum(len(data.content)) + data.content
    if data.sig_info:
        bits |= DATA_BIT_SIG_INFO
        body += ndn.encode_varnum(len(data.sig_info)) + data.sig_info
    if data.sig_value:
        bits |= DATA_BIT_SIG_VALUE
        body += data.sig_value  # final field, its length is the remainder
    body[0] = bits
    return bytes(body)


def decompress_data(buf: bytes, opts: CodecOptions | None = None) -> NdnData:
    opts = opts or CodecOptions()
    buf = bytes(buf)
    err = MalformedCompressedData
    if not buf:
        raise err("empty body")
    bits = buf[0]
    pos = 1
    if bits & DATA_RESERVED:
        raise err("reserved bit set")
    if bool(bits & DATA_BIT_HOP_ID) != (opts.hop_id is not None):
        raise err("hop-id bit disagrees with the frame")
    if bits & DATA_BIT_FALLBACK and not bits & DATA_BIT_NAME:
        raise err("fallback bit without name bytes")

    if bits & DATA_BIT_FALLBACK:
        reader = ndn._Reader(buf, pos)
        try:
            carried = ndn.read_name(reader)
        except ndn.MalformedTlv as exc:
            raise err(f"bad fallback name: {exc}") from exc
        pos = reader.pos
    elif bits & DATA_BIT_NAME:
        try:
            carried, pos = read_compressed_name(buf, pos)
        except MalformedCompressedName as exc:
            raise err(str(exc)) from exc
    else:
        carried = NdnName(())

    if bits & DATA_BIT_HOP_ID:
        if opts.request_name is None:
            raise err("hop-elided name but no pending request name")
        name = opts.request_name + carried
    elif opts.cids:
        name = cid_decompress(opts.cids, carried, opts.cid_table)
    else:
        name = carried

    freshness = None
    if bits & DATA_BIT_FRESHNESS:
        freshness, pos = _read_uint_field(buf, pos, err)
    content = b""
    if bits & DATA_BIT_CONTENT:
        n, pos = _read_varnum(buf, pos, err)
        if pos + n > len(buf):
            raise err("truncated content")
        content = buf[pos:pos + n]
        pos += n
    sig_info = b""
    if bits & DATA_BIT_SIG_INFO:
        n, pos = _read_varnum(buf, pos, err)
        if pos + n > len(buf):
            raise err("truncated signature info")
        sig_info = buf[pos:pos + n]
        pos += n
    sig_value = b""
    if bits & DATA_BIT_SIG_VALUE:
        sig_value = buf[pos:]
        if not sig_value:
            raise err("signature-value bit set on empty remainder")
        pos = len(buf)
    if pos != len(buf):
        raise err("trailing bytes")
    return NdnData(name=name, content=content, meta_freshness_ms=freshness,
                   sig_info=sig_info, sig_value=sig_value)
