"""Link framing: dispatch chains plus fragmentation and reassembly.

Layout of the 802.15.4 payload (the 21-byte MAC header and the 2-byte FCS
are accounted for in size math but never serialized here):

    [FRAG1 | FRAGN header]  page-switch  dispatch  CID*  [HopID]  body

    page-switch  0xF2, selects dispatch page 2
    dispatch     0x80..0x8F: bits 0-1 select the message kind, bit 2 is
                 set when a CID chain follows, bit 3 when a HopID follows
    CID chain    one octet per context id; every octet except the last
                 has the most significant bit set
    HopID        one octet, never zero

Fragment headers match the 6LoWPAN layout: FRAG1 is 4 bytes (5-bit
pattern 11000, 11-bit datagram size, 16-bit tag), FRAGN adds a fifth byte
holding the payload offset in 8-byte units. Mesh (10xxxxxx) and broadcast
(0x50) headers in front of the page switch are skipped without
interpretation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import (
    DatagramTooLarge,
    InvalidChain,
    NotIcnlowpan,
    OverlappingFragment,
    ReassemblyTimeout,
    SizeMismatch,
    TruncatedFrame,
    UnknownDispatch,
)

PHY_MTU = 127
MAC_HEADER_LEN = 21
FCS_LEN = 2
LINK_OVERHEAD = MAC_HEADER_LEN + FCS_LEN

PAGE_SWITCH_BASE = 0xF0
ICNL_PAGE = 2
PAGE_SWITCH_PAGE2 = PAGE_SWITCH_BASE | ICNL_PAGE

FLAG_CID_CHAIN = 0x04
FLAG_HOP_ID = 0x08
_DISPATCH_BASE = 0x80
_DISPATCH_MASK = 0xF0

MAX_DATAGRAM = 0x7FF  # 11-bit size field
FRAGMENT_UNIT = 8
FRAG1_HEADER_LEN = 4
FRAGN_HEADER_LEN = 5
REASSEMBLY_TIMEOUT_S = 4.0


class Dispatch(enum.IntEnum):
    """Page-2 dispatch values (flag bits stripped)."""

    UNCOMPRESSED_INTEREST = 0x80
    UNCOMPRESSED_DATA = 0x81
    COMPRESSED_INTEREST = 0x82
    COMPRESSED_DATA = 0x83

    @property
    def is_interest(self) -> bool:
        return self in (Dispatch.UNCOMPRESSED_INTEREST, Dispatch.COMPRESSED_INTEREST)

    @property
    def is_compressed(self) -> bool:
        return self in (Dispatch.COMPRESSED_INTEREST, Dispatch.COMPRESSED_DATA)


@dataclass(frozen=True)
class DispatchChain:
    dispatch: Dispatch
    cids: tuple[int, ...] = ()
    hop_id: int | None = None
    page: int = ICNL_PAGE

    def validate(self) -> None:
        if self.page != ICNL_PAGE:
            raise InvalidChain("dispatches are only allocated on page 2")
        for cid in self.cids:
            if not 0 <= cid <= 0x7F:
                raise InvalidChain(f"context id {cid} outside 0..127")
        if self.hop_id is not None and not 1 <= self.hop_id <= 0xFF:
            raise InvalidChain("hop id must be 1..255 (0 means absent)")


def frame_encapsulate(chain: DispatchChain, body: bytes) -> bytes:
    """Serialize page switch, dispatch byte, CID chain, HopID, then body."""
    chain.validate()
    dispatch = int(chain.dispatch)
    if chain.cids:
        dispatch |= FLAG_CID_CHAIN
    if chain.hop_id is not None:
        dispatch |= FLAG_HOP_ID
    out = bytearray([PAGE_SWITCH_PAGE2, dispatch])
    for i, cid in enumerate(chain.cids):
        last = i == len(chain.cids) - 1
        out.append(cid if last else cid | 0x80)
    if chain.hop_id is not None:
        out.append(chain.hop_id)
    out += body
    return bytes(out)


def _skip_optional_headers(buf: bytes, pos: int) -> int:
    """Skip mesh and broadcast headers that may precede the page switch."""
    while pos < len(buf):
        b = buf[pos]
        if b >> 6 == 0b10:  # mesh: V/F address-size bits, 4-bit hops left
            size = 1
            size += 2 if b & 0x20 else 8
            size += 2 if b & 0x10 else 8
            if b & 0x0F == 0x0F:
                size += 1
            if pos + size > len(buf):
                raise TruncatedFrame("mesh header runs past end of frame")
            pos += size
        elif b == 0x50:  # LOWPAN_BC0: one sequence byte
            if pos + 2 > len(buf):
                raise TruncatedFrame("broadcast header runs past end of frame")
            pos += 2
        else:
            return pos
    raise TruncatedFrame("frame ends before any dispatch")


def parse_frame(buf: bytes) -> tuple[DispatchChain, bytes]:
    """Inverse of frame_encapsulate; foreign pages raise NotIcnlowpan."""
    buf = bytes(buf)
    pos = _skip_optional_headers(buf, 0)
    lead = buf[pos]
    if lead != PAGE_SWITCH_PAGE2:
        # page-0 dispatch space, or a switch to another page
        raise NotIcnlowpan(f"leading byte 0x{lead:02x} is not the page-2 switch")
    pos += 1
    if pos >= len(buf):
        raise TruncatedFrame("page switch without dispatch byte")
    raw = buf[pos]
    pos += 1
    if raw & _DISPATCH_MASK != _DISPATCH_BASE:
        raise UnknownDispatch(f"unallocated page-2 dispatch 0x{raw:02x}")
    dispatch = Dispatch(_DISPATCH_BASE | (raw & 0x03))

    cids: list[int] = []
    if raw & FLAG_CID_CHAIN:
        while True:
            if pos >= len(buf):
                raise TruncatedFrame("CID chain runs past end of frame")
            b = buf[pos]
            pos += 1
            cids.append(b & 0x7F)
            if not b & 0x80:
                break
    hop_id = None
    if raw & FLAG_HOP_ID:
        if pos >= len(buf):
            raise TruncatedFrame("missing HopID byte")
        hop_id = buf[pos]
        pos += 1
        if hop_id == 0:
            raise InvalidChain("hop id 0 is reserved for absence")
    return DispatchChain(dispatch=dispatch, cids=tuple(cids), hop_id=hop_id), buf[pos:]


class FragKind(enum.Enum):
    FIRST = "first"
    SUBSEQUENT = "subsequent"


@dataclass(frozen=True)
class FragHeader:
    kind: FragKind
    datagram_size: int
    datagram_tag: int
    offset_units8: int = 0

    def serialize(self) -> bytes:
        if not 0 <= self.datagram_size <= MAX_DATAGRAM:
            raise DatagramTooLarge("size field is 11 bits")
        pattern = 0xC0 if self.kind is FragKind.FIRST else 0xE0
        out = bytes([pattern | (self.datagram_size >> 8), self.datagram_size & 0xFF])
        out += (self.datagram_tag & 0xFFFF).to_bytes(2, "big")
        if self.kind is FragKind.SUBSEQUENT:
            out += bytes([self.offset_units8 & 0xFF])
        return out

    @property
    def header_len(self) -> int:
        return FRAG1_HEADER_LEN if self.kind is FragKind.FIRST else FRAGN_HEADER_LEN

    @staticmethod
    def is_fragment_dispatch(first_byte: int) -> bool:
        return first_byte & 0xF8 in (0xC0, 0xE0)

    @classmethod
    def parse(cls, buf: bytes) -> tuple["FragHeader", bytes]:
        if len(buf) < FRAG1_HEADER_LEN:
            raise TruncatedFrame("fragment header shorter than 4 bytes")
        pattern = buf[0] & 0xF8
        if pattern == 0xC0:
            kind = FragKind.FIRST
        elif pattern == 0xE0:
            kind = FragKind.SUBSEQUENT
        else:
            raise NotIcnlowpan("not a fragment dispatch")
        size = ((buf[0] & 0x07) << 8) | buf[1]
        tag = int.from_bytes(buf[2:4], "big")
        if kind is FragKind.FIRST:
            return cls(kind, size, tag), buf[4:]
        if len(buf) < FRAGN_HEADER_LEN:
            raise TruncatedFrame("subsequent fragment header shorter than 5 bytes")
        return cls(kind, size, tag, buf[4]), buf[5:]


@dataclass(frozen=True)
class LowpanFrame:
    """One link frame: optional fragment header plus payload octets."""

    payload: bytes
    frag: FragHeader | None = None

    mac_header_len = MAC_HEADER_LEN
    fcs_len = FCS_LEN

    def serialize(self) -> bytes:
        head = self.frag.serialize() if self.frag else b""
        return head + self.payload

    @property
    def total_len(self) -> int:
        """Bytes on air including the accounted MAC header and FCS."""
        return LINK_OVERHEAD + len(self.serialize())

    @property
    def page_switch_present(self) -> bool:
        return self.payload[:1] == bytes([PAGE_SWITCH_PAGE2])


def fragment(datagram: bytes, link_mtu: int = PHY_MTU, tag: int = 0) -> list[LowpanFrame]:
    """Split a datagram into link frames that fit the physical MTU.

    A datagram that fits in one frame is returned without a fragment
    header. Otherwise every payload except the last is the largest
    multiple of 8 the frame budget allows, and offsets count 8-byte units.
    """
    if len(datagram) > MAX_DATAGRAM:
        raise DatagramTooLarge(f"{len(datagram)} bytes exceeds the 11-bit size field")
    budget = link_mtu - LINK_OVERHEAD
    if len(datagram) <= budget:
        return [LowpanFrame(payload=bytes(datagram))]

    first_cap = (budget - FRAG1_HEADER_LEN) // FRAGMENT_UNIT * FRAGMENT_UNIT
    later_cap = (budget - FRAGN_HEADER_LEN) // FRAGMENT_UNIT * FRAGMENT_UNIT
    if first_cap <= 0 or later_cap <= 0:
        raise DatagramTooLarge(f"link MTU {link_mtu} leaves no room for fragments")

    size = len(datagram)
    frames = [LowpanFrame(
        payload=bytes(datagram[:first_cap]),
        frag=FragHeader(FragKind.FIRST, size, tag),
    )]
    pos = first_cap
    while pos < size:
        chunk = datagram[pos:pos + later_cap]
        frames.append(LowpanFrame(
            payload=bytes(chunk),
            frag=FragHeader(FragKind.SUBSEQUENT, size, tag, pos // FRAGMENT_UNIT),
        ))
        pos += len(chunk)
    return frames


def _merge_fragment(store: dict[int, bytes], offset: int, payload: bytes) -> None:
    """Record one fragment; identical duplicates are accepted silently."""
    existing = store.get(offset)
    if existing is not None:
        if existing != payload:
            raise OverlappingFragment(f"conflicting bytes at offset {offset}")
        return
    start, end = offset, offset + len(payload)
    for other, data in store.items():
        if other < end and start < other + len(data):
            raise OverlappingFragment(f"fragment at {offset} overlaps one at {other}")
    store[offset] = payload


def _assemble(store: dict[int, bytes], size: int) -> bytes | None:
    """Return the datagram once the fragments cover [0, size), else None."""
    pos = 0
    parts = []
    for offset in sorted(store):
        if offset != pos:
            return None
        parts.append(store[offset])
        pos += len(store[offset])
    if pos != size:
        return None
    return b"".join(parts)


def reassemble(frames) -> bytes:
    """Rebuild a datagram from fragments in any order.

    A single frame without a fragment header passes through unchanged.
    Raises ReassemblyTimeout when the set is incomplete, OverlappingFragment
    on conflicting bytes, and SizeMismatch when headers disagree.
    """
    frames = list(frames)
    if not frames:
        raise ReassemblyTimeout("no fragments")
    if len(frames) == 1 and frames[0].frag is None:
        return frames[0].payload

    size = None
    tag = None
    store: dict[int, bytes] = {}
    for fr in frames:
        if fr.frag is None:
            raise SizeMismatch("unfragmented frame mixed into a fragment set")
        if size is None:
            size, tag = fr.frag.datagram_size, fr.frag.datagram_tag
        elif fr.frag.datagram_size != size or fr.frag.datagram_tag != tag:
            raise SizeMismatch("fragments disagree on datagram size or tag")
        offset = 0 if fr.frag.kind is FragKind.FIRST else fr.frag.offset_units8 * FRAGMENT_UNIT
        _merge_fragment(store, offset, fr.payload)

    out = _assemble(store, size)
    if out is None:
        raise ReassemblyTimeout("fragment set incomplete")
    return out


@dataclass
class _PartialDatagram:
    size: int
    deadline: float
    store: dict[int, bytes] = field(default_factory=dict)


class ReassemblyBuffer:
    """Per-node reassembly state keyed by (source, tag).

    Entries that stay incomplete past the timeout are discarded; there is
    no retransmission or recovery of lost fragments.
    """

    def __init__(self, timeout_s: float = REASSEMBLY_TIMEOUT_S):
        self.timeout_s = timeout_s
        self._partial: dict[tuple, _PartialDatagram] = {}
        self.expired = 0

    def add(self, source, frame: LowpanFrame, now: float = 0.0) -> bytes | None:
        """Feed one frame; returns the datagram when it completes."""
        self.purge(now)
        if frame.frag is None:
            return frame.payload
        key = (source, frame.frag.datagram_tag)
        entry = self._partial.get(key)
        if entry is None:
            entry = _PartialDatagram(frame.frag.datagram_size, now + self.timeout_s)
            self._partial[key] = entry
        elif entry.size != frame.frag.datagram_size:
            del self._partial[key]
            raise SizeMismatch("fragments disagree on datagram size")
        offset = 0 if frame.frag.kind is FragKind.FIRST else frame.frag.offset_units8 * FRAGMENT_UNIT
        try:
            _merge_fragment(entry.store, offset, frame.payload)
        except OverlappingFragment:
            del self._partial[key]
            raise
        out = _assemble(entry.store, entry.size)
        if out is not None:
            del self._partial[key]
        return out

    def purge(self, now: float) -> int:
        """Drop incomplete datagrams whose window has passed."""
        stale = [k for k, v in self._partial.items() if v.deadline <= now]
        for key in stale:
            del self._partial[key]
        self.expired += len(stale)
        return len(stale)

    def __len__(self) -> int:
        return len(self._partial)
