"""Dispatch framing, fragmentation, and reassembly."""

import itertools
import random

import pytest

from icnlowpan.errors import (
    DatagramTooLarge,
    InvalidChain,
    NotIcnlowpan,
    OverlappingFragment,
    ReassemblyTimeout,
    SizeMismatch,
    TruncatedFrame,
    UnknownDispatch,
)
from icnlowpan.frame import (
    Dispatch,
    DispatchChain,
    FragHeader,
    FragKind,
    LINK_OVERHEAD,
    LowpanFrame,
    PHY_MTU,
    ReassemblyBuffer,
    fragment,
    frame_encapsulate,
    parse_frame,
    reassemble,
)


def test_minimal_frame_is_page_switch_plus_dispatch():
    wire = frame_encapsulate(DispatchChain(Dispatch.COMPRESSED_INTEREST), b"")
    assert wire == bytes([0xF2, 0x82])


def test_cid_chain_msb_rule():
    wire = frame_encapsulate(
        DispatchChain(Dispatch.COMPRESSED_INTEREST, cids=(0x05, 0x11)), b"")
    assert wire[2] == 0x85 and wire[3] == 0x11


def test_reference_compressed_interest_frame_layout():
    # 19-byte body plus page switch, dispatch, one CID, one HopID
    body = bytes(19)
    chain = DispatchChain(Dispatch.COMPRESSED_INTEREST, cids=(1,), hop_id=7)
    wire = frame_encapsulate(chain, body)
    assert len(wire) == 19 + 4
    parsed_chain, parsed_body = parse_frame(wire)
    assert parsed_chain == chain and parsed_body == body


def test_parse_round_trip_random_chains():
    rng = random.Random(7)
    for _ in range(500):
        chain = DispatchChain(
            dispatch=rng.choice(list(Dispatch)),
            cids=tuple(rng.randrange(128) for _ in range(rng.randint(0, 4))),
            hop_id=rng.choice([None, rng.randint(1, 255)]),
        )
        body = rng.randbytes(rng.randint(0, 40))
        parsed_chain, parsed_body = parse_frame(frame_encapsulate(chain, body))
        assert parsed_chain == chain and parsed_body == body


def test_foreign_page_dispatches_rejected():
    with pytest.raises(NotIcnlowpan):
        parse_frame(bytes.fromhex("4100"))  # page-0 uncompressed-IPv6 space
    with pytest.raises(NotIcnlowpan):
        parse_frame(bytes.fromhex("f0aa"))  # switch back to page 0
    with pytest.raises(NotIcnlowpan):
        parse_frame(bytes.fromhex("f1aa"))  # page 1


def test_unallocated_page2_dispatch():
    with pytest.raises(UnknownDispatch):
        parse_frame(bytes.fromhex("f2c0"))
    with pytest.raises(UnknownDispatch):
        parse_frame(bytes.fromhex("f291"))


def test_truncated_chain_and_missing_hop():
    wire = frame_encapsulate(
        DispatchChain(Dispatch.COMPRESSED_DATA, cids=(3, 4)), b"")
    with pytest.raises(TruncatedFrame):
        parse_frame(wire[:3])  # chain byte with MSB set, then nothing
    hop_wire = frame_encapsulate(
        DispatchChain(Dispatch.COMPRESSED_DATA, hop_id=9), b"")
    with pytest.raises(TruncatedFrame):
        parse_frame(hop_wire[:2])


def test_invalid_chains_rejected_on_build():
    with pytest.raises(InvalidChain):
        frame_encapsulate(DispatchChain(Dispatch.COMPRESSED_DATA, cids=(0x90,)), b"")
    with pytest.raises(InvalidChain):
        frame_encapsulate(DispatchChain(Dispatch.COMPRESSED_DATA, hop_id=0), b"")
    with pytest.raises(InvalidChain):
        frame_encapsulate(DispatchChain(Dispatch.COMPRESSED_DATA, page=0), b"")


def test_hop_id_zero_rejected_on_parse():
    with pytest.raises(InvalidChain):
        parse_frame(bytes.fromhex("f28b00"))


def test_mesh_and_broadcast_headers_skipped():
    inner = frame_encapsulate(DispatchChain(Dispatch.COMPRESSED_INTEREST), b"hi")
    mesh = bytes([0b10110001]) + bytes(4)  # V=1, F=1: two 2-byte addresses
    bc0 = bytes([0x50, 0x07])
    chain, body = parse_frame(mesh + bc0 + inner)
    assert chain.dispatch is Dispatch.COMPRESSED_INTEREST and body == b"hi"


def test_small_datagram_not_fragmented():
    frames = fragment(bytes(50), PHY_MTU, tag=1)
    assert len(frames) == 1 and frames[0].frag is None
    assert frames[0].payload == bytes(50)


def test_fragment_300_bytes_and_reassemble_all_orders():
    rng = random.Random(8)
    datagram = rng.randbytes(300)
    frames = fragment(datagram, PHY_MTU, tag=77)
    assert frames[0].frag.kind is FragKind.FIRST
    for fr in frames[1:]:
        assert fr.frag.kind is FragKind.SUBSEQUENT
    for fr in frames[:-1]:
        assert len(fr.payload) % 8 == 0
    for fr in frames:
        assert fr.total_len <= PHY_MTU
    assert b"".join(fr.payload for fr in frames) == datagram
    # brute force: every arrival order rebuilds the same datagram
    for perm in itertools.permutations(frames):
        assert reassemble(perm) == datagram


def test_fragment_rejects_oversized_datagram():
    with pytest.raises(DatagramTooLarge):
        fragment(bytes(2048), PHY_MTU, tag=0)


def test_fragment_header_fields_shared():
    frames = fragment(bytes(500), PHY_MTU, tag=0x1234)
    sizes = {fr.frag.datagram_size for fr in frames}
    tags = {fr.frag.datagram_tag for fr in frames}
    assert sizes == {500} and tags == {0x1234}
    offsets = [fr.frag.offset_units8 for fr in frames[1:]]
    assert offsets == sorted(offsets)


def test_frag_header_byte_layout():
    first = FragHeader(FragKind.FIRST, 0x123, 0xBEEF)
    assert first.serialize() == bytes.fromhex("c123beef")
    later = FragHeader(FragKind.SUBSEQUENT, 0x123, 0xBEEF, 12)
    assert later.serialize() == bytes.fromhex("e123beef0c")
    parsed, rest = FragHeader.parse(later.serialize() + b"xy")
    assert parsed == later and rest == b"xy"


def test_reassemble_reverse_order():
    datagram = bytes(range(250))
    frames = fragment(datagram, PHY_MTU, tag=5)
    assert reassemble(reversed(frames)) == datagram


def test_missing_fragment_times_out():
    frames = fragment(bytes(400), PHY_MTU, tag=6)
    with pytest.raises(ReassemblyTimeout):
        reassemble(frames[:-1])


def test_duplicate_fragment_idempotent():
    datagram = random.Random(9).randbytes(400)
    frames = fragment(datagram, PHY_MTU, tag=6)
    assert reassemble(frames + [frames[1]]) == reassemble(frames) == datagram


def test_conflicting_fragment_rejected():
    frames = fragment(bytes(400), PHY_MTU, tag=6)
    evil = LowpanFrame(b"\xff" * len(frames[1].payload), frames[1].frag)
    with pytest.raises(OverlappingFragment):
        reassemble(frames + [evil])


def test_fragment_metadata_mismatch_rejected():
    frames = fragment(bytes(400), PHY_MTU, tag=6)
    other = fragment(bytes(400), PHY_MTU, tag=7)
    with pytest.raises(SizeMismatch):
        reassemble([frames[0], other[1]])


def test_shuffle_reassembly_property():
    rng = random.Random(10)
    for _ in range(100):
        datagram = rng.randbytes(rng.randint(1, 2047))
        frames = fragment(datagram, PHY_MTU, tag=rng.randrange(1 << 16))
        for fr in frames:
            assert fr.total_len <= PHY_MTU
        shuffled = frames[:]
        rng.shuffle(shuffled)
        assert reassemble(shuffled) == datagram


def test_reassembly_buffer_timeout_discards():
    buf = ReassemblyBuffer(timeout_s=4.0)
    frames = fragment(bytes(300), PHY_MTU, tag=1)
    assert buf.add("n1", frames[0], now=0.0) is None
    assert len(buf) == 1
    buf.purge(now=4.5)
    assert len(buf) == 0 and buf.expired == 1
    # the late fragment alone cannot complete anything
    assert buf.add("n1", frames[1], now=4.6) is None


def test_reassembly_buffer_keyed_by_source_and_tag():
    buf = ReassemblyBuffer()
    frames_a = fragment(b"a" * 300, PHY_MTU, tag=1)
    frames_b = fragment(b"b" * 300, PHY_MTU, tag=1)  # same tag, other source
    for fr in frames_a[:-1]:
        assert buf.add("na", fr, 0.0) is None
    for fr in frames_b[:-1]:
        assert buf.add("nb", fr, 0.0) is None
    assert buf.add("na", frames_a[-1], 0.0) == b"a" * 300
    assert buf.add("nb", frames_b[-1], 0.0) == b"b" * 300


def test_frame_total_length_accounting():
    frame = LowpanFrame(bytes(80))
    assert frame.total_len == LINK_OVERHEAD + 80
    assert frame.mac_header_len == 21 and frame.fcs_len == 2


def test_parse_total_on_arbitrary_bytes():
    from icnlowpan.errors import IcnlError

    rng = random.Random(99)
    for _ in range(3000):
        blob = rng.randbytes(rng.randint(0, 60))
        try:
            parse_frame(blob)
        except IcnlError:
            pass  # typed rejection is the only acceptable failure
    # mutated valid frames
    for _ in range(1000):
        chain = DispatchChain(Dispatch.COMPRESSED_DATA,
                              cids=(rng.randrange(128),), hop_id=rng.randint(1, 255))
        wire = bytearray(frame_encapsulate(chain, rng.randbytes(10)))
        wire[rng.randrange(len(wire))] = rng.randrange(256)
        try:
            parse_frame(bytes(wire))
        except IcnlError:
            pass
