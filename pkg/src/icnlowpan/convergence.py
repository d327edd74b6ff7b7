"""Glue between the TLV codec, the compressors, and the link framing.

These helpers build and open complete dispatch payloads (page switch,
dispatch byte, chain, body). Messages carrying opaque extension TLVs, or
callers that disable compression, travel under the uncompressed dispatch
types with a plain TLV body.
"""

from __future__ import annotations

from . import ndn, stateless
from .frame import Dispatch, DispatchChain, frame_encapsulate
from .ndn import NdnData, NdnInterest, NdnName
from .stateful import CidTable
from .stateless import CodecOptions


def interest_to_frame(interest: NdnInterest, *, cid_table: CidTable | None = None,
                      hop_id: int | None = None, compress: bool = True) -> bytes:
    """Serialize an Interest as a complete dispatch payload."""
    if not compress or interest.extra:
        chain = DispatchChain(Dispatch.UNCOMPRESSED_INTEREST, hop_id=hop_id)
        return frame_encapsulate(chain, ndn.encode_interest(interest))
    plan = stateless.plan_name(interest.name, cid_table)
    opts = CodecOptions(cid_table=cid_table, hop_id=hop_id)
    body = stateless.compress_interest(interest, opts)
    chain = DispatchChain(Dispatch.COMPRESSED_INTEREST, cids=plan.cids, hop_id=hop_id)
    return frame_encapsulate(chain, body)


def data_to_frame(data: NdnData, *, cid_table: CidTable | None = None,
                  hop_id: int | None = None, request_name: NdnName | None = None,
                  compress: bool = True) -> bytes:
    """Serialize a Data message as a complete dispatch payload.

    Passing a hop id plus the pending request name elides the carried name
    down to its suffix (or to nothing when the names are equal).
    """
    if not compress or data.extra:
        chain = DispatchChain(Dispatch.UNCOMPRESSED_DATA, hop_id=hop_id)
        return frame_encapsulate(chain, ndn.encode_data(data))
    opts = CodecOptions(cid_table=cid_table, hop_id=hop_id, request_name=request_name)
    plan = stateless.plan_data_name(data.name, opts)
    body = stateless.compress_data(data, opts)
    chain = DispatchChain(Dispatch.COMPRESSED_DATA, cids=plan.cids, hop_id=hop_id)
    return frame_encapsulate(chain, body)


def decode_frame_body(chain: DispatchChain, body: bytes, *,
                      cid_table: CidTable | None = None,
                      request_name: NdnName | None = None):
    """Decode the body that parse_frame returned into a message object."""
    opts = CodecOptions(cid_table=cid_table, hop_id=chain.hop_id,
                        cids=chain.cids, request_name=request_name)
    if chain.dispatch is Dispatch.UNCOMPRESSED_INTEREST:
        return ndn.decode_interest(body)
    if chain.dispatch is Dispatch.UNCOMPRESSED_DATA:
        return ndn.decode_data(body)
    if chain.dispatch is Dispatch.COMPRESSED_INTEREST:
        return stateless.decompress_interest(body, opts)
    return stateless.decompress_data(body, opts)
