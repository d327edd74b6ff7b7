"""NDN convergence layer for low-power links.

The package splits along the wire path: ``ndn`` is the plain TLV codec,
``frame`` the dispatch framing and fragmentation, ``stateless`` and
``stateful`` the two compression layers, ``convergence`` the glue that
builds complete dispatch payloads, ``sim`` the deterministic link
simulator, and ``cli``/``report``/``corpus`` the study tooling.
"""

from .errors import IcnlError
from .frame import (
    Dispatch,
    DispatchChain,
    FragHeader,
    LowpanFrame,
    PHY_MTU,
    ReassemblyBuffer,
    fragment,
    frame_encapsulate,
    parse_frame,
    reassemble,
)
from .ndn import (
    NdnData,
    NdnInterest,
    NdnName,
    TlvHeader,
    decode_data,
    decode_interest,
    encode_data,
    encode_interest,
    name_tlv_overhead_uncompressed,
)
from .stateful import (
    CidTable,
    Pit,
    PitEntry,
    cid_compress,
    cid_decompress,
    data_inbound_swap,
    data_outbound,
    interest_inbound,
    interest_outbound,
)
from .stateless import (
    CodecOptions,
    compress_data,
    compress_interest,
    compress_name,
    compressed_name_overhead,
    decompress_data,
    decompress_interest,
    decompress_name,
    name_compression_saving,
)
from .convergence import data_to_frame, decode_frame_body, interest_to_frame
from .sim import (
    InterfererConfig,
    InterfererSchedule,
    Metrics,
    SimConfig,
    Simulator,
    StackMode,
    collision_check,
    run_handshakes,
    step,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
