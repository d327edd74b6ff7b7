"""Exception hierarchy for the convergence layer."""


class IcnlError(Exception):
    """Base class for every error raised by this package."""


# --- NDN TLV codec ---

class MalformedTlv(IcnlError):
    """Input is not a well-formed TLV message."""


class OverheadAssumptionViolated(IcnlError):
    """A type or length field needs a multi-byte header, so the 1-byte
    overhead accounting does not apply."""


# --- link framing and fragmentation ---

class InvalidChain(IcnlError):
    """Dispatch chain violates a construction rule."""


class UnknownDispatch(IcnlError):
    """Page-2 dispatch value outside the allocated range."""


class TruncatedFrame(IcnlError):
    """Frame ends in the middle of a header."""


class NotIcnlowpan(IcnlError):
    """Frame belongs to another dispatch page (plain 6LoWPAN traffic)."""


class DatagramTooLarge(IcnlError):
    """Datagram exceeds the 11-bit size field of the fragment header."""


class ReassemblyTimeout(IcnlError):
    """Fragment set is incomplete."""


class OverlappingFragment(IcnlError):
    """Two fragments cover the same range with different bytes."""


class SizeMismatch(IcnlError):
    """Fragments disagree on datagram size or tag."""


# --- stateless compression ---

class ComponentTooLong(IcnlError):
    """Name component exceeds the 15-byte nibble limit."""


class EmptyComponent(IcnlError):
    """Zero-length component cannot be length-nibble encoded."""


class MalformedCompressedName(IcnlError):
    """Compressed name bytes are inconsistent (no stop marker, truncation)."""


class MalformedCompressedInterest(IcnlError):
    """Compressed Interest body cannot be decoded."""


class MalformedCompressedData(IcnlError):
    """Compressed Data body cannot be decoded."""


# --- stateful compression ---

class UnknownCid(IcnlError):
    """Context identifier missing from the local table."""


class PitFull(IcnlError):
    """Pending-interest store reached its capacity."""


class HopIdSpaceExhausted(IcnlError):
    """All 255 hop identifiers are bound to live entries."""


class NoPitMatch(IcnlError):
    """No pending entry matches the response name."""


class UnknownHopId(IcnlError):
    """Hop identifier does not match any live outbound entry."""


# --- simulation and CLI ---

class ConfigError(IcnlError):
    """Invalid run configuration."""
