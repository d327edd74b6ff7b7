"""Shared-context and per-hop compression state.

Two mechanisms live here. Context identifiers (CIDs) are one-byte handles
for name prefixes shared across the whole LoWPAN; they are loaded from a
static config file of ``cid <id> <uri>`` lines. Hop identifiers are
ephemeral one-byte tags bound to pending-interest entries: a node tags the
Interests it forwards with a fresh outbound id and remembers the inbound
id each neighbor used, so returning responses can drop their names and be
routed purely by swapping hop ids against the pending table.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import (
    ConfigError,
    HopIdSpaceExhausted,
    NoPitMatch,
    PitFull,
    UnknownCid,
    UnknownHopId,
)
from .ndn import NdnName

MAX_CID = 0x7F
MAX_HOP_ID = 0xFF  # 0 is reserved to mean "absent"


class CidTable:
    """Bidirectional, injective map from context id to name prefix."""

    def __init__(self):
        self._by_id: dict[int, NdnName] = {}
        self._by_prefix: dict[tuple, int] = {}

    def add(self, cid: int, prefix: NdnName) -> None:
        if not 0 <= cid <= MAX_CID:
            raise ConfigError(f"context id {cid} outside 0..127")
        if not prefix.components:
            raise ConfigError("empty prefix cannot be a context")
        if cid in self._by_id:
            raise ConfigError(f"duplicate context id {cid}")
        if prefix.components in self._by_prefix:
            raise ConfigError(f"duplicate prefix {prefix.to_uri()}")
        self._by_id[cid] = prefix
        self._by_prefix[prefix.components] = cid

    def prefix_for(self, cid: int) -> NdnName:
        try:
            return self._by_id[cid]
        except KeyError:
            raise UnknownCid(f"context id {cid} not in table") from None

    def match_longest(self, name: NdnName) -> tuple[int, NdnName] | None:
        """Longest table prefix of the name, as (cid, prefix)."""
        best = None
        for comps, cid in self._by_prefix.items():
            n = len(comps)
            if name.components[:n] == comps and (best is None or n > len(best[1])):
                best = (cid, comps)
        if best is None:
            return None
        return best[0], NdnName(best[1])

    def items(self):
        return sorted(self._by_id.items())

    def __len__(self) -> int:
        return len(self._by_id)

    @classmethod
    def from_lines(cls, lines, origin: str = "<config>") -> "CidTable":
        """Parse ``cid <id> <uri>`` lines; blanks and # comments are skipped."""
        table = cls()
        for lineno, line in enumerate(lines, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] != "cid":
                raise ConfigError(f"{origin}:{lineno}: expected 'cid <id> <uri>'")
            try:
                cid = int(parts[1], 0)
            except ValueError:
                raise ConfigError(f"{origin}:{lineno}: bad context id {parts[1]!r}") from None
            table.add(cid, NdnName.from_uri(parts[2]))
        return table

    @classmethod
    def from_file(cls, path) -> "CidTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_lines(fh, origin=str(path))


def cid_compress(name: NdnName, table: CidTable | None) -> tuple[list[int], NdnName]:
    """Strip table prefixes off the front of a name, longest match first.

    Matching repeats on the remainder, so composable table entries produce
    a chain of ids. No match at all returns ([], name).
    """
    cids: list[int] = []
    residual = name
    if table is not None:
        while True:
            hit = table.match_longest(residual)
            if hit is None:
                break
            cid, prefix = hit
            cids.append(cid)
            residual = residual.suffix_after(prefix)
    return cids, residual


def cid_decompress(cids, residual: NdnName, table: CidTable | None) -> NdnName:
    """Rebuild the original name from chained context prefixes."""
    name = NdnName(())
    for cid in cids:
        if table is None:
            raise UnknownCid("no context table configured")
        name = name + table.prefix_for(cid)
    return name + residual


@dataclass
class PitEntry:
    """Pending request plus the hop ids attached on either side.

    ``inbound`` maps each neighbor face to the hop id that neighbor put in
    its Interest, so responses can fan out to every requester. ``hid_out``
    is this node's own tag on the forwarded Interest. Both die with the
    entry.
    """

    name: NdnName
    expiry: float
    inbound: dict = field(default_factory=dict)  # face -> hop id
    hid_out: int | None = None


class Pit:
    """Pending Interest Table owned by a single node."""

    def __init__(self, max_entries: int | None = None, rng: random.Random | None = None):
        self.max_entries = max_entries
        self.rng = rng or random.Random(0)
        self.entries: dict[tuple, PitEntry] = {}

    def key(self, name: NdnName) -> tuple:
        return name.components

    def get(self, name: NdnName) -> PitEntry | None:
        return self.entries.get(self.key(name))

    def upsert(self, name: NdnName, expiry: float) -> PitEntry:
        entry = self.entries.get(self.key(name))
        if entry is None:
            if self.max_entries is not None and len(self.entries) >= self.max_entries:
                raise PitFull(f"table limited to {self.max_entries} entries")
            entry = PitEntry(name=name, expiry=expiry)
            self.entries[self.key(name)] = entry
        else:
            entry.expiry = max(entry.expiry, expiry)
        return entry

    def remove(self, name: NdnName) -> None:
        self.entries.pop(self.key(name), None)

    def expire(self, now: float) -> int:
        stale = [k for k, e in self.entries.items() if e.expiry <= now]
        for k in stale:
            del self.entries[k]
        return len(stale)

    def live_outbound_ids(self) -> set[int]:
        return {e.hid_out for e in self.entries.values() if e.hid_out is not None}

    def match_for_data(self, name: NdnName) -> PitEntry | None:
        """Longest entry whose name is a prefix of (or equals) the response name."""
        best = None
        for entry in self.entries.values():
            if entry.name.is_prefix_of(name):
                if best is None or len(entry.name) > len(best.name):
                    best = entry
        return best

    def assert_unique_outbound(self) -> None:
        ids = [e.hid_out for e in self.entries.values() if e.hid_out is not None]
        if len(ids) != len(set(ids)):
            raise AssertionError("live outbound hop ids collide")


def interest_outbound(pit: Pit, name: NdnName) -> int:
    """Tag the pending entry with a fresh outbound hop id and return it.

    Repeat calls on a live entry (retransmissions) reuse the existing id.
    Ids are drawn from the node's seeded generator and retried against the
    live set, so they are unique among live entries at any instant.
    """
    entry = pit.get(name)
    if entry is None:
        raise NoPitMatch(f"no pending entry for {name.to_uri()}")
    if entry.hid_out is not None:
        return entry.hid_out
    live = pit.live_outbound_ids()
    if len(live) >= MAX_HOP_ID:
        raise HopIdSpaceExhausted("all 255 hop ids are bound to live entries")
    hop = pit.rng.randrange(1, MAX_HOP_ID + 1)
    while hop in live:
        hop = pit.rng.randrange(1, MAX_HOP_ID + 1)
    entry.hid_out = hop
    return hop


def interest_inbound(pit: Pit, frame_hop_id: int | None, name: NdnName,
                     face, expiry: float) -> PitEntry:
    """Record where an Interest came from and which hop id it carried.

    A duplicate Interest refreshes the entry and aggregates its face; the
    same (face, hop id) pair is idempotent.
    """
    entry = pit.upsert(name, expiry)
    if frame_hop_id is not None:
        entry.inbound[face] = frame_hop_id
    elif face not in entry.inbound:
        entry.inbound[face] = None
    return entry


def data_outbound(pit: Pit, name: NdnName) -> tuple[int, NdnName | None]:
    """Pick the hop id a response should carry, plus any name suffix.

    The suffix is None when the response name equals the pending name;
    otherwise it holds the extra components the requester has not seen.
    Raises NoPitMatch when no usable entry exists (the caller then falls
    back to name-carrying compression).
    """
    entry = pit.match_for_data(name)
    if entry is None:
        raise NoPitMatch(f"no pending entry matches {name.to_uri()}")
    hops = [h for h in entry.inbound.values() if h is not None]
    if not hops:
        raise NoPitMatch("pending entry has no inbound hop id")
    suffix = name.suffix_after(entry.name)
    return hops[0], (suffix if suffix.components else None)


def data_inbound_swap(pit: Pit, frame_hop_id: int) -> tuple[PitEntry, list[tuple]]:
    """Match a response's hop id against our own outbound column.

    Returns the entry and the (face, hop id) pairs to forward to. An empty
    list means this node originated the request and the chain terminates
    here; the full name is then rebuilt from the entry.
    """
    for entry in pit.entries.values():
        if entry.hid_out == frame_hop_id:
            fanout = [(face, hop) for face, hop in entry.inbound.items()]
            return entry, fanout
    raise UnknownHopId(f"hop id {frame_hop_id} matches no live entry")
