"""Deterministic discrete-event simulation of request-response traffic.

A line topology (consumer, k forwarders, producer) exchanges Interest and
Data messages over modeled 802.15.4 links at 250 kbit/s (32 us per byte,
6 preamble bytes per frame). Loss is decided per frame: a frame dies when
its airtime overlaps a transmission of the bursty interferer, otherwise by
a Bernoulli draw. There are no acknowledgments or retransmissions, so a
lost frame is final. All clocks are virtual microseconds and every random
draw comes from seeded generators, which makes runs bit-reproducible.
"""

from __future__ import annotations

import enum
import heapq
import random
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass

from . import ndn
from .convergence import data_to_frame, decode_frame_body, interest_to_frame
from .errors import ConfigError, IcnlError, NoPitMatch, UnknownHopId
from .frame import (
    FragHeader,
    LINK_OVERHEAD,
    LowpanFrame,
    PHY_MTU,
    fragment,
    frame_encapsulate,
    parse_frame,
    ReassemblyBuffer,
)
from .ndn import NdnData, NdnInterest, NdnName
from .stateful import (
    CidTable,
    Pit,
    data_inbound_swap,
    data_outbound,
    interest_inbound,
    interest_outbound,
)

US_PER_BYTE = 32  # 250 kbit/s
PREAMBLE_BYTES = 6
DEFAULT_SEED = 42

NAME_SHORT_BASE = "/org/example/temp"
NAME_LONG_BASE = "/org/example/building/1/floor/4/room/481/temp"
DEFAULT_CIDS = (
    (0, "/org"),
    (1, "/org/example/building/1/floor/4/room/481"),
)


def airtime_us(frame_len: int) -> int:
    """Channel occupancy of one frame, preamble included."""
    return (PREAMBLE_BYTES + frame_len) * US_PER_BYTE


class StackMode(enum.Enum):
    PLAIN_NDN = "plain-ndn"
    ICNLOWPAN = "icnlowpan"


class Role(enum.Enum):
    CONSUMER = "consumer"
    FORWARDER = "forwarder"
    PRODUCER = "producer"


def base_name_for_scheme(scheme: str) -> NdnName:
    if scheme == "short":
        return NdnName.from_uri(NAME_SHORT_BASE)
    if scheme == "long":
        return NdnName.from_uri(NAME_LONG_BASE)
    if scheme.startswith("/"):
        return NdnName.from_uri(scheme)
    raise ConfigError(f"unknown name scheme {scheme!r}")


def default_cid_table() -> CidTable:
    table = CidTable()
    for cid, uri in DEFAULT_CIDS:
        table.add(cid, NdnName.from_uri(uri))
    return table


@dataclass(frozen=True)
class InterfererConfig:
    burst_frames: int = 200
    gap_ms: tuple = (5.0, 15.0)
    silence_ms: tuple = (500.0, 1500.0)
    frame_len: int = PHY_MTU


class InterfererSchedule:
    """Lazily generated burst/silence transmission intervals.

    The same (config, seed) pair always regenerates the identical
    schedule; intervals are disjoint and sorted, so an overlap test is a
    single bisection.
    """

    def __init__(self, config: InterfererConfig, seed: int):
        self.config = config
        self._rng = random.Random(seed)
        self._starts: list[int] = []
        self._ends: list[int] = []
        self._frame_air = airtime_us(config.frame_len)
        # leading silence so bursts do not phase-lock with the first request
        self._cursor = int(self._rng.uniform(*config.silence_ms) * 1000)

    def _extend_to(self, t_us: int) -> None:
        cfg = self.config
        while self._cursor <= t_us:
            for i in range(cfg.burst_frames):
                self._starts.append(self._cursor)
                self._ends.append(self._cursor + self._frame_air)
                self._cursor += self._frame_air
                if i < cfg.burst_frames - 1:
                    self._cursor += int(self._rng.uniform(*cfg.gap_ms) * 1000)
            self._cursor += int(self._rng.uniform(*cfg.silence_ms) * 1000)

    def overlaps(self, start_us: int, end_us: int) -> bool:
        self._extend_to(end_us)
        idx = bisect_right(self._starts, end_us) - 1
        while idx >= 0 and self._starts[idx] >= end_us:
            idx -= 1
        return idx >= 0 and self._ends[idx] > start_us


def collision_check(frame_interval: tuple[int, int],
                    interferer_schedule: InterfererSchedule | None,
                    base_loss: float = 0.0,
                    rng: random.Random | None = None) -> bool:
    """True when the frame is lost.

    Loss is certain when the airtime interval overlaps an interferer
    transmission; otherwise a Bernoulli draw with the base probability
    decides.
    """
    start, end = frame_interval
    if interferer_schedule is not None and interferer_schedule.overlaps(start, end):
        return True
    if base_loss > 0.0:
        return (rng or random).random() < base_loss
    return False


# --- events handed to nodes ---

@dataclass(frozen=True)
class AppRequest:
    seq: int


@dataclass(frozen=True)
class FrameArrival:
    wire: bytes
    from_node: int


@dataclass(frozen=True)
class TimerExpiry:
    kind: str
    key: tuple


# --- commands emitted by nodes ---

@dataclass(frozen=True)
class SendFrame:
    dst: int
    frame: LowpanFrame


@dataclass(frozen=True)
class StartTimer:
    delay_us: int
    event: TimerExpiry


@dataclass
class SimConfig:
    hops: int = 1
    requests: int = 10
    name_scheme: str = "long"
    stack: StackMode = StackMode.ICNLOWPAN
    seed: int = DEFAULT_SEED
    request_interval_ms: float = 500.0
    base_loss: float = 0.0
    interferer: InterfererConfig | None = None
    lifetime_ms: int = 4000
    freshness_ms: int | None = 4000
    content_len: int = 4
    response_suffix: str = ""
    cid_table: CidTable | None = None
    reassembly_timeout_s: float = 4.0
    link_mtu: int = PHY_MTU
    check_invariants: bool = False

    def validate(self) -> None:
        if self.hops < 0:
            raise ConfigError("forwarder count must be >= 0")
        if self.requests < 1:
            raise ConfigError("need at least one request")
        if not 0.0 <= self.base_loss <= 1.0:
            raise ConfigError("loss probability must be within [0, 1]")
        base_name_for_scheme(self.name_scheme)


class Node:
    """One network node; all state mutation happens in handle()."""

    def __init__(self, index: int, role: Role, config: SimConfig,
                 rng: random.Random, cid_table: CidTable | None):
        self.index = index
        self.role = role
        self.config = config
        self.stack = config.stack
        self.rng = rng
        self.cid_table = cid_table
        self.pit = Pit(rng=rng)
        self.reassembly = ReassemblyBuffer(config.reassembly_timeout_s)
        self.base_name = base_name_for_scheme(config.name_scheme)
        self.response_suffix = (NdnName.from_uri(config.response_suffix)
                                if config.response_suffix else NdnName(()))
        self._tag = 0
        # link accounting (frame lengths include the 21+2 header bytes)
        self.frames_tx = 0
        self.bytes_tx = 0
        self.airtime_us = 0
        self.frames_addressed = 0
        self.bytes_addressed = 0
        self.frames_rx = 0
        self.bytes_rx = 0
        # application accounting
        self.interests_sent = 0
        self.interests_received = 0
        self.responses_received = 0
        self.delivered: list[tuple[bytes, NdnName]] = []
        self.emitted: dict[bytes, NdnName] = {}
        self.drops: Counter = Counter()

    # --- helpers ---

    def next_tag(self) -> int:
        self._tag = (self._tag + 1) & 0xFFFF
        return self._tag

    def _frames_for(self, datagram: bytes) -> list[LowpanFrame]:
        budget = self.config.link_mtu - LINK_OVERHEAD
        if self.stack is StackMode.PLAIN_NDN:
            if len(datagram) > budget:
                raise ConfigError(
                    f"{len(datagram)}-byte message does not fit the link and "
                    "the plain stack cannot fragment")
            return [LowpanFrame(payload=datagram)]
        return fragment(datagram, self.config.link_mtu, self.next_tag())

    def _send_toward(self, dst: int, datagram: bytes) -> list:
        return [SendFrame(dst, fr) for fr in self._frames_for(datagram)]

    # --- event handling ---

    def handle(self, event, now_us: int) -> list:
        if isinstance(event, AppRequest):
            return self._on_app_request(event, now_us)
        if isinstance(event, FrameArrival):
            return self._on_frame(event, now_us)
        if isinstance(event, TimerExpiry):
            return self._on_timer(event, now_us)
        raise ConfigError(f"unknown event {event!r}")

    def _on_app_request(self, event: AppRequest, now_us: int) -> list:
        name = self.base_name + NdnName((str(event.seq).encode(),))
        interest = NdnInterest(
            name=name,
            nonce=self.rng.getrandbits(32).to_bytes(4, "big"),
            lifetime_ms=self.config.lifetime_ms,
        )
        expiry = now_us + self.config.lifetime_ms * 1000
        entry = self.pit.upsert(name, expiry)
        self.interests_sent += 1
        if self.stack is StackMode.ICNLOWPAN:
            hop = interest_outbound(self.pit, name)
            wire = interest_to_frame(interest, cid_table=self.cid_table, hop_id=hop)
        else:
            wire = ndn.encode_interest(interest)
        out = self._send_toward(self.index + 1, wire)
        out.append(StartTimer(expiry - now_us, TimerExpiry("pit", name.components)))
        return out

    def _on_frame(self, event: FrameArrival, now_us: int) -> list:
        wire = event.wire
        if not wire:
            self.drops["empty"] += 1
            return []
        if FragHeader.is_fragment_dispatch(wire[0]):
            try:
                header, rest = FragHeader.parse(wire)
                datagram = self.reassembly.add(
                    event.from_node, LowpanFrame(rest, header), now_us / 1e6)
            except IcnlError as exc:
                self.drops[type(exc).__name__] += 1
                return []
            if datagram is None:
                return []
        else:
            datagram = wire
        return self._on_datagram(datagram, event.from_node, now_us)

    def _on_datagram(self, datagram: bytes, from_node: int, now_us: int) -> list:
        if self.stack is StackMode.PLAIN_NDN:
            is_interest = bool(datagram) and datagram[0] == ndn.T_INTEREST
            try:
                message = (ndn.decode_interest(datagram) if is_interest
                           else ndn.decode_data(datagram))
            except IcnlError as exc:
                self.drops[type(exc).__name__] += 1
                return []
            if is_interest:
                return self._on_interest(message, None, datagram, from_node, now_us)
            return self._on_plain_data(message, datagram, from_node, now_us)
        try:
            chain, body = parse_frame(datagram)
        except IcnlError as exc:
            self.drops[type(exc).__name__] += 1
            return []
        if chain.dispatch.is_interest:
            try:
                interest = decode_frame_body(chain, body, cid_table=self.cid_table)
            except IcnlError as exc:
                self.drops[type(exc).__name__] += 1
                return []
            return self._on_interest(interest, chain, body, from_node, now_us)
        return self._on_lowpan_data(chain, body, from_node, now_us)

    def _on_interest(self, interest: NdnInterest, chain, body: bytes,
                     from_node: int, now_us: int) -> list:
        hop_in = chain.hop_id if chain is not None else None
        lifetime = interest.lifetime_ms or self.config.lifetime_ms
        expiry = now_us + lifetime * 1000
        previous = self.pit.get(interest.name)
        already_forwarded = previous is not None and (
            previous.hid_out is not None or self.stack is StackMode.PLAIN_NDN)
        entry = interest_inbound(self.pit, hop_in, interest.name, from_node, expiry)
        timer = StartTimer(expiry - now_us, TimerExpiry("pit", interest.name.components))

        if self.role is Role.PRODUCER:
            self.interests_received += 1
            out = self._respond(interest, entry, now_us)
            out.append(timer)
            return out

        if already_forwarded:  # aggregated; state refreshed, nothing to send
            return [timer]
        if self.stack is StackMode.ICNLOWPAN:
            hop_out = interest_outbound(self.pit, interest.name)
            if chain is not None and chain.hop_id is not None:
                # body is unchanged hop to hop, only the chain's id swaps
                out_chain = type(chain)(chain.dispatch, cids=chain.cids, hop_id=hop_out)
                datagram = frame_encapsulate(out_chain, body)
            else:
                datagram = interest_to_frame(interest, cid_table=self.cid_table,
                                             hop_id=hop_out)
        else:
            datagram = ndn.encode_interest(interest)
        out = self._send_toward(self.index + 1, datagram)
        out.append(timer)
        return out

    def _respond(self, interest: NdnInterest, entry, now_us: int) -> list:
        data_name = interest.name + self.response_suffix
        content = self._reading_for(interest.name)
        data = NdnData(name=data_name, content=content,
                       meta_freshness_ms=self.config.freshness_ms)
        self.emitted[content] = data_name
        out = []
        if self.stack is StackMode.ICNLOWPAN:
            try:
                data_outbound(self.pit, data_name)  # raises when unusable
                usable = all(h is not None for h in entry.inbound.values())
            except NoPitMatch:
                usable = False
            if usable:
                for face, hop in entry.inbound.items():
                    wire = data_to_frame(data, cid_table=self.cid_table,
                                         hop_id=hop, request_name=entry.name)
                    out += self._send_toward(face, wire)
            else:  # name-carrying fallback when per-hop state is unusable
                wire = data_to_frame(data, cid_table=self.cid_table)
                for face in entry.inbound:
                    out += self._send_toward(face, wire)
        else:
            wire = ndn.encode_data(data)
            for face in entry.inbound:
                out += self._send_toward(face, wire)
        self.pit.remove(interest.name)
        return out

    def _reading_for(self, name: NdnName) -> bytes:
        try:
            value = int(name.components[-1].decode())
        except (ValueError, UnicodeDecodeError, IndexError):
            value = 0
        return (value & 0xFFFFFFFF).to_bytes(self.config.content_len, "big")

    def _on_lowpan_data(self, chain, body: bytes, from_node: int, now_us: int) -> list:
        if chain.hop_id is not None:
            try:
                entry, fanout = data_inbound_swap(self.pit, chain.hop_id)
            except UnknownHopId as exc:
                self.drops[type(exc).__name__] += 1
                return []
            if not fanout:  # we originated this request
                try:
                    data = decode_frame_body(chain, body, cid_table=self.cid_table,
                                             request_name=entry.name)
                except IcnlError as exc:
                    self.drops[type(exc).__name__] += 1
                    return []
                self._deliver(data)
                self.pit.remove(entry.name)
                return []
            out = []
            for face, hop in fanout:
                if hop is None:
                    self.drops["NoPitMatch"] += 1
                    continue
                swapped = type(chain)(chain.dispatch, cids=chain.cids, hop_id=hop)
                out += self._send_toward(face, frame_encapsulate(swapped, body))
            self.pit.remove(entry.name)
            return out

        try:
            data = decode_frame_body(chain, body, cid_table=self.cid_table)
        except IcnlError as exc:
            self.drops[type(exc).__name__] += 1
            return []
        return self._forward_or_deliver_by_name(data, body, chain, now_us)

    def _on_plain_data(self, data: NdnData, datagram: bytes,
                       from_node: int, now_us: int) -> list:
        return self._forward_or_deliver_by_name(data, datagram, None, now_us)

    def _forward_or_deliver_by_name(self, data: NdnData, payload: bytes,
                                    chain, now_us: int) -> list:
        entry = self.pit.match_for_data(data.name)
        if entry is None:
            self.drops["NoPitMatch"] += 1
            return []
        out = []
        if entry.inbound:
            if chain is not None:
                datagram = frame_encapsulate(chain, payload)
            else:
                datagram = payload
            for face in entry.inbound:
                out += self._send_toward(face, datagram)
        else:
            self._deliver(data)
        self.pit.remove(entry.name)
        return out

    def _deliver(self, data: NdnData) -> None:
        self.responses_received += 1
        self.delivered.append((data.content, data.name))

    def _on_timer(self, event: TimerExpiry, now_us: int) -> list:
        if event.kind == "pit":
            entry = self.pit.entries.get(event.key)
            if entry is not None and entry.expiry <= now_us:
                del self.pit.entries[event.key]
        elif event.kind == "reassembly":
            self.reassembly.purge(now_us / 1e6)
        return []


def step(node: Node, event, now_us: int = 0) -> list:
    """Feed one event to a node and return the commands it emits."""
    return node.handle(event, now_us)


@dataclass
class NodeMetrics:
    role: str
    frames_tx: int
    bytes_tx: int
    bytes_rx: int
    prr: float
    airtime_us: int
    frames_rx: int = 0
    bytes_addressed: int = 0

    def line(self) -> str:
        return (f"role={self.role} frames_tx={self.frames_tx} "
                f"bytes_tx={self.bytes_tx} bytes_rx={self.bytes_rx} "
                f"prr={self.prr:.6f} airtime_us={self.airtime_us}")


@dataclass
class Metrics:
    nodes: list[NodeMetrics]
    requests: int
    responses: int
    name_mismatches: int
    drops: dict

    def lines(self) -> list[str]:
        return [n.line() for n in self.nodes]

    def node(self, role: str) -> NodeMetrics:
        for n in self.nodes:
            if n.role == role:
                return n
        raise KeyError(role)

    @property
    def consumer_prr(self) -> float:
        return self.node("consumer").prr

    def bytes_per_handshake(self, role: str) -> float:
        return self.node(role).bytes_tx / self.requests


class Simulator:
    """Virtual-time event loop over a line of nodes."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        cid_table = config.cid_table
        if cid_table is None and config.stack is StackMode.ICNLOWPAN:
            cid_table = default_cid_table()
        roles = ([Role.CONSUMER] + [Role.FORWARDER] * config.hops + [Role.PRODUCER])
        self.nodes = [
            Node(i, role, config, random.Random(config.seed * 100003 + i), cid_table)
            for i, role in enumerate(roles)
        ]
        self.loss_rng = random.Random(config.seed ^ 0x5EED)
        self.interferer = (InterfererSchedule(config.interferer, config.seed)
                           if config.interferer else None)
        self.frames_lost = 0
        self._queue: list = []
        self._seq = 0

    def _push(self, t_us: int, node_idx: int, event) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (t_us, self._seq, node_idx, event))

    def _transmit(self, src: Node, cmd: SendFrame, now_us: int) -> None:
        if not 0 <= cmd.dst < len(self.nodes):
            raise ConfigError(f"no node {cmd.dst}")
        dst = self.nodes[cmd.dst]
        frame_len = cmd.frame.total_len
        air = airtime_us(frame_len)
        src.frames_tx += 1
        src.bytes_tx += frame_len
        src.airtime_us += air
        dst.frames_addressed += 1
        dst.bytes_addressed += frame_len
        lost = collision_check((now_us, now_us + air), self.interferer,
                               self.config.base_loss, self.loss_rng)
        if lost:
            self.frames_lost += 1
            return
        dst.frames_rx += 1
        dst.bytes_rx += frame_len
        self._push(now_us + air, dst.index, FrameArrival(cmd.frame.serialize(), src.index))

    def run(self) -> Metrics:
        interval_us = int(self.config.request_interval_ms * 1000)
        for i in range(self.config.requests):
            self._push(i * interval_us, 0, AppRequest(seq=i))
        while self._queue:
            now_us, _, node_idx, event = heapq.heappop(self._queue)
            node = self.nodes[node_idx]
            for cmd in node.handle(event, now_us):
                if isinstance(cmd, SendFrame):
                    self._transmit(node, cmd, now_us)
                elif isinstance(cmd, StartTimer):
                    self._push(now_us + cmd.delay_us, node_idx, cmd.event)
                else:
                    raise ConfigError(f"unknown command {cmd!r}")
            if self.config.check_invariants:
                for n in self.nodes:
                    n.pit.assert_unique_outbound()
        return self._metrics()

    def _metrics(self) -> Metrics:
        consumer, producer = self.nodes[0], self.nodes[-1]
        emitted = producer.emitted
        mismatches = sum(
            1 for content, name in consumer.delivered
            if emitted.get(content) != name
        )
        out = []
        for i, node in enumerate(self.nodes):
            if node.role is Role.CONSUMER:
                label = "consumer"
                prr = node.responses_received / max(1, node.interests_sent)
            elif node.role is Role.PRODUCER:
                label = "producer"
                prr = node.interests_received / max(1, consumer.interests_sent)
            else:
                label = f"forwarder{i}"
                prr = (node.frames_rx / node.frames_addressed
                       if node.frames_addressed else 1.0)
            out.append(NodeMetrics(
                role=label, frames_tx=node.frames_tx, bytes_tx=node.bytes_tx,
                bytes_rx=node.bytes_rx, prr=prr, airtime_us=node.airtime_us,
                frames_rx=node.frames_rx, bytes_addressed=node.bytes_addressed,
            ))
        drops = Counter()
        for node in self.nodes:
            drops.update(node.drops)
        return Metrics(nodes=out, requests=consumer.interests_sent,
                       responses=consumer.responses_received,
                       name_mismatches=mismatches, drops=dict(drops))


def run_handshakes(hops: int, n_requests: int, name_scheme: str,
                   stack_mode: StackMode, seed: int = DEFAULT_SEED,
                   **overrides) -> Metrics:
    """Run one line-topology experiment and return its metrics."""
    config = SimConfig(hops=hops, requests=n_requests, name_scheme=name_scheme,
                       stack=stack_mode, seed=seed, **overrides)
    return Simulator(config).run()
