"""Context tables, pending-table hop ids, and multi-node hand harnesses."""

import random

import pytest

from icnlowpan.errors import (
    ConfigError,
    HopIdSpaceExhausted,
    NoPitMatch,
    UnknownCid,
    UnknownHopId,
)
from icnlowpan.ndn import NdnName
from icnlowpan.stateful import (
    CidTable,
    Pit,
    cid_compress,
    cid_decompress,
    data_inbound_swap,
    data_outbound,
    interest_inbound,
    interest_outbound,
)

SHORT = NdnName.from_uri("/org/example/temp/7")
LONG = NdnName.from_uri("/org/example/building/1/floor/4/room/481/temp/1")


def table_with(*entries) -> CidTable:
    table = CidTable()
    for cid, uri in entries:
        table.add(cid, NdnName.from_uri(uri))
    return table


def test_short_name_elides_org_prefix():
    table = table_with((0, "/org"))
    cids, residual = cid_compress(SHORT, table)
    assert cids == [0]
    assert residual == NdnName.from_uri("/example/temp/7")
    assert cid_decompress(cids, residual, table) == SHORT


def test_long_name_leaves_two_components():
    table = table_with((1, "/org/example/building/1/floor/4/room/481"))
    cids, residual = cid_compress(LONG, table)
    assert cids == [1]
    assert residual == NdnName.from_uri("/temp/1")
    assert residual.component_count() == 2
    assert cid_decompress(cids, residual, table) == LONG


def test_no_match_returns_name_unchanged():
    table = table_with((0, "/org"))
    cids, residual = cid_compress(NdnName.from_uri("/net/x"), table)
    assert cids == [] and residual == NdnName.from_uri("/net/x")


def test_longest_prefix_wins():
    table = table_with((0, "/org"), (1, "/org/example/building/1/floor/4/room/481"))
    cids, residual = cid_compress(LONG, table)
    assert cids == [1]


def test_chained_contexts_concatenate_in_order():
    table = table_with((0, "/org"), (1, "/example"))
    name = NdnName.from_uri("/org/example/temp")
    cids, residual = cid_compress(name, table)
    assert cids == [0, 1] and residual == NdnName.from_uri("/temp")
    assert cid_decompress(cids, residual, table) == name


def test_unknown_cid_raises():
    table = table_with((0, "/org"))
    with pytest.raises(UnknownCid):
        cid_decompress([0x7F], NdnName(()), table)


def test_table_rejects_non_injective_entries():
    table = table_with((0, "/org"))
    with pytest.raises(ConfigError):
        table.add(0, NdnName.from_uri("/other"))
    with pytest.raises(ConfigError):
        table.add(5, NdnName.from_uri("/org"))
    with pytest.raises(ConfigError):
        table.add(200, NdnName.from_uri("/range"))


def test_cid_round_trip_random_tables():
    rng = random.Random(21)
    for _ in range(200):
        table = CidTable()
        prefixes = []
        for cid in range(rng.randint(0, 6)):
            prefix = NdnName(tuple(rng.randbytes(rng.randint(1, 6))
                                   for _ in range(rng.randint(1, 3))))
            try:
                table.add(cid, prefix)
                prefixes.append(prefix)
            except ConfigError:
                pass  # duplicate prefix draw
        base = rng.choice(prefixes) if prefixes and rng.random() < 0.5 else NdnName(())
        name = base + NdnName(tuple(rng.randbytes(rng.randint(1, 8))
                                    for _ in range(rng.randint(0, 4))))
        cids, residual = cid_compress(name, table)
        assert cid_decompress(cids, residual, table) == name


# --- hop ids ---

def fresh_pit(seed=1) -> Pit:
    return Pit(rng=random.Random(seed))


def test_outbound_ids_unique_over_full_space():
    pit = fresh_pit()
    seen = set()
    for i in range(255):
        name = NdnName((str(i).encode(),))
        pit.upsert(name, expiry=1000)
        hop = interest_outbound(pit, name)
        assert 1 <= hop <= 255 and hop not in seen
        seen.add(hop)
    assert len(seen) == 255


def test_id_space_exhaustion():
    pit = fresh_pit()
    for i in range(255):
        name = NdnName((str(i).encode(),))
        pit.upsert(name, expiry=1000)
        interest_outbound(pit, name)
    name = NdnName((b"straw",))
    pit.upsert(name, expiry=1000)
    with pytest.raises(HopIdSpaceExhausted):
        interest_outbound(pit, name)


def test_expiry_frees_ids_for_reuse():
    pit = fresh_pit(seed=3)
    live = set()
    for i in range(255):
        name = NdnName((str(i).encode(),))
        pit.upsert(name, expiry=1000)
        live.add(interest_outbound(pit, name))
    pit.expire(now=2000)
    assert pit.live_outbound_ids() == set()
    # the freed space admits a fresh allocation round; sets stay disjoint in time
    for i in range(255):
        name = NdnName((f"r{i}".encode(),))
        pit.upsert(name, expiry=3000)
        interest_outbound(pit, name)
        pit.assert_unique_outbound()


def test_retransmission_reuses_live_id():
    pit = fresh_pit()
    name = NdnName((b"x",))
    pit.upsert(name, expiry=1000)
    assert interest_outbound(pit, name) == interest_outbound(pit, name)


def test_outbound_without_entry_raises():
    with pytest.raises(NoPitMatch):
        interest_outbound(fresh_pit(), NdnName((b"nope",)))


def test_bounded_pit_rejects_overflow():
    from icnlowpan.errors import PitFull

    pit = Pit(max_entries=2, rng=random.Random(1))
    pit.upsert(NdnName((b"a",)), expiry=100)
    pit.upsert(NdnName((b"b",)), expiry=100)
    with pytest.raises(PitFull):
        pit.upsert(NdnName((b"c",)), expiry=100)
    # refreshing an existing entry is not an insertion
    pit.upsert(NdnName((b"a",)), expiry=200)


def test_duplicate_interest_same_hop_idempotent():
    pit = fresh_pit()
    name = NdnName((b"x",))
    interest_inbound(pit, 9, name, face="n1", expiry=100)
    interest_inbound(pit, 9, name, face="n1", expiry=200)
    entry = pit.get(name)
    assert entry.inbound == {"n1": 9} and entry.expiry == 200


def test_data_outbound_suffix_cases():
    pit = fresh_pit()
    request = NdnName.from_uri("/a/b")
    interest_inbound(pit, 7, request, face="n1", expiry=100)
    hop, suffix = data_outbound(pit, request)
    assert hop == 7 and suffix is None
    hop, suffix = data_outbound(pit, NdnName.from_uri("/a/b/v1"))
    assert hop == 7 and suffix == NdnName.from_uri("/v1")
    with pytest.raises(NoPitMatch):
        data_outbound(pit, NdnName.from_uri("/z"))


def test_stale_hop_id_rejected():
    pit = fresh_pit()
    name = NdnName((b"x",))
    pit.upsert(name, expiry=100)
    hop = interest_outbound(pit, name)
    pit.expire(now=200)
    with pytest.raises(UnknownHopId):
        data_inbound_swap(pit, hop)


def test_three_node_chain_collects_and_swaps_state():
    # consumer -> forwarder -> producer, then the response walks back
    name = NdnName.from_uri("/org/example/temp/1")
    consumer, forwarder, producer = fresh_pit(10), fresh_pit(11), fresh_pit(12)

    consumer.upsert(name, expiry=100)
    hop_a = interest_outbound(consumer, name)

    interest_inbound(forwarder, hop_a, name, face="consumer", expiry=100)
    hop_b = interest_outbound(forwarder, name)
    assert hop_b in forwarder.live_outbound_ids()

    interest_inbound(producer, hop_b, name, face="forwarder", expiry=100)
    hop_back, suffix = data_outbound(producer, name)
    assert hop_back == hop_b and suffix is None

    entry, fanout = data_inbound_swap(forwarder, hop_back)
    assert entry.name == name and fanout == [("consumer", hop_a)]

    entry, fanout = data_inbound_swap(consumer, hop_a)
    assert fanout == [] and entry.name == name  # chain ends, name restored here


def test_single_hop_degenerate_chain():
    name = NdnName.from_uri("/a")
    consumer, producer = fresh_pit(1), fresh_pit(2)
    consumer.upsert(name, expiry=100)
    hop = interest_outbound(consumer, name)
    interest_inbound(producer, hop, name, face="consumer", expiry=100)
    hop_back, _ = data_outbound(producer, name)
    entry, fanout = data_inbound_swap(consumer, hop_back)
    assert fanout == [] and entry.name == name


def test_colliding_inbound_ids_from_different_neighbors():
    # two consumers picked the same hop id for different names
    forwarder = fresh_pit(7)
    name_x, name_y = NdnName((b"x",)), NdnName((b"y",))
    interest_inbound(forwarder, 5, name_x, face="consumer-a", expiry=100)
    interest_inbound(forwarder, 5, name_y, face="consumer-b", expiry=100)
    hop_x = interest_outbound(forwarder, name_x)
    hop_y = interest_outbound(forwarder, name_y)
    assert hop_x != hop_y
    entry, fanout = data_inbound_swap(forwarder, hop_x)
    assert fanout == [("consumer-a", 5)] and entry.name == name_x
    entry, fanout = data_inbound_swap(forwarder, hop_y)
    assert fanout == [("consumer-b", 5)] and entry.name == name_y


def test_aggregated_interest_fans_out_to_both_faces():
    forwarder = fresh_pit(8)
    name = NdnName((b"shared",))
    interest_inbound(forwarder, 5, name, face="consumer-a", expiry=100)
    interest_inbound(forwarder, 6, name, face="consumer-b", expiry=100)
    hop = interest_outbound(forwarder, name)
    entry, fanout = data_inbound_swap(forwarder, hop)
    assert dict(fanout) == {"consumer-a": 5, "consumer-b": 6}


def test_config_file_parsing(tmp_path):
    path = tmp_path / "cids.conf"
    path.write_text("# comment\n\ncid 0 /org\ncid 0x10 /org/example\n")
    table = CidTable.from_file(path)
    assert len(table) == 2
    assert table.prefix_for(16) == NdnName.from_uri("/org/example")
    bad = tmp_path / "bad.conf"
    bad.write_text("cid zero /org\n")
    with pytest.raises(ConfigError):
        CidTable.from_file(bad)
