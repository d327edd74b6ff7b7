"""Shared randomized-input helpers; every generator takes a seeded Random."""

import pathlib
import random

from icnlowpan.ndn import NdnData, NdnInterest, NdnName

VECTOR_DIR = pathlib.Path(__file__).parent / "vectors"


def load_vectors(filename: str) -> list[bytes]:
    out = []
    for line in (VECTOR_DIR / filename).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(bytes.fromhex(line))
    return out


def rand_component(rng: random.Random, lo: int = 1, hi: int = 15) -> bytes:
    return rng.randbytes(rng.randint(lo, hi))


def rand_name(rng: random.Random, max_components: int = 10,
              lo: int = 1, hi: int = 15, min_components: int = 0) -> NdnName:
    count = rng.randint(min_components, max_components)
    return NdnName(tuple(rand_component(rng, lo, hi) for _ in range(count)))


def rand_interest(rng: random.Random, name: NdnName | None = None) -> NdnInterest:
    return NdnInterest(
        name=rand_name(rng) if name is None else name,
        nonce=rng.randbytes(4) if rng.random() < 0.8 else None,
        lifetime_ms=rng.choice([4000, 4000, 1000, 120000, 0, None]),
    )


def rand_data(rng: random.Random, name: NdnName | None = None) -> NdnData:
    return NdnData(
        name=rand_name(rng) if name is None else name,
        content=rng.randbytes(rng.randint(0, 40)),
        meta_freshness_ms=rng.choice([None, 4000, 60000, 0]),
        sig_info=rng.randbytes(rng.randint(0, 8)),
        sig_value=rng.randbytes(rng.randint(0, 8)),
    )
