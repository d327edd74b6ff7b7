#!/usr/bin/env python3
"""Regenerate the bundled URI-path corpus and its context table.

The corpus imitates sitemap-style web paths: an authority component
followed by 2..5 path segments, every component at most 15 bytes. A fixed
seed keeps the output reproducible; the context table maps one id per
authority so the authority prefix can be elided.

Run from the repository root:  python scripts/gen_corpus.py
"""

import random
from pathlib import Path

SEED = 20180451
N_NAMES = 10_000

ADJ = ["acme", "north", "blue", "open", "metro", "civic", "delta", "prime",
       "solid", "rapid", "clear", "union", "nova", "alpine", "coast", "urban"]
NOUN = ["sense", "grid", "works", "labs", "press", "mart", "hub", "wire",
        "field", "forge", "data", "park", "media", "craft"]
TLD = ["org", "com", "net", "io", "example"]

SEGMENTS = ["products", "sensors", "articles", "catalog", "devices", "news",
            "building", "floor", "room", "temp", "humidity", "status", "api",
            "v1", "v2", "meta", "docs", "archive", "tags", "users", "items",
            "readings", "zones", "east", "west", "public", "energy", "light",
            "door", "window", "press", "blog", "search", "list", "a", "b",
            "de", "en", "campus", "lab", "unit", "report", "config"]


def make_authorities(rng):
    """Distinct authorities, each below 16 bytes."""
    out = []
    seen = set()
    while len(out) < 48:
        name = f"{rng.choice(ADJ)}-{rng.choice(NOUN)}.{rng.choice(TLD)}"
        if len(name) <= 15 and name not in seen:
            seen.add(name)
            out.append(name)
    return out


def make_path(rng):
    depth = rng.choices([2, 3, 4, 5], weights=[30, 40, 20, 10])[0]
    segs = []
    for _ in range(depth):
        kind = rng.random()
        if kind < 0.62:
            segs.append(rng.choice(SEGMENTS))
        elif kind < 0.90:
            segs.append(str(rng.randrange(0, 10_000)))
        else:  # slug-style identifier
            n = rng.randrange(4, 13)
            segs.append("".join(rng.choice("abcdefghijklmnopqrstuvwxyz0123456789")
                                for _ in range(n)))
    return segs


def main():
    rng = random.Random(SEED)
    authorities = make_authorities(rng)
    data_dir = Path(__file__).resolve().parent.parent / "src" / "icnlowpan" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    lines = []
    for _ in range(N_NAMES):
        auth = rng.choice(authorities)
        lines.append("/" + "/".join([auth] + make_path(rng)))
    (data_dir / "corpus.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    cid_lines = ["# one context id per corpus authority"]
    for i, auth in enumerate(sorted(authorities)):
        cid_lines.append(f"cid {i} /{auth}")
    (data_dir / "corpus-cids.conf").write_text("\n".join(cid_lines) + "\n",
                                               encoding="utf-8")
    print(f"wrote {N_NAMES} names over {len(authorities)} authorities to {data_dir}")


if __name__ == "__main__":
    main()
