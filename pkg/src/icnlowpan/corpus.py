"""Name-compression ratio study over a URI corpus.

This is pure name-size accounting, independent of message framing. Each
corpus line is one URI path whose first component plays the role of the
authority. Two passes are measured per name:

  1. context only: the table prefix is swapped for its context id octets,
     the remainder stays a plain Name TLV;
  2. context plus stateless: the remainder additionally moves to the
     nibble-packed encoding when all its components fit 15 bytes, else it
     stays on the TLV path (fallback).

A ratio is 1 - compressed/uncompressed where the uncompressed size is the
plain Name TLV encoding.
"""

from __future__ import annotations

import importlib.resources
import statistics
from dataclasses import dataclass

from .errors import IcnlError
from .ndn import NdnName, encode_name
from .stateful import CidTable, cid_compress
from .stateless import compressed_name_overhead, name_is_compressible

BUNDLED_CORPUS = "corpus.txt"
BUNDLED_CID_CONFIG = "corpus-cids.conf"


class EmptyCorpus(IcnlError):
    """Corpus file holds no names."""


def bundled_path(resource: str):
    return importlib.resources.files("icnlowpan").joinpath("data").joinpath(resource)


def load_corpus(path=None) -> list[NdnName]:
    """Read one URI path per line; blank lines and # comments are skipped."""
    if path is None:
        text = bundled_path(BUNDLED_CORPUS).read_text(encoding="utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    names = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        names.append(NdnName.from_uri(line))
    if not names:
        raise EmptyCorpus("no names in corpus")
    return names


def load_bundled_cid_table() -> CidTable:
    text = bundled_path(BUNDLED_CID_CONFIG).read_text(encoding="utf-8")
    return CidTable.from_lines(text.splitlines(), origin=BUNDLED_CID_CONFIG)


def _stateless_name_size(name: NdnName) -> int:
    """Nibble-packed size, or the TLV size when the name is not packable."""
    if name_is_compressible(name):
        return sum(len(c) for c in name.components) + compressed_name_overhead(len(name))
    return len(encode_name(name))


@dataclass(frozen=True)
class NameRatios:
    uncompressed: int
    cid_only: float
    cid_stateless: float
    fallback: bool


def name_ratios(name: NdnName, table: CidTable | None) -> NameRatios:
    uncompressed = len(encode_name(name))
    cids, residual = cid_compress(name, table)
    cid_size = len(cids) + len(encode_name(residual))
    full_size = len(cids) + _stateless_name_size(residual)
    return NameRatios(
        uncompressed=uncompressed,
        cid_only=1.0 - cid_size / uncompressed,
        cid_stateless=1.0 - full_size / uncompressed,
        fallback=not name_is_compressible(residual),
    )


@dataclass
class RatioReport:
    count: int
    fallbacks: int
    cid_only: list[float]
    cid_stateless: list[float]

    @property
    def mean_cid_only(self) -> float:
        return statistics.fmean(self.cid_only)

    @property
    def mean_cid_stateless(self) -> float:
        return statistics.fmean(self.cid_stateless)

    @property
    def median_cid_only(self) -> float:
        return statistics.median(self.cid_only)

    @property
    def median_cid_stateless(self) -> float:
        return statistics.median(self.cid_stateless)

    def histogram(self, which: str = "cid_stateless", bins: int = 10) -> list[tuple[float, int]]:
        """(lower bin edge, count) pairs over [0, 1)."""
        values = getattr(self, which)
        counts = [0] * bins
        for v in values:
            idx = min(bins - 1, max(0, int(v * bins)))
            counts[idx] += 1
        return [(i / bins, counts[i]) for i in range(bins)]


def corpus_ratios(names, table: CidTable | None) -> RatioReport:
    if not names:
        raise EmptyCorpus("no names to measure")
    report = RatioReport(count=len(names), fallbacks=0, cid_only=[], cid_stateless=[])
    for name in names:
        r = name_ratios(name, table)
        report.cid_only.append(r.cid_only)
        report.cid_stateless.append(r.cid_stateless)
        report.fallbacks += r.fallback
    return report
