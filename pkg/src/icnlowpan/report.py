"""Report rendering: size studies, delimited output, and figures.

Reports are written as comma-delimited text; when an output path is given
a PNG figure lands next to it with the same stem. CoAP numbers printed in
the size report are published reference values for the equivalent
GET exchange over compressed IPv6/UDP, not something this package
computes; they are labeled as literature values wherever they appear.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from . import ndn, stateless
from .ndn import NdnData, NdnInterest, NdnName
from .sim import Metrics
from .stateful import CidTable
from .stateless import CodecOptions

# literature reference: CoAP GET request over compressed 6LoWPAN
COAP_REQUEST_BYTES = 97
COAP_REQUEST_BREAKDOWN = {"dispatches": 3, "ipv6": 32, "udp": 6, "coap": 56}

PAGE_DISPATCH_LEN = 1
ICNL_DISPATCH_LEN = 1
HOP_ID_LEN = 1


@dataclass(frozen=True)
class MessageSizes:
    label: str
    uncompressed: int
    body: int
    overhead: int  # page switch + dispatch + chain octets

    @property
    def compressed_total(self) -> int:
        return self.body + self.overhead

    @property
    def saving(self) -> float:
        return 1.0 - self.compressed_total / self.uncompressed


@dataclass
class SizeReport:
    name: NdnName
    interest: MessageSizes
    data: MessageSizes
    interest_stateless: MessageSizes
    data_stateless: MessageSizes

    def rows(self) -> list[dict]:
        out = []
        for m in (self.interest, self.data, self.interest_stateless, self.data_stateless):
            out.append({
                "message": m.label,
                "uncompressed_bytes": m.uncompressed,
                "compressed_body_bytes": m.body,
                "dispatch_overhead_bytes": m.overhead,
                "compressed_total_bytes": m.compressed_total,
                "saving_pct": f"{m.saving * 100:.1f}",
            })
        out.append({
            "message": "coap-request (literature)",
            "uncompressed_bytes": COAP_REQUEST_BYTES,
            "compressed_body_bytes": "",
            "dispatch_overhead_bytes": "",
            "compressed_total_bytes": COAP_REQUEST_BYTES,
            "saving_pct": "",
        })
        return out


def build_messages(name: NdnName, *, lifetime_ms: int = 4000,
                   freshness_ms: int | None = 4000,
                   content: bytes = b"\x00\x00\x00\x01",
                   nonce: bytes = b"\x01\x02\x03\x04") -> tuple[NdnInterest, NdnData]:
    """The representative request/response pair used by the size study:
    the Interest carries a nonce and lifetime, the Data answers with the
    same name, a freshness period, a 4-byte reading, and empty signature
    fields."""
    interest = NdnInterest(name=name, nonce=nonce, lifetime_ms=lifetime_ms)
    data = NdnData(name=name, content=content, meta_freshness_ms=freshness_ms)
    return interest, data


def size_report(name: NdnName, cid_table: CidTable | None) -> SizeReport:
    interest, data = build_messages(name)
    unc_interest = len(ndn.encode_interest(interest))
    unc_data = len(ndn.encode_data(data))

    # full pipeline: context elision, per-hop name elision on the response
    plan = stateless.plan_name(name, cid_table)
    opts_i = CodecOptions(cid_table=cid_table, hop_id=1)
    body_i = stateless.compress_interest(interest, opts_i)
    over_i = PAGE_DISPATCH_LEN + ICNL_DISPATCH_LEN + HOP_ID_LEN + len(plan.cids)
    opts_d = CodecOptions(cid_table=cid_table, hop_id=1, request_name=name)
    body_d = stateless.compress_data(data, opts_d)
    over_d = PAGE_DISPATCH_LEN + ICNL_DISPATCH_LEN + HOP_ID_LEN

    # stateless only: no context table, no per-hop state
    body_i_sl = stateless.compress_interest(interest, CodecOptions())
    body_d_sl = stateless.compress_data(data, CodecOptions())
    over_sl = PAGE_DISPATCH_LEN + ICNL_DISPATCH_LEN

    return SizeReport(
        name=name,
        interest=MessageSizes("interest", unc_interest, len(body_i), over_i),
        data=MessageSizes("data", unc_data, len(body_d), over_d),
        interest_stateless=MessageSizes("interest-stateless", unc_interest,
                                        len(body_i_sl), over_sl),
        data_stateless=MessageSizes("data-stateless", unc_data,
                                    len(body_d_sl), over_sl),
    )


def write_rows(path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _figure_path(out_path) -> str:
    import os

    stem, _ = os.path.splitext(str(out_path))
    return stem + ".png"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_size_figure(out_path, report: SizeReport) -> str:
    plt = _pyplot()
    labels = ["interest", "data"]
    uncompressed = [report.interest.uncompressed, report.data.uncompressed]
    compressed = [report.interest.compressed_total, report.data.compressed_total]
    x = range(len(labels))
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([i - 0.2 for i in x], uncompressed, width=0.4, label="plain TLV")
    ax.bar([i + 0.2 for i in x], compressed, width=0.4, label="compressed")
    ax.axhline(COAP_REQUEST_BYTES, ls="--", lw=1, color="gray",
               label="CoAP request (literature)")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel("bytes")
    ax.set_title(f"message sizes for {report.name.to_uri()}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    target = _figure_path(out_path)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_ratio_figure(out_path, report) -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist([r * 100 for r in report.cid_only], bins=20, alpha=0.6,
            label=f"context only (mean {report.mean_cid_only * 100:.1f}%)")
    ax.hist([r * 100 for r in report.cid_stateless], bins=20, alpha=0.6,
            label=f"context + stateless (mean {report.mean_cid_stateless * 100:.1f}%)")
    ax.set_xlabel("name compression ratio [%]")
    ax.set_ylabel("names")
    ax.legend(fontsize=8)
    fig.tight_layout()
    target = _figure_path(out_path)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_sim_figure(out_path, runs: dict[str, Metrics]) -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    width = 0.8 / max(1, len(runs))
    roles = [n.role for n in next(iter(runs.values())).nodes]
    for i, (label, metrics) in enumerate(runs.items()):
        values = [n.bytes_tx / max(1, metrics.requests) for n in metrics.nodes]
        offs = [j + (i - (len(runs) - 1) / 2) * width for j in range(len(roles))]
        ax.bar(offs, values, width=width, label=label)
    ax.set_xticks(range(len(roles)))
    ax.set_xticklabels(roles, fontsize=8)
    ax.set_ylabel("bytes sent per handshake")
    ax.legend(fontsize=8)
    fig.tight_layout()
    target = _figure_path(out_path)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target
