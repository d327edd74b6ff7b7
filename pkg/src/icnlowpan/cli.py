"""Command-line surface.

Subcommands: sizes, ratio, compress, decompress, frag, simulate. Every
command is deterministic given its flags, the seed, and the input files,
and echoes the configuration it ran with. Exit codes: 0 ok, 1 runtime
error, 2 usage error (including malformed hex).
"""

from __future__ import annotations

import argparse
import sys

from . import corpus as corpus_mod
from . import ndn, report, sim
from .convergence import data_to_frame, decode_frame_body, interest_to_frame
from .errors import IcnlError
from .frame import FragHeader, LowpanFrame, PHY_MTU, fragment, parse_frame, reassemble
from .ndn import NdnName
from .stateful import CidTable
from .stateless import CodecOptions, plan_data_name, plan_name

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _read_hex(arg: str) -> bytes:
    text = sys.stdin.read() if arg == "-" else arg
    try:
        return bytes.fromhex("".join(text.split()))
    except ValueError as exc:
        raise _Usage(f"malformed hex input: {exc}") from exc


class _Usage(Exception):
    pass


def _load_cid_table(path: str | None, default=None) -> CidTable | None:
    if path is None:
        return default() if default else None
    return CidTable.from_file(path)


def _scheme_name(scheme: str) -> NdnName:
    # the study name carries one reading id on top of the scheme base
    return sim.base_name_for_scheme(scheme) + NdnName((b"1",))


def _echo(args: argparse.Namespace, keys: list[str]) -> str:
    parts = [f"command={args.command}"]
    for key in keys:
        parts.append(f"{key}={getattr(args, key)}")
    return "# config: " + " ".join(parts)


# --- sizes ---

def cmd_sizes(args) -> int:
    table = _load_cid_table(args.cid_config, default=sim.default_cid_table)
    name = _scheme_name(args.name)
    rep = report.size_report(name, table)
    print(_echo(args, ["name", "cid_config"]))
    print(f"# name: {name.to_uri()} ({name.component_count()} components)")
    rows = rep.rows()
    header = list(rows[0].keys())
    print(",".join(header))
    for row in rows:
        print(",".join(str(row[k]) for k in header))
    print(f"# interest saving {rep.interest.saving * 100:.1f}% of "
          f"{rep.interest.uncompressed} bytes, data saving "
          f"{rep.data.saving * 100:.1f}% of {rep.data.uncompressed} bytes")
    print(f"# coap request reference {report.COAP_REQUEST_BYTES} bytes "
          f"(literature value, breakdown {report.COAP_REQUEST_BREAKDOWN})")
    if args.out:
        report.write_rows(args.out, rows)
        fig = report.render_size_figure(args.out, rep)
        print(f"# wrote {args.out} and {fig}")
    return 0


# --- ratio ---

def cmd_ratio(args) -> int:
    names = corpus_mod.load_corpus(args.corpus)
    if args.cid_config:
        table = CidTable.from_file(args.cid_config)
    else:
        table = corpus_mod.load_bundled_cid_table() if args.corpus is None else None
    rep = corpus_mod.corpus_ratios(names, table)
    print(_echo(args, ["corpus", "cid_config"]))
    print(f"# names={rep.count} fallbacks={rep.fallbacks}")
    print("pass,mean_pct,median_pct")
    print(f"cid-only,{rep.mean_cid_only * 100:.2f},{rep.median_cid_only * 100:.2f}")
    print(f"cid+stateless,{rep.mean_cid_stateless * 100:.2f},"
          f"{rep.median_cid_stateless * 100:.2f}")
    print("bin_low_pct,cid_only,cid_stateless")
    hist1 = rep.histogram("cid_only")
    hist2 = rep.histogram("cid_stateless")
    for (low, c1), (_, c2) in zip(hist1, hist2):
        print(f"{low * 100:.0f},{c1},{c2}")
    if args.out:
        rows = [{"pass": "cid-only",
                 "mean_pct": f"{rep.mean_cid_only * 100:.2f}",
                 "median_pct": f"{rep.median_cid_only * 100:.2f}"},
                {"pass": "cid+stateless",
                 "mean_pct": f"{rep.mean_cid_stateless * 100:.2f}",
                 "median_pct": f"{rep.median_cid_stateless * 100:.2f}"}]
        report.write_rows(args.out, rows)
        fig = report.render_ratio_figure(args.out, rep)
        print(f"# wrote {args.out} and {fig}")
    return 0


# --- compress / decompress ---

def cmd_compress(args) -> int:
    raw = _read_hex(args.hex)
    table = _load_cid_table(args.cid_config)
    request_name = NdnName.from_uri(args.request_name) if args.request_name else None
    if args.kind == "interest":
        msg = ndn.decode_interest(raw)
        wire = interest_to_frame(msg, cid_table=table, hop_id=args.hop_id,
                                 compress=not args.no_compress)
        plan = plan_name(msg.name, table)
    else:
        msg = ndn.decode_data(raw)
        wire = data_to_frame(msg, cid_table=table, hop_id=args.hop_id,
                             request_name=request_name,
                             compress=not args.no_compress)
        plan = plan_data_name(msg.name, CodecOptions(
            cid_table=table, hop_id=args.hop_id, request_name=request_name))
    print(wire.hex())
    print(f"# {args.kind} {len(raw)} -> {len(wire)} bytes "
          f"fallback={int(plan.fallback)} cids={list(plan.cids)}", file=sys.stderr)
    return 0


def cmd_decompress(args) -> int:
    wire = _read_hex(args.hex)
    table = _load_cid_table(args.cid_config)
    request_name = NdnName.from_uri(args.request_name) if args.request_name else None
    chain, body = parse_frame(wire)
    if args.kind and chain.dispatch.is_interest != (args.kind == "interest"):
        raise IcnlError(f"frame holds a different message kind than --kind={args.kind}")
    msg = decode_frame_body(chain, body, cid_table=table, request_name=request_name)
    out = (ndn.encode_interest(msg) if isinstance(msg, ndn.NdnInterest)
           else ndn.encode_data(msg))
    print(out.hex())
    print(f"# dispatch=0x{int(chain.dispatch):02x} cids={list(chain.cids)} "
          f"hop_id={chain.hop_id} name={msg.name.to_uri()}", file=sys.stderr)
    return 0


# --- frag ---

def cmd_frag(args) -> int:
    if args.reassemble:
        text = sys.stdin.read() if args.hex in (None, "-") else args.hex
        frames = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            raw = _read_hex(line)
            if raw and FragHeader.is_fragment_dispatch(raw[0]):
                header, rest = FragHeader.parse(raw)
                frames.append(LowpanFrame(rest, header))
            else:
                frames.append(LowpanFrame(raw))
        print(reassemble(frames).hex())
        return 0
    if args.hex is None:
        raise _Usage("frag needs a hex datagram (or --reassemble)")
    datagram = _read_hex(args.hex)
    for fr in fragment(datagram, args.mtu, args.tag):
        print(fr.serialize().hex())
    print(f"# {len(datagram)} bytes, mtu={args.mtu}, tag={args.tag}", file=sys.stderr)
    return 0


# --- simulate ---

def _run_once(args, stack: sim.StackMode) -> sim.Metrics:
    interferer = sim.InterfererConfig() if args.interferer else None
    table = _load_cid_table(args.cid_config,
                            default=sim.default_cid_table
                            if stack is sim.StackMode.ICNLOWPAN else None)
    config = sim.SimConfig(
        hops=args.hops, requests=args.requests, name_scheme=args.name,
        stack=stack, seed=args.seed, request_interval_ms=args.interval_ms,
        base_loss=args.loss, interferer=interferer, cid_table=table,
        response_suffix=args.suffix,
    )
    return sim.Simulator(config).run()


def cmd_simulate(args) -> int:
    lines = [_echo(args, ["stack", "hops", "requests", "seed", "loss",
                          "interferer", "interval_ms", "name", "compare"])]
    runs: dict[str, sim.Metrics] = {}
    if args.compare:
        modes = [sim.StackMode.PLAIN_NDN, sim.StackMode.ICNLOWPAN]
    else:
        modes = [sim.StackMode.PLAIN_NDN if args.stack == "plain-ndn"
                 else sim.StackMode.ICNLOWPAN]
    for mode in modes:
        metrics = _run_once(args, mode)
        runs[mode.value] = metrics
        lines.append(f"# stack={mode.value} requests={metrics.requests} "
                     f"responses={metrics.responses} "
                     f"mismatches={metrics.name_mismatches}")
        for line in metrics.lines():
            lines.append(f"stack={mode.value} {line}")
    if args.compare:
        plain, icnl = runs["plain-ndn"], runs["icnlowpan"]
        for a, b in zip(plain.nodes, icnl.nodes):
            if a.bytes_tx:
                delta = (b.bytes_tx - a.bytes_tx) / a.bytes_tx * 100
                lines.append(f"delta role={a.role} bytes_tx={delta:+.1f}%")
        lines.append(f"delta consumer_prr={icnl.consumer_prr - plain.consumer_prr:+.6f}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        fig = report.render_sim_figure(args.out, runs)
        print(f"# wrote {args.out} and {fig}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icnlowpan",
        description="NDN link adaptation toolbox: codecs, size studies, and "
                    "a deterministic link simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sizes", help="packet size and savings report")
    p.add_argument("--name", default="long",
                   help="name scheme: short, long, or a /uri (default long)")
    p.add_argument("--cid-config", default=None, help="context table file")
    p.add_argument("--out", default=None, help="write CSV (and PNG) here")
    p.set_defaults(func=cmd_sizes)

    p = sub.add_parser("ratio", help="corpus name-compression ratio study")
    p.add_argument("--corpus", default=None,
                   help="URI corpus, one path per line (default: bundled)")
    p.add_argument("--cid-config", default=None, help="context table file")
    p.add_argument("--out", default=None, help="write CSV (and PNG) here")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("compress", help="TLV message hex -> dispatch payload hex")
    p.add_argument("--kind", choices=["interest", "data"], required=True)
    p.add_argument("--cid-config", default=None)
    p.add_argument("--hop-id", type=int, default=None)
    p.add_argument("--request-name", default=None,
                   help="pending request name for the response path")
    p.add_argument("--no-compress", action="store_true",
                   help="use the uncompressed dispatch")
    p.add_argument("hex", help="message bytes as hex, or - for stdin")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="dispatch payload hex -> TLV message hex")
    p.add_argument("--kind", choices=["interest", "data"], default=None)
    p.add_argument("--cid-config", default=None)
    p.add_argument("--request-name", default=None)
    p.add_argument("hex", help="frame bytes as hex, or - for stdin")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("frag", help="fragment a datagram / reassemble fragments")
    p.add_argument("--mtu", type=int, default=PHY_MTU)
    p.add_argument("--tag", type=int, default=0)
    p.add_argument("--reassemble", action="store_true",
                   help="read fragment hex lines and emit the datagram")
    p.add_argument("hex", nargs="?", default=None)
    p.set_defaults(func=cmd_frag)

    p = sub.add_parser("simulate", help="run the line-topology simulator")
    p.add_argument("--stack", choices=["plain-ndn", "icnlowpan"],
                   default="icnlowpan")
    p.add_argument("--name", default="long")
    p.add_argument("--cid-config", default=None)
    p.add_argument("--hops", type=int, default=1)
    p.add_argument("--requests", type=int, default=100)
    p.add_argument("--seed", type=int, default=sim.DEFAULT_SEED)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--interval-ms", type=float, default=500.0)
    p.add_argument("--interferer", action="store_true",
                   help="enable the bursty cross-traffic model")
    p.add_argument("--compare", action="store_true",
                   help="run both stacks on the same seed and print deltas")
    p.add_argument("--suffix", default="",
                   help="extra /uri the producer appends to response names")
    p.add_argument("--out", default=None, help="write metrics (and PNG) here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except IcnlError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
