"""Command-line surface tying the toolkit together.

Subcommands:
  simulate   generate a two-node capture (operator.csv, vehicle.csv,
             truth.csv, config.echo) from a preset or a config file
  analyze    debounce, pair, and summarize an operator/vehicle log pair
  precision  per-pulse offset series from two logs of one shared stimulus
  probe      live two-way offset estimation over UDP (responder and/or
             requester)
  budget     additive measurement-error budget from its four components
  report     stats and box-plot data for an existing sample file

Exit codes: 0 success, 1 validation error, 2 I/O error. Errors are
printed to stderr with the stable prefix ``error:``. Every subcommand
that takes randomness seeds it from --seed; numeric results are also
written as machine-readable CSV next to the human-readable text when
--out is given.

Examples:
  m2mlat simulate --preset dyn_coref --trials 500 --seed 7 --out run1/
  m2mlat analyze --operator run1/operator.csv --vehicle run1/vehicle.csv \
      --out run1/report
  m2mlat precision --node-a a.csv --node-b b.csv
  m2mlat probe --listen 0.0.0.0:47047
  m2mlat probe --peer 192.0.2.10:47047 --count 60 --interval-ms 500
  m2mlat budget --sync-ms 0.322 --kernel-ms 0.005 --circuit-us 2 \
      --calib-angle-deg 1 --steer-rate-dps 100
"""

from __future__ import annotations

import argparse
import sys
import threading
from pathlib import Path

from . import __version__, budget, clocks, probe, report, sim, stats
from .errors import ConfigInvalid, M2MLatError
from .events import LogFormat, NodeId, Role, parse_log, with_role, write_log
from .pairing import PairingConfig, pair_events

MS_NS = 1_000_000


class _CliParser(argparse.ArgumentParser):
    """Argparse that raises instead of exiting, so run_cli owns exit codes."""

    def error(self, message):
        raise ConfigInvalid(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="m2mlat", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"m2mlat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic two-node capture")
    src = p_sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sim.PRESET_NAMES)
    src.add_argument("--config", type=Path, help="scenario config file (INI)")
    p_sim.add_argument("--trials", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--out", type=Path, required=True, help="output directory")

    p_an = sub.add_parser("analyze", help="pair two logs and summarize latency")
    p_an.add_argument("--operator", type=Path, required=True)
    p_an.add_argument("--vehicle", type=Path, required=True)
    p_an.add_argument("--format", choices=[f.value for f in LogFormat], default="csv")
    p_an.add_argument("--debounce-ms", type=float, default=500.0)
    p_an.add_argument("--min-latency-ms", type=float, default=0.0)
    p_an.add_argument("--max-window-ms", type=float, default=2000.0)
    p_an.add_argument(
        "--threshold-ms", type=float, action="append",
        help="report the fraction of samples above this (repeatable; default 1000)",
    )
    p_an.add_argument("--label", default="analysis")
    p_an.add_argument("--lenient", action="store_true", help="skip malformed lines")
    p_an.add_argument("--out", type=Path, help="output path prefix")

    p_pr = sub.add_parser("precision", help="shared-stimulus offset analysis")
    p_pr.add_argument("--node-a", type=Path, required=True)
    p_pr.add_argument("--node-b", type=Path, required=True)
    p_pr.add_argument("--format", choices=[f.value for f in LogFormat], default="csv")
    p_pr.add_argument("--out", type=Path, help="output path prefix")

    p_probe = sub.add_parser("probe", help="two-way time-transfer over UDP")
    p_probe.add_argument("--listen", metavar="HOST:PORT", help="answer requests")
    p_probe.add_argument("--peer", metavar="HOST:PORT", help="send requests")
    p_probe.add_argument("--count", type=int, default=10)
    p_probe.add_argument("--interval-ms", type=float, default=1000.0)
    p_probe.add_argument("--timeout-ms", type=float, default=1000.0)
    p_probe.add_argument("--out", type=Path, help="output path prefix")

    p_bud = sub.add_parser("budget", help="additive measurement-error budget")
    p_bud.add_argument("--sync-ms", type=float, required=True)
    p_bud.add_argument("--circuit-us", type=float, default=2.0)
    p_bud.add_argument("--kernel-ms", type=float)
    p_bud.add_argument("--sched-a", type=Path, help="per-sample ns latencies, node a")
    p_bud.add_argument("--sched-b", type=Path, help="per-sample ns latencies, node b")
    p_bud.add_argument("--calib-angle-deg", type=float, required=True)
    p_bud.add_argument("--steer-rate-dps", type=float, required=True)
    p_bud.add_argument("--out", type=Path, help="output path prefix")

    p_rep = sub.add_parser("report", help="stats and box-plot data for a sample file")
    p_rep.add_argument("--samples", type=Path, required=True,
                       help="pairing CSV (m2m_ns column) or one ns value per line")
    p_rep.add_argument("--label", default="report")
    p_rep.add_argument("--threshold-ms", type=float, action="append")
    p_rep.add_argument("--out", type=Path, help="output path prefix")

    return parser


def run_cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigInvalid as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    handler = {
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "precision": _cmd_precision,
        "probe": _cmd_probe,
        "budget": _cmd_budget,
        "report": _cmd_report,
    }[args.command]
    try:
        return handler(args)
    except M2MLatError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: io: {err}", file=sys.stderr)
        return 2


def main(argv: list[str] | None = None) -> int:
    return run_cli(sys.argv[1:] if argv is None else argv)


def _cmd_simulate(args) -> int:
    if args.preset:
        cfg = sim.preset(args.preset)
    else:
        cfg = sim.parse_config(args.config.read_text(encoding="utf-8"))
    cfg = sim.with_overrides(cfg, trials=args.trials, seed=args.seed)
    op_log, veh_log, truth = sim.simulate(cfg)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "operator.csv").write_text(write_log(op_log), encoding="utf-8")
    (out / "vehicle.csv").write_text(write_log(veh_log), encoding="utf-8")
    (out / "truth.csv").write_text(truth.to_csv(), encoding="utf-8")
    (out / "config.echo").write_text(sim.render_config(cfg), encoding="utf-8")
    print(
        f"simulated {cfg.trials} trials (label={cfg.label or 'custom'}, "
        f"seed={cfg.seed}, config={sim.config_hash(cfg)}) -> {out}"
    )
    return 0


def _read_log(path: Path, fmt: LogFormat, role: Role, lenient: bool = False):
    raw = path.read_bytes()
    node = NodeId(path.stem or role.value, role) if fmt is LogFormat.KERNEL_RING else None
    log = parse_log(raw, fmt, node=node, lenient=lenient)
    return with_role(log, role), raw


def _cmd_analyze(args) -> int:
    fmt = LogFormat(args.format)
    op_log, op_raw = _read_log(args.operator, fmt, Role.OPERATOR, args.lenient)
    veh_log, veh_raw = _read_log(args.vehicle, fmt, Role.VEHICLE, args.lenient)
    cfg = PairingConfig(
        debounce_ns=int(round(args.debounce_ms * MS_NS)),
        min_latency_ns=int(round(args.min_latency_ms * MS_NS)),
        max_window_ns=int(round(args.max_window_ms * MS_NS)),
    )
    pairing = pair_events(op_log, veh_log, cfg)
    if not pairing.samples:
        print("error: EmptyLog: no event pairs inside the matching window",
              file=sys.stderr)
        return 1
    thresholds = [int(round(t * MS_NS)) for t in (args.threshold_ms or [1000.0])]
    rep = report.build_report(
        args.label,
        pairing.m2m_values,
        report.make_provenance(None, report.input_digest(op_raw, veh_raw)),
        thresholds,
        pairing,
    )
    text = report.render_text(rep)
    print(text, end="")
    if args.out:
        _write_prefixed(args.out, {
            ".report.txt": text,
            ".pairs.csv": pairing.to_csv(),
            ".meta.txt": pairing.meta_text(),
            ".stats.csv": stats.stats_csv(rep.stats),
            ".boxplot.csv": stats.boxplot_csv(rep.boxplot),
        })
    return 0


def _cmd_precision(args) -> int:
    fmt = LogFormat(args.format)
    log_a, _ = _read_log(args.node_a, fmt, Role.OPERATOR)
    log_b, _ = _read_log(args.node_b, fmt, Role.VEHICLE)
    series = clocks.precision_analysis(log_a, log_b)
    for name, s in (("signed", series.stats_signed), ("abs", series.stats_abs)):
        print(
            f"offset_{name}: n={s.n} min_ms={s.min_ns / 1e6:.6f} "
            f"max_ms={s.max_ns / 1e6:.6f} mean_ms={s.mean_ns / 1e6:.6f} "
            f"std_ms={s.std_ns / 1e6:.6f}"
        )
    if args.out:
        _write_prefixed(args.out, {
            ".offsets.csv": series.to_csv(),
            ".stats_signed.csv": stats.stats_csv(series.stats_signed),
            ".stats_abs.csv": stats.stats_csv(series.stats_abs),
        })
    return 0


def _parse_hostport(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not host:
        raise ConfigInvalid(f"expected HOST:PORT, got {value!r}")
    try:
        return host, int(port)
    except ValueError:
        raise ConfigInvalid(f"bad port in {value!r}")


def _cmd_probe(args) -> int:
    if not args.listen and not args.peer:
        raise ConfigInvalid("probe needs --listen and/or --peer")
    responder_thread = None
    responder_sock = None
    stop = threading.Event()
    if args.listen:
        host, port = _parse_hostport(args.listen)
        responder_sock = probe.open_socket(host, port)
        bound = responder_sock.getsockname()
        print(f"responder listening on {bound[0]}:{bound[1]}")
        if args.peer:
            responder_thread = threading.Thread(
                target=probe.run_responder, args=(responder_sock,),
                kwargs={"stop": stop}, daemon=True,
            )
            responder_thread.start()
        else:
            try:
                probe.run_responder(responder_sock)
            except KeyboardInterrupt:
                pass
            finally:
                responder_sock.close()
            return 0
    try:
        peer = _parse_hostport(args.peer)
        result = probe.run_requester(
            peer, args.count, args.interval_ms, timeout_ms=args.timeout_ms,
            on_sample=lambda s: print(
                f"seq={s.seq} offset_ms={s.offset_ns / 1e6:.6f} "
                f"rtt_ms={s.rtt_ns / 1e6:.6f}"
            ),
        )
    finally:
        stop.set()
        if responder_thread is not None:
            responder_thread.join(timeout=1.0)
        if responder_sock is not None:
            responder_sock.close()
    print(
        f"exchanges={len(result.samples)} lost={result.lost} "
        f"negative_rtt={len(result.negative_rtt)}"
    )
    if result.samples:
        s = stats.summarize(int(round(o)) for o in result.offsets_ns)
        print(
            f"offset: mean_ms={s.mean_ns / 1e6:.6f} median_ms={s.median_ns / 1e6:.6f} "
            f"min_ms={s.min_ns / 1e6:.6f} max_ms={s.max_ns / 1e6:.6f}"
        )
    if args.out:
        _write_prefixed(args.out, {".exchanges.csv": result.to_csv()})
    return 0


def _read_sched_samples(path: Path) -> list[int]:
    values = []
    for line in path.read_text(encoding="utf-8").split("\n"):
        cell = line.strip()
        if not cell or cell == "latency_ns":
            continue
        values.append(int(cell))
    return values


def _cmd_budget(args) -> int:
    if args.kernel_ms is not None:
        kernel_ns = int(round(args.kernel_ms * MS_NS))
    elif args.sched_a and args.sched_b:
        a = clocks.SchedulingStats.from_samples(
            NodeId("node_a", Role.OPERATOR), _read_sched_samples(args.sched_a)
        )
        b = clocks.SchedulingStats.from_samples(
            NodeId("node_b", Role.VEHICLE), _read_sched_samples(args.sched_b)
        )
        kernel_ns = clocks.kernel_asymmetry(a, b)
    else:
        raise ConfigInvalid("budget needs --kernel-ms or both --sched-a and --sched-b")
    calib_ns = budget.calib_error(
        budget.CalibModel(args.calib_angle_deg, args.steer_rate_dps)
    )
    result = budget.total_error(
        int(round(args.sync_ms * MS_NS)),
        int(round(args.circuit_us * 1_000)),
        kernel_ns,
        calib_ns,
    )
    print(result.to_text(), end="")
    if args.out:
        _write_prefixed(args.out, {".budget.csv": result.to_csv()})
    return 0


def _read_samples_file(path: Path) -> list[int]:
    """m2m_ns column of a pairing CSV, or bare one-value-per-line ns."""
    lines = [ln for ln in path.read_text(encoding="utf-8").split("\n") if ln.strip()]
    if not lines:
        raise ConfigInvalid(f"{path} contains no samples")
    header = [c.strip() for c in lines[0].split(",")]
    if "m2m_ns" in header:
        idx = header.index("m2m_ns")
        return [int(ln.split(",")[idx]) for ln in lines[1:]]
    return [int(ln.strip()) for ln in lines]


def _cmd_report(args) -> int:
    raw = args.samples.read_bytes()
    values = _read_samples_file(args.samples)
    thresholds = [int(round(t * MS_NS)) for t in (args.threshold_ms or [1000.0])]
    rep = report.build_report(
        args.label,
        values,
        report.make_provenance(None, report.input_digest(raw)),
        thresholds,
    )
    text = report.render_text(rep)
    print(text, end="")
    if args.out:
        _write_prefixed(args.out, {
            ".report.txt": text,
            ".stats.csv": stats.stats_csv(rep.stats),
            ".boxplot.csv": stats.boxplot_csv(rep.boxplot),
        })
    return 0


def _write_prefixed(prefix: Path, files: dict[str, str]) -> None:
    prefix.parent.mkdir(parents=True, exist_ok=True)
    for suffix, content in files.items():
        Path(str(prefix) + suffix).write_text(content, encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
