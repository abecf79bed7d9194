"""Command-line entry point: ``aquasim <command> ...``.

Exit status is 0 on success, 1 for usage or validation errors and 2 for
runtime failures (simulation, I/O, unreachable daemon).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench, cas
from .ingest import BadHeaderError, corpus_scale, generate_synthetic
from .stats import InsufficientDataError

log = logging.getLogger("aquasim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, suppress: bool = False) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="base RNG seed")
    p.add_argument("--out-dir", default=default, help="output directory (default: out)")
    p.add_argument("--config", default=default, help="JSON file overriding scenario defaults")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runs", type=int, help="repeat count per (nodes, hashes) point")
    p.add_argument("--payload-bytes", type=int, help="meter file size in bytes")
    p.add_argument("--arrival-rate", type=float,
                   help="open-loop pacing in tx/s (default: all txs queued at start)")
    p.add_argument("--backend", choices=("embedded", "remote"), default="embedded",
                   help="where ANCHOR payloads are added (remote uses $AQUA_IPFS_API)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aquasim", description=__doc__.splitlines()[0])
    _common(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen-data", help="write synthetic meter CSV files")
    _common(p, suppress=True)
    p.add_argument("--files", type=int, default=90)
    p.add_argument("--records", type=int, default=1000)

    p = sub.add_parser("run", help="run one scenario (A-D)")
    _common(p, suppress=True)
    p.add_argument("scenario", help="A, B, C, D or a full scenario name")
    _scenario_flags(p)

    p = sub.add_parser("bench", help="run every scenario and the t-test battery")
    _common(p, suppress=True)
    p.add_argument("target", choices=("all",))
    _scenario_flags(p)

    p = sub.add_parser("ttest", help="Welch t-test between two metrics CSV files")
    _common(p, suppress=True)
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    p.add_argument("--metric", required=True)
    p.add_argument("--pooled", action="store_true", help="Student's equal-variance test")

    p = sub.add_parser("ipfs-check", help="round-trip a blob through a Kubo-compatible daemon")
    _common(p, suppress=True)
    p.add_argument("--endpoint", help="daemon API URL (default: $AQUA_IPFS_API)")
    p.add_argument("--size", type=int, default=4096)
    return parser


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _flag_overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    for flag, key in (("runs", "runs"), ("payload_bytes", "payload_bytes"),
                      ("arrival_rate", "arrival_rate")):
        value = getattr(args, flag, None)
        if value is not None:
            out[key] = value
    return out


def _use_backend(args) -> None:
    if getattr(args, "backend", "embedded") == "remote":
        bench.set_cid_backend(cas.default_endpoint())


def cmd_gen_data(args) -> int:
    seed = args.seed if args.seed is not None else 0
    out = Path(args.out_dir or "out") / "data"
    out.mkdir(parents=True, exist_ok=True)
    files = generate_synthetic(args.files, args.records, seed)
    for f in files:
        (out / f"{f.file_id}.csv").write_bytes(f.encoded)
    log.info("scale vs published corpus: %.3g", corpus_scale(files))
    print(f"wrote {len(files)} files to {out}")
    return 0


def cmd_run(args) -> int:
    name = bench.SCENARIO_LETTERS.get(args.scenario.upper()) or bench.ScenarioName(args.scenario)
    config = _load_config(args.config)
    data = {k: v for k, v in config.items() if k not in bench.SCENARIO_LETTERS}
    data.update(config.get(name.value[0], {}))
    data.update(_flag_overrides(args))
    cfg = bench.from_mapping(name, data)
    _use_backend(args)
    rows = bench.run_scenario(cfg)
    path = bench.emit_csv(rows, Path(args.out_dir or "out") / f"scenario_{name.value[0]}.csv")
    print(path)
    return 0


def cmd_bench(args) -> int:
    config = _load_config(args.config)
    config.update(_flag_overrides(args))
    _use_backend(args)
    out = Path(args.out_dir or "out")
    summary = bench.bench_all(out, seed=config.pop("seed", 0), overrides=config)
    for key, result in summary["ttests"].items():
        print(f"{key:32s} t={result['t_statistic']} p={result['p_value']:.4g}")
    print(f"artifacts in {out}")
    return 0


def cmd_ttest(args) -> int:
    a = bench.read_metrics_csv(args.csv_a)
    b = bench.read_metrics_csv(args.csv_b)
    column = bench.metric_column(args.metric)
    result = bench.compare_modes(column, a, b, pooled=args.pooled)
    sys.stdout.write(bench.ttest_json(result, column))
    return 0


def cmd_ipfs_check(args) -> int:
    endpoint = args.endpoint or cas.default_endpoint()
    data = os.urandom(args.size)
    local = cas.cid_of_blob(data)
    remote = cas.remote_add(endpoint, data)
    back = cas.remote_cat(endpoint, remote)
    ok = back == data and remote == local
    print(json.dumps({"endpoint": endpoint, "local_cid": str(local), "remote_cid": str(remote),
                      "round_trip": back == data, "cid_match": remote == local}))
    return 0 if ok else 2


COMMANDS = {"gen-data": cmd_gen_data, "run": cmd_run, "bench": cmd_bench,
            "ttest": cmd_ttest, "ipfs-check": cmd_ipfs_check}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (cas.RemoteUnavailable, cas.RemoteError, cas.BadRemoteCid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, BadHeaderError, InsufficientDataError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
