"""Command-line entry point: ``graphpir <subcommand> ...``.

Exit status is 0 on success, 1 when a verification or retrieval fails and 2
for usage errors (bad graph descriptor, scheme that does not fit the graph,
exhaustive check past its size limit).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from typing import Sequence

from . import netsim
from .bounds import NEIGHBOR_EXACT_LIMIT, bound_report
from .errors import GraphError, GraphPIRError, SchemeError, TooLargeError
from .graphcore import build_family
from .schemes import SCHEME_NAMES, make_scheme
from .schemes.base import Scheme
from .verify import DEFAULT_EPS, DEFAULT_TRIALS, measure_rate, verify_privacy_all, verify_reliability

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

TABLE_FAMILIES = ("star", "complete", "cycle")


class UsageError(GraphPIRError):
    pass


def fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return f"{value:.6f}"


def _emit(args, payload: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _scheme(args) -> Scheme:
    if args.scheme is None:
        raise UsageError("--scheme is required")
    return make_scheme(args.scheme, build_family(args.graph), symmetrized=args.symmetrize)


def _file_seed(args) -> int:
    return args.seed if args.file_seed is None else args.file_seed


def _bits(bits) -> str:
    return "".join(map(str, bits))


# -- subcommands ----------------------------------------------------------------


def cmd_bounds(args) -> int:
    g = build_family(args.graph)
    report = bound_report(g, neighbor_limit=args.neighbor_limit, rng=random.Random(args.seed))
    lines = [f"graph {report.graph}: N={g.n_vertices} K={g.n_edges}"]
    for b in report.bounds:
        mark = "" if b.certified else " *"
        lines.append(f"  {b.kind:5} {b.name:32} {fmt(b.value)}{mark}")
    up, low = report.best_upper(), report.best_lower()
    lines.append(f"best lower {fmt(low.value)} ({low.name})" if low else "best lower -")
    lines.append(f"best upper {fmt(up.value)} ({up.name})" if up else "best upper -")
    if any(not b.certified for b in report.bounds):
        lines.append("* uncertified (heuristic or unchecked hypotheses); not used for best upper")
    payload = report.to_json()
    payload["best_lower"] = low.to_json() if low else None
    payload["best_upper"] = up.to_json() if up else None
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scheme = _scheme(args)
    scheme.check_theta(args.theta)
    files = scheme.random_files(random.Random(_file_seed(args)))
    got, qs, ans = scheme.run(args.theta, files, random.Random(args.seed))
    stored = files[args.theta]
    rate = measure_rate(scheme)
    ok = got == stored
    payload = {
        "scheme": scheme.kind,
        "graph": scheme.graph.describe(),
        "theta": args.theta,
        "seed": args.seed,
        "file_length": scheme.file_length,
        "transcript": repr(qs.transcript),
        "queries": [repr(q) for q in qs.queries],
        "answers": [_bits(a) for a in ans.answers],
        "reconstructed": _bits(got),
        "stored": _bits(stored),
        "match": ok,
        "rate": str(rate),
        "download_bits": ans.total_bits,
    }
    lines = [
        f"scheme {scheme.kind} on {scheme.graph.describe()}, theta={args.theta}, L={scheme.file_length}",
        f"transcript {qs.transcript!r}",
    ]
    lines += [f"  server {s}: query {qs[s]!r} -> answer {_bits(ans[s])}" for s in scheme.graph.vertices()]
    lines += [
        f"reconstructed {_bits(got)}",
        f"stored        {_bits(stored)}",
        f"match {'yes' if ok else 'NO'}   rate {rate}   downloaded {ans.total_bits} bits",
    ]
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify(args) -> int:
    scheme = _scheme(args)
    rng = random.Random(args.seed)
    exact = args.samples is None
    if args.mode == "reliability":
        mode = "exhaustive" if exact else "sampled"
        report = verify_reliability(scheme, mode=mode, trials=args.samples or 0, rng=rng)
        lines = [f"reliability ({mode}) of {scheme.kind} on {scheme.graph.describe()}: "
                 f"{report.cases} cases, {report.failure_count} failures -> {report.verdict}"]
        lines += [f"  counterexample {f}" for f in report.failures[:5]]
        _emit(args, report.to_json(), lines)
        return EXIT_OK if report.passed else EXIT_FAILED
    if args.mode == "privacy":
        mode = "exact" if exact else "sampled"
        reports = verify_privacy_all(scheme, mode=mode, trials=args.samples or DEFAULT_TRIALS, eps=args.eps, rng=rng)
        lines = [f"privacy ({mode}) of {scheme.kind} on {scheme.graph.describe()}:"]
        lines += [f"  server {r.server}: TV {fmt(r.tv_max) if mode == 'sampled' else r.tv_max} -> {r.verdict}"
                  for r in reports]
        passed = all(r.passed for r in reports)
        payload = {"scheme": scheme.kind, "graph": scheme.graph.describe(), "mode": mode,
                   "verdict": "pass" if passed else "fail", "servers": [r.to_json() for r in reports]}
        _emit(args, payload, lines)
        return EXIT_OK if passed else EXIT_FAILED
    if args.mode == "rate":
        rate = measure_rate(scheme)
        _emit(args, {"scheme": scheme.kind, "graph": scheme.graph.describe(), "rate": str(rate),
                     "answer_lengths": [str(v) for v in scheme.answer_lengths()]},
              [f"rate of {scheme.kind} on {scheme.graph.describe()}: {rate} (matches declared formula)"])
        return EXIT_OK
    raise UsageError(f"unknown verify mode {args.mode!r}")


def table_rows(families: Sequence[str], n_min: int, n_max: int, neighbor_limit: int, seed: int) -> list[dict]:
    rows = []
    for family in families:
        for n in range(n_min, n_max + 1):
            g = build_family(f"{family}:{n}")
            report = bound_report(g, neighbor_limit=neighbor_limit, rng=random.Random(seed))
            low, up = report.best_lower(), report.best_upper()
            ns = report.get("neighbor_system")
            rows.append({
                "graph": g.describe(),
                "lower": str(low.value) if isinstance(low.value, Fraction) else low.value,
                "lower_source": low.name,
                "upper": str(up.value) if isinstance(up.value, Fraction) else up.value,
                "upper_source": up.name,
                "neighbor_bound": str(ns.value) if isinstance(ns.value, Fraction) else ns.value,
                "neighbor_certified": ns.certified,
                "_values": (low.value, up.value, ns.value),
            })
    return rows


def cmd_table(args) -> int:
    rows = table_rows(args.families.split(","), args.n_min, args.n_max, args.neighbor_limit, args.seed)
    lines = [f"{'graph':14} {'lower':>12} {'upper':>12} {'neighbor':>12}  sources (lower / upper)"]
    for r in rows:
        low, up, ns = r.pop("_values")
        star = "*" if not r["neighbor_certified"] else " "
        lines.append(f"{r['graph']:14} {fmt(low):>12} {fmt(up):>12} {fmt(ns):>12}{star} "
                     f"{r['lower_source']} / {r['upper_source']}")
    lines.append("* uncertified heuristic value, excluded from the upper column")
    _emit(args, {"rows": rows}, lines)
    return EXIT_OK


def cmd_serve(args) -> int:
    scheme = _scheme(args)
    files = scheme.random_files(random.Random(_file_seed(args)))
    servers = scheme.graph.vertices() if args.server is None else [args.server]
    running = []
    try:
        for s in servers:
            port = args.port_base + s - 1 if args.port_base else 0
            running.append(netsim.serve(scheme, files, s, args.host, port))
        text = "".join(f"{r.host}:{r.port}\n" for r in running)
        if args.endpoints:
            with open(args.endpoints, "w") as fh:
                fh.write(text)
        for r in running:
            print(f"server {r.server} listening on {r.host}:{r.port} with files {list(r.files)}", flush=True)
        deadline = None if args.duration is None else time.monotonic() + args.duration
        while deadline is None or time.monotonic() < deadline:
            time.sleep(0.1)
    except KeyboardInterrupt:
        pass
    finally:
        for r in running:
            r.stop()
    return EXIT_OK


def cmd_retrieve(args) -> int:
    scheme = _scheme(args)
    if not args.endpoints:
        raise UsageError("--endpoints is required")
    endpoints = netsim.read_endpoints(args.endpoints)
    expected = None
    if args.check:
        expected = scheme.random_files(random.Random(_file_seed(args)))[args.theta]
    try:
        got, log = netsim.retrieve(scheme, endpoints, args.theta, random.Random(args.seed),
                                   concurrent=args.concurrent, expected=expected)
    except netsim.MismatchError as exc:
        print(f"retrieval mismatch: {exc}", file=sys.stderr)
        return EXIT_FAILED
    payload = log.to_json()
    payload["file"] = _bits(got)
    lines = [f"  server {t.server} @ {t.endpoint}: up {t.upload_bytes} B, down {t.download_bytes} B "
             f"({t.download_bits} answer bits)" for t in log.traffic]
    lines += [f"file {args.theta}: {_bits(got)}",
              f"downloaded {log.download_bits} answer bits, rate {Fraction(scheme.file_length, log.download_bits)}, "
              f"verdict {log.verdict}"]
    _emit(args, payload, lines)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphpir", description="Bounds and executable schemes for graph-based PIR.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph_required=True, scheme=False):
        p.add_argument("--graph", required=graph_required,
                       help="star:N, cycle:N, complete:N, kbipartite:A,B, wheel:N, edges:1-2,... or file:PATH")
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if scheme:
            p.add_argument("--scheme", choices=SCHEME_NAMES)
            p.add_argument("--symmetrize", action="store_true", help="wrap the scheme with the automorphism group")
            p.add_argument("--file-seed", type=int, help="seed for the stored files (default: --seed)")

    p = sub.add_parser("bounds", help="every applicable bound for a graph")
    common(p)
    p.add_argument("--neighbor-limit", type=int, default=NEIGHBOR_EXACT_LIMIT, help="largest N solved exactly")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="run one retrieval in-process")
    common(p, scheme=True)
    p.add_argument("--theta", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check reliability, privacy or rate")
    common(p, scheme=True)
    p.add_argument("--mode", choices=("reliability", "privacy", "rate"), default="reliability")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", help="enumerate all randomness (default)")
    group.add_argument("--samples", type=int, help="sample this many trials instead")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="TV tolerance for sampled privacy")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="summary table of lower and upper bounds")
    common(p, graph_required=False)
    p.add_argument("--families", default=",".join(TABLE_FAMILIES))
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--neighbor-limit", type=int, default=NEIGHBOR_EXACT_LIMIT)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("serve", help="run server listeners on loopback")
    common(p, scheme=True)
    p.add_argument("--server", type=int, help="run only this server (default: all)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port-base", type=int, default=0, help="server i listens on port-base + i - 1 (0: ephemeral)")
    p.add_argument("--endpoints", help="write the endpoint list here")
    p.add_argument("--duration", type=float, help="stop after this many seconds")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("retrieve", help="fetch a file from running listeners")
    common(p, scheme=True)
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--endpoints", help="file with one host:port per line, line i = server i")
    p.add_argument("--concurrent", action="store_true")
    p.add_argument("--check", action="store_true", help="compare against the files regenerated from --file-seed")
    p.set_defaults(func=cmd_retrieve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GraphError, SchemeError, TooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphPIRError, OSError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
