"""Command-line interface.

Exit codes: 0 ok, 1 I/O error, 2 usage, 3 insufficient data, 4 corrupt or
mismatched shards (including failed verification).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np

from . import codec
from .code import NodeId, derive_params
from .errors import InvalidParameters, MSRError
from .repair import helper_extract, plan_repair, repair_with_accounting
from .shardfile import (
    ShardFormatError,
    make_header,
    pack_shard,
    read_shard,
    shard_name,
    symbol_bytes,
    bytes_to_symbols,
    symbols_to_bytes,
)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_INSUFFICIENT, EXIT_CORRUPT = 0, 1, 2, 3, 4


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_node(text: str) -> NodeId:
    try:
        x, y = (int(v) for v in text.strip().strip("()").split(","))
    except ValueError:
        raise CLIError(EXIT_USAGE, f"cannot parse node {text!r}; expected x,y") from None
    return NodeId(x, y)


def parse_node_list(text: str) -> list[NodeId]:
    return [parse_node(part) for part in text.split(";") if part.strip()]


def _params(q: int, t: int):
    try:
        return derive_params(q, t)
    except InvalidParameters as exc:
        raise CLIError(EXIT_USAGE, str(exc)) from None


# -- params ------------------------------------------------------------------


def cmd_params(args) -> int:
    p = _params(args.q, args.t)
    try:
        if args.shorten is not None:
            view = codec.shorten_profile(p, args.shorten)
        elif args.puncture is not None:
            view = codec.puncture_profile(p, args.puncture)
        else:
            view = codec.shorten_profile(p, 0)
    except InvalidParameters as exc:
        raise CLIError(EXIT_USAGE, str(exc)) from None
    n, k, d, alpha = view.as_row()
    beta = view.beta
    label = f"({p.q},{p.t})"
    if view.kind == "shortened":
        label += f", shorten={view.delta}"
    elif view.kind == "punctured":
        label += f", puncture={view.delta}"
    print(f"{'code':<22}{'n':>5}{'k':>5}{'d':>5}{'alpha':>8}{'beta':>7}{'rate':>8}")
    print(f"{label:<22}{n:>5}{k:>5}{d:>5}{alpha:>8}{beta:>7}{k / n:>8.3f}")
    print(f"field: GF(2^{p.field.m}), reduction polynomial {p.field.reduction_polynomial:#x}, u = {p.u}")
    print(f"alpha = (d-k+1)*beta: {alpha} = {d - k + 1}*{beta} -> {alpha == (d - k + 1) * beta}")
    print(f"repair bandwidth d*beta = {d * beta}, naive k*alpha = {k * alpha}")
    r = p.r
    print(f"alpha <= r^(n/r): {p.alpha} <= {r}^{p.n // r} = {r ** (p.n // r)} -> {p.alpha <= r ** (p.n / r)}")
    if view.dropped:
        print("dropped nodes: " + " ".join(str(x) for x in view.dropped))
    return EXIT_OK


# -- encode / decode ---------------------------------------------------------


def encode_bytes(data: bytes, p):
    """Returns (cube, chunk_count). The cube's batch axis runs over chunks."""
    sb = symbol_bytes(p)
    chunk = p.k * p.alpha * sb
    count = math.ceil(len(data) / chunk) if data else 0
    padded = data + b"\0" * (count * chunk - len(data))
    msg = bytes_to_symbols(padded, p).reshape(count, p.k * p.alpha).T
    return codec.encode(msg, p), count


def cmd_encode(args) -> int:
    p = _params(args.q, args.t)
    try:
        data = Path(args.input).read_bytes()
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CLIError(EXIT_IO, str(exc)) from None
    cube, count = encode_bytes(data, p)
    try:
        for node in p.nodes:
            free = codec.extract_free(cube.content(node), p)
            header = make_header(p, node, count, len(data))
            (out / shard_name(node)).write_bytes(pack_shard(header, free, p))
    except OSError as exc:
        raise CLIError(EXIT_IO, str(exc)) from None
    print(f"wrote {p.n} shards for {len(data)} bytes ({count} stripes) to {out}")
    if args.verify and count:
        violations = codec.is_codeword(cube)
        if violations:
            bad_nodes = sorted({v.node for v in violations if v.node is not None})
            planes = sum(v.kind == "plane" for v in violations)
            raise CLIError(
                EXIT_CORRUPT,
                f"codeword check failed: {len(violations)} violated checks "
                f"({planes} plane, {len(violations) - planes} nodal; nodes {' '.join(map(str, bad_nodes))}). "
                "Shards of these nodes cannot be rebuilt from their stored symbols.",
            )
        print("codeword check passed")
    return EXIT_OK


def load_shards(shard_dir: Path, exclude=()):
    """Read every *.msr file; returns (params, header, {node: free (alpha, chunks)})."""
    try:
        paths = sorted(Path(shard_dir).glob("*.msr"))
    except OSError as exc:
        raise CLIError(EXIT_IO, str(exc)) from None
    key = None
    params = header0 = None
    shards = {}
    for path in paths:
        try:
            header, free, p = read_shard(path)
        except ShardFormatError as exc:
            raise CLIError(EXIT_CORRUPT, str(exc)) from None
        except OSError as exc:
            raise CLIError(EXIT_IO, str(exc)) from None
        if key is None:
            key, params, header0 = header.code_key(), p, header
        elif header.code_key() != key:
            raise CLIError(EXIT_CORRUPT, f"{path.name}: header does not match the other shards")
        if header.node in shards:
            raise CLIError(EXIT_CORRUPT, f"{path.name}: duplicate shard for node {header.node}")
        if header.node in exclude:
            continue
        shards[header.node] = free
    if params is None:
        raise CLIError(EXIT_INSUFFICIENT, f"no shards found in {shard_dir}")
    return params, header0, shards


def cmd_decode(args) -> int:
    p, header, shards = load_shards(Path(args.shard_dir))
    if len(shards) < p.k:
        raise CLIError(EXIT_INSUFFICIENT, f"insufficient shards: {len(shards)} present, {p.k} needed")
    if header.chunk_count == 0:
        payload = b""
    else:
        contents = {node: codec.complete_node(node, free, p).symbols for node, free in shards.items()}
        cube = codec.decode_nodes(p, contents)
        msg = codec.decode_message(cube)  # (k*alpha, chunks)
        payload = symbols_to_bytes(msg.T, p)
    try:
        Path(args.output).write_bytes(payload[: header.original_file_length])
    except OSError as exc:
        raise CLIError(EXIT_IO, str(exc)) from None
    print(f"decoded {header.original_file_length} bytes from {len(shards)} shards")
    return EXIT_OK


# -- repair ------------------------------------------------------------------


def choose_aloof(p, failed, available, requested, rng):
    missing = [node for node in p.nodes if node != failed and node not in available]
    if requested is not None:
        aloof = list(requested)
        if len(set(aloof)) != p.q or failed in aloof:
            raise CLIError(EXIT_USAGE, f"--aloof must list {p.q} distinct nodes other than the failed one")
        for node in aloof:
            if not (0 <= node.x < p.width and 1 <= node.y <= p.t):
                raise CLIError(EXIT_USAGE, f"aloof node {node} is outside the grid")
        absent = [node for node in missing if node not in aloof]
        if absent:
            raise CLIError(EXIT_INSUFFICIENT, f"helpers missing: {' '.join(map(str, absent))}")
        return aloof
    if len(missing) > p.q:
        raise CLIError(EXIT_INSUFFICIENT, f"only {len(available)} helpers available, {p.d} needed")
    pool = [node for node in p.nodes if node != failed and node in available]
    extra = [pool[i] for i in sorted(rng.choice(len(pool), size=p.q - len(missing), replace=False))]
    return sorted(missing + extra)


def cmd_repair(args) -> int:
    failed = parse_node(args.failed)
    requested = parse_node_list(args.aloof) if args.aloof is not None else None
    shard_dir = Path(args.shard_dir)
    p, header, shards = load_shards(shard_dir, exclude={failed})
    if not (0 <= failed.x < p.width and 1 <= failed.y <= p.t):
        raise CLIError(EXIT_USAGE, f"failed node {failed} is outside the grid")
    rng = np.random.default_rng(args.seed)
    aloof = choose_aloof(p, failed, shards, requested, rng)
    plan = plan_repair(p, failed, aloof)
    count = header.chunk_count
    if count:
        bundles = {}
        for h in plan.helpers:
            content = codec.complete_node(h, shards[h], p)
            bundles[h] = helper_extract(content, plan)
        result = repair_with_accounting(plan, bundles)
        free = codec.extract_free(result.content, p)
        downloaded = result.downloaded * count
    else:
        free = p.field.zeros((p.alpha, 0))
        downloaded = 0
    new_header = make_header(p, failed, count, header.original_file_length)
    blob = pack_shard(new_header, free, p)
    target = Path(args.out) if args.out else shard_dir / shard_name(failed)

    print(f"failed {failed}; aloof {' '.join(map(str, plan.aloof))} (seed {args.seed})")
    print(f"symbols downloaded: {downloaded} = d*beta*chunks = {p.d}*{p.beta}*{count}")
    print(f"naive baseline k*alpha*chunks: {p.naive_bandwidth * count}")
    if args.verify:
        reference = shard_dir / shard_name(failed)
        if not reference.exists():
            raise CLIError(EXIT_USAGE, f"--verify needs the original shard at {reference}")
        if reference.read_bytes() != blob:
            raise CLIError(EXIT_CORRUPT, "regenerated shard differs from the original")
        print("verified: regenerated shard is byte-identical to the original")
    try:
        target.write_bytes(blob)
    except OSError as exc:
        raise CLIError(EXIT_IO, str(exc)) from None
    print(f"wrote {target}")
    return EXIT_OK


# -- simulate ----------------------------------------------------------------


def run_simulation(q, t, trials=100, seed=0, verify=False, exhaustive=False, timing=True) -> dict:
    from .oracle import repair_via_full_decode

    p = derive_params(q, t)
    rng = np.random.default_rng(seed)
    cube = codec.encode(p.field.random((p.k * p.alpha,), rng), p)
    if exhaustive:
        cases = [(f, a) for f in p.nodes for a in combinations([x for x in p.nodes if x != f], q)]
    else:
        cases = []
        for _ in range(trials):
            f = p.nodes[int(rng.integers(p.n))]
            others = [x for x in p.nodes if x != f]
            cases.append((f, tuple(others[i] for i in sorted(rng.choice(len(others), size=q, replace=False)))))

    rows = []
    for i, (failed, aloof) in enumerate(cases):
        t0 = time.perf_counter()
        plan = plan_repair(p, failed, aloof)
        bundles = {h: helper_extract(cube.content(h), plan) for h in plan.helpers}
        error = None
        try:
            result = repair_with_accounting(plan, bundles)
            success = bool(np.array_equal(result.content.symbols, cube.node(failed)))
            downloaded = result.downloaded
        except MSRError as exc:
            success, downloaded, error = False, 0, f"{type(exc).__name__}: {exc}"
            result = None
        elapsed = time.perf_counter() - t0
        oracle = None
        if verify and result is not None:
            ref = repair_via_full_decode(cube, failed, aloof)
            oracle = bool(np.array_equal(ref.symbols, result.content.symbols))
        rows.append({
            "trial": i,
            "failed": [failed.x, failed.y],
            "aloof": [[a.x, a.y] for a in plan.aloof],
            "m": plan.m,
            "symbols_downloaded": downloaded,
            "baseline_kalpha": p.naive_bandwidth,
            "success": success,
            "oracle_match": oracle,
            "error": error,
            "elapsed_s": round(elapsed, 6) if timing else None,
        })

    ok = [r for r in rows if r["success"]]
    agg = {
        "trials": len(rows),
        "successes": len(ok),
        "failures": len(rows) - len(ok),
        "mean_symbols_downloaded": float(np.mean([r["symbols_downloaded"] for r in rows])) if rows else 0.0,
        "expected_d_beta": p.repair_bandwidth,
        "baseline_kalpha": p.naive_bandwidth,
        "mean_ratio": (float(np.mean([r["symbols_downloaded"] for r in rows])) / p.naive_bandwidth) if rows else 0.0,
        "mean_elapsed_s": (round(float(np.mean([r["elapsed_s"] for r in rows])), 6) if rows else 0.0) if timing else None,
    }
    if verify:
        agg["oracle_matches"] = sum(1 for r in rows if r["oracle_match"])
    params = {"q": q, "t": t, "n": p.n, "k": p.k, "d": p.d, "alpha": p.alpha, "beta": p.beta,
              "field_m": p.field.m, "u": p.u, "seed": seed, "exhaustive": exhaustive}
    return {"parameters": params, "trials": rows, "aggregate": agg}


def cmd_simulate(args) -> int:
    p = _params(args.q, args.t)
    del p
    report = run_simulation(args.q, args.t, args.trials, args.seed, args.verify, args.exhaustive, not args.no_timing)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fields = ["trial", "failed", "aloof", "m", "symbols_downloaded", "baseline_kalpha", "success",
                      "oracle_match", "elapsed_s"]
            w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            w.writeheader()
            for row in report["trials"]:
                w.writerow({**row, "failed": "{},{}".format(*row["failed"]),
                            "aloof": ";".join("{},{}".format(*a) for a in row["aloof"])})
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
        agg = report["aggregate"]
        print(f"{agg['successes']}/{agg['trials']} repairs exact; report written to {args.json}")
        return EXIT_OK
    print(f"{'trial':>5}  {'failed':<8}{'aloof':<24}{'m':>2}{'download':>10}{'k*alpha':>9}  ok")
    for row in report["trials"]:
        aloof = " ".join("({},{})".format(*a) for a in row["aloof"])
        failed = "({},{})".format(*row["failed"])
        print(f"{row['trial']:>5}  {failed:<8}{aloof:<24}{row['m']:>2}{row['symbols_downloaded']:>10}"
              f"{row['baseline_kalpha']:>9}  {'yes' if row['success'] else 'NO'}")
    agg = report["aggregate"]
    print(f"exact repairs: {agg['successes']}/{agg['trials']}; mean download {agg['mean_symbols_downloaded']:.1f} "
          f"vs naive {agg['baseline_kalpha']} (ratio {agg['mean_ratio']:.3f})")
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coupled-msr", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", help="print code parameters")
    sp.add_argument("q", type=int)
    sp.add_argument("t", type=int)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--shorten", type=int, metavar="DS")
    g.add_argument("--puncture", type=int, metavar="DP")
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("encode", help="split a file into n shards")
    sp.add_argument("input")
    sp.add_argument("out_dir")
    sp.add_argument("-q", type=int, required=True)
    sp.add_argument("-t", type=int, required=True)
    sp.add_argument("--no-verify", dest="verify", action="store_false",
                    help="skip the codeword check before reporting success")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("decode", help="rebuild a file from any k shards")
    sp.add_argument("shard_dir")
    sp.add_argument("output")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("repair", help="regenerate one shard from d helpers")
    sp.add_argument("shard_dir")
    sp.add_argument("--failed", required=True, metavar="X,Y")
    sp.add_argument("--aloof", metavar="X,Y;X,Y", help="q nodes left out of the repair")
    sp.add_argument("--seed", type=int, default=0, help="seed for choosing aloof nodes")
    sp.add_argument("--out", help="output path (default: the failed shard's name in SHARD_DIR)")
    sp.add_argument("--verify", action="store_true", help="compare against the existing original shard")
    sp.set_defaults(func=cmd_repair)

    sp = sub.add_parser("simulate", help="failure-injection repair trials with bandwidth accounting")
    sp.add_argument("q", type=int)
    sp.add_argument("t", type=int)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json")
    sp.add_argument("--csv")
    sp.add_argument("--verify", action="store_true", help="also compare with the full-decode reference")
    sp.add_argument("--exhaustive", action="store_true", help="run every (failed, aloof) pair")
    sp.add_argument("--no-timing", action="store_true", help="omit wall-clock fields for byte-stable reports")
    sp.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except MSRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
