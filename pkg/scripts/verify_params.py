#!/usr/bin/env python3
"""Run the brute-force verifier for one parameter set and print its JSON report.

Without budgets every erasure pattern and every (failed, aloof) pair is run.
"""
import argparse
import json
import sys

from coupled_msr.code import derive_params
from coupled_msr.errors import TooLarge
from coupled_msr.oracle import exhaustive_verify, pc_rank


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("q", type=int)
    ap.add_argument("t", type=int)
    ap.add_argument("--erasures", type=int, default=None, help="sample this many erasure patterns")
    ap.add_argument("--repairs", type=int, default=None, help="sample this many repair cases")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rank", action="store_true", help="also compute the stacked parity-check rank")
    args = ap.parse_args(argv)

    params = derive_params(args.q, args.t)
    report = exhaustive_verify(params, args.erasures, args.repairs, seed=args.seed)
    if args.rank:
        try:
            report.pc_rank = pc_rank(params)
        except TooLarge as exc:
            print(f"rank skipped: {exc}", file=sys.stderr)
    out = report.to_dict()
    out["expected_rank"] = params.n * params.alpha0 - params.k * params.alpha
    print(json.dumps(out, indent=2))
    return 0 if report.cases_passed == report.cases_run else 1


if __name__ == "__main__":
    sys.exit(main())
