#!/usr/bin/env python3
"""Run every correspondence suite and print a one-line summary per suite.

Exit code is 0 only if every case in every suite passes.
"""

import argparse
import sys
import time

from smdp.verify import SUITES, run_suite

DEFAULTS = {
    # suite name -> (n, cases)
    "nextaction": (2, 100),
    "evalreward": (10, 50),
    "boundedpolicy": (1, 16),
    "consistency": (8, 50),
    "valuechoice": (2, 136),
    "normalization": (3, 20),
    "roundtrip": (3, 10),
    "dnf": (8, 100),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--suite", choices=SUITES, action="append",
        help="run only this suite (repeatable); default: all",
    )
    args = parser.parse_args()
    names = args.suite or list(SUITES)
    total_failures = 0
    for name in names:
        n, cases = DEFAULTS[name]
        start = time.monotonic()
        rows = run_suite(name, n=n, cases=cases, seed=args.seed)
        elapsed = time.monotonic() - start
        failures = [r for r in rows if not r.ok]
        total_failures += len(failures)
        status = "ok" if not failures else f"{len(failures)} FAILURES"
        print(f"{name:<14} {len(rows):>5} cases  {elapsed:6.1f}s  {status}")
        for r in failures:
            print(f"  FAIL {r.case}: expected {r.expected}, got {r.got}")
    return 2 if total_failures else 0


if __name__ == "__main__":
    sys.exit(main())
