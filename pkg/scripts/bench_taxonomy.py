#!/usr/bin/env python3
"""Sweep the synthetic taxonomy benchmark over store sizes.

Usage: python scripts/bench_taxonomy.py [--full]
  --full  include the 1e6-triple point (the acceptance-scale run)
"""

import sys

from gtlog.cli import main as gtlog_main

SIZES = [1_000, 10_000, 100_000]


def main():
    sizes = SIZES + ([1_000_000] if "--full" in sys.argv else [])
    for size in sizes:
        gtlog_main(["bench", "--triples", str(size), "--seed", "7"])


if __name__ == "__main__":
    main()
