#!/usr/bin/env python3
"""Run the full named claim suite and write the JSON report.

Equivalent to `tfm-lab paper-suite --report claims.json`, kept as a script
so the suite can be launched without installing the console entry point.
"""
import sys

from tfm_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["paper-suite", *sys.argv[1:]]))
