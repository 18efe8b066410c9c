#!/usr/bin/env python3
"""Run every counterexample oracle and print the pass/fail table.

Thin wrapper over `fquant oracle --all`; keeps the manifest in out/oracles.
"""

import sys

from fquant.cli import main

if __name__ == "__main__":
    sys.exit(main(["oracle", "--all", "--out", "out/oracles"]))
