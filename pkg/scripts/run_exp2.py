#!/usr/bin/env python3
"""Adjacency-system choice on G4 and on G8 data; extra flags are passed through."""

import sys
from pathlib import Path

from blockpotts.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

if __name__ == "__main__":
    for name in ("exp2_g4_desk.cfg", "exp2_g8_desk.cfg"):
        code = main(["exp2", "--config", str(CONFIGS / name)] + sys.argv[1:])
        if code:
            sys.exit(code)
    sys.exit(0)
