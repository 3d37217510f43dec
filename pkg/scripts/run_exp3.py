#!/usr/bin/env python3
"""ABC reference-table classifier versus block criteria; extra flags pass through."""

import sys
from pathlib import Path

from blockpotts.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "exp3_desk.cfg"

if __name__ == "__main__":
    sys.exit(main(["exp3", "--config", str(CONFIG)] + sys.argv[1:]))
