#!/usr/bin/env python3
"""Color-count recovery at desk scale; extra CLI flags are passed through."""

import sys
from pathlib import Path

from blockpotts.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "exp1_desk.cfg"

if __name__ == "__main__":
    sys.exit(main(["exp1", "--config", str(CONFIG)] + sys.argv[1:]))
