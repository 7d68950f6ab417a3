#!/usr/bin/env python
"""
run.py

Entry script: dispatches to the planforge command-line interface.
"""

import sys
from pathlib import Path

current_dir = str(Path(__file__).parent.absolute())
if current_dir not in sys.path:
    sys.path.insert(0, current_dir)

from planforge.cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
