#!/usr/bin/env python3
"""
Launch the funcnet command-line interface
"""

import sys

from funcnet.main import main

if __name__ == "__main__":
    sys.exit(main())
