"""Module entry point: python3 -m pointmask ... == the pointmask CLI."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
