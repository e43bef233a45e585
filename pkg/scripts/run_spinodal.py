"""Equivalent to `python -m aggsim spinodal`; extra arguments are passed through."""

import sys

import _common  # noqa: F401

from aggsim.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["spinodal", *sys.argv[1:]]))
