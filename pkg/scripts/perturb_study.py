"""Equivalent to `python -m aggsim perturb`; extra arguments are passed through."""

import sys

import _common  # noqa: F401

from aggsim.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["perturb", *sys.argv[1:]]))
