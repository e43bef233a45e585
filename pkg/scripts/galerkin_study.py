"""Equivalent to `python -m aggsim galerkin-study`; extra arguments are passed through."""

import sys

import _common  # noqa: F401

from aggsim.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["galerkin-study", *sys.argv[1:]]))
