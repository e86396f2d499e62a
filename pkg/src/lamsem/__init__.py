"""Executable semantics for the call-by-value lambda-calculus with constants."""

import sys

# The evaluators recurse once per unit of fuel; the defaults need a few
# thousand frames.
if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)
