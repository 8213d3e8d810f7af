#!/usr/bin/env python3
"""Fault plugin: emits a malformed line instead of verdicts."""
import sys

for line in sys.stdin:
    if '"predict"' in line:
        print("this is not json at all {{{")
        print('{"type": "done"}')
        sys.stdout.flush()
