#!/usr/bin/env python3
import sys

sys.stdin.read()
sys.stderr.write("cannot analyse this repository\n")
sys.exit(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
