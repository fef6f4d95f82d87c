#!/usr/bin/env python3
import sys, time

time.sleep(float(sys.argv[1]) if len(sys.argv) > 1 else 30)
