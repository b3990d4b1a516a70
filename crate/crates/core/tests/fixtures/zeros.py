#!/usr/bin/env python3
# Overwrites observed values, which the host must reject.
import sys

n = int(sys.stdin.readline().split()[1])
sys.stdin.read()
print("\n".join("0" for _ in range(n)))
