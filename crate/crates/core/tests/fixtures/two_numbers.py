#!/usr/bin/env python3
import sys

lines = sys.stdin.read().split("\n")
n = int(lines[0].split()[1])
print("\n".join("1 2" for _ in range(n)))
