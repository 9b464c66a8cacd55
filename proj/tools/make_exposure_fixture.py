#!/usr/bin/env python3
"""Regenerates data/exposure/table1_fixture.csv.

One synthetic row per exposed host, with per-country totals matching the
2018 European port-9100 exposure table. The first three German rows are the
published export excerpt. Rows are interleaved deterministically so the
report cannot rely on input order.
"""
import random
import sys

COUNTS = [
    ("DE", 12891), ("RU", 9737), ("GB", 6349), ("FR", 6634), ("IT", 2787),
    ("ES", 2088), ("TR", 835), ("PL", 1425), ("NL", 4934), ("CH", 624),
]
EXCERPT = ["87.156.104.144", "79.231.20.111", "141.24.208.236"]


def main(path):
    rows = []
    for first_octet, (cc, n) in enumerate(COUNTS, start=20):
        start = len(EXCERPT) if cc == "DE" else 0
        for i in range(start, n):
            rows.append(f"{first_octet}.{(i >> 16) & 255}.{(i >> 8) & 255}.{i & 255},9100,{cc}")
    random.Random(9100).shuffle(rows)
    with open(path, "w", newline="\n") as f:
        f.write("IP,PORT,COUNTRY\n")
        for ip in EXCERPT:
            f.write(f"{ip},9100,DE\n")
        for r in rows:
            f.write(r + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/exposure/table1_fixture.csv")
