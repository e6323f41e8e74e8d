#!/usr/bin/env python3
"""Convert wide paid/incurred triangles into the long CSV read by picres.

Each input has one row per accident year and one column per development year.
Blank or NA cells are skipped. A first row with any non-numeric cell is taken
as a header and dropped; pass --label-column when the first column holds accident-year labels.
"""
import argparse
import csv
import sys


def number(c):
    try:
        return float(c.replace(",", ""))
    except ValueError:
        return None


def read_wide(path, label_column):
    with open(path, newline="") as f:
        rows = [[c.strip() for c in rec] for rec in csv.reader(f) if rec]
    if rows and any(number(c) is None for c in rows[0] if c and c.upper() != "NA"):
        rows = rows[1:]
    if label_column:
        rows = [r[1:] for r in rows]
    return [[number(c) for c in r] for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paid", required=True)
    ap.add_argument("--incurred", required=True)
    ap.add_argument("--output", required=True)
    ap.add_argument("--label-column", action="store_true")
    args = ap.parse_args()

    tri = {s: read_wide(p, args.label_column) for s, p in (("P", args.paid), ("I", args.incurred))}
    n = len(tri["P"])
    if len(tri["I"]) != n:
        sys.exit("paid and incurred have different numbers of accident years")

    with open(args.output, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["accident", "development", "source", "value"])
        for source in ("P", "I"):
            for i, row in enumerate(tri[source]):
                for j, v in enumerate(row):
                    if v is not None and i + j < n:
                        w.writerow([i, j, source, repr(v)])


if __name__ == "__main__":
    main()
