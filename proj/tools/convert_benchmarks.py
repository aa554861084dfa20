#!/usr/bin/env python3
"""Convert the bundled UCI benchmark tables into the sparse text format.

The raw tables come from two PyPI wheels that redistribute them:

  keel-ds               -> heart.dat, australian.dat
  imbalanced-databases  -> german.data-numeric.txt

Usage:
  pip download --no-deps keel-ds imbalanced-databases -d /tmp/wheels
  python3 tools/convert_benchmarks.py /tmp/wheels data/

Labels are written as they appear in the source (heart: 1/2, australian: 0/1,
german: 1/2); the loader maps two-valued label sets onto -1/+1.
"""

import glob
import os
import sys
import zipfile


def _read_member(wheel_dir, pattern, member):
    (wheel,) = glob.glob(os.path.join(wheel_dir, pattern))
    with zipfile.ZipFile(wheel) as z:
        return z.read(member).decode("utf-8")


def _keel_rows(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        yield [tok.strip() for tok in line.split(",")]


def _whitespace_rows(text):
    for line in text.splitlines():
        toks = line.split()
        if toks:
            yield toks


def _format(label, features):
    parts = [label]
    for idx, raw in enumerate(features, start=1):
        value = float(raw)
        if value != 0.0:
            parts.append("%d:%s" % (idx, repr(value)))
    return " ".join(parts)


def _write(path, rows):
    with open(path, "w", encoding="utf-8") as out:
        for row in rows:
            out.write(_format(row[-1], row[:-1]) + "\n")


def main(argv):
    if len(argv) != 3:
        sys.stderr.write(__doc__)
        return 1
    wheel_dir, out_dir = argv[1], argv[2]
    os.makedirs(out_dir, exist_ok=True)

    keel = "keel_ds-*.whl"
    _write(os.path.join(out_dir, "heart.txt"),
           _keel_rows(_read_member(wheel_dir, keel,
                                   "keel_ds/data/balanced/raw/heart.dat")))
    _write(os.path.join(out_dir, "australian.txt"),
           _keel_rows(_read_member(wheel_dir, keel,
                                   "keel_ds/data/balanced/raw/australian.dat")))
    _write(os.path.join(out_dir, "german.txt"),
           _whitespace_rows(_read_member(
               wheel_dir, "imbalanced_databases-*.whl",
               "imbalanced_databases/data/german/german.data-numeric.txt")))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
