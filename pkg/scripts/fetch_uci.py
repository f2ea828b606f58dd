#!/usr/bin/env python3
"""Download and prepare the three UCI benchmark datasets as data/*.csv.

Requires ordinary network access to archive.ics.uci.edu.  Produces:

  data/blood.csv         748 rows, 3 covariates (the collinear Monetary
                         column, 250x Frequency, is dropped), label 'class'
  data/breastcancer.csv  683 rows, 9 covariates (id dropped, the 16 rows
                         with missing values removed), label 'class'
  data/haberman.csv      306 rows, 3 covariates, label 'class'
"""

import csv
import io
import os
import sys
import urllib.request

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"
DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def fetch(path: str) -> list[list[str]]:
    with urllib.request.urlopen(f"{BASE}/{path}", timeout=60) as resp:
        text = resp.read().decode("utf-8")
    return [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]


def write(name: str, header: list[str], rows: list[list[str]]) -> None:
    out = os.path.join(DATA_DIR, name)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {out} ({len(rows)} rows)")


def main() -> int:
    os.makedirs(DATA_DIR, exist_ok=True)

    rows = fetch("blood-transfusion/transfusion.data")[1:]  # skip header line
    # columns: Recency, Frequency, Monetary (= 250 * Frequency), Time, label
    blood = [[r[0], r[1], r[3], r[4]] for r in rows]
    write("blood.csv", ["recency", "frequency", "time", "class"], blood)
    assert len(blood) == 748, len(blood)

    rows = fetch("breast-cancer-wisconsin/breast-cancer-wisconsin.data")
    cancer = [r[1:] for r in rows if "?" not in r]  # drop the id column
    write(
        "breastcancer.csv",
        [f"v{i}" for i in range(1, 10)] + ["class"],
        cancer,
    )
    assert len(cancer) == 683, len(cancer)

    rows = fetch("haberman/haberman.data")
    write("haberman.csv", ["age", "year", "nodes", "class"], rows)
    assert len(rows) == 306, len(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
