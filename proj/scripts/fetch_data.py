#!/usr/bin/env python3
"""Fetch the UCI benchmark datasets used by the experiments into data/.

Each dataset is written as a plain CSV with a header row and a binary label
column, ready for `tpso run --data <csv> --label <column>`:

  wdbc.csv        label column `diagnosis` (M/B)        569 x 30, numeric
  heart.csv       label column `disease`  (yes/no)      270 x 13, mixed
  ionosphere.csv  label column `cls`      (g/b)         351 x 34, numeric
  sonar.csv       label column `cls`      (R/M)         208 x 60, numeric
  australian.csv  label column `approved` (yes/no)      690 x 14, mixed

WDBC ships with scikit-learn, so it works offline. The others need network
access to the UCI archive; failures are reported and skipped so that partial
environments still get everything that is reachable.
"""

import csv
import io
import os
import sys
import urllib.request

OUT_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"


def write_csv(name, header, rows):
    path = os.path.join(OUT_DIR, name)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} records, {len(header) - 1} features)")


def fetch(url):
    with urllib.request.urlopen(url, timeout=30) as resp:
        return io.TextIOWrapper(resp, encoding="utf-8").read()


def wdbc():
    try:
        from sklearn.datasets import load_breast_cancer
    except ImportError:
        print("wdbc: scikit-learn not installed, trying the UCI archive", file=sys.stderr)
        raw = fetch(f"{UCI}/breast-cancer-wisconsin/wdbc.data")
        rows = []
        for line in raw.strip().splitlines():
            parts = line.split(",")
            rows.append(parts[2:] + [parts[1]])  # drop the id, move label last
        header = [f"a{i}" for i in range(30)] + ["diagnosis"]
        write_csv("wdbc.csv", header, rows)
        return
    bunch = load_breast_cancer()
    header = [n.replace(" ", "_") for n in bunch.feature_names] + ["diagnosis"]
    rows = []
    for x, y in zip(bunch.data, bunch.target):
        # sklearn target 0 = malignant, 1 = benign
        rows.append([repr(float(v)) for v in x] + ["M" if y == 0 else "B"])
    write_csv("wdbc.csv", header, rows)


def heart():
    raw = fetch(f"{UCI}/statlog/heart/heart.dat")
    header = [
        "age", "sex", "chest_pain", "rest_bp", "cholesterol", "fasting_sugar",
        "rest_ecg", "max_hr", "angina", "oldpeak", "slope", "vessels", "thal",
        "disease",
    ]
    rows = []
    for line in raw.strip().splitlines():
        parts = line.split()
        rows.append(parts[:-1] + ["yes" if parts[-1] == "2" else "no"])
    write_csv("heart.csv", header, rows)
    schema = {
        "sex": "categorical", "chest_pain": "categorical",
        "fasting_sugar": "categorical", "rest_ecg": "categorical",
        "angina": "categorical", "slope": "categorical", "thal": "categorical",
    }
    import json
    path = os.path.join(OUT_DIR, "heart.csv.schema.json")
    with open(path, "w") as fh:
        json.dump(schema, fh, indent=2)
    print(f"wrote {path}")


def ionosphere():
    raw = fetch(f"{UCI}/ionosphere/ionosphere.data")
    rows = [line.split(",") for line in raw.strip().splitlines()]
    header = [f"a{i}" for i in range(34)] + ["cls"]
    write_csv("ionosphere.csv", header, rows)


def sonar():
    raw = fetch(f"{UCI}/undocumented/connectionist-bench/sonar/sonar.all-data")
    rows = [line.split(",") for line in raw.strip().splitlines()]
    header = [f"a{i}" for i in range(60)] + ["cls"]
    write_csv("sonar.csv", header, rows)


def australian():
    raw = fetch(f"{UCI}/statlog/australian/australian.dat")
    header = [f"a{i}" for i in range(14)] + ["approved"]
    rows = []
    for line in raw.strip().splitlines():
        parts = line.split()
        rows.append(parts[:-1] + ["yes" if parts[-1] == "1" else "no"])
    write_csv("australian.csv", header, rows)
    schema = {f"a{i}": "categorical" for i in (0, 3, 4, 5, 7, 8, 10, 11)}
    import json
    path = os.path.join(OUT_DIR, "australian.csv.schema.json")
    with open(path, "w") as fh:
        json.dump(schema, fh, indent=2)
    print(f"wrote {path}")


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    failures = []
    for name, job in [("wdbc", wdbc), ("heart", heart), ("ionosphere", ionosphere),
                      ("sonar", sonar), ("australian", australian)]:
        try:
            job()
        except Exception as e:  # noqa: BLE001 - report and continue
            failures.append(name)
            print(f"{name}: fetch failed ({e})", file=sys.stderr)
    if failures:
        print(f"\nunavailable in this environment: {', '.join(failures)}", file=sys.stderr)
        print("experiments and tests skip datasets that are missing", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
