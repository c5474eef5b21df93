#!/usr/bin/env python3
"""Builds the birth-weight regression fixture from the raw MASS::birthwt CSV.

The dataset itself is not bundled. Export it from R first:

    write.csv(MASS::birthwt, "birthwt_raw.csv", row.names = FALSE)

then run

    python3 tools/prepare_birthwt.py birthwt_raw.csv out_dir

which writes out_dir/birthwt_design.csv (16 predictors in 8 groups plus the
response column bwt_kg, birth weight in kilograms) and
out_dir/birthwt_groups.csv. Encoding: mother's age and weight enter as
third-order polynomials (centered before taking powers, which spans the same
cubic model but keeps the columns well conditioned); race contributes dummies
for black/other (white baseline); previous premature labors is coded as
{0, 1, 2+} and first-trimester physician visits as {0, 1, 2, 3+} with the
zero level as baseline; smoking, hypertension, and uterine irritability stay
binary.
"""

import csv
import sys


GROUPS = {
    "age": ["age1", "age2", "age3"],
    "lwt": ["lwt1", "lwt2", "lwt3"],
    "race": ["race_black", "race_other"],
    "smoke": ["smoke"],
    "ptl": ["ptl_1", "ptl_2plus"],
    "ht": ["ht"],
    "ui": ["ui"],
    "ftv": ["ftv_1", "ftv_2", "ftv_3plus"],
}


def encode(rows):
    age_mean = sum(r["age"] for r in rows) / len(rows)
    lwt_mean = sum(r["lwt"] for r in rows) / len(rows)
    out = []
    for r in rows:
        a = r["age"] - age_mean
        w = r["lwt"] - lwt_mean
        rec = {
            "age1": a, "age2": a ** 2, "age3": a ** 3,
            "lwt1": w, "lwt2": w ** 2, "lwt3": w ** 3,
            "race_black": 1.0 if r["race"] == 2 else 0.0,
            "race_other": 1.0 if r["race"] == 3 else 0.0,
            "smoke": float(r["smoke"]),
            "ptl_1": 1.0 if r["ptl"] == 1 else 0.0,
            "ptl_2plus": 1.0 if r["ptl"] >= 2 else 0.0,
            "ht": float(r["ht"]),
            "ui": float(r["ui"]),
            "ftv_1": 1.0 if r["ftv"] == 1 else 0.0,
            "ftv_2": 1.0 if r["ftv"] == 2 else 0.0,
            "ftv_3plus": 1.0 if r["ftv"] >= 3 else 0.0,
            "bwt_kg": r["bwt"] / 1000.0,
        }
        out.append(rec)
    return out


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    raw_path, out_dir = sys.argv[1], sys.argv[2]

    with open(raw_path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append({k: float(row[k]) for k in
                         ("age", "lwt", "race", "smoke", "ptl", "ht", "ui",
                          "ftv", "bwt")})
            rows[-1].update({k: int(rows[-1][k]) for k in
                             ("race", "smoke", "ptl", "ht", "ui", "ftv")})
    if not rows:
        sys.exit("no rows in " + raw_path)

    encoded = encode(rows)
    columns = [c for cols in GROUPS.values() for c in cols]

    with open(f"{out_dir}/birthwt_design.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns + ["bwt_kg"])
        for rec in encoded:
            writer.writerow([repr(rec[c]) for c in columns] +
                            [repr(rec["bwt_kg"])])

    with open(f"{out_dir}/birthwt_groups.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["column", "group"])
        for group, cols in GROUPS.items():
            for c in cols:
                writer.writerow([c, group])

    print(f"wrote {len(encoded)} rows, {len(columns)} predictors, "
          f"{len(GROUPS)} groups")


if __name__ == "__main__":
    main()
