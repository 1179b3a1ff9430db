#!/usr/bin/env python3
"""Checks a case file against the benchmark parameter table.

usage: validate_cases.py CASES.jsonl [EXPECTED_COUNT]
Exits 0 when every record is admissible, 1 otherwise.
"""
import json
import sys

FUNCTIONS = {"Office", "Residential", "Mall", "Hospital", "School", "Factory"}
INTENSITIES = {7.0, 7.5, 8.0, 8.5, 9.0}
PGAS = {0.10, 0.15, 0.20, 0.30, 0.40}
GROUPS = {1, 2, 3}
SITES = {"I0", "I1", "II", "III", "IV"}
FIELDS = {"id", "function", "stories", "story_height", "plan_length", "plan_width",
          "seismic_intensity", "pga", "seismic_group", "site_class", "t_gt"}


def problems(rec):
    out = []
    if set(rec) != FIELDS:
        out.append(f"fields {sorted(set(rec) ^ FIELDS)}")
        return out
    if rec["function"] not in FUNCTIONS:
        out.append("function")
    if not (isinstance(rec["stories"], int) and 3 <= rec["stories"] <= 7):
        out.append("stories")
    if not 3.0 <= rec["story_height"] <= 4.0:
        out.append("story_height")
    if not rec["stories"] * rec["story_height"] < 23.0:
        out.append("total height")
    if not (40.0 <= rec["plan_width"] <= rec["plan_length"] <= 100.0):
        out.append("plan")
    if rec["seismic_intensity"] not in INTENSITIES:
        out.append("intensity")
    if rec["pga"] not in PGAS:
        out.append("pga")
    if rec["seismic_group"] not in GROUPS:
        out.append("group")
    if rec["site_class"] not in SITES:
        out.append("site")
    h = rec["stories"] * rec["story_height"]
    if not (rec["t_gt"] > 0 and abs(rec["t_gt"] - 0.0466 * h ** 0.9) <= 1e-9 * rec["t_gt"]):
        out.append("t_gt")
    return out


def main():
    lines = [l for l in open(sys.argv[1]).read().splitlines() if l.strip()]
    bad = 0
    ids = set()
    for n, line in enumerate(lines, 1):
        rec = json.loads(line)
        p = problems(rec)
        if rec.get("id") in ids:
            p.append("duplicate id")
        ids.add(rec.get("id"))
        if p:
            bad += 1
            print(f"line {n}: {', '.join(p)}")
    if len(sys.argv) > 2 and len(lines) != int(sys.argv[2]):
        print(f"expected {sys.argv[2]} records, found {len(lines)}")
        bad += 1
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
