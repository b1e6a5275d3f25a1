#!/usr/bin/env python3
"""Run the qkm CLI, validate every JSON-lines row against the report schema
and recompute the aggregate means from the trial rows."""

import argparse
import json
import math
import pathlib
import subprocess
import sys

import jsonschema

RUNS = [
    ("noiseless", ["--trials", "4"]),
    ("outlier", ["--delta", "0.2", "--eps", "0.2", "--trials", "4"]),
    ("outlier", ["--delta", "0.2", "--eps", "0.2", "--gamma", "inf", "--trials", "2"]),
    ("noisy", ["--pe", "0.1", "--delta", "0.3", "--eps", "0.3", "--trials", "3"]),
    ("noisy", ["--pe", "0.1", "--trials", "2"]),
    ("noisy-outlier", ["--pe", "0.1", "--delta", "0.3", "--eps", "0.3", "--trials", "2"]),
]

MEAN_FIELDS = [
    "draws", "queries_total", "queries_phase1", "queries_phase2", "distinct_pairs",
    "potential_achieved", "potential_ratio", "misclassification_ratio",
    "outlier_precision", "outlier_recall",
]


def close(a, b):
    if a is None or b is None:
        return a is b
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def check_file(path, validator):
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    problems = []
    for i, row in enumerate(rows):
        for err in validator.iter_errors(row):
            problems.append(f"{path.name}:{i + 1}: {err.message}")
    trials = [r for r in rows if r.get("row") == "trial"]
    aggs = [r for r in rows if r.get("row") == "aggregate"]
    if len(aggs) != 1 or rows[-1] is not aggs[0]:
        return problems + [f"{path.name}: expected exactly one trailing aggregate row"]
    agg = aggs[0]
    done = [r for r in trials if r["error"] is None]
    if agg["trials"] != len(trials) or agg["completed"] != len(done):
        problems.append(f"{path.name}: aggregate counts disagree with trial rows")
    for field in MEAN_FIELDS:
        vals = [r[field] for r in done if r[field] is not None]
        want = sum(vals) / len(vals) if vals else None
        if not close(agg["means"][field], want):
            problems.append(f"{path.name}: mean {field} {agg['means'][field]} != {want}")
    for name, chk in agg["bound_checks"].items():
        if chk["holds"] != (chk["mean"] <= chk["bound"]):
            problems.append(f"{path.name}: bound check {name} inconsistent")
    return problems


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qkm", required=True)
    ap.add_argument("--schema", required=True)
    ap.add_argument("--workdir", required=True)
    args = ap.parse_args()

    work = pathlib.Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    schema = json.loads(pathlib.Path(args.schema).read_text())
    validator = jsonschema.Draft202012Validator(schema)

    datasets = {}
    for po in ("0", "0.1"):
        datasets[po] = work / f"data_po{po}.csv"
        subprocess.run([args.qkm, "gen", "--n", "2500", "--k", "3", "--po", po,
                        "--seed", "21", "--out", str(datasets[po])],
                       check=True, stdout=subprocess.DEVNULL)
    problems = []
    for i, (algorithm, extra) in enumerate(RUNS):
        out = work / f"run{i}_{algorithm}.jsonl"
        data = datasets["0" if algorithm in ("noiseless", "noisy") else "0.1"]
        rc = subprocess.run([args.qkm, "run", algorithm, str(data), "--seed", "3",
                             "--out", str(out)] + extra,
                            stderr=subprocess.DEVNULL).returncode
        if rc not in (0, 1):
            problems.append(f"{out.name}: exit code {rc}")
            continue
        problems += check_file(out, validator)
        print(f"{out.name}: exit {rc}, checked")

    for p in problems:
        print("FAIL", p)
    print("report schema:", "FAIL" if problems else "PASS")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
