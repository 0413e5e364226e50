#!/usr/bin/env python3
"""Run the CLI on small cases and check every artifact against docs/schema."""
import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

CSV_COLUMNS = {
    "benchmark.csv": ["x", "v", "control", "v_minus_identity"],
    "equilibrium.csv": ["x", "a_star", "b_star", "v_a", "v_b"],
    "sim_checkpoints.csv": ["t", "mean", "mean_abs_dist", "frac_converged", "mean_increment", "se", "dist_se"],
    "sweep.csv": ["impatience", "r_a", "c_a", "x_a0", "x_b0", "regime", "stable_lo", "stable_hi",
                  "sso_ok", "containment_ok"],
}
JSON_SCHEMA = {
    "benchmark.json": "benchmark.json",
    "equilibrium.json": "equilibrium.json",
    "sim.json": "simulation.json",
    "sweep.json": "sweep.json",
}


def runs(cli, out):
    eq = ["--ra", "1", "--ca", "2", "--rb", "1", "--cb", "2", "--xbar", "mid", "--n", "401"]
    yield [cli, "benchmark", "--r", "7", "--c", "15", "--n", "401", "--out", str(out / "bench")]
    yield [cli, "benchmark", "--r", "7", "--c", "15", "--domain-hi", "0.2", "--n", "401", "--out", str(out / "absorbed")]
    yield [cli, "equilibrium", *eq, "--out", str(out / "det")]
    yield [cli, "equilibrium", "--ra", "7", "--ca", "15", "--rb", "7", "--cb", "15", "--n", "401", "--out", str(out / "acc")]
    yield [cli, "simulate", *eq, "--paths", "64", "--t-max", "2", "--dt", "1e-3", "--out", str(out / "sim")]
    yield [cli, "sweep", "--ra", "7", "--points", "5", "--n", "401", "--welfare", "--out", str(out / "sweep")]


def check_csv(path, expected):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header = rows[0]
    for i, name in enumerate(expected):
        if i >= len(header) or header[i] != name:
            return f"{path}: column {i + 1} should be '{name}'"
    if len(header) != len(expected):
        return f"{path}: unexpected column '{header[len(expected)]}'"
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            return f"{path}: row {k} has {len(row)} fields"
    return None


def main():
    cli, schema_dir = sys.argv[1], Path(sys.argv[2])
    schemas = {k: json.loads((schema_dir / v).read_text()) for k, v in JSON_SCHEMA.items()}
    failures = []
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        for cmd in runs(cli, out):
            done = subprocess.run(cmd, capture_output=True, text=True)
            if done.returncode != 0:
                failures.append(f"{' '.join(cmd[1:3])}: exit {done.returncode}: {done.stderr.strip()}")
        seen = 0
        for path in sorted(out.rglob("*")):
            if path.name in CSV_COLUMNS:
                seen += 1
                if msg := check_csv(path, CSV_COLUMNS[path.name]):
                    failures.append(msg)
            elif path.name in schemas:
                seen += 1
                try:
                    jsonschema.validate(json.loads(path.read_text()), schemas[path.name])
                except jsonschema.ValidationError as e:
                    where = "/".join(str(p) for p in e.absolute_path) or "<root>"
                    failures.append(f"{path}: {where}: {e.message}")
        if seen != 12:
            failures.append(f"expected 12 artifacts, found {seen}")
    for f in failures:
        print("FAIL", f)
    print(f"{len(failures)} schema problems")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
