#!/usr/bin/env python3
# Copyright 2026 The apsel Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the apsel CLI: exit codes, artifacts, schemas."""

import csv
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

BIN, SOURCE, WORK = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
SCHEMAS = SOURCE / "schemas"

failures = []


def registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(schema)
        resources.append((path.name, Resource.from_contents(schema)))
    return Registry().with_resources(resources)


REGISTRY = registry()


def validate(path, schema_name):
    doc = json.loads(pathlib.Path(path).read_text())
    schema = json.loads((SCHEMAS / schema_name).read_text())
    validator = jsonschema.Draft202012Validator(schema, registry=REGISTRY)
    errors = sorted(validator.iter_errors(doc), key=str)
    check(not errors, f"{path} matches {schema_name}: {errors[:1]}")
    return doc


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args, expect=0, cwd=None):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, cwd=cwd)
    check(proc.returncode == expect,
          f"apsel {' '.join(map(str, args))} exits {expect} (got {proc.returncode}: {proc.stderr.strip().splitlines()[0][:200] if proc.stderr.strip() else ''})")
    return proc


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f, strict=True))
    check(len(rows) > 1 and all(len(r) == len(rows[0]) for r in rows), f"{path} is a rectangular CSV")
    return rows


def main():
    shutil.rmtree(WORK, ignore_errors=True)
    WORK.mkdir(parents=True)

    run("--help")
    run("gen-synthetic", "--out", WORK / "gen", "--seed", 5)
    data = WORK / "gen" / "synthetic.csv"
    rows = read_csv(data)
    check(rows[0][-1] == "FLOOR" and len(rows) == 2001, "synthetic CSV has 20 APs, FLOOR and 2000 rows")
    read_csv(WORK / "gen" / "synthetic_roles.csv")

    run("stats", "--data", data, "--out", WORK / "stats")
    validate(WORK / "stats" / "stats_summary.json", "stats_summary.schema.json")
    imp = read_csv(WORK / "stats" / "importance.csv")
    check(imp[0] == ["ap_id", "importance"] and len(imp) == 21, "importance.csv lists every AP")
    red = read_csv(WORK / "stats" / "redundancy.csv")
    check(len(red) == 21 and len(red[0]) == 20, "redundancy.csv is a 20 x 20 matrix under an id header")

    for solver in ("sa", "exhaustive"):
        out = WORK / f"solve-{solver}"
        run("solve", "--data", data, "--alpha", 0.5, "--solver", solver, "--seed", 2, "--sa-sweeps", 200,
            "--export-qubo", "--out", out)
        sol = validate(out / "solution.json", "solution.schema.json")
        check(sol["solver"] == solver and sol["k"] == len(sol["x"]), f"{solver} solution is consistent")
        read_csv(out / "qubo.csv")
    check(json.loads((WORK / "solve-sa" / "solution.json").read_text())["energy"]
          >= json.loads((WORK / "solve-exhaustive" / "solution.json").read_text())["energy"] - 1e-12,
          "annealing never beats the exact optimum")

    reports = []
    for name in ("auto-a", "auto-b"):
        run("auto", "--data", data, "--seed", 3, "--out", WORK / name)
        reports.append(validate(WORK / name / "report.json", "report.schema.json"))
        validate(WORK / name / "trace.json", "trace.schema.json")
        validate(WORK / name / "selection.json", "solution.schema.json")
        read_csv(WORK / name / "trace.csv")
        for artifact in reports[-1]["artifacts"]:
            check((WORK / name / artifact).exists(), f"{name}/{artifact} exists")
    for r in reports:
        r.pop("timings_ms")
    check(reports[0] == reports[1], "same seed gives the same report")
    for artifact in ("trace.csv", "trace.json", "selection.json"):
        check((WORK / "auto-a" / artifact).read_bytes() == (WORK / "auto-b" / artifact).read_bytes(),
              f"same seed gives byte-identical {artifact}")

    run("--config", SOURCE / "configs" / "synthetic.json", "auto", "--mode", "paper-faithful",
        "--out", WORK / "faithful")
    faithful = validate(WORK / "faithful" / "report.json", "report.schema.json")
    check(faithful["config"]["search"]["mode"] == "paper-faithful", "flags override the config file")

    run("sweep", "--data", data, "--solver", "exhaustive", "--points", 6, "--out", WORK / "sweep")
    trace = validate(WORK / "sweep" / "trace.json", "trace.schema.json")
    ks = [it["k"] for it in trace["iterations"]]
    check(len(ks) == 6 and ks[0] <= 1 and ks[-1] == 20, f"sweep spans k from <= 1 to n ({ks})")

    run("evaluate", "--data", data, "--seed", 3, "--selection", WORK / "auto-a" / "selection.json",
        "--out", WORK / "eval")
    ev = validate(WORK / "eval" / "evaluation.json", "accuracy.schema.json")
    check(ev["accuracy"] == reports[0]["accuracy"]["selected"]["accuracy"]
          and ev["n_aps_used"] == reports[0]["selection"]["k"], "evaluate reproduces the selected accuracy")
    run("evaluate", "--data", data, "--classifier", "forest", "--forest-trees", 10, "--out", WORK / "eval-forest")
    validate(WORK / "eval-forest" / "evaluation.json", "accuracy.schema.json")

    run("bench", "--data", data, "--solvers", "sa,exhaustive", "--sa-sweeps", 200, "--out", WORK / "bench")
    validate(WORK / "bench" / "bench.json", "bench.schema.json")
    read_csv(WORK / "bench" / "bench.csv")

    # Exit codes by error category.
    run("auto", "--bogus-flag", expect=2)
    run("solve", "--data", data, "--alpha", 2, expect=2)
    (WORK / "bad.json").write_text('{"bins": 1}')
    run("--config", WORK / "bad.json", "stats", "--data", data, "--out", WORK / "x", expect=2)
    (WORK / "unknown.json").write_text('{"binz": 4}')
    run("--config", WORK / "unknown.json", "stats", "--data", data, "--out", WORK / "x", expect=2)
    run("stats", "--data", WORK / "missing.csv", "--out", WORK / "x", expect=3)
    (WORK / "one-floor.csv").write_text("WAP1,WAP2,FLOOR\n-40,-50,0\n")
    run("stats", "--data", WORK / "one-floor.csv", "--out", WORK / "x", expect=3)
    (WORK / "cap.json").write_text('{"solver": {"name": "exhaustive", "exhaustive_cap": 8}}')
    run("--config", WORK / "cap.json", "solve", "--data", data, "--alpha", 0.5, "--out", WORK / "x", expect=4)
    (WORK / "empty-selection.json").write_text("[]")
    run("evaluate", "--data", data, "--selection", WORK / "empty-selection.json", "--out", WORK / "x", expect=5)

    # Partial artifacts survive a failing later stage.
    run("--config", WORK / "cap.json", "auto", "--data", data, "--out", WORK / "partial", expect=4)
    check((WORK / "partial" / "importance.csv").exists() and not (WORK / "partial" / "report.json").exists(),
          "statistics survive a solver failure")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
