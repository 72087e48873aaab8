"""Validates CLI JSON output and repository fixtures against the shipped schemas.

Usage: check_schemas.py <pipeline-pilot executable> <docs dir> <work dir>
"""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def load(path):
    return json.loads(pathlib.Path(path).read_text())


def run(exe, *args):
    proc = subprocess.run([exe, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr}")
    return proc.stdout


def main():
    exe, docs, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schemas = {name: load(docs / name) for name in
               ("pipeline.schema.json", "corpus.schema.json", "benchmark.schema.json")}
    registry = Registry().with_resources(
        (s["$id"], Resource.from_contents(s)) for s in schemas.values())

    def validator(name):
        return jsonschema.Draft202012Validator(schemas[name], registry=registry)

    if work.exists():
        shutil.rmtree(work)
    run(exe, "synth", "clustered", "--out", str(work), "--clusters", "2", "--per-cluster", "3",
        "--rows", "60", "--seed", "5")
    corpus_path = work / "corpus.jsonl"

    # One extra record whose own pipeline cannot run, so the artifact holds failed cells.
    lines = corpus_path.read_text().splitlines()
    broken = json.loads(lines[0])
    broken["id"] = "zz-broken"
    broken["pipelines"] = [{"source": "H", "pipeline": {"stages": [
        {"kind": "feature_selector", "primitive": "select_k_best", "params": {"k": 500}},
        {"kind": "estimator", "primitive": "decision_tree", "params": {}}]}}]
    lines.append(json.dumps(broken))
    corpus_path.write_text("\n".join(lines) + "\n")

    corpus_validator = validator("corpus.schema.json")
    for line in corpus_path.read_text().splitlines():
        corpus_validator.validate(json.loads(line))

    out_path = work / "bench.json"
    stdout = run(exe, "benchmark", "--corpus", str(corpus_path), "--format", "json",
                 "--sources", "H", "--sources", "G,H", "--protocol", "kfold:3",
                 "--out", str(out_path), "--no-timing")
    artifact = json.loads(stdout)
    if artifact != load(out_path):
        sys.exit("stdout and --out artifact differ")
    validator("benchmark.schema.json").validate(artifact)
    failed = [c for row in artifact["rows"] for c in row["cells"].values() if c["status"] == "failed"]
    if not failed:
        sys.exit("expected failed cells for the broken record")

    pipeline_validator = validator("pipeline.schema.json")
    fixtures = docs.parent / "tests" / "fixtures"
    # Stage ordering and parameter ranges are checked by the CLI, not the schema.
    structural = ["logistic_default.json", "five_stage.json", "majority_class.json", "blobs_logistic.json",
             "ordering_violation.json", "select_too_many.json"]
    for name in structural:
        pipeline_validator.validate(load(fixtures / name))
    if pipeline_validator.is_valid(load(fixtures / "unknown_primitive.json")):
        sys.exit("unknown_primitive.json should fail the pipeline schema")

    print(f"schemas ok: {len(lines)} corpus records, {len(artifact['rows'])} benchmark rows, "
          f"{len(failed)} failed cells")


if __name__ == "__main__":
    main()
