"""Runs the CLI's --json outputs through the schemas shipped in docs/."""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def run(cli, *args):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(args)} failed ({proc.returncode}): {proc.stderr}")
    return proc.stdout


def main():
    cli, docs, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    work.mkdir(parents=True, exist_ok=True)

    schemas = {name: json.loads((docs / name).read_text()) for name in ("report.schema.json", "scan.schema.json")}
    registry = Registry().with_resources(
        (s["$id"], Resource.from_contents(s)) for s in schemas.values()
    )

    def check(name, text):
        doc = json.loads(text)
        cls = jsonschema.validators.validator_for(schemas[name])
        cls(schemas[name], registry=registry).validate(doc)

    csv = str(work / "ik.csv")
    run(cli, "generate", "--system", "ikeda", "--n", "1200", "--noise", "0.02", "--out", csv)
    check("report.schema.json", run(cli, "analyze", csv, "--target", "x", "--vars", "x@1,y@1", "--json"))
    check("report.schema.json", run(cli, "analyze", csv, "--target", "x", "--vars", "none", "--json",
                                    "--full-precision"))
    check("scan.schema.json", run(cli, "scan", csv, "--target", "x", "--lags-up-to", "3", "--json"))

    flat = work / "flat.csv"
    flat.write_text("x,c\n" + "".join(f"{(i * 7) % 11},1\n" for i in range(200)))
    subsets = work / "subsets.json"
    subsets.write_text(json.dumps({"subsets": ["none", ["c"], "c@1"]}))
    check("scan.schema.json", run(cli, "scan", str(flat), "--target", "x", "--subsets", str(subsets), "--json",
                                  "--min-count", "5"))
    print("all CLI JSON outputs validate")


if __name__ == "__main__":
    main()
