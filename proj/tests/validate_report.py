"""Checks `ogf bench` JSON output against the report schema."""

import json
import subprocess
import sys

import jsonschema


def main() -> int:
    binary, schema_path = sys.argv[1], sys.argv[2]
    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)
    for args in (
        ["bench", "--network", "t1", "--count", "3", "--methods", "cold-ccp,oracle", "--no-timing"],
        ["bench", "--network", "net7", "--count", "2", "--methods", "cold-ccp", "--baseline-restarts", "1"],
    ):
        out = subprocess.run([binary, *args], check=True, capture_output=True, text=True).stdout
        report = json.loads(out)
        jsonschema.validate(report, schema)
        print("valid:", " ".join(args))
    return 0


if __name__ == "__main__":
    sys.exit(main())
