# Copyright 2026 The STSA Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs the CLI report subcommand and validates its JSON against the schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main() -> int:
    cli, schema_path = sys.argv[1], pathlib.Path(sys.argv[2])
    schema = json.loads(schema_path.read_text())
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([cli, "--seed", "3", "--out-dir", tmp, "report", "--dims", "8,8,8,4"],
                       check=True, stdout=subprocess.DEVNULL)
        report = json.loads((pathlib.Path(tmp) / "report.json").read_text())
        rows = (pathlib.Path(tmp) / "report.csv").read_text().splitlines()
    jsonschema.validate(report, schema)
    if len(rows) != len(report["runs"]) + 1:
        print(f"csv has {len(rows)} lines for {len(report['runs'])} runs")
        return 1
    print(f"report.json valid, {len(report['runs'])} runs")
    return 0


if __name__ == "__main__":
    sys.exit(main())
