"""Regenerate the pinned CLI fixtures in tests/fixtures (run only when outputs change on purpose)."""

import os
import sys
import tempfile
from contextlib import redirect_stdout
from io import StringIO
from pathlib import Path

from enumdist.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

RUNS = {
    "enumerate_stage12.csv": ["enumerate", "--stage", "12"],
    "deficiency_lambda_stage12_depth12.csv": ["report-deficiency", "--stage", "12", "--sample-depth", "12"],
}


def run(argv: list[str]) -> str:
    buf = StringIO()
    with tempfile.TemporaryDirectory() as tmp:
        os.environ["ENUMDIST_SNAPSHOT_DIR"] = tmp
        with redirect_stdout(buf):
            code = main(argv)
    if code:
        sys.exit(f"{argv} exited with {code}")
    return buf.getvalue()


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for name, argv in RUNS.items():
        (FIXTURES / name).write_text(run(argv))
        print("wrote", FIXTURES / name)
