#!/usr/bin/env python3
"""Regenerate the cross-component test fixtures in test/fixtures/.

Everything here comes from the installed rehabglove package, so the UI
tests compare against the pipeline's own numbers rather than a re-derived
copy. Rerun after any change to the actuator geometry or the wire format:

    python3 scripts/make_fixtures.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from rehabglove.actuator import V1, V2, bend_angles, default_spec, trajectory_from_angles

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def chain_cases() -> list[dict]:
    cases = []

    def add(version: str, n: int, angles: list[float]) -> None:
        spec = default_spec(version, n)
        pts = trajectory_from_angles(spec, angles)
        cases.append(
            {
                "version": version,
                "n_segments": n,
                "segment_length_mm": spec.segment_length_mm,
                "angles_deg": [float(a) for a in angles],
                "points_mm": [[float(x), float(y)] for x, y in pts],
            }
        )

    # pressure-driven uniform angles across the characterized range
    for version, n_list in ((V1, (9, 10)), (V2, (7, 9, 10))):
        for n in n_list:
            spec = default_spec(version, n)
            for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
                add(version, n, bend_angles(spec, frac * spec.max_pressure_kpa))

    # saturated curl and assorted non-uniform profiles
    add(V2, 10, [45.0] * 10)
    add(V1, 9, [45.0] * 9)
    add(V2, 8, [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0])
    add(V1, 7, [12.5, 0.0, 44.0, 3.0, 27.75, 9.0, 41.5])
    add(V2, 9, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])
    return cases


def session_fixture() -> None:
    """Record a short session and its replayed wire stream."""
    with tempfile.TemporaryDirectory() as td:
        tmp = Path(td)

        def cli(*args: str) -> str:
            res = subprocess.run(
                [sys.executable, "-m", "rehabglove.cli", *args],
                capture_output=True,
                text=True,
                check=True,
            )
            return res.stdout

        cli("gen", "--kind", "grasp", "--count", "8", "--seed", "42",
            "--out", str(tmp / "g.csv"))
        cli("gen", "--kind", "release", "--count", "8", "--seed", "43",
            "--out", str(tmp / "r.csv"))
        cli("train", "--data", f"grasp:{tmp / 'g.csv'}",
            "--data", f"release:{tmp / 'r.csv'}", "--k", "3",
            "--out", str(tmp / "model.json"))
        cli("gen", "--kind", "grasp", "--count", "6", "--seed", "44",
            "--out", str(tmp / "source.csv"))
        cli("run", "--model", str(tmp / "model.json"),
            "--source", str(tmp / "source.csv"), "--seed", "7",
            "--log", str(tmp / "session.ndjson"))
        stream = cli("replay", "--log", str(tmp / "session.ndjson"), "--fast")

        (FIXTURES / "session.ndjson").write_text(
            (tmp / "session.ndjson").read_text(encoding="utf-8"), encoding="utf-8"
        )
        (FIXTURES / "stream.ndjson").write_text(stream, encoding="utf-8")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "chains.json").write_text(
        json.dumps(chain_cases(), indent=1) + "\n", encoding="utf-8"
    )
    session_fixture()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
