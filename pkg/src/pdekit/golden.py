"""Golden-file regression over a corpus of ``.pde`` files.

Each file starts with a header line ``# pdekit: <command> [args]``.  The JSON
envelope of that command is compared with ``<stem>.expected.json`` sitting next
to it; ``timing`` and ``tool_version`` are ignored.

    python -m pdekit.golden corpus/            # check
    python -m pdekit.golden corpus/ --regold   # rewrite expectations
"""
from __future__ import annotations

import argparse
import io
import json
import shlex
import sys
from dataclasses import dataclass
from pathlib import Path

from .cli import run

HEADER = "# pdekit:"
VOLATILE = ("timing", "tool_version")


@dataclass
class GoldenCase:
    path: Path
    argv: list

    @property
    def expected_path(self) -> Path:
        return self.path.with_suffix(".expected.json")


def read_case(path: Path) -> GoldenCase:
    first = path.read_text(encoding="utf-8").splitlines()[0]
    if not first.startswith(HEADER):
        raise ValueError(f"{path.name}: missing '{HEADER}' header")
    words = shlex.split(first[len(HEADER):])
    return GoldenCase(path, [words[0], str(path)] + words[1:])


def cases(corpus: Path) -> list[GoldenCase]:
    return [read_case(p) for p in sorted(Path(corpus).glob("*.pde"))]


def produce(case: GoldenCase) -> tuple[int, dict]:
    buf = io.StringIO()
    code = run(case.argv + ["--json"], stdout=buf)
    env = json.loads(buf.getvalue())
    for k in VOLATILE:
        env.pop(k, None)
    return code, env


def check(case: GoldenCase) -> list[str]:
    """Differences between the current output and the stored expectation."""
    if not case.expected_path.exists():
        return [f"{case.expected_path.name} is missing"]
    code, env = produce(case)
    want = json.loads(case.expected_path.read_text(encoding="utf-8"))
    for k in VOLATILE:
        want.pop(k, None)
    diffs = []
    if code != want.get("exit_code", 0):
        diffs.append(f"exit code {code}, expected {want.get('exit_code', 0)}")
    want.pop("exit_code", None)
    for key in sorted(set(env) | set(want)):
        if env.get(key) != want.get(key):
            diffs.append(f"field {key!r} differs")
    return diffs


def regold(case: GoldenCase) -> None:
    code, env = produce(case)
    if code:
        env["exit_code"] = code
    case.expected_path.write_text(json.dumps(env, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
                                  encoding="utf-8")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m pdekit.golden")
    ap.add_argument("corpus", nargs="?", default="corpus")
    ap.add_argument("--regold", action="store_true")
    args = ap.parse_args(argv)
    failed = 0
    for case in cases(Path(args.corpus)):
        if args.regold:
            regold(case)
            print(f"wrote {case.expected_path.name}")
            continue
        diffs = check(case)
        status = "ok" if not diffs else "FAIL"
        print(f"{status:4} {case.path.name}" + ("".join(f"\n     {d}" for d in diffs)))
        failed += bool(diffs)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
