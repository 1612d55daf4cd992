from __future__ import annotations

import json

import pytest

from pdekit import golden

from conftest import CORPUS

CASES = golden.cases(CORPUS)


@pytest.mark.parametrize("case", CASES, ids=[c.path.stem for c in CASES])
def test_corpus_matches_golden(case):
    assert golden.check(case) == []


def test_every_case_has_an_expectation():
    assert len(CASES) >= 20
    assert all(c.expected_path.exists() for c in CASES)


def test_regold_and_check(tmp_path):
    src = CORPUS / "permuted_pair.pde"
    copy = tmp_path / "permuted_pair.pde"
    copy.write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
    case = golden.read_case(copy)
    assert golden.check(case) == ["permuted_pair.expected.json is missing"]
    golden.regold(case)
    assert golden.check(case) == []
    data = json.loads(case.expected_path.read_text(encoding="utf-8"))
    data["result"]["order"] = 99
    case.expected_path.write_text(json.dumps(data), encoding="utf-8")
    assert golden.check(case) == ["field 'result' differs"]


def test_header_is_required(tmp_path):
    p = tmp_path / "plain.pde"
    p.write_text("field Q\nvars x\nunknowns y\n", encoding="utf-8")
    with pytest.raises(ValueError):
        golden.read_case(p)


def test_runner_exit_status(tmp_path, capsys):
    assert golden.main([str(CORPUS)]) == 0
    assert "FAIL" not in capsys.readouterr().out
