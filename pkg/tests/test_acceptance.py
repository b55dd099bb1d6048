"""One test per acceptance row; each prints a PASS/FAIL line with its measured deviation."""

from __future__ import annotations

import pytest

from pstgraphs.acceptance import fixture_rows, run_row

RESULTS: dict[int, str] = {}


def test_every_row_has_a_fixture():
    assert fixture_rows() == list(range(1, 17))


@pytest.mark.parametrize("row", fixture_rows())
def test_acceptance_row(row):
    result = run_row(row)
    RESULTS[row] = result.line()
    print(result.line())
    assert result.passed, result.line()
