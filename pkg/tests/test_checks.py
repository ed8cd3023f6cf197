import pytest

from polqkd.checks import emit_transform_table, run_checks, transform_table
from polqkd.jones import NAMED_LABELS, StateLabel
from polqkd.tracking import TrackingMode

S = StateLabel


def test_all_checks_pass():
    results = run_checks()
    assert results and all(r.passed for r in results)


def test_sign_flip_mutation_is_caught():
    failed = {r.name for r in run_checks(mutation="hwp-sign") if not r.passed}
    assert any(name.startswith("mirror law") for name in failed)


def test_unknown_mutation():
    with pytest.raises(ValueError):
        run_checks(mutation="bogus")


def test_transform_table_rows():
    table = transform_table()
    assert table[TrackingMode.FARADAY][S.D45] == [S.D45] * 3
    assert table[TrackingMode.HALF_WAVE_PLATE][S.L] == [S.R] * 3
    assert table[TrackingMode.NONE][S.L] == [S.L] * 3
    for s in NAMED_LABELS:
        # HWP rows do not depend on theta
        assert len(set(table[TrackingMode.HALF_WAVE_PLATE][s])) == 1


def test_emit_transform_table_shape():
    text = emit_transform_table((0.1, 0.2))
    lines = text.splitlines()
    assert lines[0].split() == ["mode", "state", "theta=0.1", "theta=0.2"]
    assert len(lines) == 1 + 3 * 6
