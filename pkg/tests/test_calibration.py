import json

import pytest

from talagrand_lab import calibration as cal

IDS = sorted(cal.CORPORA)


def test_round_up():
    assert cal.round_up(1.3563) == 1.36
    assert cal.round_up(0.0004441) == 0.000445
    assert cal.round_up(2.0) == 2.0
    assert cal.round_up(0.0) == 0.0


def test_table_covers_every_corpus():
    table = cal.frozen_table()
    assert set(table) == set(IDS)
    for k, entry in table.items():
        assert entry["value"] == cal.round_up(entry["sup_ratio"] * entry["margin"])


def test_corpora_are_deterministic():
    a = [n for n, _ in cal.corpus("theorem8", 11)]
    b = [n for n, _ in cal.corpus("theorem8", 11)]
    assert a == b
    with pytest.raises(KeyError):
        cal.corpus("nope", 1)


@pytest.mark.parametrize("cid", IDS)
def test_frozen_value_reproduces(cid):
    r = cal.calibrate(cid, cal.frozen_seed(cid))
    assert r.value == cal.frozen_constant(cid)
    assert r.corpus_size > 0


@pytest.mark.parametrize("cid", IDS)
def test_frozen_corpus_passes(cid):
    reports = cal.check_corpus(cid, cal.frozen_seed(cid))
    assert all(r.passed for r in reports)


@pytest.mark.parametrize("cid", IDS)
def test_held_out_corpus_passes(cid):
    reports = cal.check_corpus(cid, cal.frozen_seed(cid) + 1000)
    assert [r.model for r in reports if not r.passed] == []


def test_needed_constant_conventions():
    from talagrand_lab.report import InequalityReport

    assert cal.needed_constant(InequalityReport("x", "m", 0.0, 0.0, 1.0)) == 0.0
    assert cal.needed_constant(InequalityReport("x", "m", 1.0, 0.0, 1.0)) == float("inf")
    assert cal.needed_constant(InequalityReport("x", "m", 1.0, 4.0, 1.0)) == 0.25


def test_write_frozen_roundtrip(monkeypatch, tmp_path):
    (tmp_path / "data").mkdir()
    (tmp_path / "data" / cal.DATA_FILE).write_text("{}")
    monkeypatch.setattr(cal.resources, "files", lambda _pkg: tmp_path)
    result = cal.CalibrationResult("theorem8", 9, 3, 0.5, "w", 0.625)
    cal.write_frozen(result)
    stored = json.loads((tmp_path / "data" / cal.DATA_FILE).read_text())
    assert stored["theorem8"]["value"] == 0.625
    assert cal.frozen_constant("theorem8") == 0.625
    monkeypatch.undo()
    cal._FROZEN = None
    assert cal.frozen_constant("theorem8") != 0.625
