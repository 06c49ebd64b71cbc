import logging

import numpy as np
import pytest

from threerank.core_arith import field_discriminant, is_fundamental
from threerank.quad_class import ClassGroupTable, class_group
from threerank.quad_class.table import CACHE_COLUMNS, append_cache, read_cache

DISCS = [D for D in range(-400, 400) if D != 1 and is_fundamental(D)]


def test_table_matches_direct(tmp_path):
    t = ClassGroupTable()
    t.ensure(DISCS)
    for D in DISCS:
        assert t.info(D) == class_group(D)


def test_cache_roundtrip(tmp_path):
    path = tmp_path / "cache.csv"
    t = ClassGroupTable(path)
    t.ensure(DISCS)
    assert path.read_text().splitlines()[0] == ",".join(CACHE_COLUMNS)
    loaded = read_cache(path)
    assert sorted(loaded) == sorted(DISCS)
    again = ClassGroupTable(path)
    assert len(again) == len(DISCS)
    assert again.infos() == t.infos()
    size = path.stat().st_size
    again.ensure(DISCS)
    assert path.stat().st_size == size


def test_cache_header_written_once(tmp_path):
    path = tmp_path / "c.csv"
    append_cache(path, [class_group(-23)])
    append_cache(path, [class_group(229)])
    lines = path.read_text().splitlines()
    assert lines == ["disc,h_narrow,h,invariant_factors", "-23,3,3,3", "229,3,3,3"]


def test_corrupt_rows_skipped(tmp_path, caplog):
    path = tmp_path / "bad.csv"
    path.write_text(
        "disc,h_narrow,h,invariant_factors\n"
        "-23,3,3,3\n"
        "-12,2,2,2\n"       # not fundamental
        "-47,5,5,3\n"       # wrong product
        "-84,4,4,4;1\n"     # not a divisor chain
        "garbage\n"
        "316,6,3,6\n"
    )
    with caplog.at_level(logging.WARNING):
        loaded = read_cache(path)
    assert sorted(loaded) == [-23, 316]
    assert "skipping corrupt" in caplog.text


def test_wrong_header_ignored(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("d,h\n-23,3\n")
    assert read_cache(path) == {}


def test_missing_cache_is_empty(tmp_path):
    assert read_cache(tmp_path / "none.csv") == {}


def test_ensure_rejects_nonfundamental():
    with pytest.raises(ValueError):
        ClassGroupTable().ensure([-12])


def test_vector_lookups():
    t = ClassGroupTable()
    ns = np.array([-23, -4027, 79, 16, -1, 229 * 4])
    assert t.class_numbers_of(ns).tolist() == [3, 9, 3, 1, 1, 3]
    assert t.p_ranks_of(ns).tolist() == [1, 2, 1, 0, 0, 1]
    assert t.class_numbers([1]).tolist() == [1]
    assert t.p_ranks([1, 1]).tolist() == [0, 0]
    fd = [field_discriminant(n) for n in range(-300, 0)]
    assert t.class_numbers(fd).tolist() == [class_group(D).h for D in fd]


def test_workers_env(monkeypatch):
    monkeypatch.setenv("THREERANK_WORKERS", "1")
    t = ClassGroupTable()
    assert t.info(-23).h == 3


def test_empty_table_is_used_not_replaced(tmp_path):
    from threerank.experiments import avg_torsion

    path = tmp_path / "fresh.csv"
    t = ClassGroupTable(path)
    assert len(t) == 0
    avg_torsion(500, "fundamental:1:1:+", table=t)
    assert len(t) > 0 and path.exists()
