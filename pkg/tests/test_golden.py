import time

from qmtresum.golden import load_tables, table_names, verify_tables


def test_table_names():
    assert table_names() == ["quartic", "sextic", "ddim3", "ddim4", "ddim5", "ddim6"]


def test_all_tables_match():
    start = time.time()
    results = verify_tables()
    assert time.time() - start < 60
    for name, (checked, bad) in results.items():
        assert checked > 0 and not bad, (name, bad[:3])


def test_only_filter():
    assert list(verify_tables("sextic")) == ["sextic"]
    assert list(verify_tables("ddim")) == ["ddim3", "ddim4", "ddim5", "ddim6"]


def test_corrupted_entry_is_named():
    tables = load_tables()
    broken = {**tables, "sextic": {**tables["sextic"], "c12": list(tables["sextic"]["c12"])}}
    broken["sextic"]["c12"][4] = "1/3"
    checked, bad = verify_tables("sextic", broken)["sextic"]
    assert len(bad) == 1
    assert "c12" in str(bad[0]) and "1/3" in str(bad[0])
