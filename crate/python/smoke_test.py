"""Smoke test for the Python bindings.

Build and install first:  pip install --no-build-isolation ./crates/py
Run:                      python python/smoke_test.py   (or pytest python/)
"""

import json
import math

import su2_paradiff_py as su2


def test_subcommands_listed():
    names = su2.subcommands()
    assert "selftest" in names and "cutoff-sweep" in names
    assert len(names) == 14


def test_product_support_is_the_clebsch_gordan_range():
    assert su2.product_support(0.5, 0.5) == [0.0, 1.0]
    assert su2.product_support(1.0, 1.5) == [0.5, 1.5, 2.5]


def test_clebsch_gordan_singlet():
    # <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt(2)
    assert abs(abs(su2.clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0.0, 0.0)) - 1 / math.sqrt(2)) < 1e-14


def test_weyl_count_small_t():
    # spins 0 and 1/2 have sqrt(lambda) = 0 and sqrt(3/8) < 1; spin 1 has 1
    count, ratio = su2.weyl_count(1.0)
    assert count == 1 + 4 + 9
    assert ratio == count


def test_selftest_runs_and_passes():
    r = su2.run("selftest", {"bandlimit": "2", "seed": "3"})
    assert r.passed, r.failures
    assert r.text.startswith("name,measured,lo,hi,pass\n")


def test_json_report_and_determinism():
    a = su2.run("localize", {"j1": "1", "j2": "0.5", "format": "json"})
    b = su2.run("localize", {"j1": "1", "j2": "0.5", "format": "json"})
    assert a.text == b.text
    assert a.passed
    body = json.loads(a.text)
    assert body["pass"] is True
    assert body["records"] and body["checks"]


def test_bad_settings_raise():
    for args in [("nonsense", None), ("weyl", {"colour": "blue"}), ("weyl", {"delta": "0.9"})]:
        try:
            su2.run(*args)
        except ValueError:
            continue
        raise AssertionError(f"{args} should have raised")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok  {name}")
