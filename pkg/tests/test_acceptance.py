"""Acceptance gate: every criterion at its stated scale, exact equality,
one printed pass/fail line per criterion.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines.
"""

import time

import pytest

from mwk.fields import ff_build, rat_func_field
from mwk.model import group_structure_model, snf_oracle
from mwk.suites import SuiteConfig, run_suite

F3 = ff_build(3, 1)
F5 = ff_build(5, 1)
F7 = ff_build(7, 1)
F9 = ff_build(3, 2)
RF3 = rat_func_field(F3)


def _finish(num, label, ok, elapsed, limit=None):
    verdict = "PASS" if ok else "FAIL"
    timing = f" ({elapsed:.1f}s" + (f" < {limit}s)" if limit else ")")
    print(f"ACCEPTANCE {num}: {verdict} - {label}{timing}")
    assert ok, f"criterion {num} failed: {label}"
    if limit is not None:
        assert elapsed < limit, f"criterion {num} exceeded {limit}s ({elapsed:.1f}s)"


def _run(suite, field, **kw):
    return run_suite(suite, SuiteConfig(field=field, **kw)).to_json()


def test_criterion_1_relation_suite():
    ok = True
    worst = 0.0
    for field in (F3, F5, F9, RF3):
        start = time.time()
        rep = _run("lemma32", field, trials=200, seed=101)
        elapsed = time.time() - start
        worst = max(worst, elapsed)
        ok = ok and rep["passed"] and rep["trials"] >= 200
        ok = ok and elapsed < 60
    _finish(1, "relation suite over F3, F5, F9 and F3(t)", ok, worst, 60)


def test_criterion_2_dual_oracle_groups():
    start = time.time()
    ok = True
    for field in (F3, F5, F7):
        for n in (0, 1, 2):
            d_max = 4 if n == 0 else 3
            rep = snf_oracle(field, n, d_max)
            model = group_structure_model(field, n)
            ok = ok and rep["final"] == model
            ok = ok and rep["factors"][3] == model  # agreement already at d = 3
            ok = ok and rep["stabilized"]
            if n == 0:
                ok = ok and model == [2, 0]
            if n == 2:
                ok = ok and model == []
    elapsed = time.time() - start
    _finish(2, "presentation oracle matches the closed-form model", ok, elapsed, 120)


def test_criterion_3_lambda_well_definedness():
    start = time.time()
    ok = True
    for n in (1, 2):
        rep = _run("lambda-wd", RF3, n=n, trials=100, seed=103)
        ok = ok and rep["passed"] and rep["trials"] >= 100
    elapsed = time.time() - start
    _finish(3, "divided-power well-definedness with negative control", ok, elapsed, 120)


def test_criterion_4_sum_formula():
    start = time.time()
    ok = True
    for field in (F3, RF3):
        rep = _run("prop64", field, n=1, trials=100, seed=104)
        ok = ok and rep["passed"] and rep["trials"] >= 100
    rep = _run("prop64", F3, n=2, trials=100, seed=104)
    ok = ok and rep["passed"]
    elapsed = time.time() - start
    _finish(4, "sum formula and elementary-symmetric evaluation", ok, elapsed)


def test_criterion_5_shift_calculus():
    start = time.time()
    ok = True
    for suite in ("shift73", "lemma75"):
        for n in (1, 2):
            rep = _run(suite, RF3, n=n, m=2, trials=100, trunc=3, seed=105)
            ok = ok and rep["passed"] and rep["trials"] >= 100
    elapsed = time.time() - start
    _finish(5, "shift calculus: defining identity and shift laws", ok, elapsed)


def test_criterion_6_vanishing_bound():
    start = time.time()
    rep_model = _run("prop83", F3, n=1, trials=120, trunc=8, seed=106)
    rep_model2 = _run("prop83", F3, n=2, trials=80, trunc=8, seed=106)
    rep_rf = _run("prop83", RF3, n=1, trials=40, trunc=5, seed=106)
    ok = all(r["passed"] for r in (rep_model, rep_model2, rep_rf))
    elapsed = time.time() - start
    _finish(6, "sigma vanishing beyond twice the presentation size", ok, elapsed)


def test_criterion_7_roundtrip_exhaustive():
    start = time.time()
    rep = _run("thm84", F3, trunc=8)
    ok = rep["passed"] and rep["trials"] >= 600
    elapsed = time.time() - start
    _finish(7, "exhaustive coefficient-recovery roundtrip (L = 8)", ok, elapsed, 120)


def test_criterion_8_sequence_and_valuation_laws():
    start = time.time()
    rep_a = _run("seq37", RF3, trials=200, seed=108)
    rep_b = _run("prop36", RF3, trials=200, seed=108)
    ok = rep_a["passed"] and rep_b["passed"]
    ok = ok and rep_a["trials"] >= 200 and rep_b["trials"] >= 200
    elapsed = time.time() - start
    _finish(8, "exact-sequence retraction and residue laws", ok, elapsed)


def test_criterion_9_section9_recoveries():
    start = time.time()
    rep_a = _run("lemma91", RF3, n=1, m=2, trials=100, trunc=8, seed=109)
    rep_b = _run("lemma93", RF3, n=1, m=2, trials=100, trunc=3, seed=109)
    rep_c = _run("lemma93", RF3, n=2, m=2, trials=60, trunc=3, seed=109)
    ok = all(r["passed"] for r in (rep_a, rep_b, rep_c))
    elapsed = time.time() - start
    _finish(9, "h- and eta-perturbation laws and the f/lambda conversion", ok, elapsed)


def test_criterion_10_admissibility_table():
    start = time.time()
    rep_f3 = _run("table1", RF3, trials=12, seed=110)  # enumerates over F3, audits over F3(t)
    rep_f5 = _run("table1", F5, trials=0, seed=110)
    ok = rep_f3["passed"] and rep_f5["passed"]
    elapsed = time.time() - start
    _finish(10, "executable admissibility table with rejection audit", ok, elapsed)
