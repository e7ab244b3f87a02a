"""Acceptance criteria 1 to 12, one test each.

Criteria 1 to 8 share one set of check records computed with a single
worker; criterion 12 recomputes them with four workers and compares the
serialized records byte for byte.  Criteria 9 and 10 are long quantitative
reproductions and only run with ``--extended``.
"""

import json

import pytest

from artifact.validation import CHECKS, DEFAULT_CHECKS, run_checks


@pytest.fixture(scope="session")
def records():
    return run_checks(DEFAULT_CHECKS, workers=1)


def _result(records, name):
    return json.loads(records[name])["result"]


def test_criterion_01_weight_proportionality(records, criterion):
    r = _result(records, "weights")
    cases = len(r["rows"])
    criterion(1, r["C"] is not None, f"weight / sigma is constant C = {r['C']} over {cases} (d, v) cases at p = {r['p']}")


def test_criterion_02_sign_law(records, criterion):
    r = _result(records, "weights")
    bad = [(w["d"], w["v"]) for w in r["rows"] if w["weight_g"] != (-1) ** w["d"] * w["weight"]]
    criterion(2, r["sign_law"] and not bad, f"(g0, g oo) weight equals (-1)^d times the (0, oo) weight; exceptions {bad}")


def test_criterion_03_parity_identity(records, criterion):
    r = _result(records, "parity")
    checked = sum(v["checked"] for v in r["per_d"].values())
    ds = ",".join(r["per_d"])
    criterion(3, r["holds"], f"{checked} matrices with odd c, non-norm d in {{{ds}}}, no violations")


def test_criterion_04_divisor_validation(records, criterion):
    r = _result(records, "divisors")
    detail = "; ".join(f"{c['label']} @ level {c['level']}: cond1 {c['cond1']} cond2 {c['cond2']}" for c in r["cases"])
    criterion(4, r["all_passed"], detail)


def test_criterion_05_propagation(records, criterion):
    r = _result(records, "propagation")
    detail = ", ".join(f"{o['path']} agrees mod {r['p']}^{o['agreement']}" for o in r["paths"])
    criterion(5, r["holds"], f"up_square(level 2) vs level 4, need {r['p']}^{r['N']}: {detail}")


def test_criterion_06_modular_symbol_laws(records, criterion):
    r = _result(records, "laws")
    lo = min(r["antisymmetry"] + r["three_term"] + r["equivariance"])
    n = len(r["antisymmetry"]), len(r["equivariance"])
    criterion(6, r["holds"], f"{n[0]} cusp triples and {n[1]} group elements, worst agreement {r['p']}^{lo} (need {r['p']}^{r['N']})")


def test_criterion_07_norm_one(records, criterion):
    r = _result(records, "norm_one")
    detail = ", ".join(f"{j['type']} D={j['D']} p={j['p']}: {j['norm_minus_one_val']}" for j in r["jobs"])
    criterion(7, r["holds"], f"valuation of Nm(J_conj) - 1: {detail}")


def test_criterion_08_atr_worked_example(records, criterion, expected):
    r = _result(records, "atr")
    ex = expected["atr_673_3"]
    counts = expected["worked_example"]["counts"]
    got = {"allowed": r["allowed"], "filtered": r["filtered"], "max": r["max"], "above_10000": r["above_10000"]}
    fields_ok = r["E"] == ex["E"] and r["M_polredabs"] == ex["M_published"] and r["q"] == ex["q"]
    counts_ok = got == counts
    detail = (
        f"E and M {'match' if fields_ok else 'DIFFER'}; counts allowed/filtered/max/>10000 "
        f"= {got['allowed']}/{got['filtered']}/{got['max']}/{got['above_10000']} "
        f"vs published {counts['allowed']}/{counts['filtered']}/{counts['max']}/{counts['above_10000']}"
    )
    criterion(8, fields_ok and counts_ok, detail)


@pytest.mark.extended
def test_criterion_09_worked_example_value(criterion):
    r = CHECKS["worked_value"]()
    b = r["branches"][0]
    detail = f"v_13(P(J_conj)) = {r['valuation']} (need 55) at {b['precision']} digits after {b['iterations']} levels"
    criterion(9, r["holds"], detail)


@pytest.mark.extended
def test_criterion_10_table_spot_check(criterion):
    r = CHECKS["table"]()
    detail = "; ".join(
        f"{w['parity']} n={w['n']}: " + (w["error"] if "error" in w else f"{w['precision']} digits, recognized {w['recognized']}")
        for w in r["rows"]
    )
    criterion(10, r["holds"], detail)


def test_criterion_11_recognition_sanity(criterion):
    r = CHECKS["recognition"]()
    detail = f"57 -> {r['first']}; {r['tried']} synthetic inputs, {r['exact']} exact, {r['violations']} residual violations"
    criterion(11, r["holds"] and r["tried"] == 100, detail)


def test_criterion_12_determinism(records, criterion):
    again = run_checks(DEFAULT_CHECKS, workers=4)
    differ = [k for k in DEFAULT_CHECKS if again[k] != records[k]]
    size = sum(len(v) for v in records.values())
    criterion(12, not differ, f"{len(records)} check records ({size} bytes) identical with 1 and 4 workers; differing {differ}")
