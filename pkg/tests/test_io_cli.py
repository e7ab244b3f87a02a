import io
import json

import numpy as np
import pytest

from artifact.cli import main
from artifact.io import (
    SCHEMA_VERSION,
    append_record,
    cache_ops,
    export_table,
    format_divisor_label,
    format_factor,
    format_poly,
    load_sigma_cache,
    parse_divisor_label,
    parse_units,
    read_records,
    sigma_cache_paths,
)


@pytest.mark.parametrize(
    "label,terms,parity",
    [
        ("6_24_even", ((6, 1), (24, -1)), "even"),
        ("6·6_14_odd", ((6, 2), (14, -1)), "odd"),
        ("3.3*15_21_odd", ((3, 2), (15, 1), (21, -1)), "odd"),
    ],
)
def test_label_roundtrip(label, terms, parity):
    D = parse_divisor_label(label)
    assert D.terms == terms and D.parity == parity
    assert parse_divisor_label(format_divisor_label(D)).terms == terms


@pytest.mark.parametrize("bad", ["6_24", "6_24_neither", "_24_even", "6x_24_even", "0_24_even"])
def test_label_rejects(bad):
    with pytest.raises(ValueError):
        parse_divisor_label(bad)


def test_cache_lifecycle(tmp_path):
    keys = [(3, 0), (6, 0)]
    built = cache_ops("build", tmp_path, 5, keys)
    assert len(built) == 2
    assert set(cache_ops("verify", tmp_path, 5, keys).values()) == {"clean"}
    data_p, _ = sigma_cache_paths(tmp_path, 5, 3, 0)
    arr = np.load(data_p)
    arr[0, 0] += 1
    np.save(data_p, arr)
    with pytest.warns(UserWarning):
        assert load_sigma_cache(tmp_path, 5, 3, 0) is None
    with pytest.warns(UserWarning):
        assert cache_ops("verify", tmp_path, 5, [(3, 0)])["p5_d3_v0"] == "missing-or-corrupt"
    assert set(cache_ops("purge", tmp_path, 5, keys).values()) == {"purged"}
    assert cache_ops("purge", tmp_path, 5, keys)["p5_d6_v0"] == "absent"


def test_records_and_export(tmp_path):
    store = tmp_path / "res.jsonl"
    append_record(store, {"label": "6_24_even", "D": 8, "n": 1, "p": 17, "recognized": True,
                          "field": [1, 0, 0, 0, 6, 0, 0, 0, 1], "factor": "J = 31^4"})
    append_record(store, {"label": "6_24_odd", "D": 5, "n": 1, "p": 17, "recognized": False})
    recs = read_records(store)
    assert [r["schema"] for r in recs] == [SCHEMA_VERSION] * 2
    buf = io.StringIO()
    assert export_table(recs, buf, p=17) == 1
    lines = buf.getvalue().splitlines()
    assert lines[0].split("\t") == ["label", "D", "n", "field", "factor"]
    assert lines[1].split("\t")[3] == "x^8 + 6*x^4 + 1"
    empty = io.StringIO()
    assert export_table([], empty) == 0 and empty.getvalue().count("\n") == 1
    store.write_text('{"schema": 99}\n')
    with pytest.raises(ValueError):
        read_records(store)


def test_formatting():
    assert format_poly([-1, 1]) == "x - 1"
    assert format_poly([2, 0, -3]) == "-3*x^2 + 2"
    assert format_factor(((31, 4),)) == "J = 31^4"
    assert format_factor(((2, -1), (3, 1)), -1) == "J = -2^-1 * 3^1"
    assert format_factor((), 1, 2) == "J^2 = 1"


def test_parse_units():
    u = parse_units("# comment\nD=673 n=3 u=1,0,1/2,-3\n")
    assert u[(673, 3)][2].denominator == 2
    with pytest.raises(ValueError):
        parse_units("D=8 n=1 u=1,2\n")


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_cli_validate_and_weights(capsys):
    code, out = _run(capsys, "validate-divisor", "--p", "5", "--divisor", "6_24_even")
    assert code == 0 and json.loads(out)["passed"]
    code, out = _run(capsys, "validate-divisor", "--p", "5", "--divisor", "3_6_even")
    assert code == 1
    code, out = _run(capsys, "weights", "--p", "5", "--d", "3", "--sign-law")
    rec = json.loads(out)
    assert rec["C"] == "4" and rec["weight_g0_ginf"] == -rec["weight"]


def test_cli_enum_recognize_allowed(capsys):
    code, out = _run(capsys, "enum-sigma", "--p", "5", "--d", "3", "--show", "2")
    assert code == 0 and json.loads(out.splitlines()[0])["rows"] == 28
    code, out = _run(capsys, "recognize", "--p", "5", "--prec", "3", "--value", "57", "--max-deg", "2")
    assert code == 0 and json.loads(out)["poly"] == [1, 0, 1]
    code, out = _run(capsys, "allowed-primes", "--p", "13", "--divisor", "3·3·15_21_odd", "--D", "673", "--n", "3")
    rec = json.loads(out)
    assert code == 0 and 659 in rec["filtered"] and rec["q"] == 6057


def test_cli_diagnostics_cache_export(capsys, tmp_path):
    code, out = _run(capsys, "diagnostics", "--poly", "432,0,49,0,1", "--D", "673", "--n", "3")
    assert json.loads(out)["rel_disc_norm"] == 16
    code, out = _run(capsys, "cache", "build", "--p", "5", "--d", "3", "--cache-dir", str(tmp_path))
    assert code == 0
    code, out = _run(capsys, "cache", "verify", "--p", "5", "--d", "3", "--cache-dir", str(tmp_path))
    assert code == 0 and "clean" in out
    store = tmp_path / "s.jsonl"
    store.write_text("")
    code, out = _run(capsys, "export", "--store", str(store))
    assert code == 0 and out == "label\tD\tn\tfield\tfactor\n"


def test_cli_eval_reports_stage_errors(capsys):
    code = main(["eval", "--p", "5", "--divisor", "3_6_even", "--type", "smallRM", "--D", "8", "--prec", "4"])
    assert code == 2
    assert "[divisor]" in capsys.readouterr().err
    assert main(["eval", "--p", "5", "--divisor", "6_24_even", "--D", "8", "--prec", "500"]) == 2
    assert "extended" in capsys.readouterr().err


def test_cli_eval_point_on_divisor(capsys):
    # 4(6 - 2^2) = 8: the RM point of discriminant 8 is a zero of some F_M with q(M) = 6
    assert main(["eval", "--p", "5", "--divisor", "6_24_even", "--type", "smallRM", "--D", "8", "--prec", "4"]) == 2
    assert "[evaluation]" in capsys.readouterr().err


def test_cli_eval_small_rm(capsys):
    code, out = _run(capsys, "eval", "--p", "5", "--divisor", "6_24_even", "--type", "smallRM",
                     "--D", "13", "--prec", "4", "--max-level", "2")
    assert code == 0
    rec = json.loads(out)
    assert rec["type"] == "smallRM" and rec["p"] == 5 and rec["iterations"] >= 1
