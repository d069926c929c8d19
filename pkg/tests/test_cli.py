import json

from mwk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_group_command(capsys):
    code, out = run(capsys, "group", "--q", "3", "--n", "0", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["model_factors"] == [2, 0]
    assert payload["agree"]
    code, out = run(capsys, "group", "--q", "3", "--n", "2", "--json")
    assert code == 0
    assert json.loads(out)["model_factors"] == []
    code, out = run(capsys, "group", "--q", "3", "--n", "1", "--d-max", "3", "--json")
    assert code == 0
    assert json.loads(out)["agree"]


def test_eval_command(capsys):
    code, out = run(capsys, "eval", "[2]*[2]", "--field", "3", "--json")
    assert code == 0
    assert json.loads(out)["zero"]
    code, out = run(capsys, "eval", "[t,t] - [t,-1]", "--field", "3(t)", "--json")
    assert code == 0
    assert json.loads(out)["zero"]
    code, out = run(capsys, "eval", "eta*(2 + eta*[-1])", "--field", "3", "--json")
    assert code == 0
    assert json.loads(out)["zero"]
    code, out = run(capsys, "eval", "[t]", "--field", "3(t)", "--json")
    assert code == 0
    payload = json.loads(out)
    assert not payload["zero"]
    assert payload["canonical_form"]["residues"]


def test_eval_parse_error_exit_code(capsys):
    code = main(["eval", "[2", "--field", "3"])
    assert code == 2


def test_verify_command(capsys):
    code, out = run(
        capsys, "verify", "--suite", "lemma32", "--field", "3", "--trials", "50", "--json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] and payload["failure_count"] == 0
    assert payload["paper_anchor"]
    assert payload["seed"] == 0


def test_verify_deterministic_given_seed(capsys):
    args = ["verify", "--suite", "relations34", "--field", "3", "--trials", "30",
            "--seed", "9", "--json"]
    code1, out1 = run(capsys, *args)
    code2, out2 = run(capsys, *args)
    p1, p2 = json.loads(out1), json.loads(out2)
    p1.pop("elapsed_s"), p2.pop("elapsed_s")
    assert p1 == p2 and code1 == code2 == 0


def test_verify_unknown_suite_rejected(capsys):
    import pytest

    with pytest.raises(SystemExit):
        main(["verify", "--suite", "nope"])


def test_verify_wrong_field_kind_is_a_clean_error(capsys):
    code = main(["verify", "--suite", "seq37", "--field", "3", "--trials", "5"])
    assert code == 2
    assert "FieldMismatch" in capsys.readouterr().err


SUITE_FIELDS = {
    "lemma32": "3",
    "relations34": "3",
    "lambda-wd": "3(t)",
    "prop64": "3",
    "shift73": "3(t)",
    "lemma75": "3",
    "prop83": "3",
    "thm84": "3",
    "seq37": "3(t)",
    "prop36": "3(t)",
    "lemma91": "3",
    "lemma93": "3",
    "table1": "3(t)",
}


def test_every_registered_suite_runs_through_the_cli(capsys):
    import json as _json

    for suite, field in SUITE_FIELDS.items():
        args = [
            "verify", "--suite", suite, "--field", field,
            "--trials", "6", "--trunc", "4", "--seed", "2", "--json",
        ]
        code = main(args)
        payload = _json.loads(capsys.readouterr().out)
        assert code == 0, (suite, payload["failures"][:3])
        assert payload["suite_id"] == suite
