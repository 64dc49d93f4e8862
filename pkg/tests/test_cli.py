"""CLI: corpus regression, determinism, round-trips, error codes."""

import json
import pathlib
import subprocess
import sys

import pytest

from jetres.cli import main, run_job
from jetres.exactalg import MultiPoly, Q, VarContext
from jetres.polyparse import ParseError, UnknownVariableError, parse_poly

CORPUS = pathlib.Path(__file__).parent / "corpus"


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def corpus_jobs():
    return sorted(CORPUS.glob("job_*.json"))


@pytest.mark.parametrize("job_path", corpus_jobs(), ids=lambda p: p.stem)
def test_corpus_regression(job_path, tmp_path, capsys):
    job = load(job_path)
    out_path = tmp_path / "result.json"
    code = main([job["command"], "--job", str(job_path), "--out", str(out_path)])
    capsys.readouterr()
    assert code == 0
    got = load(out_path)
    got.pop("elapsed_seconds", None)
    expected = load(CORPUS / ("expected_" + job_path.name[len("job_") :]))
    assert got == expected


def test_byte_determinism(tmp_path, capsys):
    job_path = CORPUS / "job_integral_n2k2.json"
    outs = []
    for i in range(2):
        out_path = tmp_path / f"r{i}.json"
        assert main(["integral", "--job", str(job_path), "--out", str(out_path)]) == 0
        capsys.readouterr()
        doc = load(out_path)
        doc.pop("elapsed_seconds", None)
        outs.append(json.dumps(doc, sort_keys=True))
    assert outs[0] == outs[1]


def test_parse_examples():
    ctx = VarContext(("z1", "z2", "h"))
    p = parse_poly("(u1 + 2*u2 + h)^3", ctx)
    z1 = MultiPoly.variable(ctx, "z1")
    z2 = MultiPoly.variable(ctx, "z2")
    h = MultiPoly.variable(ctx, "h")
    assert p == (z1 + 2 * z2 + h) ** 3
    p = parse_poly("u1^2*u2 - 1/2*h^3", ctx)
    assert p == z1**2 * z2 - Q(1, 2) * h**3
    with pytest.raises(UnknownVariableError):
        parse_poly("u1 + w", ctx)
    with pytest.raises(ParseError):
        parse_poly("2h", ctx)  # implicit multiplication is not allowed
    with pytest.raises(ParseError):
        parse_poly("u1^u2", ctx)
    with pytest.raises(ParseError):
        parse_poly("u1^(2)", ctx)
    with pytest.raises(ParseError):
        parse_poly("1/0", ctx)


def test_round_trip_serialization():
    ctx = VarContext(("z1", "z2", "h"))
    z1 = MultiPoly.variable(ctx, "z1")
    z2 = MultiPoly.variable(ctx, "z2")
    h = MultiPoly.variable(ctx, "h")
    for p in (
        (z1 + 2 * z2 + h) ** 3,
        z1**2 * z2 - Q(1, 2) * h**3,
        MultiPoly.zero(ctx),
        MultiPoly.const(ctx, Q(-7, 3)),
        -z1 + z2,
    ):
        text = p.to_text()
        assert parse_poly(text, ctx) == p
        assert parse_poly(text, ctx).to_text() == text


def test_unknown_variable_error_exit(tmp_path, capsys):
    code = main(["integral", "-n", "2", "-k", "2", "--polynomial", "u1*w"])
    err = capsys.readouterr().err
    assert code == 3
    doc = json.loads(err)
    assert doc["error"]["code"] == "unknown-variable"


def test_resource_cap_error(capsys):
    code = main(["fixed-points", "-n", "3", "-k", "2", "--max-points", "5"])
    err = capsys.readouterr().err
    assert code == 3
    assert json.loads(err)["error"]["code"] == "resource"


def test_missing_parameters(capsys):
    code = main(["integral", "-n", "2"])
    err = capsys.readouterr().err
    assert code == 3
    assert "missing parameters" in json.loads(err)["error"]["message"]


def test_degenerate_lambdas_error(capsys):
    code = main(
        [
            "fibre-integral",
            "-n",
            "2",
            "-k",
            "1",
            "--polynomial",
            "u1",
            "--lambdas",
            "1,1",
        ]
    )
    err = capsys.readouterr().err
    assert code == 3
    assert json.loads(err)["error"]["code"] == "degenerate"


def test_verify_flag_runs_dual_route(capsys):
    code = main(["integral", "-n", "2", "-k", "1", "--polynomial", "(u1+h)^3", "--verify"])
    out = capsys.readouterr().out
    assert code == 0
    doc = json.loads(out)
    assert doc["verify"] == {"match": True, "method": "expand-vs-stepwise"}


def test_fibre_integral_residue_method(capsys):
    args = ["fibre-integral", "-n", "2", "-k", "2", "--polynomial", "u1*u2", "--lambdas", "1,3/2"]
    assert main(args + ["--method", "residue", "--verify"]) == 0
    doc_res = json.loads(capsys.readouterr().out)
    assert main(args + ["--method", "fixed-point"]) == 0
    doc_fp = json.loads(capsys.readouterr().out)
    assert doc_res["result"]["value"] == doc_fp["result"]["value"]
    assert doc_res["verify"] == {"match": True, "method": "dual-route"}


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "jetres.cli", "ample-check", "--a", "9,1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["classification"] == "relatively_ample"


def test_run_job_ggl_custom_config():
    doc = run_job(
        "ggl",
        {"n": 2, "a": [3, 1], "delta": "0", "bound": "1000"},
    )
    assert doc["result"]["p"]["text"]
    assert isinstance(doc["result"]["certificate"], bool)
