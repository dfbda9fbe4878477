import os
from fractions import Fraction
from importlib.resources import files

import pytest
from hypothesis import given, strategies as st

from stringtop import cli
from stringtop.jobspec import (JobSpec, ParseError, PinSpec, ValidationError, format_expression,
                               parse_expression, parse_jobspec, render_jobspec)
from stringtop.report import render
from stringtop.runner import run_job

JOBS = files("stringtop") / "jobs"

S3_JOB = """\
[job]
kind = cjy
catalog = S3
ring = Z
max_degree = 12
default_pins = generators
"""

BAD_THOM_JOB = """\
[job]
kind = chain-verify

[bundle doubled]
# twice the Thom class: a cocycle, but the Thom map is multiplication by 2
base = 0,1 1,2
fiber = a,b
embed = base
tube = 0,1 1,2
boundary = 0 2
thom = 0,1:1 1,2:1
retract = 0:1 1:1 2:1
"""


def job_path(name):
    return str(JOBS / name)


# --- parsing --------------------------------------------------------------


def test_s3_job_is_valid():
    job = parse_jobspec(S3_JOB)
    assert (job.kind, job.name, job.ring, job.max_degree) == ("cjy", "S3", "Z", 12)
    assert job.job["default_pins"] == "generators"


def test_unknown_pin_label_is_a_validation_error():
    job = parse_jobspec(S3_JOB + "\n[pins]\npin d3 [S3]|w -> pt|u\n")
    with pytest.raises(ValidationError):
        run_job(job)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_jobspec("[job]\nkind = cjy\n  bogus line\n")
    assert (exc.value.line, exc.value.column) == (3, 3)
    with pytest.raises(ParseError) as exc:
        parse_jobspec(S3_JOB + "[pins]\npin d3 a + -> b\n")
    assert exc.value.line == 8


@pytest.mark.parametrize("text", [
    "kind = cjy\n",
    "[job]\nkind = cjy\n[nope]\n",
    "[job]\nkind = cjy\nkind = cjy\n",
    "[job]\ncolour = red\n",
])
def test_malformed_jobs(text):
    with pytest.raises(ParseError):
        parse_jobspec(text)


@pytest.mark.parametrize("text", [
    "[job]\ncatalog = S3\n",
    "[job]\nkind = wat\ncatalog = S3\n",
    "[job]\nkind = cjy\n",
    "[job]\nkind = cjy\ncatalog = S3\nmax_degree = -1\n",
    "[job]\nkind = cjy\ncatalog = S3\n[define]\na = b\nb = a\n",
    "[job]\nkind = cjy\ncatalog = S3\n[string-pins]\npin d2 x -> 0\n",
])
def test_invalid_jobs(text):
    with pytest.raises(ValidationError):
        parse_jobspec(text)


def test_expression_parsing():
    assert parse_expression("a + 2*b - 1/2*c") == [(1, "a"), (2, "b"), (Fraction(-1, 2), "c")]
    assert parse_expression("0") == []
    assert parse_expression("-x") == [(-1, "x")]


LABELS = ["[S3]|1", "[S3]|u", "pt|u^2", "1x1", "[S3]x1", "b|u"]
coef = st.one_of(st.integers(-5, 5), st.fractions(max_denominator=6).filter(lambda f: abs(f) < 9))
terms = st.lists(st.tuples(coef, st.sampled_from(LABELS)), max_size=3)


@given(terms)
def test_expression_round_trip(ts):
    back = parse_expression(format_expression(ts))
    assert [(Fraction(c), l) for c, l in back] == [(Fraction(c), l) for c, l in ts]


@given(st.integers(0, 40), st.sampled_from(["Z", "Q", "Z/5"]),
       st.dictionaries(st.sampled_from(["d0", "d1", "d2"]), terms),
       st.lists(st.tuples(st.integers(2, 9), terms, terms), max_size=4))
def test_jobspec_round_trip(n, ring, defines, pins):
    job = JobSpec(job={"kind": "cjy", "catalog": "S3", "ring": ring, "max_degree": str(n)},
                  defines=defines,
                  pins={"pins": [PinSpec(r, s, t) for r, s, t in pins]} if pins else {})
    assert parse_jobspec(render_jobspec(job)) == job


@pytest.mark.parametrize("name", sorted(os.listdir(JOBS)))
def test_shipped_jobs_round_trip(name):
    job = parse_jobspec((JOBS / name).read_text())
    assert parse_jobspec(render_jobspec(job)) == job


# --- running --------------------------------------------------------------


def test_run_is_deterministic():
    job = parse_jobspec(S3_JOB)
    a = render(run_job(job))
    b = render(run_job(parse_jobspec(S3_JOB)))
    assert a == b
    assert render(run_job(job), "csv") == render(run_job(job), "csv")


def test_s3_report_collapses_at_two():
    out = render(run_job(parse_jobspec(S3_JOB)))
    assert "collapse" in out.lower()
    assert "status: ok" in out


def test_chain_corpus_job_passes():
    rep = run_job(parse_jobspec((JOBS / "chain_corpus.job").read_text()))
    assert rep.ok
    assert "FAIL" not in render(rep)


# --- command line ---------------------------------------------------------


def test_cli_run_ok(capsys):
    assert cli.main(["run", job_path("s3_cjy.job")]) == 0
    assert "status: ok" in capsys.readouterr().out


def test_cli_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.job"
    p.write_text("[job]\nkind cjy\n")
    assert cli.main(["run", str(p)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_validation_errors(tmp_path):
    p = tmp_path / "v.job"
    p.write_text(S3_JOB + "[pins]\npin d3 nothing -> 0\n")
    assert cli.main(["run", str(p)]) == 3
    assert cli.main(["run", job_path("s3_cjy.job"), "--ring", "Z/4"]) == 3
    assert cli.main(["run", str(tmp_path / "missing.job")]) == 3
    assert cli.main(["verify-chains", job_path("s3_cjy.job")]) == 3


def test_cli_engine_error(tmp_path, capsys):
    # without pins the generator differentials are undetermined
    p = tmp_path / "e.job"
    p.write_text(S3_JOB.replace("default_pins = generators\n", ""))
    assert cli.main(["run", str(p)]) == 4
    assert "UndeterminedDifferential" in capsys.readouterr().err


def test_cli_verification_failure(tmp_path, capsys):
    p = tmp_path / "f.job"
    p.write_text(BAD_THOM_JOB)
    assert cli.main(["verify-chains", str(p)]) == 5
    out = capsys.readouterr().out
    assert "status: FAILED" in out and "Thom map not invertible" in out


def test_cli_csv_and_output_file(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["run", job_path("s3_cjy.job"), "--format", "csv", "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# stringtop report format")
    assert "status,ok" in text


def test_cli_figures(tmp_path):
    d = tmp_path / "fig"
    assert cli.main(["run", job_path("s3_cjy.job"), "--max-degree", "8", "--figures", str(d)]) == 0
    pngs = sorted(os.listdir(d))
    assert pngs and all(p.endswith(".png") for p in pngs)
    assert (d / pngs[0]).read_bytes()[:4] == b"\x89PNG"


def test_cli_catalog(capsys):
    assert cli.main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "S3" in out and "V2R7" in out


def test_cli_explain(capsys):
    assert cli.main(["explain", "V2R7"]) == 0
    out = capsys.readouterr().out
    assert "S5 -> V2R7 -> S6" in out
    assert cli.main(["explain", "nope"]) == 3
