import os
import pathlib

import pytest

import execdesc

DATA = pathlib.Path(os.environ.get("EXECDESC_TEST_DATA", pathlib.Path(__file__).parents[1] / "data"))
FIXTURE = DATA / "execution-description.rdf"
BASE = "file:///w/execution-description.rdf"


def fixture():
    return execdesc.load(FIXTURE.read_text(encoding="utf-8"), BASE)


def test_processes_and_diagnostics():
    d = fixture()
    ids = sorted(p["id"] for p in d.processes)
    assert len(ids) == 7
    assert BASE + "#plot-figures" in ids
    diagnostics = d.validate()
    assert [x["code"] for x in diagnostics] == ["UNDECLARED_PLACEHOLDER"]
    assert diagnostics[0]["severity"] == "warning"


def test_select_and_plan():
    d = fixture()
    assert d.select(document="https://doi.org/10.1234/123456789") == [
        "file:///w/links-to-fig",
        "file:///w/links-to-pub",
    ]
    assert d.select(label="compiles libraries") == [BASE + "#make"]
    steps = d.plan([BASE + "#plot-figures"])
    assert [s["process"] for s in steps] == [BASE + "#make-data", BASE + "#plot-figures"]
    with pytest.raises(execdesc.BindError):
        d.plan([BASE + "#example-of-parameters"], {"max_resolution": "10"})
    with pytest.raises(execdesc.PlanError):
        d.plan([])


def test_parse_error_is_a_value_error():
    with pytest.raises(ValueError):
        execdesc.load("<rdf:RDF", BASE)


def test_run_and_guess(tmp_path):
    (tmp_path / "Makefile").write_text("all:\n\ttouch built\n")
    assert execdesc.guess(tmp_path) == ("makefile", "make all")
    tag, description = execdesc.resolve(tmp_path)
    assert tag == "heuristic(makefile)"
    target = description.processes[0]["id"]
    dry = description.run([target], working_dir=tmp_path, dry_run=True)
    assert dry["overall"] == "dry_run"
    assert not (tmp_path / "built").exists()


def test_round_trip_through_rdf_xml():
    d = fixture()
    again = execdesc.load(d.to_rdf_xml(), BASE)
    assert again.processes == d.processes


def test_helpers():
    assert execdesc.placeholders("./generate ${max_resolution} ${rounds}") == ["max_resolution", "rounds"]
    assert execdesc.normalize_repo("HTTPS://GitHub.com/a/b.git/") == "https://github.com/a/b"
    assert len(execdesc.triples(FIXTURE.read_text(encoding="utf-8"), BASE)) > 30
