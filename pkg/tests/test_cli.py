import json

import jsonschema
import pytest

from tfm_lab.cli import main
from tfm_lab.schema import report_schema

SECOND_PRICE = json.dumps({"kind": "second_price", "block_size": 3})
FIRST_PRICE = json.dumps({"kind": "first_price", "block_size": 4})
BURN12 = json.dumps({"kind": "burning_second_price", "block_size": 3,
                     "k": 2, "k_prime": 1, "gamma": "1/1", "c": 2})
TRIVIAL = json.dumps({"kind": "trivial"})


def run(*argv):
    return main(list(argv))


class TestAudit:
    def test_expectations_met(self, tmp_path, capsys):
        report = tmp_path / "report.json"
        code = run("audit", "--mechanism", SECOND_PRICE,
                   "--bids", "10,8,5", "--properties", "uic,mic",
                   "--expect", "uic=pass,mic=fail",
                   "--report", str(report))
        assert code == 0
        data = json.loads(report.read_text())
        jsonschema.validate(data, report_schema())
        verdicts = {r["property"]: r["verdict"] for r in data["results"]}
        assert verdicts == {"UIC": "pass-on-grid", "MIC": "fail"}

    def test_expectation_mismatch_exit_1(self):
        assert run("audit", "--mechanism", SECOND_PRICE, "--bids", "10,8,5",
                   "--properties", "mic", "--expect", "mic=pass") == 1

    def test_scp_c(self, tmp_path):
        report = tmp_path / "r.json"
        code = run("audit", "--mechanism", FIRST_PRICE, "--bids", "10,8",
                   "--properties", "scp", "--c", "2",
                   "--expect", "scp=pass", "--report", str(report))
        assert code == 0
        data = json.loads(report.read_text())
        assert data["results"][0]["c"] == 2

    def test_mechanism_file(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(SECOND_PRICE)
        assert run("audit", "--mechanism", str(path), "--bids", "10,8,5",
                   "--properties", "uic") == 0

    def test_bad_mechanism_exit_2(self):
        assert run("audit", "--mechanism", '{"kind": "dutch"}',
                   "--bids", "1") == 2

    def test_bad_gamma_exit_2(self):
        assert run("audit", "--mechanism", TRIVIAL, "--bids", "1",
                   "--gamma", "3/2") == 2

    def test_bad_property_exit_2(self):
        assert run("audit", "--mechanism", TRIVIAL, "--bids", "1",
                   "--properties", "dsic") == 2

    def test_bad_expect_exit_2(self):
        assert run("audit", "--mechanism", TRIVIAL, "--bids", "1",
                   "--expect", "uic=maybe") == 2

    def test_bids_and_scenario_space_conflict(self, tmp_path):
        space = tmp_path / "space.json"
        space.write_text(json.dumps([["1.0"]]))
        assert run("audit", "--mechanism", TRIVIAL, "--bids", "1",
                   "--scenario-space", str(space)) == 2

    def test_scenario_space_file(self, tmp_path):
        space = tmp_path / "space.json"
        space.write_text(json.dumps([["10", "8", "5"], ["3"]]))
        assert run("audit", "--mechanism", SECOND_PRICE,
                   "--scenario-space", str(space),
                   "--properties", "mic", "--expect", "mic=fail") == 0

    def test_thread_cap_env_validation(self, monkeypatch):
        monkeypatch.setenv("TFM_LAB_THREADS", "zero")
        assert run("audit", "--mechanism", TRIVIAL, "--bids", "1") == 2


class TestMyerson:
    def test_match(self, tmp_path):
        report = tmp_path / "r.json"
        code = run("myerson", "--mechanism", SECOND_PRICE,
                   "--bids", "10,8,5", "--report", str(report))
        assert code == 0
        data = json.loads(report.read_text())
        jsonschema.validate(data, report_schema())
        assert data["results"]["matches"] is True

    def test_mismatch_still_exit_0(self, capsys):
        code = run("myerson", "--mechanism", FIRST_PRICE, "--bids", "10,8")
        assert code == 0
        assert "mismatch" in capsys.readouterr().out

    def test_requires_bids(self):
        assert run("myerson", "--mechanism", SECOND_PRICE) == 2

    def test_randomized_rejected(self):
        assert run("myerson", "--mechanism", BURN12, "--bids", "10,8,5") == 2


class TestPaperSuite:
    def test_single_cheap_claim(self, tmp_path, capsys):
        report = tmp_path / "r.json"
        code = run("paper-suite", "--only", "R9", "--report", str(report))
        assert code == 0
        assert "R9: ok" in capsys.readouterr().out
        data = json.loads(report.read_text())
        jsonschema.validate(data, report_schema())

    def test_unknown_claim_exit_2(self):
        assert run("paper-suite", "--only", "R99") == 2


class TestSample:
    def test_deterministic_single_draw(self, tmp_path):
        report = tmp_path / "r.json"
        code = run("sample", "--mechanism", SECOND_PRICE,
                   "--bids", "10,8,5", "--samples", "1",
                   "--report", str(report))
        assert code == 0
        data = json.loads(report.read_text())
        jsonschema.validate(data, report_schema())
        by_rank = {row["rank"]: row for row in data["results"]}
        assert by_rank[0]["confirmed"] == 1
        assert by_rank[2]["confirmed"] == 0

    def test_randomized_within_band(self):
        assert run("sample", "--mechanism", BURN12, "--bids", "10,8,5",
                   "--samples", "400", "--seed", "7") == 0

    def test_requires_positive_samples(self):
        assert run("sample", "--mechanism", TRIVIAL, "--bids", "1",
                   "--samples", "0") == 2
