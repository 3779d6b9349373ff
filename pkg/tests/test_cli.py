import csv
import json

import allure
import pytest

from hardytree.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from hardytree.config_manager import RunConfig
from hardytree.helper import emit_plot, header, render_csv


def data_lines(path):
    return [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]


@allure.feature("cli")
class TestCommands:
    def test_validate(self, tmp_path):
        out = tmp_path / "validate.csv"
        assert main(["validate", "--input", "fixture:unit-interval", "--out", str(out)]) == EXIT_OK
        text = out.read_text(encoding="utf-8")
        assert "# command: validate" in text
        lines = data_lines(out)
        assert lines[0] == "quantity,value"
        assert "total_length,1" in lines
        assert "int_uv,1" in lines

    def test_approx_table_and_plot(self, tmp_path, artifacts):
        out, svg = tmp_path / "approx.csv", tmp_path / "approx.svg"
        code = main(["approx", "--input", "fixture:unit-interval", "--grid", "64", "--n-max", "5",
                     "--out", str(out), "--svg", str(svg)])
        assert code == EXIT_OK
        artifacts.append(out.read_text(encoding="utf-8"))
        lines = data_lines(out)
        assert lines[0] == "n,a_n,n_a_n,target,deviation"
        assert len(lines) == 6
        assert svg.read_text(encoding="utf-8").startswith("<?xml")

    def test_partition_as_json(self, tmp_path, artifacts):
        out = tmp_path / "partition.json"
        code = main(["partition", "--input", "fixture:unit-interval", "--grid", "64", "--format", "json",
                     "--out", str(out)])
        assert code == EXIT_OK
        artifacts.append(out.read_text(encoding="utf-8"))
        document = json.loads(artifacts[-1])
        assert document["header"]["N"] == "2"
        assert document["header"]["M"] == "1"
        assert [row["kind"] for row in document["rows"]] == ["cover", "cover", "pack"]

    def test_sigma(self, tmp_path):
        out = tmp_path / "sigma.csv"
        assert main(["sigma", "--input", "fixture:path-0-4", "--grid", "64", "--out", str(out)]) == EXIT_OK
        lines = data_lines(out)
        assert lines[0] == "k,i,mu,sigma,B"
        assert lines[1] == "1,1,2,2,1"


@allure.feature("cli")
class TestExitCodes:
    def test_malformed_document(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"vertices": ["a"], "edges": [{"id": "e"}]}', encoding="utf-8")
        assert main(["validate", "--input", str(bad), "--out", str(tmp_path / "out.csv")]) == EXIT_INPUT

    def test_missing_file(self, tmp_path):
        assert main(["norm", "--input", str(tmp_path / "absent.json")]) == EXIT_INPUT

    def test_coarse_grid(self, tmp_path):
        assert main(["norm", "--input", "fixture:unit-interval", "--grid", "10"]) == EXIT_USAGE

    def test_input_is_required(self):
        assert main(["norm"]) == EXIT_USAGE

    def test_approximation_numbers_need_p_2(self, tmp_path):
        code = main(["approx", "--input", "fixture:unit-interval", "--grid", "64", "--p", "1",
                     "--out", str(tmp_path / "out.csv")])
        assert code == EXIT_USAGE

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as error:
            main(["launch"])
        assert error.value.code == 2

    @pytest.mark.slow
    def test_verify(self, tmp_path):
        out = tmp_path / "verify.csv"
        assert main(["verify", "--grid", "64", "--eps-count", "3", "--out", str(out)]) == EXIT_OK
        lines = data_lines(out)
        assert lines[0] == "criterion,check,value,bound,asserted,passed"
        rows = list(csv.DictReader(lines))
        assert rows
        assert all(row["passed"] == "true" for row in rows if row["asserted"] == "true")


@allure.feature("cli")
class TestArtifacts:
    def test_csv_cells(self):
        block = header(RunConfig("norm", input="fixture:y-tree"))
        text = render_csv([{"a": None, "b": True, "c": float("inf"), "d": 0.5}], block)
        assert text.splitlines()[-1] == ",true,inf,0.5"
        assert "# config_hash: {}".format(RunConfig("norm", input="fixture:y-tree").config_hash()) in text

    def test_empty_plot_writes_nothing(self, tmp_path):
        path = tmp_path / "empty.svg"
        assert emit_plot([], 1.0, str(path), {}) is None
        assert not path.exists()
