import json

import allure
import pytest

from hardytree.config_manager import ConfigManager, RunConfig
from hardytree.exceptions import ConfigError, InputError, InvalidLocationError, WeightError
from hardytree.fixtures import FIXTURES, fixture_document


@pytest.fixture
def manager():
    return ConfigManager()


def write(tmp_path, document):
    path = tmp_path / "tree.json"
    path.write_text(json.dumps(document) if not isinstance(document, str) else document, encoding="utf-8")
    return str(path)


@allure.feature("config")
class TestDocuments:
    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_every_fixture_loads(self, manager, name):
        data = manager.load("fixture:" + name)
        K, u, v = data.problem
        assert K.length() == pytest.approx(data.tree.total_length())
        assert K.contains_root()

    def test_unknown_fixture(self, manager):
        with pytest.raises(InputError) as error:
            manager.load("fixture:nope")
        assert error.value.field == "input"

    def test_malformed_json_reports_the_line(self, manager, tmp_path):
        with pytest.raises(InputError) as error:
            manager.load(write(tmp_path, '{\n  "vertices": [\n'))
        assert error.value.line is not None

    def test_missing_file(self, manager, tmp_path):
        with pytest.raises(InputError):
            manager.load(str(tmp_path / "absent.json"))

    def test_missing_field_is_named(self, manager, tmp_path):
        document = fixture_document("y-tree")
        del document["edges"][1]["length"]
        with pytest.raises(InputError) as error:
            manager.load(write(tmp_path, document))
        assert error.value.field == "edges[1].length"
        assert "edges[1].length" in str(error.value)

    def test_wrong_type(self, manager, tmp_path):
        document = fixture_document("unit-interval")
        document["edges"][0]["u"][0]["value"] = "heavy"
        with pytest.raises(InputError) as error:
            manager.load(write(tmp_path, document))
        assert error.value.field == "edges[0].u[0].value"

    def test_weight_pieces_must_cover_the_edge(self, manager, tmp_path):
        document = fixture_document("unit-interval")
        document["edges"][0]["v"] = [{"len": 0.4, "value": 1.0}]
        with pytest.raises(WeightError) as error:
            manager.load(write(tmp_path, document))
        assert error.value.edge == "e"

    def test_root_override(self, manager):
        data = manager.load("fixture:path-0-4", root=("e", 1.0))
        assert not data.root.is_vertex
        assert data.host.depth(data.host.lift(data.tree.location("e", 4.0))) == pytest.approx(3.0)

    def test_root_override_outside_the_edge(self, manager):
        with pytest.raises(InvalidLocationError):
            manager.load("fixture:path-0-4", root=("e", 5.0))

    def test_dump_keeps_the_document(self, manager, tmp_path):
        data = manager.load("fixture:binary-depth3")
        path = str(tmp_path / "copy.json")
        manager.dump(data.tree, data.u, data.v, data.root, path)
        again = manager.load(path)
        assert sorted(again.tree.edges) == sorted(data.tree.edges)
        assert again.tree.total_length() == pytest.approx(data.tree.total_length())
        assert again.root == data.root


@allure.feature("config")
class TestRunConfig:
    def test_defaults_are_valid(self):
        config = RunConfig("norm").validate()
        assert config.schedule == pytest.approx((0.2, 0.1, 0.05, 0.025, 0.0125))

    @pytest.mark.parametrize(
        "changes",
        [
            {"p": "0.5"},
            {"p": "two"},
            {"grid": 10},
            {"eps_factor": 1.0},
            {"eps_start": 0.0},
            {"n_max": 0},
            {"workers": 0},
            {"format": "xml"},
            {"root_edge": "e"},
            {"q": 0.5},
        ],
    )
    def test_invalid_settings(self, changes):
        with pytest.raises(ConfigError):
            RunConfig("norm", **changes).validate()

    def test_hash_is_stable(self):
        assert RunConfig("norm").config_hash() == RunConfig("norm").config_hash()
        assert RunConfig("norm").config_hash() != RunConfig("norm", grid=128).config_hash()
