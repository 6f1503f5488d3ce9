import json

import pytest

from core.exceptions import ConfigurationError
from core.plugin_loader import ConstructionLoader, PluginStatus

FAILING_ADAPTER = '''
from core.construction_interface import ConstructionInterface
from models import CheckReport


class AlwaysFails(ConstructionInterface):
    def sample(self, config, rng):
        return None

    def verify(self, sample, config):
        return [CheckReport(name="always", passed=False, witness="nothing")]

    def to_json(self, sample):
        return {}

    def from_json(self, doc):
        return None
'''


def write_construction(root, name, config=True, adapter=None):
    d = root / name
    d.mkdir()
    if config:
        (d / "config.json").write_text(json.dumps({
            "command": "sample-cube",
            "suite": "cube",
            "defaults": {"radius": 6, "margin": 2},
        }))
    if adapter is not None:
        (d / "adapter.py").write_text(adapter)
    return d


class TestBundledConstructions:

    def test_all_active(self, loader):
        plugins = loader.get_all_plugins()
        assert sorted(plugins) == ["abelian", "cube", "product", "tiling"]
        assert all(p.status is PluginStatus.ACTIVE for p in plugins.values())

    def test_display_names_come_from_config(self, loader):
        assert loader.get_plugin("cube").display_name == "Cube Double Ray"
        assert loader.get_plugin("cube").config.defaults["ends"] == 1

    def test_adapters_know_their_id(self, loader):
        for plugin_id in ("abelian", "cube", "product", "tiling"):
            assert loader.get_adapter(plugin_id).get_plugin_id() == plugin_id

    def test_unknown_construction(self, loader):
        with pytest.raises(ConfigurationError):
            loader.get_adapter("hexagonal")

    @pytest.mark.parametrize("plugin_id", ["abelian", "cube"])
    def test_self_test_passes(self, loader, plugin_id):
        result = loader.get_adapter(plugin_id).run_self_test()
        assert result["success"], result["message"]
        assert result["details"]["checks"] > 0


class TestPluginDiscovery:

    def test_missing_directory(self, tmp_path):
        assert ConstructionLoader(str(tmp_path / "nowhere")).load() == {}

    def test_draft_and_error(self, tmp_path):
        write_construction(tmp_path, "draft")
        write_construction(tmp_path, "broken", config=False)
        write_construction(tmp_path, "_private", adapter=FAILING_ADAPTER)
        plugins = ConstructionLoader(str(tmp_path)).load()
        assert sorted(plugins) == ["broken", "draft"]
        assert plugins["draft"].status is PluginStatus.DRAFT
        assert plugins["broken"].status is PluginStatus.ERROR
        assert plugins["broken"].display_name == "Broken"

    def test_adapter_without_interface(self, tmp_path):
        write_construction(tmp_path, "empty", adapter="VALUE = 1\n")
        plugins = ConstructionLoader(str(tmp_path)).load()
        assert plugins["empty"].status is PluginStatus.ERROR
        assert "No ConstructionInterface subclass" in plugins["empty"].error_message

    def test_failing_self_test_is_a_warning(self, tmp_path):
        write_construction(tmp_path, "flaky", adapter=FAILING_ADAPTER)
        loader = ConstructionLoader(str(tmp_path))
        plugins = loader.load(self_test=True)
        assert plugins["flaky"].status is PluginStatus.WARNING
        assert plugins["flaky"].test_results["details"]["failed"] == ["always"]
        assert "flaky" in loader.get_active_plugins()
