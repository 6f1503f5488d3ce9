import importlib.util
import logging
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Optional

from .construction_interface import ConstructionConfig, ConstructionInterface


logger = logging.getLogger(__name__)


class PluginStatus(Enum):
    ACTIVE = "active"
    WARNING = "warning"
    ERROR = "error"
    DRAFT = "draft"


@dataclass
class PluginInfo:
    id: str
    status: PluginStatus
    display_name: str
    config: Optional[ConstructionConfig] = None
    adapter: Optional[ConstructionInterface] = None
    error_message: Optional[str] = None
    test_results: Optional[Dict] = None


class ConstructionLoader:
    """Scans constructions/<id>/ for a config.json and an adapter.py each."""

    def __init__(self, constructions_dir: str = "constructions"):
        self.constructions_dir = Path(constructions_dir)
        self.plugins: Dict[str, PluginInfo] = {}

    def load(self, self_test: bool = False) -> Dict[str, PluginInfo]:
        if not self.constructions_dir.exists():
            logger.warning(f"Constructions directory {self.constructions_dir} does not exist")
            return self.plugins

        for plugin_dir in sorted(self.constructions_dir.iterdir()):
            if not plugin_dir.is_dir() or plugin_dir.name.startswith("_"):
                continue
            plugin_info = self._load_plugin(plugin_dir, self_test)
            self.plugins[plugin_info.id] = plugin_info
            if plugin_info.status in (PluginStatus.ACTIVE, PluginStatus.WARNING):
                logger.info(f"Loaded construction: {plugin_info.id} - {plugin_info.status.value}")
            else:
                logger.warning(f"Construction {plugin_info.id} is {plugin_info.status.value}: {plugin_info.error_message}")
        return self.plugins

    def _load_plugin(self, plugin_dir: Path, self_test: bool) -> PluginInfo:
        plugin_id = plugin_dir.name
        config_file = plugin_dir / "config.json"
        adapter_file = plugin_dir / "adapter.py"

        if not config_file.exists():
            return PluginInfo(
                id=plugin_id,
                status=PluginStatus.ERROR,
                display_name=self._format_display_name(plugin_id),
                error_message="config.json not found",
            )

        if not adapter_file.exists():
            return PluginInfo(
                id=plugin_id,
                status=PluginStatus.DRAFT,
                display_name=self._format_display_name(plugin_id),
                error_message="adapter.py not found (Draft mode)",
            )

        try:
            config = ConstructionConfig.from_file(config_file)
            adapter = self._load_adapter(adapter_file, plugin_id)
            adapter.config = config

            status = PluginStatus.ACTIVE
            test_results = None
            if self_test:
                test_results = adapter.run_self_test()
                if not test_results.get("success"):
                    status = PluginStatus.WARNING

            return PluginInfo(
                id=plugin_id,
                status=status,
                display_name=config.display_name or self._format_display_name(plugin_id),
                config=config,
                adapter=adapter,
                test_results=test_results,
            )
        except Exception as e:
            logger.error(f"Failed to load construction {plugin_id}: {str(e)}")
            return PluginInfo(
                id=plugin_id,
                status=PluginStatus.ERROR,
                display_name=self._format_display_name(plugin_id),
                error_message=str(e),
            )

    def _load_adapter(self, adapter_file: Path, plugin_id: str) -> ConstructionInterface:
        """Dynamically load adapter.py"""
        module_name = f"constructions.{plugin_id}.adapter"
        spec = importlib.util.spec_from_file_location(module_name, adapter_file)
        if not spec or not spec.loader:
            raise ImportError(f"Cannot load adapter from {adapter_file}")

        module = importlib.util.module_from_spec(spec)
        sys.modules[module_name] = module
        spec.loader.exec_module(module)

        for attr_name in dir(module):
            attr = getattr(module, attr_name)
            if isinstance(attr, type) and issubclass(attr, ConstructionInterface) and attr is not ConstructionInterface:
                return attr()

        raise ImportError(f"No ConstructionInterface subclass found in {adapter_file}")

    def _format_display_name(self, plugin_id: str) -> str:
        return plugin_id.replace("_", " ").title()

    def get_all_plugins(self) -> Dict[str, PluginInfo]:
        return self.plugins

    def get_plugin(self, plugin_id: str) -> Optional[PluginInfo]:
        return self.plugins.get(plugin_id)

    def get_active_plugins(self) -> Dict[str, PluginInfo]:
        return {
            k: v for k, v in self.plugins.items()
            if v.status in [PluginStatus.ACTIVE, PluginStatus.WARNING]
        }

    def get_adapter(self, plugin_id: str) -> ConstructionInterface:
        from .exceptions import ConfigurationError

        info = self.plugins.get(plugin_id)
        if info is None or info.adapter is None:
            known = sorted(self.get_active_plugins())
            raise ConfigurationError(f"construction {plugin_id!r} is not available (active: {known})")
        return info.adapter
