from .construction_interface import ConstructionConfig, ConstructionInterface
from .exceptions import SpanrayError
from .plugin_loader import ConstructionLoader, PluginStatus

__all__ = ['ConstructionConfig', 'ConstructionInterface', 'ConstructionLoader', 'PluginStatus', 'SpanrayError']
