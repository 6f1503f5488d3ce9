import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np


logger = logging.getLogger(__name__)


@dataclass
class ConstructionConfig:
    command: str
    suite: str
    description: Optional[str] = None
    display_name: Optional[str] = None
    defaults: Dict[str, Any] = field(default_factory=dict)
    self_test: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: Path) -> "ConstructionConfig":
        with open(path, "r") as f:
            data = json.load(f)
        return cls(
            command=data["command"],
            suite=data["suite"],
            description=data.get("description"),
            display_name=data.get("display_name"),
            defaults=data.get("defaults", {}),
            self_test=data.get("self_test", {}),
        )


class ConstructionInterface(ABC):
    """
    One construction: how to draw a sample, which suite certifies it, and how
    it is written to and read back from JSON.
    """

    def __init__(self):
        self.config: Optional[ConstructionConfig] = None

    def get_config(self) -> ConstructionConfig:
        """Static configuration read from the config.json beside the adapter."""
        if not self.config:
            module = __import__(self.__class__.__module__, fromlist=["__file__"])
            self.config = ConstructionConfig.from_file(Path(module.__file__).with_name("config.json"))
        return self.config

    @abstractmethod
    def sample(self, config, rng: np.random.Generator) -> Any:
        """Draw one sample for an ExperimentConfig."""
        pass

    @abstractmethod
    def verify(self, sample: Any, config) -> List:
        """Run the construction's suite; returns CheckReports."""
        pass

    @abstractmethod
    def to_json(self, sample: Any) -> Dict:
        pass

    @abstractmethod
    def from_json(self, doc: Dict) -> Any:
        pass

    def render(self, sample: Any) -> Dict[str, str]:
        """Artifacts keyed by file suffix ('svg', 'dot')."""
        return {}

    def run_self_test(self) -> Dict[str, Any]:
        """
        Draw one small sample with a fixed seed and run the suite on it.
        Returns dict with:
        - success (bool)
        - message (str)
        - details (dict)
        """
        from models import ExperimentConfig

        cfg = self.get_config()
        try:
            experiment = ExperimentConfig(command=cfg.command, **{**cfg.defaults, **cfg.self_test})
            sample = self.sample(experiment, np.random.default_rng(0))
            reports = self.verify(sample, experiment)
        except Exception as e:
            logger.error(f"Self-test of {self.get_plugin_id()} raised: {e}")
            return {"success": False, "message": f"Self-test raised {type(e).__name__}: {e}", "details": {}}

        failed = [r.name for r in reports if not r.passed]
        return {
            "success": not failed,
            "message": "all checks passed" if not failed else f"{len(failed)} checks failed",
            "details": {"checks": len(reports), "failed": failed},
        }

    def get_plugin_id(self) -> str:
        return self.__class__.__module__.split(".")[1]
