from pathlib import Path

import numpy as np
import pytest

from core.graphs import build_grid_window
from core.plugin_loader import ConstructionLoader
from services.tiling import sample_tiling
from services.tree_sampler import two_ended_tree, wilson_wired_ust
from settings import Settings

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_window():
    return build_grid_window(2, 6, 2)


@pytest.fixture
def tiling_window():
    return build_grid_window(2, 10, 2)


@pytest.fixture
def wired_tree(small_window, rng):
    return wilson_wired_ust(small_window, rng)


@pytest.fixture
def trunk_tree(small_window, rng):
    return two_ended_tree(small_window, 0, rng)


@pytest.fixture
def tiling_sample(tiling_window, rng):
    return sample_tiling(tiling_window, rng)


@pytest.fixture
def loader():
    plugins = ConstructionLoader(str(ROOT / "constructions"))
    plugins.load()
    return plugins


@pytest.fixture
def settings(tmp_path):
    return Settings(
        output_dir=str(tmp_path / "artifacts"),
        constructions_dir=str(ROOT / "constructions"),
        templates_dir=str(ROOT / "templates"),
        workers=1,
    )
