import numpy as np
import pytest

from afc.flow.config import JetConfig, SimConfig


@pytest.fixture
def tiny_sim() -> SimConfig:
    """Small domain that still honors the 2D clearance rule."""
    return SimConfig(lx=12.0, ly=8.0, cylinder_center=(4.0, 4.0), h=0.1, n_pe=2)


@pytest.fixture
def jets() -> JetConfig:
    return JetConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def pytest_configure(config):
    # make the repo root importable (tools.make_golden_frames in tests)
    import sys
    from pathlib import Path

    root = str(Path(__file__).resolve().parent.parent)
    if root not in sys.path:
        sys.path.insert(0, root)
