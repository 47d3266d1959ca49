import numpy as np
import pytest

from sidebench.config import MetricConfig


@pytest.fixture
def cfg() -> MetricConfig:
    return MetricConfig()


@pytest.fixture
def cfg_noscale() -> MetricConfig:
    return MetricConfig(scaling_mode="none")


def make_depth(values) -> "DepthMap":
    from sidebench.core import DepthMap

    return DepthMap.from_values(np.asarray(values, dtype=np.float64))
