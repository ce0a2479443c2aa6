import numpy as np
import pytest

from managers.atomic_manager import AtomicManager
from managers.besov_manager import BesovManager
from managers.lipschitz_manager import LipschitzManager
from managers.measure_manager import MeasureManager
from managers.metric_manager import MetricManager
from managers.transport_manager import TransportManager
from models.metric_space import MetricMeasureSpace
from services.field_generator import FieldGenerator
from services.lp_solver import SimplexSolver
from services.space_generator import SpaceGenerator


@pytest.fixture
def metric_manager():
    return MetricManager()


@pytest.fixture
def transport_manager():
    return TransportManager(SimplexSolver(), MeasureManager())


@pytest.fixture
def lipschitz_manager():
    return LipschitzManager()


@pytest.fixture
def atomic_manager(transport_manager, metric_manager):
    return AtomicManager(transport_manager, metric_manager)


@pytest.fixture
def besov_manager(lipschitz_manager):
    return BesovManager(SimplexSolver(), lipschitz_manager)


@pytest.fixture
def space_generator(metric_manager):
    return SpaceGenerator(metric_manager)


@pytest.fixture
def field_generator():
    return FieldGenerator()


@pytest.fixture
def two_point(metric_manager):
    """Points a, b at distance 1"""
    return metric_manager.validate_metric([[0.0, 1.0], [1.0, 0.0]], ['a', 'b'])


@pytest.fixture
def two_point_mm(two_point):
    return MetricMeasureSpace.uniform(two_point)


def random_space(metric_manager, rng, n, dim=2, scale=1.0):
    """n uniform points in [0, scale]^dim with Euclidean distances"""
    return metric_manager.from_coordinates(scale * rng.random((n, dim)))


def grid(metric_manager, n):
    return metric_manager.from_coordinates(np.linspace(0.0, 1.0, n))
