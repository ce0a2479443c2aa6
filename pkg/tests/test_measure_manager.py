import numpy as np
import pytest

from exceptions import ParameterOutOfRangeError
from managers.measure_manager import MeasureManager
from models.measure import SignedMeasure

from conftest import random_space


@pytest.fixture
def manager():
    return MeasureManager()


@pytest.fixture
def line(metric_manager):
    return metric_manager.validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]], ['a', 'b', 'c'])


def test_jordan_decompose(manager, two_point):
    plus, minus = manager.jordan_decompose(SignedMeasure(two_point, [3.0, -2.0]))
    assert plus.mass.tolist() == [3.0, 0.0]
    assert minus.mass.tolist() == [0.0, 2.0]

    plus, minus = manager.jordan_decompose(SignedMeasure.zero(two_point))
    assert not plus.mass.any() and not minus.mass.any()


def test_jordan_parts_are_singular_and_recompose(manager, metric_manager):
    rng = np.random.default_rng(11)
    space = random_space(metric_manager, rng, 10)
    for _ in range(20):
        nu = SignedMeasure(space, rng.normal(size=10))
        plus, minus = manager.jordan_decompose(nu)
        assert np.all(plus.mass >= 0) and np.all(minus.mass >= 0)
        assert not (plus.mass * minus.mass).any()
        assert np.array_equal((plus - minus).mass, nu.mass)
        assert nu.tv() == pytest.approx(plus.total() + minus.total(), rel=1e-15)


def test_total_variation(line):
    nu = SignedMeasure(line, [1.0, -1.0, 0.5])
    assert nu.tv() == 2.5
    assert nu.tv() >= abs(nu.total())
    assert SignedMeasure.dirac_difference(line, 'a', 'c').tv() == 2.0


def test_tv_is_a_norm(metric_manager):
    rng = np.random.default_rng(5)
    space = random_space(metric_manager, rng, 8)
    for _ in range(20):
        a, b = (SignedMeasure(space, rng.normal(size=8)) for _ in range(2))
        assert (a + b).tv() <= a.tv() + b.tv() + 1e-12
        assert (-3.0 * a).tv() == pytest.approx(3.0 * a.tv(), rel=1e-14)


def test_is_balanced(manager, line):
    assert manager.is_balanced(SignedMeasure.dirac_difference(line, 'a', 'b'), 0.0)
    assert not manager.is_balanced(SignedMeasure.dirac(line, 'a'), 1e-9)
    assert manager.is_balanced(SignedMeasure(line, [0.3, 0.2, -0.5]), 1e-12)
    with pytest.raises(ParameterOutOfRangeError):
        manager.is_balanced(SignedMeasure.zero(line), -1.0)


def test_truncate(manager, two_point):
    mu = SignedMeasure(two_point, [1.0, 1e-15])
    assert np.array_equal(manager.finite_support_truncate(mu, 0.0).mass, mu.mass)
    assert manager.finite_support_truncate(mu, 1e-12).mass.tolist() == [1.0, 0.0]
    with pytest.raises(ParameterOutOfRangeError):
        manager.finite_support_truncate(mu, -1.0)


def test_truncation_bound_certified_by_kr(manager, transport_manager, metric_manager):
    rng = np.random.default_rng(2)
    space = random_space(metric_manager, rng, 10)
    mu = SignedMeasure(space, rng.normal(scale=0.02, size=10))
    truncated = manager.finite_support_truncate(mu, 0.01)
    difference = mu - truncated
    norm = transport_manager.kr_norm(space, difference).primal_value
    assert norm <= difference.tv() + 1e-9
    assert norm <= manager.dropped_bound(mu, truncated) + 1e-9


def test_measure_json_defaults_to_zero(line):
    nu = SignedMeasure.from_dict(line, {'mass': {'b': 2.0}})
    assert nu.mass.tolist() == [0.0, 2.0, 0.0]
    assert nu.to_dict() == {'mass': {'b': 2.0}}
    with pytest.raises(KeyError):
        SignedMeasure.from_dict(line, {'mass': {'z': 1.0}})


def test_shape_mismatch(line):
    with pytest.raises(ValueError):
        SignedMeasure(line, [1.0, 2.0])
