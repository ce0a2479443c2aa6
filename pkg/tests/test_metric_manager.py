import numpy as np
import pytest

from exceptions import (
    AlphaOutOfRangeError, DegenerateFitError, ParameterOutOfRangeError, TriangleViolationError
)
from managers.metric_manager import greedy_cover
from models.metric_space import MetricMeasureSpace

from conftest import grid, random_space


def test_validate_metric_builds_space(metric_manager):
    space = metric_manager.validate_metric([[0, 1], [1, 0]], ['a', 'b'])
    assert space.points == ('a', 'b')
    assert space.diam == 1.0
    assert space.index('b') == 1
    with pytest.raises(KeyError):
        space.index('c')


def test_singleton_space(metric_manager):
    space = metric_manager.validate_metric([[0.0]])
    assert space.n == 1 and space.diam == 0.0
    assert space.realized_distances().size == 0


def test_validate_metric_raises_first_error(metric_manager):
    with pytest.raises(TriangleViolationError):
        metric_manager.validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])


def test_duplicate_point_ids_rejected(metric_manager):
    with pytest.raises(ParameterOutOfRangeError):
        metric_manager.validate_metric([[0, 1], [1, 0]], ['a', 'a'])


def test_dist_matrix_is_read_only(two_point):
    with pytest.raises(ValueError):
        two_point.dist[0, 1] = 5.0


def test_snowflake_examples(metric_manager):
    space = metric_manager.validate_metric([[0, 4], [4, 0]])
    assert metric_manager.snowflake(space, 1.0) is space
    assert metric_manager.snowflake(space, 0.5).dist[0, 1] == 2.0

    line = metric_manager.validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    snow = metric_manager.snowflake(line, 0.5)
    expected = np.array([[0, 1, np.sqrt(2)], [1, 0, 1], [np.sqrt(2), 1, 0]])
    np.testing.assert_allclose(snow.dist, expected, rtol=1e-15)
    assert metric_manager.validation_service.validate_metric(snow.dist).valid


def test_snowflake_composition(metric_manager):
    rng = np.random.default_rng(7)
    space = random_space(metric_manager, rng, 12)
    twice = metric_manager.snowflake(metric_manager.snowflake(space, 0.6), 0.5)
    once = metric_manager.snowflake(space, 0.3)
    np.testing.assert_allclose(twice.dist, once.dist, rtol=1e-12)


@pytest.mark.parametrize('alpha', [0.0, 1.2])
def test_snowflake_alpha_range(metric_manager, two_point, alpha):
    with pytest.raises(AlphaOutOfRangeError):
        metric_manager.snowflake(two_point, alpha)


def test_realized_distances_merge_rounding_noise(metric_manager):
    space = grid(metric_manager, 101)
    radii = space.realized_distances()
    assert radii.size == 100
    np.testing.assert_allclose(radii, np.arange(1, 101) / 100, atol=1e-12)


def test_net_hierarchy_singleton(metric_manager):
    space = metric_manager.validate_metric([[0.0]])
    nets = metric_manager.build_net_hierarchy(space, 3, 1.0)
    assert all(level == (0,) for level in nets.levels)


def test_net_hierarchy_grid(metric_manager):
    space = grid(metric_manager, 11)
    nets = metric_manager.build_net_hierarchy(space, 4, 1.0)
    assert len(nets.levels[0]) == 1
    for n in range(nets.depth + 1):
        assert nets.covering_radius(n) <= 2.0 ** -n + 1e-12
        if n:
            assert set(nets.levels[n - 1]) <= set(nets.levels[n])
    # exhaustive cover check at the finest level
    finest = list(nets.levels[4])
    for x in range(space.n):
        assert min(space.dist[x, c] for c in finest) <= 1 / 16 + 1e-12


def test_net_hierarchy_random_spaces(metric_manager):
    rng = np.random.default_rng(3)
    for _ in range(5):
        space = random_space(metric_manager, rng, 30)
        nets = metric_manager.build_net_hierarchy(space, 5, space.diam)
        for n, radius in enumerate(nets.radii):
            assert nets.covering_radius(n) <= radius


def test_net_hierarchy_bad_parameters(metric_manager, two_point):
    with pytest.raises(ParameterOutOfRangeError):
        metric_manager.build_net_hierarchy(two_point, -1, 1.0)
    with pytest.raises(ParameterOutOfRangeError):
        metric_manager.build_net_hierarchy(two_point, 2, 0.0)


def test_greedy_cover_lowest_index_first(metric_manager):
    space = grid(metric_manager, 5)
    centers = greedy_cover(space.dist, np.arange(5), 0.3)
    assert centers[0] == 0
    assert max(space.dist[:, centers].min(axis=1)) <= 0.3


def test_doubling_constant_examples(metric_manager, two_point):
    singleton = metric_manager.validate_metric([[0.0]])
    assert metric_manager.estimate_doubling_constant(singleton) == 1
    assert metric_manager.estimate_doubling_constant(two_point) <= 2
    assert metric_manager.estimate_doubling_constant(grid(metric_manager, 33)) <= 3


def test_doubling_constant_finite_under_snowflake(metric_manager):
    space = grid(metric_manager, 17)
    for alpha in (0.3, 0.7, 1.0):
        value = metric_manager.estimate_doubling_constant(metric_manager.snowflake(space, alpha))
        assert 1 <= value <= space.n


def test_measure_doubling(metric_manager, two_point_mm):
    assert metric_manager.estimate_measure_doubling(two_point_mm) == pytest.approx(1.0)
    mm = MetricMeasureSpace.uniform(grid(metric_manager, 33))
    assert 1.0 <= metric_manager.estimate_measure_doubling(mm) <= 3.0


def _certifies(mm, c, q):
    dist = mm.space.dist
    for x in range(mm.space.n):
        for r in mm.space.realized_distances():
            assert mm.ball_mass(x, r) >= c * r ** q * (1 - 1e-12)
    return True


def test_lower_mass_bound_two_point(metric_manager, two_point_mm):
    c, q = metric_manager.fit_lower_mass_bound(two_point_mm)
    assert c > 0 and q > 0
    assert _certifies(two_point_mm, c, q)


def test_lower_mass_bound_grid(metric_manager):
    mm = MetricMeasureSpace.uniform(grid(metric_manager, 101))
    c, q = metric_manager.fit_lower_mass_bound(mm)
    assert q == pytest.approx(1.0, abs=0.2)
    assert _certifies(mm, c, q)


def test_lower_mass_bound_equilateral(metric_manager):
    mm = MetricMeasureSpace.uniform(
        metric_manager.validate_metric([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    )
    c, q = metric_manager.fit_lower_mass_bound(mm)
    assert _certifies(mm, c, q)


def test_lower_mass_bound_singleton(metric_manager):
    mm = MetricMeasureSpace.uniform(metric_manager.validate_metric([[0.0]]))
    with pytest.raises(DegenerateFitError):
        metric_manager.fit_lower_mass_bound(mm)


def test_ball_masses_are_closed(two_point_mm):
    masses = two_point_mm.ball_masses()
    assert masses[0, 1] == 1.0
    assert masses[0, 0] == 0.5
