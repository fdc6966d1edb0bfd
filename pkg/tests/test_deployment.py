import pytest

from wsn_sched.core import Area, ConfigError
from wsn_sched.deployment import (deploy_grid, deploy_random, format_placement, grid_shape,
                                  parse_placement)


def _brute_grid_shape(count, area):
    pairs = [(r, count // r) for r in range(1, count + 1) if count % r == 0]
    return min(pairs, key=lambda rc: abs(area.width_cm / rc[1] - area.height_cm / rc[0]))


def test_random_default_field():
    dep = deploy_random(50, Area(800, 500), seed=11)
    assert dep.count == 50
    assert dep.coords()[0] == (0.0, 0.0)
    assert all(dep.area.contains(p.x_cm, p.y_cm) for _, p in dep.positions)
    assert [nid for nid, _ in dep.positions] == list(range(50))


def test_random_minimal_and_repeatable():
    dep = deploy_random(2, Area(800, 500), seed=5)
    assert dep.count == 2 and dep.coords()[0] == (0.0, 0.0)
    assert deploy_random(50, Area(800, 500), 9) == deploy_random(50, Area(800, 500), 9)
    assert deploy_random(50, Area(800, 500), 9) != deploy_random(50, Area(800, 500), 10)


def test_random_center_gateway():
    assert deploy_random(5, Area(800, 500), 1, "center").coords()[0] == (400.0, 250.0)


def test_count_precondition():
    with pytest.raises(ConfigError):
        deploy_random(1, Area(800, 500), 0)
    with pytest.raises(ConfigError):
        deploy_grid(1, Area(800, 500))


def test_grid_default_shape():
    area = Area(800, 500)
    assert grid_shape(50, area) == (5, 10) == _brute_grid_shape(50, area)
    xs = sorted({x for x, _ in deploy_grid(50, area).coords().values()})
    ys = sorted({y for _, y in deploy_grid(50, area).coords().values()})
    assert len(xs) == 10 and len(ys) == 5
    assert {round(b - a, 9) for a, b in zip(xs, xs[1:])} == {80.0}
    assert {round(b - a, 9) for a, b in zip(ys, ys[1:])} == {100.0}


@pytest.mark.parametrize("count", [2, 6, 12, 36, 49, 50, 97])
def test_grid_shape_matches_enumeration(count):
    area = Area(800, 500)
    assert grid_shape(count, area) == _brute_grid_shape(count, area)


def test_grid_square_case():
    dep = deploy_grid(4, Area(100, 100))
    assert sorted(dep.coords().values()) == sorted([(25, 25), (75, 25), (25, 75), (75, 75)])
    assert dep.coords()[0] == (25.0, 25.0)
    assert deploy_grid(4, Area(100, 100)) == dep


def test_placement_round_trip():
    dep = deploy_random(20, Area(800, 500), 3)
    assert parse_placement(format_placement(dep)) == dep
    with pytest.raises(ConfigError):
        parse_placement("0 1 2\n")
