import json

import pytest

from horizonlab.config import SECTION_DEFAULTS, config_hash, load_config, parse_config
from horizonlab.errors import ConfigError, DimensionError
from horizonlab.geometry.submanifolds import PointSet, ProductOfSpheres, RoundSphere

POINT = {"n": 3, "m": 0, "shape": {"points": [[0.0, 0.0, 0.0]]}, "epsilon": 0.1}
CIRCLE = {"n": 4, "m": 1, "shape": {"sphere": {"radius": 1.0}}, "epsilon": 0.05}


def test_defaults_are_filled_in():
    config = parse_config(POINT)
    echo = config.echo()
    assert echo["mode"] == "reduced_1d"
    assert echo["grid"] == {"base": 32, "fiber": 64}
    for section, defaults in SECTION_DEFAULTS.items():
        assert set(echo[section]) == set(defaults)
    assert echo["acceptance"]["criteria"] == list(range(1, 12))
    assert isinstance(config.submanifold, PointSet)


def test_full_mode_fiber_default():
    config = parse_config({**POINT, "mode": "full"})
    assert config.grid["fiber"] == [32, 16]
    assert config.resolution == (32, (32, 16))


def test_shapes_build_catalog_submanifolds():
    assert isinstance(parse_config(CIRCLE).submanifold, RoundSphere)
    torus = parse_config(
        {
            "n": 5,
            "m": 2,
            "shape": {"product": {"radii": [1.0, 2.0], "dims": [1, 1]}},
            "epsilon": 0.05,
        }
    )
    assert isinstance(torus.submanifold, ProductOfSpheres)
    assert torus.mode == "full"


def test_config_hash_is_stable_and_sensitive():
    first = parse_config(CIRCLE)
    second = parse_config(json.dumps(CIRCLE))
    assert first.config_hash == second.config_hash
    assert first.config_hash == config_hash(first.echo())
    assert parse_config({**CIRCLE, "epsilon": 0.06}).config_hash != first.config_hash


def test_out_dir_is_not_part_of_the_hash():
    assert (
        parse_config(CIRCLE, out_dir="a").config_hash
        == parse_config(CIRCLE, out_dir="b").config_hash
    )


def test_with_overrides_revalidates():
    config = parse_config(CIRCLE)
    assert config.with_overrides(epsilon=0.025).epsilon == 0.025
    with pytest.raises(ConfigError):
        config.with_overrides(epsilon=-1.0)


@pytest.mark.parametrize(
    "changes, field",
    [
        ({"epsilon": 0.0}, "epsilon"),
        ({"colour": "red"}, "colour"),
        ({"mode": "diagonal"}, "mode"),
        ({"grid": {"base": 32, "fiber": [15, 8]}}, "grid.fiber[0]"),
        ({"grid": {"base": 4}}, "grid.base"),
        ({"tolerances": {"quadrature": -1}}, "tolerances.quadrature"),
        ({"solver": {"max_flow_step": 3}}, "solver.max_flow_step"),
        ({"solver": {"max_refinements": -1}}, "solver.max_refinements"),
        ({"scan": {"a_max_over_reach": 1.2}}, "scan.a_max_over_reach"),
        ({"acceptance": {"criteria": [12]}}, "acceptance.criteria"),
        ({"rescaling": {"epsilons": [0.1, 0.2]}}, "rescaling.epsilons"),
    ],
)
def test_config_errors_name_the_field(changes, field):
    with pytest.raises(ConfigError) as info:
        parse_config({**CIRCLE, **changes})
    assert info.value.context["field"] == field
    assert info.value.exit_code == 2


def test_missing_required_key():
    data = dict(POINT)
    del data["epsilon"]
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.field == "epsilon"


def test_shape_must_match_dimensions():
    with pytest.raises(ConfigError):
        parse_config({**CIRCLE, "shape": {"points": [[0.0, 0.0, 0.0, 0.0]]}})
    with pytest.raises(ConfigError):
        parse_config({**POINT, "mode": "reduced_1d", "shape": {"points": [[0, 0, 0], [1, 0, 0]]}})


def test_invalid_dimension_pair():
    with pytest.raises(DimensionError) as info:
        parse_config({**CIRCLE, "m": 2})
    assert info.value.exit_code == 2


def test_invalid_json_text():
    with pytest.raises(ConfigError) as info:
        parse_config("{not json")
    assert info.value.field == "config"


def test_load_config_from_disk(tmp_path):
    path = tmp_path / "circle.json"
    path.write_text(json.dumps(CIRCLE), encoding="utf-8")
    config = load_config(path, out_dir=str(tmp_path / "out"))
    assert config.out_dir == str(tmp_path / "out")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_solver_options_carry_the_refinement_cap():
    config = parse_config({**CIRCLE, "solver": {"max_refinements": 3}})
    assert config.solver_options().max_refinements == 3
    assert parse_config(CIRCLE).solver_options().max_refinements == 1
