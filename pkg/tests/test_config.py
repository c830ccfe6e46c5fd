import pytest

from soler2d.config import RunConfig, load_config, parse_config_text
from soler2d.errors import ConfigError


def test_defaults_are_valid_and_round_trip():
    cfg = RunConfig().validate()
    assert cfg.grid.dx == 0.5 and cfg.stepper.stride_steps == 16
    again = RunConfig().updated(parse_config_text(cfg.dumps()))
    assert again == cfg


def test_dotted_keys():
    keys = RunConfig.keys()
    for key in ("grid.n", "grid.L", "sim.dt", "sim.t_end", "sim.snapshot_stride", "model.mass",
                "data.epsilon", "data.direction", "sobolev.N", "output.dir", "companion", "linear_only"):
        assert key in keys
    assert len(keys) == 12


def test_parse_config_text_comments_and_errors():
    text = "# header\ngrid.n = 128   # inline\n\nmodel.mass=0.5\n"
    assert parse_config_text(text) == {"grid.n": "128", "model.mass": "0.5"}
    with pytest.raises(ConfigError):
        parse_config_text("grid.n 128\n")
    with pytest.raises(ConfigError):
        parse_config_text("grid.n = 1\ngrid.n = 2\n")


def test_typed_values():
    cfg = RunConfig().updated({"grid.n": "128", "companion": "yes", "linear_only": "off",
                               "data.direction": "1, 1j"})
    assert cfg.grid_n == 128 and cfg.companion is True and cfg.linear_only is False
    assert cfg.data_direction == pytest.approx((2 ** -0.5, 1j * 2 ** -0.5))
    for bad in ({"grid.n": "12.5"}, {"companion": "maybe"}, {"data.direction": "1"},
                {"data.direction": "0, 0"}, {"grid.size": "3"}):
        with pytest.raises(ConfigError):
            RunConfig().updated(bad)


def test_file_then_overrides(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text("model.mass = 0.25\ndata.epsilon = 0.1\n")
    cfg = load_config(path, {"data.epsilon": "0.2"})
    assert cfg.model_mass == 0.25 and cfg.data_epsilon == 0.2
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.txt")


@pytest.mark.parametrize("pairs", [
    {"model.mass": "1.5"},
    {"model.mass": "-0.1"},
    {"data.epsilon": "-1"},
    {"sobolev.N": "1"},
    {"grid.n": "64"},                      # dx = 2 leaves the bump unresolved
    {"sim.dt": "0.25"},                    # dx / 4 = 0.125
    {"sim.snapshot_stride": "0.3"},        # not a multiple of dt
    {"sim.t_end": "2"},
    {"sim.t_end": "80"},                   # wraps around the periodic box
    {"companion": "true"},                 # needs m = 0
])
def test_validation_rejects(pairs):
    with pytest.raises(ConfigError):
        RunConfig().updated(pairs).validate()


def test_companion_with_massless_is_valid():
    RunConfig().updated({"companion": "true", "model.mass": "0"}).validate()
