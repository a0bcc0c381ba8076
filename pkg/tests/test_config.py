import pytest

from d2dmalware import ConfigurationError
from d2dmalware.config import SimConfig, parse_list, parse_quantity

MINIMAL = """
[geometry]
gamma = 20 /km
[devices]
lambda = 2
[graph]
r = 300 m
[dynamics]
infection_rate = 1 /min
"""


@pytest.mark.parametrize("text, kind, value", [
    ("300 m", "length", 0.3),
    ("2.5 km", "length", 2.5),
    ("40 sec", "time", 2 / 3),
    ("2 min", "time", 2.0),
    ("20 /km", "per_km", 20.0),
    ("2 devices/km", "per_km", 2.0),
    ("1 /min", "rate", 1.0),
    ("0.5", "number", 0.5),
])
def test_units(text, kind, value):
    assert parse_quantity(text, kind) == pytest.approx(value)


@pytest.mark.parametrize("text, kind", [("3 furlongs", "length"), ("abc", "time"), ("2 m", "time")])
def test_bad_quantities(text, kind):
    with pytest.raises(ConfigurationError):
        parse_quantity(text, kind)


def test_ranges_are_inclusive():
    assert parse_list("1:8:1", "per_km") == [1, 2, 3, 4, 5, 6, 7, 8]
    assert parse_list("0.5:0.8:0.1", "rate") == pytest.approx([0.5, 0.6, 0.7, 0.8])
    assert parse_list("1, 3, 5:6:0.5", "number") == [1, 3, 5, 5.5, 6]
    with pytest.raises(ConfigurationError):
        parse_list("1:2", "number")


def test_minimal_config_defaults():
    cfg = SimConfig.from_ini(MINIMAL)
    assert cfg.gamma == 20 and cfg.r == pytest.approx(0.3) and cfg.lambdas == [2.0]
    assert cfg.model == "SI" and cfg.markovian
    assert cfg.model_params().patch is None


def test_round_trip_is_exact():
    text = MINIMAL.replace("[devices]\nlambda = 2", "[devices]\nlambda = 1:3:1\nrho = 0.3") + """
model = SIG
markovian = no
infection_window = 40 sec, 120 sec
patch_window = 40 sec, 180 sec
[experiment]
u = 2.5 km, 5 km
control = patch_max
control_grid = 0.7:1.2:0.1 min
rho_grid = 0.1, 0.2
environments = 7
[run]
master_seed = 12
"""
    cfg = SimConfig.from_ini(text)
    assert SimConfig.from_ini(cfg.to_ini()) == cfg
    assert cfg.patch_window == pytest.approx((2 / 3, 3.0))


def test_metadata_comments_are_ignored():
    cfg = SimConfig.from_ini(MINIMAL)
    assert SimConfig.from_ini("# seed_scheme = x\n" + cfg.to_ini()) == cfg


@pytest.mark.parametrize("text, field", [
    (MINIMAL.replace("gamma = 20 /km", ""), "geometry.gamma"),
    (MINIMAL.replace("r = 300 m", ""), "graph.r"),
    (MINIMAL.replace("lambda = 2", ""), "devices.lambda"),
])
def test_missing_fields_are_named(text, field):
    with pytest.raises(ConfigurationError, match=field):
        SimConfig.from_ini(text)


@pytest.mark.parametrize("extra", [
    "[experiment]\nenvironments = 0",
    "[experiment]\nenvironments = many",
    "[experiment]\nu = 2.5\n[geometry]\nhalf_width = 1",
])
def test_invalid_values(extra):
    text = MINIMAL + extra if "[geometry]" not in extra else MINIMAL.replace(
        "gamma = 20 /km", "gamma = 20 /km\nhalf_width = 1") + "[experiment]\nu = 2.5\n"
    with pytest.raises(ConfigurationError):
        SimConfig.from_ini(text)


def test_sig_needs_patch_rate_and_negative_gamma_rejected():
    with pytest.raises(ConfigurationError, match="patch_rate"):
        SimConfig.from_ini(MINIMAL.replace("[dynamics]", "[dynamics]\nmodel = SIG"))
    with pytest.raises(ConfigurationError):
        SimConfig.from_ini(MINIMAL.replace("gamma = 20 /km", "gamma = -1"))


def test_sweep_plan_requires_grids():
    with pytest.raises(ConfigurationError):
        SimConfig.from_ini(MINIMAL).sweep_plan()
