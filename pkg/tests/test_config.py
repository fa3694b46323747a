import pytest

from vanetauth.config import DEFAULT_VEHICLES, parse_config, parse_flat
from vanetauth.errors import ParseError, ValidationError

MINIMAL = "[scenario]\nseed = 1\n"


def test_minimal_config_fills_defaults():
    config = parse_config(MINIMAL)
    assert config.seed == 1
    assert config.mode == "base"
    assert config.strategy == "passive"
    assert config.suite == "toy-v1"
    assert config.vehicles == DEFAULT_VEHICLES
    assert config.flags.data_mode == "keystream"
    assert not config.flags.transceiver_theft


def test_full_config_round_trip():
    text = """
# a complete scenario
[scenario]
mode = nonce_ack
strategy = repetition_v2
seed = 99
suite = std-v1
sender = v1
receiver = v2
adversary = v3

[flags]
responder_sends_first = true
data_mode = aead

[noise]
color = 0.25

[vehicle v1]
license = AA11BB2
brand = gm-sedan
color = blue
texture = scratch-left, dent-rear
fingerprint = 0011223344556677

[vehicle v2]
license = CC33DD4
brand = wb-coupe
color = red
fingerprint = 8899aabbccddeeff

[vehicle v3]
license = EE55FF6
brand = zz-van
color = black
fingerprint = 0102030405060708
"""
    config = parse_config(text)
    assert config.mode == "nonce_ack"
    assert config.flags.data_mode == "aead"
    assert config.noise.probability("color") == 0.25
    assert len(config.vehicles) == 3
    v1 = dict(config.vehicles)["v1"]
    assert v1.texture_marks == ("scratch-left", "dent-rear")
    assert v1.transceiver_fingerprint == bytes.fromhex("0011223344556677")


def test_seed_is_mandatory():
    with pytest.raises(ValidationError, match="scenario.seed"):
        parse_config("[scenario]\nmode = base\n")


def test_unknown_mode_names_valid_ones():
    with pytest.raises(ValidationError) as excinfo:
        parse_config("[scenario]\nseed = 1\nmode = dh2\n")
    assert "dh2" in str(excinfo.value)
    assert "base" in str(excinfo.value) and "sigma" in str(excinfo.value)


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError, match="scenario.colour_scheme"):
        parse_config("[scenario]\nseed = 1\ncolour_scheme = mauve\n")
    with pytest.raises(ValidationError, match="flags.warp_speed"):
        parse_config("[scenario]\nseed = 1\n[flags]\nwarp_speed = true\n")


def test_unknown_section_rejected():
    with pytest.raises(ValidationError, match="telemetry"):
        parse_config("[scenario]\nseed = 1\n[telemetry]\nx = 1\n")


def test_duplicate_vehicle_id_names_the_index():
    text = """
[scenario]
seed = 1
[vehicle v1]
license = AA11BB2
brand = b
color = blue
fingerprint = 0011223344556677
[vehicle  v1]
license = CC33DD4
brand = b
color = red
fingerprint = 8899aabbccddeeff
"""
    with pytest.raises(ValidationError, match=r"vehicles\[1\].id"):
        parse_config(text)


def test_parse_error_carries_line_and_column():
    with pytest.raises(ParseError) as excinfo:
        parse_flat("[scenario]\nseed 1\n")
    assert excinfo.value.line == 2
    with pytest.raises(ParseError) as excinfo:
        parse_flat("seed = 1\n")
    assert excinfo.value.line == 1


def test_missing_vehicle_field_names_it():
    text = """
[scenario]
seed = 1
[vehicle v1]
license = AA11BB2
brand = b
color = blue
"""
    with pytest.raises(ValidationError, match=r"vehicles\[0\].fingerprint"):
        parse_config(text)


def test_role_references_must_exist():
    text = """
[scenario]
seed = 1
sender = ghost
[vehicle v1]
license = AA11BB2
brand = b
color = blue
fingerprint = 0011223344556677
"""
    with pytest.raises(ValidationError, match="scenario.sender"):
        parse_config(text)


def test_invalid_noise_probability():
    with pytest.raises(ValidationError, match="noise"):
        parse_config("[scenario]\nseed = 1\n[noise]\ncolor = 1.5\n")
    with pytest.raises(ValidationError, match="noise.wheelbase"):
        parse_config("[scenario]\nseed = 1\n[noise]\nwheelbase = 0.5\n")


def test_with_overrides_revalidates():
    config = parse_config(MINIMAL)
    assert config.with_overrides(mode="sigma").mode == "sigma"
    with pytest.raises(ValidationError):
        config.with_overrides(mode="nope")
