"""Scenario configuration: a flat, diff-friendly key-value text format.

Grammar (see docs/config-format.md):

* blank lines and lines starting with ``#`` are ignored;
* ``[section]`` opens a section: ``scenario``, ``flags``, ``noise`` or
  ``vehicle <id>``;
* every other line is ``key = value``.

Unknown sections or keys are rejected, every error names the offending
field, and a seed is mandatory - scenarios never draw ambient
randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .attributes import AttributeSet, FIELD_NAMES, NoiseProfile
from .errors import EncodingError, ParseError, ValidationError

PROTOCOL_MODES = ("plain_pki", "base", "nonce_ack", "fs_dh", "iso_ke", "sigma", "tls")
STRATEGIES = ("passive", "mitm_relay", "repetition_v1", "repetition_v2", "corrupt_after")
DATA_MODES = ("keystream", "aead")
SUITES = ("toy-v1", "std-v1")

DEFAULT_VEHICLES = (
    ("sender", AttributeSet(
        license_number="GM61KL2", brand="gm-sedan", color="blue",
        texture_marks=("scratch-left",),
        transceiver_fingerprint=bytes.fromhex("a1b2c3d4e5f60718"))),
    ("receiver", AttributeSet(
        license_number="WB20MR9", brand="wb-coupe", color="red",
        texture_marks=("dent-rear",),
        transceiver_fingerprint=bytes.fromhex("0f1e2d3c4b5a6978"))),
    ("adversary", AttributeSet(
        license_number="ZZ99XX1", brand="zz-van", color="black",
        texture_marks=(),
        transceiver_fingerprint=bytes.fromhex("c0ffee0012345678"))),
)


@dataclass(frozen=True)
class ScenarioFlags:
    transceiver_theft: bool = False
    similar_attributes: bool = False
    responder_sends_first: bool = False
    data_mode: str = "keystream"


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    mode: str = "base"
    strategy: str = "passive"
    suite: str = "toy-v1"
    sender: str = "sender"
    receiver: str = "receiver"
    adversary: str = "adversary"
    vehicles: tuple[tuple[str, AttributeSet], ...] = DEFAULT_VEHICLES
    flags: ScenarioFlags = field(default_factory=ScenarioFlags)
    noise: NoiseProfile = field(default_factory=NoiseProfile)

    @property
    def scenario_id(self) -> str:
        return f"{self.mode}-{self.strategy}-{self.seed}"

    def with_overrides(self, mode: str | None = None, strategy: str | None = None,
                       seed: int | None = None) -> "ScenarioConfig":
        cfg = self
        if mode is not None:
            cfg = replace(cfg, mode=mode)
        if strategy is not None:
            cfg = replace(cfg, strategy=strategy)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        return validate_config(cfg)


# --- low-level flat format ------------------------------------------------------

def parse_flat(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Sections mapped to {key: (value, line-number)}; syntax errors only."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ParseError("malformed section header", lineno, raw.index("[") + 1)
            current = line[1:-1].strip()
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, len(raw) + 1)
        if current is None:
            raise ParseError("key before any section header", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ParseError("empty key", lineno, raw.index("=") + 1)
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = (value.strip(), lineno)
    return sections


def _bool(field_name: str, value: str) -> bool:
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise ValidationError(field_name, f"expected a boolean, got {value!r}")


def _choice(field_name: str, value: str, valid: tuple[str, ...]) -> str:
    if value not in valid:
        raise ValidationError(field_name, f"{value!r} is not one of: {', '.join(valid)}")
    return value


_SCENARIO_KEYS = {"mode", "strategy", "seed", "suite", "sender", "receiver", "adversary"}
_FLAG_KEYS = {"transceiver_theft", "similar_attributes", "responder_sends_first",
              "data_mode"}
_VEHICLE_KEYS = {"license", "brand", "color", "texture", "fingerprint"}


def parse_config(text: str) -> ScenarioConfig:
    sections = parse_flat(text)

    scenario = {k: v for k, (v, _) in sections.pop("scenario", {}).items()}
    unknown = set(scenario) - _SCENARIO_KEYS
    if unknown:
        raise ValidationError(f"scenario.{sorted(unknown)[0]}", "unknown key")

    if "seed" not in scenario:
        raise ValidationError("scenario.seed", "required (scenarios draw no ambient randomness)")
    try:
        seed = int(scenario["seed"], 0)
    except ValueError:
        raise ValidationError("scenario.seed", f"not an integer: {scenario['seed']!r}") from None
    if not 0 <= seed < 1 << 64:
        raise ValidationError("scenario.seed", "must fit in 64 bits")

    flags_raw = {k: v for k, (v, _) in sections.pop("flags", {}).items()}
    unknown = set(flags_raw) - _FLAG_KEYS
    if unknown:
        raise ValidationError(f"flags.{sorted(unknown)[0]}", "unknown key")
    flags = ScenarioFlags(
        transceiver_theft=_bool("flags.transceiver_theft",
                                flags_raw.get("transceiver_theft", "false")),
        similar_attributes=_bool("flags.similar_attributes",
                                 flags_raw.get("similar_attributes", "false")),
        responder_sends_first=_bool("flags.responder_sends_first",
                                    flags_raw.get("responder_sends_first", "false")),
        data_mode=_choice("flags.data_mode", flags_raw.get("data_mode", "keystream"),
                          DATA_MODES),
    )

    noise_raw = {k: v for k, (v, _) in sections.pop("noise", {}).items()}
    corruption = {}
    for key, value in noise_raw.items():
        if key not in FIELD_NAMES:
            raise ValidationError(f"noise.{key}", "unknown attribute field")
        try:
            corruption[key] = float(value)
        except ValueError:
            raise ValidationError(f"noise.{key}", f"not a number: {value!r}") from None
    try:
        noise = NoiseProfile(corruption)
    except EncodingError as exc:
        raise ValidationError("noise", str(exc)) from None

    vehicles: list[tuple[str, AttributeSet]] = []
    vehicle_sections = [(name, body) for name, body in sections.items()
                        if name.startswith("vehicle")]
    for name, body in sections.items():
        if not name.startswith("vehicle"):
            raise ValidationError(name, "unknown section")
    for index, (name, body) in enumerate(vehicle_sections):
        vehicle_id = name[len("vehicle"):].strip()
        if not vehicle_id:
            raise ValidationError(f"vehicles[{index}].id", "section needs an id: [vehicle <id>]")
        if any(vid == vehicle_id for vid, _ in vehicles):
            raise ValidationError(f"vehicles[{index}].id", f"duplicate vehicle id {vehicle_id!r}")
        fields = {k: v for k, (v, _) in body.items()}
        unknown = set(fields) - _VEHICLE_KEYS
        if unknown:
            raise ValidationError(f"vehicles[{index}].{sorted(unknown)[0]}", "unknown key")
        for required in ("license", "brand", "color", "fingerprint"):
            if required not in fields:
                raise ValidationError(f"vehicles[{index}].{required}", "required")
        texture = tuple(t.strip() for t in fields.get("texture", "").split(",") if t.strip())
        try:
            fingerprint = bytes.fromhex(fields["fingerprint"])
        except ValueError:
            raise ValidationError(f"vehicles[{index}].fingerprint",
                                  "expected hex octets") from None
        try:
            attrs = AttributeSet(
                license_number=fields["license"],
                brand=fields["brand"],
                color=fields["color"],
                texture_marks=texture,
                transceiver_fingerprint=fingerprint,
            )
        except EncodingError as exc:
            raise ValidationError(f"vehicles[{index}]", str(exc)) from None
        vehicles.append((vehicle_id, attrs))

    config = ScenarioConfig(
        seed=seed,
        mode=_choice("scenario.mode", scenario.get("mode", "base"), PROTOCOL_MODES),
        strategy=_choice("scenario.strategy", scenario.get("strategy", "passive"),
                         STRATEGIES),
        suite=_choice("scenario.suite", scenario.get("suite", "toy-v1"), SUITES),
        sender=scenario.get("sender", "sender"),
        receiver=scenario.get("receiver", "receiver"),
        adversary=scenario.get("adversary", "adversary"),
        vehicles=tuple(vehicles) if vehicles else DEFAULT_VEHICLES,
        flags=flags,
        noise=noise,
    )
    return validate_config(config)


def validate_config(config: ScenarioConfig) -> ScenarioConfig:
    _choice("scenario.mode", config.mode, PROTOCOL_MODES)
    _choice("scenario.strategy", config.strategy, STRATEGIES)
    _choice("scenario.suite", config.suite, SUITES)
    ids = [vid for vid, _ in config.vehicles]
    for index, vid in enumerate(ids):
        if ids.count(vid) > 1:
            raise ValidationError(f"vehicles[{index}].id", f"duplicate vehicle id {vid!r}")
    for role, vid in (("sender", config.sender), ("receiver", config.receiver),
                      ("adversary", config.adversary)):
        if vid not in ids:
            raise ValidationError(f"scenario.{role}",
                                  f"references unknown vehicle {vid!r}")
    if len({config.sender, config.receiver, config.adversary}) != 3:
        raise ValidationError("scenario", "sender, receiver and adversary must be distinct")
    return config


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
