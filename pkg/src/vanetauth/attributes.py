"""Fixed, out-of-band sense-able vehicle identity and simulated sensing.

An ``AttributeSet`` is the physical identity a certificate couples to a
public key: license number, brand, color, texture marks and the
transceiver fingerprint.  Peers verify it through a (simulated) sensor
channel; ``match_attributes`` compares what a certificate claims against
what the sensor saw.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from random import Random

from .errors import EncodingError, WireFormatError

COLOR_TOKENS = (
    "black",
    "blue",
    "brown",
    "gray",
    "green",
    "orange",
    "red",
    "silver",
    "white",
    "yellow",
)

FINGERPRINT_LEN = 8

_LICENSE_RE = re.compile(r"^[A-Z0-9]{5,10}$")

FIELD_NAMES = ("license_number", "brand", "color", "texture_marks", "transceiver_fingerprint")

# Fields that must be positively verified for an overall match.
MANDATORY_FIELDS = frozenset({"license_number", "transceiver_fingerprint"})


@dataclass(frozen=True)
class AttributeSet:
    """The fixed sense-able identity of one vehicle.

    The field set is a representative, configurable superset of national
    vehicle-identity registers; owner-optional traits (such as a driver
    face) are deliberately not part of the mandatory set.
    """

    license_number: str
    brand: str
    color: str
    texture_marks: tuple[str, ...] = ()
    transceiver_fingerprint: bytes = b"\x00" * FINGERPRINT_LEN

    def __post_init__(self):
        if not _LICENSE_RE.match(self.license_number):
            raise EncodingError(
                f"license_number {self.license_number!r} must be 5-10 uppercase alphanumerics"
            )
        if not self.brand:
            raise EncodingError("brand must be nonempty")
        if self.color not in COLOR_TOKENS:
            raise EncodingError(f"color {self.color!r} not in vocabulary {COLOR_TOKENS}")
        if not isinstance(self.texture_marks, tuple):
            object.__setattr__(self, "texture_marks", tuple(self.texture_marks))
        if any(not m for m in self.texture_marks):
            raise EncodingError("texture marks must be nonempty strings")
        if len(self.transceiver_fingerprint) != FINGERPRINT_LEN:
            raise EncodingError(
                f"transceiver_fingerprint must be {FINGERPRINT_LEN} octets"
            )


def _frame(part: bytes) -> bytes:
    if len(part) > 0xFFFF:
        raise EncodingError("field too long to encode")
    return len(part).to_bytes(2, "big") + part


def canonical_encode(attrs: AttributeSet) -> bytes:
    """Deterministic, injective, self-delimiting encoding.

    Fields appear in declaration order, each length-prefixed; texture
    marks additionally carry their count so distinct mark lists never
    collide with neighbouring fields.
    """
    parts = [
        _frame(attrs.license_number.encode("utf-8")),
        _frame(attrs.brand.encode("utf-8")),
        _frame(attrs.color.encode("utf-8")),
        len(attrs.texture_marks).to_bytes(2, "big"),
    ]
    parts += [_frame(m.encode("utf-8")) for m in attrs.texture_marks]
    parts.append(_frame(attrs.transceiver_fingerprint))
    return b"".join(parts)


def canonical_decode(blob: bytes) -> AttributeSet:
    """Inverse of :func:`canonical_encode`."""
    view = memoryview(blob)
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(view):
            raise WireFormatError("truncated attribute encoding")
        out = bytes(view[pos : pos + n])
        pos += n
        return out

    def take_framed() -> bytes:
        return take(int.from_bytes(take(2), "big"))

    license_number = take_framed().decode("utf-8")
    brand = take_framed().decode("utf-8")
    color = take_framed().decode("utf-8")
    mark_count = int.from_bytes(take(2), "big")
    marks = tuple(take_framed().decode("utf-8") for _ in range(mark_count))
    fingerprint = take_framed()
    if pos != len(view):
        raise WireFormatError("trailing bytes after attribute encoding")
    try:
        return AttributeSet(license_number, brand, color, marks, fingerprint)
    except EncodingError as exc:
        raise WireFormatError(str(exc)) from exc


class SensorChannel(Enum):
    VISUAL = "visual"
    ACOUSTIC = "acoustic"
    RF_FINGERPRINT = "rf_fingerprint"


@dataclass(frozen=True)
class NoiseProfile:
    """Per-field corruption probability, all in [0, 1]."""

    corruption: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, p in self.corruption.items():
            if name not in FIELD_NAMES:
                raise EncodingError(f"unknown attribute field {name!r}")
            if not 0.0 <= p <= 1.0:
                raise EncodingError(f"corruption probability for {name} outside [0, 1]")

    def probability(self, name: str) -> float:
        return self.corruption.get(name, 0.0)


ZERO_NOISE = NoiseProfile()


@dataclass(frozen=True)
class SensorReading:
    observed: AttributeSet
    channel: SensorChannel = SensorChannel.VISUAL
    confidence: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, c in self.confidence.items():
            if not 0.0 <= c <= 1.0:
                raise EncodingError(f"confidence for {name} outside [0, 1]")


def _corrupt_field(name: str, attrs: AttributeSet, rng: Random) -> AttributeSet:
    """Replace one field with a different plausible value."""
    if name == "license_number":
        alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
        while True:
            candidate = "".join(rng.choice(alphabet) for _ in range(7))
            if candidate != attrs.license_number:
                break
        return AttributeSet(candidate, attrs.brand, attrs.color, attrs.texture_marks,
                            attrs.transceiver_fingerprint)
    if name == "brand":
        candidate = attrs.brand + "x" if not attrs.brand.endswith("x") else attrs.brand[:-1]
        return AttributeSet(attrs.license_number, candidate or "other", attrs.color,
                            attrs.texture_marks, attrs.transceiver_fingerprint)
    if name == "color":
        others = [c for c in COLOR_TOKENS if c != attrs.color]
        return AttributeSet(attrs.license_number, attrs.brand, rng.choice(others),
                            attrs.texture_marks, attrs.transceiver_fingerprint)
    if name == "texture_marks":
        marks = attrs.texture_marks + ("smudge",) if "smudge" not in attrs.texture_marks \
            else attrs.texture_marks[:-1]
        return AttributeSet(attrs.license_number, attrs.brand, attrs.color, marks,
                            attrs.transceiver_fingerprint)
    if name == "transceiver_fingerprint":
        flipped = bytes(b ^ 0xFF for b in attrs.transceiver_fingerprint)
        return AttributeSet(attrs.license_number, attrs.brand, attrs.color,
                            attrs.texture_marks, flipped)
    raise EncodingError(f"unknown attribute field {name!r}")


def sense(true_attrs: AttributeSet, noise: NoiseProfile, rng: Random,
          channel: SensorChannel = SensorChannel.VISUAL) -> SensorReading:
    """Simulate one out-of-band observation of a vehicle.

    With zero noise the reading reproduces the true attributes at full
    confidence; otherwise each field is independently corrupted (to a
    value that differs from the truth) with its configured probability.
    """
    observed = true_attrs
    confidence: dict[str, float] = {}
    for name in FIELD_NAMES:
        p = noise.probability(name)
        if p > 0.0 and rng.random() < p:
            observed = _corrupt_field(name, observed, rng)
            confidence[name] = round(rng.uniform(0.1, 0.6), 3)
        else:
            confidence[name] = 1.0
    return SensorReading(observed=observed, channel=channel, confidence=confidence)


class Verdict(Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    UNOBSERVED = "unobserved"


@dataclass(frozen=True)
class MatchPolicy:
    """Which fields must match for verification to pass.

    ``strict`` (the default) fails on any observed mismatch; a relaxed
    policy tolerates mismatches outside the mandatory set, reflecting the
    partial-trust reading of attribute verification.  Base protocol
    sessions always abort when ``overall`` is false.
    """

    mandatory: frozenset[str] = frozenset(MANDATORY_FIELDS)
    strict: bool = True


STRICT_POLICY = MatchPolicy()


@dataclass(frozen=True)
class MatchReport:
    verdicts: dict[str, Verdict]
    overall: bool
    policy: MatchPolicy = STRICT_POLICY


def match_attributes(certified: AttributeSet, reading: SensorReading,
                     policy: MatchPolicy = STRICT_POLICY) -> MatchReport:
    """Compare certified attributes against a sensor reading.

    A field is unobserved when the reading carries no confidence entry
    for it; otherwise it matches iff the observed value equals the
    certified one.
    """
    verdicts: dict[str, Verdict] = {}
    for name in FIELD_NAMES:
        if name not in reading.confidence:
            verdicts[name] = Verdict.UNOBSERVED
        elif getattr(reading.observed, name) == getattr(certified, name):
            verdicts[name] = Verdict.MATCH
        else:
            verdicts[name] = Verdict.MISMATCH

    mandatory_ok = all(verdicts[name] is Verdict.MATCH for name in policy.mandatory)
    if policy.strict:
        overall = mandatory_ok and all(
            v is not Verdict.MISMATCH for v in verdicts.values()
        )
    else:
        overall = mandatory_ok
    return MatchReport(verdicts=verdicts, overall=overall, policy=policy)
