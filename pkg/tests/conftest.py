from dataclasses import dataclass
from random import Random

import pytest

from vanetauth.attributes import (
    AttributeSet,
    COLOR_TOKENS,
    SensorReading,
    ZERO_NOISE,
    sense,
)
from vanetauth.certificates import CertificateAuthority, VehicleIdentity, enroll_vehicle
from vanetauth.suite import SUITE_NAMES, CipherSuite, get_suite

SENDER_ATTRS = AttributeSet(
    license_number="GM61KL2", brand="gm-sedan", color="blue",
    texture_marks=("scratch-left",),
    transceiver_fingerprint=bytes.fromhex("a1b2c3d4e5f60718"))
RECEIVER_ATTRS = AttributeSet(
    license_number="WB20MR9", brand="wb-coupe", color="red",
    texture_marks=("dent-rear",),
    transceiver_fingerprint=bytes.fromhex("0f1e2d3c4b5a6978"))
ADVERSARY_ATTRS = AttributeSet(
    license_number="ZZ99XX1", brand="zz-van", color="black",
    texture_marks=(),
    transceiver_fingerprint=bytes.fromhex("c0ffee0012345678"))


@dataclass
class World:
    suite: CipherSuite
    rng: Random
    ca: CertificateAuthority
    trust: dict
    sender: VehicleIdentity
    receiver: VehicleIdentity
    adversary: VehicleIdentity


def build_world(suite: CipherSuite, seed: int = 1234) -> World:
    rng = Random(seed)
    ca = CertificateAuthority("ca-1", suite, rng)
    trust = dict([ca.trust_entry()])
    return World(
        suite=suite, rng=rng, ca=ca, trust=trust,
        sender=enroll_vehicle(ca, suite, "sender", SENDER_ATTRS, rng),
        receiver=enroll_vehicle(ca, suite, "receiver", RECEIVER_ATTRS, rng),
        adversary=enroll_vehicle(ca, suite, "adversary", ADVERSARY_ATTRS, rng),
    )


def reading_of(attrs: AttributeSet, seed: int = 0) -> SensorReading:
    return sense(attrs, ZERO_NOISE, Random(seed))


def random_attrs(rng: Random) -> AttributeSet:
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    license_number = "".join(rng.choice(alphabet) for _ in range(rng.randint(5, 10)))
    marks = tuple(rng.choice(["scratch", "dent", "sticker", "rust"])
                  for _ in range(rng.randint(0, 3)))
    return AttributeSet(
        license_number=license_number,
        brand=rng.choice(["gm-sedan", "wb-coupe", "zz-van", "ql-truck"]),
        color=rng.choice(COLOR_TOKENS),
        texture_marks=marks,
        transceiver_fingerprint=rng.getrandbits(64).to_bytes(8, "big"),
    )


@pytest.fixture(params=SUITE_NAMES)
def suite(request):
    return get_suite(request.param)


@pytest.fixture
def toy_suite():
    return get_suite("toy-v1")


@pytest.fixture
def world(suite):
    return build_world(suite)


@pytest.fixture
def toy_world(toy_suite):
    return build_world(toy_suite)
