"""Attribute-coupled vehicle authentication protocols and a deterministic
adversarial network simulator."""

from .attributes import (
    AttributeSet,
    MatchPolicy,
    MatchReport,
    NoiseProfile,
    SensorReading,
    ZERO_NOISE,
    canonical_encode,
    match_attributes,
    sense,
)
from .certificates import (
    Certificate,
    CertificateAuthority,
    VehicleIdentity,
    enroll_vehicle,
    pad_compose,
    validate_pad_compose,
    verify_certificate,
)
from .closure import knowledge_closure, replay_derivations
from .config import ScenarioConfig, load_config, parse_config
from .report import emit_report, run_matrix
from .sim import (
    Adversary,
    HonestParty,
    ScenarioResult,
    SimNetwork,
    corrupt_party,
    run_scenario,
    transcript_lines,
)
from .suite import CipherSuite, SUITE_NAMES, get_suite

__version__ = "0.1.0"

__all__ = [
    "Adversary",
    "AttributeSet",
    "Certificate",
    "CertificateAuthority",
    "CipherSuite",
    "HonestParty",
    "MatchPolicy",
    "MatchReport",
    "NoiseProfile",
    "ScenarioConfig",
    "ScenarioResult",
    "SensorReading",
    "SimNetwork",
    "SUITE_NAMES",
    "VehicleIdentity",
    "ZERO_NOISE",
    "canonical_encode",
    "corrupt_party",
    "emit_report",
    "enroll_vehicle",
    "get_suite",
    "knowledge_closure",
    "load_config",
    "match_attributes",
    "pad_compose",
    "parse_config",
    "replay_derivations",
    "run_matrix",
    "run_scenario",
    "sense",
    "transcript_lines",
    "validate_pad_compose",
    "verify_certificate",
]
