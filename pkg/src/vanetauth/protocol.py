"""Two-round session-key establishment.

The initiator opens with its certificate (M1).  The responder verifies
the certificate, checks the sensed attributes and the frame fingerprint
against the certified ones, then answers with its own certificate plus a
fresh session key: the key and the initiator's certificate sequence
number travel as a zero-padded composition encrypted to the initiator,
alongside the responder's signature over the composition's hash,
encrypted a second time to the initiator (M2).  The initiator unwraps,
validates the composition, checks the sequence number is its own,
verifies the signature, and the session is up.

Aborts are terminal and record the name of the failed check.  Nothing in
this base protocol binds M2 to the *session* (only to the initiator's
certificate), which is exactly what the recorded-answer replay exploits;
the hardened variants close that hole.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from random import Random

from .attributes import MatchPolicy, SensorReading, STRICT_POLICY, match_attributes
from .certificates import (
    Certificate,
    TrustStore,
    VehicleIdentity,
    pad_compose,
    validate_pad_compose,
    verify_certificate,
)
from .errors import (
    AttributeMismatch,
    CertInvalid,
    CertificateInvalid,
    FingerprintMismatch,
    IntegrityFailure,
    ProtocolStateError,
    SequenceMismatch,
    SignatureMismatch,
    VanetAuthError,
)
from .suite import SESSION_KEY_LEN, TAG_LEN, CipherSuite, rand_bytes, xor_bytes
from .wire import M1, M2, Data, WireMessage


class Role(Enum):
    INITIATOR = "initiator"
    RESPONDER = "responder"


class Phase(Enum):
    START = "start"
    AWAITING_M1 = "awaiting_m1"
    AWAITING_M2 = "awaiting_m2"
    AWAITING_ACK = "awaiting_ack"
    # extra waits used by the adapted multi-round handshakes
    AWAITING_MSG3 = "awaiting_msg3"
    AWAITING_FINISH_I = "awaiting_finish_i"
    AWAITING_FINISH_R = "awaiting_finish_r"
    ESTABLISHED = "established"
    ABORTED = "aborted"


KEYSTREAM_MODE = "keystream"
AEAD_MODE = "aead"
DATA_MODES = (KEYSTREAM_MODE, AEAD_MODE)


@dataclass
class SessionState:
    """One party's view of one session; single-owner, stepped sequentially."""

    role: Role
    suite: CipherSuite
    trust: TrustStore
    identity: VehicleIdentity
    phase: Phase
    policy: MatchPolicy = STRICT_POLICY
    check_attributes: bool = True     # False models a conventional-PKI strawman
    data_mode: str = KEYSTREAM_MODE
    now: int = 0
    peer_certificate: Certificate | None = None
    session_key: bytes | None = None
    abort_reason: str | None = None
    # hardened-mode extras
    hardened_mode: str | None = None
    own_nonce: bytes | None = None
    own_ephemeral: object | None = None       # DhElement in fs mode
    candidate_key: bytes | None = None        # responder key before the ack lands
    sent_m2h_digest: bytes | None = None

    def __post_init__(self):
        if self.data_mode not in DATA_MODES:
            raise ValueError(f"data_mode must be one of {DATA_MODES}")

    @property
    def established(self) -> bool:
        return self.phase is Phase.ESTABLISHED

    @property
    def fingerprint(self) -> bytes:
        return self.identity.attrs.transceiver_fingerprint


def new_initiator(suite: CipherSuite, trust: TrustStore, identity: VehicleIdentity,
                  **kwargs) -> SessionState:
    return SessionState(role=Role.INITIATOR, suite=suite, trust=trust,
                        identity=identity, phase=Phase.START, **kwargs)


def new_responder(suite: CipherSuite, trust: TrustStore, identity: VehicleIdentity,
                  **kwargs) -> SessionState:
    return SessionState(role=Role.RESPONDER, suite=suite, trust=trust,
                        identity=identity, phase=Phase.AWAITING_M1, **kwargs)


def abort(state: SessionState, exc: VanetAuthError) -> None:
    state.phase = Phase.ABORTED
    state.abort_reason = exc.reason
    state.session_key = None
    state.candidate_key = None
    raise exc


def require_phase(state: SessionState, expected: Phase) -> None:
    if state.phase is not expected:
        raise ProtocolStateError(
            f"operation requires phase {expected.value}, session is {state.phase.value}"
        )


def check_peer(state: SessionState, cert: Certificate, frame_fingerprint: bytes,
               reading: SensorReading | None) -> None:
    """Certificate signature/validity, then out-of-band attribute match,
    then the frame's emitter fingerprint against the certified one."""
    try:
        verify_certificate(state.trust, state.suite, cert, state.now)
    except CertificateInvalid as exc:
        abort(state, CertInvalid(f"peer certificate rejected: {exc}"))
    if not state.check_attributes:
        return
    if reading is None:
        abort(state, AttributeMismatch("no sensor reading available"))
    report = match_attributes(cert.attributes, reading, state.policy)
    if not report.overall:
        mismatched = [n for n, v in report.verdicts.items() if v.value == "mismatch"]
        abort(state, AttributeMismatch(
            f"certified attributes not confirmed out-of-band (mismatch: {mismatched})"
        ))
    if frame_fingerprint != cert.attributes.transceiver_fingerprint:
        abort(state, FingerprintMismatch(
            "frame fingerprint differs from the certified transceiver"
        ))


def _seq_bytes(cert: Certificate) -> bytes:
    return cert.sequence_number.to_bytes(8, "big")


# --- the two rounds ---------------------------------------------------------

def initiator_start(state: SessionState) -> M1:
    require_phase(state, Phase.START)
    state.phase = Phase.AWAITING_M2
    return M1(fingerprint=state.fingerprint, cert=state.identity.certificate)


def responder_on_m1(state: SessionState, m1: WireMessage, reading: SensorReading | None,
                    rng: Random) -> M2:
    require_phase(state, Phase.AWAITING_M1)
    if not isinstance(m1, M1):
        raise ProtocolStateError(f"expected M1, got {type(m1).__name__}")
    check_peer(state, m1.cert, m1.fingerprint, reading)
    state.peer_certificate = m1.cert

    session_key = rand_bytes(rng, SESSION_KEY_LEN)
    composition = pad_compose(session_key, _seq_bytes(m1.cert))
    signature = state.suite.sign(state.identity.sig_keypair.secret,
                                 state.suite.hash(composition))
    m2 = M2(
        fingerprint=state.fingerprint,
        cert=state.identity.certificate,
        enc_key_blob=state.suite.pk_encrypt(m1.cert.public_key, composition, rng),
        enc_sig_blob=state.suite.pk_encrypt(m1.cert.public_key, signature, rng),
    )
    # The responder commits immediately; it has no confirmation that the
    # initiator is live, which the replayed-M1 attack exploits.
    state.session_key = session_key
    state.phase = Phase.ESTABLISHED
    return m2


def initiator_on_m2(state: SessionState, m2: WireMessage,
                    reading: SensorReading | None) -> None:
    require_phase(state, Phase.AWAITING_M2)
    if not isinstance(m2, M2):
        raise ProtocolStateError(f"expected M2, got {type(m2).__name__}")
    check_peer(state, m2.cert, m2.fingerprint, reading)

    try:
        composition = state.suite.pk_decrypt(state.identity.enc_keypair.secret,
                                             m2.enc_key_blob)
    except VanetAuthError as exc:
        abort(state, exc)
    try:
        session_key, seq = validate_pad_compose(composition)
    except VanetAuthError as exc:
        abort(state, exc)
    if seq != _seq_bytes(state.identity.certificate):
        abort(state, SequenceMismatch(
            "key cryptogram is bound to a different certificate sequence number"
        ))
    try:
        signature = state.suite.pk_decrypt(state.identity.enc_keypair.secret,
                                           m2.enc_sig_blob)
    except VanetAuthError as exc:
        abort(state, exc)
    if not state.suite.verify(m2.cert.signing_public_key,
                              state.suite.hash(composition), signature):
        abort(state, SignatureMismatch("responder signature over the key does not verify"))

    state.peer_certificate = m2.cert
    state.session_key = session_key
    state.phase = Phase.ESTABLISHED


# --- sealed payloads ---------------------------------------------------------

def seal_payload(suite: CipherSuite, key: bytes, mode: str, plaintext: bytes,
                 rng: Random | None) -> bytes:
    """Symmetric sealing under a session key.

    Keystream mode follows the seed-a-pseudo-random-sequence scheme: the
    payload is XORed with the keystream the key seeds, then tagged.  AEAD
    mode delegates to the suite's authenticated cipher.
    """
    if mode == KEYSTREAM_MODE:
        xored = xor_bytes(plaintext, suite.keystream(key, len(plaintext)))
        tag = suite.hash(b"data-tag|" + key + xored)[:TAG_LEN]
        return xored + tag
    if rng is None:
        raise ValueError("aead sealing needs the session rng")
    return suite.seal_sym(key, plaintext, rng)


def open_payload(suite: CipherSuite, key: bytes, mode: str, ciphertext: bytes) -> bytes:
    if mode == KEYSTREAM_MODE:
        if len(ciphertext) < TAG_LEN:
            raise IntegrityFailure("sealed payload shorter than its tag")
        xored, tag = ciphertext[:-TAG_LEN], ciphertext[-TAG_LEN:]
        if suite.hash(b"data-tag|" + key + xored)[:TAG_LEN] != tag:
            raise IntegrityFailure("payload tag mismatch")
        return xor_bytes(xored, suite.keystream(key, len(xored)))
    return suite.open_sym(key, ciphertext)


def seal(state: SessionState, plaintext: bytes, rng: Random | None = None) -> Data:
    if state.phase is not Phase.ESTABLISHED or state.session_key is None:
        raise ProtocolStateError("cannot seal before the session is established")
    ciphertext = seal_payload(state.suite, state.session_key, state.data_mode,
                              plaintext, rng)
    return Data(fingerprint=state.fingerprint, ciphertext=ciphertext)


def open_data(state: SessionState, frame: WireMessage) -> bytes:
    if state.phase is not Phase.ESTABLISHED or state.session_key is None:
        raise ProtocolStateError("cannot open before the session is established")
    if not isinstance(frame, Data):
        raise ProtocolStateError(f"expected Data, got {type(frame).__name__}")
    return open_payload(state.suite, state.session_key, state.data_mode,
                        frame.ciphertext)
