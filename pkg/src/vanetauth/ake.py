"""Adapted authenticated key exchange handshakes.

Three classic handshakes reworked to carry attribute-coupled
certificates, so every certificate check also gates on the out-of-band
sensor reading:

* ``iso_ke``  - three messages, certificates in the clear:
                (Cert_I, g^x) ; (Cert_R, g^y, SIG_R(g^x, g^y, Cert_I)) ;
                SIG_I(g^y, g^x, Cert_R).
* ``sigma``   - sign-and-mac with identity protection: certificates only
                ever travel inside blocks encrypted under K_e, with a MAC
                under K_m over the identity; session, encryption and MAC
                keys are derived from g^xy with distinct labels.
* ``tls``     - hello/hello + certificate exchange, an encrypted
                pre-master, and finish frames sealed over the running
                transcript hash.

All variants derive 32-octet keys and reuse the base protocol's sealed
payload format after establishment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from .attributes import MatchPolicy, STRICT_POLICY
from .certificates import (
    Certificate,
    TrustStore,
    VehicleIdentity,
    compose_fields,
    encode_certificate,
    decode_certificate,
    split_composed,
)
from .errors import (
    DecryptFailure,
    FinishMismatch,
    IntegrityFailure,
    MacMismatch,
    ProtocolStateError,
    SignatureMismatch,
    VanetAuthError,
    VersionMismatch,
    WireFormatError,
)
from .protocol import Phase, Role, abort, check_peer, open_payload, seal_payload
from .suite import CipherSuite, DhElement, rand_bytes
from .wire import (
    IsoMsg1,
    IsoMsg2,
    IsoMsg3,
    SigmaMsg1,
    SigmaMsg2,
    SigmaMsg3,
    TlsFinishI,
    TlsFinishR,
    TlsHelloI,
    TlsHelloR,
    TlsKeyExchange,
    TlsSessionStart,
    WireMessage,
    encode_message,
)

ISO_KE = "iso_ke"
SIGMA = "sigma"
TLS = "tls"
AKE_VARIANTS = (ISO_KE, SIGMA, TLS)

TLS_VERSION = 1
TLS_START_MARKER = b"session starts"

_KDF_ISO = "iso"
_KDF_SIGMA_KS = "sigma/ks"
_KDF_SIGMA_KE = "sigma/ke"
_KDF_SIGMA_KM = "sigma/km"
_KDF_TLS_MASTER = "tls/master"


@dataclass
class AkeSession:
    """Per-party state for one adapted handshake."""

    variant: str
    role: Role
    suite: CipherSuite
    trust: TrustStore
    identity: VehicleIdentity
    phase: Phase
    policy: MatchPolicy = STRICT_POLICY
    check_attributes: bool = True
    data_mode: str = "keystream"
    now: int = 0
    offered_suites: tuple[str, ...] = ()
    peer_certificate: Certificate | None = None
    session_key: bytes | None = None
    enc_key: bytes | None = None      # sigma K_e
    mac_key: bytes | None = None      # sigma K_m
    abort_reason: str | None = None
    candidate_key: bytes | None = None
    own_ephemeral: DhElement | None = None
    peer_element: bytes | None = None
    # tls handshake bookkeeping
    hello_i_bytes: bytes | None = None
    hello_r_bytes: bytes | None = None
    master: bytes | None = None
    tls_frames: list = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in AKE_VARIANTS:
            raise ValueError(f"unknown handshake variant {self.variant!r}")
        if not self.offered_suites:
            self.offered_suites = (self.suite.name,)

    @property
    def established(self) -> bool:
        return self.phase is Phase.ESTABLISHED

    @property
    def fingerprint(self) -> bytes:
        return self.identity.attrs.transceiver_fingerprint


def new_ake_initiator(variant: str, suite: CipherSuite, trust: TrustStore,
                      identity: VehicleIdentity, **kwargs) -> AkeSession:
    return AkeSession(variant=variant, role=Role.INITIATOR, suite=suite, trust=trust,
                      identity=identity, phase=Phase.START, **kwargs)


def new_ake_responder(variant: str, suite: CipherSuite, trust: TrustStore,
                      identity: VehicleIdentity, **kwargs) -> AkeSession:
    return AkeSession(variant=variant, role=Role.RESPONDER, suite=suite, trust=trust,
                      identity=identity, phase=Phase.AWAITING_M1, **kwargs)


def _expect(session: AkeSession, incoming, frame_type) -> None:
    if not isinstance(incoming, frame_type):
        raise ProtocolStateError(
            f"expected {frame_type.__name__}, got {type(incoming).__name__}"
        )


def _elements_in_order(session: AkeSession, peer_value: bytes) -> tuple[bytes, bytes]:
    """(initiator element, responder element) regardless of our role."""
    own = session.own_ephemeral.value
    if session.role is Role.INITIATOR:
        return own, peer_value
    return peer_value, own


# --- ISO-KE -------------------------------------------------------------------

def _iso_sig_digest(session: AkeSession, first: bytes, second: bytes,
                    cert: Certificate) -> bytes:
    return session.suite.hash(compose_fields(first, second,
                                             encode_certificate(cert)))


def iso_ke_step(session: AkeSession, incoming: WireMessage | None, reading,
                rng: Random) -> list[WireMessage]:
    """Advance an iso_ke session by one delivered frame (or start it)."""
    if session.variant != ISO_KE:
        raise ProtocolStateError("session is not iso_ke")
    suite = session.suite

    if session.role is Role.INITIATOR and session.phase is Phase.START:
        if incoming is not None:
            raise ProtocolStateError("initiator starts without an incoming frame")
        session.own_ephemeral = suite.dh_keygen(rng)
        session.phase = Phase.AWAITING_M2
        return [IsoMsg1(fingerprint=session.fingerprint,
                        cert=session.identity.certificate,
                        dh=session.own_ephemeral.value)]

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_M1:
        _expect(session, incoming, IsoMsg1)
        check_peer(session, incoming.cert, incoming.fingerprint, reading)
        try:
            peer_el = suite.dh_element(incoming.dh)
        except VanetAuthError as exc:
            abort(session, exc)
        session.own_ephemeral = suite.dh_keygen(rng)
        session.peer_certificate = incoming.cert
        session.peer_element = incoming.dh
        shared = suite.dh_shared(session.own_ephemeral, peer_el)
        el_i, el_r = _elements_in_order(session, incoming.dh)
        session.candidate_key = suite.kdf(_KDF_ISO, shared, el_i, el_r)
        digest = _iso_sig_digest(session, incoming.dh, session.own_ephemeral.value,
                                 incoming.cert)
        signature = suite.sign(session.identity.sig_keypair.secret, digest)
        session.phase = Phase.AWAITING_MSG3
        return [IsoMsg2(fingerprint=session.fingerprint,
                        cert=session.identity.certificate,
                        dh=session.own_ephemeral.value,
                        signature=signature)]

    if session.role is Role.INITIATOR and session.phase is Phase.AWAITING_M2:
        _expect(session, incoming, IsoMsg2)
        check_peer(session, incoming.cert, incoming.fingerprint, reading)
        try:
            peer_el = suite.dh_element(incoming.dh)
        except VanetAuthError as exc:
            abort(session, exc)
        # the responder signs (initiator element, responder element, our cert)
        digest = _iso_sig_digest(session, session.own_ephemeral.value, incoming.dh,
                                 session.identity.certificate)
        if not suite.verify(incoming.cert.signing_public_key, digest,
                            incoming.signature):
            abort(session, SignatureMismatch("responder handshake signature invalid"))
        shared = suite.dh_shared(session.own_ephemeral, peer_el)
        el_i, el_r = _elements_in_order(session, incoming.dh)
        session.session_key = suite.kdf(_KDF_ISO, shared, el_i, el_r)
        session.peer_certificate = incoming.cert
        # the closing signature swaps the element order and names the peer
        digest3 = _iso_sig_digest(session, incoming.dh, session.own_ephemeral.value,
                                  incoming.cert)
        signature = suite.sign(session.identity.sig_keypair.secret, digest3)
        session.phase = Phase.ESTABLISHED
        return [IsoMsg3(fingerprint=session.fingerprint, signature=signature)]

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_MSG3:
        _expect(session, incoming, IsoMsg3)
        digest3 = _iso_sig_digest(session, session.own_ephemeral.value,
                                  session.peer_element,
                                  session.identity.certificate)
        if not suite.verify(session.peer_certificate.signing_public_key, digest3,
                            incoming.signature):
            abort(session, SignatureMismatch("initiator handshake signature invalid"))
        session.session_key = session.candidate_key
        session.candidate_key = None
        session.phase = Phase.ESTABLISHED
        return []

    raise ProtocolStateError(
        f"iso_ke {session.role.value} cannot accept a frame in phase {session.phase.value}"
    )


# --- SIGMA --------------------------------------------------------------------

def _sigma_keys(suite: CipherSuite, shared: bytes, el_i: bytes, el_r: bytes):
    return (
        suite.kdf(_KDF_SIGMA_KS, shared, el_i, el_r),
        suite.kdf(_KDF_SIGMA_KE, shared, el_i, el_r),
        suite.kdf(_KDF_SIGMA_KM, shared, el_i, el_r),
    )


def _sigma_identity_block(session: AkeSession, el_i: bytes, el_r: bytes,
                          rng: Random) -> bytes:
    cert_enc = encode_certificate(session.identity.certificate)
    digest = session.suite.hash(compose_fields(el_i, el_r))
    signature = session.suite.sign(session.identity.sig_keypair.secret, digest)
    mac = session.suite.mac(session.mac_key, cert_enc)
    inner = compose_fields(cert_enc, signature, mac)
    return session.suite.seal_sym(session.enc_key, inner, rng)


def _sigma_check_block(session: AkeSession, blob: bytes, frame_fingerprint: bytes,
                       reading, el_i: bytes, el_r: bytes) -> Certificate:
    """Decrypt, then verify signature, MAC and finally the certificate
    with its out-of-band attributes."""
    suite = session.suite
    try:
        inner = suite.open_sym(session.enc_key, blob)
    except IntegrityFailure as exc:
        abort(session, DecryptFailure(f"identity block did not decrypt: {exc}"))
    try:
        cert_enc, signature, mac = split_composed(inner, 3)
        cert = decode_certificate(cert_enc)
    except (VanetAuthError, WireFormatError) as exc:
        abort(session, DecryptFailure(f"identity block malformed: {exc}"))
    digest = suite.hash(compose_fields(el_i, el_r))
    if not suite.verify(cert.signing_public_key, digest, signature):
        abort(session, SignatureMismatch("handshake signature invalid"))
    if suite.mac(session.mac_key, cert_enc) != mac:
        abort(session, MacMismatch("identity MAC invalid"))
    check_peer(session, cert, frame_fingerprint, reading)
    return cert


def sigma_step(session: AkeSession, incoming: WireMessage | None, reading,
               rng: Random) -> list[WireMessage]:
    if session.variant != SIGMA:
        raise ProtocolStateError("session is not sigma")
    suite = session.suite

    if session.role is Role.INITIATOR and session.phase is Phase.START:
        if incoming is not None:
            raise ProtocolStateError("initiator starts without an incoming frame")
        session.own_ephemeral = suite.dh_keygen(rng)
        session.phase = Phase.AWAITING_M2
        return [SigmaMsg1(fingerprint=session.fingerprint,
                          dh=session.own_ephemeral.value)]

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_M1:
        _expect(session, incoming, SigmaMsg1)
        try:
            peer_el = suite.dh_element(incoming.dh)
        except VanetAuthError as exc:
            abort(session, exc)
        session.own_ephemeral = suite.dh_keygen(rng)
        session.peer_element = incoming.dh
        shared = suite.dh_shared(session.own_ephemeral, peer_el)
        el_i, el_r = _elements_in_order(session, incoming.dh)
        session.candidate_key, session.enc_key, session.mac_key = _sigma_keys(
            suite, shared, el_i, el_r
        )
        blob = _sigma_identity_block(session, el_i, el_r, rng)
        session.phase = Phase.AWAITING_MSG3
        return [SigmaMsg2(fingerprint=session.fingerprint,
                          dh=session.own_ephemeral.value, enc_blob=blob)]

    if session.role is Role.INITIATOR and session.phase is Phase.AWAITING_M2:
        _expect(session, incoming, SigmaMsg2)
        try:
            peer_el = suite.dh_element(incoming.dh)
        except VanetAuthError as exc:
            abort(session, exc)
        shared = suite.dh_shared(session.own_ephemeral, peer_el)
        el_i, el_r = _elements_in_order(session, incoming.dh)
        session.session_key, session.enc_key, session.mac_key = _sigma_keys(
            suite, shared, el_i, el_r
        )
        session.peer_certificate = _sigma_check_block(
            session, incoming.enc_blob, incoming.fingerprint, reading, el_i, el_r
        )
        blob = _sigma_identity_block(session, el_i, el_r, rng)
        session.phase = Phase.ESTABLISHED
        return [SigmaMsg3(fingerprint=session.fingerprint, enc_blob=blob)]

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_MSG3:
        _expect(session, incoming, SigmaMsg3)
        el_i, el_r = session.peer_element, session.own_ephemeral.value
        session.peer_certificate = _sigma_check_block(
            session, incoming.enc_blob, incoming.fingerprint, reading, el_i, el_r
        )
        session.session_key = session.candidate_key
        session.candidate_key = None
        session.phase = Phase.ESTABLISHED
        return []

    raise ProtocolStateError(
        f"sigma {session.role.value} cannot accept a frame in phase {session.phase.value}"
    )


# --- TLS-style handshake --------------------------------------------------------

def _negotiate(session: AkeSession, peer_version: int,
               peer_suites: tuple[str, ...]) -> None:
    if peer_version != TLS_VERSION:
        abort(session, VersionMismatch(f"peer version {peer_version} unsupported"))
    if not any(s in session.offered_suites for s in peer_suites):
        abort(session, VersionMismatch(
            f"no common suite between {session.offered_suites} and {peer_suites}"
        ))


def _transcript_digest(session: AkeSession) -> bytes:
    return session.suite.hash(b"".join(session.tls_frames))


def _note_frame(session: AkeSession, frame: WireMessage) -> None:
    session.tls_frames.append(encode_message(frame))


def tls_handshake_step(session: AkeSession, incoming: WireMessage | None, reading,
                       rng: Random) -> list[WireMessage]:
    if session.variant != TLS:
        raise ProtocolStateError("session is not tls")
    suite = session.suite

    if session.role is Role.INITIATOR and session.phase is Phase.START:
        if incoming is not None:
            raise ProtocolStateError("initiator starts without an incoming frame")
        hello = TlsHelloI(fingerprint=session.fingerprint, version=TLS_VERSION,
                          random=rand_bytes(rng, 8), suites=session.offered_suites)
        session.hello_i_bytes = encode_message(hello)
        _note_frame(session, hello)
        session.phase = Phase.AWAITING_M2
        return [hello]

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_M1:
        _expect(session, incoming, TlsHelloI)
        _note_frame(session, incoming)
        session.hello_i_bytes = encode_message(incoming)
        _negotiate(session, incoming.version, incoming.suites)
        hello = TlsHelloR(fingerprint=session.fingerprint, version=TLS_VERSION,
                          random=rand_bytes(rng, 8), suites=session.offered_suites,
                          cert=session.identity.certificate, request_cert=True)
        session.hello_r_bytes = encode_message(hello)
        _note_frame(session, hello)
        session.phase = Phase.AWAITING_MSG3
        return [hello]

    if session.role is Role.INITIATOR and session.phase is Phase.AWAITING_M2:
        _expect(session, incoming, TlsHelloR)
        _note_frame(session, incoming)
        session.hello_r_bytes = encode_message(incoming)
        _negotiate(session, incoming.version, incoming.suites)
        check_peer(session, incoming.cert, incoming.fingerprint, reading)
        session.peer_certificate = incoming.cert
        premaster = rand_bytes(rng, 32)
        session.master = suite.kdf(_KDF_TLS_MASTER, premaster,
                                   session.hello_i_bytes, session.hello_r_bytes)
        kex = TlsKeyExchange(
            fingerprint=session.fingerprint,
            enc_premaster=suite.pk_encrypt(incoming.cert.public_key, premaster, rng),
            cert=session.identity.certificate,
        )
        _note_frame(session, kex)
        finish = TlsFinishI(
            fingerprint=session.fingerprint,
            ciphertext=seal_payload(suite, session.master, session.data_mode,
                                    _transcript_digest(session), rng),
        )
        _note_frame(session, finish)
        session.phase = Phase.AWAITING_FINISH_R
        return [kex, finish]

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_MSG3:
        _expect(session, incoming, TlsKeyExchange)
        _note_frame(session, incoming)
        check_peer(session, incoming.cert, incoming.fingerprint, reading)
        session.peer_certificate = incoming.cert
        try:
            premaster = suite.pk_decrypt(session.identity.enc_keypair.secret,
                                         incoming.enc_premaster)
        except VanetAuthError as exc:
            abort(session, exc)
        session.master = suite.kdf(_KDF_TLS_MASTER, premaster,
                                   session.hello_i_bytes, session.hello_r_bytes)
        session.phase = Phase.AWAITING_FINISH_I
        return []

    if session.role is Role.RESPONDER and session.phase is Phase.AWAITING_FINISH_I:
        _expect(session, incoming, TlsFinishI)
        expected = _transcript_digest(session)
        try:
            opened = open_payload(suite, session.master, session.data_mode,
                                  incoming.ciphertext)
        except IntegrityFailure as exc:
            abort(session, FinishMismatch(f"finish frame did not open: {exc}"))
        if opened != expected:
            abort(session, FinishMismatch("finish frame covers a different transcript"))
        _note_frame(session, incoming)
        finish = TlsFinishR(
            fingerprint=session.fingerprint,
            ciphertext=seal_payload(suite, session.master, session.data_mode,
                                    _transcript_digest(session), rng),
        )
        _note_frame(session, finish)
        session.session_key = session.master
        session.phase = Phase.ESTABLISHED
        return [finish]

    if session.role is Role.INITIATOR and session.phase is Phase.AWAITING_FINISH_R:
        _expect(session, incoming, TlsFinishR)
        expected = _transcript_digest(session)
        try:
            opened = open_payload(suite, session.master, session.data_mode,
                                  incoming.ciphertext)
        except IntegrityFailure as exc:
            abort(session, FinishMismatch(f"finish frame did not open: {exc}"))
        if opened != expected:
            abort(session, FinishMismatch("finish frame covers a different transcript"))
        _note_frame(session, incoming)
        session.session_key = session.master
        session.phase = Phase.ESTABLISHED
        start = TlsSessionStart(
            fingerprint=session.fingerprint,
            ciphertext=seal_payload(suite, session.master, session.data_mode,
                                    TLS_START_MARKER, rng),
        )
        return [start]

    if session.role is Role.RESPONDER and session.phase is Phase.ESTABLISHED \
            and isinstance(incoming, TlsSessionStart):
        try:
            opened = open_payload(suite, session.master, session.data_mode,
                                  incoming.ciphertext)
        except IntegrityFailure as exc:
            abort(session, FinishMismatch(f"activation frame did not open: {exc}"))
        if opened != TLS_START_MARKER:
            abort(session, FinishMismatch("activation frame carries a foreign marker"))
        return []

    raise ProtocolStateError(
        f"tls {session.role.value} cannot accept a frame in phase {session.phase.value}"
    )


AKE_STEPPERS = {
    ISO_KE: iso_ke_step,
    SIGMA: sigma_step,
    TLS: tls_handshake_step,
}


def ake_step(session: AkeSession, incoming: WireMessage | None, reading,
             rng: Random) -> list[WireMessage]:
    """Variant-dispatching convenience used by the simulator."""
    return AKE_STEPPERS[session.variant](session, incoming, reading, rng)
