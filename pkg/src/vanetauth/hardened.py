"""Hardened handshake variants.

Two improvements over the base protocol, composed in both modes:

* a fresh nonce travels with the first message and must be echoed inside
  the authenticated cryptograms of the second, killing recorded-answer
  replays (the responder-side repetition attack);
* the initiator acknowledges the second message under the session key
  before any payload flows, so a replayed first message can never bring
  the responder to an established session (the initiator-side repetition
  attack).

``fs_dh`` mode additionally swaps the transported key for an ephemeral
Diffie-Hellman exchange: the nonce slot carries the initiator's
ephemeral element, the key slot the responder's, and the session key is
derived from the shared secret, so later long-term key compromise does
not expose past sessions.
"""

from __future__ import annotations

from random import Random

from .certificates import compose_fields, split_composed
from .errors import (
    DigestMismatch,
    IntegrityFailure,
    NonceMismatch,
    ProtocolStateError,
    SequenceMismatch,
    SignatureMismatch,
    VanetAuthError,
)
from .protocol import (
    Phase,
    SessionState,
    abort,
    check_peer,
    open_payload,
    require_phase,
    seal_payload,
)
from .suite import SESSION_KEY_LEN, rand_bytes
from .wire import Ack, M1h, M2h, WireMessage, encode_message

NONCE_ACK = "nonce_ack"
FS_DH = "fs_dh"
HARDENED_MODES = (NONCE_ACK, FS_DH)

NONCE_LEN = 16

FS_KDF_LABEL = "vanet-fs-v1"


def _require_mode(state: SessionState) -> str:
    if state.hardened_mode not in HARDENED_MODES:
        raise ProtocolStateError(
            f"session is not hardened (mode={state.hardened_mode!r})"
        )
    return state.hardened_mode


def _seq_bytes(cert) -> bytes:
    return cert.sequence_number.to_bytes(8, "big")


def h_initiator_start(state: SessionState, rng: Random) -> M1h:
    """First round: certificate plus a per-session challenge."""
    mode = _require_mode(state)
    require_phase(state, Phase.START)
    if mode == FS_DH:
        state.own_ephemeral = state.suite.dh_keygen(rng)
        state.own_nonce = state.own_ephemeral.value
    else:
        state.own_nonce = rand_bytes(rng, NONCE_LEN)
    state.phase = Phase.AWAITING_M2
    return M1h(fingerprint=state.fingerprint, cert=state.identity.certificate,
               nonce=state.own_nonce)


def h_responder_on_m1(state: SessionState, m1h: WireMessage,
                      reading, rng: Random) -> M2h:
    """Second round; the responder holds its key as a candidate until the
    acknowledgment confirms a live initiator."""
    mode = _require_mode(state)
    require_phase(state, Phase.AWAITING_M1)
    if not isinstance(m1h, M1h):
        raise ProtocolStateError(f"expected M1h, got {type(m1h).__name__}")
    check_peer(state, m1h.cert, m1h.fingerprint, reading)
    state.peer_certificate = m1h.cert

    if mode == FS_DH:
        try:
            peer_element = state.suite.dh_element(m1h.nonce)
        except VanetAuthError as exc:
            abort(state, exc)
        own = state.suite.dh_keygen(rng)
        shared = state.suite.dh_shared(own, peer_element)
        candidate = state.suite.kdf(FS_KDF_LABEL, shared, m1h.nonce, own.value)
        key_slot = own.value
    else:
        candidate = rand_bytes(rng, SESSION_KEY_LEN)
        key_slot = candidate

    composition = compose_fields(key_slot, _seq_bytes(m1h.cert), m1h.nonce)
    signature = state.suite.sign(state.identity.sig_keypair.secret,
                                 state.suite.hash(composition))
    m2h = M2h(
        fingerprint=state.fingerprint,
        cert=state.identity.certificate,
        enc_key_blob=state.suite.pk_encrypt(m1h.cert.public_key, composition, rng),
        enc_sig_blob=state.suite.pk_encrypt(m1h.cert.public_key, signature, rng),
    )
    state.candidate_key = candidate
    state.sent_m2h_digest = state.suite.hash(encode_message(m2h))
    state.phase = Phase.AWAITING_ACK
    return m2h


def h_initiator_on_m2(state: SessionState, m2h: WireMessage, reading,
                      rng: Random | None = None) -> Ack:
    """Verify the second round, establish, and emit the acknowledgment
    that opens the encrypted channel."""
    mode = _require_mode(state)
    require_phase(state, Phase.AWAITING_M2)
    if not isinstance(m2h, M2h):
        raise ProtocolStateError(f"expected M2h, got {type(m2h).__name__}")
    check_peer(state, m2h.cert, m2h.fingerprint, reading)

    try:
        composition = state.suite.pk_decrypt(state.identity.enc_keypair.secret,
                                             m2h.enc_key_blob)
    except VanetAuthError as exc:
        abort(state, exc)
    try:
        key_slot, seq, nonce_echo = split_composed(composition, 3)
    except VanetAuthError as exc:
        abort(state, exc)
    if seq != _seq_bytes(state.identity.certificate):
        abort(state, SequenceMismatch(
            "key cryptogram is bound to a different certificate sequence number"
        ))
    if nonce_echo != state.own_nonce:
        abort(state, NonceMismatch("response echoes a foreign or stale nonce"))

    try:
        signature = state.suite.pk_decrypt(state.identity.enc_keypair.secret,
                                           m2h.enc_sig_blob)
    except VanetAuthError as exc:
        abort(state, exc)
    if not state.suite.verify(m2h.cert.signing_public_key,
                              state.suite.hash(composition), signature):
        abort(state, SignatureMismatch("responder signature over the key does not verify"))

    if mode == FS_DH:
        try:
            peer_element = state.suite.dh_element(key_slot)
        except VanetAuthError as exc:
            abort(state, exc)
        shared = state.suite.dh_shared(state.own_ephemeral, peer_element)
        session_key = state.suite.kdf(FS_KDF_LABEL, shared, state.own_nonce, key_slot)
    else:
        session_key = key_slot

    state.peer_certificate = m2h.cert
    state.session_key = session_key
    state.phase = Phase.ESTABLISHED
    ack_body = state.suite.hash(encode_message(m2h))
    ciphertext = seal_payload(state.suite, session_key, state.data_mode, ack_body, rng)
    return Ack(fingerprint=state.fingerprint, ciphertext=ciphertext)


def h_responder_on_ack(state: SessionState, ack: WireMessage) -> None:
    """The responder establishes only once the acknowledgment opens under
    the candidate key and names the exact second message it sent."""
    _require_mode(state)
    require_phase(state, Phase.AWAITING_ACK)
    if not isinstance(ack, Ack):
        raise ProtocolStateError(f"expected Ack, got {type(ack).__name__}")
    if state.candidate_key is None or state.sent_m2h_digest is None:
        raise ProtocolStateError("responder has no pending second message")
    try:
        opened = open_payload(state.suite, state.candidate_key, state.data_mode,
                              ack.ciphertext)
    except IntegrityFailure as exc:
        abort(state, exc)
    if opened != state.sent_m2h_digest:
        abort(state, DigestMismatch("acknowledgment covers a different message"))
    state.session_key = state.candidate_key
    state.candidate_key = None
    state.phase = Phase.ESTABLISHED
