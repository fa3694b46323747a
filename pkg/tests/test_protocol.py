from dataclasses import replace

import pytest

from conftest import build_world, reading_of
from vanetauth.certificates import pad_compose
from vanetauth.errors import (
    AttributeMismatch,
    CertInvalid,
    DecryptFailure,
    FingerprintMismatch,
    IntegrityFailure,
    PaddingInvalid,
    ProtocolStateError,
    SequenceMismatch,
    SignatureMismatch,
)
from vanetauth.protocol import (
    AEAD_MODE,
    KEYSTREAM_MODE,
    Phase,
    initiator_on_m2,
    initiator_start,
    new_initiator,
    new_responder,
    open_data,
    responder_on_m1,
    seal,
)
from vanetauth.suite import xor_bytes
from vanetauth.wire import encode_message


def _sessions(world, **kwargs):
    initiator = new_initiator(world.suite, world.trust, world.sender, **kwargs)
    responder = new_responder(world.suite, world.trust, world.receiver, **kwargs)
    return initiator, responder


def _honest_exchange(world, **kwargs):
    initiator, responder = _sessions(world, **kwargs)
    m1 = initiator_start(initiator)
    m2 = responder_on_m1(responder, m1, reading_of(world.sender.attrs), world.rng)
    initiator_on_m2(initiator, m2, reading_of(world.receiver.attrs))
    return initiator, responder, m1, m2


def test_honest_exchange_establishes_equal_keys(world):
    initiator, responder, _m1, _m2 = _honest_exchange(world)
    assert initiator.phase is Phase.ESTABLISHED
    assert responder.phase is Phase.ESTABLISHED
    assert initiator.session_key == responder.session_key
    assert len(initiator.session_key) == 32


def test_exactly_two_frames_before_data(world):
    # the handshake itself is two frames; payloads come after
    initiator, responder, m1, m2 = _honest_exchange(world)
    handshake_frames = [m1, m2]
    assert len(handshake_frames) == 2


def test_m1_carries_own_certificate_and_fingerprint(world):
    initiator = new_initiator(world.suite, world.trust, world.sender)
    m1 = initiator_start(initiator)
    assert m1.cert == world.sender.certificate
    assert m1.fingerprint == world.sender.attrs.transceiver_fingerprint


def test_initiator_start_twice_is_a_state_error(world):
    initiator = new_initiator(world.suite, world.trust, world.sender)
    initiator_start(initiator)
    with pytest.raises(ProtocolStateError):
        initiator_start(initiator)


def test_tampered_certificate_aborts_cert_invalid(world):
    initiator, responder = _sessions(world)
    m1 = initiator_start(initiator)
    bad_attrs = replace(m1.cert.attributes, brand="forged-brand")
    tampered = replace(m1, cert=replace(m1.cert, attributes=bad_attrs))
    with pytest.raises(CertInvalid):
        responder_on_m1(responder, tampered, reading_of(bad_attrs), world.rng)
    assert responder.phase is Phase.ABORTED
    assert responder.abort_reason == "CertInvalid"


def test_adversary_presenting_own_cert_fails_attribute_match(world):
    # valid certificate, but the sensed vehicle is someone else
    initiator = new_initiator(world.suite, world.trust, world.adversary)
    responder = new_responder(world.suite, world.trust, world.receiver)
    m1 = initiator_start(initiator)
    with pytest.raises(AttributeMismatch):
        responder_on_m1(responder, m1, reading_of(world.sender.attrs), world.rng)
    assert responder.abort_reason == "AttributeMismatch"


def test_wrong_frame_fingerprint_aborts(world):
    initiator, responder = _sessions(world)
    m1 = initiator_start(initiator)
    spoofed = replace(m1, fingerprint=b"\xde\xad\xbe\xef\x00\x11\x22\x33")
    with pytest.raises(FingerprintMismatch):
        responder_on_m1(responder, spoofed, reading_of(world.sender.attrs), world.rng)


def test_plain_pki_mode_skips_out_of_band_checks(world):
    initiator = new_initiator(world.suite, world.trust, world.adversary,
                              check_attributes=False)
    responder = new_responder(world.suite, world.trust, world.receiver,
                              check_attributes=False)
    m1 = initiator_start(initiator)
    m2 = responder_on_m1(responder, m1, None, world.rng)
    initiator_on_m2(initiator, m2, None)
    assert initiator.session_key == responder.session_key


def test_substituted_key_with_original_signature_aborts(world):
    # re-encrypt a chosen key into the key blob but keep the real signature
    initiator, responder = _sessions(world)
    m1 = initiator_start(initiator)
    m2 = responder_on_m1(responder, m1, reading_of(world.sender.attrs), world.rng)
    seq = world.sender.certificate.sequence_number.to_bytes(8, "big")
    forged_composition = pad_compose(b"\x42" * 32, seq)
    forged = replace(m2, enc_key_blob=world.suite.pk_encrypt(
        world.sender.certificate.public_key, forged_composition, world.rng))
    with pytest.raises(SignatureMismatch):
        initiator_on_m2(initiator, forged, reading_of(world.receiver.attrs))
    assert initiator.abort_reason == "SignatureMismatch"


def test_key_blob_for_another_initiator_aborts_sequence_mismatch(world):
    # a responder answer prepared for a different certificate holder
    other = world.ca.issue(world.sender.attrs,
                           world.sender.enc_keypair.public,
                           world.sender.sig_keypair.public, (0, 1 << 32))
    initiator, responder = _sessions(world)
    m1 = initiator_start(initiator)
    m2_for_other = responder_on_m1(responder, replace(m1, cert=other),
                                   reading_of(world.sender.attrs), world.rng)
    with pytest.raises(SequenceMismatch):
        initiator_on_m2(initiator, m2_for_other, reading_of(world.receiver.attrs))


def test_garbage_composition_aborts_padding_invalid(world):
    initiator, responder = _sessions(world)
    m1 = initiator_start(initiator)
    m2 = responder_on_m1(responder, m1, reading_of(world.sender.attrs), world.rng)
    garbage = world.suite.pk_encrypt(world.sender.certificate.public_key,
                                     b"\x01" * 64, world.rng)
    with pytest.raises(PaddingInvalid):
        initiator_on_m2(initiator, replace(m2, enc_key_blob=garbage),
                        reading_of(world.receiver.attrs))


def test_blob_encrypted_to_someone_else_aborts_decrypt_failure(world):
    initiator, responder = _sessions(world)
    m1 = initiator_start(initiator)
    m2 = responder_on_m1(responder, m1, reading_of(world.sender.attrs), world.rng)
    foreign = world.suite.pk_encrypt(world.adversary.certificate.public_key,
                                     pad_compose(b"\x00" * 32, b"\x00" * 8), world.rng)
    with pytest.raises(DecryptFailure):
        initiator_on_m2(initiator, replace(m2, enc_key_blob=foreign),
                        reading_of(world.receiver.attrs))


@pytest.mark.parametrize("data_mode", [KEYSTREAM_MODE, AEAD_MODE])
def test_data_roundtrip_and_tamper(world, data_mode):
    initiator, responder, _m1, _m2 = _honest_exchange(world, data_mode=data_mode)
    frame = seal(initiator, b"payload over the air", world.rng)
    assert open_data(responder, frame) == b"payload over the air"
    tampered = replace(frame, ciphertext=frame.ciphertext[:-1] +
                       bytes([frame.ciphertext[-1] ^ 0xFF]))
    with pytest.raises(IntegrityFailure):
        open_data(responder, tampered)


def test_keystream_mode_seal_is_plaintext_xor_keystream(world):
    # the sealed octets before the tag equal plaintext XOR keystream prefix
    initiator, responder, _m1, _m2 = _honest_exchange(world)
    plaintext = b"xor-discipline check"
    frame = seal(initiator, plaintext, world.rng)
    xored = frame.ciphertext[:-16]
    stream = world.suite.keystream(initiator.session_key, len(plaintext))
    assert xored == xor_bytes(plaintext, stream)


def test_seal_before_establishment_is_a_state_error(world):
    initiator = new_initiator(world.suite, world.trust, world.sender)
    with pytest.raises(ProtocolStateError):
        seal(initiator, b"too early", world.rng)


def test_no_secret_key_octets_in_any_emitted_frame(world):
    initiator, responder, m1, m2 = _honest_exchange(world)
    data = seal(initiator, b"payload", world.rng)
    secrets = [
        world.sender.enc_keypair.secret, world.sender.sig_keypair.secret,
        world.receiver.enc_keypair.secret, world.receiver.sig_keypair.secret,
        world.ca.secret_key,
    ]
    for frame in (m1, m2, data):
        blob = encode_message(frame)
        for secret in secrets:
            assert secret not in blob


def test_agreement_over_many_seeds(suite):
    for seed in range(100):
        world = build_world(suite, seed=seed)
        initiator, responder, _m1, _m2 = _honest_exchange(world)
        assert initiator.session_key == responder.session_key
