import pytest

from conftest import build_world
from vanetauth.errors import WireFormatError
from vanetauth.suite import get_suite
from vanetauth.wire import (
    Ack,
    Data,
    FRAME_TYPES,
    IsoMsg1,
    IsoMsg2,
    IsoMsg3,
    M1,
    M1h,
    M2,
    M2h,
    SigmaMsg1,
    SigmaMsg2,
    SigmaMsg3,
    TlsFinishI,
    TlsFinishR,
    TlsHelloI,
    TlsHelloR,
    TlsKeyExchange,
    TlsSessionStart,
    claimed_certificate,
    decode_message,
    encode_message,
)

FP = bytes.fromhex("a1b2c3d4e5f60718")


def _sample_frames():
    world = build_world(get_suite("toy-v1"))
    cert = world.sender.certificate
    return [
        M1(FP, cert),
        M2(FP, cert, b"key-blob-bytes", b"sig-blob-bytes"),
        Ack(FP, b"ack-ct"),
        Data(FP, b"data-ct"),
        M1h(FP, cert, b"n" * 16),
        M2h(FP, cert, b"key-blob", b"sig-blob"),
        IsoMsg1(FP, cert, b"g^x"),
        IsoMsg2(FP, cert, b"g^y", b"signature"),
        IsoMsg3(FP, b"signature"),
        SigmaMsg1(FP, b"g^x"),
        SigmaMsg2(FP, b"g^y", b"enc-blob"),
        SigmaMsg3(FP, b"enc-blob"),
        TlsHelloI(FP, 1, b"r" * 8, ("toy-v1", "std-v1")),
        TlsHelloR(FP, 1, b"s" * 8, ("toy-v1",), cert, True),
        TlsKeyExchange(FP, b"enc-premaster", cert),
        TlsFinishI(FP, b"finish-ct"),
        TlsFinishR(FP, b"finish-ct"),
        TlsSessionStart(FP, b"start-ct"),
    ]


def test_every_frame_type_roundtrips_bit_exactly():
    frames = _sample_frames()
    assert {type(f) for f in frames} == set(FRAME_TYPES)
    for frame in frames:
        blob = encode_message(frame)
        decoded = decode_message(blob)
        assert decoded == frame
        assert encode_message(decoded) == blob


def test_tag_determines_frame_type():
    tags = [encode_message(f)[0] for f in _sample_frames()]
    assert len(set(tags)) == len(tags)


def test_unknown_tag_rejected():
    with pytest.raises(WireFormatError):
        decode_message(b"\xee" + FP + b"\x00\x00\x00\x00")


def test_truncated_frames_rejected():
    blob = encode_message(_sample_frames()[1])
    for cut in (0, 5, len(blob) - 3):
        with pytest.raises(WireFormatError):
            decode_message(blob[:cut])
    with pytest.raises(WireFormatError):
        decode_message(blob + b"\x00")


def test_base_frame_does_not_parse_as_hardened():
    # distinct tags: an M1 without the nonce field is not an M1h
    frames = _sample_frames()
    m1 = next(f for f in frames if isinstance(f, M1))
    decoded = decode_message(encode_message(m1))
    assert isinstance(decoded, M1) and not isinstance(decoded, M1h)
    m1h = next(f for f in frames if isinstance(f, M1h))
    # stripping the nonce field leaves a malformed hardened frame
    blob = encode_message(m1h)
    nonce_field_len = 4 + 16
    with pytest.raises(WireFormatError):
        decode_message(blob[:-nonce_field_len])


def test_claimed_certificate_extraction():
    frames = _sample_frames()
    with_cert = [f for f in frames if claimed_certificate(f) is not None]
    assert {type(f) for f in with_cert} == {
        M1, M2, M1h, M2h, IsoMsg1, IsoMsg2, TlsHelloR, TlsKeyExchange
    }


def test_fingerprint_length_enforced():
    frame = Data(b"\x00" * 7, b"ct")
    with pytest.raises(WireFormatError):
        encode_message(frame)
