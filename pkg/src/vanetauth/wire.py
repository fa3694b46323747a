"""On-air frame formats.

Every frame shares one envelope: a tag octet, the emitter's 8-octet
transceiver fingerprint (stamped at emission), then the frame's fields
in declared order, each prefixed with a 4-octet big-endian length.
Serialization round-trips bit-exactly; FORMAT.md documents the layout
and the ``vectors`` CLI subcommand emits golden test vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields
from typing import ClassVar, Union

from .attributes import FINGERPRINT_LEN
from .certificates import Certificate, decode_certificate, encode_certificate
from .errors import WireFormatError

_LEN = 4


# --- field codecs -----------------------------------------------------------

def _enc_bytes(v: bytes) -> bytes:
    return bytes(v)


def _dec_bytes(b: bytes) -> bytes:
    return b


def _enc_cert(v: Certificate) -> bytes:
    return encode_certificate(v)


def _dec_cert(b: bytes) -> Certificate:
    return decode_certificate(b)


def _enc_u16(v: int) -> bytes:
    return int(v).to_bytes(2, "big")


def _dec_u16(b: bytes) -> int:
    if len(b) != 2:
        raise WireFormatError("u16 field must be 2 octets")
    return int.from_bytes(b, "big")


def _enc_flag(v: bool) -> bytes:
    return b"\x01" if v else b"\x00"


def _dec_flag(b: bytes) -> bool:
    if b not in (b"\x00", b"\x01"):
        raise WireFormatError("flag field must be one octet 0/1")
    return b == b"\x01"


def _enc_strings(v: tuple[str, ...]) -> bytes:
    out = [len(v).to_bytes(1, "big")]
    for s in v:
        raw = s.encode("utf-8")
        out.append(len(raw).to_bytes(2, "big") + raw)
    return b"".join(out)


def _dec_strings(b: bytes) -> tuple[str, ...]:
    if not b:
        raise WireFormatError("empty string-list field")
    count = b[0]
    pos = 1
    items = []
    for _ in range(count):
        if pos + 2 > len(b):
            raise WireFormatError("truncated string list")
        n = int.from_bytes(b[pos : pos + 2], "big")
        pos += 2
        if pos + n > len(b):
            raise WireFormatError("truncated string list")
        items.append(b[pos : pos + n].decode("utf-8"))
        pos += n
    if pos != len(b):
        raise WireFormatError("trailing bytes in string list")
    return tuple(items)


_CODECS = {
    "bytes": (_enc_bytes, _dec_bytes),
    "cert": (_enc_cert, _dec_cert),
    "u16": (_enc_u16, _dec_u16),
    "flag": (_enc_flag, _dec_flag),
    "strings": (_enc_strings, _dec_strings),
}


# --- frame classes ----------------------------------------------------------
#
# FIELDS lists (attribute, codec) pairs in wire order; the fingerprint
# lives in the envelope, not the field list.

@dataclass(frozen=True)
class M1:
    """Base protocol, first round: the initiator's certificate."""
    fingerprint: bytes
    cert: Certificate
    TAG: ClassVar[int] = 0x01
    LABEL: ClassVar[str] = "M1"
    FIELDS: ClassVar = (("cert", "cert"),)


@dataclass(frozen=True)
class M2:
    """Base protocol, second round: responder certificate plus the
    encrypted session key composition and its encrypted signature."""
    fingerprint: bytes
    cert: Certificate
    enc_key_blob: bytes
    enc_sig_blob: bytes
    TAG: ClassVar[int] = 0x02
    LABEL: ClassVar[str] = "M2"
    FIELDS: ClassVar = (("cert", "cert"), ("enc_key_blob", "bytes"), ("enc_sig_blob", "bytes"))


@dataclass(frozen=True)
class Ack:
    """Hardened handshake acknowledgment, sealed under the session key."""
    fingerprint: bytes
    ciphertext: bytes
    TAG: ClassVar[int] = 0x03
    LABEL: ClassVar[str] = "ACK"
    FIELDS: ClassVar = (("ciphertext", "bytes"),)


@dataclass(frozen=True)
class Data:
    """Application payload sealed under the session key."""
    fingerprint: bytes
    ciphertext: bytes
    TAG: ClassVar[int] = 0x04
    LABEL: ClassVar[str] = "DATA"
    FIELDS: ClassVar = (("ciphertext", "bytes"),)


@dataclass(frozen=True)
class M1h:
    """Hardened first round: certificate plus a fresh nonce (random
    octets, or an ephemeral group element in forward-secrecy mode)."""
    fingerprint: bytes
    cert: Certificate
    nonce: bytes
    TAG: ClassVar[int] = 0x05
    LABEL: ClassVar[str] = "M1H"
    FIELDS: ClassVar = (("cert", "cert"), ("nonce", "bytes"))


@dataclass(frozen=True)
class M2h:
    """Hardened second round; the blobs carry a three-field composition
    (key slot, sequence number, nonce echo)."""
    fingerprint: bytes
    cert: Certificate
    enc_key_blob: bytes
    enc_sig_blob: bytes
    TAG: ClassVar[int] = 0x06
    LABEL: ClassVar[str] = "M2H"
    FIELDS: ClassVar = (("cert", "cert"), ("enc_key_blob", "bytes"), ("enc_sig_blob", "bytes"))


@dataclass(frozen=True)
class IsoMsg1:
    fingerprint: bytes
    cert: Certificate
    dh: bytes
    TAG: ClassVar[int] = 0x10
    LABEL: ClassVar[str] = "ISO1"
    FIELDS: ClassVar = (("cert", "cert"), ("dh", "bytes"))


@dataclass(frozen=True)
class IsoMsg2:
    fingerprint: bytes
    cert: Certificate
    dh: bytes
    signature: bytes
    TAG: ClassVar[int] = 0x11
    LABEL: ClassVar[str] = "ISO2"
    FIELDS: ClassVar = (("cert", "cert"), ("dh", "bytes"), ("signature", "bytes"))


@dataclass(frozen=True)
class IsoMsg3:
    fingerprint: bytes
    signature: bytes
    TAG: ClassVar[int] = 0x12
    LABEL: ClassVar[str] = "ISO3"
    FIELDS: ClassVar = (("signature", "bytes"),)


@dataclass(frozen=True)
class SigmaMsg1:
    fingerprint: bytes
    dh: bytes
    TAG: ClassVar[int] = 0x20
    LABEL: ClassVar[str] = "SIGMA1"
    FIELDS: ClassVar = (("dh", "bytes"),)


@dataclass(frozen=True)
class SigmaMsg2:
    """Responder's ephemeral element plus the encrypted identity block;
    certificates never appear in the clear."""
    fingerprint: bytes
    dh: bytes
    enc_blob: bytes
    TAG: ClassVar[int] = 0x21
    LABEL: ClassVar[str] = "SIGMA2"
    FIELDS: ClassVar = (("dh", "bytes"), ("enc_blob", "bytes"))


@dataclass(frozen=True)
class SigmaMsg3:
    fingerprint: bytes
    enc_blob: bytes
    TAG: ClassVar[int] = 0x22
    LABEL: ClassVar[str] = "SIGMA3"
    FIELDS: ClassVar = (("enc_blob", "bytes"),)


@dataclass(frozen=True)
class TlsHelloI:
    """Initiator hello: offered version ceiling, a fresh random value
    that binds the transcript, and the offered suite list."""
    fingerprint: bytes
    version: int
    random: bytes
    suites: tuple[str, ...]
    TAG: ClassVar[int] = 0x30
    LABEL: ClassVar[str] = "TLS_HELLO_I"
    FIELDS: ClassVar = (("version", "u16"), ("random", "bytes"), ("suites", "strings"))


@dataclass(frozen=True)
class TlsHelloR:
    """Responder hello; carries the responder certificate and the
    certificate-request flag rather than a separate frame."""
    fingerprint: bytes
    version: int
    random: bytes
    suites: tuple[str, ...]
    cert: Certificate
    request_cert: bool
    TAG: ClassVar[int] = 0x31
    LABEL: ClassVar[str] = "TLS_HELLO_R"
    FIELDS: ClassVar = (
        ("version", "u16"),
        ("random", "bytes"),
        ("suites", "strings"),
        ("cert", "cert"),
        ("request_cert", "flag"),
    )


@dataclass(frozen=True)
class TlsKeyExchange:
    fingerprint: bytes
    enc_premaster: bytes
    cert: Certificate
    TAG: ClassVar[int] = 0x32
    LABEL: ClassVar[str] = "TLS_KEX"
    FIELDS: ClassVar = (("enc_premaster", "bytes"), ("cert", "cert"))


@dataclass(frozen=True)
class TlsFinishI:
    fingerprint: bytes
    ciphertext: bytes
    TAG: ClassVar[int] = 0x33
    LABEL: ClassVar[str] = "TLS_FINISH_I"
    FIELDS: ClassVar = (("ciphertext", "bytes"),)


@dataclass(frozen=True)
class TlsFinishR:
    fingerprint: bytes
    ciphertext: bytes
    TAG: ClassVar[int] = 0x34
    LABEL: ClassVar[str] = "TLS_FINISH_R"
    FIELDS: ClassVar = (("ciphertext", "bytes"),)


@dataclass(frozen=True)
class TlsSessionStart:
    """The activation frame that closes the handshake, sealed under the
    session key."""
    fingerprint: bytes
    ciphertext: bytes
    TAG: ClassVar[int] = 0x35
    LABEL: ClassVar[str] = "TLS_START"
    FIELDS: ClassVar = (("ciphertext", "bytes"),)


FRAME_TYPES = (
    M1, M2, Ack, Data, M1h, M2h,
    IsoMsg1, IsoMsg2, IsoMsg3,
    SigmaMsg1, SigmaMsg2, SigmaMsg3,
    TlsHelloI, TlsHelloR, TlsKeyExchange, TlsFinishI, TlsFinishR, TlsSessionStart,
)

WireMessage = Union[
    M1, M2, Ack, Data, M1h, M2h,
    IsoMsg1, IsoMsg2, IsoMsg3,
    SigmaMsg1, SigmaMsg2, SigmaMsg3,
    TlsHelloI, TlsHelloR, TlsKeyExchange, TlsFinishI, TlsFinishR, TlsSessionStart,
]

_BY_TAG = {cls.TAG: cls for cls in FRAME_TYPES}
assert len(_BY_TAG) == len(FRAME_TYPES), "duplicate frame tag"


def encode_message(msg: WireMessage) -> bytes:
    if len(msg.fingerprint) != FINGERPRINT_LEN:
        raise WireFormatError("fingerprint must be 8 octets")
    out = [bytes([msg.TAG]), msg.fingerprint]
    for attr, codec in msg.FIELDS:
        enc, _ = _CODECS[codec]
        raw = enc(getattr(msg, attr))
        out.append(len(raw).to_bytes(_LEN, "big"))
        out.append(raw)
    return b"".join(out)


def decode_message(blob: bytes) -> WireMessage:
    if len(blob) < 1 + FINGERPRINT_LEN:
        raise WireFormatError("frame shorter than envelope")
    cls = _BY_TAG.get(blob[0])
    if cls is None:
        raise WireFormatError(f"unknown frame tag 0x{blob[0]:02x}")
    fingerprint = blob[1 : 1 + FINGERPRINT_LEN]
    pos = 1 + FINGERPRINT_LEN
    kwargs = {"fingerprint": fingerprint}
    for attr, codec in cls.FIELDS:
        if pos + _LEN > len(blob):
            raise WireFormatError(f"{cls.LABEL}: missing field {attr}")
        n = int.from_bytes(blob[pos : pos + _LEN], "big")
        pos += _LEN
        if pos + n > len(blob):
            raise WireFormatError(f"{cls.LABEL}: field {attr} overruns frame")
        _, dec = _CODECS[codec]
        kwargs[attr] = dec(blob[pos : pos + n])
        pos += n
    if pos != len(blob):
        raise WireFormatError(f"{cls.LABEL}: trailing bytes")
    return cls(**kwargs)


def claimed_certificate(msg: WireMessage) -> Certificate | None:
    """The certificate a frame presents in the clear, if any."""
    for f in dc_fields(msg):
        if f.name == "cert":
            return msg.cert
    return None


def frame_label(msg: WireMessage) -> str:
    return msg.LABEL
