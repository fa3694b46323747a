"""Monolithic certificates: one CA signature couples a public key to the
vehicle's sense-able attributes.

The coupling is what defeats splice attacks: neither the attribute block
nor the key material can be swapped into another certificate without
breaking the signature.  Certificates carry separate encryption and
signing public keys (key-separation hygiene) inside one signed body, a
CA-assigned sequence number, and a validity window in scenario seconds.
There is no revocation: certificates simply expire.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from random import Random

from .attributes import AttributeSet, canonical_decode, canonical_encode
from .errors import (
    EncodingError,
    Expired,
    PaddingInvalid,
    SignatureMismatch,
    UnknownIssuer,
    WireFormatError,
)
from .suite import CipherSuite, KeyKind, Keypair

_BLOCK = 16
_LEN_BYTES = 2
_MAX_FIELD = 0xFFFF


def _segment(part: bytes) -> bytes:
    if len(part) > _MAX_FIELD:
        raise EncodingError("composition field exceeds 2^16 - 1 octets")
    raw = len(part).to_bytes(_LEN_BYTES, "big") + part
    pad = (-len(raw)) % _BLOCK
    return raw + b"\x00" * pad


def compose_fields(*parts: bytes) -> bytes:
    """Zero-padded composition: each field is length-prefixed and padded
    with zero octets to a 16-octet boundary."""
    return b"".join(_segment(p) for p in parts)


def split_composed(composed: bytes, count: int) -> tuple[bytes, ...]:
    """Recover ``count`` fields, checking every padding octet is zero and
    all lengths are consistent; raises :class:`PaddingInvalid` otherwise."""
    parts = []
    pos = 0
    for _ in range(count):
        if pos + _LEN_BYTES > len(composed):
            raise PaddingInvalid("composition truncated")
        n = int.from_bytes(composed[pos : pos + _LEN_BYTES], "big")
        raw_end = pos + _LEN_BYTES + n
        seg_end = pos + ((_LEN_BYTES + n + _BLOCK - 1) // _BLOCK) * _BLOCK
        if seg_end > len(composed):
            raise PaddingInvalid("field length overruns composition")
        if any(composed[raw_end:seg_end]):
            raise PaddingInvalid("nonzero padding octet")
        parts.append(composed[pos + _LEN_BYTES : raw_end])
        pos = seg_end
    if pos != len(composed):
        raise PaddingInvalid("trailing bytes after composition")
    return tuple(parts)


def pad_compose(a: bytes, b: bytes) -> bytes:
    return compose_fields(a, b)


def validate_pad_compose(composed: bytes) -> tuple[bytes, bytes]:
    a, b = split_composed(composed, 2)
    return a, b


@dataclass(frozen=True)
class Certificate:
    attributes: AttributeSet
    public_key: bytes            # encryption key, peers encrypt to this
    signing_public_key: bytes    # verification key for the holder's signatures
    sequence_number: int
    valid_from: int
    valid_to: int
    ca_id: str
    ca_signature: bytes

    def __post_init__(self):
        if not 0 <= self.sequence_number < 1 << 64:
            raise EncodingError("sequence_number must fit in 64 bits")
        if self.valid_from >= self.valid_to:
            raise EncodingError("validity window is empty")
        if self.valid_from < 0:
            raise EncodingError("valid_from must be >= 0")


def _frame(part: bytes) -> bytes:
    if len(part) > _MAX_FIELD:
        raise EncodingError("certificate field too long")
    return len(part).to_bytes(2, "big") + part


def _coupling_encoding(cert_or_fields) -> bytes:
    """The key-coupling half of the signed body.

    Covers both public keys, the sequence number, the validity window and
    the issuer id, so substituting any of them breaks the signature.
    """
    c = cert_or_fields
    return b"".join(
        [
            _frame(c.public_key),
            _frame(c.signing_public_key),
            c.sequence_number.to_bytes(8, "big"),
            c.valid_from.to_bytes(8, "big"),
            c.valid_to.to_bytes(8, "big"),
            _frame(c.ca_id.encode("utf-8")),
        ]
    )


def certificate_signed_digest(suite: CipherSuite, cert: Certificate) -> bytes:
    body = pad_compose(canonical_encode(cert.attributes), _coupling_encoding(cert))
    return suite.hash(body)


def encode_certificate(cert: Certificate) -> bytes:
    """Deterministic self-delimiting layout, field order as declared."""
    return b"".join(
        [
            _frame(canonical_encode(cert.attributes)),
            _frame(cert.public_key),
            _frame(cert.signing_public_key),
            cert.sequence_number.to_bytes(8, "big"),
            cert.valid_from.to_bytes(8, "big"),
            cert.valid_to.to_bytes(8, "big"),
            _frame(cert.ca_id.encode("utf-8")),
            _frame(cert.ca_signature),
        ]
    )


def decode_certificate(blob: bytes) -> Certificate:
    view = memoryview(blob)
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(view):
            raise WireFormatError("truncated certificate")
        out = bytes(view[pos : pos + n])
        pos += n
        return out

    def take_framed() -> bytes:
        return take(int.from_bytes(take(2), "big"))

    attrs = canonical_decode(take_framed())
    public_key = take_framed()
    signing_public_key = take_framed()
    sequence_number = int.from_bytes(take(8), "big")
    valid_from = int.from_bytes(take(8), "big")
    valid_to = int.from_bytes(take(8), "big")
    ca_id = take_framed().decode("utf-8")
    ca_signature = take_framed()
    if pos != len(view):
        raise WireFormatError("trailing bytes after certificate")
    try:
        return Certificate(attrs, public_key, signing_public_key, sequence_number,
                           valid_from, valid_to, ca_id, ca_signature)
    except EncodingError as exc:
        raise WireFormatError(str(exc)) from exc


def describe_certificate(cert: Certificate) -> str:
    """Human-readable dump for logs and the transcript explainer."""
    a = cert.attributes
    return "\n".join(
        [
            f"certificate seq={cert.sequence_number} ca={cert.ca_id}",
            f"  license   : {a.license_number}",
            f"  brand     : {a.brand}",
            f"  color     : {a.color}",
            f"  texture   : {', '.join(a.texture_marks) or '-'}",
            f"  transceiver: {a.transceiver_fingerprint.hex()}",
            f"  enc key   : {cert.public_key.hex()}",
            f"  sig key   : {cert.signing_public_key.hex()}",
            f"  validity  : [{cert.valid_from}, {cert.valid_to}]",
            f"  signature : {cert.ca_signature.hex()}",
        ]
    )


TrustStore = dict  # ca_id -> CA signing public key


class CertificateAuthority:
    """Issues and renews certificates; holds the only signing key able to
    produce them.  Single-owner mutable (the issuance counter)."""

    def __init__(self, ca_id: str, suite: CipherSuite, rng: Random):
        self.ca_id = ca_id
        self._suite = suite
        self._keypair = suite.keygen_signing(rng)
        self._next_sequence = 1

    @property
    def public_key(self) -> bytes:
        return self._keypair.public

    @property
    def secret_key(self) -> bytes:
        return self._keypair.secret

    def trust_entry(self) -> tuple[str, bytes]:
        return self.ca_id, self._keypair.public

    def issue(self, attrs: AttributeSet, public_key: bytes, signing_public_key: bytes,
              validity_window: tuple[int, int]) -> Certificate:
        valid_from, valid_to = validity_window
        if valid_from >= valid_to:
            raise EncodingError("validity window is empty")
        seq = self._next_sequence
        self._next_sequence += 1
        unsigned = Certificate(
            attributes=attrs,
            public_key=public_key,
            signing_public_key=signing_public_key,
            sequence_number=seq,
            valid_from=valid_from,
            valid_to=valid_to,
            ca_id=self.ca_id,
            ca_signature=b"",
        )
        signature = self._suite.sign(
            self._keypair.secret, certificate_signed_digest(self._suite, unsigned)
        )
        return replace(unsigned, ca_signature=signature)

    def renew(self, old: Certificate, validity_window: tuple[int, int],
              new_attrs: AttributeSet | None = None,
              new_keys: tuple[bytes, bytes] | None = None) -> Certificate:
        """Fresh sequence number and validity; attributes and keys carry
        over unless replacements are supplied.  The old certificate stays
        verifiable until it expires."""
        if old.ca_id != self.ca_id:
            raise UnknownIssuer(f"certificate was issued by {old.ca_id!r}, not {self.ca_id!r}")
        public_key, signing_public_key = new_keys or (old.public_key, old.signing_public_key)
        return self.issue(new_attrs or old.attributes, public_key, signing_public_key,
                          validity_window)


def verify_certificate(trust_store: TrustStore, suite: CipherSuite,
                       cert: Certificate, now: int) -> None:
    """Raise UnknownIssuer / SignatureMismatch / Expired; return on success."""
    ca_public = trust_store.get(cert.ca_id)
    if ca_public is None:
        raise UnknownIssuer(f"no trust anchor for {cert.ca_id!r}")
    if not suite.verify(ca_public, certificate_signed_digest(suite, cert), cert.ca_signature):
        raise SignatureMismatch("CA signature does not verify")
    if not cert.valid_from <= now <= cert.valid_to:
        raise Expired(f"now={now} outside [{cert.valid_from}, {cert.valid_to}]")


@dataclass(frozen=True)
class VehicleIdentity:
    """Everything one vehicle owns: true attributes, both keypairs and
    the certificate coupling them."""

    vehicle_id: str
    attrs: AttributeSet
    enc_keypair: Keypair
    sig_keypair: Keypair
    certificate: Certificate


def enroll_vehicle(ca: CertificateAuthority, suite: CipherSuite, vehicle_id: str,
                   attrs: AttributeSet, rng: Random,
                   validity_window: tuple[int, int] = (0, 1 << 32)) -> VehicleIdentity:
    enc_kp = suite.keygen_encryption(rng)
    sig_kp = suite.keygen_signing(rng)
    assert enc_kp.kind is KeyKind.ENCRYPTION and sig_kp.kind is KeyKind.SIGNING
    cert = ca.issue(attrs, enc_kp.public, sig_kp.public, validity_window)
    return VehicleIdentity(vehicle_id, attrs, enc_kp, sig_kp, cert)
