"""Cipher suite abstraction.

Protocol code never names an algorithm: it talks to a suite object that
provides hashing, signatures, authenticated public-key encryption,
symmetric sealing, keystream generation and a Diffie-Hellman group.

Two suites ship by default:

* ``toy-v1`` - self-contained schemes over a small prime-order
  multiplicative group (Schnorr-style signatures, hybrid ElGamal
  encryption, hash-counter keystream).  Fast, dependency-free, and the
  group is small enough to cross-check against direct modular
  exponentiation in tests.
* ``std-v1`` - Ed25519 signatures, X25519-based hybrid encryption with
  AES-GCM, SHA-256 hashing.

Adversaries in this package are operational (they replay, splice and
re-encrypt with keys they hold), so suite strength never decides an
attack outcome; what matters is that both suites satisfy the same
contracts, which a shared conformance test suite checks.

All randomness is drawn from an injected ``random.Random`` so that every
scenario is replayable from its seed.  Suite objects are immutable and
safe to share.
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
from dataclasses import dataclass
from enum import Enum
from random import Random

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import DecryptFailure, EncodingError, IntegrityFailure, InvalidGroupElement

SESSION_KEY_LEN = 32
TAG_LEN = 16

# Tagged export format for secret material handed to the knowledge
# closure (e.g. after party corruption).  The closure recognizes these
# prefixes; raw secret bytes never carry them.
_SK_MAGIC = b"SKX"
SK_KIND_SIGNING = b"s"
SK_KIND_ENCRYPTION = b"e"
SK_KIND_DH = b"d"


class KeyKind(Enum):
    SIGNING = "signing"
    ENCRYPTION = "encryption"
    DH = "dh"


@dataclass(frozen=True)
class Keypair:
    public: bytes
    secret: bytes
    kind: KeyKind


@dataclass(frozen=True)
class DhElement:
    """A group element in canonical encoding.

    ``exponent`` is present only for locally generated elements and never
    leaves the process except through an explicit corruption export.
    """

    value: bytes
    exponent: int | bytes | None = None


def rand_bytes(rng: Random, n: int) -> bytes:
    if n == 0:
        return b""
    return rng.getrandbits(8 * n).to_bytes(n, "big")


def xor_bytes(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def export_secret(keypair: Keypair) -> bytes:
    """Tagged serialization of a secret key, for corruption events."""
    kind = {
        KeyKind.SIGNING: SK_KIND_SIGNING,
        KeyKind.ENCRYPTION: SK_KIND_ENCRYPTION,
        KeyKind.DH: SK_KIND_DH,
    }[keypair.kind]
    return _SK_MAGIC + kind + keypair.secret


def parse_secret_export(blob: bytes) -> tuple[bytes, bytes] | None:
    """Return (kind, key bytes) if ``blob`` is a tagged secret export."""
    if len(blob) > 4 and blob[:3] == _SK_MAGIC and blob[3:4] in (
        SK_KIND_SIGNING,
        SK_KIND_ENCRYPTION,
        SK_KIND_DH,
    ):
        return blob[3:4], blob[4:]
    return None


class CipherSuite:
    """Shared machinery; concrete suites fill in the primitives."""

    name: str = ""
    digest_len: int = 0

    # -- hashing / keystream -------------------------------------------------

    def hash(self, data: bytes) -> bytes:
        raise NotImplementedError

    def keystream(self, seed: bytes, length: int) -> bytes:
        """Deterministic in (seed, length); prefixes are consistent."""
        if length < 0:
            raise ValueError("keystream length must be >= 0")
        out = bytearray()
        counter = 0
        while len(out) < length:
            out += self.hash(b"ks|" + seed + counter.to_bytes(8, "big"))
            counter += 1
        return bytes(out[:length])

    def kdf(self, label: str, *parts: bytes) -> bytes:
        """Derive a 32-octet key from a labelled concatenation."""
        digest = self.hash(label.encode("ascii") + b"".join(parts))
        if len(digest) >= SESSION_KEY_LEN:
            return digest[:SESSION_KEY_LEN]
        # short-digest suites expand through the keystream
        return self.keystream(digest, SESSION_KEY_LEN)

    def mac(self, key: bytes, data: bytes) -> bytes:
        return self.hash(b"mac|" + len(key).to_bytes(2, "big") + key + data)[:TAG_LEN]

    # -- signatures ----------------------------------------------------------

    def keygen_signing(self, rng: Random) -> Keypair:
        raise NotImplementedError

    def sign(self, secret: bytes, digest: bytes) -> bytes:
        raise NotImplementedError

    def verify(self, public: bytes, digest: bytes, signature: bytes) -> bool:
        """Never raises: malformed inputs verify as False."""
        raise NotImplementedError

    # -- public-key encryption -----------------------------------------------

    def keygen_encryption(self, rng: Random) -> Keypair:
        raise NotImplementedError

    def pk_encrypt(self, public: bytes, plaintext: bytes, rng: Random) -> bytes:
        raise NotImplementedError

    def pk_decrypt(self, secret: bytes, ciphertext: bytes) -> bytes:
        raise NotImplementedError

    # -- symmetric sealing -----------------------------------------------------

    def seal_sym(self, key: bytes, plaintext: bytes, rng: Random) -> bytes:
        raise NotImplementedError

    def open_sym(self, key: bytes, ciphertext: bytes) -> bytes:
        raise NotImplementedError

    # -- Diffie-Hellman --------------------------------------------------------

    def dh_keygen(self, rng: Random) -> DhElement:
        raise NotImplementedError

    def dh_element(self, value: bytes) -> DhElement:
        """Validate and canonicalize a received element."""
        raise NotImplementedError

    def dh_from_exponent(self, exponent: int | bytes) -> DhElement:
        raise NotImplementedError

    def dh_shared(self, own: DhElement, peer: DhElement) -> bytes:
        raise NotImplementedError


class ToySuite(CipherSuite):
    """Self-contained suite over the multiplicative group mod a prime.

    Defaults to the Mersenne prime 2^127 - 1 with generator 3; tests may
    construct instances over tiny groups (e.g. modulus 1019) to compare
    shared secrets against direct modular exponentiation.
    """

    name = "toy-v1"
    digest_len = 48

    DEFAULT_PRIME = (1 << 127) - 1
    DEFAULT_GENERATOR = 3

    def __init__(self, prime: int | None = None, generator: int | None = None):
        self._p = prime if prime is not None else self.DEFAULT_PRIME
        self._g = generator if generator is not None else self.DEFAULT_GENERATOR
        if self._p < 5:
            raise ValueError("modulus too small")
        self._q = self._p - 1  # exponents are taken mod the group order
        self._w = (self._p.bit_length() + 7) // 8

    # int <-> fixed-width canonical encoding
    def _enc(self, x: int) -> bytes:
        return x.to_bytes(self._w, "big")

    def _dec(self, b: bytes) -> int:
        return int.from_bytes(b, "big")

    def hash(self, data: bytes) -> bytes:
        return hashlib.blake2b(data, digest_size=self.digest_len).digest()

    # Schnorr-style signatures; the commitment nonce is derived from the
    # secret and the digest so signing is deterministic.
    def keygen_signing(self, rng: Random) -> Keypair:
        x = rng.randrange(2, self._q - 1)
        return Keypair(
            public=self._enc(pow(self._g, x, self._p)),
            secret=self._enc(x),
            kind=KeyKind.SIGNING,
        )

    def sign(self, secret: bytes, digest: bytes) -> bytes:
        x = self._dec(secret)
        k = int.from_bytes(self.hash(b"sig-k|" + secret + digest), "big") % self._q
        if k == 0:
            k = 1
        r = pow(self._g, k, self._p)
        e = int.from_bytes(self.hash(b"sig-e|" + self._enc(r) + digest), "big") % self._q
        s = (k + x * e) % self._q
        return self._enc(r) + self._enc(s)

    def verify(self, public: bytes, digest: bytes, signature: bytes) -> bool:
        if len(signature) != 2 * self._w or len(public) != self._w:
            return False
        r = self._dec(signature[: self._w])
        s = self._dec(signature[self._w :])
        y = self._dec(public)
        if not (0 < r < self._p) or not (0 < y < self._p):
            return False
        e = int.from_bytes(
            self.hash(b"sig-e|" + self._enc(r) + digest), "big"
        ) % self._q
        return pow(self._g, s, self._p) == (r * pow(y, e, self._p)) % self._p

    # Hybrid ElGamal: an ephemeral group element transports a keystream
    # seed, and a digest tag makes decryption failure explicit.
    def keygen_encryption(self, rng: Random) -> Keypair:
        x = rng.randrange(2, self._q - 1)
        return Keypair(
            public=self._enc(pow(self._g, x, self._p)),
            secret=self._enc(x),
            kind=KeyKind.ENCRYPTION,
        )

    def pk_encrypt(self, public: bytes, plaintext: bytes, rng: Random) -> bytes:
        if len(public) != self._w:
            raise EncodingError("bad public key length")
        y = rng.randrange(2, self._q - 1)
        c1 = pow(self._g, y, self._p)
        shared = pow(self._dec(public), y, self._p)
        k = self.hash(b"kem|" + self._enc(c1) + self._enc(shared))
        body = xor_bytes(plaintext, self.keystream(k, len(plaintext)))
        tag = self.hash(b"kem-tag|" + k + plaintext)[:TAG_LEN]
        return self._enc(c1) + body + tag

    def pk_decrypt(self, secret: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < self._w + TAG_LEN:
            raise DecryptFailure("ciphertext too short")
        c1 = self._dec(ciphertext[: self._w])
        if not (1 < c1 < self._p - 1):
            raise DecryptFailure("bad ephemeral element")
        body = ciphertext[self._w : -TAG_LEN]
        tag = ciphertext[-TAG_LEN:]
        shared = pow(c1, self._dec(secret), self._p)
        k = self.hash(b"kem|" + ciphertext[: self._w] + self._enc(shared))
        plaintext = xor_bytes(body, self.keystream(k, len(body)))
        if self.hash(b"kem-tag|" + k + plaintext)[:TAG_LEN] != tag:
            raise DecryptFailure("tag mismatch")
        return plaintext

    def seal_sym(self, key: bytes, plaintext: bytes, rng: Random) -> bytes:
        nonce = rand_bytes(rng, 16)
        k = self.hash(b"sym|" + key + nonce)
        body = xor_bytes(plaintext, self.keystream(k, len(plaintext)))
        tag = self.hash(b"sym-tag|" + k + plaintext)[:TAG_LEN]
        return nonce + body + tag

    def open_sym(self, key: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < 16 + TAG_LEN:
            raise IntegrityFailure("sealed blob too short")
        nonce, body, tag = ciphertext[:16], ciphertext[16:-TAG_LEN], ciphertext[-TAG_LEN:]
        k = self.hash(b"sym|" + key + nonce)
        plaintext = xor_bytes(body, self.keystream(k, len(body)))
        if self.hash(b"sym-tag|" + k + plaintext)[:TAG_LEN] != tag:
            raise IntegrityFailure("tag mismatch")
        return plaintext

    def dh_keygen(self, rng: Random) -> DhElement:
        x = rng.randrange(2, self._q - 1)
        return DhElement(value=self._enc(pow(self._g, x, self._p)), exponent=x)

    def dh_element(self, value: bytes) -> DhElement:
        if len(value) != self._w:
            raise InvalidGroupElement("bad element length")
        v = self._dec(value)
        if not (1 < v < self._p - 1):
            # rejects zero, the identity, and the order-2 element
            raise InvalidGroupElement("element outside the usable group")
        return DhElement(value=value)

    def dh_from_exponent(self, exponent: int | bytes) -> DhElement:
        if isinstance(exponent, bytes):
            exponent = int.from_bytes(exponent, "big")
        return DhElement(
            value=self._enc(pow(self._g, exponent % self._q, self._p)),
            exponent=exponent,
        )

    def dh_shared(self, own: DhElement, peer: DhElement) -> bytes:
        if own.exponent is None:
            raise ValueError("own element lacks its exponent")
        peer = self.dh_element(peer.value)
        exp = own.exponent
        if isinstance(exp, bytes):
            exp = int.from_bytes(exp, "big")
        return self._enc(pow(self._dec(peer.value), exp, self._p))


class StdSuite(CipherSuite):
    """Ed25519 / X25519 / AES-GCM suite."""

    name = "std-v1"
    digest_len = 32

    _X25519_IDENTITY = b"\x00" * 32

    def hash(self, data: bytes) -> bytes:
        return hashlib.sha256(data).digest()

    def keygen_signing(self, rng: Random) -> Keypair:
        seed = rand_bytes(rng, 32)
        public = Ed25519PrivateKey.from_private_bytes(seed).public_key().public_bytes_raw()
        return Keypair(public=public, secret=seed, kind=KeyKind.SIGNING)

    def sign(self, secret: bytes, digest: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(secret).sign(digest)

    def verify(self, public: bytes, digest: bytes, signature: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public).verify(signature, digest)
            return True
        except (InvalidSignature, ValueError):
            return False

    def keygen_encryption(self, rng: Random) -> Keypair:
        seed = rand_bytes(rng, 32)
        public = X25519PrivateKey.from_private_bytes(seed).public_key().public_bytes_raw()
        return Keypair(public=public, secret=seed, kind=KeyKind.ENCRYPTION)

    def pk_encrypt(self, public: bytes, plaintext: bytes, rng: Random) -> bytes:
        eph_seed = rand_bytes(rng, 32)
        eph = X25519PrivateKey.from_private_bytes(eph_seed)
        eph_pub = eph.public_key().public_bytes_raw()
        try:
            shared = eph.exchange(X25519PublicKey.from_public_bytes(public))
        except ValueError as exc:
            raise EncodingError(f"unusable public key: {exc}") from exc
        k = self.hash(b"kem|" + eph_pub + shared)
        nonce = rand_bytes(rng, 12)
        body = AESGCM(k).encrypt(nonce, plaintext, eph_pub)
        return eph_pub + nonce + body

    def pk_decrypt(self, secret: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < 32 + 12 + 16:
            raise DecryptFailure("ciphertext too short")
        eph_pub, nonce, body = ciphertext[:32], ciphertext[32:44], ciphertext[44:]
        try:
            shared = X25519PrivateKey.from_private_bytes(secret).exchange(
                X25519PublicKey.from_public_bytes(eph_pub)
            )
        except ValueError as exc:
            raise DecryptFailure(f"key agreement failed: {exc}") from exc
        k = self.hash(b"kem|" + eph_pub + shared)
        try:
            return AESGCM(k).decrypt(nonce, body, eph_pub)
        except InvalidTag as exc:
            raise DecryptFailure("tag mismatch") from exc

    def mac(self, key: bytes, data: bytes) -> bytes:
        return _hmac.new(key, data, hashlib.sha256).digest()[:TAG_LEN]

    def seal_sym(self, key: bytes, plaintext: bytes, rng: Random) -> bytes:
        k = self.hash(b"sym|" + key)
        nonce = rand_bytes(rng, 12)
        return nonce + AESGCM(k).encrypt(nonce, plaintext, b"")

    def open_sym(self, key: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < 12 + 16:
            raise IntegrityFailure("sealed blob too short")
        k = self.hash(b"sym|" + key)
        try:
            return AESGCM(k).decrypt(ciphertext[:12], ciphertext[12:], b"")
        except InvalidTag as exc:
            raise IntegrityFailure("tag mismatch") from exc

    def dh_keygen(self, rng: Random) -> DhElement:
        seed = rand_bytes(rng, 32)
        public = X25519PrivateKey.from_private_bytes(seed).public_key().public_bytes_raw()
        return DhElement(value=public, exponent=seed)

    def dh_element(self, value: bytes) -> DhElement:
        if len(value) != 32:
            raise InvalidGroupElement("bad element length")
        if value == self._X25519_IDENTITY:
            raise InvalidGroupElement("identity element")
        return DhElement(value=value)

    def dh_from_exponent(self, exponent: int | bytes) -> DhElement:
        if isinstance(exponent, int):
            exponent = exponent.to_bytes(32, "big")
        public = X25519PrivateKey.from_private_bytes(exponent).public_key().public_bytes_raw()
        return DhElement(value=public, exponent=exponent)

    def dh_shared(self, own: DhElement, peer: DhElement) -> bytes:
        if own.exponent is None:
            raise ValueError("own element lacks its exponent")
        peer = self.dh_element(peer.value)
        exp = own.exponent
        if isinstance(exp, int):
            exp = exp.to_bytes(32, "big")
        try:
            return X25519PrivateKey.from_private_bytes(exp).exchange(
                X25519PublicKey.from_public_bytes(peer.value)
            )
        except ValueError as exc:
            # the library rejects low-order inputs by refusing an
            # all-zero shared secret
            raise InvalidGroupElement(f"degenerate element: {exc}") from exc


_SUITE_FACTORIES = {
    ToySuite.name: ToySuite,
    StdSuite.name: StdSuite,
}

SUITE_NAMES = tuple(sorted(_SUITE_FACTORIES))


def get_suite(name: str) -> CipherSuite:
    try:
        return _SUITE_FACTORIES[name]()
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; valid: {', '.join(SUITE_NAMES)}") from None
