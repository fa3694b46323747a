"""Exception taxonomy shared by every layer.

Each error class doubles as an abort reason: sessions that abort record
``type(exc).__name__`` so scenario reports and tests can name the exact
check that failed.
"""


class VanetAuthError(Exception):
    """Base class for every error raised by this package."""

    @property
    def reason(self) -> str:
        return type(self).__name__


# --- encoding / parsing ---------------------------------------------------

class EncodingError(VanetAuthError):
    """A value violates its type invariants and cannot be encoded."""


class WireFormatError(VanetAuthError):
    """A byte string does not parse as a wire frame or certificate."""


class PaddingInvalid(VanetAuthError):
    """A zero-padded field composition has inconsistent lengths or
    nonzero padding octets."""


# --- cryptographic operations ---------------------------------------------

class DecryptFailure(VanetAuthError):
    """Authenticated public-key decryption failed (wrong key or tampered
    ciphertext)."""


class IntegrityFailure(VanetAuthError):
    """A symmetric seal failed its integrity check."""


class InvalidGroupElement(VanetAuthError):
    """A value is not a usable Diffie-Hellman group element (identity,
    out of range, or malformed)."""


# --- certificate verification ---------------------------------------------

class CertificateInvalid(VanetAuthError):
    """Base for certificate verification failures."""


class UnknownIssuer(CertificateInvalid):
    """The certificate names a CA absent from the trust store."""


class SignatureMismatch(CertificateInvalid):
    """A digital signature did not verify.

    Raised both for CA signatures over certificates and for peer
    signatures over key material.
    """


class Expired(CertificateInvalid):
    """The verification time falls outside the validity window."""


# --- protocol aborts --------------------------------------------------------

class ProtocolStateError(VanetAuthError):
    """An operation was invoked in the wrong session phase."""


class CertInvalid(VanetAuthError):
    """The peer certificate failed verification (wraps the specific
    CertificateInvalid cause)."""


class AttributeMismatch(VanetAuthError):
    """Certified attributes do not match the out-of-band sensor reading."""


class FingerprintMismatch(VanetAuthError):
    """The frame's emitter transceiver fingerprint differs from the
    certified one."""


class SequenceMismatch(VanetAuthError):
    """The sequence number recovered from a key cryptogram does not match
    the receiving party's own certificate."""


class NonceMismatch(VanetAuthError):
    """The nonce echoed in a response does not match the challenge sent
    in this session."""


class DigestMismatch(VanetAuthError):
    """An acknowledgment opened correctly but covers a different message
    than the one sent."""


class MacMismatch(VanetAuthError):
    """A message authentication code did not verify."""


class VersionMismatch(VanetAuthError):
    """Handshake peers share no compatible protocol version/suite."""


class FinishMismatch(VanetAuthError):
    """A handshake finish frame does not match the running transcript."""


# --- harness ---------------------------------------------------------------

class ConfigInvalid(VanetAuthError):
    """A scenario configuration failed validation."""


class ParseError(ConfigInvalid):
    """A config file is syntactically malformed."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(ConfigInvalid):
    """A config file is well-formed but names an invalid value."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ScenarioRuleError(VanetAuthError):
    """An attack script attempted something the adversary model forbids
    (e.g. forging an honest transceiver fingerprint without theft)."""
