"""Operational knowledge closure.

Everything an adversary can derive from what it has recorded, without
cryptanalysis: split frames and certificates along the self-delimiting
formats, open zero-padded compositions, decrypt with held secret keys,
open sealed payloads with held 32-octet keys, complete Diffie-Hellman
with held exponents, and apply the protocol key derivations to anything
that qualifies.  Hashes of held values are recomputed one level deep.

The closure is a fixed point over a set of octet strings.  Every element
it adds is recorded in a derivation log (rule name, inputs, output), and
``replay_derivations`` re-executes the log to confirm each step, which is
what makes a "the closure does not contain the session key" verdict
trustworthy: the same rule set demonstrably finds the key whenever a
derivation path exists (the corruption scenarios are the positive
controls).

Secret keys enter knowledge only through the tagged export format of
:func:`vanetauth.suite.export_secret`; raw recorded bytes never match it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .certificates import decode_certificate, encode_certificate, split_composed
from .errors import VanetAuthError, WireFormatError
from .protocol import AEAD_MODE, KEYSTREAM_MODE, open_payload
from .suite import (
    SESSION_KEY_LEN,
    CipherSuite,
    SK_KIND_DH,
    SK_KIND_ENCRYPTION,
    parse_secret_export,
)
from .wire import (
    Ack,
    Data,
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
    decode_message,
)

_PAIR_KDF_LABELS = ("vanet-fs-v1", "iso", "sigma/ks", "sigma/ke", "sigma/km")


@dataclass(frozen=True)
class DerivationStep:
    rule: str
    inputs: tuple[bytes, ...]
    output: bytes


@dataclass(frozen=True)
class ClosureResult:
    items: frozenset
    log: tuple[DerivationStep, ...]

    def __contains__(self, value: bytes) -> bool:
        return value in self.items


class _Workspace:
    def __init__(self):
        self.items: dict[bytes, None] = {}
        self.hints: dict[str, list[bytes]] = {
            "dh_el": [], "key": [],
            "sk_enc": [], "sk_dh": [], "hello_i": [], "hello_r": [],
            "pm_candidate": [], "shared": [], "hashed": [],
        }
        self.log: list[DerivationStep] = []

    def has(self, b: bytes) -> bool:
        return b in self.items

    def add(self, b: bytes, rule: str, inputs: tuple[bytes, ...],
            hints: tuple[str, ...] = ()) -> bool:
        fresh = b not in self.items
        if fresh:
            self.items[b] = None
            if rule != "given":
                self.log.append(DerivationStep(rule, inputs, b))
        for h in hints:
            if b not in self.hints[h]:
                self.hints[h].append(b)
        return fresh


def _classify_frame(ws: _Workspace, blob: bytes) -> bool:
    """Split a frame along the wire format; tag fields for later rules."""
    try:
        msg = decode_message(blob)
    except (WireFormatError, VanetAuthError):
        return False
    grew = False

    def field(value: bytes, hints: tuple[str, ...] = ()) -> None:
        nonlocal grew
        grew |= ws.add(value, "frame-field", (blob,), hints)

    if isinstance(msg, (M1, M1h, M2, M2h, IsoMsg1, IsoMsg2, TlsHelloR, TlsKeyExchange)):
        field(encode_certificate(msg.cert))
    if isinstance(msg, (M2, M2h)):
        field(msg.enc_key_blob)
        field(msg.enc_sig_blob)
    if isinstance(msg, M1h):
        field(msg.nonce, ("dh_el",))
    if isinstance(msg, (IsoMsg1, IsoMsg2, SigmaMsg1, SigmaMsg2)):
        field(msg.dh, ("dh_el",))
    if isinstance(msg, (IsoMsg2, IsoMsg3)):
        field(msg.signature)
    if isinstance(msg, (SigmaMsg2, SigmaMsg3)):
        field(msg.enc_blob)
    if isinstance(msg, (Ack, Data, TlsFinishI, TlsFinishR, TlsSessionStart)):
        field(msg.ciphertext)
    if isinstance(msg, TlsHelloI):
        if blob not in ws.hints["hello_i"]:
            ws.hints["hello_i"].append(blob)
        field(msg.random)
    if isinstance(msg, TlsHelloR):
        if blob not in ws.hints["hello_r"]:
            ws.hints["hello_r"].append(blob)
        field(msg.random)
    if isinstance(msg, TlsKeyExchange):
        field(msg.enc_premaster)
    return grew


def _classify_value(ws: _Workspace, blob: bytes) -> bool:
    """Non-frame structure: secret exports, certificates, compositions."""
    grew = False
    parsed = parse_secret_export(blob)
    if parsed is not None:
        kind, key = parsed
        if kind == SK_KIND_ENCRYPTION:
            grew |= ws.add(key, "secret-unwrap", (blob,), ("sk_enc",))
        elif kind == SK_KIND_DH:
            grew |= ws.add(key, "secret-unwrap", (blob,), ("sk_dh",))
        else:
            grew |= ws.add(key, "secret-unwrap", (blob,))
        return grew

    try:
        cert = decode_certificate(blob)
    except (WireFormatError, VanetAuthError):
        cert = None
    if cert is not None:
        for rule, value in (
            ("cert-field", cert.public_key),
            ("cert-field", cert.signing_public_key),
            ("cert-field", cert.ca_signature),
        ):
            grew |= ws.add(value, rule, (blob,))

    for count, rule in ((2, "split2"), (3, "split3")):
        try:
            parts = split_composed(blob, count)
        except VanetAuthError:
            continue
        for part in parts:
            hints = []
            if len(part) == SESSION_KEY_LEN:
                hints.append("key")
            grew |= ws.add(part, rule, (blob,), tuple(hints))
    if len(blob) == SESSION_KEY_LEN and blob not in ws.hints["key"]:
        ws.hints["key"].append(blob)
        grew = True
    return grew


def knowledge_closure(knowledge: Iterable[bytes], suite: CipherSuite) -> ClosureResult:
    """Fixed point of the derivation rules over ``knowledge``."""
    ws = _Workspace()
    for blob in sorted(set(knowledge)):
        ws.add(blob, "given", ())

    attempted: set[tuple] = set()

    def once(key: tuple) -> bool:
        if key in attempted:
            return False
        attempted.add(key)
        return True

    grew = True
    while grew:
        grew = False

        for blob in list(ws.items):
            if once(("structure", blob)):
                grew |= _classify_frame(ws, blob)
                grew |= _classify_value(ws, blob)

        # decrypt any held blob with any held encryption secret; blobs from
        # recognized cryptogram positions are merely the likely hits
        for sk in list(ws.hints["sk_enc"]):
            for ct in list(ws.items):
                if not once(("pkdec", ct, sk)):
                    continue
                try:
                    plaintext = suite.pk_decrypt(sk, ct)
                except VanetAuthError:
                    continue
                hints = ("pm_candidate",) if len(plaintext) == 32 else ()
                grew |= ws.add(plaintext, "pk-decrypt", (sk, ct), hints)

        # open any held blob with every held 32-octet key candidate
        for key in list(ws.hints["key"]):
            for ct in list(ws.items):
                for mode in (KEYSTREAM_MODE, AEAD_MODE):
                    if not once(("open", ct, key, mode)):
                        continue
                    try:
                        plaintext = open_payload(suite, key, mode, ct)
                    except VanetAuthError:
                        continue
                    grew |= ws.add(plaintext, f"open-{mode}", (key, ct))

        # complete Diffie-Hellman with held exponents
        for exp in list(ws.hints["sk_dh"]):
            for el in list(ws.hints["dh_el"]):
                if not once(("dh", exp, el)):
                    continue
                try:
                    own = suite.dh_from_exponent(exp)
                    shared = suite.dh_shared(own, suite.dh_element(el))
                except VanetAuthError:
                    continue
                grew |= ws.add(shared, "dh-shared", (exp, el), ("shared",))

        # protocol key derivations over any derived shared secret
        for shared in list(ws.hints["shared"]):
            for a in list(ws.hints["dh_el"]):
                for b in list(ws.hints["dh_el"]):
                    if a == b or not once(("kdf", shared, a, b)):
                        continue
                    for label in _PAIR_KDF_LABELS:
                        derived = suite.kdf(label, shared, a, b)
                        grew |= ws.add(derived, f"kdf-{label}", (shared, a, b),
                                       ("key",))

        # a decrypted pre-master plus both hello frames yields a master key
        for pm in list(ws.hints["pm_candidate"]):
            for hi in list(ws.hints["hello_i"]):
                for hr in list(ws.hints["hello_r"]):
                    if not once(("tls-master", pm, hi, hr)):
                        continue
                    master = suite.kdf("tls/master", pm, hi, hr)
                    grew |= ws.add(master, "kdf-tls/master", (pm, hi, hr), ("key",))

        # recompute hashes one level deep
        for blob in list(ws.items):
            if blob in ws.hints["hashed"]:
                continue
            if not once(("hash", blob)):
                continue
            digest = suite.hash(blob)
            ws.hints["hashed"].append(digest)
            grew |= ws.add(digest, "hash", (blob,))

    return ClosureResult(items=frozenset(ws.items), log=tuple(ws.log))


def replay_derivations(result: ClosureResult, suite: CipherSuite) -> bool:
    """Re-execute every logged step; True iff each output is reproduced."""
    for step in result.log:
        if not _replay_step(step, suite):
            return False
    return True


def _replay_step(step: DerivationStep, suite: CipherSuite) -> bool:
    rule, inputs, output = step.rule, step.inputs, step.output
    try:
        if rule == "frame-field":
            ws = _Workspace()
            ws.add(inputs[0], "given", ())
            _classify_frame(ws, inputs[0])
            return output in ws.items
        if rule in ("cert-field", "split2", "split3", "secret-unwrap"):
            ws = _Workspace()
            ws.add(inputs[0], "given", ())
            _classify_value(ws, inputs[0])
            return output in ws.items
        if rule == "pk-decrypt":
            return suite.pk_decrypt(inputs[0], inputs[1]) == output
        if rule == f"open-{KEYSTREAM_MODE}":
            return open_payload(suite, inputs[0], KEYSTREAM_MODE, inputs[1]) == output
        if rule == f"open-{AEAD_MODE}":
            return open_payload(suite, inputs[0], AEAD_MODE, inputs[1]) == output
        if rule == "dh-shared":
            own = suite.dh_from_exponent(inputs[0])
            return suite.dh_shared(own, suite.dh_element(inputs[1])) == output
        if rule.startswith("kdf-"):
            return suite.kdf(rule[len("kdf-"):], *inputs) == output
        if rule == "hash":
            return suite.hash(inputs[0]) == output
    except VanetAuthError:
        return False
    return False
