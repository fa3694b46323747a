"""Deterministic adversarial network simulator.

One scenario = one protocol mode x one adversary strategy x one seed.
The simulator steps parties strictly in delivery order on a virtual
clock (one tick per delivery), records every frame into an append-only
transcript, and computes the adversary's knowledge closure at the end.
Identical (config, seed) pairs produce bit-identical transcripts.

Sensing model
-------------
Out-of-band verification confirms that a vehicle with the claimed
attributes is physically present and looks right; it cannot attribute a
particular radio frame to a particular vehicle (that is the transceiver
fingerprint's job, and the fingerprint is defeated only by hardware
theft).  Concretely, the reading a party uses while processing a frame
senses:

* the vehicle the party *intends* to talk to, when it initiated the
  session with a pinned target (it keeps its sensors on that vehicle);
* otherwise the scene vehicle matching the license number claimed in the
  frame's certificate, when such a vehicle is present;
* otherwise the actual physical transmitter.

This reproduces both sides of the story: replayed frames from an absent
attacker verify out-of-band because the claimed vehicle really is there,
while an in-path attacker answering someone else's session fails the
initiator's pinned-target check.

Adversary rules
---------------
The adversary records every frame in radio range, may drop, inject,
replay and re-encrypt with keys it holds, and owns a valid certificate
for its own (distinct) attributes.  It may stamp any transceiver
fingerprint on frames it authors EXCEPT an honest vehicle's - replaying
a recorded frame verbatim is always allowed - unless the scenario grants
transceiver theft.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from random import Random

from .ake import AKE_VARIANTS, AkeSession, ake_step, new_ake_initiator, new_ake_responder
from .attributes import (
    AttributeSet,
    NoiseProfile,
    SensorReading,
    STRICT_POLICY,
    ZERO_NOISE,
    sense,
)
from .certificates import (
    Certificate,
    CertificateAuthority,
    VehicleIdentity,
    enroll_vehicle,
)
from .closure import ClosureResult, knowledge_closure
from .errors import ConfigInvalid, ProtocolStateError, ScenarioRuleError, VanetAuthError
from .hardened import (
    FS_DH,
    HARDENED_MODES,
    NONCE_ACK,
    h_initiator_on_m2,
    h_initiator_start,
    h_responder_on_ack,
    h_responder_on_m1,
)
from .protocol import (
    KEYSTREAM_MODE,
    Phase,
    SessionState,
    initiator_on_m2,
    initiator_start,
    new_initiator,
    new_responder,
    responder_on_m1,
)
from .suite import CipherSuite, export_secret, get_suite
from .wire import (
    Ack,
    Data,
    M1,
    M1h,
    M2,
    M2h,
    WireMessage,
    claimed_certificate,
    decode_message,
    encode_message,
    frame_label,
)

BASE = "base"
PLAIN_PKI = "plain_pki"
PROTOCOL_MODES = (PLAIN_PKI, BASE, NONCE_ACK, FS_DH) + AKE_VARIANTS

PASSIVE = "passive"
MITM_RELAY = "mitm_relay"
REPETITION_V1 = "repetition_v1"
REPETITION_V2 = "repetition_v2"
CORRUPT_AFTER = "corrupt_after"
STRATEGIES = (PASSIVE, MITM_RELAY, REPETITION_V1, REPETITION_V2, CORRUPT_AFTER)

# fixed application payloads exchanged once a session is up
PING_PLAINTEXT = b"telemetry: speed 61 kph, brake off, lane 2"
PONG_PLAINTEXT = b"ack: merging behind you, holding distance"
UNSOLICITED_PLAINTEXT = b"advisory: obstacle reported ahead, slow down"


# --- transcript ---------------------------------------------------------------

@dataclass(frozen=True)
class TranscriptEntry:
    tick: int
    src: str
    dst: str
    intercepted: bool
    frame_bytes: bytes


@dataclass
class Transcript:
    suite_id: str
    scenario_id: str
    entries: list[TranscriptEntry] = field(default_factory=list)

    def append(self, entry: TranscriptEntry) -> None:
        self.entries.append(entry)

    def frame_bytes(self) -> list[bytes]:
        return [e.frame_bytes for e in self.entries]


def transcript_lines(transcript: Transcript, verbose: bool = False) -> list[str]:
    """Line-delimited export: one frame per line after two header lines."""
    lines = [
        f"# scenario: {transcript.scenario_id}",
        f"# suite: {transcript.suite_id}",
    ]
    for e in transcript.entries:
        tag = frame_label(decode_message(e.frame_bytes))
        digest = hashlib.sha256(e.frame_bytes).hexdigest()[:16]
        line = (
            f"tick={e.tick} from={e.src} to={e.dst} "
            f"intercepted={int(e.intercepted)} tag={tag} digest={digest}"
        )
        if verbose:
            line += f" payload={e.frame_bytes.hex()}"
        lines.append(line)
    return lines


# --- honest party driver --------------------------------------------------------

class HonestParty:
    """Wraps one session of whatever mode the scenario runs and answers
    incoming frames the way an honest vehicle would."""

    def __init__(self, identity: VehicleIdentity, mode: str, suite: CipherSuite,
                 trust: dict, data_mode: str = KEYSTREAM_MODE,
                 intended_peer: str | None = None):
        if mode not in PROTOCOL_MODES:
            raise ConfigInvalid(f"unknown protocol mode {mode!r}")
        self.identity = identity
        self.id = identity.vehicle_id
        self.mode = mode
        self.suite = suite
        self.trust = trust
        self.data_mode = data_mode
        self.intended_peer = intended_peer
        self.session: SessionState | AkeSession | None = None
        self.received: list[bytes] = []
        self.sent_plaintexts: list[bytes] = []
        self.open_failures = 0
        self.protocol_errors: list[str] = []

    # session construction ------------------------------------------------

    def _session_kwargs(self) -> dict:
        return {
            "policy": STRICT_POLICY,
            "check_attributes": self.mode != PLAIN_PKI,
            "data_mode": self.data_mode,
        }

    def _build_initiator(self):
        if self.mode in AKE_VARIANTS:
            self.session = new_ake_initiator(self.mode, self.suite, self.trust,
                                             self.identity, **self._session_kwargs())
        else:
            hardened = self.mode if self.mode in HARDENED_MODES else None
            self.session = new_initiator(self.suite, self.trust, self.identity,
                                         hardened_mode=hardened,
                                         **self._session_kwargs())

    def _build_responder(self):
        if self.mode in AKE_VARIANTS:
            self.session = new_ake_responder(self.mode, self.suite, self.trust,
                                             self.identity, **self._session_kwargs())
        else:
            hardened = self.mode if self.mode in HARDENED_MODES else None
            self.session = new_responder(self.suite, self.trust, self.identity,
                                         hardened_mode=hardened,
                                         **self._session_kwargs())

    # protocol surface ------------------------------------------------------

    def start(self, rng: Random) -> list[WireMessage]:
        self._build_initiator()
        if self.mode in AKE_VARIANTS:
            return ake_step(self.session, None, None, rng)
        if self.mode in HARDENED_MODES:
            return [h_initiator_start(self.session, rng)]
        return [initiator_start(self.session)]

    def on_frame(self, frame: WireMessage, reading: SensorReading | None,
                 rng: Random) -> list[WireMessage]:
        try:
            return self._dispatch(frame, reading, rng)
        except ProtocolStateError as exc:
            self.protocol_errors.append(str(exc))
            return []
        except VanetAuthError:
            # the session recorded its abort reason before raising
            return []

    def _dispatch(self, frame, reading, rng) -> list[WireMessage]:
        if isinstance(frame, Data):
            return self._on_data(frame)
        if self.mode in AKE_VARIANTS:
            if self.session is None:
                self._build_responder()
            return ake_step(self.session, frame, reading, rng)
        if isinstance(frame, M1) or isinstance(frame, M1h):
            if self.session is None:
                self._build_responder()
        if self.session is None:
            raise ProtocolStateError(f"no session to receive {frame_label(frame)}")
        if isinstance(frame, M1):
            return [responder_on_m1(self.session, frame, reading, rng)]
        if isinstance(frame, M2):
            initiator_on_m2(self.session, frame, reading)
            return []
        if isinstance(frame, M1h):
            return [h_responder_on_m1(self.session, frame, reading, rng)]
        if isinstance(frame, M2h):
            return [h_initiator_on_m2(self.session, frame, reading, rng)]
        if isinstance(frame, Ack):
            h_responder_on_ack(self.session, frame)
            return []
        raise ProtocolStateError(f"{self.mode} session cannot process {frame_label(frame)}")

    def _on_data(self, frame: Data) -> list[WireMessage]:
        if self.session is None or not self.established:
            raise ProtocolStateError("data frame before establishment")
        try:
            from .protocol import open_payload
            plaintext = open_payload(self.suite, self.session.session_key,
                                     self.data_mode, frame.ciphertext)
        except VanetAuthError:
            self.open_failures += 1
            return []
        self.received.append(plaintext)
        return []

    def seal_data(self, plaintext: bytes, rng: Random) -> Data:
        if self.session is None or not self.established:
            raise ProtocolStateError("cannot seal before establishment")
        from .protocol import seal_payload
        ciphertext = seal_payload(self.suite, self.session.session_key,
                                  self.data_mode, plaintext, rng)
        self.sent_plaintexts.append(plaintext)
        return Data(fingerprint=self.identity.attrs.transceiver_fingerprint,
                    ciphertext=ciphertext)

    # reporting ----------------------------------------------------------------

    @property
    def established(self) -> bool:
        return self.session is not None and self.session.phase is Phase.ESTABLISHED

    @property
    def phase_name(self) -> str:
        return self.session.phase.value if self.session is not None else "idle"

    @property
    def abort_reason(self) -> str | None:
        return self.session.abort_reason if self.session is not None else None

    @property
    def session_key(self) -> bytes | None:
        return self.session.session_key if self.session is not None else None

    @property
    def peer_license(self) -> str | None:
        cert = self.session.peer_certificate if self.session is not None else None
        return cert.attributes.license_number if cert is not None else None


# --- adversary --------------------------------------------------------------------

class Adversary:
    """Records everything in radio range; attack scripts drive the rest.

    Knowledge grows monotonically and is the input to the closure at the
    end of a scenario.
    """

    def __init__(self, identity: VehicleIdentity, suite: CipherSuite, trust: dict):
        self.identity = identity
        self.id = identity.vehicle_id
        self.suite = suite
        self.trust = trust
        self.knowledge: list[bytes] = []
        self._known: set[bytes] = set()
        self.recorded_frames: list[bytes] = []

    def learn(self, blob: bytes) -> None:
        if blob not in self._known:
            self._known.add(blob)
            self.knowledge.append(blob)

    def record_frame(self, frame_bytes: bytes) -> None:
        self.recorded_frames.append(frame_bytes)
        self.learn(frame_bytes)

    def learn_own_secrets(self) -> None:
        self.learn(export_secret(self.identity.enc_keypair))
        self.learn(export_secret(self.identity.sig_keypair))

    def closure(self) -> ClosureResult:
        return knowledge_closure(self.knowledge, self.suite)


def corrupt_party(adversary: Adversary, identity: VehicleIdentity) -> None:
    """Hand the party's long-term secret keys to the adversary (modelled
    as post-session corruption)."""
    adversary.learn(export_secret(identity.enc_keypair))
    adversary.learn(export_secret(identity.sig_keypair))


# --- certificate forgery toolkit ---------------------------------------------------

def certificate_forgeries(suite: CipherSuite, victim: Certificate, donor: Certificate,
                          attacker_attrs: AttributeSet,
                          attacker_signing_secret: bytes) -> list[tuple[str, Certificate]]:
    """Everything an adversary without the CA key can try on recorded
    certificates: field substitution, splicing parts of two valid
    certificates, and re-signing with its own key."""
    from dataclasses import replace

    from .certificates import certificate_signed_digest

    def resign(cert: Certificate) -> Certificate:
        unsigned = replace(cert, ca_signature=b"")
        sig = suite.sign(attacker_signing_secret,
                         certificate_signed_digest(suite, unsigned))
        return replace(unsigned, ca_signature=sig)

    forgeries = [
        ("substitute-attrs", replace(victim, attributes=attacker_attrs)),
        ("splice-enc-key", replace(victim, public_key=donor.public_key)),
        ("splice-sig-key", replace(victim, signing_public_key=donor.signing_public_key)),
        ("splice-signature", replace(victim, ca_signature=donor.ca_signature)),
        ("bump-sequence", replace(victim, sequence_number=victim.sequence_number + 1)),
        ("extend-validity", replace(victim, valid_to=victim.valid_to + 10_000_000)),
        ("resign-own-key", resign(replace(victim, attributes=attacker_attrs))),
        ("resign-rogue-ca", replace(
            resign(replace(victim, attributes=attacker_attrs)), ca_id="rogue-ca")),
    ]
    return forgeries


# --- the network -------------------------------------------------------------------

class SimNetwork:
    """Party registry, sensing, fingerprint rules, transcript, clock."""

    def __init__(self, suite: CipherSuite, rng: Random, scenario_id: str,
                 vehicles: dict[str, VehicleIdentity], adversary: Adversary,
                 noise: NoiseProfile = ZERO_NOISE, transceiver_theft: bool = False):
        self.suite = suite
        self.rng = rng
        self.vehicles = vehicles
        self.adversary = adversary
        self.noise = noise
        self.transceiver_theft = transceiver_theft
        self.tick = 0
        self.transcript = Transcript(suite_id=suite.name, scenario_id=scenario_id)
        self.present: set[str] = set(vehicles)
        self._honest_fingerprints = {
            v.attrs.transceiver_fingerprint
            for vid, v in vehicles.items()
            if vid != adversary.id
        }

    # sensing ------------------------------------------------------------------

    def reading_for(self, receiver: HonestParty, frame: WireMessage,
                    physical_src: str) -> SensorReading:
        target = None
        if receiver.intended_peer is not None:
            target = self.vehicles[receiver.intended_peer]
        else:
            cert = claimed_certificate(frame)
            if cert is not None:
                claimed = cert.attributes.license_number
                for vid, vehicle in self.vehicles.items():
                    if vid in self.present and vehicle.attrs.license_number == claimed:
                        target = vehicle
                        break
            if target is None:
                target = self.vehicles[physical_src]
        return sense(target.attrs, self.noise, self.rng)

    # delivery --------------------------------------------------------------------

    def _check_emission(self, physical_src: str, frame_bytes: bytes,
                        frame: WireMessage) -> None:
        if physical_src != self.adversary.id:
            return
        if frame_bytes in self.adversary.recorded_frames:
            return  # verbatim replay carries whatever the recording carried
        if frame.fingerprint in self._honest_fingerprints and not self.transceiver_theft:
            raise ScenarioRuleError(
                "adversary cannot stamp an honest transceiver fingerprint "
                "without transceiver theft"
            )

    def deliver(self, src: str, dst: str, frame: WireMessage,
                receiver: HonestParty | None, rng: Random,
                physical_src: str | None = None,
                intercepted: bool = False) -> list[WireMessage]:
        """Record one frame on the air and, if an honest receiver is
        listening, step it.  ``src`` is the transcript's logical sender;
        ``physical_src`` the transmitting vehicle (defaults to src)."""
        physical_src = physical_src or src
        frame_bytes = encode_message(frame)
        self._check_emission(physical_src, frame_bytes, frame)
        self.tick += 1
        self.transcript.append(TranscriptEntry(self.tick, src, dst, intercepted,
                                               frame_bytes))
        self.adversary.record_frame(frame_bytes)
        if receiver is None:
            return []
        reading = self.reading_for(receiver, frame, physical_src)
        responses = receiver.on_frame(frame, reading, rng)
        if receiver.session is not None:
            receiver.session.now = self.tick
        return responses

    def pump(self, first_src: str, first_dst: str, frames: list[WireMessage],
             parties: dict[str, HonestParty], rng: Random) -> None:
        """Deliver frames and keep exchanging responses until quiet."""
        queue = [(first_src, first_dst, f) for f in frames]
        while queue:
            src, dst, frame = queue.pop(0)
            responses = self.deliver(src, dst, frame, parties.get(dst), rng)
            queue.extend((dst, src, r) for r in responses)


# --- scenario results ----------------------------------------------------------------

@dataclass(frozen=True)
class PartyOutcome:
    phase: str
    abort_reason: str | None
    peer_license: str | None


@dataclass
class ScenarioResult:
    scenario_id: str
    mode: str
    strategy: str
    seed: int
    suite_id: str
    parties: dict[str, PartyOutcome]
    adversary_success: bool
    success_criterion: str
    transcript: Transcript
    closure: ClosureResult
    closure_contains_session_key: bool
    closure_contains_plaintext: bool
    frames_before_data: int
    session_keys: dict[str, bytes | None]
    data_plaintexts: list[bytes]

    @property
    def abort_reasons(self) -> dict[str, str]:
        return {pid: o.abort_reason for pid, o in self.parties.items()
                if o.abort_reason is not None}


# --- scenario execution ---------------------------------------------------------------

@dataclass
class _World:
    config: object
    suite: CipherSuite
    rng: Random
    ca: CertificateAuthority
    trust: dict
    vehicles: dict[str, VehicleIdentity]
    adversary: Adversary
    net: SimNetwork
    clone_id: str | None = None


def _build_world(config) -> _World:
    suite = get_suite(config.suite)
    rng = Random(config.seed)
    ca = CertificateAuthority("ca-1", suite, rng)
    trust = dict([ca.trust_entry()])
    vehicles = {}
    for vid, attrs in config.vehicles:
        vehicles[vid] = enroll_vehicle(ca, suite, vid, attrs, rng)
    clone_id = None
    if config.flags.similar_attributes:
        # an innocent lookalike sharing the receiver's attribute set
        clone_id = config.receiver + "-lookalike"
        vehicles[clone_id] = enroll_vehicle(ca, suite, clone_id,
                                            vehicles[config.receiver].attrs, rng)
    adversary = Adversary(vehicles[config.adversary], suite, trust)
    net = SimNetwork(suite, rng, config.scenario_id, vehicles, adversary,
                     noise=config.noise,
                     transceiver_theft=config.flags.transceiver_theft)
    return _World(config, suite, rng, ca, trust, vehicles, adversary, net, clone_id)


def _party(world: _World, vehicle_id: str, intended_peer: str | None = None) -> HonestParty:
    return HonestParty(world.vehicles[vehicle_id], world.config.mode, world.suite,
                       world.trust, data_mode=world.config.flags.data_mode,
                       intended_peer=intended_peer)


def _run_honest_session(world: _World, sender: HonestParty, receiver: HonestParty,
                        exchange_data: bool = True) -> None:
    net, rng = world.net, world.rng
    parties = {sender.id: sender, receiver.id: receiver}
    net.pump(sender.id, receiver.id, sender.start(rng), parties, rng)
    if exchange_data and sender.established and receiver.established:
        net.pump(sender.id, receiver.id, [sender.seal_data(PING_PLAINTEXT, rng)],
                 parties, rng)
        net.pump(receiver.id, sender.id, [receiver.seal_data(PONG_PLAINTEXT, rng)],
                 parties, rng)


def _frames_before_data(transcript: Transcript) -> int:
    count = 0
    for entry in transcript.entries:
        if decode_message(entry.frame_bytes).LABEL == "DATA":
            break
        count += 1
    return count


def _finish(world: _World, honest: dict[str, HonestParty], success,
            criterion: str) -> ScenarioResult:
    config = world.config
    closure = world.adversary.closure()
    session_keys = {pid: p.session_key for pid, p in honest.items()}
    honest_keys = [k for k in session_keys.values() if k is not None]
    data_plaintexts = [pt for p in honest.values() for pt in p.sent_plaintexts]
    key_leaked = any(k in closure for k in honest_keys)
    plaintext_leaked = any(pt in closure for pt in data_plaintexts)
    if callable(success):
        success = success(key_leaked, plaintext_leaked)
    return ScenarioResult(
        scenario_id=config.scenario_id,
        mode=config.mode,
        strategy=config.strategy,
        seed=config.seed,
        suite_id=world.suite.name,
        parties={pid: PartyOutcome(p.phase_name, p.abort_reason, p.peer_license)
                 for pid, p in honest.items()},
        adversary_success=bool(success),
        success_criterion=criterion,
        transcript=world.net.transcript,
        closure=closure,
        closure_contains_session_key=key_leaked,
        closure_contains_plaintext=plaintext_leaked,
        frames_before_data=_frames_before_data(world.net.transcript),
        session_keys=session_keys,
        data_plaintexts=data_plaintexts,
    )


def _script_passive(world: _World) -> ScenarioResult:
    config = world.config
    sender = _party(world, config.sender, intended_peer=config.receiver)
    receiver = _party(world, config.receiver)
    _run_honest_session(world, sender, receiver)
    return _finish(
        world, {sender.id: sender, receiver.id: receiver},
        success=lambda key_leaked, pt_leaked: key_leaked or pt_leaked,
        criterion="eavesdropper derives a session key or payload plaintext",
    )


def _script_corrupt_after(world: _World) -> ScenarioResult:
    config = world.config
    sender = _party(world, config.sender, intended_peer=config.receiver)
    receiver = _party(world, config.receiver)
    _run_honest_session(world, sender, receiver)
    corrupt_party(world.adversary, world.vehicles[config.sender])
    corrupt_party(world.adversary, world.vehicles[config.receiver])
    return _finish(
        world, {sender.id: sender, receiver.id: receiver},
        success=lambda key_leaked, pt_leaked: key_leaked,
        criterion="post-session corruption of long-term keys exposes the session key",
    )


def _script_mitm_relay(world: _World) -> ScenarioResult:
    config = world.config
    net, rng = world.net, world.rng
    adv_id = config.adversary
    sender = _party(world, config.sender, intended_peer=config.receiver)
    receiver = _party(world, config.receiver)
    # the adversary plays both ends with its own (valid) identity
    adv_to_receiver = _party(world, adv_id, intended_peer=config.receiver)
    adv_to_sender = _party(world, adv_id)
    world.adversary.learn_own_secrets()

    # the sender hails its intended peer; the adversary captures the session
    pending = []
    for frame in sender.start(rng):
        pending.extend(net.deliver(config.sender, config.receiver, frame,
                                   adv_to_sender, rng, intercepted=True))

    # the adversary opens its own session with the receiver, as itself
    net.pump(adv_id, config.receiver,
             adv_to_receiver.start(rng),
             {adv_id: adv_to_receiver, config.receiver: receiver}, rng)

    # then it answers the captured session
    queue = [("adv", f) for f in pending]
    while queue:
        side, frame = queue.pop(0)
        if side == "adv":
            responses = net.deliver(adv_id, config.sender, frame, sender, rng)
            queue.extend(("sender", r) for r in responses)
        else:
            responses = net.deliver(config.sender, config.receiver, frame,
                                    adv_to_sender, rng, intercepted=True)
            queue.extend(("adv", r) for r in responses)

    for session in (adv_to_sender, adv_to_receiver):
        if session.session_key is not None:
            world.adversary.learn(session.session_key)

    # when both legs are up, relay one payload with re-encryption
    if sender.established and adv_to_sender.established and adv_to_receiver.established:
        ping = sender.seal_data(PING_PLAINTEXT, rng)
        net.deliver(config.sender, config.receiver, ping, adv_to_sender, rng,
                    intercepted=True)
        if adv_to_sender.received:
            stolen = adv_to_sender.received[-1]
            world.adversary.learn(stolen)
            relay = adv_to_receiver.seal_data(stolen, rng)
            net.deliver(adv_id, config.receiver, relay, receiver, rng)

    success = (
        sender.established and receiver.established
        and adv_to_sender.session_key is not None
        and adv_to_receiver.session_key is not None
    )
    return _finish(
        world, {sender.id: sender, receiver.id: receiver},
        success=success,
        criterion="both honest parties established while the adversary holds both session keys",
    )


def _script_repetition_v1(world: _World) -> ScenarioResult:
    config = world.config
    net, rng = world.net, world.rng

    # recording phase: one honest session, fully observed
    sender1 = _party(world, config.sender, intended_peer=config.receiver)
    receiver1 = _party(world, config.receiver)
    _run_honest_session(world, sender1, receiver1)
    recorded = [(e.src, e.frame_bytes) for e in net.transcript.entries]

    # replay phase: a fresh responder session, the sender silent
    receiver2 = _party(world, config.receiver)
    for src, frame_bytes in recorded:
        if src != config.sender:
            continue
        if receiver2.session is not None and receiver2.session.phase is Phase.ABORTED:
            break
        frame = decode_message(frame_bytes)
        responses = net.deliver(config.adversary, config.receiver, frame, receiver2,
                                rng)
        for r in responses:
            # answers head for the absent initiator; nobody is listening
            net.deliver(config.receiver, config.sender, r, None, rng, intercepted=True)

    if config.flags.responder_sends_first and receiver2.established:
        unsolicited = receiver2.seal_data(UNSOLICITED_PLAINTEXT, rng)
        net.deliver(config.receiver, config.sender, unsolicited, None, rng,
                    intercepted=True)

    sender_license = world.vehicles[config.sender].attrs.license_number
    success = receiver2.established and receiver2.peer_license == sender_license
    return _finish(
        world, {config.receiver: receiver2},
        success=success,
        criterion="responder establishes a session it attributes to the replayed sender",
    )


def _script_repetition_v2(world: _World, renew_sender: bool = False) -> ScenarioResult:
    from dataclasses import replace as dc_replace

    config = world.config
    net, rng = world.net, world.rng

    # recording phase
    sender1 = _party(world, config.sender, intended_peer=config.receiver)
    receiver1 = _party(world, config.receiver)
    _run_honest_session(world, sender1, receiver1)
    recorded = [(e.src, e.frame_bytes) for e in net.transcript.entries]

    if renew_sender:
        old = world.vehicles[config.sender]
        renewed = world.ca.renew(old.certificate, (0, 1 << 32))
        world.vehicles[config.sender] = dc_replace(old, certificate=renewed)

    # replay phase: the sender initiates again; the adversary suppresses the
    # real responder and answers from the recording
    target = world.clone_id or config.receiver
    sender2 = _party(world, config.sender, intended_peer=target)
    for frame in sender2.start(rng):
        net.deliver(config.sender, target, frame, None, rng, intercepted=True)
    for src, frame_bytes in recorded:
        if src != config.receiver:
            continue
        if sender2.session is not None and sender2.session.phase is Phase.ABORTED:
            break
        frame = decode_message(frame_bytes)
        responses = net.deliver(config.receiver, config.sender, frame, sender2, rng,
                                physical_src=config.adversary)
        for r in responses:
            net.deliver(config.sender, target, r, None, rng, intercepted=True)

    success = sender2.established and len(sender2.received) > 0
    return _finish(
        world, {config.sender: sender2},
        success=success,
        criterion="initiator establishes from replayed answers and accepts a replayed payload",
    )


_SCRIPTS = {
    PASSIVE: _script_passive,
    MITM_RELAY: _script_mitm_relay,
    REPETITION_V1: _script_repetition_v1,
    REPETITION_V2: _script_repetition_v2,
    CORRUPT_AFTER: _script_corrupt_after,
}


def run_scenario(config, **script_kwargs) -> ScenarioResult:
    """Execute one scenario; deterministic in (config, seed)."""
    if config.mode not in PROTOCOL_MODES:
        raise ConfigInvalid(f"unknown protocol mode {config.mode!r}")
    if config.strategy not in STRATEGIES:
        raise ConfigInvalid(f"unknown adversary strategy {config.strategy!r}")
    world = _build_world(config)
    return _SCRIPTS[config.strategy](world, **script_kwargs)
