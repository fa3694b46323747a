"""Golden wire-format vectors.

Deterministic frames harvested from seeded honest runs of every mode,
plus a certificate encoding and a padded composition.  The ``vectors``
CLI subcommand prints exactly this text; tests pin it against the
checked-in golden file so any layout change is caught byte-for-byte.
"""

from __future__ import annotations

from .certificates import pad_compose
from .config import ScenarioConfig
from .sim import run_scenario
from .wire import decode_message, frame_label

_VECTOR_SEED = 0
_VECTOR_MODES = ("base", "nonce_ack", "fs_dh", "iso_ke", "sigma", "tls")


def generate_vectors() -> str:
    lines = [
        "# wire-format test vectors",
        f"# suite=toy-v1 seed={_VECTOR_SEED} modes={','.join(_VECTOR_MODES)}",
        f"PAD_COMPOSE {pad_compose(b'alpha', b'beta').hex()}",
    ]
    seen: set[str] = set()
    cert_emitted = False
    for mode in _VECTOR_MODES:
        config = ScenarioConfig(seed=_VECTOR_SEED, mode=mode, strategy="passive")
        result = run_scenario(config)
        for entry in result.transcript.entries:
            msg = decode_message(entry.frame_bytes)
            label = frame_label(msg)
            if not cert_emitted and hasattr(msg, "cert"):
                from .certificates import encode_certificate
                lines.append(f"CERT {encode_certificate(msg.cert).hex()}")
                cert_emitted = True
            if label in seen:
                continue
            seen.add(label)
            lines.append(f"{mode}/{label} {entry.frame_bytes.hex()}")
    return "\n".join(lines) + "\n"
