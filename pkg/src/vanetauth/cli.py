"""Command-line scenario runner.

Subcommands:

* ``run``     - execute one scenario and report it
* ``matrix``  - execute a mode x strategy grid and report the table
* ``vectors`` - emit the golden wire-format test vectors
* ``explain`` - pretty-print an exported transcript

Reports print to stdout; ``--transcript-dir`` writes transcripts and
``--figure-dir`` renders figures next to the delimited output.  With
``--expect`` the exit code is 0 only when every expected cell matched.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import PROTOCOL_MODES, STRATEGIES, ScenarioConfig, load_config
from .errors import VanetAuthError
from .report import (
    JSONL_FORMAT,
    TEXT_FORMAT,
    cell_from_result,
    compare_expectations,
    emit_report,
    load_expectations,
    run_matrix,
)
from .sim import ScenarioResult, run_scenario, transcript_lines
from .vectors import generate_vectors


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vanetauth",
        description="attribute-coupled vehicle authentication scenario runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--format", choices=[TEXT_FORMAT, JSONL_FORMAT],
                       default=TEXT_FORMAT)
        p.add_argument("--expect", help="expectations file to compare against")
        p.add_argument("--transcript-dir", help="write transcripts into this directory")
        p.add_argument("--figure-dir", help="render figures into this directory")
        p.add_argument("--verbose", action="store_true",
                       help="include full frame payloads in transcripts")

    p_run = sub.add_parser("run", help="run a single scenario")
    common(p_run)
    p_run.add_argument("--mode", choices=PROTOCOL_MODES, help="override the protocol mode")
    p_run.add_argument("--strategy", choices=STRATEGIES,
                       help="override the adversary strategy")

    p_matrix = sub.add_parser("matrix", help="run a mode x strategy grid")
    common(p_matrix)
    p_matrix.add_argument("--modes", default=",".join(PROTOCOL_MODES),
                          help="comma-separated protocol modes")
    p_matrix.add_argument("--strategies", default=",".join(STRATEGIES),
                          help="comma-separated adversary strategies")

    sub.add_parser("vectors", help="emit golden wire-format vectors")

    p_explain = sub.add_parser("explain", help="pretty-print an exported transcript")
    p_explain.add_argument("--transcript", required=True, help="transcript file to explain")

    return parser


def _load_base_config(args) -> ScenarioConfig:
    if args.config:
        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_overrides(seed=args.seed)
        return config
    if args.seed is not None:
        return ScenarioConfig(seed=args.seed)
    raise VanetAuthError("either --config or --seed is required")


def _render_run_text(result: ScenarioResult) -> str:
    lines = [
        f"# scenario {result.scenario_id}  suite={result.suite_id}",
        f"criterion: {result.success_criterion}",
    ]
    for pid in sorted(result.parties):
        outcome = result.parties[pid]
        detail = f"phase={outcome.phase}"
        if outcome.abort_reason:
            detail += f" abort={outcome.abort_reason}"
        if outcome.peer_license:
            detail += f" peer={outcome.peer_license}"
        lines.append(f"party {pid}: {detail}")
    lines += [
        f"adversary_success: {'yes' if result.adversary_success else 'no'}",
        f"closure_contains_session_key: "
        f"{'yes' if result.closure_contains_session_key else 'no'}",
        f"closure_contains_plaintext: "
        f"{'yes' if result.closure_contains_plaintext else 'no'}",
        f"frames_before_data: {result.frames_before_data}",
    ]
    return "\n".join(lines) + "\n"


def _render_run_jsonl(result: ScenarioResult) -> str:
    obj = cell_from_result(result).to_json_obj()
    obj.update({
        "scenario_id": result.scenario_id,
        "suite": result.suite_id,
        "seed": result.seed,
        "parties": {pid: {"phase": o.phase, "abort_reason": o.abort_reason,
                          "peer_license": o.peer_license}
                    for pid, o in sorted(result.parties.items())},
        "closure_contains_plaintext": result.closure_contains_plaintext,
    })
    return json.dumps(obj, sort_keys=True) + "\n"


def _write_transcript(result: ScenarioResult, directory: str, verbose: bool) -> None:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{result.scenario_id}.transcript")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(transcript_lines(result.transcript, verbose=verbose)) + "\n")


def _cmd_run(args) -> int:
    config = _load_base_config(args)
    config = config.with_overrides(mode=args.mode, strategy=args.strategy)
    result = run_scenario(config)
    if args.format == TEXT_FORMAT:
        sys.stdout.write(_render_run_text(result))
    else:
        sys.stdout.write(_render_run_jsonl(result))
    if args.transcript_dir:
        _write_transcript(result, args.transcript_dir, args.verbose)
    if args.figure_dir:
        from .figures import render_transcript_figure
        os.makedirs(args.figure_dir, exist_ok=True)
        render_transcript_figure(
            result.transcript,
            os.path.join(args.figure_dir, f"{result.scenario_id}.png"))
    if args.expect:
        expectations = load_expectations(args.expect)
        expected = expectations.get((result.mode, result.strategy))
        if expected is None:
            sys.stderr.write(f"no expectation for {result.mode}.{result.strategy}\n")
            return 1
        if expected != result.adversary_success:
            sys.stderr.write(
                f"{result.mode}.{result.strategy}: expected adversary_success="
                f"{expected}, got {result.adversary_success}\n")
            return 1
    return 0


def _cmd_matrix(args) -> int:
    config = _load_base_config(args)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    report, results = run_matrix(modes, strategies, config, keep_results=True)
    sys.stdout.write(emit_report(report, args.format))
    if args.transcript_dir:
        for result in results.values():
            _write_transcript(result, args.transcript_dir, args.verbose)
    if args.figure_dir:
        from .figures import render_matrix_figure, render_rounds_figure
        os.makedirs(args.figure_dir, exist_ok=True)
        render_matrix_figure(report, os.path.join(args.figure_dir, "matrix_outcomes.png"))
        render_rounds_figure(report, os.path.join(args.figure_dir, "matrix_rounds.png"))
    if args.expect:
        diffs = compare_expectations(report, load_expectations(args.expect))
        if diffs:
            for diff in diffs:
                sys.stderr.write(diff + "\n")
            return 1
    return 0


def _cmd_vectors(_args) -> int:
    sys.stdout.write(generate_vectors())
    return 0


def _cmd_explain(args) -> int:
    from .certificates import describe_certificate
    from .wire import decode_message

    with open(args.transcript, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for line in lines:
        if line.startswith("#") or not line.strip():
            sys.stdout.write(line + "\n")
            continue
        fields = dict(part.split("=", 1) for part in line.split())
        summary = (f"[{fields.get('tick', '?'):>4}] {fields.get('from', '?')} -> "
                   f"{fields.get('to', '?')} {fields.get('tag', '?')}")
        if fields.get("intercepted") == "1":
            summary += "  (intercepted)"
        sys.stdout.write(summary + "\n")
        payload = fields.get("payload")
        if payload:
            msg = decode_message(bytes.fromhex(payload))
            for attr, _codec in msg.FIELDS:
                value = getattr(msg, attr)
                if hasattr(value, "ca_signature"):
                    block = describe_certificate(value)
                    sys.stdout.write("\n".join("    " + l for l in block.splitlines()) + "\n")
                elif isinstance(value, bytes):
                    sys.stdout.write(f"    {attr}: {len(value)} octets {value[:16].hex()}...\n")
                else:
                    sys.stdout.write(f"    {attr}: {value!r}\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "run": _cmd_run,
        "matrix": _cmd_matrix,
        "vectors": _cmd_vectors,
        "explain": _cmd_explain,
    }[args.command]
    try:
        return handler(args)
    except VanetAuthError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
