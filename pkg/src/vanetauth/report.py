"""Matrix reports: protocol modes x adversary strategies.

Each cell is one independent scenario run with a seed derived from the
base seed and the cell coordinates, so cells are order-independent and
the grid is reproducible from the base config alone.  Reports emit as a
fixed-column text table or as JSON lines (one cell per line, stable key
names), and can be compared against an expectations file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .config import ScenarioConfig
from .errors import ConfigInvalid, ValidationError, ParseError
from .sim import ScenarioResult, run_scenario

CELL_KEYS = ("mode", "strategy", "adversary_success", "abort_reasons",
             "frame_count", "closure_contains_session_key")


@dataclass(frozen=True)
class MatrixCell:
    mode: str
    strategy: str
    adversary_success: bool
    abort_reasons: tuple[tuple[str, str], ...]
    frame_count: int
    closure_contains_session_key: bool

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode,
            "strategy": self.strategy,
            "adversary_success": self.adversary_success,
            "abort_reasons": dict(self.abort_reasons),
            "frame_count": self.frame_count,
            "closure_contains_session_key": self.closure_contains_session_key,
        }


@dataclass
class MatrixReport:
    base_seed: int
    suite: str
    modes: tuple[str, ...]
    strategies: tuple[str, ...]
    cells: dict[tuple[str, str], MatrixCell]


def derive_seed(base_seed: int, mode: str, strategy: str) -> int:
    material = base_seed.to_bytes(8, "big") + b"|" + mode.encode() + b"|" + strategy.encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


def cell_from_result(result: ScenarioResult) -> MatrixCell:
    return MatrixCell(
        mode=result.mode,
        strategy=result.strategy,
        adversary_success=result.adversary_success,
        abort_reasons=tuple(sorted(result.abort_reasons.items())),
        frame_count=result.frames_before_data,
        closure_contains_session_key=result.closure_contains_session_key,
    )


def run_matrix(modes: list[str], strategies: list[str],
               base_config: ScenarioConfig,
               keep_results: bool = False):
    """Run every (mode, strategy) cell; optionally return the raw results
    too (keyed like the cells) for transcript export."""
    if not modes or not strategies:
        raise ConfigInvalid("matrix needs at least one mode and one strategy")
    cells: dict[tuple[str, str], MatrixCell] = {}
    results: dict[tuple[str, str], ScenarioResult] = {}
    for mode in modes:
        for strategy in strategies:
            cfg = base_config.with_overrides(
                mode=mode, strategy=strategy,
                seed=derive_seed(base_config.seed, mode, strategy))
            result = run_scenario(cfg)
            cells[(mode, strategy)] = cell_from_result(result)
            if keep_results:
                results[(mode, strategy)] = result
    report = MatrixReport(base_seed=base_config.seed, suite=base_config.suite,
                          modes=tuple(modes), strategies=tuple(strategies),
                          cells=cells)
    return (report, results) if keep_results else report


# --- emission ------------------------------------------------------------------

TEXT_FORMAT = "text"
JSONL_FORMAT = "jsonl"


def _text_table(report: MatrixReport) -> str:
    header = ("mode", "strategy", "success", "key_in_closure", "frames", "aborts")
    rows = [header]
    for mode in report.modes:
        for strategy in report.strategies:
            cell = report.cells[(mode, strategy)]
            aborts = ",".join(f"{p}:{r}" for p, r in cell.abort_reasons) or "-"
            rows.append((
                mode, strategy,
                "yes" if cell.adversary_success else "no",
                "yes" if cell.closure_contains_session_key else "no",
                str(cell.frame_count), aborts,
            ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = [
        f"# matrix report  base_seed={report.base_seed}  suite={report.suite}",
    ]
    for index, row in enumerate(rows):
        lines.append("  ".join(col.ljust(widths[i]) for i, col in enumerate(row)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(header))))
    return "\n".join(lines) + "\n"


def _json_lines(report: MatrixReport) -> str:
    lines = [json.dumps({
        "base_seed": report.base_seed,
        "suite": report.suite,
        "modes": list(report.modes),
        "strategies": list(report.strategies),
    }, sort_keys=True)]
    for mode in report.modes:
        for strategy in report.strategies:
            lines.append(json.dumps(report.cells[(mode, strategy)].to_json_obj(),
                                    sort_keys=True))
    return "\n".join(lines) + "\n"


def emit_report(report: MatrixReport, format: str = TEXT_FORMAT) -> str:
    if format == TEXT_FORMAT:
        return _text_table(report)
    if format == JSONL_FORMAT:
        return _json_lines(report)
    raise ConfigInvalid(f"unknown report format {format!r}")


def parse_report_jsonl(text: str) -> MatrixReport:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty report", 1)
    head = json.loads(lines[0])
    cells = {}
    for line in lines[1:]:
        obj = json.loads(line)
        cells[(obj["mode"], obj["strategy"])] = MatrixCell(
            mode=obj["mode"],
            strategy=obj["strategy"],
            adversary_success=obj["adversary_success"],
            abort_reasons=tuple(sorted(obj["abort_reasons"].items())),
            frame_count=obj["frame_count"],
            closure_contains_session_key=obj["closure_contains_session_key"],
        )
    return MatrixReport(base_seed=head["base_seed"], suite=head["suite"],
                        modes=tuple(head["modes"]),
                        strategies=tuple(head["strategies"]), cells=cells)


# --- expectations -----------------------------------------------------------------

def parse_expectations(text: str) -> dict[tuple[str, str], bool]:
    """Expectations use the flat config format: an ``[expect]`` section of
    ``mode.strategy = true|false`` entries for adversary_success."""
    from .config import parse_flat

    sections = parse_flat(text)
    body = sections.get("expect")
    if body is None:
        raise ValidationError("expect", "expectations file needs an [expect] section")
    expectations = {}
    for key, (value, lineno) in body.items():
        mode, dot, strategy = key.partition(".")
        if not dot:
            raise ValidationError(f"expect.{key}", "expected '<mode>.<strategy>' keys")
        if value not in ("true", "false"):
            raise ValidationError(f"expect.{key}", f"expected true/false, got {value!r}")
        expectations[(mode, strategy)] = value == "true"
    return expectations


def load_expectations(path: str) -> dict[tuple[str, str], bool]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_expectations(fh.read())


def compare_expectations(report: MatrixReport,
                         expectations: dict[tuple[str, str], bool]) -> list[str]:
    """Human-readable diffs; empty means every expected cell matched."""
    diffs = []
    for (mode, strategy), expected in sorted(expectations.items()):
        cell = report.cells.get((mode, strategy))
        if cell is None:
            diffs.append(f"{mode}.{strategy}: expected {expected}, cell not in report")
        elif cell.adversary_success != expected:
            diffs.append(
                f"{mode}.{strategy}: expected adversary_success={expected}, "
                f"got {cell.adversary_success}"
            )
    return diffs
