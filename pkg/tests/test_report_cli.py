import json
import os

import pytest

from vanetauth.cli import main
from vanetauth.config import ScenarioConfig
from vanetauth.errors import ConfigInvalid
from vanetauth.report import (
    compare_expectations,
    derive_seed,
    emit_report,
    parse_expectations,
    parse_report_jsonl,
    run_matrix,
)

MODES = ["base", "iso_ke", "sigma"]


@pytest.fixture(scope="module")
def small_report():
    return run_matrix(MODES, ["passive", "repetition_v2"], ScenarioConfig(seed=321))


def test_matrix_has_one_cell_per_pair(small_report):
    assert set(small_report.cells) == {(m, s) for m in MODES
                                       for s in ("passive", "repetition_v2")}


def test_round_counts_reproduce_the_comparison_table(small_report):
    # two frames for the proposed base protocol, three for the adapted
    # three-round handshakes
    assert small_report.cells[("base", "passive")].frame_count == 2
    assert small_report.cells[("iso_ke", "passive")].frame_count == 3
    assert small_report.cells[("sigma", "passive")].frame_count == 3


def test_cell_seeds_derive_from_coordinates():
    s1 = derive_seed(1, "base", "passive")
    s2 = derive_seed(1, "base", "mitm_relay")
    s3 = derive_seed(2, "base", "passive")
    assert len({s1, s2, s3}) == 3


def test_empty_matrix_rejected():
    with pytest.raises(ConfigInvalid):
        run_matrix([], ["passive"], ScenarioConfig(seed=1))
    with pytest.raises(ConfigInvalid):
        run_matrix(["base"], [], ScenarioConfig(seed=1))


def test_text_table_has_headers_and_is_deterministic(small_report):
    text = emit_report(small_report, "text")
    head = text.splitlines()[1]
    assert "mode" in head and "strategy" in head
    assert emit_report(small_report, "text") == text


def test_jsonl_reparses_to_the_same_report(small_report):
    text = emit_report(small_report, "jsonl")
    parsed = parse_report_jsonl(text)
    assert parsed.cells == small_report.cells
    assert parsed.modes == small_report.modes
    assert emit_report(parsed, "jsonl") == text
    for line in text.splitlines():
        json.loads(line)


def test_expectations_compare(small_report):
    expectations = parse_expectations(
        "[expect]\nbase.repetition_v2 = true\nsigma.repetition_v2 = false\n")
    assert compare_expectations(small_report, expectations) == []
    bad = parse_expectations("[expect]\nsigma.repetition_v2 = true\n")
    diffs = compare_expectations(small_report, bad)
    assert len(diffs) == 1 and "sigma.repetition_v2" in diffs[0]


# --- CLI ------------------------------------------------------------------------------

CONFIG_TEXT = "[scenario]\nseed = 55\nmode = base\nstrategy = repetition_v1\n"


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(CONFIG_TEXT)
    return str(path)


def test_cli_run_text(capsys, config_file):
    assert main(["run", "--config", config_file]) == 0
    out = capsys.readouterr().out
    assert "base-repetition_v1-55" in out
    assert "adversary_success: yes" in out


def test_cli_run_jsonl_and_overrides(capsys, config_file):
    assert main(["run", "--config", config_file, "--mode", "nonce_ack",
                 "--format", "jsonl"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["mode"] == "nonce_ack"
    assert obj["adversary_success"] is False


def test_cli_run_seed_only(capsys):
    assert main(["run", "--seed", "9"]) == 0
    assert "base-passive-9" in capsys.readouterr().out


def test_cli_run_writes_transcript(tmp_path, capsys, config_file):
    tdir = str(tmp_path / "transcripts")
    assert main(["run", "--config", config_file, "--transcript-dir", tdir,
                 "--verbose"]) == 0
    files = os.listdir(tdir)
    assert files == ["base-repetition_v1-55.transcript"]
    body = (tmp_path / "transcripts" / files[0]).read_text()
    assert body.startswith("# scenario: base-repetition_v1-55")
    assert "payload=" in body


def test_cli_run_output_is_reproducible(capsys, config_file):
    main(["run", "--config", config_file])
    first = capsys.readouterr().out
    main(["run", "--config", config_file])
    assert capsys.readouterr().out == first


def test_cli_matrix_with_expectations(tmp_path, capsys, config_file):
    expect = tmp_path / "expect.cfg"
    expect.write_text("[expect]\nbase.repetition_v1 = true\n"
                      "nonce_ack.repetition_v1 = false\n")
    code = main(["matrix", "--config", config_file,
                 "--modes", "base,nonce_ack", "--strategies", "repetition_v1",
                 "--expect", str(expect)])
    assert code == 0

    expect.write_text("[expect]\nnonce_ack.repetition_v1 = true\n")
    code = main(["matrix", "--config", config_file,
                 "--modes", "base,nonce_ack", "--strategies", "repetition_v1",
                 "--expect", str(expect)])
    assert code == 1
    assert "nonce_ack.repetition_v1" in capsys.readouterr().err


def test_cli_matrix_renders_figures(tmp_path, capsys, config_file):
    fdir = str(tmp_path / "figs")
    assert main(["matrix", "--config", config_file, "--modes", "base,sigma",
                 "--strategies", "passive,mitm_relay", "--figure-dir", fdir]) == 0
    names = sorted(os.listdir(fdir))
    assert names == ["matrix_outcomes.png", "matrix_rounds.png"]
    for name in names:
        blob = (tmp_path / "figs" / name).read_bytes()
        assert blob[:8] == b"\x89PNG\r\n\x1a\n" and len(blob) > 1000


def test_cli_run_renders_timeline_figure(tmp_path, config_file):
    fdir = str(tmp_path / "figs")
    assert main(["run", "--config", config_file, "--figure-dir", fdir]) == 0
    assert os.listdir(fdir) == ["base-repetition_v1-55.png"]


def test_cli_vectors_matches_golden(capsys):
    assert main(["vectors"]) == 0
    out = capsys.readouterr().out
    golden_path = os.path.join(os.path.dirname(__file__), "golden",
                               "wire_vectors.txt")
    with open(golden_path, "r", encoding="utf-8") as fh:
        assert out == fh.read()


def test_cli_explain(tmp_path, capsys, config_file):
    tdir = str(tmp_path / "transcripts")
    main(["run", "--config", config_file, "--transcript-dir", tdir, "--verbose"])
    capsys.readouterr()
    transcript = os.path.join(tdir, "base-repetition_v1-55.transcript")
    assert main(["explain", "--transcript", transcript]) == 0
    out = capsys.readouterr().out
    assert "M1" in out and "license" in out


def test_cli_errors_exit_nonzero(capsys, tmp_path):
    assert main(["run"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario]\nseed = 1\nmode = dh2\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert "dh2" in capsys.readouterr().err


def test_full_default_matrix_matches_checked_in_expectations(capsys):
    # the attack-outcome narrative, asserted from the shipped files
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    assert main([
        "matrix",
        "--config", os.path.join(root, "scenarios", "default.cfg"),
        "--expect", os.path.join(root, "scenarios", "expected-outcomes.cfg"),
    ]) == 0
