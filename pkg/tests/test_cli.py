import json

import numpy as np
import pytest

from deltatunnel import __version__
from deltatunnel.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    RunConfig,
    config_echo,
    config_from_text,
    execute,
    main,
    resolve_threads,
)


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def transmission_doc(out, steps=500, **sweep):
    return {
        "experiment": "transmission",
        "scene": {"n": 2, "length": 1.0, "strength": 1000.0},
        "sweep": {"k_min": 0.01, "k_max": 0.5, "steps": steps, **sweep},
        "output": {"path": str(out)},
    }


def read_table(path):
    lines = path.read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return meta, body[0].split(","), [ln.split(",") for ln in body[1:]]


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    monkeypatch.delenv("TOOL_THREADS", raising=False)


def test_transmission_sweep(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, transmission_doc(out)))]) == EXIT_OK
    meta, header, rows = read_table(out)
    assert header == ["k", "re_t", "im_t", "abs_t2", "arg_t", "status"]
    assert len(rows) == 500
    assert all(r[-1] == "ok" for r in rows)
    assert meta[0] == f"# tool: deltatunnel {__version__}"
    assert meta[1] == "# generated: 2023-11-14T22:13:20Z"
    # 17 significant digits in scientific notation.
    assert rows[0][0] == "1.0000000000000000e-02"
    phase = np.array([float(r[4]) for r in rows])
    assert np.all(np.abs(np.diff(phase)) < np.pi)


def test_delays_low_energy_rows(tmp_path):
    out = tmp_path / "d.csv"
    doc = {
        "experiment": "delays",
        "scene": {"n": 2, "length": 1.0, "strength": 1000.0},
        "sweep": {"k_min": 0.05, "k_max": 0.3, "steps": 26},
        "output": {"path": str(out)},
    }
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, doc))]) == EXIT_OK
    _, header, rows = read_table(out)
    col = {name: i for i, name in enumerate(header)}
    for r in rows:
        assert abs(float(r[col["traversal"]])) < 0.02 * float(r[col["free_time"]])


def test_resonant_row_is_recorded_not_fatal(tmp_path):
    out = tmp_path / "f.csv"
    doc = {
        "experiment": "fabry",
        "scene": {"n": 2, "length": 1.0, "strength": 1.0},
        "sweep": {"k_min": float(np.pi) - 0.5, "k_max": float(np.pi) + 0.5, "steps": 3},
        "output": {"path": str(out)},
    }
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, doc))]) == EXIT_OK
    _, _, rows = read_table(out)
    assert [r[-1] for r in rows] == ["ok", "ResonanceError", "ok"]
    assert "nan" in rows[1]


def test_empty_sweep_rejected(tmp_path):
    doc = transmission_doc(tmp_path / "x.csv", steps=0)
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, doc))]) == EXIT_VALIDATION


def test_unknown_field_rejected(tmp_path, capsys):
    doc = transmission_doc(tmp_path / "x.csv", typo=1)
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, doc))]) == EXIT_VALIDATION
    assert "sweep.typo" in capsys.readouterr().err


def test_missing_section_rejected(tmp_path):
    doc = {"experiment": "superosc", "sweep": {"k_min": 0, "k_max": 1, "steps": 3}, "output": {"path": "x"}}
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, doc))]) == EXIT_VALIDATION


def test_missing_config_file(tmp_path):
    assert main(["--quiet", "run", "--config", str(tmp_path / "absent.json")]) == EXIT_IO


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    doc = transmission_doc(blocker / "sub" / "t.csv", steps=3)
    assert main(["--quiet", "run", "--config", str(write_config(tmp_path, doc))]) == EXIT_IO


def test_unknown_claim_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "no-such-claim"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_config_echo_round_trip(tmp_path):
    cfg = config_from_text(json.dumps(transmission_doc(tmp_path / "t.csv", steps=7)))
    again = config_from_text(config_echo(cfg))
    assert again == cfg
    assert isinstance(again, RunConfig)


def test_json_output_and_thread_independence(tmp_path):
    doc = transmission_doc(tmp_path / "t.json", steps=40)
    doc["output"]["format"] = "json"
    cfg = config_from_text(json.dumps(doc))
    serial = execute(cfg, threads=1)
    parallel = execute(cfg, threads=4)
    assert serial == parallel
    parsed = json.loads(serial)
    assert parsed["columns"][0] == "k" and len(parsed["rows"]) == 40


def test_deterministic_runs(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"w{i}.csv"
        doc = {
            "experiment": "weak",
            "sweep": {"z_real": [0.5, -3.0, 7.0], "z_imag": [0.0, 2.0, -1.0]},
            "output": {"path": str(out)},
        }
        doc_path = write_config(tmp_path, doc, f"w{i}.json")
        assert main(["--quiet", "run", "--config", str(doc_path)]) == EXIT_OK
        outs.append(out.read_text().replace(str(out), ""))
    assert outs[0] == outs[1]


def test_tool_threads_overrides(monkeypatch):
    assert resolve_threads(3) == 3
    monkeypatch.setenv("TOOL_THREADS", "5")
    assert resolve_threads(3) == 5
    monkeypatch.setenv("TOOL_THREADS", "many")
    with pytest.raises(ValueError):
        resolve_threads(1)
    monkeypatch.setenv("TOOL_THREADS", "0")
    assert resolve_threads(3) >= 1


def test_bad_tool_threads_exit(monkeypatch):
    monkeypatch.setenv("TOOL_THREADS", "-2")
    assert main(["--quiet", "reproduce", "weak-any-z"]) == EXIT_VALIDATION


def test_reproduce_to_stdout(capsys):
    assert main(["--quiet", "reproduce", "weak-any-z"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "# claim: weak-any-z" in out
    assert "# verdict: PASS" in out
