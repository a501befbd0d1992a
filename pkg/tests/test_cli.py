import json
import subprocess
import sys

import numpy as np
import pytest

from kronsim.circuit import ansatz_su2
from kronsim.cli import main
from kronsim.qasm import parse_qasm
from oracles import circuit_unitary


def _rows(path):
    return path.read_text().splitlines()


def _exit_code(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


class TestBench:
    def test_jsonl_output(self, tmp_path, capsys):
        out = tmp_path / "b.jsonl"
        code = main(["bench", "--qubits", "3", "--repeats", "2", "--passes", "2", "--batch", "4", "--out", str(out)])
        assert code == 0
        records = [json.loads(line) for line in _rows(out)]
        assert [r["mode"] for r in records] == ["cached", "cached", "naive", "naive"]
        assert "cached: mean" in capsys.readouterr().err

    def test_split_flag_adds_mode(self, tmp_path):
        out = tmp_path / "b.jsonl"
        assert main(["bench", "--qubits", "4", "--repeats", "1", "--passes", "1", "--mode", "cached",
                     "--split", "3", "--out", str(out)]) == 0
        assert [json.loads(line)["mode"] for line in _rows(out)] == ["cached", "split-3"]

    def test_split_off(self, tmp_path):
        out = tmp_path / "b.jsonl"
        assert main(["bench", "--qubits", "2", "--repeats", "1", "--passes", "1", "--mode", "naive",
                     "--split", "off", "--remap", "on", "--out", str(out)]) == 0
        record = json.loads(_rows(out)[0])
        assert record["mode"] == "naive" and record["config"]["remap"] is True

    def test_budget_error_is_a_record(self, tmp_path, capsys):
        out = tmp_path / "b.jsonl"
        assert main(["bench", "--qubits", "4", "--repeats", "1", "--passes", "1", "--mode", "cached",
                     "--budget", "10", "--out", str(out)]) == 0
        assert json.loads(_rows(out)[0])["error"]
        assert "cached: error" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["bench", "--repeats", "0"],
        ["bench", "--mode", "turbo"],
        ["bench", "--split", "1"],
        ["bench", "--remap", "maybe"],
        ["bench", "--qubits", "x"],
        ["frobnicate"],
        [],
    ])
    def test_usage_errors(self, argv):
        assert _exit_code(argv) == 1


class TestSplit:
    def test_text(self, capsys):
        assert main(["split", "--qubits", "5", "--split", "3"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("2 groups")

    def test_json_from_qasm(self, tmp_path, capsys):
        src = tmp_path / "c.qasm"
        src.write_text('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\ncx q[0],q[1];\nh q[2];\n')
        assert main(["split", "--qasm", str(src), "--split", "2", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["plan"]["groups"] == [{"qubits": [0, 1], "gates": [0]}, {"qubits": [2], "gates": [1]}]

    def test_missing_width(self):
        assert _exit_code(["split", "--qubits", "3"]) == 1

    def test_bad_qasm(self, tmp_path, capsys):
        src = tmp_path / "bad.qasm"
        src.write_text("OPENQASM 2.0;\nqreg q[2];\nmeasure q -> c;\n")
        assert main(["split", "--qasm", str(src), "--split", "3"]) == 2
        assert "measure" in capsys.readouterr().err


class TestLandscape:
    @pytest.mark.parametrize("qubits, rows", [(3, 9), (5, 15)])
    def test_rows(self, tmp_path, qubits, rows):
        out = tmp_path / "l.csv"
        assert main(["landscape", "--qubits", str(qubits), "--grid", "4", "--remap", "on", "--out", str(out)]) == 0
        lines = _rows(out)
        assert len(lines) == rows + 1
        assert all(len(line.split(",")) == 5 for line in lines)
        values = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
        assert np.all(np.isfinite(values))

    def test_single_column(self, tmp_path):
        out = tmp_path / "l.csv"
        assert main(["landscape", "--grid", "1", "--out", str(out)]) == 0
        assert all(len(line.split(",")) == 2 for line in _rows(out))

    def test_byte_stable(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["landscape", "--grid", "3", "--seed", "7", "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_grid(self):
        assert main(["landscape", "--grid", "0"]) == 1


class TestQasm:
    def test_ansatz_export_round_trip(self, tmp_path):
        out = tmp_path / "c.qasm"
        assert main(["qasm", "--ansatz", "su2", "--qubits", "2", "--layers", "1", "--seed", "3", "--out", str(out)]) == 0
        back = parse_qasm(out.read_bytes())
        c = ansatz_su2(2, 1, seed=3)
        assert [(g.kind, g.qubits) for g in back.gates] == [(g.kind, g.qubits) for g in c.gates]
        assert np.max(np.abs(circuit_unitary(back) - circuit_unitary(c))) < 1e-10

    def test_qasm_to_json_and_back(self, tmp_path):
        qasm = tmp_path / "c.qasm"
        qasm.write_text('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\nh q[0];\nrx(0.25) q[1];\ncx q[0],q[1];\n')
        js = tmp_path / "c.json"
        assert main(["qasm", "--in", str(qasm), "--out", str(js)]) == 0
        data = json.loads(js.read_text())
        assert data["n_qubits"] == 2
        back = tmp_path / "back.qasm"
        assert main(["qasm", "--in", str(js), "--out", str(back)]) == 0
        assert back.read_text() == qasm.read_text()

    def test_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.qasm"
        bad.write_text("OPENQASM 2.0;\nqreg q[2];\nh q[0]\n")
        assert main(["qasm", "--in", str(bad)]) == 2
        assert "line 4" in capsys.readouterr().err

    def test_empty_file(self, tmp_path, capsys):
        empty = tmp_path / "empty.qasm"
        empty.write_text("")
        assert main(["qasm", "--in", str(empty)]) == 2
        assert "expected OPENQASM header" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["qasm", "--in", str(tmp_path / "nope.qasm")]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kronsim", "qasm", "--qubits", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("OPENQASM 2.0;")
