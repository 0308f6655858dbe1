import csv
import json
import subprocess
import sys

import pytest

from pnlv.cli import main, parse_complex


def _rows(path):
    with open(path) as fh:
        lines = [l for l in fh if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_parse_complex():
    assert parse_complex("3+1i") == 3 + 1j
    assert parse_complex("-2.5e-1-4i") == -0.25 - 4j
    assert parse_complex("2j") == 2j


def test_integrate_rational_solution(tmp_path):
    out = tmp_path / "a.csv"
    rc = main(["integrate", "--eq", "iv", "--alpha", "0", "--beta", "-2",
               "--seed", "jet:z=1,w=-2,w1=-2", "--path", "segment:1,3+1i", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.startswith("# config:") and "# contentHash:" in text
    rows = _rows(out)
    assert len(rows) > 2
    for r in rows:
        z = complex(float(r["zRe"]), float(r["zIm"]))
        w = complex(float(r["wRe"]), float(r["wIm"]))
        assert abs(w + 2 * z) < 1e-8 * abs(z)


def test_reruns_are_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    args = ["polefield", "--eq", "iv", "--solution", "special:wh,gamma=1,u0=1,u1=0", "--r1", "3",
            "--out", str(a)]
    assert main(args) == 0
    first = a.read_bytes()
    assert main(args) == 0
    assert a.read_bytes() == first
    d = json.loads(a.read_text())
    assert d["result"]["poles"]
    # the strings command accepts the catalogue back
    assert main(["strings", "--in", str(a), "--out", str(tmp_path / "s.json")]) == 0


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("eq = iv\nalpha = 0\nbeta = 5\n\n[integrate]\nbeta = -2\n"
                   "seed = jet:z=1,w=-2,w1=-2\npath = segment:1,2\n")
    out = tmp_path / "a.csv"
    assert main(["integrate", "--config", str(cfg), "--out", str(out)]) == 0
    conf = json.loads(out.read_text().splitlines()[0][len("# config:"):])
    assert conf["beta"] == "-2" and conf["path"] == "segment:1,2"
    # flags override the file
    assert main(["integrate", "--config", str(cfg), "--path", "segment:1,1.5",
                 "--out", str(out)]) == 0
    conf = json.loads(out.read_text().splitlines()[0][len("# config:"):])
    assert conf["path"] == "segment:1,1.5"


def test_special_rational(capsys):
    assert main(["special", "--which", "rational", "--eq", "iv", "--alpha", "-2", "--beta", "-2",
                 "--at", "2"]) == 0
    d = json.loads(capsys.readouterr().out)
    v = d["result"]["solutions"][0]["values"][0]
    assert (v["re"], v["im"]) == (-0.5, 0.0)


@pytest.mark.parametrize("argv", [["bogus"], ["integrate", "--eq", "iv", "--path", "nonsense"],
                                  ["integrate", "--eq", "iv", "--seed", "pole:p=1"]])
def test_usage_errors_exit_one(argv):
    assert main(argv) == 1


def test_verify_exit_codes(capsys, tmp_path):
    assert main(["verify", "--suite", "backlund"]) == 0
    assert "[PASS]" in capsys.readouterr().err
    # the printed constant of W at a pole of I disagrees with the expansion
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "laurent", "--out", str(out)]) == 2
    assert "[FAIL]" in capsys.readouterr().err
    res = json.loads(out.read_text())["result"][0]
    assert list(res["metrics"]["failing"]) == ["PI:W:0"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pnlv", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "polefield" in r.stdout
