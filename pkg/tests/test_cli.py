import json
import os
from pathlib import Path

import jsonschema
import numpy as np

from stabmagic.cli import main, run

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
SCHEMA = json.loads(
    (Path(__file__).parents[1] / "src" / "stabmagic" / "schemas" / "run_report.schema.json").read_text()
)
VOLATILE = {"timings", "inputs_digest", "artifact", "artifact_sha256"}


def strip(obj):
    if isinstance(obj, dict):
        return {k: strip(v) for k, v in obj.items() if k not in VOLATILE}
    if isinstance(obj, list):
        return [strip(v) for v in obj]
    return obj


def close(a, b, tol=1e-9):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(close(a[k], b[k], tol) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(close(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= tol * max(1.0, abs(a))
    return a == b


def check_golden(name, report):
    path = GOLDEN / f"{name}.json"
    got = strip(report)
    if os.environ.get("UPDATE_GOLDEN") or not path.exists():
        path.write_text(json.dumps(got, indent=1, sort_keys=True) + "\n")
    assert close(got, json.loads(path.read_text()))


def call(argv):
    code, report, _ = run([str(a) for a in argv])
    jsonschema.validate(report, SCHEMA)
    assert report["exit_code"] == code
    return code, report


def test_sre_golden():
    code, rep = call(["monotone", "--measure", "sre", "--alpha", 2, "--state", DATA / "t.json"])
    assert code == 0
    assert abs(rep["results"]["value"] - np.log2(4 / 3)) < 1e-9
    check_golden("monotone_sre_t", rep)


def test_membership_golden():
    code, rep = call(["membership", "--state", DATA / "mixed.json", "--eps", 0.05])
    assert code == 0 and rep["decision"] == "YES"
    check_golden("membership_mixed", rep)


def test_reduce_verify_golden(tmp_path):
    art = tmp_path / "art.json"
    code, rep = call(["reduce", "--cnf", DATA / "uf3.cnf", "--vertices", 3, "--out", art])
    assert code == 0 and art.exists()
    check_golden("reduce_uf3", rep)
    code, rep = call(["verify-reduction", "--artifact", art, "--stage", "H_2COPY", "--mode", "exhaustive"])
    assert code == 0 and rep["decision"] == "PASS"
    assert abs(rep["results"]["min_value"]) < 1e-9
    check_golden("verify_uf3_h2copy", rep)


def test_reduce_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call(["reduce", "--cnf", DATA / "uf3.cnf", "--out", a])
    call(["reduce", "--cnf", DATA / "uf3.cnf", "--out", b])
    assert a.read_bytes() == b.read_bytes()


def test_witness_then_wwd(tmp_path):
    out = tmp_path / "w.json"
    assert main(["witness", "--state", str(DATA / "t.json"), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    jsonschema.validate(rep, SCHEMA)
    assert abs(rep["results"]["margin"] - (1 / np.sqrt(2) - 0.5) ** 2) < 1e-8
    # the raw witness has norm < 1, so gamma itself is exceeded only by |T>
    g = rep["results"]["gamma"]
    code, res = call(["wwd", "--witness", out, "--gamma", g + 0.01, "--delta", 0.005])
    assert code == 2 and res["decision"] == "NO"
    code, res = call(["wwd", "--witness", out, "--gamma", g + 0.001, "--delta", 0.005])
    assert code == 3


def test_exit_codes_no_and_errors(tmp_path):
    code, rep = call(["membership", "--state", DATA / "t.json", "--eps", 0.1])
    assert code == 2 and rep["decision"] == "NO"
    code, rep = call(["membership", "--state", tmp_path / "missing.json", "--eps", 0.1])
    assert code == 1 and rep["error"]["code"] == "FILE_NOT_FOUND"
    code, rep = call(["membership", "--bogus"])
    assert code == 1 and rep["error"]["code"] == "BAD_ARGUMENT"
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 3 1\n1 2 0\n")
    code, rep = call(["reduce", "--cnf", bad])
    assert code == 1 and rep["error"]["code"] == "WRONG_WIDTH"
    code, rep = call(["monotone", "--measure", "sre", "--state", DATA / "mixed.json"])
    assert code == 1 and rep["error"]["code"] == "MIXED_STATE"


def test_enumerate_and_seed_reproducible():
    code, rep = call(["enumerate", "--n", 3, "--list", 2])
    assert code == 0 and rep["results"]["count"] == 1080 and rep["results"]["matches_formula"]
    a = call(["wwd", "--witness", DATA / "mixed.json", "--gamma", 0.4, "--delta", 0.05, "--scan", "sample:20", "--seed", 5])[1]
    b = call(["wwd", "--witness", DATA / "mixed.json", "--gamma", 0.4, "--delta", 0.05, "--scan", "sample:20", "--seed", 5])[1]
    assert strip(a) == strip(b)


def test_channel_and_doped(tmp_path):
    ch = tmp_path / "t_gate.json"
    t = np.diag([1, np.exp(1j * np.pi / 4)])
    ch.write_text(json.dumps({"n": 1, "kraus": [{"real": t.real.tolist(), "imag": t.imag.tolist()}]}))
    code, rep = call(["channel", "classify", "--channel", ch, "--eps", 0.05])
    assert code == 2 and "witness" in rep["results"]
    code, rep = call(["doped", "--state", DATA / "mixed.json", "--t", 1, "--net-eps", 0.5, "--eps", 0.05])
    assert code == 0


def test_report_file(tmp_path, capsys):
    dest = tmp_path / "r.json"
    assert main(["enumerate", "--n", "1", "--report", str(dest)]) == 0
    assert json.loads(dest.read_text())["results"]["count"] == 6
    assert capsys.readouterr().out == ""
