import json
import os

import numpy as np
import pytest

from bellkit import cli, io, qcore
from bellkit.fixtures import path

SINGLET = str(path("singlet_state.json"))
CHSH_ASM = str(path("chsh_assembly.json"))
CHSH = str(path("chsh_inequality.json"))
BUDGET = ["--seed", "4", "--restarts", "3", "--filters", "6"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), (json.loads(err) if err else None)


def test_eval_singlet(capsys):
    code, doc, _ = run(capsys, "eval", "--state", SINGLET, "--assembly", CHSH_ASM, "--inequality", CHSH)
    assert code == 0
    assert len(doc["correlators"]) == 4
    assert np.allclose(np.abs(doc["correlators"]), 1 / np.sqrt(2), atol=1e-12)
    assert doc["score"] == pytest.approx(np.sqrt(2))


def test_wwzb_list(capsys):
    code, doc, _ = run(capsys, "wwzb", "--parties", "2", "--list")
    assert code == 0
    assert len(doc["inequalities"]) == 16


def test_wwzb_check(capsys, tmp_path):
    f = tmp_path / "c.json"
    f.write_text(io.dumps({"format": "bellkit/1", "type": "correlators", "parties": 2,
                           "values": [0.5, 0.5, 0.5, -0.5]}))
    code, doc, _ = run(capsys, "wwzb", "--correlators", str(f))
    assert code == 0
    assert doc["max_score"] == pytest.approx(1.0)
    assert doc["local"]


def test_certify_then_verify(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "certify", "--state", SINGLET, "--inequality", CHSH, "-o", str(cert), *BUDGET)
    assert code == 0
    doc = json.loads(cert.read_text())
    assert doc["group_size"] == 1
    assert set(doc) >= {"parties", "copies", "score", "group_size", "inequality", "filter_kraus",
                        "assembly", "toolkit_version", "seed"}
    code, v, _ = run(capsys, "verify", "--certificate", str(cert))
    assert code == 0 and v["ok"]


def test_certify_requires_seed(capsys):
    code, _, err = run(capsys, "certify", "--state", SINGLET)
    assert code == 2
    assert err["type"] == "error"


def test_no_certificate_exit_code(capsys, tmp_path):
    f = tmp_path / "mixed.json"
    f.write_text(io.dumps(io.state_to_json(qcore.QuantumState.maximally_mixed((2, 2)))))
    code, doc, _ = run(capsys, "certify", "--state", str(f), *BUDGET)
    assert code == 3
    assert doc["type"] == "no-certificate"


def test_lvm_check_exit_codes(capsys, tmp_path):
    code, ev, _ = run(capsys, "eval", "--state", SINGLET, "--assembly", CHSH_ASM)
    f = tmp_path / "d.json"
    f.write_text(io.dumps(ev["distribution"]))
    code, doc, _ = run(capsys, "lvm-check", "--distribution", str(f))
    assert code == 3
    assert doc["min_slack"] == pytest.approx(0.0, abs=1e-7)
    assert doc["value"] < 0
    f.write_text(io.dumps({"format": "bellkit/1", "type": "distribution", "parties": 2, "probs": [0.25] * 16}))
    code, doc, _ = run(capsys, "lvm-check", "--distribution", str(f))
    assert code == 0 and doc["type"] == "lvm-model"


def test_embed(capsys, tmp_path):
    slo = tmp_path / "slo.json"
    slo.write_text(io.dumps(io.slo_to_json(qcore.SloMap.product_filter([np.eye(2) / np.sqrt(2), np.eye(2)]))))
    code, doc, _ = run(capsys, "embed", "--state", SINGLET, "--slo", str(slo), "--assembly", CHSH_ASM,
                       "--inequality", CHSH)
    assert code == 0
    assert doc["embedded_score"] == pytest.approx((np.sqrt(2) + 1) / 2, abs=1e-10)


def test_reduce_and_optimize(capsys):
    code, doc, _ = run(capsys, "reduce", "--state", SINGLET, "--assembly", CHSH_ASM, "--inequality", CHSH)
    assert code == 0
    assert doc["best_score"] == pytest.approx(np.sqrt(2))
    code, doc, _ = run(capsys, "optimize", "--state", SINGLET, "--inequality", CHSH, *BUDGET)
    assert code == 0
    assert doc["best_score"] == pytest.approx(np.sqrt(2), abs=1e-6)


def test_invalid_inputs(capsys, tmp_path):
    assert run(capsys, "eval", "--state", "/nonexistent", "--assembly", CHSH_ASM)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "bellkit/9", "type": "state"}')
    assert run(capsys, "eval", "--state", str(bad), "--assembly", CHSH_ASM)[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    ghz = tmp_path / "ghz.json"
    ghz.write_text(io.dumps(io.state_to_json(qcore.ghz_state(3))))
    assert run(capsys, "eval", "--state", str(ghz), "--assembly", CHSH_ASM)[0] == 2


def test_output_is_byte_identical(capsys, tmp_path):
    outs = []
    for k in range(2):
        f = tmp_path / f"o{k}.json"
        cli.main(["optimize", "--state", SINGLET, "-o", str(f), *BUDGET])
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_tolerance_override_is_scoped(capsys, monkeypatch):
    monkeypatch.delenv("BELLKIT_TOL", raising=False)
    code, _, _ = run(capsys, "eval", "--state", SINGLET, "--assembly", CHSH_ASM, "--tol", "1e-6")
    assert code == 0
    assert "BELLKIT_TOL" not in os.environ
