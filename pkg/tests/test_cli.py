"""End-to-end checks of the command line surface (in-process)."""

import json

import pytest

from bft.cli import main
from bft.core_tree import edge_csv, tree_from_edge_csv


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def payload_lines(out):
    return [l for l in out.splitlines() if not l.startswith("#")]


def test_pmf_table(capsys):
    rc, out, _ = run(capsys, "exact", "pmf", "--n", "3")
    assert rc == 0
    assert out.splitlines()[0].startswith("# config: ")
    assert payload_lines(out) == [
        "n,k,numerator,denominator,float_value",
        "3,0,1,4,0.25",
        "3,1,3,4,0.75",
    ]


def test_pmf_single_k(capsys):
    rc, out, _ = run(capsys, "exact", "pmf", "--n", "10", "--k", "2")
    assert rc == 0
    rows = payload_lines(out)
    assert len(rows) == 2 and rows[1].startswith("10,2,")


def test_pmf_cap_and_force(capsys):
    rc, _, err = run(capsys, "exact", "pmf", "--n", "401")
    assert rc == 2
    assert "cap" in err
    rc, out, _ = run(capsys, "exact", "pmf", "--n", "401", "--k", "0", "--force")
    assert rc == 0


def test_moments_closed_form_row(capsys):
    rc, out, _ = run(capsys, "exact", "moments", "--n", "1000")
    assert rc == 0
    row = payload_lines(out)[1]
    assert row.split(",")[3] == "333.1111111111111"
    assert row.split(",")[6] == "74.09876543209876"


def test_roots_certificate(capsys):
    rc, out, err = run(capsys, "exact", "roots", "--max-n", "6")
    assert rc == 0
    assert "pass" in err
    rows = payload_lines(out)
    # one row per root: levels 2..6 have floor(n/2) roots each
    assert len(rows) == 1 + sum(n // 2 for n in range(2, 7))
    assert rows[1] == "2,-1,-1"


def test_roots_cap(capsys):
    rc, _, err = run(capsys, "exact", "roots", "--max-n", "81")
    assert rc == 2


def test_quasi_table(capsys):
    rc, out, _ = run(capsys, "exact", "quasi", "--x", "1", "--dps", "20")
    assert rc == 0
    rows = dict(r.split(",") for r in payload_lines(out)[1:])
    assert float(rows["a"]) == pytest.approx(1.0)
    assert float(rows["f"]) == pytest.approx(0.5)
    assert float(rows["u1"]) == pytest.approx(1 / 3)


def test_markov_report_passes(capsys):
    rc, out, _ = run(capsys, "markov", "--p", "2/3")
    assert rc == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert doc["mu"] == "2/7"
    assert all(doc["checks"].values())


def test_markov_rejects_bad_p(capsys):
    rc, _, err = run(capsys, "markov", "--p", "1.5")
    assert rc == 2
    rc, _, err = run(capsys, "markov", "--p", "banana")
    assert rc == 2
    rc, _, err = run(capsys, "markov")
    assert rc == 2


def test_markov_sweep(capsys):
    rc, out, _ = run(capsys, "markov", "--sweep", "0.2:0.4:0.1")
    assert rc == 0
    rows = payload_lines(out)
    assert rows[0] == "p,mu,sigma2,ratio"
    assert len(rows) == 4


def test_sample_histogram_deterministic(capsys):
    args = ("sample", "--model", "simple", "--n", "40", "--trials", "2000",
            "--seed", "6")
    rc1, out1, _ = run(capsys, *args)
    rc2, out2, _ = run(capsys, *args)
    assert rc1 == rc2 == 0
    assert out1 == out2
    total = sum(int(r.split(",")[1]) for r in payload_lines(out1)[1:])
    assert total == 2000


def test_sample_env_seed_override(capsys, monkeypatch):
    rc, base, _ = run(
        capsys, "sample", "--model", "ebt", "--n", "10", "--trials", "50",
        "--seed", "123",
    )
    monkeypatch.setenv("BFT_SEED", "123")
    rc, overridden, _ = run(
        capsys, "sample", "--model", "ebt", "--n", "10", "--trials", "50",
        "--seed", "0",
    )
    assert payload_lines(base) == payload_lines(overridden)


def test_sample_block_per_trial_rows(capsys):
    rc, out, _ = run(
        capsys, "sample", "--model", "block", "--m", "8", "--trials", "5",
        "--seed", "1",
    )
    assert rc == 0
    rows = payload_lines(out)
    assert rows[0] == "trial,hs,max_input_hs,increment"
    assert len(rows) == 6


def test_sample_nonsimple_guard(capsys):
    rc, _, err = run(
        capsys, "sample", "--model", "nonsimple", "--n", "30", "--trials", "2",
    )
    assert rc == 2


def test_sample_rejects_p_for_ebt(capsys):
    rc, _, err = run(
        capsys, "sample", "--model", "ebt", "--n", "10", "--trials", "5",
        "--p", "0.3",
    )
    assert rc == 2


def test_fclt_csv(capsys):
    rc, out, _ = run(
        capsys, "fclt", "--n", "100", "--trials", "2", "--grid", "4",
        "--seed", "0",
    )
    assert rc == 0
    rows = payload_lines(out)
    assert rows[0] == "trial,t,W"
    assert len(rows) == 1 + 2 * 5
    assert rows[1] == "0,0.0,0.0"


def test_block_histogram_and_ratio(capsys):
    rc, out, err = run(capsys, "block", "--m", "16", "--trials", "200", "--seed", "2")
    assert rc == 0
    assert "ratio" in err
    assert payload_lines(out)[0] == "value,count"


def test_tree_from_perm_golden(capsys):
    rc, out, err = run(capsys, "tree", "--perm", "5,4,7,2,8,1,3,6")
    assert rc == 0
    assert "size = 8, hs = 2" in err
    rows = payload_lines(out)
    assert rows[0] == "node_id,parent_id,side,key,hs_label"
    assert rows[1] == "0,,,5,2"


def test_tree_csv_roundtrip_bytes(capsys):
    rc, out, _ = run(capsys, "tree", "--simple-code", "0110")
    payload = "\n".join(payload_lines(out)) + "\n"
    rebuilt = edge_csv(tree_from_edge_csv(out))
    assert rebuilt == payload


def test_tree_empty_code(capsys):
    rc, out, _ = run(capsys, "tree", "--simple-code", "")
    assert rc == 0
    rows = payload_lines(out)
    assert len(rows) == 2
    assert rows[1] == "0,,,1,0"


def test_tree_validates_input(capsys):
    rc, _, err = run(capsys, "tree", "--perm", "1,1,2")
    assert rc == 2
    rc, _, err = run(capsys, "tree", "--butterfly-code", "0110")
    assert rc == 2
    with pytest.raises(SystemExit):
        main(["tree", "--perm", "1", "--simple-code", "0"])


def test_out_writes_payload_and_sidecar(tmp_path, capsys):
    out = tmp_path / "pmf.csv"
    rc, stdout, _ = run(capsys, "exact", "pmf", "--n", "6", "--out", str(out))
    assert rc == 0
    assert stdout == ""
    text = out.read_text()
    assert text.startswith("n,k,")  # no comment header inside files
    meta = json.loads((tmp_path / "pmf.csv.meta.json").read_text())
    assert meta["config"]["n"] == 6
    assert meta["tool"] == "bft"
    assert "threads" not in json.dumps(meta)


def test_out_bytes_independent_of_threads(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["sample", "--model", "simple", "--n", "64", "--trials", "9000",
              "--seed", "3"]
    assert main(common + ["--threads", "1", "--out", str(a)]) == 0
    assert main(common + ["--threads", "4", "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.meta.json").read_bytes() == (
        tmp_path / "b.csv.meta.json"
    ).read_bytes()


def test_verify_suites(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "markov")
    assert rc == 0
    doc = json.loads(out)
    assert doc["pass"] is True

    rc, out, _ = run(
        capsys, "verify", "--suite", "oracle", "--quick", "--max-n", "6",
    )
    assert rc == 0

    rc, out, _ = run(capsys, "verify", "--suite", "markov", "--inject-failure")
    assert rc == 1
    doc = json.loads(out)
    assert doc["pass"] is False
    failing = [c for c in doc["checks"] if not c["pass"]]
    assert [c["name"] for c in failing] == ["injected_failure"]


def test_argparse_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--model", "unknown", "--n", "5", "--trials", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
