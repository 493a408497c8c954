import json
from pathlib import Path

import pytest

from splitq.cli import main

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "data"
    assert main(["generate", "--events", "3000", "--seed", "42", "--out", str(out)]) == 0
    return out


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_generate_is_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["generate", "--events", "2000", "--seed", "7", "--out", str(tmp_path / name)]) == 0
    capsys.readouterr()
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert [e["sha256"] for e in ma["arrays"]] == [e["sha256"] for e in mb["arrays"]]


def test_generate_empty_dataset_valid(tmp_path, capsys):
    out = tmp_path / "empty"
    assert main(["generate", "--events", "0", "--out", str(out)]) == 0
    capsys.readouterr()
    code, stdout, _ = run_cli(capsys, ["inspect", "--data", str(out)])
    assert code == 0
    assert json.loads(stdout)["violations"] == []


def test_inspect(data_dir, capsys):
    code, stdout, _ = run_cli(capsys, ["inspect", "--data", str(data_dir)])
    assert code == 0
    info = json.loads(stdout)
    assert info["num_entries"] == 3000
    assert info["violations"] == []


def test_query_engines_agree_byte_for_byte(data_dir, capsys):
    outputs = {}
    for engine in ("baseline", "flat", "flat-flattened"):
        code, stdout, _ = run_cli(
            capsys,
            ["query", "--data", str(data_dir), "--corpus", "max_pt", "--engine", engine],
        )
        assert code == 0
        outputs[engine] = stdout
    assert outputs["baseline"] == outputs["flat"] == outputs["flat-flattened"]
    payload = json.loads(outputs["flat"])
    assert payload["histograms"]["max_pt"]["num_fills"] == 3000


def test_query_from_file_with_hist_flag(data_dir, tmp_path, capsys):
    qfile = tmp_path / "n.q"
    qfile.write_text("for e in dataset:\n  fill_histogram(len(e.muons))\n")
    code, stdout, _ = run_cli(
        capsys,
        ["query", "--data", str(data_dir), "--query", str(qfile), "--hist", "nmu:20:0:20"],
    )
    assert code == 0
    assert json.loads(stdout)["histograms"]["nmu"]["num_fills"] == 3000


def test_query_bad_source_exits_3(data_dir, tmp_path, capsys):
    qfile = tmp_path / "bad.q"
    qfile.write_text("for e in dataset:\n\tfill_histogram(1.0)\n")
    code, _, stderr = run_cli(capsys, ["query", "--data", str(data_dir), "--query", str(qfile)])
    assert code == 3
    assert "line 2" in stderr


def test_query_type_error_exits_3(data_dir, tmp_path, capsys):
    qfile = tmp_path / "bad2.q"
    qfile.write_text("for e in dataset:\n  fill_histogram(e.met)\n")
    code, _, stderr = run_cli(capsys, ["query", "--data", str(data_dir), "--query", str(qfile)])
    assert code == 3
    assert "met" in stderr


def test_missing_data_exits_4(tmp_path, capsys):
    code, _, stderr = run_cli(
        capsys, ["query", "--data", str(tmp_path / "nope"), "--corpus", "max_pt"]
    )
    assert code == 4


def test_corrupted_data_exits_4(tmp_path, capsys):
    out = tmp_path / "d"
    assert main(["generate", "--events", "100", "--out", str(out)]) == 0
    capsys.readouterr()
    victim = out / "item.muons.item.pt.f64"
    data = bytearray(victim.read_bytes())
    data[0] ^= 0xFF
    victim.write_bytes(bytes(data))
    code, _, stderr = run_cli(capsys, ["query", "--data", str(out), "--corpus", "max_pt"])
    assert code == 4
    assert "checksum" in stderr.lower()


def test_usage_error_exits_2(capsys):
    assert main(["query", "--data"]) == 2
    capsys.readouterr()


def test_emit_ir_matches_golden(data_dir, capsys):
    code, stdout, _ = run_cli(
        capsys,
        ["query", "--data", str(data_dir), "--corpus", "all_pt", "--engine",
         "flat-flattened", "--emit-ir"],
    )
    assert code == 0
    assert stdout == (GOLDEN / "all_pt_flat.ir").read_text()


def test_bench_corpus(data_dir, tmp_path, capsys):
    json_out = tmp_path / "bench.json"
    csv_out = tmp_path / "bench.csv"
    code, stdout, _ = run_cli(
        capsys,
        [
            "bench", "--data", str(data_dir), "--reps", "1",
            "--json-out", str(json_out), "--csv-out", str(csv_out),
        ],
    )
    assert code == 0
    report = json.loads(json_out.read_text())
    assert len(report["reports"]) == 4
    for rep in report["reports"]:
        assert rep["fills_consistent"] is True
        engines = {(r["engine"], r["kernel"]) for r in rep["engines"]}
        assert ("baseline", None) in engines
        assert any(e == "flat" for e, _ in engines)
    assert csv_out.read_text().startswith("query,engine,kernel,events_per_sec,num_fills")


def test_simulate_deterministic(tmp_path, capsys):
    argv = [
        "simulate", "--workers", "4", "--queries", "8", "--events", "2000",
        "--partitions", "10", "--seed", "7", "--interval", "0.02",
    ]
    code1, out1, _ = run_cli(capsys, argv)
    code2, out2, _ = run_cli(capsys, argv)
    assert code1 == code2 == 0
    assert out1 == out2
    summary = json.loads(out1)
    assert summary["completed"] == 8


def test_simulate_writes_metrics_files(tmp_path, capsys):
    out = tmp_path / "sim"
    code, stdout, _ = run_cli(
        capsys,
        [
            "simulate", "--workers", "2", "--queries", "4", "--events", "1000",
            "--partitions", "5", "--seed", "3", "--out", str(out),
        ],
    )
    assert code == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["policy"] == "two-round-pull"
    assert (out / "events.csv").read_text().splitlines()[0] == "t,kind,worker,query,dataset,partition,detail"


def test_simulate_policy_comparison(capsys):
    rates = {}
    for policy in ("two-round-pull", "round-robin-push"):
        code, stdout, _ = run_cli(
            capsys,
            [
                "simulate", "--policy", policy, "--workers", "4", "--queries", "30",
                "--events", "2000", "--partitions", "10", "--seed", "1",
                "--cache-mb", "0.15",
            ],
        )
        assert code == 0
        rates[policy] = json.loads(stdout)["cache_hit_rate"]
    assert rates["two-round-pull"] > rates["round-robin-push"]


def test_simulate_delay_payload(capsys):
    code, stdout, _ = run_cli(
        capsys,
        ["simulate", "--payload", "delay", "--queries", "5", "--events", "500",
         "--partitions", "4", "--seed", "2"],
    )
    assert code == 0
    assert json.loads(stdout)["completed"] == 5


def test_simulate_workload_file(tmp_path, capsys):
    workload = {
        "datasets": [{"id": "dy", "events": 1500, "seed": 4, "partitions": 6}],
        "queries": [
            {"time": 0.0, "corpus": "max_pt", "dataset": "dy"},
            {"time": 0.1, "corpus": "all_pt", "dataset": "dy"},
        ],
    }
    wfile = tmp_path / "workload.json"
    wfile.write_text(json.dumps(workload))
    code, stdout, _ = run_cli(capsys, ["simulate", "--workload", str(wfile), "--seed", "5"])
    assert code == 0
    assert json.loads(stdout)["completed"] == 2


def test_repl_cross_checks_query_command(data_dir, capsys, monkeypatch):
    lines = iter(
        [
            "for event in dataset:",
            "  maximum = 0.0",
            "  for muon in event.muons:",
            "    if muon.pt > maximum:",
            "      maximum = muon.pt",
            "  fill_histogram(maximum)",
            "",
            ":engine baseline",
            "for event in dataset:",
            "  maximum = 0.0",
            "  for muon in event.muons:",
            "    if muon.pt > maximum:",
            "      maximum = muon.pt",
            "  fill_histogram(maximum)",
            "",
            ":quit",
        ]
    )
    monkeypatch.setattr("builtins.input", lambda prompt="": next(lines))
    code = main(["repl", "--data", str(data_dir), "--hist", "max_pt:100:0:200"])
    out = capsys.readouterr().out
    assert code == 0
    summaries = [line for line in out.splitlines() if line.startswith("max_pt:")]
    assert len(summaries) == 2
    assert summaries[0] == summaries[1]  # flat and baseline agree
    assert "fills=3000" in summaries[0]


def test_repl_handles_errors_and_empty_input(data_dir, capsys, monkeypatch):
    lines = iter(["", "x = (", "", ":bogus", ":quit"])
    monkeypatch.setattr("builtins.input", lambda prompt="": next(lines))
    code = main(["repl", "--data", str(data_dir)])
    out = capsys.readouterr().out
    assert code == 0
    assert "error:" in out
    assert "unknown directive" in out
