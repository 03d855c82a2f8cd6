import json

import pytest

from conftest import DATA
from ksubgraph.cli import load_graph, main, read_manifest


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(text):
    return [json.loads(line) for line in text.splitlines()]


def test_sample_json(capsys):
    code, out, _ = run(capsys, "sample", "--k", "3", "--method", "rss+", "--n", "5",
                       "--seed", "3", "--step-ratio", "0.01")
    assert code == 0
    lines = jsonl(out)
    m = lines[0]["manifest"]
    assert m["seed"] == 3 and m["command"] == "sample" and m["method"] == "rss+"
    assert "version" in m
    assert len(lines) == 6
    for r in lines[1:]:
        assert set(r) == {"nodes", "steps", "rejections", "wall_ns"} and len(r["nodes"]) == 3


def test_sample_csv_and_byte_identical(capsys, tmp_path):
    args = ["sample", "--k", "4", "--method", "rss", "--n", "20", "--seed", "8",
            "--step-ratio", "0.01", "--format", "csv", "--no-timing"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("# manifest {") and lines[1] == "nodes,steps,rejections,wall_ns"
    assert all(line.endswith(",0") for line in lines[2:])
    _, c, _ = run(capsys, *args, "--cache-states")
    assert c.splitlines()[2:] == lines[2:]


def test_seed_drawn_and_recorded(capsys):
    _, out, _ = run(capsys, "sample", "--n", "2", "--step-ratio", "0.01", "--no-timing")
    first = jsonl(out)
    seed = first[0]["manifest"]["seed"]
    assert isinstance(seed, int)
    _, again, _ = run(capsys, "sample", "--n", "2", "--step-ratio", "0.01", "--no-timing",
                      "--seed", str(seed))
    assert jsonl(again)[1:] == first[1:]


def test_replay_reproduces_file(capsys, tmp_path):
    out = tmp_path / "u.json"
    assert run(capsys, "uniformity", "--graph", "path:5", "--k", "3", "--runs", "2",
               "--samples-per-state", "50", "--seed", "1", "--out", str(out))[0] == 0
    original = out.read_text()
    copy = tmp_path / "copy.json"
    assert run(capsys, "replay", str(out), "--out", str(copy))[0] == 0
    assert copy.read_text() == original
    assert read_manifest(str(copy))["runs"] == 2


def test_replay_sample_csv(capsys, tmp_path):
    out = tmp_path / "s.csv"
    run(capsys, "sample", "--graph", "ba:60:2:4", "--k", "4", "--n", "30", "--seed", "5",
        "--step-ratio", "0.001", "--format", "csv", "--no-timing", "--out", str(out))
    copy = tmp_path / "again.csv"
    assert run(capsys, "replay", str(out), "--out", str(copy))[0] == 0
    assert copy.read_text() == out.read_text()


def test_replay_rejects_plain_file(capsys, tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("hello\n")
    code, _, err = run(capsys, "replay", str(f))
    assert code == 1 and "manifest" in err


def test_enumerate(capsys, tmp_path):
    code, out, err = run(capsys, "enumerate", "--k", "3")
    assert code == 0 and "states 438" in err
    doc = jsonl(out)[1]
    assert doc["num_states"] == 438 and len(doc["states"]) == 438
    code, out, _ = run(capsys, "enumerate", "--k", "4", "--out", str(tmp_path / "e.json"))
    assert "states 2363" in out
    code, out, err = run(capsys, "enumerate", "--graph", "path:4", "--k", "3")
    assert jsonl(out)[1]["edges"] == [[0, 1]] and "diameter 1" in err


def test_uniformity_sweep_csv(capsys):
    code, out, err = run(capsys, "uniformity", "--graph", "star:4", "--k", "3", "--method",
                         "rss", "--ratios", "0,1", "--runs", "2", "--samples-per-state", "100",
                         "--seed", "2", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "ratio,loss_mean,loss_std,runs" and len(lines) == 4


def test_uniformity_per_state(capsys):
    code, out, err = run(capsys, "uniformity", "--graph", "complete:4", "--k", "3", "--runs",
                         "1", "--samples-per-state", "10", "--per-state", "--seed", "1")
    rec = jsonl(out)
    assert sum(c for _, c in rec[1]["counts"]) == 40
    assert "summary" in rec[-1] and "loss" in err


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--graph", "ba:100:2", "--k", "4", "--method",
                       "mcmc,rss+", "--reps", "2", "--seed", "1", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[1].startswith("sampler,k,n,delta,per_sample_ns,estimated")
    assert [l.split(",")[0] for l in lines[2:]] == ["mcmc", "rss+"]
    assert lines[2].split(",")[5] == "True"


def test_motifs_signed_and_steps(capsys):
    path = DATA / "signed_fixture.csv"
    code, out, _ = run(capsys, "motifs", "--graph", f"signed:{path}", "--k", "3", "--n", "300",
                       "--seed", "4", "--step-ratio", "0.1")
    assert code == 0
    rec = jsonl(out)[1]
    assert rec["total"] == 300 and rec["counts"]["balanced_triangle"] <= rec["counts"]["triangle"]
    code, out, _ = run(capsys, "motifs", "--k", "4", "--n", "100", "--steps", "0,5",
                       "--seed", "4", "--format", "csv")
    rows = out.splitlines()[2:]
    assert {r.split(",")[0] for r in rows} == {"0", "5"}
    assert any(r.split(",")[1] == "type:path" for r in rows)


def test_motifs_k3_needs_signed(capsys):
    code, _, err = run(capsys, "motifs", "--k", "3", "--n", "10")
    assert code == 1 and "signed" in err


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--k", "3", "--delta", "2", "--diam", "3", "--n", "4")
    assert code == 0
    res = jsonl(out)[1]
    assert res["mcmc"]["value"] == pytest.approx(3434.2, abs=0.05)
    assert set(res) == {"mcmc", "rss", "rss+", "psrw"}
    code, out, _ = run(capsys, "bounds", "--k", "4", "--graph", "karate", "--format", "table")
    assert "delta=17 diam=5 n=34" in out
    code, out, _ = run(capsys, "bounds", "--k", "12", "--delta", "5000", "--diam", "30", "--n",
                       "10000000", "--format", "csv")
    assert "True" in out.splitlines()[2]


@pytest.mark.parametrize("argv", [
    ["sample", "--k", "40"],
    ["sample", "--method", "gibbs"],
    ["sample", "--n", "0"],
    ["sample", "--step-ratio", "2"],
    ["sample", "--eps", "0"],
    ["sample", "--bogus"],
    ["sample", "--graph", "nope"],
    ["sample", "--graph", "ba:10"],
    ["sample", "--method", "psrw", "--k", "2"],
    ["uniformity", "--ratios", "0,3"],
    ["bounds", "--k", "3"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_runtime_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "sample", "--graph", f"file:{tmp_path / 'missing.txt'}")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\nx y\n")
    code, _, err = run(capsys, "sample", "--graph", f"file:{bad}")
    assert code == 2 and "line 2" in err
    # full bounds overflow the step counter
    code, _, err = run(capsys, "sample", "--graph", "star:40", "--k", "12", "--method", "mcmc")
    assert code == 2 and "step" in err
    code, _, err = run(capsys, "enumerate", "--k", "4", "--cap", "10")
    assert code == 2


def test_file_graph_labels(capsys, tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("10 20\n20 30\n30 40\n")
    code, out, _ = run(capsys, "sample", "--graph", f"file:{f}", "--k", "3", "--n", "20",
                       "--seed", "1", "--step-ratio", "0.01")
    assert code == 0
    for r in jsonl(out)[1:]:
        assert r["nodes"] in ([10, 20, 30], [20, 30, 40])


def test_load_graph_specs():
    assert load_graph("ba:50:2")[0].m == load_graph("ba:50:2:0")[0].m
    g, sg = load_graph(f"signed:{DATA / 'signed_fixture.csv'}")
    assert sg is not None and sg.graph is g
    assert load_graph("star:3")[0].n == 4
