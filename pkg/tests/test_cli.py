import json
import subprocess
import sys

import numpy as np
import pytest

from fastsax.cli import main
from fastsax.series import dump_ucr, load_ucr
from fastsax.series import Dataset
from oracles import naive_euclidean, naive_znorm, random_walk_rows


@pytest.fixture
def ucr_file(tmp_path, rng):
    rows = np.cumsum(rng.normal(size=(60, 64)), axis=1) * 3 + 5
    p = tmp_path / "walks.txt"
    dump_ucr(Dataset(range(60), rows, [str(k % 2) for k in range(60)]), p)
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_build_and_reload(tmp_path, ucr_file, capsys):
    idx = tmp_path / "w.idx"
    code, out, err = run(["build", "--data", ucr_file, "--index", idx, "--alphabet", 10, "--levels", "16,8,4"], capsys)
    assert code == 0, err
    assert "level 0: frames=16" in out and "level 2: frames=4" in out
    first = idx.read_bytes()
    assert run(["build", "--data", ucr_file, "--index", idx, "--alphabet", 10, "--levels", "16,8,4"], capsys)[0] == 0
    assert idx.read_bytes() == first


def test_build_default_levels(tmp_path, ucr_file, capsys):
    code, out, _ = run(["build", "--data", ucr_file, "--index", tmp_path / "d.idx"], capsys)
    assert code == 0
    assert "frames=16" in out and "frames=8" in out and "frames=4" in out


def test_build_rejects_non_divisor(tmp_path, ucr_file, capsys):
    code, out, err = run(["build", "--data", ucr_file, "--index", tmp_path / "x.idx", "--levels", "16,10"], capsys)
    assert code != 0
    assert "10" in err and "n=64" in err
    assert len(err.strip().splitlines()) == 1


def test_query_self_match_and_oracle(tmp_path, ucr_file, capsys):
    idx = tmp_path / "w.idx"
    run(["build", "--data", ucr_file, "--index", idx, "--alphabet", 20, "--levels", "16,8"], capsys)
    code, out, _ = run(["query", "--index", idx, "--data", ucr_file, "--query", "row:7", "--epsilon", 0, "--json"], capsys)
    assert code == 0
    assert 7 in json.loads(out)["answers"]

    data = load_ucr(ucr_file)
    qfile = tmp_path / "q.txt"
    qfile.write_text("x " + " ".join(repr(float(v)) for v in data.values[3][::-1]) + "\n")
    for spec in ("row:3", qfile):
        code, out, _ = run(["query", "--index", idx, "--data", ucr_file, "--query", spec, "--epsilon", 6, "--json"], capsys)
        rep = json.loads(out)
        raw = data.values[3] if spec == "row:3" else data.values[3][::-1]
        qn = naive_znorm(list(raw))
        expected = sorted(
            sid for sid, row in zip(data.ids, data.values) if naive_euclidean(naive_znorm(list(row)), qn) <= 6
        )
        assert rep["answers"] == expected
        again = run(["query", "--index", idx, "--data", ucr_file, "--query", spec, "--epsilon", 6, "--json"], capsys)[1]
        assert again == out


def test_query_text_output(tmp_path, ucr_file, capsys):
    idx = tmp_path / "w.idx"
    run(["build", "--data", ucr_file, "--index", idx], capsys)
    code, out, _ = run(["query", "--index", idx, "--data", ucr_file, "--query", "row:0", "--epsilon", 1], capsys)
    assert code == 0
    assert out.startswith("answers (")
    assert "excluded_residual=" in out and "ops: adds=" in out


def test_query_errors(tmp_path, ucr_file, capsys):
    idx = tmp_path / "w.idx"
    run(["build", "--data", ucr_file, "--index", idx], capsys)
    other = tmp_path / "other.txt"
    dump_ucr(Dataset(range(5), np.random.default_rng(0).normal(size=(5, 64))), other)
    code, _, err = run(["query", "--index", idx, "--data", other, "--query", "row:0", "--epsilon", 1], capsys)
    assert code == 1 and "fingerprint" in err
    code, _, err = run(["query", "--index", idx, "--data", ucr_file, "--query", "row:999", "--epsilon", 1], capsys)
    assert code == 1 and "row 999" in err
    short = tmp_path / "short.txt"
    short.write_text("1 1 2 3\n")
    code, _, err = run(["query", "--index", idx, "--data", ucr_file, "--query", short, "--epsilon", 1], capsys)
    assert code == 1 and "length" in err


def test_verify_passes_then_detects_corruption(tmp_path, ucr_file, capsys):
    for a in (3, 10, 20):
        idx = tmp_path / f"w{a}.idx"
        run(["build", "--data", ucr_file, "--index", idx, "--alphabet", a], capsys)
        code, out, err = run(["verify", "--index", idx, "--data", ucr_file, "--trials", 40, "--seed", 1], capsys)
        assert code == 0, out + err
        assert "FAIL" not in out and out.count("PASS") == 7
    text = idx.read_text().splitlines(keepends=True)
    sid, level, res, word = text[5].split(" ")
    text[5] = " ".join([sid, level, repr(float(res) + 0.25), word])
    idx.write_text("".join(text))
    code, out, err = run(["verify", "--index", idx, "--data", ucr_file, "--trials", 5, "--seed", 1], capsys)
    assert code == 1
    assert "FAIL index file integrity" in out and "checksum" in out


def test_bench_determinism_and_ratios(tmp_path, ucr_file, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["bench", "--data", ucr_file, "--alphabet-list", "3,10", "--epsilon-list", "1,2",
            "--levels", "16,8", "--seed", 5, "--queries", 4]
    code, out, _ = run(argv + ["--out", a], capsys)
    assert code == 0
    assert run(argv + ["--out", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 2 * 2 * 2
    assert out.count("FAST_SAX/SAX=") == 4


def test_bench_cost_model_and_reverse(tmp_path, ucr_file, capsys):
    w = tmp_path / "w.json"
    w.write_text('{"sqrts": 10}')
    code, out, _ = run(["bench", "--data", ucr_file, "--alphabet-list", "5", "--epsilon-list", "2",
                        "--levels", "16,8,4", "--queries", 2, "--order", "reverse",
                        "--cost-model", w, "--out", tmp_path / "r.csv"], capsys)
    assert code == 0
    assert '"4,8,16"' in (tmp_path / "r.csv").read_text()


def test_bench_reports_mismatch_as_bug(tmp_path, ucr_file, capsys, monkeypatch):
    from fastsax import bench

    def broken(*args, **kwargs):
        raise bench.SweepMismatchError("answer sets differ at a=3")

    monkeypatch.setattr(bench, "run_sweep", broken)
    code, _, err = run(["bench", "--data", ucr_file, "--out", tmp_path / "x.csv"], capsys)
    assert code == 3 and "BUG" in err


def test_bad_epsilon_is_usage_error(tmp_path, ucr_file):
    with pytest.raises(SystemExit) as exc:
        main(["query", "--index", "x", "--data", str(ucr_file), "--query", "row:0", "--epsilon", "-1"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path, ucr_file):
    idx = tmp_path / "m.idx"
    proc = subprocess.run(
        [sys.executable, "-m", "fastsax", "build", "--data", str(ucr_file), "--index", str(idx)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert idx.exists()
