import csv
import dataclasses
import io
import json
import subprocess
import sys

import pytest

from definetti_bounds import bounds
from definetti_bounds.cli import main, parse_int_list
from definetti_bounds.exchangeable import dump_model, model_from_weights, model_random_permutation
from definetti_bounds.report import COLUMNS


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse rejects malformed options itself
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_model(tmp_path, model, name="model.json"):
    path = tmp_path / name
    path.write_text(dump_model(model))
    return str(path)


def test_parse_int_list():
    assert parse_int_list("1..4") == [1, 2, 3, 4]
    assert parse_int_list("2,5,7..8") == [2, 5, 7, 8]
    assert parse_int_list("3..2") == []


def test_sampling_urn_22(capsys):
    code, out, _ = run(capsys, "sampling", "--urn", "2,2", "--k", "2")
    assert code == 0
    rows = rows_of(out)
    assert list(rows[0]) == list(COLUMNS)
    tv = [r for r in rows if r["metric"] == "TV_L1" and not r["bound_id"]]
    kl = [r for r in rows if r["metric"] == "KL" and not r["bound_id"]]
    assert tv[0]["value"] == "1/3"
    assert kl[0]["value"].startswith("0.05663301226513")
    stam = [r for r in rows if r["bound_id"] == "stam"][0]
    assert stam["bound_value"] == "1/9" and stam["pass"] == "true" and stam["convention"] == "nats"
    pmf = {r["note"]: r["value"] for r in rows if r["metric"] == "pmf_H"}
    assert pmf == {"s=2,0": "1/6", "s=1,1": "2/3", "s=0,2": "1/6"}


def test_sampling_uniform_urn(capsys):
    code, out, _ = run(capsys, "sampling", "--urn", "1,1,1", "--k", "2", "--metric", "tv")
    rows = rows_of(out)
    assert code == 0
    assert [r["value"] for r in rows if r["metric"] == "TV_L1" and not r["bound_id"]] == ["2/3"]
    exact = [r for r in rows if r["bound_id"] == "exact_tv_uniform"][0]
    assert exact["bound_value"] == "2/3" and exact["pass"] == "true"
    assert not [r for r in rows if r["metric"] == "KL"]


@pytest.mark.parametrize("argv", [
    ["sampling", "--urn", "2,2", "--k", "0"],
    ["sampling", "--urn", "2,2", "--k", "5"],
    ["sampling", "--urn", "2,x", "--k", "1"],
    ["sampling", "--urn", "2,2", "--k", "1", "--metric", "hellinger"],
    ["sampling", "--urn", "2,2", "--k", "1", "--bounds", "nope"],
    ["verify", "--scope", "medium"],
    ["--precision-bits", "20", "registry"],
    ["bounds-table", "--c", "3", "--urn", "2,2", "--k", "1"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:") or "usage" in err


def test_definetti_pair(capsys, tmp_path):
    path = write_model(tmp_path, model_from_weights(2, 2, {(1, 1): 1}))
    code, out, _ = run(capsys, "definetti", "--model", path, "--k", "2")
    assert code == 0
    rows = rows_of(out)
    new2 = [r for r in rows if r["bound_id"] == "new2"][0]
    assert new2["value"].startswith("0.693147180559945") and new2["bound_value"] == new2["value"]
    assert new2["tight"] == "true" and new2["pass"] == "true"
    tv = [r for r in rows if r["metric"] == "TV_L1" and not r["bound_id"]][0]
    assert tv["value"] == "1/1"


def test_definetti_permutation(capsys, tmp_path):
    path = write_model(tmp_path, model_random_permutation(3))
    code, out, _ = run(capsys, "definetti", "--model", path, "--k", "2", "--metric", "kl")
    assert code == 0
    yu = [r for r in rows_of(out) if r["bound_id"] == "yu_converse"][0]
    assert yu["value"].startswith("0.405465108108164") and yu["tight"] == "true"


def test_definetti_rejects_bad_weights(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"alphabet_size": 2, "n": 2,
                                "type_weights": [{"counts": [1, 1], "weight": "7/8"}]}))
    code, _, err = run(capsys, "definetti", "--model", str(path), "--k", "1")
    assert code == 2 and "type_weights sum ≠ 1" in err
    code, _, err = run(capsys, "definetti", "--model", str(tmp_path / "missing.json"))
    assert code == 2


def test_definetti_json_format(capsys, tmp_path):
    path = write_model(tmp_path, model_random_permutation(3))
    code, out, _ = run(capsys, "--format", "json", "definetti", "--model", path, "--k", "1..3")
    data = json.loads(out)
    assert code == 0 and {row["k"] for row in data} == {"1", "2", "3"}
    assert all(set(row) == set(COLUMNS) for row in data)


def test_bounds_table(capsys):
    code, out, _ = run(capsys, "bounds-table", "--c", "2", "--n", "4", "--k", "2", "--bounds", "stam,df_finite,jgk_urn")
    rows = {r["bound_id"]: r for r in rows_of(out)}
    assert code == 0
    assert rows["stam"]["bound_value"] == "1/9"
    assert rows["df_finite"]["bound_value"] == "2/1"
    assert rows["jgk_urn"]["valid"] == "false"
    code, out, _ = run(capsys, "bounds-table", "--urn", "2,2", "--k", "2", "--bounds", "jgk_urn")
    assert rows_of(out)[0]["bound_value"].startswith("0.26810136805775")


def test_registry_command(capsys):
    code, out, _ = run(capsys, "registry")
    assert code == 0 and {entry["id"] for entry in json.loads(out)} == set(bounds.BOUND_IDS)


def sweep(capsys, tmp_path, name, *extra):
    path = tmp_path / name
    code, _, _ = run(capsys, "sweep", "--c-range", "1..3", "--n-range", "1..4", "--k-range", "1..4",
                     "--out", str(path), *extra)
    return code, path.read_bytes()


def test_sweep_is_deterministic(capsys, tmp_path):
    code1, first = sweep(capsys, tmp_path, "a.csv")
    code2, second = sweep(capsys, tmp_path, "b.csv")
    code3, parallel = sweep(capsys, tmp_path, "c.csv", "--jobs", "2")
    assert code1 == code2 == code3 == 0
    assert first == second == parallel
    rows = rows_of(first.decode())
    assert any(r["note"].startswith("skipped") for r in rows)


def test_sweep_empty_range(capsys):
    code, out, _ = run(capsys, "sweep", "--n-range", "3..2", "--k-range", "1", "--out", "-")
    assert code == 0 and out == ",".join(COLUMNS) + "\n"


def test_sweep_single_draw_row(capsys):
    code, out, _ = run(capsys, "sweep", "--urns", "uniform", "--n-range", "3", "--k-range", "1..3", "--out", "-")
    rows = [r for r in rows_of(out) if r["k"] == "1" and not r["bound_id"]]
    assert code == 0
    assert {r["metric"]: r["value"] for r in rows} == {"TV_L1": "0/1", "KL": "0"}


def test_sweep_freedman_slack_nonnegative(capsys):
    code, out, _ = run(capsys, "sweep", "--urns", "uniform", "--n-range", "2..6", "--k-range", "2",
                       "--bounds", "freedman_upper", "--out", "-")
    rows = [r for r in rows_of(out) if r["bound_id"] == "freedman_upper"]
    assert code == 0 and len(rows) == 5
    assert all(float(r["slack"]) >= 0 for r in rows)


def test_verify_fast(capsys):
    code, out, _ = run(capsys, "verify", "--scope", "fast")
    assert code == 0
    assert out.startswith("# scope=fast seed=1729 precision_bits=50")
    assert out.rstrip().endswith("# PASSED: 0 failing checks")


@pytest.mark.slow
def test_verify_full_catches_corrupted_stam(capsys, monkeypatch):
    spec = bounds.REGISTRY["stam"]
    monkeypatch.setitem(bounds._REGISTRY, "stam",
                        dataclasses.replace(spec, formula=lambda p, bits: spec.formula(p, bits) / 4))
    code, out, _ = run(capsys, "verify", "--scope", "full", "--max-witnesses", "3")
    assert code == 1
    failures = [json.loads(line[len("FAILURE "):]) for line in out.splitlines() if line.startswith("FAILURE ")]
    assert failures and all(f["check"] == "stam" for f in failures)
    assert "urn" in failures[0]["subject"]
    assert "# FAILED" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "definetti_bounds", "sampling", "--urn", "2,2", "--k", "2",
                           "--metric", "tv"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "1/3" in proc.stdout
