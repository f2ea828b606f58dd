import json
import os

import numpy as np
import pytest

from dwshift.bench import (
    ConfigError,
    ResultRow,
    boxplot_csv_text,
    build_run_config,
    main,
    parse_config_text,
    read_results_csv,
    results_csv_text,
    run,
    summarize,
    summary_csv_text,
)


def test_parse_config_text():
    cfg = parse_config_text(
        """
        # comment
        [run]
        seed = 7
        methods = ["no-adapt", "dwgcs-01"]
        fraction = 0.25
        flag = true

        [scenario]
        kind = "synthetic"
        deltas = [0.05, 0.45]
        """
    )
    assert cfg["run"]["seed"] == 7
    assert cfg["run"]["methods"] == ["no-adapt", "dwgcs-01"]
    assert cfg["run"]["fraction"] == 0.25
    assert cfg["run"]["flag"] is True
    assert cfg["scenario"]["deltas"] == [0.05, 0.45]


def test_parse_config_errors():
    with pytest.raises(ConfigError):
        parse_config_text("key = 1\n")  # outside a section
    with pytest.raises(ConfigError):
        parse_config_text("[run]\nbad line\n")
    with pytest.raises(ConfigError):
        parse_config_text("[run]\nx = nope\n")


def _tiny_config(outdir, reps=2, methods=("no-adapt", "reweighted")):
    return {
        "run": {
            "seed": 99,
            "repetitions": reps,
            "methods": list(methods),
            "outdir": outdir,
        },
        "scenario": {"kind": "synthetic", "deltas": [0.45], "n": 24, "t": 24},
        "model": {"feature_map": "quadratic", "subgradient_iters": 400},
    }


def test_build_run_config_validation(tmp_path):
    cfg = _tiny_config(str(tmp_path / "out"))
    rc = build_run_config(cfg, base_dir=str(tmp_path))
    assert rc.repetitions == 2 and len(rc.scenarios) == 1
    bad = _tiny_config(str(tmp_path / "out"), methods=("nope",))
    with pytest.raises(ConfigError):
        build_run_config(bad, base_dir=str(tmp_path))
    with pytest.raises(ConfigError):
        build_run_config({"run": {}}, base_dir=str(tmp_path))


def test_run_emits_consistent_reports(tmp_path):
    outdir = str(tmp_path / "out")
    rc = build_run_config(_tiny_config(outdir), base_dir=str(tmp_path))
    rows = run(rc, workers=1)
    assert len(rows) == 4  # 2 methods x 2 repetitions
    for name in ("results.csv", "summary.csv", "boxplot.csv", "run_manifest.json"):
        assert os.path.exists(os.path.join(outdir, name))

    # summary recomputed from results.csv matches summary.csv within 1e-12
    reread = read_results_csv(os.path.join(outdir, "results.csv"))
    with open(os.path.join(outdir, "summary.csv"), encoding="utf-8") as fh:
        stored_lines = fh.read()
    assert summary_csv_text(summarize(reread)) == stored_lines

    groups = {}
    for r in reread:
        groups.setdefault((r.scenario, r.method), []).append(r.error)
    for line in stored_lines.strip().splitlines()[1:]:
        parts = line.split(",")
        errs = np.asarray(groups[(parts[0], parts[1])])
        assert float(parts[3]) == pytest.approx(errs.mean(), abs=1e-12)

    # boxplot quantiles match a separate linear-interpolation routine
    with open(os.path.join(outdir, "boxplot.csv"), encoding="utf-8") as fh:
        box_lines = fh.read().strip().splitlines()
    assert box_lines[0].startswith("# quantiles: linear interpolation")
    for line in box_lines[2:]:
        parts = line.split(",")
        srt = np.sort(np.asarray(groups[(parts[0], parts[1])]))
        for col, prob in zip(range(2, 7), (0, 25, 50, 75, 100)):
            h = (srt.size - 1) * prob / 100.0
            lo = int(np.floor(h))
            hi = min(lo + 1, srt.size - 1)
            manual = srt[lo] + (h - lo) * (srt[hi] - srt[lo])
            assert float(parts[col]) == pytest.approx(manual, abs=1e-15)

    manifest = json.load(open(os.path.join(outdir, "run_manifest.json"), encoding="utf-8"))
    assert manifest["seed"] == 99
    assert "synthetic-delta0.45" in manifest["scenarios"]


def test_single_row_report():
    row = ResultRow(scenario="s", method="no-adapt", repetition=0, error=0.25)
    text = results_csv_text([row])
    lines = text.strip().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("s,no-adapt,0,0.25")
    box = boxplot_csv_text([row]).strip().splitlines()
    assert len(box) == 3


def test_results_round_trip(tmp_path):
    rows = [
        ResultRow("s", "dwgcs-01", 0, 0.125, minimax_risk=0.3, selected_d=4.0),
        ResultRow("s", "reweighted", 1, None, failure="ValueError: boom"),
    ]
    path = tmp_path / "results.csv"
    path.write_text(results_csv_text(rows), encoding="utf-8")
    back = read_results_csv(str(path))
    assert back[0].error == 0.125 and back[0].selected_d == 4.0
    assert back[1].error is None and back[1].failure == "ValueError: boom"


def test_byte_identical_across_runs_and_workers(tmp_path):
    texts = []
    for tag, workers in (("a", 1), ("b", 2), ("c", 1)):
        outdir = str(tmp_path / tag)
        rc = build_run_config(_tiny_config(outdir), base_dir=str(tmp_path))
        run(rc, workers=workers)
        with open(os.path.join(outdir, "results.csv"), "rb") as fh:
            texts.append(fh.read())
    assert texts[0] == texts[1] == texts[2]


def test_cli_exit_codes(tmp_path, capsys):
    missing = str(tmp_path / "nope.toml")
    assert main(["run", missing]) == 2

    bad = tmp_path / "bad.toml"
    bad.write_text("[run]\nmethods = [\"nope\"]\n[scenario]\nkind = \"synthetic\"\n", encoding="utf-8")
    assert main(["run", str(bad)]) == 2

    good = tmp_path / "good.toml"
    good.write_text(
        "[run]\nseed = 3\nrepetitions = 1\nmethods = [\"reweighted\"]\noutdir = \"out\"\n"
        "[scenario]\nkind = \"synthetic\"\ndeltas = [0.45]\nn = 16\nt = 16\n"
        "[model]\nfeature_map = \"quadratic\"\nsubgradient_iters = 200\n",
        encoding="utf-8",
    )
    assert main(["run", str(good), "--workers", "1"]) == 0
    assert main(["report", str(tmp_path / "out")]) == 0
    capsys.readouterr()


def test_fixed_csv_scenario(tmp_path):
    stream = np.random.default_rng(0)
    rows = ["f1,f2,label"]
    for side in range(2):
        for i in range(40):
            x = stream.normal(size=2) + side
            rows.append(f"{x[0]},{x[1]},{1 if x[0] > 0.5 else 2}")
    (tmp_path / "train.csv").write_text("\n".join(rows[:41]) + "\n", encoding="utf-8")
    (tmp_path / "test.csv").write_text("\n".join([rows[0]] + rows[41:]) + "\n", encoding="utf-8")
    cfg = {
        "run": {"seed": 1, "repetitions": 1, "methods": ["reweighted"], "outdir": "outf"},
        "scenario": {
            "kind": "fixed-csv",
            "csv_train": "train.csv",
            "csv_test": "test.csv",
            "label_column": "label",
            "n": 30,
            "t": 30,
        },
        "model": {"subgradient_iters": 200},
    }
    rc = build_run_config(cfg, base_dir=str(tmp_path))
    rows_out = run(rc, workers=1)
    assert len(rows_out) == 1 and rows_out[0].failure == ""
    assert 0.0 <= rows_out[0].error <= 1.0


def test_failures_recorded_not_raised(tmp_path):
    # three-class pool: the binary-only baseline records a failure marker
    rows = ["f1,label"] + [f"{v / 10},{1 + v % 3}" for v in range(60)]
    (tmp_path / "pool.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    cfg = {
        "run": {"seed": 5, "repetitions": 1, "methods": ["reweighted"], "outdir": "outx"},
        "scenario": {
            "kind": "biased-sampling",
            "csv": "pool.csv",
            "label_column": "label",
            "axes": ["f1"],
            "n": 15,
            "t": 15,
        },
        "model": {"subgradient_iters": 200},
    }
    rc = build_run_config(cfg, base_dir=str(tmp_path))
    out = run(rc, workers=1)
    assert out[0].failure != "" and out[0].error is None
