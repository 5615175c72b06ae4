import json
import subprocess
import sys

import numpy as np
import pytest

from boundlab.harness import (
    PRESETS,
    ConfigError,
    expected_rows,
    load_config,
    parse_config,
    preset,
    read_csv,
    run_experiment,
    write_outputs,
)
from boundlab.harness.cli import main
from boundlab.harness.experiments import subseed

SMALL = {
    "cacti-rrmse": {"experiment": "cacti-rrmse", "dims": {"n1": 4, "n2": 4}, "T": 2, "shifts": [[0, 0], [1, 2]],
                    "sparsities": [0.05, 0.1], "num_vectors": 6, "descent": {"restarts": 2, "max_iters": 20}},
    "cacti-eigen": {"experiment": "cacti-eigen", "dims": {"n1": 4, "n2": 4}, "T": 2, "shifts": [[0, 0], [1, 2]],
                    "sparsities": [0.1], "num_vectors": 5, "descent": {"restarts": 1, "max_iters": 10}},
    "trace-general": {"experiment": "trace-general", "dims": {"m": 30, "n": 40}, "num_vectors": 30},
    "trace-cacti": {"experiment": "trace-cacti", "dims": {"n1": 4, "n2": 4}, "T": 2, "shifts": [[0, 0], [2, 1]],
                    "num_vectors": 4, "descent": {"restarts": 1, "max_iters": 10}},
    "tang-looseness": {"experiment": "tang-looseness", "dims": {"m": 10, "n": 30}, "sparsities": [0.05],
                       "num_vectors": 5},
    "ric-looseness": {"experiment": "ric-looseness", "dims": {"m": 299, "n": 300}, "k": [2], "num_vectors": 5},
    "mmse-compare": {"experiment": "mmse-compare", "dims": {"m": 6, "n": 12}, "sparsities": [0.2],
                     "num_vectors": 8, "train_vectors": 4, "search": {"iters": 2, "samples_per_iter": 2},
                     "descent": {"restarts": 1, "max_iters": 10}},
}


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data, indent=2) + "\n")
    return p


class TestConfig:
    def test_minimal(self):
        cfg = parse_config({"experiment": "trace-general", "dims": {"m": 10, "n": 20}})
        assert cfg.num_vectors == 100 and cfg.eps == 1e-5 and cfg.arms == ("random",)

    def test_bad_sparsity_names_field_and_line(self, tmp_path):
        p = write(tmp_path, {"experiment": "tang-looseness", "dims": {"m": 5, "n": 10}, "sparsities": [0.1, 1.5]})
        with pytest.raises(ConfigError, match=r"cfg\.json:\d+: sparsities\[1\]"):
            load_config(p)
        line = int(str(pytest.raises(ConfigError, load_config, p).value).split(":")[1])
        assert '"sparsities"' in p.read_text().splitlines()[line - 1]

    def test_missing_shifts(self):
        with pytest.raises(ConfigError, match="shifts"):
            parse_config({"experiment": "cacti-rrmse", "dims": {"n1": 4, "n2": 4}, "T": 2, "sparsities": [0.1]})

    @pytest.mark.parametrize("bad", [
        {"experiment": "nope", "dims": {"m": 2, "n": 3}},
        {"experiment": "trace-general", "dims": {"m": 5, "n": 3}},
        {"experiment": "trace-general", "dims": {"m": 2, "n": 3}, "colour": 1},
        {"experiment": "trace-general", "dims": {"m": 2, "n": 3}, "solver": {"rho": -1}},
        {"experiment": "mmse-compare", "dims": {"m": 2, "n": 3}, "sparsities": [0.1, 0.2]},
        {"experiment": "ric-looseness", "dims": {"m": 2, "n": 3}},
    ])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            parse_config(bad)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text('{"experiment":\n  ,}')
        with pytest.raises(ConfigError, match=r"x\.json:2"):
            load_config(p)

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_valid(self, name):
        parse_config(preset(name))


def test_subseed_distinct():
    seeds = {subseed(0, a, b) for a in range(5) for b in range(5)}
    assert len(seeds) == 25 and subseed(0, 1) == subseed(0, 1)


class TestRuns:
    @pytest.mark.parametrize("exp", sorted(SMALL))
    def test_row_count(self, exp):
        cfg = parse_config(SMALL[exp])
        table = run_experiment(cfg)
        assert len(table.rows) == expected_rows(cfg)
        assert all(len(r) == len(table.schema) for r in table.rows)

    def test_summary_matches_results(self, tmp_path):
        cfg = parse_config(SMALL["cacti-rrmse"])
        write_outputs(run_experiment(cfg), cfg, tmp_path, plots=True)
        head, rows = read_csv(tmp_path / "results.csv")
        shead, srows = read_csv(tmp_path / "summary.csv")
        ia, isp, ir = head.index("arm"), head.index("sparsity"), head.index("rrmse")
        for s in srows:
            rec = dict(zip(shead, s))
            if rec["metric"] != "rrmse":
                continue
            v = [float(r[ir]) for r in rows if r[ia] == rec["arm"] and r[isp] == rec["sparsity"]]
            assert int(rec["count"]) == len(v)
            assert float(rec["median"]) == float(np.median(v))
        assert (tmp_path / "config-echo.json").exists()
        assert list(tmp_path.glob("*.svg"))

    @pytest.mark.parametrize("exp", ["trace-cacti", "mmse-compare", "cacti-rrmse"])
    def test_byte_identical_across_threads(self, tmp_path, exp):
        cfg = parse_config(SMALL[exp])
        blobs = []
        for i, threads in enumerate((1, 3, 1)):
            out = tmp_path / str(i)
            write_outputs(run_experiment(cfg, threads=threads), cfg, out, plots=i == 0)
            blobs.append((out / "results.csv").read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]
        assert b"\r" not in blobs[0]

    def test_svg_deterministic(self, tmp_path):
        cfg = parse_config(SMALL["tang-looseness"])
        table = run_experiment(cfg)
        write_outputs(table, cfg, tmp_path / "a")
        write_outputs(table, cfg, tmp_path / "b")
        for f in (tmp_path / "a").glob("*.svg"):
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        assert main(["validate", str(write(tmp_path, SMALL["trace-general"]))]) == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_bad(self, tmp_path, capsys):
        bad = dict(SMALL["tang-looseness"], sparsities=[1.5])
        assert main(["validate", str(write(tmp_path, bad))]) == 2
        assert "sparsities[0]" in capsys.readouterr().err

    def test_inapplicable_exit(self, tmp_path, capsys):
        cfg = {"experiment": "ric-looseness", "dims": {"m": 10, "n": 20}, "k": [2], "num_vectors": 3}
        assert main(["run", str(write(tmp_path, cfg)), "-o", str(tmp_path / "o")]) == 3
        assert "0.307" in capsys.readouterr().err

    def test_budget_exit(self, tmp_path):
        cfg = {"experiment": "ric-looseness", "dims": {"m": 299, "n": 300}, "k": [3], "num_vectors": 3}
        assert main(["run", str(write(tmp_path, cfg)), "-o", str(tmp_path / "o")]) == 3

    def test_run_writes(self, tmp_path, capsys):
        p = write(tmp_path, SMALL["trace-general"])
        assert main(["run", str(p), "-o", str(tmp_path / "o"), "--no-plots"]) == 0
        assert (tmp_path / "o" / "results.csv").exists()

    def test_presets(self, capsys):
        assert main(["presets", "list"]) == 0
        assert "ric-549x550" in capsys.readouterr().out
        assert main(["presets", "show", "tang-10x100"]) == 0
        assert main(["presets", "show", "nope"]) == 2

    def test_console_script(self, tmp_path):
        out = subprocess.run([sys.executable, "-m", "boundlab.harness.cli", "presets", "list"],
                             capture_output=True, text=True)
        assert out.returncode == 0 and "mmse-cacti-T2" in out.stdout
