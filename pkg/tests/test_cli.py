import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from tmsdetect.cli import main
from tmsdetect import runio
from tmsdetect.bloch import SpinSize, tensor_from_density


@pytest.fixture
def runner():
    return CliRunner()


def bell_tensor_file(tmp_path):
    rho = np.zeros((3, 3))
    rho[1, 1] = 1.0
    t = tensor_from_density(rho, SpinSize(2))
    path = tmp_path / "bell.csv"
    runio.write_tensor(path, t, [("state", "bell")])
    return str(path)


class TestEnumerationCommands:
    def test_sets_all_counts(self, runner, tmp_path):
        out = tmp_path / "sets.csv"
        res = runner.invoke(main, ["enumerate-sets", "--universe", "sym",
                                   "--all", "--out", str(out)])
        assert res.exit_code == 0
        _, cols, rows = runio.read_csv(out)
        assert cols == ["k", "id", "members"]
        counts = {}
        for row in rows:
            counts[int(row[0])] = counts.get(int(row[0]), 0) + 1
        assert [counts[k] for k in range(1, 9)] == [3, 9, 19, 25, 23, 14, 5, 1]

    def test_paths_count(self, runner, tmp_path):
        out = tmp_path / "paths.csv"
        res = runner.invoke(main, ["enumerate-paths", "--k", "8", "--out", str(out)])
        assert res.exit_code == 0
        _, _, rows = runio.read_csv(out)
        assert len(rows) == 3228

    def test_byte_identical_reruns(self, runner, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            runner.invoke(main, ["enumerate-sets", "--universe", "full2q",
                                 "--k", "2", "--out", str(out)])
        assert out1.read_bytes() == out2.read_bytes()


class TestDetectCommand:
    def test_bell_with_xx_yy(self, runner, tmp_path):
        tensor = bell_tensor_file(tmp_path)
        out = tmp_path / "verdict.json"
        res = runner.invoke(main, ["detect", "--tensor", tensor, "--set", "xx+yy",
                                   "--kmax", "3", "--out", str(out)])
        assert res.exit_code == 0
        verdict = json.loads(out.read_text())
        assert verdict["outcome"] == "ENTANGLED_CERTIFIED"
        assert verdict["level"] == 2
        assert "timing_ms" in verdict

    def test_full_tomography_default(self, runner, tmp_path):
        tensor = bell_tensor_file(tmp_path)
        res = runner.invoke(main, ["detect", "--tensor", tensor])
        assert res.exit_code == 0
        assert "ENTANGLED_CERTIFIED" in res.output


class TestSampleCommand:
    def test_writes_tensor_files(self, runner, tmp_path):
        out = tmp_path / "states"
        res = runner.invoke(main, ["sample", "--seed", "3", "--count", "4",
                                   "--ensemble", "sym", "--out", str(out)])
        assert res.exit_code == 0
        files = sorted(os.listdir(out))
        assert len(files) == 4
        t = runio.read_tensor(out / files[0])
        t.validate()

    def test_deterministic(self, runner, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            runner.invoke(main, ["sample", "--seed", "9", "--count", "2",
                                 "--out", str(out)])
        assert (a / "state_000000.csv").read_bytes() == \
            (b / "state_000000.csv").read_bytes()


class TestProbabilitiesAndPaths:
    def test_small_run_and_path_algebra(self, runner, tmp_path, workers):
        probs = tmp_path / "probs.csv"
        res = runner.invoke(main, ["probabilities", "--universe", "sym",
                                   "--samples", "150", "--seed", "5",
                                   "--workers", str(workers),
                                   "--out", str(probs)])
        assert res.exit_code == 0, res.output
        header, cols, rows = runio.read_csv(probs)
        assert cols == ["k", "set_id", "members", "p", "lo", "hi", "n"]
        assert len(rows) == 99
        pstats = tmp_path / "pstats.csv"
        res = runner.invoke(main, ["paths", "--probs", str(probs),
                                   "--out", str(pstats)])
        assert res.exit_code == 0, res.output
        _, cols, rows = runio.read_csv(pstats)
        assert len(rows) == 3228
        assert cols[:3] == ["path_id", "steps", "d"]
        depths = [float(r[2]) for r in rows]
        assert all(1.0 <= d <= 8.0 for d in depths)


class TestConfig:
    def test_env_override(self, tmp_path):
        cfg = runio.load_config(env={"TMSDETECT_INDET_CAP": "0.1"})
        assert cfg["indet_cap"] == "0.1"

    def test_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nseed = 42\nworkers= 2\n")
        cfg = runio.load_config(str(path), env={})
        assert cfg == {"seed": "42", "workers": "2"}
