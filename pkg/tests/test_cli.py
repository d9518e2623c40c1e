import csv
import json

import numpy as np
import pytest

from ellid import fileio
from ellid.cli import main
from ellid.simulator import builtin_maps, sample_points, scenario_to_dict


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


@pytest.fixture
def map1_points_file(tmp_path):
    pts = sample_points(builtin_maps()[0], 0.0)
    path = tmp_path / "map1.txt"
    fileio.write_points_file(path, pts)
    return path


class TestIdentifyCommand:
    def test_map1_gives_six_ellipses(self, tmp_path, map1_points_file):
        out = tmp_path / "out"
        code = main(["identify", str(map1_points_file), "--out", str(out),
                     "--seed", "0", "--svg"])
        assert code == 0
        header, rows = read_csv(out / "ellipses.csv")
        assert header == fileio.ELLIPSES_HEADER
        assert len(rows) == 6
        assert sum(int(r[-1]) for r in rows) == 520
        assert (out / "identify.svg").read_text().startswith("<svg")

    def test_three_points_one_ellipse(self, tmp_path):
        src = tmp_path / "tri.txt"
        src.write_text("0 0\n1 0\n0.5 1\n")
        out = tmp_path / "out"
        assert main(["identify", str(src), "--out", str(out)]) == 0
        _, rows = read_csv(out / "ellipses.csv")
        assert len(rows) == 1

    def test_malformed_line_names_line(self, tmp_path, capsys):
        src = tmp_path / "bad.txt"
        src.write_text("0 0\n1 0\nnot numbers here\n")
        assert main(["identify", str(src), "--out", str(tmp_path / "o")]) == 2
        err = capsys.readouterr().err
        assert ":3:" in err

    def test_empty_file_exit_three(self, tmp_path):
        src = tmp_path / "empty.txt"
        src.write_text("")
        assert main(["identify", str(src), "--out", str(tmp_path / "o")]) == 3

    def test_deterministic_with_seed(self, tmp_path, map1_points_file):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main(["identify", str(map1_points_file), "--out", str(out),
                  "--seed", "42"])
            outs.append((out / "ellipses.csv").read_text())
        assert outs[0] == outs[1]


class TestTrackCommand:
    def test_identical_frames_zero_velocity(self, tmp_path, rng):
        frames = tmp_path / "frames"
        frames.mkdir()
        pts = rng.normal([0, 0], 0.3, size=(60, 2))
        for ms in (0, 100):
            fileio.write_points_file(frames / f"{ms:06d}.txt", pts)
        out = tmp_path / "out"
        assert main(["track", str(frames), "--out", str(out)]) == 0
        header, rows = read_csv(out / "tracks.csv")
        assert header == fileio.TRACKS_HEADER
        last = [r for r in rows if r[0] == "0.100"]
        assert last
        for r in last:
            assert abs(float(r[7])) < 1e-6 and abs(float(r[8])) < 1e-6

    def test_single_frame_initial_velocities(self, tmp_path, rng):
        frames = tmp_path / "frames"
        frames.mkdir()
        fileio.write_points_file(frames / "000000.txt",
                                 rng.normal(size=(40, 2)))
        out = tmp_path / "out"
        assert main(["track", str(frames), "--out", str(out)]) == 0
        _, rows = read_csv(out / "tracks.csv")
        assert all(float(r[7]) == 0 and float(r[9]) == 0 for r in rows)

    def test_bad_frame_name(self, tmp_path):
        frames = tmp_path / "frames"
        frames.mkdir()
        (frames / "not-a-timestamp.txt").write_text("0 0\n")
        assert main(["track", str(frames), "--out", str(tmp_path / "o")]) == 2

    def test_empty_dir_exit_three(self, tmp_path):
        frames = tmp_path / "frames"
        frames.mkdir()
        assert main(["track", str(frames), "--out", str(tmp_path / "o")]) == 3


class TestRunCommand:
    def test_zero_duration_graceful(self, tmp_path):
        d = scenario_to_dict(builtin_maps()[0])
        d["duration"] = 0.0
        path = tmp_path / "scn.json"
        path.write_text(json.dumps(d))
        out = tmp_path / "out"
        assert main(["run", str(path), "--out", str(out)]) == 0
        header, rows = read_csv(out / "episode.csv")
        assert header == fileio.EPISODE_HEADER
        assert rows == []

    def test_collision_exit_four(self, tmp_path):
        # Frozen vehicle on map3: the sweeping obstacles run it over.
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(
            {"mpc": {"u_min": -1e-9, "u_max": 1e-9, "dt": 0.1}}))
        out = tmp_path / "out"
        code = main(["run", "map3", "--out", str(out), "--config", str(cfg),
                     "--seed", "0"])
        assert code == 4
        assert (out / "episode.csv").exists()

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mpc": {"horizont": 10}}))
        assert main(["run", "map1", "--out", str(tmp_path / "o"),
                     "--config", str(cfg)]) == 2

    def test_unknown_section_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mystery": {}}))
        assert main(["run", "map1", "--out", str(tmp_path / "o"),
                     "--config", str(cfg)]) == 2

    def test_missing_scenario_file(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 2


class TestBenchCommand:
    def test_timing_csv_schema(self, tmp_path):
        out = tmp_path / "out"
        code = main(["bench", "--reps", "2", "--maps", "1",
                     "--skip-episodes", "--out", str(out)])
        assert code == 0
        header, rows = read_csv(out / "bench_timing.csv")
        assert header == fileio.BENCH_TIMING_HEADER
        assert len(rows) == 1
        assert rows[0][0] == "map1"
        assert int(rows[0][1]) == 520
