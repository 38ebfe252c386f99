"""End-to-end command-line tests via subprocess."""

import subprocess
import sys

import numpy as np
import pytest

from helpers import BRACKET_TIMES, anchored_scene, capture_stack, sun_scene
from skyhdr.imgio import read_ldr, read_radiance, write_ldr
from skyhdr.response import read_curve
from skyhdr.thermo import read_trace

TIMES_ARG = ",".join(str(t) for t in BRACKET_TIMES)


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "skyhdr", *map(str, args)],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture(scope="module")
def bracket_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("bracket")
    stack = capture_stack(anchored_scene(seed=1, shape=(40, 40)))
    paths = []
    for i, img in enumerate(stack.images):
        path = root / f"ldr_{i}.ppm"
        write_ldr(img, path)
        paths.append(path)
    return root, paths


class TestHelp:
    @pytest.mark.parametrize("cmd", [
        [], ["respond"], ["fuse"], ["tonemap"], ["glare"], ["thermo-sim"], ["station"],
    ])
    def test_help_exits_zero(self, cmd):
        result = run_cli(*cmd, "--help")
        assert result.returncode == 0
        assert "usage" in result.stdout.lower()

    def test_unknown_subcommand_is_usage_error(self):
        assert run_cli("frobnicate").returncode == 1

    def test_missing_subcommand_is_usage_error(self):
        assert run_cli().returncode == 1


class TestPipeline:
    def test_full_pipeline(self, bracket_dir, tmp_path):
        root, paths = bracket_dir
        curve = tmp_path / "curve.txt"
        result = run_cli("respond", *paths, "--times", TIMES_ARG, "--out", curve)
        assert result.returncode == 0, result.stderr
        assert "solved" in result.stdout
        parsed = read_curve(curve)
        assert (parsed.values[128] == 0.0).all()

        rmap_path = tmp_path / "map.pfm"
        result = run_cli("fuse", *paths, "--times", TIMES_ARG,
                         "--curve", curve, "--out", rmap_path)
        assert result.returncode == 0, result.stderr
        assert result.stdout.startswith("valid_fraction=")
        rmap = read_radiance(rmap_path)
        assert rmap.width == 40

        out_img = tmp_path / "toned.ppm"
        result = run_cli("tonemap", rmap_path, "--tiles", "4x4", "--out", out_img)
        assert result.returncode == 0, result.stderr
        toned = read_ldr(out_img)
        assert toned.width == 40

        result = run_cli("glare", out_img, "--roi", "8,8,24,24",
                         "--overlay", tmp_path / "overlay.ppm")
        assert result.returncode == 0, result.stderr
        assert result.stdout.splitlines()[0].startswith("saturated=")

    def test_outputs_deterministic(self, bracket_dir, tmp_path):
        root, paths = bracket_dir
        outputs = []
        for tag in ("one", "two"):
            curve = tmp_path / f"curve_{tag}.txt"
            rmap = tmp_path / f"map_{tag}.pfm"
            img = tmp_path / f"img_{tag}.ppm"
            assert run_cli("respond", *paths, "--times", TIMES_ARG, "--out", curve).returncode == 0
            assert run_cli("fuse", *paths, "--times", TIMES_ARG,
                           "--curve", curve, "--out", rmap).returncode == 0
            assert run_cli("tonemap", rmap, "--out", img).returncode == 0
            outputs.append((curve.read_bytes(), rmap.read_bytes(), img.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_glare_all_saturated(self, tmp_path):
        from skyhdr import RasterImage8

        path = tmp_path / "sat.ppm"
        write_ldr(RasterImage8(np.full((6, 6, 3), 255, dtype=np.uint8)), path)
        result = run_cli("glare", path, "--roi", "0,0,6,6")
        assert result.returncode == 0
        assert "fraction=1.000000" in result.stdout


class TestUsageErrors:
    def test_respond_single_image(self, bracket_dir):
        root, paths = bracket_dir
        result = run_cli("respond", paths[0], "--times", "0.004", "--out", root / "c.txt")
        assert result.returncode == 1
        assert "at least 2" in result.stderr

    def test_respond_times_mismatch(self, bracket_dir):
        root, paths = bracket_dir
        result = run_cli("respond", *paths, "--times", "0.1,0.2", "--out", root / "c.txt")
        assert result.returncode == 1

    def test_bad_roi_format(self, bracket_dir, tmp_path):
        root, paths = bracket_dir
        result = run_cli("glare", paths[0], "--roi", "1,2,3")
        assert result.returncode == 1

    def test_missing_required_flag(self, bracket_dir):
        root, paths = bracket_dir
        result = run_cli("fuse", *paths, "--times", TIMES_ARG)
        assert result.returncode == 1


class TestDataErrors:
    def test_missing_input_file(self, tmp_path):
        result = run_cli("fuse", tmp_path / "nope.ppm", "--times", "0.01",
                         "--curve", tmp_path / "c.txt", "--out", tmp_path / "m.pfm")
        assert result.returncode == 2
        assert result.stderr.strip()

    def test_unsolvable_stack(self, tmp_path):
        from skyhdr import RasterImage8

        rng = np.random.default_rng(3)
        img = RasterImage8(rng.integers(30, 200, (40, 40, 3)).astype(np.uint8))
        paths = []
        for i in range(3):
            path = tmp_path / f"same_{i}.ppm"
            write_ldr(img, path)
            paths.append(path)
        result = run_cli("respond", *paths, "--times", TIMES_ARG, "--out", tmp_path / "c.txt")
        assert result.returncode == 2
        assert "rank" in result.stderr

    def test_glare_roi_out_of_bounds(self, bracket_dir):
        root, paths = bracket_dir
        result = run_cli("glare", paths[0], "--roi", "30,30,20,20")
        assert result.returncode == 2


class TestThermoSim:
    def test_sealed_day_bounded(self, tmp_path):
        out = tmp_path / "trace.csv"
        result = run_cli("thermo-sim", "--model", "sealed", "--hours", "24", "--out", out)
        assert result.returncode == 0, result.stderr
        assert result.stdout.startswith("max=")
        trace = read_trace(out)
        assert trace.temps_c.max() <= 40.0

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("thermo-sim", "--model", "ventilated", "--hours", "2", "--out", a)
        run_cli("thermo-sim", "--model", "ventilated", "--hours", "2", "--out", b)
        assert a.read_bytes() == b.read_bytes()


class TestStation:
    def write_config(self, tmp_path):
        cfg = tmp_path / "station.cfg"
        cfg.write_text("interval_s=60\nduration_s=120\nbase_shutter_s=0.004\nev_offsets=-3,-1,1\n")
        return cfg

    def test_station_run(self, tmp_path):
        cfg = self.write_config(tmp_path)
        out_dir = tmp_path / "caps"
        result = run_cli("station", "--config", cfg, "--out-dir", out_dir)
        assert result.returncode == 0, result.stderr
        assert "captured 3 of 3 brackets" in result.stdout
        manifest = (out_dir / "captures.log").read_text().splitlines()
        assert len(manifest) == 3
        images = sorted(p.name for p in out_dir.iterdir() if p.suffix == ".ppm")
        assert len(images) == 9

    def test_station_deterministic(self, tmp_path):
        cfg = self.write_config(tmp_path)
        blobs = []
        for tag in ("one", "two"):
            out_dir = tmp_path / tag
            assert run_cli("station", "--config", cfg, "--out-dir", out_dir).returncode == 0
            blobs.append(sorted((p.name, p.read_bytes()) for p in out_dir.iterdir()))
        assert blobs[0] == blobs[1]

    def test_station_with_scene(self, tmp_path):
        from skyhdr.imgio import write_radiance

        cfg = tmp_path / "station.cfg"
        cfg.write_text("interval_s=60\nduration_s=0\nbase_shutter_s=0.004\nev_offsets=0\n")
        scene_path = tmp_path / "scene.pfm"
        write_radiance(sun_scene(size=32), scene_path)
        out_dir = tmp_path / "caps"
        result = run_cli("station", "--config", cfg, "--scene", scene_path, "--out-dir", out_dir)
        assert result.returncode == 0, result.stderr
        assert len(list(out_dir.glob("*.ppm"))) == 1

    def test_bad_config_is_data_error(self, tmp_path):
        cfg = tmp_path / "station.cfg"
        cfg.write_text("interval_s=60\n")
        result = run_cli("station", "--config", cfg)
        assert result.returncode == 2
