import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from fintrace.synth import make_scene
from fintrace.thresholding import build_pixelarity_lut


def save_scene(scene, path):
    Image.fromarray(scene.image.px).save(path)


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "fintrace", *map(str, args)],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli-fixtures")
    scenes = {}
    for family in ("a", "b", "c"):
        scene = make_scene(family, 0)
        save_scene(scene, d / f"{family}0.png")
        scenes[family] = scene
    return d, scenes


def fmt_xy(p):
    return f"{p.x},{p.y}"


class TestTraceCommand:
    def test_success_exit_zero_and_outline_json(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        scene = scenes["a"]
        out = tmp_path / "a0.outline.json"
        proc = run_cli(
            "trace",
            "--image", d / "a0.png",
            "--start", fmt_xy(scene.endpoints.start),
            "--end", fmt_xy(scene.endpoints.end),
            "--out", out,
        )
        assert proc.returncode == 0, proc.stderr
        data = json.loads(out.read_text())
        assert data["method"] == "approach1"
        assert len(data["points"]) > 50
        diagnostics = tmp_path / "a0.diagnostics.json"
        assert diagnostics.exists()

    def test_orientation_violation_exit_one(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        scene = scenes["a"]
        proc = run_cli(
            "trace",
            "--image", d / "a0.png",
            "--start", fmt_xy(scene.endpoints.end),
            "--end", fmt_xy(scene.endpoints.start),
            "--out", tmp_path / "x.json",
        )
        assert proc.returncode == 1
        assert "swimming" in proc.stderr

    def test_noise_exit_two_with_diagnostics(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        scene = scenes["c"]
        out = tmp_path / "c0.outline.json"
        proc = run_cli(
            "trace",
            "--image", d / "c0.png",
            "--start", fmt_xy(scene.endpoints.start),
            "--end", fmt_xy(scene.endpoints.end),
            "--out", out,
        )
        assert proc.returncode == 2
        assert not out.exists()
        diagnostics = json.loads((tmp_path / "c0.diagnostics.json").read_text())
        assert diagnostics["outcome"] == "failure"

    def test_missing_required_flag_exit_one(self, fixture_dir):
        d, _ = fixture_dir
        proc = run_cli("trace", "--image", d / "a0.png")
        assert proc.returncode == 1

    def test_unreadable_image_exit_one(self, tmp_path):
        proc = run_cli(
            "trace", "--image", tmp_path / "missing.png",
            "--start", "10,10", "--end", "50,10",
        )
        assert proc.returncode == 1

    def test_report_figure_rendered(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        scene = scenes["a"]
        proc = run_cli(
            "trace",
            "--image", d / "a0.png",
            "--start", fmt_xy(scene.endpoints.start),
            "--end", fmt_xy(scene.endpoints.end),
            "--out", tmp_path / "a0.outline.json",
            "--report-dir", tmp_path / "reports",
        )
        assert proc.returncode == 0
        figure = tmp_path / "reports" / "a0.trace.png"
        assert figure.exists()
        assert figure.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestBatchCommand:
    def write_manifest(self, d, rows, name="manifest.csv"):
        path = d / name
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["image", "start_x", "start_y", "end_x", "end_y", "vx", "vy", "vw", "vh"])
            writer.writerows(rows)
        return path

    def test_three_family_manifest(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        rows = [
            [f"{f}0.png",
             scenes[f].endpoints.start.x, scenes[f].endpoints.start.y,
             scenes[f].endpoints.end.x, scenes[f].endpoints.end.y,
             "", "", "", ""]
            for f in ("a", "b", "c")
        ]
        manifest = self.write_manifest(d, rows)
        out_dir = tmp_path / "batch-out"
        proc = run_cli("batch", manifest, "--out-dir", out_dir)
        assert proc.returncode == 0, proc.stderr

        with (out_dir / "summary.csv").open() as fh:
            summary = {r["image"]: r for r in csv.DictReader(fh)}
        assert len(summary) == 3
        assert summary["a0.png"]["outcome"] == "success"
        assert summary["a0.png"]["method"] == "approach1"
        assert summary["b0.png"]["outcome"] == "success"
        assert summary["b0.png"]["method"] == "approach2"
        assert summary["c0.png"]["outcome"] == "failure"
        assert summary["c0.png"]["reason"]
        assert (out_dir / "a0.outline.json").exists()
        assert (out_dir / "b0.outline.json").exists()
        assert not (out_dir / "c0.outline.json").exists()

    def test_malformed_row_isolated(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        e = scenes["a"].endpoints
        rows = [
            ["a0.png", e.start.x, e.start.y, e.end.x, e.end.y, "", "", "", ""],
            ["a0.png", "", "", e.end.x, e.end.y, "", "", "", ""],  # missing endpoint
        ]
        manifest = self.write_manifest(d, rows, name="mixed.csv")
        out_dir = tmp_path / "mixed-out"
        proc = run_cli("batch", manifest, "--out-dir", out_dir)
        assert proc.returncode == 0
        with (out_dir / "summary.csv").open() as fh:
            outcomes = [r["outcome"] for r in csv.DictReader(fh)]
        assert outcomes.count("success") == 1
        assert outcomes.count("error") == 1

    def test_empty_manifest_exit_one(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("image,start_x,start_y,end_x,end_y,vx,vy,vw,vh\n")
        proc = run_cli("batch", path)
        assert proc.returncode == 1

    def test_all_failures_exit_two(self, fixture_dir, tmp_path):
        d, scenes = fixture_dir
        e = scenes["c"].endpoints
        manifest = self.write_manifest(
            d, [["c0.png", e.start.x, e.start.y, e.end.x, e.end.y, "", "", "", ""]],
            name="noise.csv",
        )
        proc = run_cli("batch", manifest, "--out-dir", tmp_path / "noise-out")
        assert proc.returncode == 2


class TestLutCommand:
    def test_dump_matches_library(self, tmp_path):
        out = tmp_path / "lut.csv"
        proc = run_cli("lut", "--dump", out)
        assert proc.returncode == 0
        with out.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 512
        lut = build_pixelarity_lut()
        values = np.array([int(r["score"]) for r in rows])
        assert np.array_equal(values, lut.scores)
