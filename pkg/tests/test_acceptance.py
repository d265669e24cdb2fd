"""Acceptance suite.

One test per acceptance criterion, each printing a PASS/FAIL line and
enforcing its stated runtime budget. Field photographs are unavailable, so
end-to-end behavior is checked on generator-produced scenes with retained
ground truth (see fintrace.synth).
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest
from PIL import Image

from conftest import run_battery
from fintrace.binary import BinaryImage, boundary, connected_components, dilate, erode, opening
from fintrace.images import GrayImage, histogram
from fintrace.synth import make_scene, symmetric_hausdorff
from fintrace.thresholding import (
    ValleyNotFound,
    build_pixelarity_lut,
    find_valley_threshold,
    pixelarity_curve,
    select_threshold_from_curve,
    window_component_count,
    window_long_edge_count,
)
from oracles import (
    oracle_long_edges,
    oracle_regions,
    ref_dilate,
    ref_erode,
    ref_flood_components,
    same_partition,
)

CHECKERBOARDS = (0b101010101, 0b010101010)


class Criterion:
    """Prints one PASS/FAIL line per criterion and enforces its time budget."""

    def __init__(self, name: str, budget_s: float | None = None):
        self.name = name
        self.budget_s = budget_s

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        budget = f" (budget {self.budget_s:.0f}s)" if self.budget_s else ""
        print(f"ACCEPTANCE {status}: {self.name} [{elapsed:.2f}s{budget}]")
        if exc_type is None and self.budget_s is not None and elapsed > self.budget_s:
            raise AssertionError(
                f"{self.name}: runtime {elapsed:.2f}s exceeds budget {self.budget_s}s"
            )
        return False


def test_pixelarity_lut_exhaustive():
    with Criterion("pixelarity LUT exhaustive suite", budget_s=1.0):
        lut = build_pixelarity_lut()
        assert lut.scores.min() >= 1 and lut.scores.max() <= 21
        assert lut.scores[0] == 1 and lut.scores[511] == 1
        for code in CHECKERBOARDS:
            assert lut.scores[code] == 21
        codes = np.arange(512)
        assert (lut.scores[codes] == lut.scores[(~codes) & 511]).all()
        for code in range(512):
            assert window_component_count(code, "four") == oracle_regions(code, "four")
            assert window_long_edge_count(code) == oracle_long_edges(code)
            assert lut.scores[code] == oracle_regions(code, "four") + oracle_long_edges(code)


def test_morphology_oracle_suite():
    with Criterion("morphology oracle suite (200 random 16x16)", budget_s=5.0):
        rng = np.random.default_rng(20080518)
        for i in range(200):
            px = rng.random((16, 16)) < rng.uniform(0.2, 0.8)
            b = BinaryImage(px)
            n = int(rng.integers(1, 9))
            eroded = erode(b, n)
            dilated = dilate(b, n)
            assert np.array_equal(eroded.px, ref_erode(px, n))
            assert np.array_equal(dilated.px, ref_dilate(px, n))
            assert np.array_equal(
                opening(b, 1).px, ref_dilate(ref_erode(px, 1), 1)
            )
            assert np.array_equal(boundary(b).px, px & ~ref_erode(px, 1))
            # anti-extensivity / extensivity / subset invariants
            assert not (eroded.px & ~px).any()
            assert not (px & ~dilated.px).any()
            assert not (opening(b, 1).px & ~px).any()
            assert not (boundary(b).px & ~px).any()
            for conn in ("four", "eight"):
                cl = connected_components(b, conn)
                ref_labels, ref_count = ref_flood_components(px, conn)
                assert cl.count == ref_count
                assert same_partition(cl.labels, ref_labels)


def _bimodal_scene(rng):
    """A disk of dark intensities on a bright background, both Gaussian."""
    mu1 = int(rng.integers(40, 81))
    mu2 = int(rng.integers(160, 221))
    sigma = float(rng.uniform(5.0, 15.0))
    size = 64
    yy, xx = np.indices((size, size))
    disk = (xx - size / 2) ** 2 + (yy - size / 2) ** 2 <= (size * 0.32) ** 2
    px = np.where(disk, mu1, mu2).astype(np.float64)
    px += rng.normal(0.0, sigma, px.shape)
    g = GrayImage(np.clip(np.floor(px + 0.5), 0, 255).astype(np.uint8))
    return g, mu1, mu2


def test_threshold_selection_on_bimodal_images():
    with Criterion("threshold selection on 50 bimodal images", budget_s=60.0):
        rng = np.random.default_rng(42)
        lut = build_pixelarity_lut()
        valley_hits = 0
        sweep_hits = 0
        for _ in range(50):
            g, mu1, mu2 = _bimodal_scene(rng)
            lo, hi = mu1 - 10, mu2 + 10
            try:
                valley = find_valley_threshold(histogram(g)).chosen
                valley_hits += lo <= valley <= hi
            except ValleyNotFound:
                pass
            choice = select_threshold_from_curve(pixelarity_curve(g, lut))
            sweep_hits += lo <= choice.threshold <= hi
        print(f"  valley in gap: {valley_hits}/50, sweep in gap: {sweep_hits}/50")
        assert valley_hits >= 45
        assert sweep_hits >= 45


@pytest.fixture(scope="session")
def second_battery():
    return run_battery()


def test_end_to_end_fixture_families(battery):
    with Criterion("end-to-end fixture families", budget_s=180.0):
        a_good = b_good = c_good = 0
        for seed in range(20):
            res = battery.results[("a", seed)]
            scene = battery.scenes[("a", seed)]
            if res.success and res.method == "approach1":
                pts = np.asarray(res.outline.points, dtype=float)
                a_good += symmetric_hausdorff(pts, scene.truth_arc) <= 3.0

            res = battery.results[("b", seed)]
            scene = battery.scenes[("b", seed)]
            if (
                res.success
                and res.method == "approach2"
                and res.diagnostics["approach1"]["status"] == "rejected"
            ):
                pts = np.asarray(res.outline.points, dtype=float)
                b_good += symmetric_hausdorff(pts, scene.truth_arc) <= 3.0

            res = battery.results[("c", seed)]
            if not res.success:
                reasons = [
                    d.get("reason")
                    for d in (res.diagnostics["approach1"], res.diagnostics["approach2"])
                ]
                c_good += all(reasons)
        print(f"  family a: {a_good}/20, family b: {b_good}/20, family c: {c_good}/20")
        print(f"  (battery built in {battery.elapsed:.1f}s)")
        assert battery.elapsed < 180.0
        assert a_good >= 18
        assert b_good >= 14
        assert c_good == 20


def test_determinism_byte_identical_json(battery, second_battery):
    with Criterion("byte-identical results across two battery runs"):
        for key in battery.results:
            j1 = battery.results[key].to_json()
            j2 = second_battery.results[key].to_json()
            assert j1.encode() == j2.encode(), f"nondeterministic result for {key}"


def test_cli_exit_code_contract(tmp_path):
    with Criterion("CLI exit-code contract (0/1/2)"):
        scene_a = make_scene("a", 0)
        scene_c = make_scene("c", 0)
        Image.fromarray(scene_a.image.px).save(tmp_path / "a0.png")
        Image.fromarray(scene_c.image.px).save(tmp_path / "c0.png")

        def run(*args):
            return subprocess.run(
                [sys.executable, "-m", "fintrace", *map(str, args)],
                capture_output=True,
                text=True,
            )

        e = scene_a.endpoints
        ok = run(
            "trace", "--image", tmp_path / "a0.png",
            "--start", f"{e.start.x},{e.start.y}", "--end", f"{e.end.x},{e.end.y}",
            "--out", tmp_path / "a0.outline.json",
        )
        assert ok.returncode == 0, ok.stderr
        outline = json.loads((tmp_path / "a0.outline.json").read_text())
        assert outline["method"] == "approach1"

        usage = run(
            "trace", "--image", tmp_path / "a0.png",
            "--start", f"{e.end.x},{e.end.y}", "--end", f"{e.start.x},{e.start.y}",
        )
        assert usage.returncode == 1
        assert "swimming" in usage.stderr

        ec = scene_c.endpoints
        fail = run(
            "trace", "--image", tmp_path / "c0.png",
            "--start", f"{ec.start.x},{ec.start.y}", "--end", f"{ec.end.x},{ec.end.y}",
            "--out", tmp_path / "c0.outline.json",
        )
        assert fail.returncode == 2
        diagnostics = json.loads((tmp_path / "c0.diagnostics.json").read_text())
        assert diagnostics["outcome"] == "failure"
