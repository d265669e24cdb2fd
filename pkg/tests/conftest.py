"""Shared fixtures: synthetic scenes and one full fixture-battery run per session."""

from __future__ import annotations

import time
from dataclasses import dataclass

import pytest

from fintrace.pipeline import TraceRequest, TraceResult, autotrace
from fintrace.synth import FAMILIES, SynthScene, make_scene

BATTERY_SEEDS = 20


@dataclass
class BatteryRun:
    results: dict[tuple[str, int], TraceResult]
    scenes: dict[tuple[str, int], SynthScene]
    elapsed: float


def run_battery(seeds: int = BATTERY_SEEDS) -> BatteryRun:
    results: dict[tuple[str, int], TraceResult] = {}
    scenes: dict[tuple[str, int], SynthScene] = {}
    start = time.perf_counter()
    for family in FAMILIES:
        for seed in range(seeds):
            scene = make_scene(family, seed)
            scenes[(family, seed)] = scene
            results[(family, seed)] = autotrace(
                TraceRequest(image=scene.image, endpoints=scene.endpoints)
            )
    return BatteryRun(results=results, scenes=scenes, elapsed=time.perf_counter() - start)


@pytest.fixture(scope="session")
def battery() -> BatteryRun:
    return run_battery()


@pytest.fixture(scope="session")
def scene_a0() -> SynthScene:
    return make_scene("a", 0)


@pytest.fixture(scope="session")
def scene_b0() -> SynthScene:
    return make_scene("b", 0)


@pytest.fixture(scope="session")
def scene_c0() -> SynthScene:
    return make_scene("c", 0)
