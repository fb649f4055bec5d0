import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cbir.imaging import RgbImage


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        verdict = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\n[{verdict}] {name}", flush=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def random_image(rng):
    def make(width=32, height=24) -> RgbImage:
        return RgbImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))

    return make


@pytest.fixture
def constant_image():
    def make(r, g, b, width=8, height=8) -> RgbImage:
        px = np.zeros((height, width, 3), dtype=np.uint8)
        px[..., 0] = r
        px[..., 1] = g
        px[..., 2] = b
        return RgbImage(px)

    return make
