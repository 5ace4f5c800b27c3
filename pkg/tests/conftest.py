"""Shared fixtures for the test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

from src.config import get_settings
from src.models.allocation import AllocationVector

SAMPLE_ROWS = {
    "x1": (99.0, 1.0, 0.0, 0.0, 0.0),
    "x2": (20.0, 20.0, 20.0, 20.0, 20.0),
    "x3": (60.0, 20.0, 10.0, 5.0, 5.0),
    "x4": (35.0, 35.0, 15.0, 11.0, 4.0),
}


@pytest.fixture
def sample_vectors() -> dict[str, AllocationVector]:
    """The four five-user sample allocations, keyed by label."""
    return {label: AllocationVector(values, label) for label, values in SAMPLE_ROWS.items()}


@pytest.fixture
def sample_csv(tmp_path: Path) -> Path:
    """Sample vectors written as a labelled CSV."""
    path = tmp_path / "samples.csv"
    lines = ["# sample allocations"] + [f"{label},{','.join(f'{v:g}' for v in values)}" for label, values in SAMPLE_ROWS.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def positive_csv(tmp_path: Path) -> Path:
    """Strictly positive, unequal vectors."""
    path = tmp_path / "positive.csv"
    path.write_text("fair,1,1.1\nmid,1,3\nskewed,1,10\n", encoding="utf-8")
    return path


@pytest.fixture
def region_json(tmp_path: Path) -> Path:
    """Two-user sample region."""
    path = tmp_path / "region.json"
    path.write_text('{"A": [[1, 0], [0, 1], [1, 1]], "b": [1, 4, 4.5], "names": ["user1", "user2"]}', encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def _stderr_logging():
    """Route loguru through whatever sys.stderr is current; main() may swap sinks."""
    yield
    logger.remove()
    logger.add(lambda message: sys.stderr.write(message), level="INFO")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def small_settings(monkeypatch: pytest.MonkeyPatch):
    """Settings with reduced suite sizes, cache cleared around the test."""
    monkeypatch.setenv("FAIRMETRIC_THREADS", "2")
    monkeypatch.setenv("SCHUR_TRIALS", "140")
    monkeypatch.setenv("AXIOM_SAMPLES", "12")
    monkeypatch.setenv("ALPHA_TRIALS", "40")
    monkeypatch.setenv("BOUNDS_TRIALS", "120")
    monkeypatch.setenv("SOLVER_STARTS", "4")
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.fixture
def warnings_logged() -> list[str]:
    """Messages loguru emits at WARNING or above during the test."""
    messages: list[str] = []
    handler_id = logger.add(lambda message: messages.append(message.record["message"]), level="WARNING")
    yield messages
    logger.remove(handler_id)
