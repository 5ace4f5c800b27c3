"""Allocation file loading and CSV/JSON artifact writing."""

import json
import math
import sys
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ValidationError

from src.errors import AllocationParseError, InvalidAllocationError
from src.models.allocation import AllocationVector
from src.models.tradeoff import FeasibleRegion


class AllocationFile(BaseModel):
    """JSON layout: {"vectors": {label: [values]}} or {"vectors": [[values], ...]}."""

    vectors: dict[str, list[float]] | list[list[float]]


class _DuplicateKeyError(ValueError):
    def __init__(self, key: str) -> None:
        super().__init__(key)
        self.key = key


def _unique_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    """json object hook refusing repeated keys."""
    result: dict[str, Any] = {}
    for key, value in pairs:
        if key in result:
            raise _DuplicateKeyError(key)
        result[key] = value
    return result


class AllocationLoader:
    """Reads labelled allocation vectors from CSV or JSON files."""

    def __init__(self, path: str | Path) -> None:
        """Initialize the loader.

        Args:
            path: CSV (one vector per row, optional label column) or JSON file.
        """
        self._file_path = Path(path)

    def load(self) -> list[tuple[str, AllocationVector]]:
        """Parse and validate every vector in the file."""
        if not self._file_path.exists():
            raise AllocationParseError("file not found", str(self._file_path))
        content = self._file_path.read_text(encoding="utf-8")
        if self._file_path.suffix.lower() == ".json":
            vectors = self._parse_json(content)
        else:
            vectors = self._parse_csv(content)
        if not vectors:
            raise AllocationParseError("no allocation vectors found", str(self._file_path))
        logger.info(f"Loaded {len(vectors)} allocations from {self._file_path}: {', '.join(label for label, _ in vectors)}")
        return vectors

    def _parse_csv(self, content: str) -> list[tuple[str, AllocationVector]]:
        vectors = []
        seen: dict[str, int] = {}
        data_row = 0
        for line_number, raw in enumerate(content.splitlines(), start=1):
            line = raw.strip()
            # Skip comments and empty lines
            if not line or line.startswith("#"):
                continue
            data_row += 1
            fields = [field.strip() for field in line.split(",")]
            label = f"row{data_row}"
            first_value = 0
            try:
                float(fields[0])
            except ValueError:
                label = fields[0]
                first_value = 1

            location = f"{self._file_path.name}, line {line_number}, row '{label}'"
            if label in seen:
                raise AllocationParseError(f"duplicate label (first used on line {seen[label]})", location)
            seen[label] = line_number
            if len(fields) <= first_value:
                raise AllocationParseError("empty row", location)
            values = []
            for column, text in enumerate(fields[first_value:], start=first_value + 1):
                try:
                    value = float(text)
                except ValueError as e:
                    raise AllocationParseError(f"column {column}: '{text}' is not a number", location) from e
                if not math.isfinite(value) or value < 0:
                    raise AllocationParseError(f"column {column}: {text} is not a non-negative number", location)
                values.append(value)
            vectors.append((label, self._validated(values, label, location)))
        return vectors

    def _parse_json(self, content: str) -> list[tuple[str, AllocationVector]]:
        name = self._file_path.name
        try:
            raw = json.loads(content, object_pairs_hook=_unique_keys)
        except json.JSONDecodeError as e:
            raise AllocationParseError(e.msg, f"{name}, line {e.lineno}, column {e.colno}") from e
        except _DuplicateKeyError as e:
            raise AllocationParseError(f"duplicate label '{e.key}'", f"{name}, vectors") from e
        try:
            parsed = AllocationFile.model_validate(raw)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(part) for part in first["loc"])
            raise AllocationParseError(f"{first['msg']} (ragged or non-numeric entry)", f"{name}, {where}") from e

        if isinstance(parsed.vectors, dict):
            items = list(parsed.vectors.items())
        else:
            items = [(f"row{k}", values) for k, values in enumerate(parsed.vectors, start=1)]

        vectors = []
        for label, values in items:
            location = f"{name}, vectors.{label}"
            for index, value in enumerate(values):
                if not math.isfinite(value) or value < 0:
                    raise AllocationParseError(f"entry {index}: {value} is not a non-negative number", location)
            vectors.append((label, self._validated(values, label, location)))
        return vectors

    @staticmethod
    def _validated(values: list[float], label: str, location: str) -> AllocationVector:
        try:
            return AllocationVector(tuple(values), label)
        except InvalidAllocationError as e:
            raise AllocationParseError(str(e), location) from e


def parse_allocations(path: str | Path) -> list[tuple[str, AllocationVector]]:
    """Labelled allocations from a CSV or JSON file."""
    return AllocationLoader(path).load()


def load_region(path: str | Path) -> FeasibleRegion:
    """Feasible region from JSON {"A": [[...]], "b": [...], "names": [...]}."""
    file_path = Path(path)
    if not file_path.exists():
        raise AllocationParseError("file not found", str(file_path))
    content = file_path.read_text(encoding="utf-8")
    try:
        return FeasibleRegion.model_validate_json(content)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "region"
        raise AllocationParseError(first["msg"], f"{file_path.name}, {where}") from e


def json_safe(value: Any) -> Any:
    """Convert results to JSON-ready values; infinities become "-inf" / "inf"."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, AllocationVector):
        return [json_safe(v) for v in value.values]
    if is_dataclass(value) and not isinstance(value, type):
        return json_safe(asdict(value))
    if isinstance(value, BaseModel):
        return json_safe(value.model_dump())
    if isinstance(value, dict):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, np.ndarray):
        return [json_safe(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        return json_safe(value.item())
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
    return value


class ArtifactWriter:
    """Writes CSV plot data and JSON reports to a file or stdout."""

    def __init__(self, output_path: str | Path | None = None) -> None:
        """Initialize the writer.

        Args:
            output_path: Destination file; None or "-" writes to stdout.
        """
        self._path = None if output_path in (None, "-") else Path(output_path)

    @property
    def path(self) -> Path | None:
        return self._path

    def _emit(self, text: str, path: Path | None = None) -> None:
        target = path or self._path
        if target is None:
            sys.stdout.write(text)
            return
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {target}")

    def write_frame(self, frame: pd.DataFrame) -> None:
        """CSV with -inf spelled as the string "-inf"."""
        text = frame.to_csv(index=False, lineterminator="\n")
        self._emit(text)

    def write_json(self, payload: Any, path: Path | None = None) -> None:
        """Pretty JSON with a trailing newline."""
        self._emit(json.dumps(json_safe(payload), indent=2, sort_keys=False) + "\n", path)

    def sibling(self, suffix: str) -> Path | None:
        """Companion artifact path next to the main output (None for stdout)."""
        if self._path is None:
            return None
        return self._path.with_suffix(suffix)
