"""Tests for allocation loading and artifact writing."""

import json
import math

import numpy as np
import pandas as pd
import pytest

from src.errors import AllocationParseError
from src.models.allocation import AllocationVector
from src.models.tradeoff import ParetoFlag
from src.services.artifacts import ArtifactWriter, json_safe, load_region, parse_allocations


class TestCsvLoader:
    """One allocation per row, optional label column."""

    def test_labelled_and_unlabelled_rows(self, tmp_path):
        """Rows without a label are numbered."""
        path = tmp_path / "mixed.csv"
        path.write_text("a,1,2,3\n1,2,3\n", encoding="utf-8")
        vectors = parse_allocations(path)
        assert [label for label, _ in vectors] == ["a", "row2"]
        assert vectors[0][1].values == (1.0, 2.0, 3.0)

    def test_comments_and_blank_lines(self, sample_csv):
        """Comment lines are skipped."""
        vectors = dict(parse_allocations(sample_csv))
        assert list(vectors) == ["x1", "x2", "x3", "x4"]
        assert vectors["x2"].values == (20.0,) * 5

    def test_negative_entry_location(self, tmp_path):
        """Errors name the line, row label and column."""
        path = tmp_path / "bad.csv"
        path.write_text("# header\na,-1,2\n", encoding="utf-8")
        with pytest.raises(AllocationParseError) as excinfo:
            parse_allocations(path)
        assert "row 'a'" in excinfo.value.location
        assert "line 2" in excinfo.value.location
        assert "column 2" in str(excinfo.value)

    def test_non_numeric_entry(self, tmp_path):
        """Text after the label is refused."""
        path = tmp_path / "text.csv"
        path.write_text("a,1,x\n", encoding="utf-8")
        with pytest.raises(AllocationParseError, match="column 3"):
            parse_allocations(path)

    def test_all_zero_row(self, tmp_path):
        """Vectors must have a positive total."""
        path = tmp_path / "zero.csv"
        path.write_text("z,0,0\n", encoding="utf-8")
        with pytest.raises(AllocationParseError, match="row 'z'"):
            parse_allocations(path)

    def test_duplicate_label(self, tmp_path):
        """A repeated label is refused instead of overwriting the first row."""
        path = tmp_path / "dup.csv"
        path.write_text("a,1,2\na,3,4\n", encoding="utf-8")
        with pytest.raises(AllocationParseError, match="duplicate label") as excinfo:
            parse_allocations(path)
        assert "line 2" in excinfo.value.location
        assert "row 'a'" in excinfo.value.location
        assert "line 1" in str(excinfo.value)

    def test_missing_and_empty_files(self, tmp_path):
        """Missing files and files without rows are errors."""
        with pytest.raises(AllocationParseError, match="file not found"):
            parse_allocations(tmp_path / "absent.csv")
        empty = tmp_path / "empty.csv"
        empty.write_text("# nothing\n", encoding="utf-8")
        with pytest.raises(AllocationParseError, match="no allocation vectors"):
            parse_allocations(empty)


class TestJsonLoader:
    """{"vectors": {...}} or {"vectors": [...]}."""

    def test_labelled_mapping(self, tmp_path):
        """Keys become labels."""
        path = tmp_path / "vectors.json"
        path.write_text(json.dumps({"vectors": {"even": [1, 1], "skew": [1, 9]}}), encoding="utf-8")
        vectors = dict(parse_allocations(path))
        assert vectors["skew"].values == (1.0, 9.0)

    def test_list_of_vectors(self, tmp_path):
        """Lists are numbered; lengths may differ."""
        path = tmp_path / "vectors.json"
        path.write_text(json.dumps({"vectors": [[1, 2], [3, 4, 5]]}), encoding="utf-8")
        vectors = parse_allocations(path)
        assert [label for label, _ in vectors] == ["row1", "row2"]
        assert vectors[1][1].n == 3

    def test_non_numeric_entry(self, tmp_path):
        """Validation errors carry the JSON path."""
        path = tmp_path / "vectors.json"
        path.write_text(json.dumps({"vectors": {"a": [1, "x"]}}), encoding="utf-8")
        with pytest.raises(AllocationParseError) as excinfo:
            parse_allocations(path)
        assert "vectors" in excinfo.value.location

    def test_syntax_error(self, tmp_path):
        """Malformed JSON reports line and column."""
        path = tmp_path / "broken.json"
        path.write_text("{\n  bad", encoding="utf-8")
        with pytest.raises(AllocationParseError) as excinfo:
            parse_allocations(path)
        assert "line 2" in excinfo.value.location

    def test_duplicate_key(self, tmp_path):
        """Repeated labels in the mapping are refused."""
        path = tmp_path / "vectors.json"
        path.write_text('{"vectors": {"a": [1, 2], "a": [3, 4]}}', encoding="utf-8")
        with pytest.raises(AllocationParseError, match="duplicate label 'a'"):
            parse_allocations(path)

    def test_negative_entry(self, tmp_path):
        """Negative values are refused with their index."""
        path = tmp_path / "vectors.json"
        path.write_text(json.dumps({"vectors": {"a": [1, -2]}}), encoding="utf-8")
        with pytest.raises(AllocationParseError, match="entry 1"):
            parse_allocations(path)


class TestRegionLoader:
    """Feasible region files."""

    def test_loads_sample(self, region_json):
        """A, b and names are read."""
        region = load_region(region_json)
        assert region.n == 2
        assert region.names == ["user1", "user2"]
        assert region.b.tolist() == [1.0, 4.0, 4.5]

    def test_shape_error(self, tmp_path):
        """Mismatched shapes become parse errors."""
        path = tmp_path / "region.json"
        path.write_text('{"A": [[1, 0]], "b": [1, 2]}', encoding="utf-8")
        with pytest.raises(AllocationParseError):
            load_region(path)


class TestJsonSafe:
    """Conversion of results to JSON values."""

    def test_special_values(self):
        """Infinities become strings and NaN becomes null."""
        payload = {
            "f": -math.inf,
            "g": np.float64(math.inf),
            "mu": math.nan,
            "flag": ParetoFlag.AT_RISK,
            "x": AllocationVector.of([1, 2]),
            "grid": np.array([0.5, 2.0]),
        }
        assert json_safe(payload) == {
            "f": "-inf",
            "g": "inf",
            "mu": None,
            "flag": "at_risk",
            "x": [1.0, 2.0],
            "grid": [0.5, 2.0],
        }


class TestArtifactWriter:
    """CSV and JSON output."""

    def test_frame_spells_neg_inf(self, tmp_path):
        """-inf is written as the string -inf."""
        path = tmp_path / "out" / "sweep.csv"
        ArtifactWriter(path).write_frame(pd.DataFrame({"beta": [2.0], "x1": [-math.inf]}))
        assert path.read_text(encoding="utf-8") == "beta,x1\n2.0,-inf\n"

    def test_json_to_stdout(self, capsys):
        """"-" writes to stdout."""
        writer = ArtifactWriter("-")
        assert writer.path is None
        assert writer.sibling(".json") is None
        writer.write_json({"value": 1.5})
        assert json.loads(capsys.readouterr().out) == {"value": 1.5}

    def test_sibling(self, tmp_path):
        """Companion files share the stem."""
        writer = ArtifactWriter(tmp_path / "curve.csv")
        assert writer.sibling(".allocations.json") == tmp_path / "curve.allocations.json"
