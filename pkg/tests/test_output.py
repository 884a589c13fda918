import csv
import json
import math
import os

import numpy as np
import pytest

from lpaisim.analysis import allan_deviation, fit_fringe, sweep_data_rate
from lpaisim.config import config_to_dict, default_config
from lpaisim.engine import simulate_mid_fringe
from lpaisim.errors import DataError
from lpaisim.output import (
    ALLAN_COLUMNS,
    MANIFEST_KIND,
    SERIES_COLUMNS,
    SWEEP_COLUMNS,
    allan_rows,
    fit_to_dict,
    output_path,
    read_manifest,
    series_rows,
    sweep_rows,
    write_csv,
    write_json,
    write_manifest,
    write_table,
)


class TestCsv:
    def test_floats_round_trip_exactly(self, tmp_path):
        path = tmp_path / "t.csv"
        values = [math.pi, 1e-300, 0.1 + 0.2, -1.5e17, 2e-8]
        write_csv(path, ("x",), [(v,) for v in values])
        with open(path, newline="") as fh:
            got = [float(row["x"]) for row in csv.DictReader(fh)]
        assert got == values

    def test_header_written(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ("a", "b"), [(1, 2)])
        first = open(path).readline().strip()
        assert first == "a,b"

    def test_unix_line_endings(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ("a",), [(1,), (2,)])
        raw = open(path, "rb").read()
        assert b"\r" not in raw


class TestJson:
    def test_numpy_scalars_become_plain(self, tmp_path):
        path = tmp_path / "t.json"
        write_json(path, {"a": np.float64(1.5), "b": np.int64(3), "c": np.arange(3)})
        data = json.load(open(path))
        assert data == {"a": 1.5, "b": 3, "c": [0, 1, 2]}

    def test_sorted_keys_and_trailing_newline(self, tmp_path):
        path = tmp_path / "t.json"
        write_json(path, {"zebra": 1, "apple": 2})
        text = open(path).read()
        assert text.index("apple") < text.index("zebra")
        assert text.endswith("\n")


class TestTables:
    def test_series_rows_shape(self, cfg100):
        series = simulate_mid_fringe(cfg100, shots=5, seed=1)
        rows = list(series_rows(series))
        assert len(rows) == 5
        assert all(len(r) == len(SERIES_COLUMNS) for r in rows)
        assert rows[0][0] == 0   # shot index

    def test_write_table_both_formats(self, tmp_path, cfg100):
        series = simulate_mid_fringe(cfg100, shots=4, seed=2)
        rows = list(series_rows(series))
        write_table(tmp_path / "s.csv", SERIES_COLUMNS, rows, "csv")
        write_table(tmp_path / "s.json", SERIES_COLUMNS, rows, "json")
        with open(tmp_path / "s.csv", newline="") as fh:
            csv_rows = list(csv.DictReader(fh))
        # JSON is column-oriented: {column: values}
        json_cols = json.load(open(tmp_path / "s.json"))
        assert len(csv_rows) == 4
        assert set(json_cols) == set(SERIES_COLUMNS)
        assert all(len(v) == 4 for v in json_cols.values())
        assert float(csv_rows[2]["population"]) == json_cols["population"][2]

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(DataError):
            write_table(tmp_path / "x.bin", ("a",), [(1,)], "parquet")

    def test_allan_rows(self):
        curve = allan_deviation(np.random.default_rng(0).normal(size=256), 0.01)
        rows = list(allan_rows(curve))
        assert len(rows) == len(curve)
        assert all(len(r) == len(ALLAN_COLUMNS) for r in rows)

    def test_sweep_rows_blank_for_missing_measurement(self, cfg100):
        result = sweep_data_rate(cfg100, rates=(100.0,), seed=3, mc_shots=0)
        row = list(sweep_rows(result))[0]
        assert len(row) == len(SWEEP_COLUMNS)
        measured = row[SWEEP_COLUMNS.index("sensitivity_measured")]
        assert measured == ""

    def test_fit_to_dict(self):
        phases = np.linspace(0, 2 * math.pi, 32)
        pops = 0.5 - 0.4 * np.cos(phases + 0.3)
        d = fit_to_dict(fit_fringe(phases, pops))
        assert d["contrast"] == pytest.approx(0.8)
        assert isinstance(d["n_points"], int)
        json.dumps(d)   # must be serializable as-is


class TestManifest:
    def test_round_trip(self, tmp_path, cfg100):
        path = tmp_path / "run.manifest.json"
        write_manifest(
            path,
            command="simulate",
            config_snapshot=config_to_dict(cfg100),
            seed=12345,
            options={"shots": 100, "mode": "mid-fringe"},
            fmt="csv",
            outputs=["series.csv"],
        )
        m = read_manifest(path)
        assert m["kind"] == MANIFEST_KIND
        assert m["command"] == "simulate"
        assert m["seed"] == 12345
        assert m["options"]["shots"] == 100
        assert m["config"]["data_rate"] == 100.0

    def test_manifest_carries_no_wall_clock(self, tmp_path, cfg100):
        # replay must not depend on when the original run happened
        path = tmp_path / "run.manifest.json"
        write_manifest(path, "simulate", config_to_dict(cfg100), 1, {}, "csv", [])
        text = open(path).read().lower()
        assert "time" not in json.loads(text).keys()
        assert "date" not in text

    def test_foreign_json_rejected(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"kind": "something-else"}')
        with pytest.raises(DataError):
            read_manifest(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(DataError):
            read_manifest(tmp_path / "absent.json")


class TestPaths:
    def test_output_path_creates_directories(self, tmp_path):
        p = output_path(tmp_path / "deep" / "nest", "series", "csv")
        assert p.endswith(os.path.join("deep", "nest", "series.csv"))
        assert os.path.isdir(os.path.dirname(p))
