import os

import numpy as np
import pytest

from genberan import (ConfigError, Dataset, EmptyAfterFiltering,
                      MissingColumn, NonNumericCell)
from genberan.io import (MGUS2_SCHEMA, CovariateScaler, DatasetSchema,
                         RunConfig, format_float, load_csv, save_dataset_csv,
                         write_rows)

from conftest import random_hard_dataset

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "clinical_sample.csv")


# --- numeric formatting ----------------------------------------------------

def test_format_float_round_trips_doubles(rng):
    for v in [0.1, 1 / 3, np.pi, 1e-300, 1e300, -2.5, 0.0]:
        assert float(format_float(v)) == v
    for v in rng.normal(size=200) * 10.0 ** rng.integers(-10, 10, 200):
        assert float(format_float(v)) == v


def test_write_rows_lf_endings(tmp_path):
    path = tmp_path / "out.csv"
    write_rows(path, ["a", "b"], [[1.0, "x"], [0.5, "y"]])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines()[0] == "a,b"


# --- schema ---------------------------------------------------------------

def test_schema_validation():
    with pytest.raises(ValueError):
        DatasetSchema("t", ("x1",))  # neither event nor probability
    with pytest.raises(ValueError):
        DatasetSchema("t", ("x1",), event_column="e", probability_column="p")
    with pytest.raises(ValueError):
        DatasetSchema("t", ("t",), event_column="e")  # duplicate name
    with pytest.raises(ValueError):
        DatasetSchema("t", (), event_column="e")
    with pytest.raises(ValueError):
        DatasetSchema("t", ("x1",), event_column="e", na_policy="ignore")


def test_default_clinical_schema():
    assert MGUS2_SCHEMA.time_column == "futime"
    assert MGUS2_SCHEMA.event_column == "death"
    assert MGUS2_SCHEMA.covariate_columns == ("age", "creat", "hgb", "mspike")


# --- ingestion -------------------------------------------------------------

def test_load_fixture_drops_na_rows():
    ds, report = load_csv(FIXTURE, MGUS2_SCHEMA)
    assert report.loaded == 27 and report.dropped == 3
    assert ds.n == 27 and ds.p == 4 and ds.hard
    assert np.all((ds.x >= 0.0) & (ds.x <= 1.0))  # covariates rescaled


def test_load_fixture_na_policy_fail():
    schema = DatasetSchema("futime", ("age", "creat", "hgb", "mspike"),
                           event_column="death", na_policy="fail")
    with pytest.raises(NonNumericCell, match="creat"):
        load_csv(FIXTURE, schema)


def test_load_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("futime,death\n1,0\n")
    with pytest.raises(MissingColumn, match="age"):
        load_csv(path, MGUS2_SCHEMA)


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(MissingColumn):
        load_csv(path, MGUS2_SCHEMA)


def test_load_non_numeric_cell_reports_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,e,x1\n1.0,1,0.5\n2.0,0,oops\n")
    schema = DatasetSchema("t", ("x1",), event_column="e")
    with pytest.raises(NonNumericCell, match=":3:"):
        load_csv(path, schema)


def test_load_nonbinary_event_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,e,x1\n1.0,0.5,0.2\n")
    schema = DatasetSchema("t", ("x1",), event_column="e")
    with pytest.raises(NonNumericCell, match="binary"):
        load_csv(path, schema)


def test_load_all_rows_filtered(tmp_path):
    path = tmp_path / "gone.csv"
    path.write_text("t,e,x1\n1.0,1,NA\n2.0,0,\n")
    schema = DatasetSchema("t", ("x1",), event_column="e")
    with pytest.raises(EmptyAfterFiltering):
        load_csv(path, schema)


def test_probability_column_yields_soft_dataset(tmp_path):
    path = tmp_path / "soft.csv"
    path.write_text("t,p,x1\n1.0,0.3,0.2\n2.0,0.9,0.8\n")
    schema = DatasetSchema("t", ("x1",), probability_column="p")
    ds, _ = load_csv(path, schema)
    assert not ds.hard
    np.testing.assert_allclose(ds.indicator, [0.3, 0.9])


# --- export / round trip ---------------------------------------------------

def test_export_import_round_trip(tmp_path, rng):
    ds = random_hard_dataset(rng, n=25, p=3)
    path = tmp_path / "ds.csv"
    save_dataset_csv(ds, path)
    schema = DatasetSchema("t", ("x1", "x2", "x3"), event_column="event")
    back, report = load_csv(path, schema)
    assert report.dropped == 0
    np.testing.assert_array_equal(back.t, ds.t)
    np.testing.assert_array_equal(back.indicator, ds.indicator)
    np.testing.assert_array_equal(back.x, ds.x)  # unit cube -> identity scale


def test_export_rescales_with_scaler(tmp_path):
    ds = Dataset.hard_indicators([1.0, 2.0], [[0.0], [1.0]], [1, 0])
    scaler = CovariateScaler(np.array([10.0]), np.array([20.0]))
    path = tmp_path / "ds.csv"
    save_dataset_csv(ds, path, scaler)
    lines = path.read_text().splitlines()
    assert lines[1].split(",")[2] == "10"
    assert lines[2].split(",")[2] == "20"


def test_covariate_scaler_identity_on_unit_cube(rng):
    x = rng.uniform(0, 1, size=(30, 2))
    sc = CovariateScaler.fit(x)
    np.testing.assert_array_equal(sc.transform(x), x)
    y = rng.normal(50, 10, size=(30, 2))
    sc2 = CovariateScaler.fit(y)
    z = sc2.transform(y)
    assert z.min() == 0.0 and z.max() == 1.0
    np.testing.assert_allclose(sc2.inverse(z), y, rtol=1e-12)


# --- run configuration -----------------------------------------------------

def test_config_defaults_and_round_trip():
    cfg = RunConfig()
    assert cfg.get("run", "seed") == 0
    text = cfg.to_text()
    again = RunConfig.from_text(text)
    assert again.values == cfg.values
    assert again.to_text() == text  # parse -> serialize is the identity


def test_config_unknown_section_and_key():
    with pytest.raises(ConfigError):
        RunConfig.from_text("[mystery]\nfoo = 1\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("[run]\nfoo = 1\n")
    with pytest.raises(ConfigError):
        RunConfig().set("run", "foo", 1)


def test_config_bad_value():
    with pytest.raises(ConfigError):
        RunConfig.from_text("[run]\nseed = many\n")


def test_config_grid_and_test_points():
    cfg = RunConfig()
    np.testing.assert_allclose(cfg.grid_values(),
                               np.arange(1, 11) * 0.1, atol=1e-12)
    assert cfg.x_test_points() == [0.3, 0.5, 0.7]
    cfg.set("study", "x_test", "0.1,0.2;0.3,0.4")
    assert cfg.x_test_points() == [(0.1, 0.2), (0.3, 0.4)]
    cfg.set("study", "x_test", "0.5")
    assert cfg.x_test_points() == [0.5]


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig()
    cfg.set("run", "seed", 99)
    path = tmp_path / "run.cfg"
    cfg.to_file(path)
    back = RunConfig.from_file(path)
    assert back.get("run", "seed") == 99
