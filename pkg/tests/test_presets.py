import json
import os
import tempfile

import pandas as pd
import pytest

import optobell as ob
from optobell import jobs


def test_preset_table():
    assert list(ob.PRESETS) == ["fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5", "microwave", "optical"]
    assert ob.get_preset("fig2b").extra["family"] == ("r_e", (0.7, 0.9, 0.99))
    assert [a.name for a in ob.get_preset("fig2a").axes] == ["alpha_i", "r"]
    assert ob.get_preset("fig3b").settings["r_e"] == 0.99

    microwave = ob.get_preset("microwave").settings
    assert microwave["n_e"] == microwave["n_i"] == pytest.approx(0.0146, abs=1e-4)
    assert microwave["n_m"] == pytest.approx(14.1, abs=0.1)
    optical = ob.get_preset("optical").settings
    assert optical["n_e"] == optical["n_i"] == pytest.approx(0.0125, abs=1e-4)
    assert optical["n_m"] == 0.0

    errmsg = ""
    try:
        ob.get_preset("fig9")
    except ob.ConfigError as exc:
        errmsg = str(exc)
    assert errmsg.startswith("unknown preset 'fig9'")


def test_contour_preset():
    with tempfile.TemporaryDirectory() as tmpdir:
        written = ob.run_preset("fig2a", tmpdir, resolution=6, overrides={"method": "rwa"})
        assert sorted(written) == ["area_csv", "area_json", "contour_csv", "contour_json", "csv", "json", "svg"]
        for path in written.values():
            assert os.path.dirname(path) == tmpdir
            assert os.path.basename(path).startswith("fig2a")

        grid = pd.read_csv(written["csv"])
        assert len(grid) == 36
        assert list(grid.columns[:2]) == ["alpha_i", "r"]
        area = pd.read_csv(written["area_csv"])
        assert len(area) == 1
        assert area["area"][0] > 0

        contour = pd.read_csv(written["contour_csv"])
        assert list(contour.columns[:4]) == ["polyline", "point", "alpha_i", "r"]
        assert contour["r"].between(0.001, 0.25).all()

        with open(written["json"]) as handle:
            assert json.load(handle)["config"]["method"] == "rwa"


def test_family_preset():
    with tempfile.TemporaryDirectory() as tmpdir:
        written = ob.run_preset("fig2b", tmpdir, resolution=5, overrides={"method": "rwa"}, svg=False)
        assert "csv" not in written
        assert "svg" not in written
        area = pd.read_csv(written["area_csv"])
        assert list(area["r_e"]) == [0.7, 0.9, 0.99]
        assert list(pd.read_csv(written["contour_csv"]).columns[:3]) == ["r_e", "polyline", "point"]


def test_noise_preset():
    with tempfile.TemporaryDirectory() as tmpdir:
        written = ob.run_preset("fig3a", tmpdir, resolution=3, formats=("csv",), overrides={"method": "rwa"})
        assert sorted(written) == ["csv", "svg"]
        curves = pd.read_csv(written["csv"])
        assert list(curves["bath"]) == ["m", "m", "m", "i", "i", "i", "e", "e", "e"]
        assert list(curves["n"][:3]) == [0.0, 0.025, 0.05]
        assert curves["r"].iloc[0] == pytest.approx(ob.optimal_r(0.9))
        assert (curves["stable"] == 1).all()


def _hardware_records(name, tmpdir):
    written = ob.run_preset(name, tmpdir, formats=("json",))
    with open(written["json"]) as handle:
        return json.load(handle)["records"]


@pytest.mark.parametrize("name, expected", [("microwave", (0.56, 0.58)), ("optical", (0.59, 0.60))])
def test_hardware_preset(name, expected):
    with tempfile.TemporaryDirectory() as tmpdir:
        records = _hardware_records(name, tmpdir)
    assert [rec["r_e"] for rec in records] == [0.9, 0.99]
    for rec, value in zip(records, expected):
        assert rec["F"] == pytest.approx(value, abs=0.02)
        assert rec["F"] < rec["F0"]
        assert rec["violation"] == 1
    assert records[0]["n_e"] == pytest.approx(ob.get_preset(name).settings["n_e"])


@pytest.mark.slow
def test_compare_rwa_preset():
    with tempfile.TemporaryDirectory() as tmpdir:
        written = ob.run_preset("fig5", tmpdir, workers=4, formats=("csv",), svg=False)
        table = pd.read_csv(written["csv"])
    assert list(table["kappa"]) == [0.01, 0.02, 0.1]
    assert (table["area_rwa"] > 0).all()
    # Wider cavities shrink the exact violation region.
    narrow, mid, wide = table["area_full"]
    assert narrow > mid > wide > 0
    assert table["max_displacement_cells"][0] <= 2


@pytest.mark.slow
def test_presets_identical_across_workers():
    with tempfile.TemporaryDirectory() as tmpdir:
        contents = []
        for workers in (1, 8):
            directory = os.path.join(tmpdir, str(workers))
            written = ob.run_preset("fig2b", directory, workers=workers, resolution=9, overrides={"method": "rwa"})
            files = {}
            for kind, path in written.items():
                with open(path, "rb") as handle:
                    files[kind] = handle.read()
            contents.append(files)
    assert "svg" in contents[0]
    assert contents[0] == contents[1]


def test_jobs():
    point = jobs.scatter_job({"method": "rwa"})
    assert point["commutator_residual"] < 1e-9
    assert point["entries"]["a_o"]["a_i"] == point["coefficients"]["A_d"]

    metrics = jobs.bell_job({"alpha_i": 0.1, "r": 0.1})
    assert metrics["stable"]
    assert metrics["violation"] == (metrics["F"] > 0.5)
    assert len(metrics["raw_angles"]) == 4

    best = jobs.optimal_r_job(0.9)
    assert best["r_opt"] == pytest.approx(0.106, abs=2e-3)
    assert best["n_T"] == pytest.approx(0.02797, abs=1e-4)

    assert jobs.float_list("0.1, 0.2,") == [0.1, 0.2]
    with pytest.raises(ob.ConfigError):
        jobs.float_list("0.1,x")
    with pytest.raises(ob.ConfigError):
        jobs.contour_job({}, (ob.Axis("r", 0.0, 0.2, 3),), "unused")
