"""Exit-code contract, file IO, and subcommand plumbing."""

import json

import numpy as np
import pytest

from caloronkit.builders import k1j0_data
from caloronkit.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, dispatch, parse_grid
from caloronkit.errors import SchemaError
from caloronkit.moduli import MonadData, random_generic
from caloronkit.nahmdata import NahmData
from caloronkit.transform import FieldGrid


@pytest.fixture(scope="module")
def nahm_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixtures") / "k1j0.nahm.json"
    k1j0_data().save(path)
    return str(path)


class TestParseGrid:
    def test_four_axes(self):
        t, x1, x2, x3 = parse_grid("t=0:0.5:1,x1=-1:1:1,x2=0:1:0,x3=0:1:0")
        assert np.allclose(t, [0.0, 0.5, 1.0])
        assert np.allclose(x1, [-1.0, 0.0, 1.0])
        assert x2.size == 1 and x3.size == 1

    def test_malformed_axis(self):
        with pytest.raises(SchemaError):
            parse_grid("t=0:0.5,x1=0:1:0,x2=0:1:0,x3=0:1:0")

    def test_missing_axis(self):
        with pytest.raises(SchemaError):
            parse_grid("t=0:1:1,x1=0:1:0,x2=0:1:0")

    def test_nonpositive_step(self):
        with pytest.raises(SchemaError):
            parse_grid("t=0:0:1,x1=0:1:0,x2=0:1:0,x3=0:1:0")

    def test_t_range_beyond_one_period(self):
        with pytest.raises(SchemaError):
            parse_grid("t=0:1:8,x1=0:1:0,x2=0:1:0,x3=0:1:0", period=np.pi)


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self):
        assert dispatch(["frobnicate"]) == EXIT_USAGE

    def test_missing_file_is_usage_error(self, tmp_path):
        assert dispatch(["validate", str(tmp_path / "nope.json")]) == EXIT_USAGE

    def test_truncated_json_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"mu0": 2.0, "mu1":')
        assert dispatch(["validate", str(bad)]) == EXIT_USAGE

    def test_invalid_profile_is_check_failure(self, tmp_path):
        obj = k1j0_data().to_json()
        obj["mu1"] = 1.5  # violates mu1 < mu0 - mu1
        bad = tmp_path / "bad_profile.json"
        bad.write_text(json.dumps(obj))
        assert dispatch(["validate", str(bad)]) == EXIT_FAIL


class TestValidate:
    def test_fixture_passes(self, nahm_file):
        assert dispatch(["validate", nahm_file]) == EXIT_OK

    def test_json_report_lists_checks(self, nahm_file, capsys):
        assert dispatch(["validate", nahm_file, "--json"]) == EXIT_OK
        rep = json.loads(capsys.readouterr().out)
        assert rep["ok"] is True
        for c in rep["checks"]:
            assert {"name", "value", "threshold"} <= set(c)

    def test_broken_data_fails(self, tmp_path):
        data = k1j0_data()
        data.large.T1 = data.large.T1 + 0.01
        path = tmp_path / "broken.json"
        data.save(path)
        assert dispatch(["validate", str(path)]) == EXIT_FAIL


class TestFlow:
    def test_round_trip_revalidates(self, nahm_file, tmp_path):
        out = tmp_path / "reflow.json"
        assert dispatch(["flow", "--in", nahm_file, "--out", str(out),
                         "--steps", "500"]) == EXIT_OK
        assert dispatch(["validate", str(out)]) == EXIT_OK
        back = NahmData.load(out)
        orig = k1j0_data()
        assert np.max(np.abs(back.large.T1 - orig.large.T1)) < 1e-8


class TestSpectral:
    def test_writes_curves_and_divisors(self, nahm_file, tmp_path):
        out = tmp_path / "curves.json"
        assert dispatch(["spectral", "--in", nahm_file,
                         "--out", str(out)]) == EXIT_OK
        obj = json.loads(out.read_text())
        assert obj["s0"]["eta_degree"] == 1
        assert obj["s1"]["eta_degree"] == 1
        assert len(obj["D"]) + len(obj["Dprime"]) == 2


class TestTransformAndSdcheck:
    def test_transform_then_sdcheck(self, nahm_file, tmp_path):
        field = tmp_path / "field.json"
        grid = ("t=0.1:0.1:0.5,x1=0:0.1:0.4,"
                "x2=-0.2:0.1:0.2,x3=0.2:0.1:0.6")
        assert dispatch(["transform", "--in", nahm_file, "--grid", grid,
                         "--out", str(field), "-N", "32"]) == EXIT_OK
        obj = json.loads(field.read_text())
        assert np.asarray(obj["A"]).shape[:4] == (3, 3, 3, 3)
        # the coarse N=32 run is only checked loosely for self-duality
        assert dispatch(["sdcheck", "--tol", "0.5", str(field)]) == EXIT_OK

    def test_sdcheck_on_synthetic_grids(self, tmp_path, rng):
        axes = tuple(np.linspace(0, 0.2, 3) for _ in range(4))
        half = rng.standard_normal((3, 3, 3, 3, 3, 2, 2)) \
            + 1j * rng.standard_normal((3, 3, 3, 3, 3, 2, 2))
        sd = tmp_path / "sd.json"
        with open(sd, "w") as fh:
            json.dump(FieldGrid(
                axes=axes, F=np.concatenate([half, half], axis=4)).to_json(),
                fh)
        assert dispatch(["sdcheck", str(sd)]) == EXIT_OK
        bad = tmp_path / "bad.json"
        with open(bad, "w") as fh:
            json.dump(FieldGrid(
                axes=axes,
                F=np.concatenate([half, np.roll(half, 1, axis=0)],
                                 axis=4)).to_json(), fh)
        assert dispatch(["sdcheck", str(bad)]) == EXIT_FAIL

    def test_sdcheck_schema_error(self, tmp_path):
        bad = tmp_path / "notagrid.json"
        bad.write_text("{}")
        assert dispatch(["sdcheck", str(bad)]) == EXIT_USAGE


class TestModuli:
    def test_gen_then_check(self, tmp_path):
        out = tmp_path / "m.json"
        assert dispatch(["moduli", "gen", "--k", "2", "--j", "1",
                         "--seed", "4", "--out", str(out)]) == EXIT_OK
        assert dispatch(["moduli", "check", str(out)]) == EXIT_OK

    def test_perturbed_residual_fails(self, tmp_path):
        m = random_generic(2, 1, 4)
        m.A = m.A + 1e-3
        path = tmp_path / "perturbed.json"
        m.save(path)
        assert dispatch(["moduli", "check", str(path)]) == EXIT_FAIL

    def test_check_json_reports_booleans(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        random_generic(1, 0, 0).save(path)
        assert dispatch(["moduli", "check", str(path), "--json"]) == EXIT_OK
        rep = json.loads(capsys.readouterr().out)
        assert rep["ok"] is True
        assert set(rep["genericity"]) >= {"injective_columns",
                                          "surjective_rows",
                                          "surjective_bordered",
                                          "krylov_isomorphism"}
