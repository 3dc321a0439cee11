import json
import subprocess
import sys

import numpy as np
import pytest
from scipy.signal import lfilter

from fracid import cli, modelio
from fracid.cli import RunConfig, build_config, build_parser, main, read_config_file
from fracid.ctrl_design import ContinuousOrderPid
from fracid.exceptions import ValidationError
from fracid.fotf import CommensurateFoTf, FrequencyResponse, default_grid, eval_fo
from fracid.orders import RationalOrder
from fracid.sysid_time import TimeSeries


def write_plant(path, q="1/4", num=(1.0,), den=(1.0, 1.0, 1.0)):
    tf = CommensurateFoTf(RationalOrder.parse(q), list(num), list(den))
    modelio.save_model(path, tf)
    return tf


def write_controller(path, q="1/4", gains=(0.1, 0.2)):
    pid = ContinuousOrderPid(RationalOrder.parse(q), list(gains))
    modelio.save_model(path, pid)
    return pid


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig().validate()
        assert cfg.wmin == 1e-3
        assert cfg.count == 100
        assert cfg.memory == "full"
        assert cfg.out == "."

    @pytest.mark.parametrize(
        "kw",
        [
            {"wmin": 0.0},
            {"wmax": 1e-4},
            {"wmin": np.inf},
            {"count": 1},
            {"spacing": "cubic"},
            {"h": 0.0},
            {"T": 0.01},
            {"memory": -3},
            {"memory": 2.5},
            {"restarts": 0},
            {"jobs": 0},
        ],
    )
    def test_validate_rejects(self, kw):
        with pytest.raises(ValidationError):
            RunConfig(**kw).validate()

    def test_grid_spacing(self):
        log = RunConfig(wmin=1.0, wmax=100.0, count=3).grid()
        assert np.allclose(log, [1.0, 10.0, 100.0])
        lin = RunConfig(wmin=1.0, wmax=3.0, count=3, spacing="linear").grid()
        assert np.allclose(lin, [1.0, 2.0, 3.0])


class TestConfigFile:
    def test_parse(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# grid\nwmin = 0.01\ncount = 25\nmemory = full\n\nout = results # trailing\n"
        )
        values = read_config_file(path)
        assert values == {"wmin": 0.01, "count": 25, "memory": "full", "out": "results"}

    def test_unknown_key_reports_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("wmin = 0.01\nwibble = 3\n")
        with pytest.raises(ValidationError, match=r":2: unknown key 'wibble'"):
            read_config_file(path)

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("count = many\n")
        with pytest.raises(ValidationError, match=r":1: bad value for count"):
            read_config_file(path)

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("just a line\n")
        with pytest.raises(ValidationError, match="expected 'key = value'"):
            read_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="cannot read config file"):
            read_config_file(tmp_path / "none.cfg")

    def test_precedence_defaults_file_flags(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("count = 5\nwmin = 0.5\n")
        args = build_parser().parse_args(
            ["freqresp", "--model", "m.json", "--config", str(path), "--count", "7"]
        )
        cfg = build_config(args)
        assert cfg.count == 7  # flag beats file
        assert cfg.wmin == 0.5  # file beats default
        assert cfg.wmax == RunConfig().wmax  # untouched default


class TestExitCodes:
    def test_no_command(self, capsys):
        assert main([]) == 1

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "fractional-order" in capsys.readouterr().out

    def test_validation_error_is_one(self, tmp_path, capsys):
        rc = main(["analyze", "--fixture", "bogus", "--out", str(tmp_path)])
        assert rc == 1
        assert "fracid: validation error:" in capsys.readouterr().err

    def test_missing_model_file_is_one(self, tmp_path, capsys):
        rc = main(["analyze", "--model", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path)])
        assert rc == 1
        assert "cannot read model file" in capsys.readouterr().err

    def test_numerical_failure_is_two(self, tmp_path, capsys):
        # 1/(s^2+1) has a pole exactly at the grid edge omega = 1
        path = tmp_path / "osc.json"
        write_plant(path, q="1", num=(1.0,), den=(1.0, 0.0, 1.0))
        rc = main(["freqresp", "--model", str(path), "--wmin", "1", "--wmax", "10",
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "fracid: numerical failure:" in capsys.readouterr().err

    def test_config_error_is_one(self, tmp_path, capsys):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("nope = 1\n")
        rc = main(["analyze", "--fixture", "g30_100", "--config", str(cfgfile),
                   "--out", str(tmp_path)])
        assert rc == 1


class TestIdentifyDiscrete:
    def make_csv(self, path, seed=0):
        rng = np.random.default_rng(seed)
        n = 300
        u = rng.choice([-1.0, 1.0], size=n)
        y = lfilter([0.0, 0.5, 0.25], [1.0, -1.5, 0.7], u)
        data = TimeSeries(0.1 * np.arange(n), u, y, 0.1)
        modelio.write_timeseries_csv(path, data)

    def test_end_to_end(self, tmp_path, capsys):
        csv = tmp_path / "data.csv"
        self.make_csv(csv)
        rc = main([
            "identify-discrete", "--data", str(csv),
            "--spec", "arx:na=2,nb=2,nk=1",
            "--spec", "arx:na=1,nb=1,nk=1",
            "--out", str(tmp_path),
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "best candidate" in out
        assert (tmp_path / "identify_discrete.txt").exists()
        best = modelio.load_model(tmp_path / "best_model.json")
        assert np.allclose(best.den, [1.0, -1.5, 0.7], atol=1e-6)

    def test_bad_spec(self, tmp_path, capsys):
        csv = tmp_path / "data.csv"
        self.make_csv(csv)
        rc = main(["identify-discrete", "--data", str(csv),
                   "--spec", "arx:frobs=2", "--out", str(tmp_path)])
        assert rc == 1
        assert "bad spec item" in capsys.readouterr().err

    def test_missing_data_flag(self, capsys):
        assert main(["identify-discrete", "--spec", "arx:na=1,nb=1"]) == 1


class TestFreqresp:
    def test_fo_model(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        tf = write_plant(path, q="1/2", den=(1.0, 0.0, 1.0))
        rc = main(["freqresp", "--model", str(path), "--out", str(tmp_path),
                   "--wmin", "0.01", "--wmax", "10", "--count", "20"])
        assert rc == 0
        back = modelio.read_freqresp_csv(tmp_path / "freqresp.csv")
        assert len(back) == 20
        assert np.allclose(back.values, eval_fo(tf, back.omegas), rtol=1e-12)

    def test_controller_model(self, tmp_path):
        path = tmp_path / "c.json"
        write_controller(path)
        rc = main(["freqresp", "--model", str(path), "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "freqresp.csv").exists()


class TestIdentifyFo:
    def test_self_test(self, capsys):
        assert main(["identify-fo", "--self-test", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "self-test (seed 3)" in out and "PASS" in out

    def test_fixture_sweep(self, tmp_path, capsys):
        rc = main(["identify-fo", "--fixture", "g30_100", "--q", "1/2",
                   "--max-order", "1", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "source: fixture g30_100" in out
        assert "best: q = 1/2" in out
        for name in ("sweep.csv", "orderdist.csv", "orderdist.svg",
                      "best_fo_model.json"):
            assert (tmp_path / name).exists(), name
        best = modelio.load_model(tmp_path / "best_fo_model.json")
        assert best.q == RationalOrder(1, 2)

    def test_data_csv_round_trip(self, tmp_path):
        tf = CommensurateFoTf(RationalOrder(1, 2), [1.0], [1.0, 0.0, 1.0])
        grid = default_grid()
        csv = tmp_path / "fr.csv"
        modelio.write_freqresp_csv(csv, FrequencyResponse(grid, eval_fo(tf, grid)))
        rc = main(["identify-fo", "--data", str(csv), "--q", "1/2",
                   "--max-order", "1", "--weighting", "uniform",
                   "--out", str(tmp_path)])
        assert rc == 0
        best = modelio.load_model(tmp_path / "best_fo_model.json")
        den = best.den / best.den[0]
        assert np.allclose(den, [1.0, 0.0, 1.0], atol=1e-6)

    def test_indivisible_q(self, tmp_path, capsys):
        rc = main(["identify-fo", "--fixture", "g30_100", "--q", "1/3",
                   "--max-order", "1/2", "--out", str(tmp_path)])
        assert rc == 1
        assert "does not divide" in capsys.readouterr().err

    def test_data_and_fixture_exclusive(self, tmp_path, capsys):
        rc = main(["identify-fo", "--data", "x.csv", "--fixture", "g30_100"])
        assert rc == 1

    def test_no_source(self, capsys):
        assert main(["identify-fo"]) == 1


class TestAnalyze:
    def test_fixture(self, tmp_path, capsys):
        rc = main(["analyze", "--fixture", "g30_100", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "min pole angle: 30.7890 deg" in out
        assert "stable: true" in out
        assert (tmp_path / "analyze.txt").exists()
        assert (tmp_path / "pole_zero.svg").exists()

    def test_model_file(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        write_plant(path, q="1/2", den=(1.0, 0.0, 1.0))
        rc = main(["analyze", "--model", str(path), "--out", str(tmp_path)])
        assert rc == 0
        assert "min pole angle: 90.0000 deg" in capsys.readouterr().out

    def test_controller_file_rejected(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        write_controller(path)
        rc = main(["analyze", "--model", str(path), "--out", str(tmp_path)])
        assert rc == 1
        assert "holds a controller" in capsys.readouterr().err

    def test_both_sources_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        write_plant(path)
        assert main(["analyze", "--model", str(path), "--fixture", "g30_100"]) == 1


class TestTune:
    def test_toy_plant_end_to_end(self, tmp_path, capsys):
        plant = tmp_path / "plant.json"
        write_plant(plant, q="1/4", den=(1.0, 1.0, 1.0))
        rc = main(["tune", "--plant", str(plant), "--restarts", "1",
                   "--max-iter", "400", "--seed", "0", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "restarts (index, objective, hyperdamped, converged):" in out
        for name in ("controller.json", "tune_minangles.csv", "tune_report.txt"):
            assert (tmp_path / name).exists(), name
        ctrl = modelio.load_model(tmp_path / "controller.json")
        assert isinstance(ctrl, ContinuousOrderPid)
        assert len(ctrl.gains) == 11

    def test_fixtures_and_plant_exclusive(self, tmp_path, capsys):
        plant = tmp_path / "plant.json"
        write_plant(plant)
        rc = main(["tune", "--fixtures", "--plant", str(plant)])
        assert rc == 1
        assert "mutually exclusive" in capsys.readouterr().err

    def test_no_plants(self, capsys):
        assert main(["tune"]) == 1

    def test_bad_target(self, tmp_path, capsys):
        plant = tmp_path / "plant.json"
        write_plant(plant)
        rc = main(["tune", "--plant", str(plant), "--target", "500",
                   "--restarts", "1", "--max-iter", "10", "--out", str(tmp_path)])
        assert rc == 1


class TestVerify:
    def test_fixture_bank(self, tmp_path, capsys):
        rc = main(["verify", "--fixtures", "--fixture-controller",
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        # the bundled controller leaves the g30_90 loop with a pole on the
        # cone boundary, so the bank does not verify as stable
        assert "overall min angle : 0.0000 deg" in out
        assert "all stable        : false" in out
        assert "all hyperdamped   : false" in out
        report = (tmp_path / "verify_report.txt").read_text()
        for label in ("g30_100", "g50_70"):
            assert f"{label:24s} min |arg(w)| =" in report
        csv_head = (tmp_path / "verify_minangles.csv").read_text().splitlines()[0]
        assert csv_head == "plant,min_angle_deg,stable,all_hyperdamped"

    def test_controller_file(self, tmp_path):
        plant = tmp_path / "plant.json"
        ctrl = tmp_path / "ctrl.json"
        write_plant(plant, q="1/4", den=(1.0, 1.0, 1.0))
        write_controller(ctrl, q="1/4", gains=(1e-4, 1e-4))
        rc = main(["verify", "--plant", str(plant), "--controller", str(ctrl),
                   "--out", str(tmp_path)])
        assert rc == 0

    def test_controller_sources_exclusive(self, tmp_path, capsys):
        ctrl = tmp_path / "ctrl.json"
        write_controller(ctrl)
        rc = main(["verify", "--fixtures", "--controller", str(ctrl),
                   "--fixture-controller"])
        assert rc == 1

    def test_plant_file_as_controller_rejected(self, tmp_path, capsys):
        plant = tmp_path / "plant.json"
        write_plant(plant)
        rc = main(["verify", "--fixtures", "--controller", str(plant)])
        assert rc == 1
        assert "does not hold a controller" in capsys.readouterr().err


class TestSimulate:
    def test_track(self, tmp_path, capsys):
        rc = main(["simulate", "--fixture", "g30_100", "--fixture-controller",
                   "--scenario", "track", "--h", "0.1", "--T", "20",
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "scenario : track on g30_100" in out
        assert "overshoot" in out and "%" in out
        for name in ("sim_track.csv", "sim_track_y.svg", "sim_track_u.svg"):
            assert (tmp_path / name).exists(), name

    def test_disturb(self, tmp_path, capsys):
        rc = main(["simulate", "--fixture", "g30_100", "--fixture-controller",
                   "--scenario", "disturb", "--h", "0.1", "--T", "20",
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "overshoot" not in out
        assert (tmp_path / "sim_disturb.csv").exists()

    def test_memory_flag(self, tmp_path):
        rc = main(["simulate", "--fixture", "g30_100", "--fixture-controller",
                   "--scenario", "track", "--h", "0.1", "--T", "5",
                   "--memory", "50", "--out", str(tmp_path)])
        assert rc == 0

    def test_bad_memory(self, tmp_path, capsys):
        rc = main(["simulate", "--fixture", "g30_100", "--fixture-controller",
                   "--scenario", "track", "--memory", "-1", "--out", str(tmp_path)])
        assert rc == 1

    def test_scenario_required(self, capsys):
        assert main(["simulate", "--fixture", "g30_100",
                     "--fixture-controller"]) == 1


class TestEntryPoints:
    def test_console_script(self):
        proc = subprocess.run(["fracid", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "identify-fo" in proc.stdout

    def test_python_dash_m(self):
        proc = subprocess.run(
            [sys.executable, "-m", "fracid", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
