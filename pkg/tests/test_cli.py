import io
import json
import math
from contextlib import redirect_stdout

import pytest

from cmkdv_step import cli
from cmkdv_step.scattering import StepParams


def run_cli(argv, capsys=None):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(argv)
    return code, buf.getvalue()


def csv_rows(text):
    lines = text.split("\n")
    assert lines[-1] == ""
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:-1]]


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_fmt_round_trip():
    for v in (0.1, 1 / 3, -2.5e-300, 123456789.123, 0.0):
        assert float(cli.fmt(v)) == v
    assert cli.fmt(float("nan")) == "nan"
    assert cli.to_csv(["a"], [[True]]) == "a\ntrue\n"


def test_scatter_smoke_rows():
    code, out = run_cli(["scatter", "--A", "1", "--B", "0", "--grid", "1:1:1"])
    assert code == 0
    (row,) = csv_rows(out)
    assert abs(complex(float(row["re_phi"]), float(row["im_phi"])) - complex(math.cos(math.pi / 8), -math.sin(math.pi / 8))) < 1e-15
    assert abs(float(row["re_a"]) - math.cos(math.pi / 8)) < 1e-15
    assert abs(float(row["im_r"]) + math.tan(math.pi / 8)) < 1e-15
    assert row["status"] == "ok"


def test_scatter_flags_cut_rows():
    code, out = run_cli(["scatter", "--A", "1", "--B", "2", "--grid", "-1:-1:1,-0.5:0.5:3"])
    assert code == 0
    rows = csv_rows(out)
    assert [r["status"] for r in rows] == ["cut", "ok", "cut"]
    # the foot of the cut takes the east value: phi = exp(-i pi/4), a = cos(pi/4)
    assert abs(float(rows[1]["re_a"]) - math.sqrt(0.5)) < 1e-15
    assert abs(math.hypot(float(rows[1]["re_r"]), float(rows[1]["im_r"])) - 1) < 1e-15


def test_scatter_crlf_free_and_utf8(tmp_path):
    code, _ = run_cli(["scatter", "--A", "1", "--B", "2", "--grid", "0:1:3", "--out", str(tmp_path)])
    assert code == 0
    data = (tmp_path / "scatter.csv").read_bytes()
    assert b"\r" not in data
    data.decode("utf-8")


def test_regions_thresholds():
    code, out = run_cli(["regions", "--A", "1", "--B", "2", "--grid", "-3:1:9"])
    assert code == 0
    doc = json.loads(out)
    assert doc["thresholds"]["zm_slow_decay"] == pytest.approx(-2 / 3, abs=1e-15)
    assert doc["thresholds"]["plane_wave"] == pytest.approx(-1.0, abs=1e-15)
    assert not doc["zakharov_manakov_empty"]
    assert len(doc["rows"]) == 9


def test_regions_empty_zm_and_scale_covariance():
    _, out = run_cli(["regions", "--A", "2", "--B", "1", "--grid", "-1:1:5"])
    assert json.loads(out)["zakharov_manakov_empty"]
    _, a = run_cli(["regions", "--A", "1", "--B", "2", "--grid", "-3:1:9"])
    _, b = run_cli(["regions", "--A", "2", "--B", "4", "--grid", "-12:4:9"])
    ta, tb = json.loads(a)["thresholds"], json.loads(b)["thresholds"]
    for key in ta:
        assert tb[key] == pytest.approx(4 * ta[key], rel=1e-14)
    ra, rb = json.loads(a)["rows"], json.loads(b)["rows"]
    assert [r["region"] for r in ra] == [r["region"] for r in rb]


def test_signchart_antisymmetry():
    argv = ["signchart", "--A", "1", "--B", "2", "--which", "theta", "--xi", "-0.5",
            "--grid", "-3:3:7,-2:2:5"]
    code, out = run_cli(argv)
    assert code == 0
    rows = csv_rows(out)
    table = {(float(r["re_k"]), float(r["im_k"])): r["sign"] for r in rows}
    flip = {"+": "-", "-": "+", "0": "0"}
    for (x, y), s in table.items():
        assert table[(x, -y)] == flip[s]


def test_signchart_theta_positive_xi_topology():
    # for xi > 0 a vertical line at large |k1| crosses sign changes only at k2 = 0
    _, out = run_cli(["signchart", "--A", "1", "--B", "2", "--which", "theta", "--xi", "1",
                      "--grid", "3:4:2,-2:2:41"])
    signs = [r["sign"] for r in csv_rows(out) if r["re_k"] == "3.0" and r["sign"] != "0"]
    changes = sum(a != b for a, b in zip(signs, signs[1:]))
    assert changes == 1


def test_contour_rows():
    code, out = run_cli(["contour", "--A", "1", "--B", "2", "--xi", "-6", "--step", "0.02"])
    assert code == 0
    rows = csv_rows(out)
    upper = [r for r in rows if r["branch"] == "upper"]
    lower = [r for r in rows if r["branch"] == "lower"]
    assert len(upper) == len(lower) > 2
    for u, d in zip(upper, lower):
        assert float(u["re_k"]) == float(d["re_k"])
        assert float(u["im_k"]) == -float(d["im_k"])


def test_asym_delegation():
    from cmkdv_step import asymptotics as asy
    p = StepParams(1.0, 2.0)
    for x, t, region in ((-2.0, 2.0, "ZakharovManakov"), (-72.0, 2.0, "PlaneWave"),
                         (20.0, 2.0, "SlowDecay")):
        _, out = run_cli(["asym", "--A", "1", "--B", "2", "--x", str(x), "--t", str(t)])
        (row,) = csv_rows(out)
        assert row["region"] == region
        ref = asy.u_asymptotic(p, x, t).u
        assert complex(float(row["re_u"]), float(row["im_u"])) == ref
    _, out = run_cli(["asym", "--A", "1", "--B", "2", "--x", "-10", "--t", "2"])
    (row,) = csv_rows(out)
    assert row["status"].startswith("unsupported")


def test_asym_grid_order():
    _, out = run_cli(["asym", "--A", "1", "--B", "2", "--grid", "-4:-2:3,1:2:2"])
    rows = csv_rows(out)
    assert [(float(r["x"]), float(r["t"])) for r in rows] == [
        (-4.0, 1.0), (-3.0, 1.0), (-2.0, 1.0), (-4.0, 2.0), (-3.0, 2.0), (-2.0, 2.0)]


def test_exit_codes(tmp_path, capsys):
    assert run_cli(["asym", "--A", "1", "--B", "2", "--x", "1"])[0] == 2
    assert run_cli(["contour", "--A", "1", "--B", "2", "--xi", "-1"])[0] == 3
    assert run_cli(["scatter", "--A", "-1", "--B", "2", "--grid", "0:1:2"])[0] == 2
    bad = write_config(tmp_path, {"schema": cli.SCHEMA, "A": 1, "B": 2, "colour": "red"})
    assert run_cli(["regions", "--config", bad, "--grid", "0:1:2"])[0] == 2
    wrong = write_config(tmp_path, {"schema": "other/9", "A": 1, "B": 2}, "w.json")
    assert run_cli(["regions", "--config", wrong, "--grid", "0:1:2"])[0] == 2
    missing = write_config(tmp_path, {"schema": cli.SCHEMA, "A": 1, "B": 2,
                                      "compare": {"snapshots": str(tmp_path / "none")}}, "m.json")
    assert run_cli(["compare", "--config", missing])[0] == 2


def test_config_supplies_values(tmp_path):
    cfg = write_config(tmp_path, {"schema": cli.SCHEMA, "A": 1.0, "B": 0.0, "grid": "1:1:1"})
    _, a = run_cli(["scatter", "--config", cfg])
    _, b = run_cli(["scatter", "--A", "1", "--B", "0", "--grid", "1:1:1"])
    assert a == b


@pytest.mark.parametrize("argv", [
    ["scatter", "--A", "1", "--B", "2", "--grid", "-2:2:5,-1:1:3"],
    ["regions", "--A", "1", "--B", "2", "--grid", "-8:2:11"],
    ["regions", "--A", "1", "--B", "2", "--grid", "-8:2:11", "--format", "csv"],
    ["signchart", "--A", "1", "--B", "2", "--which", "g", "--xi", "-6", "--grid", "-4:3:8,-1.5:1.5:7"],
    ["contour", "--A", "1", "--B", "2", "--xi", "-6"],
    ["asym", "--A", "1", "--B", "2", "--grid", "-40:10:6,5:10:2"],
])
def test_commands_byte_identical(argv):
    assert run_cli(argv)[1] == run_cli(argv)[1]


def small_run_config(tmp_path):
    snaps = tmp_path / "snaps"
    return write_config(tmp_path, {
        "schema": cli.SCHEMA, "A": 1.0, "B": 2.0,
        "simulation": {"L": 75.0, "N": 4096, "left_edge": 40.0, "t_end": 2.0,
                       "snapshot_times": [1.0, 2.0], "front_speed": 5.0},
        "compare": {"snapshots": str(snaps), "times": [1.0, 2.0],
                    "zm_xi": [-0.1, -0.3], "pw_xi": [-1.5, -2.0]},
    })


def test_simulate_and_compare(tmp_path):
    cfg = small_run_config(tmp_path)
    code, out = run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / "snaps")])
    assert code == 0
    info = json.loads(out)
    assert info["snapshots"] == [1.0, 2.0]
    assert info["mass_drift"] < 1e-6

    code, out = run_cli(["compare", "--config", cfg, "--format", "csv"])
    assert code == 0
    rows = csv_rows(out)
    keys = [(float(r["t"]), float(r["x"]) if r["x"] != "nan" else math.inf) for r in rows]
    assert keys == sorted(keys)
    assert {r["region"] for r in rows} >= {"ZakharovManakov", "SlowDecay"}
    for r in rows:
        if r["region"] == "PlaneWave" and r["tainted"] == "false":
            assert float(r["modulus_error"]) >= 0

    code, out = run_cli(["compare", "--config", cfg])
    doc = json.loads(out)
    assert doc["summary"]["front_speed"] == 5.0
    assert "excluded_tainted" in doc["summary"]
    # compare is deterministic too
    assert run_cli(["compare", "--config", cfg])[1] == out

    # repeating the simulation gives identical snapshot bytes
    again = tmp_path / "again"
    run_cli(["simulate", "--config", cfg, "--out", str(again)])
    for f in sorted((tmp_path / "snaps").iterdir()):
        assert f.read_bytes() == (again / f.name).read_bytes()


def test_compare_missing_time(tmp_path):
    cfg = small_run_config(tmp_path)
    run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / "snaps")])
    doc = json.loads((tmp_path / "cfg.json").read_text())
    doc["compare"]["times"] = [1.0, 3.0]
    cfg2 = write_config(tmp_path, doc, "cfg2.json")
    assert run_cli(["compare", "--config", cfg2])[0] == 2
