"""Command line front end.

Subcommands: scatter, regions, signchart, contour, asym, simulate, compare.
Exit codes: 0 success, 2 configuration error, 3 domain or region error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, phase, simulator
from .asymptotics import AsymptoticValue, UnsupportedRegion
from .errors import CmkdvError, ConfigError, CutError, DomainError
from .phase import RegionLabel
from .scattering import StepParams, phi_fn, reflection, scattering_coeffs

SCHEMA = "cmkdv-step/1"
CONFIG_KEYS = {"schema", "A", "B", "xi", "x", "t", "grid", "which", "step", "reading",
               "simulation", "compare"}
COMPARE_KEYS = {"snapshots", "zm_xi", "pw_xi", "times"}
DEFAULT_COMPARE = {"zm_xi": [-0.1, -0.3], "pw_xi": [-1.5, -2.0], "times": [20.0, 40.0, 80.0]}


# ---------------------------------------------------------------------------
# formatting

def fmt(v) -> str:
    """Shortest round-trip text for a float (at most 17 significant digits)."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        return "0.0" if math.copysign(1.0, v) > 0 else "-0.0"
    return repr(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; emit them as strings
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, RegionLabel):
        return obj.value
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return v


def _table(header, rows, form):
    if form == "json":
        return to_json([dict(zip(header, r)) for r in rows])
    return to_csv(header, rows)


# ---------------------------------------------------------------------------
# config and arguments

def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema") != SCHEMA:
        raise ConfigError(f"config schema must be {SCHEMA!r} (got {cfg.get('schema')!r})")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "compare" in cfg:
        extra = set(cfg["compare"]) - COMPARE_KEYS
        if extra:
            raise ConfigError(f"unknown compare keys: {sorted(extra)}")
    return cfg


def _setting(args, cfg, name, default=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return cfg.get(name, default)


def _params(args, cfg) -> StepParams:
    A = _setting(args, cfg, "A")
    B = _setting(args, cfg, "B")
    if A is None or B is None:
        raise ConfigError("both A and B are required (flags or config)")
    try:
        return StepParams(float(A), float(B))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def parse_range(text: str):
    """'lo:hi:n' -> n equally spaced points including both ends."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected lo:hi:n") from None
    if n < 1:
        raise ConfigError(f"range {text!r} needs at least one point")
    if n == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def parse_grid(text, dims: int = 1):
    if text is None:
        raise ConfigError("--grid is required for this command")
    parts = str(text).split(",")
    if len(parts) > dims:
        raise ConfigError(f"grid {text!r} has more than {dims} ranges")
    return [parse_range(p) for p in parts]


def _require(value, name):
    if value is None:
        raise ConfigError(f"{name} is required (flag or config)")
    return float(value)


# ---------------------------------------------------------------------------
# commands

def cmd_scatter(p: StepParams, grid: str, form: str = "csv") -> str:
    ranges = parse_grid(grid, 2)
    re = ranges[0]
    im = ranges[1] if len(ranges) > 1 else np.array([0.0])
    header = ["re_k", "im_k", "re_phi", "im_phi", "re_a", "im_a", "re_b", "im_b",
              "re_r", "im_r", "status"]
    rows = []
    for y in im:
        for x in re:
            k = complex(x, y)
            try:
                ph = phi_fn(p, k)
                a, b = scattering_coeffs(p, k)
                r = reflection(p, k)
            except CutError:
                nan = float("nan")
                rows.append([x, y] + [nan] * 8 + ["cut"])
                continue
            rows.append([x, y, ph.real, ph.imag, a.real, a.imag, b.real, b.imag,
                         r.real, r.imag, "ok"])
    return _table(header, rows, form)


def cmd_regions(p: StepParams, grid: str, form: str = "json") -> str:
    xis = parse_grid(grid, 1)[0]
    th = phase.thresholds(p)
    rows = []
    for xi in xis:
        rows.append([float(xi), phase.classify_xi(p, xi).value,
                     phase.discriminant_lambda(p, xi)])
    if form == "csv":
        return to_csv(["xi", "region", "lambda"], rows)
    return to_json({
        "A": p.A,
        "B": p.B,
        "thresholds": {"zm_slow_decay": th["zm_slow"], "plane_wave": th["plane_wave"]},
        "zakharov_manakov_empty": bool(2 * p.A ** 2 - 1.5 * p.B ** 2 >= 0),
        "rows": [{"xi": r[0], "region": r[1], "lambda": r[2]} for r in rows],
    })


def cmd_signchart(p: StepParams, which: str, xi: float, grid: str, form: str = "csv") -> str:
    ranges = parse_grid(grid, 2)
    if len(ranges) != 2:
        raise ConfigError("signchart needs --grid re_lo:re_hi:n,im_lo:im_hi:m")
    re, im = ranges
    chart = phase.sign_chart(which, p, xi, (re[0], re[-1], im[0], im[-1]), (re.size, im.size))
    symbols = {1: "+", -1: "-", 0: "0"}
    rows = []
    for j, y in enumerate(chart.im):
        for i, x in enumerate(chart.re):
            s = symbols[int(chart.signs[j, i])] if chart.valid[j, i] else "invalid"
            rows.append([float(x), float(y), s])
    return _table(["re_k", "im_k", "sign"], rows, form)


def cmd_contour(p: StepParams, xi: float, step: float, form: str = "csv") -> str:
    upper, lower = phase.gamma_g(p, xi, step)
    rows = []
    for name, line in (("upper", upper), ("lower", lower)):
        for i, z in enumerate(line.points):
            rows.append([name, i, float(z.real), float(z.imag)])
    return _table(["branch", "index", "re_k", "im_k"], rows, form)


def _asym_row(p, x, t, reading):
    xi = x / (6.0 * t)
    res = asymptotics.u_asymptotic(p, x, t, reading)
    if isinstance(res, AsymptoticValue):
        u = res.u
        return [x, t, xi, res.region.value, u.real, u.imag, abs(u), res.error_order, "ok"]
    nan = float("nan")
    return [x, t, xi, res.region.value, nan, nan, nan, "", f"unsupported: {res.reason}"]


def cmd_asym(p: StepParams, points, reading: str = "literal", form: str = "csv") -> str:
    header = ["x", "t", "xi", "region", "re_u", "im_u", "abs_u", "error_order", "status"]
    rows = [_asym_row(p, float(x), float(t), reading) for x, t in points]
    return _table(header, rows, form)


def sim_config_from(cfg: dict) -> simulator.SimConfig:
    sim = dict(cfg.get("simulation", {}))
    if "A" in sim or "B" in sim:
        raise ConfigError("A and B belong at the top level of the config")
    sim["A"] = cfg.get("A")
    sim["B"] = cfg.get("B")
    if sim["A"] is None or sim["B"] is None:
        raise ConfigError("simulation config needs A and B")
    return simulator.config_from_dict(sim)


def cmd_simulate(cfg: dict, out_dir) -> dict:
    sc = sim_config_from(cfg)
    result = simulator.run(sc)
    simulator.write_snapshots(result, out_dir)
    d = result.diagnostics
    return {
        "snapshots": [s.t for s in result.snapshots],
        "mass_drift": d.mass_drift,
        "max_abs": d.max_abs,
        "steps": d.steps,
        "out": str(out_dir),
    }


@dataclass
class CompareReport:
    rows: list
    summary: dict = field(default_factory=dict)

    HEADER = ("x", "t", "xi", "region", "re_u_asym", "im_u_asym", "re_u_sim", "im_u_sim",
              "abs_error", "modulus_error", "tainted")

    def to_csv(self) -> str:
        return to_csv(list(self.HEADER), self.rows)

    def to_json(self) -> str:
        return to_json({"summary": self.summary,
                        "rows": [dict(zip(self.HEADER, r)) for r in self.rows]})


def _fit_slope(ts, errs):
    ts = np.asarray(ts, dtype=float)
    errs = np.asarray(errs, dtype=float)
    ok = errs > 0
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(ts[ok]), np.log(errs[ok]), 1)[0])


def _decreasing(vals):
    return bool(len(vals) >= 2 and all(b < a for a, b in zip(vals, vals[1:])))


def cmd_compare(cfg: dict) -> CompareReport:
    comp = dict(DEFAULT_COMPARE)
    comp.update(cfg.get("compare", {}))
    if "snapshots" not in comp:
        raise ConfigError("compare config needs a 'snapshots' directory")
    result = simulator.read_snapshots(comp["snapshots"])
    sc = result.config
    p = sc.params
    times = sorted(float(t) for t in comp["times"])
    for t in times:
        try:
            result.at(t)
        except DomainError:
            raise ConfigError(f"snapshots lack t = {t}") from None
    rows = []
    excluded = 0
    nan = float("nan")
    for t in times:
        for region_xi, expect in ((comp["zm_xi"], RegionLabel.ZakharovManakov),
                                  (comp["pw_xi"], RegionLabel.PlaneWave)):
            for xi in region_xi:
                x = 6.0 * float(xi) * t
                region = phase.classify(p, x, t)
                if abs(x) >= sc.L:
                    rows.append([x, t, float(xi), region.value, nan, nan, nan, nan, nan, nan, True])
                    excluded += 1
                    continue
                pr = simulator.probe(result, x, t)
                ua = asymptotics.u_asymptotic(p, x, t)
                ua = ua.u if isinstance(ua, AsymptoticValue) else complex(nan, nan)
                err = abs(pr.value - ua)
                mod_err = abs(abs(pr.value) - p.A) if expect is RegionLabel.PlaneWave else nan
                rows.append([x, t, float(xi), region.value, ua.real, ua.imag,
                             pr.value.real, pr.value.imag, err, mod_err, pr.tainted])
                excluded += int(pr.tainted)
        # slow decay: largest |u_sim| over trusted x > 6 A^2 t
        snap = result.at(t)
        lo, hi = simulator.trusted_window(sc, t)
        xs = snap.x
        sel = (xs > 6 * p.A ** 2 * t) & (xs >= lo) & (xs <= hi)
        if np.any(sel):
            i = int(np.flatnonzero(sel)[np.argmax(np.abs(snap.u[sel]))])
            x = float(xs[i])
            bound = asymptotics.slow_decay_bound(p, x, t)
            u = snap.u[i]
            rows.append([x, t, x / (6 * t), RegionLabel.SlowDecay.value, bound, 0.0,
                         u.real, u.imag, abs(u), nan, False])
        else:
            rows.append([nan, t, nan, RegionLabel.SlowDecay.value, nan, nan, nan, nan, nan, nan,
                         True])
            excluded += 1
    rows.sort(key=lambda r: (r[1], r[0] if not math.isnan(r[0]) else math.inf))
    summary = _summarize(rows, p, times)
    summary["excluded_tainted"] = excluded
    summary["front_speed"] = sc.s_max
    return CompareReport(rows, summary)


def _summarize(rows, p, times):
    out = {}
    zm = {}
    for r in rows:
        if r[3] == RegionLabel.ZakharovManakov.value and not r[10]:
            zm.setdefault(r[2], []).append((r[1], r[8]))
    out["zakharov_manakov"] = {
        fmt(xi): {"times": [t for t, _ in v], "abs_error": [e for _, e in v],
                  "slope": _fit_slope([t for t, _ in v], [e for _, e in v]),
                  "decreasing": _decreasing([e for _, e in v])}
        for xi, v in sorted(zm.items())
    }
    pw = {}
    for r in rows:
        if r[3] == RegionLabel.PlaneWave.value and not r[10]:
            pw.setdefault(r[2], []).append((r[1], r[9]))
    out["plane_wave"] = {
        fmt(xi): {"times": [t for t, _ in v], "modulus_error": [e for _, e in v],
                  "decreasing": _decreasing([e for _, e in v])}
        for xi, v in sorted(pw.items())
    }
    sd = [(r[1], r[8]) for r in rows if r[3] == RegionLabel.SlowDecay.value and not r[10]]
    out["slow_decay"] = {"times": [t for t, _ in sd], "max_abs_u": [m for _, m in sd],
                         "decreasing": _decreasing([m for _, m in sd])}
    out["requested_times"] = list(times)
    return out


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--A", type=float, help="plane-wave amplitude")
    common.add_argument("--B", type=float, help="plane-wave wavenumber")
    common.add_argument("--config", help="JSON config (schema %s)" % SCHEMA)
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")

    ap = argparse.ArgumentParser(prog="cmkdv-step", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("scatter", parents=[common], help="phi, a, b, r on a k grid")
    s.add_argument("--grid", help="re_lo:re_hi:n[,im_lo:im_hi:m]")
    s = sub.add_parser("regions", parents=[common], help="region table over xi")
    s.add_argument("--grid", help="xi_lo:xi_hi:n")
    s = sub.add_parser("signchart", parents=[common], help="sign of Im theta or Im g")
    s.add_argument("--which", choices=("theta", "g"))
    s.add_argument("--xi", type=float)
    s.add_argument("--grid", help="re_lo:re_hi:n,im_lo:im_hi:m")
    s = sub.add_parser("contour", parents=[common], help="vertices of gamma_g")
    s.add_argument("--xi", type=float)
    s.add_argument("--step", type=float)
    s = sub.add_parser("asym", parents=[common], help="leading-order u(x, t)")
    s.add_argument("--x", type=float)
    s.add_argument("--t", type=float)
    s.add_argument("--grid", help="x_lo:x_hi:n,t_lo:t_hi:m")
    s.add_argument("--reading", choices=asymptotics.SLOW_DECAY_READINGS)
    sub.add_parser("simulate", parents=[common], help="run the direct solver")
    sub.add_parser("compare", parents=[common], help="asymptotics against snapshots")
    return ap


def _emit(text: str, out, name: str):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text, encoding="utf-8")


def dispatch(args) -> None:
    cfg = load_config(args.config) if args.config else {}
    form = args.format
    cmd = args.command
    if cmd == "scatter":
        p = _params(args, cfg)
        form = form or "csv"
        _emit(cmd_scatter(p, _setting(args, cfg, "grid"), form), args.out, f"scatter.{form}")
    elif cmd == "regions":
        p = _params(args, cfg)
        form = form or "json"
        _emit(cmd_regions(p, _setting(args, cfg, "grid"), form), args.out, f"regions.{form}")
    elif cmd == "signchart":
        p = _params(args, cfg)
        form = form or "csv"
        which = _setting(args, cfg, "which", "theta")
        xi = _require(_setting(args, cfg, "xi"), "xi")
        _emit(cmd_signchart(p, which, xi, _setting(args, cfg, "grid"), form), args.out,
              f"signchart.{form}")
    elif cmd == "contour":
        p = _params(args, cfg)
        form = form or "csv"
        xi = _require(_setting(args, cfg, "xi"), "xi")
        step = float(_setting(args, cfg, "step", 0.01))
        _emit(cmd_contour(p, xi, step, form), args.out, f"contour.{form}")
    elif cmd == "asym":
        p = _params(args, cfg)
        form = form or "csv"
        reading = _setting(args, cfg, "reading", "literal")
        grid = _setting(args, cfg, "grid")
        if grid is not None:
            ranges = parse_grid(grid, 2)
            if len(ranges) != 2:
                raise ConfigError("asym --grid needs x_lo:x_hi:n,t_lo:t_hi:m")
            points = [(x, t) for t in ranges[1] for x in ranges[0]]
        else:
            points = [(_require(_setting(args, cfg, "x"), "x"), _require(_setting(args, cfg, "t"), "t"))]
        _emit(cmd_asym(p, points, reading, form), args.out, f"asym.{form}")
    elif cmd == "simulate":
        if not args.config:
            raise ConfigError("simulate needs --config")
        if args.out is None:
            raise ConfigError("simulate needs --out")
        info = cmd_simulate(cfg, args.out)
        sys.stdout.write(to_json(info))
    elif cmd == "compare":
        if not args.config:
            raise ConfigError("compare needs --config")
        report = cmd_compare(cfg)
        if args.out is None:
            sys.stdout.write(report.to_csv() if form == "csv" else report.to_json())
        else:
            _emit(report.to_json(), args.out, "compare.json")
            _emit(report.to_csv(), args.out, "compare.csv")


def _join_dashed(argv):
    # let '--grid -1:1:3' through; argparse would read '-1:1:3' as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_dashed(argv))
    try:
        dispatch(args)
    except CmkdvError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
