import math

import numpy as np
import pytest

from cmkdv_step import simulator as sim
from cmkdv_step.errors import BlowUpError, ConfigError, DomainError
from cmkdv_step.scattering import StepParams

# small grid with the default dx = 1200/2^15
L_SMALL, N_SMALL, XB_SMALL = 75.0, 2 ** 12, 40.0


def small_cfg(A=1.0, B=2.0, **kw):
    kw.setdefault("L", L_SMALL)
    kw.setdefault("N", N_SMALL)
    kw.setdefault("left_edge", XB_SMALL)
    kw.setdefault("t_end", 1.0)
    return sim.SimConfig(StepParams(A, B), **kw)


def periodic_B(L, m):
    return math.pi * m / L


def test_config_validation():
    with pytest.raises(ConfigError):
        small_cfg(N=1000)
    with pytest.raises(ConfigError):
        small_cfg(width=50.0)
    with pytest.raises(ConfigError):
        small_cfg(dt=-1.0)
    with pytest.raises(ConfigError):
        small_cfg(snapshot_times=(0.5, 0.2))
    with pytest.raises(ConfigError):
        small_cfg(snapshot_times=(2.0,))
    with pytest.raises(ConfigError):
        sim.config_from_dict({"A": 1.0, "B": 2.0, "bogus": 1})
    cfg = sim.SimConfig(StepParams(1.0, 2.0))
    assert cfg.N == 2 ** 15 and cfg.L == 600.0 and cfg.left_edge == 300.0
    assert cfg.s_max == 12.0


def test_init_field_profile():
    cfg = small_cfg()
    f = sim.init_field(cfg)
    x = cfg.x
    i = np.argmin(np.abs(x + cfg.left_edge / 2))
    assert abs(abs(f.u[i]) - 1.0) < 1e-12
    j = np.argmin(np.abs(x - 5 * cfg.width))
    assert abs(f.u[j]) <= math.exp(-10) * 2
    assert not np.any(sim.init_field(small_cfg(A=0.0)).u)


def test_init_field_edges_must_vanish():
    with pytest.raises(ConfigError):
        sim.init_field(small_cfg(left_edge=74.0, width=0.5))


def test_zero_field_stays_zero():
    cfg = small_cfg(A=0.0)
    f = sim.step(sim.init_field(cfg), 0.01, cfg)
    assert not np.any(f.u)


def test_linear_mode_phase_exact():
    cfg = small_cfg(nonlinear=False)
    m = 37
    kappa = 2 * math.pi * m / (2 * cfg.L)
    u0 = np.exp(1j * kappa * (cfg.x + cfg.L))
    dt = 0.013
    f = sim.step(sim.WaveField(0.0, cfg.L, cfg.N, u0), dt, cfg)
    assert np.max(np.abs(f.u - u0 * np.exp(0.5j * kappa ** 3 * dt))) < 1e-12


def test_plane_wave_one_step_defect_is_fifth_order():
    B = periodic_B(L_SMALL, 24)
    p = StepParams(1.0, B)
    cfg = small_cfg(B=B)
    u0 = sim.WaveField(0.0, cfg.L, cfg.N, p.plane_wave(cfg.x, 0.0))
    defects = []
    for dt in (0.04, 0.02, 0.01):
        f = sim.step(u0, dt, cfg)
        defects.append(np.max(np.abs(f.u - p.plane_wave(cfg.x, dt))))
    r1, r2 = defects[0] / defects[1], defects[1] / defects[2]
    assert r1 > 20 and r2 > 20


def test_plane_wave_preserved_small():
    B = periodic_B(L_SMALL, 12)
    p = StepParams(1.0, B)
    cfg = small_cfg(B=B, t_end=2.0)
    res = sim.run(cfg, initial=sim.WaveField(0.0, cfg.L, cfg.N, p.plane_wave(cfg.x, 0.0)))
    assert np.max(np.abs(res[-1].u - p.plane_wave(cfg.x, 2.0))) < 1e-8


def test_mass_and_reality_small():
    res = sim.run(small_cfg(A=1.0, B=0.0, t_end=2.0, snapshot_times=(1.0, 2.0)))
    assert res.diagnostics.mass_drift < 1e-8
    assert max(np.max(np.abs(s.u.imag)) for s in res) < 1e-12
    res = sim.run(small_cfg(t_end=1.0))
    assert res.diagnostics.mass_drift < 1e-6


def test_self_convergence_small():
    fields = []
    for dt in (0.004, 0.002, 0.001):
        fields.append(sim.run(small_cfg(t_end=0.5, dt=dt))[-1].u)
    d1 = np.max(np.abs(fields[0] - fields[1]))
    d2 = np.max(np.abs(fields[1] - fields[2]))
    assert d2 <= d1 / 10
    assert math.log2(d1 / d2) >= 3.5


def test_snapshots_land_on_requested_times_and_are_deterministic():
    cfg = small_cfg(t_end=0.3, snapshot_times=(0.0, 0.1, 0.25, 0.3))
    a = sim.run(cfg)
    b = sim.run(cfg)
    assert [s.t for s in a] == [0.0, 0.1, 0.25, 0.3]
    for sa, sb in zip(a, b):
        assert np.array_equal(sa.u, sb.u)
    assert len(a.diagnostics.mass) == 4


def test_blow_up_reported():
    cfg = small_cfg(A=3.0, B=0.0, dt=0.5, t_end=20.0, N=2 ** 9, L=20.0, left_edge=10.0)
    with pytest.raises(BlowUpError) as exc:
        sim.run(cfg)
    assert exc.value.time is not None


def test_probe_values():
    cfg = small_cfg(snapshot_times=(0.0,), t_end=0.01)
    res = sim.run(cfg)
    snap = res.at(0.0)
    j = 1234
    assert sim.probe(res, snap.x[j], 0.0).value == snap.u[j]
    x = -cfg.left_edge / 2 + 0.3 * cfg.dx
    p = cfg.params
    assert abs(sim.probe(res, x, 0.0).value - p.plane_wave(x, 0.0)) < 1e-12
    assert abs(sim.probe(res, 30.0 + 0.5 * cfg.dx, 0.0).value) < 1e-12
    with pytest.raises(DomainError):
        sim.probe(res, 2 * cfg.L, 0.0)
    with pytest.raises(DomainError):
        sim.probe(res, 0.0, 5.0)


def test_trusted_window_and_taint():
    cfg = small_cfg(snapshot_times=(0.0, 1.0), t_end=1.0, front_speed=5.0)
    lo, hi = sim.trusted_window(cfg, 1.0)
    assert (lo, hi) == (-35.0, 35.0)
    res = sim.run(cfg)
    assert not sim.probe(res, 10.0, 1.0).tainted
    assert sim.probe(res, -36.0, 1.0).tainted
    assert sim.probe(res, 36.0, 1.0).tainted


def test_snapshot_roundtrip(tmp_path):
    cfg = small_cfg(t_end=0.05, snapshot_times=(0.0, 0.05))
    res = sim.run(cfg)
    sim.write_snapshots(res, tmp_path)
    back = sim.read_snapshots(tmp_path)
    assert back.config == cfg
    for a, b in zip(res, back):
        assert a.t == b.t
        assert np.array_equal(a.u, b.u)
    with pytest.raises(ConfigError):
        sim.read_snapshots(tmp_path / "missing")
