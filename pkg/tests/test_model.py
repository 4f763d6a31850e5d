import math
from typing import Optional, Type
import numpy as np
import pytest
import pinching.model as model
from pinching.errors import PreconditionError

@pytest.mark.parametrize(('i', 'd', 'x'), (
    (1, 2.0, 0.0),
    (1, 7.5, 0.0),
    (3, 2.0, 4.0),
    (5, 1.0, 4.0),
))
def test_waveguide_x(i: int, d: float, x: float):
    cfg = model.SystemConfig(n=5, d=d)
    assert model.waveguide_x(i, cfg) == x, "incorrect waveguide position"

@pytest.mark.parametrize('i', (0, 6, -1))
def test_waveguide_x_range(i: int):
    with pytest.raises(PreconditionError):
        model.waveguide_x(i, model.SystemConfig(n=5))

@pytest.mark.parametrize(('dbm', 'watt'), (
    (-90.0, 1e-12),
    (0.0, 1e-3),
    (30.0, 1.0),
    (20.0, 0.1),
))
def test_dbm_to_watt(dbm: float, watt: float):
    assert model.dbm_to_watt(dbm) == pytest.approx(watt, rel=1e-12), "incorrect conversion"
    assert model.watt_to_dbm(watt) == pytest.approx(dbm, abs=1e-9), "incorrect inverse"

def test_dbm_round_trip():
    assert model.watt_to_dbm(model.dbm_to_watt(17.3)) == pytest.approx(17.3, abs=1e-12)

@pytest.mark.parametrize('watt', (0.0, -1e-3))
def test_watt_to_dbm_nonpositive(watt: float):
    with pytest.raises(ValueError):
        model.watt_to_dbm(watt)

def test_derived_constants():
    cfg = model.SystemConfig()
    assert cfg.wavelength == pytest.approx(0.010707, abs=1e-6), "incorrect wavelength"
    assert cfg.element_spacing * cfg.n_eff == pytest.approx(cfg.wavelength, rel=1e-15)
    assert cfg.eta == pytest.approx((cfg.wavelength / (4 * math.pi)) ** 2, rel=1e-15)
    assert cfg.y_margin == cfg.n * cfg.element_spacing
    assert list(cfg.waveguide_xs) == [0.0, 2.0, 4.0, 6.0, 8.0]
    assert cfg.noise_dbm == pytest.approx(-90.0), "incorrect default noise"
    assert cfg.pt_dbm == pytest.approx(0.0), "incorrect default power"
    assert cfg.with_(p_t=0.0).pt_dbm == -math.inf

@pytest.mark.parametrize(('changes', 'should_raise'), (
    ({'n': 0}, PreconditionError),
    ({'n': 2.5}, PreconditionError),
    ({'d': 0.0}, PreconditionError),
    ({'height': -1.0}, PreconditionError),
    ({'n_eff': 0.9}, PreconditionError),
    ({'p_t': -1.0}, PreconditionError),
    ({'f_c': math.inf}, PreconditionError),
    ({'p_t': 0.0}, None),
    ({'n': 15, 'd': 0.25}, None),
))
def test_SystemConfig_validation(changes: dict, should_raise: Optional[Type[Exception]]):
    if should_raise is not None:
        with pytest.raises(should_raise):
            model.SystemConfig(**changes)
    else:
        cfg = model.SystemConfig(**changes)
        for key, value in changes.items():
            assert getattr(cfg, key) == value, "field not kept"

@pytest.mark.parametrize(('text', 'field', 'value'), (
    ('n=7', 'n', 7),
    ('d = 1.5  # spacing', 'd', 1.5),
    ('D=3', 'height', 3.0),
    ('fc_hz=30e9', 'f_c', 30e9),
    ('noise_dbm=-80', 'noise_power', 1e-11),
    ('pt_dbm=30', 'p_t', 1.0),
    ('pt_dbm=30\npt_w=0.5', 'p_t', 0.5),
))
def test_SystemConfig_from_str(text: str, field: str, value: float):
    cfg = model.SystemConfig.from_str(text)
    assert getattr(cfg, field) == pytest.approx(value, rel=1e-12), "incorrect field"

@pytest.mark.parametrize('text', (
    'k=1',
    'n',
    'd=abc',
    'n=2.5',
))
def test_SystemConfig_from_str_invalid(text: str):
    with pytest.raises(ValueError):
        model.SystemConfig.from_str(text)

def test_SystemConfig_str():
    cfg = model.SystemConfig(n=3, d=1.25).with_pt_dbm(17.0)
    again = model.SystemConfig.from_str(str(cfg))
    assert again.n == 3 and again.d == 1.25
    assert again.p_t == pytest.approx(cfg.p_t, rel=1e-12)
    exact = model.SystemConfig.from_mapping(cfg.to_record())
    assert exact == cfg, "exact record does not reproduce the config"

def test_load_config(tmp_path):
    path = tmp_path / 'system.cfg'
    path.write_text('# test\nn=3\nd=4\npt_w=0.25\nseed=11\n')
    cfg, seed = model.load_config(path, {'d': '1.0'}, defaults={'n': '15', 'D': '3'})
    assert (cfg.n, cfg.d, cfg.height) == (3, 1.0, 3.0), "incorrect merge order"
    assert cfg.p_t == 0.25 and seed == 11
    cfg, _ = model.load_config(path, {'pt_dbm': '0'})
    assert cfg.p_t == pytest.approx(1e-3), "dBm override did not replace the exact value"
    cfg, seed = model.load_config()
    assert cfg == model.SystemConfig() and seed == model.DEFAULT_SEED

@pytest.mark.parametrize(('x', 'd', 'index'), (
    (0.1, 2.0, 1),
    (2.0, 2.0, 2),
    (1.0, 2.0, 1),
    (3.0, 2.0, 2),
    (-0.9, 2.0, 1),
    (4.0, 1.0, 5),
))
def test_nearest_waveguide(x: float, d: float, index: int):
    cfg = model.SystemConfig(n=5, d=d)
    assert model.nearest_waveguide(model.Point3(x, 0.0), cfg) == index, \
        "incorrect nearest waveguide"

def test_sample_users_deterministic():
    cfg = model.SystemConfig()
    assert model.sample_users(cfg, 42) == model.sample_users(cfg, 42), "not deterministic"
    assert model.sample_users(cfg, 42) != model.sample_users(cfg, 43), "seed ignored"

@pytest.mark.parametrize('worst_case_y', (True, False))
def test_sample_users_support(worst_case_y: bool):
    cfg = model.SystemConfig(n=5, d=1.5)
    for seed in range(10_000):
        drop = model.sample_users(cfg, seed, worst_case_y)
        drop.check(cfg)
        assert drop.worst_case or not worst_case_y, "users do not share y"
        assert np.all(np.abs(drop.ys) <= cfg.length / 2 - cfg.y_margin)
        for k, user in enumerate(drop.positions, start=1):
            assert model.nearest_waveguide(user, cfg) == k, "user not nearest its waveguide"

def test_drop_seed():
    seeds = {model.drop_seed(7, j) for j in range(1000)}
    assert len(seeds) == 1000, "drop seeds collide"
    assert model.drop_seed(7, 3) == model.drop_seed(7, 3)
    assert model.drop_seed(7, 3) != model.drop_seed(8, 3)

def test_UserDrop():
    cfg = model.SystemConfig(n=3, d=2.0)
    drop = model.fixed_users(cfg, [0.0, 2.5, 3.5])
    assert drop.worst_case and list(drop.ys) == [0.0, 0.0, 0.0]
    assert drop.subset(2).n == 2
    with pytest.raises(PreconditionError):
        drop.subset(4)
    with pytest.raises(PreconditionError):
        model.fixed_users(cfg, [0.0, 0.0, 4.0])
    with pytest.raises(PreconditionError):
        model.UserDrop((model.Point3(0.0, 0.0, 1.0),))
