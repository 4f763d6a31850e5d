import math
import numpy as np
import pytest
import pinching.metrics as metrics
from pinching.asymptotics import se_distributed_approx
from pinching.beamforming import Scheme, mrt, uniform_power, zf
from pinching.channel import distributed_channel_matrix
from pinching.errors import PreconditionError
from pinching.model import SystemConfig, fixed_users, sample_users
from pinching.placement import distributed_nearest
from pinching.stationary import TForm

CFG = SystemConfig()

def test_SeResult():
    result = metrics.SeResult([1.0, 2.5], [1.0, 4.66], np.zeros((2, 2)), 'x')
    assert result.total_se == 3.5 and result.n_users == 2
    record = result.to_record(pt_dbm=0.0, seed=3)
    assert list(record) == ['strategy', 'pt_dbm', 'seed', 'sinr_1', 'sinr_2', 'total_se']
    with pytest.raises(PreconditionError):
        metrics.SeResult([0.0], [-1.0], np.zeros((1, 1)))

def test_centralized_single_user():
    cfg = SystemConfig(n=1).with_pt_dbm(10)
    drop = fixed_users(cfg, [0.0], y=0.5)
    expected = math.log2(1 + cfg.p_t * cfg.eta / (cfg.height ** 2 * cfg.noise_power))
    assert metrics.se_centralized_exact(drop, cfg).total_se == pytest.approx(expected, rel=1e-12)
    assert metrics.se_centralized_closed(drop, cfg).total_se == pytest.approx(expected, rel=1e-12)

def test_centralized_zero_power():
    drop = sample_users(CFG, 0)
    assert metrics.se_centralized_exact(drop, CFG.with_(p_t=0.0)).total_se == 0.0

@pytest.mark.parametrize('n', (2, 5, 15))
def test_centralized_closed_form(n: int):
    cfg = SystemConfig(n=n).with_pt_dbm(10)
    for seed in range(10):
        drop = sample_users(cfg, seed)
        exact = metrics.se_centralized_exact(drop, cfg)
        closed = metrics.se_centralized_closed(drop, cfg)
        assert closed.total_se == pytest.approx(exact.total_se, rel=0.02), \
            "closed form off the exact coherent sum"
        assert np.allclose(closed.per_user_sinr, exact.per_user_sinr, rtol=0.08)

def test_centralized_closed_linear_in_pas():
    drop = sample_users(CFG, 1)
    a = metrics.se_centralized_closed(drop, CFG, n_pas=3).per_user_sinr
    b = metrics.se_centralized_closed(drop, CFG, n_pas=6).per_user_sinr
    assert np.allclose(b, 2 * a, rtol=1e-12)

def test_distributed_single_user():
    cfg = SystemConfig(n=1).with_pt_dbm(5)
    drop = fixed_users(cfg, [0.4], y=-1.0)
    d_sq = 0.4 ** 2 + cfg.height ** 2
    expected = math.log2(1 + cfg.p_t * cfg.eta / (d_sq * cfg.noise_power))
    for scheme in Scheme:
        assert metrics.se_distributed(drop, cfg, scheme).total_se == \
            pytest.approx(expected, rel=1e-12)
    assert metrics.se_distributed_mrt_closed(drop, cfg).total_se == \
        pytest.approx(expected, rel=1e-12)

def test_distributed_mrt_signal():
    drop = sample_users(CFG, 4, worst_case_y=False)
    placement = distributed_nearest(drop, CFG)
    H = distributed_channel_matrix(drop, placement, CFG)
    result = metrics.se_distributed_exact(drop, placement, mrt(H), uniform_power(CFG), CFG)
    d = metrics.user_distances(drop, CFG, placement)
    signal = CFG.p_t / CFG.n * np.sum(CFG.eta / d ** 2, axis=1)
    noise_plus = result.interference_power.sum(axis=1) + CFG.noise_power
    assert np.allclose(result.per_user_sinr * noise_plus, signal, rtol=1e-12)
    assert np.all(result.interference_power >= 0)
    assert np.all(np.diag(result.interference_power) == 0)

@pytest.mark.parametrize('pt_dbm', (-10.0, 20.0, 50.0))
def test_distributed_mrt_two_routes(pt_dbm: float):
    cfg = CFG.with_pt_dbm(pt_dbm)
    for seed in range(20):
        drop = sample_users(cfg, seed, worst_case_y=seed % 2 == 0)
        matrix = metrics.se_distributed(drop, cfg, Scheme.MRT)
        literal = metrics.se_distributed_mrt_closed(drop, cfg)
        assert literal.total_se == pytest.approx(matrix.total_se, rel=1e-10), \
            "the two MRT routes disagree"
        assert np.allclose(literal.interference_power, matrix.interference_power,
                           rtol=1e-8, atol=1e-30)

def test_zf_closed_form():
    for seed in range(100):
        cfg = CFG.with_pt_dbm(-20 + seed % 8 * 10)
        drop = sample_users(cfg, seed, worst_case_y=seed % 2 == 0)
        H = distributed_channel_matrix(drop, distributed_nearest(drop, cfg), cfg)
        general = metrics.se_distributed_exact(drop, distributed_nearest(drop, cfg), zf(H),
                                               uniform_power(cfg), cfg)
        closed = metrics.se_zf_closed(H, cfg)
        assert closed.total_se == pytest.approx(general.total_se, rel=1e-9), \
            "ZF closed form disagrees with the SINR route"

def test_zf_monotone_in_power():
    drop = sample_users(CFG, 9)
    values = [metrics.se_distributed(drop, CFG.with_pt_dbm(pt), Scheme.ZF).total_se
              for pt in range(-30, 65, 5)]
    assert all(b > a for a, b in zip(values, values[1:])), "ZF SE not increasing in P_t"

@pytest.mark.parametrize(('i_users', 'q_pas', 'should_raise'), (
    (1, 5, False),
    (5, 1, False),
    (2, 2, True),
    (2, 3, True),
    (0, 5, True),
    (6, 1, True),
))
def test_se_general_shapes(i_users: int, q_pas: int, should_raise: bool):
    drop = sample_users(CFG, 2)
    if should_raise:
        with pytest.raises(PreconditionError):
            metrics.se_general(drop, CFG, i_users, q_pas)
    else:
        assert metrics.se_general(drop, CFG, i_users, q_pas).n_users == i_users

def test_se_general_full_multiplexing():
    drop = sample_users(CFG, 5)
    assert metrics.se_general(drop, CFG, CFG.n, 1).total_se == \
        pytest.approx(se_distributed_approx(drop, CFG).total_se, rel=1e-12)

def test_se_general_t_form():
    cfg = CFG.with_(d=1.0).with_pt_dbm(50)
    drop = sample_users(cfg, 5)
    corrected = metrics.se_general(drop, cfg, cfg.n, 1)
    assert corrected.total_se == metrics.se_general(drop, cfg, cfg.n, 1,
                                                    TForm.CORRECTED).total_se
    printed = metrics.se_general(drop, cfg, cfg.n, 1, TForm.PRINTED)
    assert printed.total_se != corrected.total_se, "T form ignored"

def test_general_se_drop_mismatch():
    with pytest.raises(PreconditionError):
        metrics.general_se(sample_users(CFG, 0), CFG, 3, 1)
    assert metrics.general_se(sample_users(CFG, 0).subset(3), CFG, 3, 4).n_users == 3

def test_interference_limited_se():
    drop = sample_users(CFG, 1)
    free = metrics.interference_limited_se(drop, CFG, CFG.n, 1, np.zeros((CFG.n, CFG.n)), 'free')
    assert free.strategy == 'free' and np.all(free.interference_power == 0)
    coupled = metrics.interference_limited_se(drop, CFG, CFG.n, 1,
                                              np.full((CFG.n, CFG.n), 1e-6), 'coupled')
    assert np.all(np.diag(coupled.interference_power) == 0)
    assert np.all(coupled.per_user_sinr < free.per_user_sinr), "interference did not lower SINR"

def test_se_general_single_user():
    cfg = CFG.with_pt_dbm(10)
    drop = sample_users(cfg, 6)
    d_sq = (drop.xs[0] - 0.0) ** 2 + cfg.height ** 2
    expected = math.log2(1 + cfg.p_t * cfg.eta * cfg.n / (d_sq * cfg.noise_power))
    assert metrics.se_general(drop, cfg, 1, cfg.n).total_se == pytest.approx(expected, rel=1e-12)

def test_se_equal_spacing():
    cfg = SystemConfig(n=5).with_pt_dbm(10)
    for seed in range(100):
        drop = sample_users(cfg, seed, worst_case_y=False)
        equal = metrics.se_equal_spacing(drop, cfg, cfg.n)
        inphase = metrics.se_centralized_exact(drop, cfg)
        assert equal.total_se <= inphase.total_se, "equal spacing beats in-phase"
        assert equal.extras['literal_total_se'] >= equal.total_se * (1 - 1e-12), \
            "magnitude-only value below the coherent one"

def test_se_equal_spacing_too_few():
    with pytest.raises(PreconditionError):
        metrics.se_equal_spacing(sample_users(CFG, 0), CFG, 1)

def test_energy_efficiency():
    cfg = SystemConfig(p_t=0.1)
    assert metrics.energy_efficiency(10.0, 1, cfg) == pytest.approx(10 / 0.1316)
    values = [metrics.energy_efficiency(10.0, n, cfg) for n in range(1, 16)]
    assert all(b < a for a, b in zip(values, values[1:])), "EE not decreasing in RF chains"
    with pytest.raises(PreconditionError):
        metrics.energy_efficiency(10.0, 0, cfg)
