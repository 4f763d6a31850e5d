import numpy as np
import pytest
import pinching.asymptotics as asymptotics
from pinching.beamforming import Scheme
from pinching.errors import PreconditionError
from pinching.metrics import se_centralized_exact, se_distributed
from pinching.model import SystemConfig, fixed_users, sample_users
from pinching.stationary import TForm, t_factor

CFG = SystemConfig()

@pytest.mark.parametrize('pt_dbm', (-10.0, 10.0, 30.0, 60.0))
def test_bounds_squeeze(pt_dbm: float):
    cfg = CFG.with_pt_dbm(pt_dbm)
    for seed in range(30):
        drop = sample_users(cfg, seed)
        lower = asymptotics.se_lower_bound(drop, cfg).total_se
        upper = asymptotics.se_upper_bound(drop, cfg).total_se
        for form in TForm:
            approx = asymptotics.se_distributed_approx(drop, cfg, form).total_se
            assert lower <= approx * (1 + 1e-12), "approximation below the lower bound"
            assert approx <= upper * (1 + 1e-12), "approximation above the upper bound"

def test_bounds_single_user():
    cfg = SystemConfig(n=1).with_pt_dbm(20)
    drop = fixed_users(cfg, [0.3], y=0.0)
    upper = asymptotics.se_upper_bound(drop, cfg).total_se
    assert asymptotics.se_lower_bound(drop, cfg).total_se == pytest.approx(upper, rel=1e-12)
    assert asymptotics.se_distributed_approx(drop, cfg).total_se == \
        pytest.approx(upper, rel=1e-12)

def test_strategy_names():
    drop = sample_users(CFG, 0)
    assert asymptotics.se_distributed_approx(drop, CFG).strategy == 'approximation'
    assert asymptotics.se_upper_bound(drop, CFG).strategy == 'upper'
    assert asymptotics.se_lower_bound(drop, CFG).strategy == 'lower'

def test_drop_mismatch():
    drop = sample_users(SystemConfig(n=3), 0)
    for bound in (asymptotics.se_distributed_approx, asymptotics.se_upper_bound,
                  asymptotics.se_lower_bound):
        with pytest.raises(PreconditionError):
            bound(drop, CFG)

def test_high_snr_limits():
    centralized, distributed = asymptotics.high_snr_limits(CFG)
    assert (centralized.slope, distributed.slope) == (1.0, CFG.n)
    snr = 1e16
    cfg = CFG.with_(p_t=snr * CFG.noise_power)
    drop = fixed_users(cfg, list(cfg.waveguide_xs))
    assert asymptotics.se_upper_bound(drop, cfg).total_se == \
        pytest.approx(distributed(snr), abs=1e-6), "incorrect distributed intercept"
    assert se_centralized_exact(drop, cfg).total_se == \
        pytest.approx(centralized(snr), abs=0.1), "incorrect centralized intercept"

@pytest.mark.parametrize('n', (2, 5, 15))
def test_measured_slopes(n: int):
    cfg = SystemConfig(n=n)
    drop = sample_users(cfg, 3)
    c_slope, d_slope = asymptotics.measured_slopes(drop, cfg)
    assert c_slope == pytest.approx(1.0, rel=0.02), "centralized slope is not 1"
    assert d_slope == pytest.approx(n, rel=0.02), "distributed slope is not N"

def test_low_snr_limits():
    cfg = CFG.with_pt_dbm(-40)
    for seed in range(100):
        drop = sample_users(cfg, seed, worst_case_y=seed % 2 == 0)
        limits = asymptotics.low_snr_limits(drop, cfg)
        assert limits.distributed <= limits.centralized, "distributed beats centralized"

@pytest.mark.parametrize('scheme', tuple(Scheme))
def test_low_snr_reversal(scheme: Scheme):
    cfg = CFG.with_pt_dbm(-40)
    for seed in range(100):
        drop = sample_users(cfg, seed)
        assert se_distributed(drop, cfg, scheme).total_se <= \
            se_centralized_exact(drop, cfg).total_se, f"distributed ahead at -40 dBm on drop {seed}"

def test_low_snr_limits_match():
    cfg = CFG.with_pt_dbm(-70)
    drop = sample_users(cfg, 8)
    limits = asymptotics.low_snr_limits(drop, cfg)
    assert se_centralized_exact(drop, cfg).total_se == \
        pytest.approx(limits.centralized * cfg.p_t, rel=0.06)
    assert se_distributed(drop, cfg, Scheme.MRT).total_se == \
        pytest.approx(limits.distributed * cfg.p_t, rel=0.01)

def test_se_gap():
    for seed in range(20):
        drop = sample_users(CFG, seed)
        assert asymptotics.se_gap(drop, CFG.with_pt_dbm(-80)) < 0, \
            "distributed ahead at low power"
        assert asymptotics.se_gap(drop, CFG.with_pt_dbm(40)) > 0, \
            "centralized ahead at high power"

def test_lemma1_table():
    table = asymptotics.lemma1_table(CFG)
    assert list(table.columns) == ['k_from', 'k_to', 't_printed', 'i_bar_printed',
                                   't_corrected', 'i_bar_corrected']
    assert len(table) == CFG.n * (CFG.n - 1)
    assert np.all(table['i_bar_corrected'] >= 0)
    row = table[(table['k_from'] == 2) & (table['k_to'] == 1)].iloc[0]
    assert row['t_printed'] == pytest.approx(t_factor(2, 1, CFG))
