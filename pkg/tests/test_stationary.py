import math
import numpy as np
import pytest
import pinching.stationary as stationary
from pinching.stationary import TForm
from pinching.errors import PreconditionError
from pinching.model import SystemConfig

CFG = SystemConfig()

def test_t_factor_value():
    assert stationary.t_factor(2, 1, CFG) == pytest.approx(-2.0933, abs=0.01), \
        "incorrect T at the default geometry"

@pytest.mark.parametrize('form', tuple(TForm))
def test_t_factor_symmetric(form: TForm):
    cfg = SystemConfig(n=15, d=0.75)
    for k in range(1, 16):
        for kk in range(1, 16):
            if k != kk:
                assert stationary.t_factor(k, kk, cfg, form) == pytest.approx(
                    stationary.t_factor(kk, k, cfg, form), abs=1e-12), "T not symmetric"

def test_t_factor_translation():
    cfg = SystemConfig(n=15)
    values = {round(stationary.t_factor(k + 2, k, cfg), 12) for k in range(1, 14)}
    assert len(values) == 1, "T depends on more than k' - k"

@pytest.mark.parametrize(('d', 'height'), (
    (0.25, 3.0),
    (1.0, 5.0),
    (2.0, 10.0),
    (8.0, 5.0),
))
def test_t_factor_range(d: float, height: float):
    cfg = SystemConfig(n=15, d=d, height=height)
    for k in range(2, 16):
        for form in TForm:
            t = stationary.t_factor(k, 1, cfg, form)
            assert abs(t) <= 4, "|T| exceeds 4"
            bound = 1 / abs(k - 1.5) + 1 / abs(k - 0.5)
            assert abs(t) <= bound + 1e-12

def test_t_factor_same_user():
    with pytest.raises(PreconditionError):
        stationary.t_factor(3, 3, CFG)

def test_t_phasor():
    for form in TForm:
        for pair in ((1, 2), (2, 1), (1, 5), (4, 2)):
            phasor = stationary.t_phasor(*pair, CFG, form)
            assert phasor.real == pytest.approx(stationary.t_factor(*pair, CFG, form),
                                                abs=1e-12), "real part is not T"

def test_interference_prefactor():
    base = stationary.interference_prefactor(CFG)
    assert base == pytest.approx(CFG.wavelength ** 3 / (math.pi ** 2 * 2.0 ** 6 * 5.0))
    assert stationary.interference_prefactor(CFG.with_(d=4.0)) == pytest.approx(base / 64)
    assert stationary.interference_prefactor(CFG.with_(height=10.0)) == pytest.approx(base / 2)

def test_avg_interference_approx():
    term = stationary.avg_interference_approx(1, 3, CFG)
    assert term.t_value == stationary.t_factor(1, 3, CFG, TForm.CORRECTED), \
        "average interference does not default to the corrected T"
    assert term.i_bar == pytest.approx(
        stationary.interference_prefactor(CFG) * term.t_value ** 2, rel=1e-12)
    assert (term.k_from, term.k_to) == (1, 3)
    printed = stationary.avg_interference_approx(1, 3, CFG, TForm.PRINTED)
    assert printed.t_value == stationary.t_factor(1, 3, CFG)
    with pytest.raises(PreconditionError):
        stationary.InterferenceTerm(4.5, 1.0, 1, 2)
    with pytest.raises(PreconditionError):
        stationary.InterferenceTerm(1.0, -1.0, 1, 2)

def test_t_squared_matrix():
    cfg = SystemConfig(n=4, d=1.0)
    t_sq = stationary.t_squared_matrix(3, cfg)
    assert t_sq.shape == (3, 3) and not t_sq.flags.writeable
    assert np.all(np.diag(t_sq) == 0)
    assert t_sq[0, 2] == pytest.approx(stationary.t_factor(1, 3, cfg, TForm.CORRECTED) ** 2,
                                       rel=1e-12)
    louder = stationary.t_squared_matrix(3, cfg.with_pt_dbm(50))
    assert louder is t_sq, "T² recomputed for a new transmit power"
    for n in (0, 5):
        with pytest.raises(PreconditionError):
            stationary.t_squared_matrix(n, cfg)

def test_f_stationary():
    f = stationary.f_stationary(CFG)
    assert abs(f) == pytest.approx(math.sqrt(CFG.wavelength / CFG.height), rel=1e-12)
