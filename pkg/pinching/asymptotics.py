"""Approximated SE, its bounds and the SNR limits of both deployments.

The approximation replaces the inter-user interference of the distributed
MRT downlink by its stationary-phase average from :mod:`pinching.stationary`.
"""
from __future__ import annotations
from dataclasses import dataclass
import logging
import math
from typing import List, Tuple

import numpy as np
import pandas as pd

from .beamforming import Scheme
from .errors import PreconditionError
from .metrics import (SeResult, general_se, interference_limited_se,
                      se_centralized_exact, se_distributed, user_distances)
from .model import SystemConfig, UserDrop
from .stationary import TForm, avg_interference_approx, interference_prefactor

__all__ = [
    'Asymptote',
    'LowSnrLimits',
    'se_distributed_approx',
    'se_upper_bound',
    'se_lower_bound',
    'high_snr_limits',
    'measured_slopes',
    'low_snr_limits',
    'se_gap',
    'lemma1_table',
]

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class Asymptote:
    """C ≈ slope·log₂(P_t/σ²) + intercept."""
    slope: float
    intercept: float

    def __call__(self, snr: float) -> float:
        return self.slope * math.log2(snr) + self.intercept

@dataclass(frozen=True)
class LowSnrLimits:
    """C ≈ coefficient·P_t for both deployments, bit/s/Hz per watt."""
    centralized: float
    distributed: float

def se_distributed_approx(drop: UserDrop, cfg: SystemConfig,
                          t_form: TForm = TForm.CORRECTED) -> SeResult:
    """Distributed MRT SE with the stationary-phase interference."""
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n}')
    result = general_se(drop, cfg, cfg.n, 1, t_form)
    return SeResult(result.per_user_se, result.per_user_sinr,
                    result.interference_power, 'approximation')

def se_upper_bound(drop: UserDrop, cfg: SystemConfig) -> SeResult:
    """Interference-free bound Σ log₂(1 + P_t·A_k·η/(Nσ²))."""
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n}')
    return interference_limited_se(drop, cfg, cfg.n, 1, np.zeros((cfg.n, cfg.n)), 'upper')

def se_lower_bound(drop: UserDrop, cfg: SystemConfig) -> SeResult:
    """Bound with T² at its maximum 16, i.e. coupling α = 16λ³/(π²d⁶D)."""
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n}')
    alpha = 16 * interference_prefactor(cfg)
    return interference_limited_se(drop, cfg, cfg.n, 1,
                                   np.full((cfg.n, cfg.n), alpha), 'lower')

def high_snr_limits(cfg: SystemConfig) -> Tuple[Asymptote, Asymptote]:
    """High-SNR asymptotes of the centralized and distributed SE.

    Intercepts are for users right below their waveguides in the worst
    case geometry.

    Returns:
        ``(centralized, distributed)``; slopes 1 and N.
    """
    offsets = np.arange(cfg.n)[:, None] - np.arange(cfg.n)[None, :]
    a = np.sum(1 / (offsets ** 2 * cfg.d ** 2 + cfg.height ** 2), axis=1)
    centralized = Asymptote(1.0, math.log2(cfg.n * cfg.eta / cfg.height ** 2))
    distributed = Asymptote(float(cfg.n),
                            math.fsum(np.log2(cfg.eta * a / cfg.n)))
    return centralized, distributed

def measured_slopes(drop: UserDrop, cfg: SystemConfig, snr: float = 1e16,
                    ratio: float = 2.0) -> Tuple[float, float]:
    """Finite-difference slopes of the exact SE against log₂(P_t).

    The distributed SE uses ZF, which stays interference-free at any
    power.

    Returns:
        ``(centralized slope, distributed slope)``.
    """
    p_low = snr * cfg.noise_power
    low, high = cfg.with_(p_t=p_low), cfg.with_(p_t=ratio * p_low)
    step = math.log2(ratio)
    c_slope = (se_centralized_exact(drop, high).total_se
               - se_centralized_exact(drop, low).total_se) / step
    d_slope = (se_distributed(drop, high, Scheme.ZF).total_se
               - se_distributed(drop, low, Scheme.ZF).total_se) / step
    logger.debug('Slopes at P_t/σ²=%g: centralized %.6f, distributed %.6f',
                 snr, c_slope, d_slope)
    return c_slope, d_slope

def low_snr_limits(drop: UserDrop, cfg: SystemConfig) -> LowSnrLimits:
    """Coefficients of the linear low-SNR forms.

    Centralized: Σ_k η/(d_kk²σ² ln 2), from the slot-averaged
    log₂(1 + P_t·N·η/(d_kk²σ²)). Distributed: Σ_k A_k·η/(Nσ² ln 2). As
    A_k/N ≤ 1/d_kk², the distributed one is never larger.
    """
    dist = user_distances(drop, cfg)
    scale = cfg.eta / (cfg.noise_power * math.log(2))
    centralized = scale * math.fsum(1 / np.diag(dist) ** 2)
    distributed = scale * math.fsum(np.sum(1 / dist ** 2, axis=1)) / cfg.n
    return LowSnrLimits(centralized, distributed)

def se_gap(drop: UserDrop, cfg: SystemConfig, scheme: Scheme = Scheme.ZF) -> float:
    """Exact distributed SE minus exact centralized SE."""
    return se_distributed(drop, cfg, scheme).total_se \
        - se_centralized_exact(drop, cfg).total_se

def lemma1_table(cfg: SystemConfig) -> pd.DataFrame:
    """T and the approximate average interference for every ordered pair."""
    rows: List[dict] = []
    for k_from in range(1, cfg.n + 1):
        for k_to in range(1, cfg.n + 1):
            if k_from == k_to:
                continue
            row = {'k_from': k_from, 'k_to': k_to}
            for form in TForm:
                term = avg_interference_approx(k_from, k_to, cfg, form)
                row[f't_{form.value}'] = term.t_value
                row[f'i_bar_{form.value}'] = term.i_bar
            rows.append(row)
    return pd.DataFrame(rows)
