"""Spectral and energy efficiency of both deployments and the baselines."""
from __future__ import annotations
from dataclasses import dataclass, field
import logging
import math
from typing import Dict, Optional

import numpy as np

from .beamforming import (BeamformerSet, PowerAllocation, Scheme, beamformer,
                          uniform_power, zf)
from .channel import (ChannelMatrix, centralized_array_response,
                      distributed_channel_matrix, feed_point, reduced_phase)
from .errors import PreconditionError
from .model import SystemConfig, UserDrop, nearest_waveguide
from .placement import (PaPlacement, centralized_inphase, distributed_nearest,
                        equal_spacing)
from .stationary import TForm, interference_prefactor, t_squared_matrix

__all__ = [
    'P_RF',
    'SeResult',
    'user_distances',
    'se_centralized_exact',
    'se_centralized_closed',
    'se_distributed_exact',
    'se_distributed',
    'se_distributed_mrt_closed',
    'se_zf_closed',
    'interference_limited_se',
    'general_se',
    'se_general',
    'se_equal_spacing',
    'energy_efficiency',
]

logger = logging.getLogger(__name__)

P_RF = 0.0316
"""Power consumed by one RF chain, watts."""

@dataclass(frozen=True)
class SeResult:
    """Spectral efficiency of one drop under one strategy.

    Attributes:
        per_user_se: SE of every user, bit/s/Hz, including the 1/N
            time-slot factor where the strategy serves users in turn.
        per_user_sinr: Linear SINR of every user.
        interference_power: ``[k, k']`` is the power, watts, that the
            stream of user ``k'`` leaves at user ``k``. The diagonal is 0.
        strategy: Short name of the strategy that produced the result.
        extras: Auxiliary scalars specific to the strategy.
    """
    per_user_se: np.ndarray
    per_user_sinr: np.ndarray
    interference_power: np.ndarray
    strategy: str = ''
    extras: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ('per_user_se', 'per_user_sinr', 'interference_power'):
            value = np.array(getattr(self, name), dtype=float)
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if np.any(self.per_user_sinr < 0):
            raise PreconditionError('SINR cannot be negative')

    @property
    def total_se(self) -> float:
        """Sum of the per-user SE."""
        return math.fsum(self.per_user_se)

    @property
    def n_users(self) -> int:
        return len(self.per_user_se)

    def to_record(self, **context) -> Dict[str, object]:
        """Flat record for CSV emission; ``context`` columns come first."""
        record: Dict[str, object] = {'strategy': self.strategy, **context}
        for k, sinr in enumerate(self.per_user_sinr, start=1):
            record[f'sinr_{k}'] = float(sinr)
        record['total_se'] = self.total_se
        return record

def _result(sinr: np.ndarray, interference: np.ndarray, strategy: str,
            slot: float = 1.0, extras: Optional[Dict[str, float]] = None) -> SeResult:
    sinr = np.asarray(sinr, dtype=float)
    return SeResult(slot * np.log2(1 + sinr), sinr, interference, strategy, extras or {})

def user_distances(drop: UserDrop, cfg: SystemConfig,
                   placement: Optional[PaPlacement] = None) -> np.ndarray:
    """Exact d[k, i] from user k to the single PA on waveguide i.

    Without ``placement`` the PAs sit at the users' closest points.
    """
    ys = drop.ys if placement is None else placement.single_ys()
    dx = drop.xs[:, None] - cfg.waveguide_xs[None, :len(ys)]
    dy = drop.ys[:, None] - ys[None, :]
    return np.sqrt(dx ** 2 + dy ** 2 + cfg.height ** 2)

def _check_drop(drop: UserDrop, cfg: SystemConfig) -> None:
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n}')

def se_centralized_exact(drop: UserDrop, cfg: SystemConfig,
                         n_pas: Optional[int] = None) -> SeResult:
    """Centralized deployment with the exact coherent array sum.

    Users are served in turn; in user ``k``'s slot all ``n_pas`` PAs sit
    in phase on its nearest waveguide and share the power P_t equally.

    Args:
        drop: The users.
        cfg: The system configuration.
        n_pas: PAs per slot, ``cfg.n`` by default.
    """
    _check_drop(drop, cfg)
    n_pas = cfg.n if n_pas is None else n_pas
    snr = np.empty(drop.n)
    for k, user in enumerate(drop.positions):
        wg = nearest_waveguide(user, cfg)
        placement = centralized_inphase(user, wg, n_pas, cfg)
        gain = centralized_array_response(
            user, placement.pa_points(wg, cfg), feed_point(wg, cfg), cfg)
        snr[k] = cfg.p_t / n_pas * abs(gain) ** 2 / cfg.noise_power
    return _result(snr, np.zeros((drop.n, drop.n)), 'centralized',
                   slot=1 / drop.n)

def se_centralized_closed(drop: UserDrop, cfg: SystemConfig,
                          n_pas: Optional[int] = None) -> SeResult:
    """Per-user closed form log₂(1 + P_t·n_pas·η/(d_kk²σ²)), slot-averaged."""
    _check_drop(drop, cfg)
    n_pas = cfg.n if n_pas is None else n_pas
    if n_pas < 1:
        raise PreconditionError(f'n_pas={n_pas} must be >= 1')
    d_kk_sq = (drop.xs - cfg.waveguide_xs) ** 2 + cfg.height ** 2
    snr = cfg.p_t * n_pas * cfg.eta / (d_kk_sq * cfg.noise_power)
    return _result(snr, np.zeros((drop.n, drop.n)), 'centralized-closed',
                   slot=1 / drop.n)

def se_distributed_exact(drop: UserDrop, placement: PaPlacement, W: BeamformerSet,
                         p: PowerAllocation, cfg: SystemConfig) -> SeResult:
    """SINR-based SE of the distributed deployment with the exact channel."""
    H = distributed_channel_matrix(drop, placement, cfg)
    if W.columns.shape != (H.n_waveguides, H.n_users) or len(p.p) != H.n_users:
        raise PreconditionError(
            f'Beamformers {W.columns.shape} and powers {len(p.p)} do not fit '
            f'a {H.n_users}x{H.n_waveguides} channel')
    # gains[k, k'] = h_kᵀ w_k'
    gains = H.entries @ W.columns
    received = np.abs(gains) ** 2 * p.p[None, :]
    signal = np.diag(received).copy()
    interference = received - np.diag(signal)
    sinr = signal / (interference.sum(axis=1) + cfg.noise_power)
    return _result(sinr, interference, f'distributed-{W.scheme.value}')

def se_distributed(drop: UserDrop, cfg: SystemConfig, scheme: Scheme = Scheme.MRT,
                   placement: Optional[PaPlacement] = None) -> SeResult:
    """Distributed SE with uniform power; nearest-point PAs by default."""
    placement = distributed_nearest(drop, cfg) if placement is None else placement
    H = distributed_channel_matrix(drop, placement, cfg)
    return se_distributed_exact(drop, placement, beamformer(H, scheme),
                                uniform_power(cfg), cfg)

def se_distributed_mrt_closed(drop: UserDrop, cfg: SystemConfig,
                              placement: Optional[PaPlacement] = None) -> SeResult:
    """MRT SE evaluated term by term from the PA distances.

    Independent of the channel-matrix route: the interference of user
    ``k'`` at user ``k`` is
    p·|Σ_i exp(−j2π(d_ki − d_k'i)/λ)/(d_k'i d_ki)|²/Σ_i d_k'i⁻²
    against the noise σ²/η.
    """
    _check_drop(drop, cfg)
    dist = user_distances(drop, cfg, placement)
    inv_sq = 1 / dist ** 2
    a = inv_sq.sum(axis=1)
    power = cfg.p_t / cfg.n
    n = drop.n
    interference = np.zeros((n, n))
    for k in range(n):
        for kk in range(n):
            if kk == k:
                continue
            phase = reduced_phase(dist[k] - dist[kk], cfg.wavelength)
            cross = np.sum(np.exp(-1j * phase) / (dist[kk] * dist[k]))
            interference[k, kk] = power * abs(cross) ** 2 / a[kk]
    sinr = power * a / (interference.sum(axis=1) + cfg.noise_power / cfg.eta)
    return _result(sinr, cfg.eta * interference, 'distributed-mrt-closed')

def se_zf_closed(H: ChannelMatrix, cfg: SystemConfig) -> SeResult:
    """N·log₂(1 + αP_t/(Nσ²)) with the ZF normalisation α of ``H``."""
    alpha = zf(H).alpha
    snr = np.full(H.n_users, alpha * cfg.p_t / (H.n_users * cfg.noise_power))
    return _result(snr, np.zeros((H.n_users, H.n_users)), 'distributed-zf-closed')

def interference_limited_se(drop: UserDrop, cfg: SystemConfig, i_users: int, q_pas: int,
                            coupling: np.ndarray, strategy: str) -> SeResult:
    """SE with the interference given as an average over user positions.

    SINR_k = p·A_k / (Σ_{k'≠k} p·coupling[k, k']/A_k' + σ²/(ηQ)) with
    p = P_t/I and A_k = Σ_i 1/d_{k,i}², the row being the victim.
    """
    dist = user_distances(drop, cfg)
    a = np.sum(1 / dist ** 2, axis=1)
    power = cfg.p_t / i_users
    interference = power * coupling / a[None, :]
    np.fill_diagonal(interference, 0.0)
    noise = cfg.noise_power / (cfg.eta * q_pas)
    sinr = power * a / (interference.sum(axis=1) + noise)
    return _result(sinr, cfg.eta * interference, strategy)

def general_se(drop: UserDrop, cfg: SystemConfig, i_users: int, q_pas: int,
               t_form: TForm = TForm.CORRECTED) -> SeResult:
    """I users each served by Q PAs, without the I·Q = N restriction.

    ``drop`` holds exactly the ``i_users`` served users.
    """
    if drop.n != i_users or i_users > cfg.n:
        raise PreconditionError(
            f'Drop of {drop.n} users does not match I={i_users} (N={cfg.n})')
    coupling = interference_prefactor(cfg) * t_squared_matrix(i_users, cfg, t_form)
    return interference_limited_se(drop, cfg, i_users, q_pas, coupling,
                                   f'general-I{i_users}-Q{q_pas}')

def se_general(drop: UserDrop, cfg: SystemConfig, i_users: int, q_pas: int,
               t_form: TForm = TForm.CORRECTED) -> SeResult:
    """SE with ``i_users`` served at once by ``q_pas`` PAs each.

    Uses the stationary-phase interference approximation.

    Raises:
        PreconditionError: ``i_users·q_pas != cfg.n`` or the drop has fewer
            than ``i_users`` users.
    """
    if not 1 <= i_users <= cfg.n or q_pas < 1:
        raise PreconditionError(f'I={i_users}, Q={q_pas} out of range for N={cfg.n}')
    if i_users * q_pas != cfg.n:
        raise PreconditionError(
            f'I={i_users} times Q={q_pas} must equal the number of PAs N={cfg.n}')
    if drop.n < i_users:
        raise PreconditionError(f'Drop has {drop.n} users, {i_users} requested')
    return general_se(drop.subset(i_users), cfg, i_users, q_pas, t_form)

def se_equal_spacing(drop: UserDrop, cfg: SystemConfig, n_pas: int) -> SeResult:
    """Centralized deployment with equally spaced PAs.

    The per-user SNR uses the exact coherent sum. The magnitude-only value
    (1/n)·(Σ_q 1/d_q)², which assumes the PAs add in phase, is reported
    in ``extras['literal_total_se']``.
    """
    _check_drop(drop, cfg)
    snr = np.empty(drop.n)
    snr_literal = np.empty(drop.n)
    for k, user in enumerate(drop.positions):
        wg = nearest_waveguide(user, cfg)
        pas = equal_spacing(n_pas, cfg, serving_wg=wg).pa_points(wg, cfg)
        gain = centralized_array_response(user, pas, feed_point(wg, cfg), cfg)
        snr[k] = cfg.p_t / n_pas * abs(gain) ** 2 / cfg.noise_power
        inv = math.fsum(1 / user.distance_to(pa) for pa in pas)
        snr_literal[k] = cfg.p_t * cfg.eta * inv ** 2 / (n_pas * cfg.noise_power)
    literal = math.fsum(np.log2(1 + snr_literal)) / drop.n
    result = _result(snr, np.zeros((drop.n, drop.n)), 'equal-spacing',
                     slot=1 / drop.n, extras={'literal_total_se': literal})
    logger.debug('Equal spacing: coherent %.6g vs magnitude-only %.6g bit/s/Hz',
                 result.total_se, literal)
    return result

def energy_efficiency(se: float, n_rf: int, cfg: SystemConfig,
                      p_rf: float = P_RF) -> float:
    """SE per watt consumed by ``n_rf`` RF chains and the transmit power."""
    if n_rf < 1:
        raise PreconditionError(f'n_rf={n_rf} must be >= 1')
    return se / (n_rf * p_rf + cfg.p_t)
