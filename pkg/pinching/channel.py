"""Complex channel responses between pinching antennas and ground users."""
from __future__ import annotations
from dataclasses import dataclass
import logging
import math
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .model import Point3, SystemConfig, UserDrop, waveguide_x
from .placement import PaPlacement

__all__ = [
    'ChannelMatrix',
    'feed_point',
    'reduced_phase',
    'single_pa_response',
    'centralized_array_response',
    'distributed_channel_matrix',
]

logger = logging.getLogger(__name__)

_TWO_PI = 2 * math.pi

@dataclass(frozen=True)
class ChannelMatrix:
    """Channel of every user to the one PA on every waveguide.

    Attributes:
        entries: Complex array of shape ``(n_users, n_waveguides)``;
            row ``k - 1`` is the channel vector of user ``k``.
    """
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or 0 in entries.shape:
            raise PreconditionError(f'Channel matrix must be 2D and non-empty, '
                                    f'got shape {entries.shape}')
        if not np.all(np.isfinite(entries)):
            raise PreconditionError('Channel matrix has non-finite entries')
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def n_users(self) -> int:
        return self.entries.shape[0]

    @property
    def n_waveguides(self) -> int:
        return self.entries.shape[1]

    def row_norms_sq(self) -> np.ndarray:
        """||h_k||² for every user."""
        return np.sum(np.abs(self.entries) ** 2, axis=1)

    def gram(self) -> np.ndarray:
        """H Hᴴ with H having the user channels as rows."""
        return self.entries @ self.entries.conj().T

def feed_point(i: int, cfg: SystemConfig) -> Point3:
    """Input end s_{i,0} of waveguide ``i``."""
    return Point3(waveguide_x(i, cfg), -cfg.length / 2, cfg.height)

def reduced_phase(length, wavelength: float):
    """2π·length/wavelength reduced to [0, 2π).

    Whole cycles are removed before scaling by 2π so long paths keep
    their fractional phase to full precision.
    """
    cycles = np.asarray(length, dtype=float) / wavelength
    return _TWO_PI * (cycles - np.floor(cycles))

def _responses(distance, guide, cfg: SystemConfig) -> np.ndarray:
    """√η·exp(−j(2π/λ·distance + 2π/λ_g·guide))/distance, vectorized."""
    distance = np.asarray(distance, dtype=float)
    phase = reduced_phase(distance, cfg.wavelength) \
        + reduced_phase(guide, cfg.guided_wavelength)
    return math.sqrt(cfg.eta) * np.exp(-1j * np.mod(phase, _TWO_PI)) / distance

def _check_pa(pa: Point3, feed: Point3, cfg: SystemConfig) -> None:
    tol = 1e-9 * max(1.0, cfg.length)
    if abs(pa.z - cfg.height) > tol or abs(feed.z - cfg.height) > tol:
        raise PreconditionError(f'PA {pa} or feed {feed} is not at the waveguide '
                                f'height {cfg.height!r}')
    if abs(pa.y) > cfg.length / 2 + tol:
        raise PreconditionError(f'PA {pa} lies beyond the waveguide ends')
    if abs(pa.x - feed.x) > tol:
        raise PreconditionError(f'PA {pa} and feed {feed} are on different waveguides')
    if abs(feed.y + cfg.length / 2) > tol:
        raise PreconditionError(f'Feed {feed} is not at y = -L/2')

def single_pa_response(user: Point3, pa: Point3, feed: Point3,
                       cfg: SystemConfig) -> complex:
    """Response of one PA fed from ``feed`` at ``user``.

    Args:
        user: The receiving user.
        pa: The radiating PA, on a waveguide line.
        feed: The feed point of that waveguide.
        cfg: The system configuration.

    Returns:
        The complex gain, of magnitude √η/|user − pa|.

    Raises:
        PreconditionError: The user coincides with the PA or the PA is not
            on the waveguide fed by ``feed``.
    """
    _check_pa(pa, feed, cfg)
    distance = user.distance_to(pa)
    if distance == 0:
        raise PreconditionError(f'User {user} coincides with PA {pa}')
    return complex(_responses(distance, pa.distance_to(feed), cfg))

def centralized_array_response(user: Point3, pas: Sequence[Point3],
                               feed: Point3, cfg: SystemConfig) -> complex:
    """Exact coherent sum of the responses of several PAs on one waveguide."""
    if not pas:
        raise PreconditionError('Centralized array needs at least one PA')
    for pa in pas:
        _check_pa(pa, feed, cfg)
    distances = np.array([user.distance_to(pa) for pa in pas])
    if np.any(distances == 0):
        raise PreconditionError(f'User {user} coincides with a PA')
    guides = np.array([pa.distance_to(feed) for pa in pas])
    return complex(np.sum(_responses(distances, guides, cfg)))

def distributed_channel_matrix(drop: UserDrop, placement: PaPlacement,
                               cfg: SystemConfig) -> ChannelMatrix:
    """Channel matrix under one-PA-per-waveguide placement.

    Args:
        drop: The users.
        placement: Exactly one PA on each waveguide.
        cfg: The system configuration.
    """
    ys = placement.single_ys()
    if len(ys) != cfg.n:
        raise PreconditionError(f'Placement has {len(ys)} waveguides, config has {cfg.n}')
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n}')
    placement.check_bounds(cfg)
    xs_wg = cfg.waveguide_xs
    dx = drop.xs[:, None] - xs_wg[None, :]
    dy = drop.ys[:, None] - ys[None, :]
    distances = np.sqrt(dx ** 2 + dy ** 2 + cfg.height ** 2)
    guides = np.broadcast_to(ys + cfg.length / 2, distances.shape)
    return ChannelMatrix(_responses(distances, guides, cfg))
