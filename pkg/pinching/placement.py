"""PA placement strategies."""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .errors import DegenerateGeometryError, PreconditionError
from .model import Point3, SystemConfig, UserDrop, drop_rng, waveguide_x

__all__ = [
    'PlacementMode',
    'PaPlacement',
    'centralized_offsets',
    'centralized_inphase',
    'distributed_nearest',
    'equal_spacing',
    'random_reference',
    'deviation_design_two_users',
    'deviation_residual',
    'apply_deviations',
]

logger = logging.getLogger(__name__)

class PlacementMode(Enum):
    """How the PAs of a placement were chosen.

    Attributes:
        CENTRALIZED: All PAs in phase on the serving waveguide.
        DISTRIBUTED: One PA per waveguide at its user's closest point.
        BASELINE_EQUAL: All PAs equally spaced along the serving waveguide.
        BASELINE_RANDOM: One PA per waveguide at a random point.
    """
    CENTRALIZED = 'centralized'
    DISTRIBUTED = 'distributed'
    BASELINE_EQUAL = 'baseline-equal'
    BASELINE_RANDOM = 'baseline-random'

    @property
    def single_waveguide(self) -> bool:
        return self in (PlacementMode.CENTRALIZED, PlacementMode.BASELINE_EQUAL)

@dataclass(frozen=True)
class PaPlacement:
    """Positions of the activated PAs.

    Attributes:
        per_waveguide: For every waveguide (index 0 being waveguide 1) the
            ordered y-coordinates of its PAs, meters.
        mode: The strategy that produced the placement.
        serving: The serving waveguide in the single-waveguide modes.
    """
    per_waveguide: Tuple[Tuple[float, ...], ...]
    mode: PlacementMode
    serving: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'per_waveguide', tuple(
            tuple(float(y) for y in ys) for ys in self.per_waveguide))
        if self.mode.single_waveguide:
            if self.serving is None or not 1 <= self.serving <= len(self.per_waveguide):
                raise PreconditionError(
                    f'{self.mode.value} placement needs a serving waveguide in '
                    f'[1, {len(self.per_waveguide)}], got {self.serving!r}')
            for i, ys in enumerate(self.per_waveguide, start=1):
                if (i == self.serving) != bool(ys):
                    raise PreconditionError(
                        f'{self.mode.value} placement must put all PAs on '
                        f'waveguide {self.serving}')
        else:
            if self.serving is not None:
                raise PreconditionError(f'{self.mode.value} placement has no serving waveguide')
            for i, ys in enumerate(self.per_waveguide, start=1):
                if len(ys) != 1:
                    raise PreconditionError(
                        f'{self.mode.value} placement needs exactly one PA on '
                        f'waveguide {i}, got {len(ys)}')

    @property
    def n_waveguides(self) -> int:
        return len(self.per_waveguide)

    def check_bounds(self, cfg: SystemConfig) -> None:
        """Raise :class:`PreconditionError` unless every PA is on its waveguide."""
        if self.n_waveguides != cfg.n:
            raise PreconditionError(
                f'Placement has {self.n_waveguides} waveguides, config has {cfg.n}')
        tol = 1e-12 * cfg.length
        for i, ys in enumerate(self.per_waveguide, start=1):
            for q, y in enumerate(ys, start=1):
                if abs(y) > cfg.length / 2 + tol:
                    raise PreconditionError(
                        f'PA {q} on waveguide {i} at y={y!r} exceeds the '
                        f'waveguide ends ±{cfg.length / 2!r}')

    def pa_points(self, i: int, cfg: SystemConfig) -> List[Point3]:
        """3D positions of the PAs on waveguide ``i``."""
        x = waveguide_x(i, cfg)
        return [Point3(x, y, cfg.height) for y in self.per_waveguide[i - 1]]

    def single_ys(self) -> np.ndarray:
        """y of the one PA on every waveguide (one-PA-per-waveguide modes)."""
        if self.mode.single_waveguide:
            raise PreconditionError(
                f'{self.mode.value} placement does not have one PA per waveguide')
        return np.array([ys[0] for ys in self.per_waveguide])

    @classmethod
    def from_str(cls, s: str) -> PaPlacement:
        """Parse the audit table written by ``str(placement)``."""
        lines = [line.strip() for line in s.strip().splitlines()]
        if not lines or not lines[0].startswith('# mode='):
            raise PreconditionError('Placement table must start with "# mode=..."')
        header = dict(part.split('=', 1) for part in lines[0][1:].split())
        mode = PlacementMode(header['mode'])
        serving = int(header['serving']) if header.get('serving', 'none') != 'none' else None
        n_wg = int(header['waveguides'])
        if lines[1] != 'waveguide,pa,y':
            raise PreconditionError(f'Unexpected placement table header {lines[1]!r}')
        per_waveguide: List[List[float]] = [[] for _ in range(n_wg)]
        for line in lines[2:]:
            i_s, q_s, y_s = line.split(',')
            i, q = int(i_s), int(q_s)
            if q != len(per_waveguide[i - 1]) + 1:
                raise PreconditionError(f'PA rows out of order at {line!r}')
            per_waveguide[i - 1].append(float(y_s))
        return cls(tuple(map(tuple, per_waveguide)), mode, serving)

    def __str__(self) -> str:
        """Audit table: a header comment then ``waveguide,pa,y`` rows."""
        serving = 'none' if self.serving is None else self.serving
        rows = [f'# mode={self.mode.value} serving={serving} '
                f'waveguides={self.n_waveguides}', 'waveguide,pa,y']
        for i, ys in enumerate(self.per_waveguide, start=1):
            rows.extend(f'{i},{q},{y!r}' for q, y in enumerate(ys, start=1))
        return '\n'.join(rows)

def centralized_offsets(n_pas: int) -> List[int]:
    """Multiples of λ_e at which the in-phase PAs sit around the reference.

    An odd count is centered on the reference point; an even count drops
    the reference PA and keeps ±1..±n/2.
    """
    if n_pas < 1:
        raise PreconditionError(f'n_pas={n_pas} must be >= 1')
    half = n_pas // 2
    if n_pas % 2:
        return list(range(-half, half + 1))
    return [q for q in range(-half, half + 1) if q != 0]

def centralized_inphase(user: Point3, serving_wg: int, n_pas: int,
                        cfg: SystemConfig) -> PaPlacement:
    """In-phase PA array on ``serving_wg`` around the user's closest point.

    Raises:
        PreconditionError: The window of PAs exceeds the waveguide ends.
    """
    waveguide_x(serving_wg, cfg)
    spacing = cfg.element_spacing
    ys = [user.y + q * spacing for q in centralized_offsets(n_pas)]
    if ys[0] < -cfg.length / 2 or ys[-1] > cfg.length / 2:
        raise PreconditionError(
            f'{n_pas} in-phase PAs around y={user.y!r} span '
            f'[{ys[0]!r}, {ys[-1]!r}], beyond the waveguide ends ±{cfg.length / 2!r}')
    per_waveguide = tuple(tuple(ys) if i == serving_wg else ()
                          for i in range(1, cfg.n + 1))
    return PaPlacement(per_waveguide, PlacementMode.CENTRALIZED, serving_wg)

def distributed_nearest(drop: UserDrop, cfg: SystemConfig) -> PaPlacement:
    """One PA per waveguide at the point closest to the user it serves."""
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n} waveguides')
    placement = PaPlacement(tuple((y,) for y in drop.ys), PlacementMode.DISTRIBUTED)
    placement.check_bounds(cfg)
    return placement

def equal_spacing(n_pas: int, cfg: SystemConfig, serving_wg: int = 1) -> PaPlacement:
    """``n_pas`` PAs spread evenly from one waveguide end to the other."""
    if n_pas < 2:
        raise PreconditionError(f'Equal spacing needs n_pas >= 2, got {n_pas}')
    waveguide_x(serving_wg, cfg)
    ys = tuple(np.linspace(-cfg.length / 2, cfg.length / 2, n_pas))
    per_waveguide = tuple(ys if i == serving_wg else ()
                          for i in range(1, cfg.n + 1))
    return PaPlacement(per_waveguide, PlacementMode.BASELINE_EQUAL, serving_wg)

def random_reference(drop: UserDrop, seed: int, cfg: SystemConfig) -> PaPlacement:
    """One PA per waveguide at a uniformly random point of it."""
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n} waveguides')
    ys = drop_rng(seed).uniform(-cfg.length / 2, cfg.length / 2, size=cfg.n)
    return PaPlacement(tuple((float(y),) for y in ys), PlacementMode.BASELINE_RANDOM)

def _deviated_distances(drop: UserDrop, deltas: Sequence[float],
                        cfg: SystemConfig) -> np.ndarray:
    """d̃[k, i] with PA i moved from y_i to y_i − δ_i."""
    dx = drop.xs[:, None] - cfg.waveguide_xs[None, :]
    dy = drop.ys[:, None] - drop.ys[None, :] + np.asarray(deltas, dtype=float)[None, :]
    return np.sqrt(dx ** 2 + dy ** 2 + cfg.height ** 2)

def _check_two_users(drop: UserDrop, cfg: SystemConfig) -> None:
    if drop.n != 2 or cfg.n != 2:
        raise PreconditionError(
            f'The deviation design needs exactly two users and waveguides, '
            f'got {drop.n} and {cfg.n}')
    y1, y2 = drop.ys
    if y1 == y2:
        raise DegenerateGeometryError(
            f'Both users share y={y1!r}; the deviations cannot change the '
            f'interference phase in this geometry')

def deviation_residual(drop: UserDrop, deltas: Sequence[float],
                       cfg: SystemConfig) -> float:
    """How far ``deltas`` are from solving the linearised out-of-phase
    condition, in meters, over the best branch z."""
    _check_two_users(drop, cfg)
    d = _deviated_distances(drop, (0.0, 0.0), cfg)
    y1, y2 = drop.ys
    delta1, delta2 = deltas
    lhs = d[0, 0] + d[1, 1] - d[0, 1] - d[1, 0]
    res = lhs - (y1 - y2) / d[0, 1] * delta2 - (y2 - y1) / d[1, 0] * delta1 \
        - cfg.wavelength / 2
    return abs(res - cfg.wavelength * round(res / cfg.wavelength))

def deviation_design_two_users(drop: UserDrop, cfg: SystemConfig,
                               refine: bool = False) -> Tuple[float, float]:
    """Small PA deviations that put the two users' interference paths
    out of phase.

    The linearised condition is one equation in two unknowns. The
    correction is split so that both deviations contribute equally, which
    gives ``δ₁ = −δ₂·d₂₁/d₁₂``, and the branch ``z`` is the one with the
    smallest deviations.

    Args:
        drop: Two users, each served by the PA on its own waveguide.
        cfg: Configuration with ``n = 2``.
        refine: Solve the exact (not linearised) phase condition along the
            same direction. The result then no longer satisfies the
            linearised equation exactly.

    Returns:
        ``(δ₁, δ₂)`` in meters; PA ``i`` moves from ``y_i`` to ``y_i − δ_i``.

    Raises:
        DegenerateGeometryError: Both users share one y-coordinate.
    """
    _check_two_users(drop, cfg)
    lam = cfg.wavelength
    d = _deviated_distances(drop, (0.0, 0.0), cfg)
    y1, y2 = drop.ys
    lhs = d[0, 0] + d[1, 1] - d[0, 1] - d[1, 0]
    z = round((lhs - lam / 2) / lam)
    rhs = lhs - lam / 2 - z * lam
    # each unknown takes half of the correction
    delta1 = rhs / 2 * d[1, 0] / (y2 - y1)
    delta2 = rhs / 2 * d[0, 1] / (y1 - y2)
    logger.debug('Deviation design: branch z=%d, linear deltas (%g, %g)',
                 z, delta1, delta2)
    if not refine or rhs == 0:
        return float(delta1), float(delta2)

    target = lam / 2 + z * lam

    def mismatch(t: float) -> float:
        dd = _deviated_distances(drop, (t * delta1, t * delta2), cfg)
        return dd[0, 0] + dd[1, 1] - dd[0, 1] - dd[1, 0] - target

    low_value = mismatch(0.0)
    for high in (2.0, 4.0, 8.0):
        if low_value * mismatch(high) < 0:
            t = optimize.brentq(mismatch, 0.0, high, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            return float(t * delta1), float(t * delta2)
    logger.warning('No bracket for the exact deviation condition; '
                   'keeping the linearised solution')
    return float(delta1), float(delta2)

def apply_deviations(placement: PaPlacement, deltas: Sequence[float]) -> PaPlacement:
    """Move the PA on waveguide ``i`` from ``y_i`` to ``y_i − δ_i``."""
    ys = placement.single_ys()
    if len(deltas) != len(ys):
        raise PreconditionError(f'{len(deltas)} deviations for {len(ys)} waveguides')
    moved = ys - np.asarray(deltas, dtype=float)
    return PaPlacement(tuple((float(y),) for y in moved), placement.mode)
