"""Physical configuration, coordinate geometry and user drops."""
from __future__ import annotations
from dataclasses import dataclass, replace
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import PreconditionError

__all__ = [
    'SPEED_OF_LIGHT',
    'CONFIG_KEYS',
    'DEFAULT_SEED',

    'dbm_to_watt',
    'watt_to_dbm',
    'SystemConfig',
    'Point3',
    'UserDrop',
    'waveguide_x',
    'nearest_waveguide',
    'drop_rng',
    'drop_seed',
    'sample_users',
    'fixed_users',
    'parse_config',
    'load_config',
]

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 2.99792458e8
"""Speed of light in vacuum, m/s."""

DEFAULT_SEED = 0

# file key -> SystemConfig field; noise_w/pt_w are the exact forms
CONFIG_KEYS = {
    'n': 'n',
    'd': 'd',
    'D': 'height',
    'L': 'length',
    'fc_hz': 'f_c',
    'n_eff': 'n_eff',
    'noise_dbm': 'noise_power',
    'pt_dbm': 'p_t',
    'noise_w': 'noise_power',
    'pt_w': 'p_t',
    'seed': None,
}

PathLike = Union[str, Path]

def dbm_to_watt(v: float) -> float:
    """Convert a power level from dBm to watts."""
    if not math.isfinite(v):
        raise PreconditionError(f'Power level {v!r} dBm is not finite')
    return 10 ** ((v - 30) / 10)

def watt_to_dbm(v: float) -> float:
    """Convert a power in watts to dBm."""
    if not v > 0:
        raise PreconditionError(f'Power {v!r} W must be positive to express in dBm')
    return 10 * math.log10(v) + 30

@dataclass(frozen=True)
class SystemConfig:
    """Immutable physical and geometric parameters of the system.

    Derived constants are properties so they can never drift away from
    the inputs they are computed from.

    Attributes:
        n: Number of waveguides, which is also the number of users and
            the number of pinching antennas (PAs).
        d: Spacing of adjacent waveguides, meters.
        height: Height ``D`` of the waveguides above the ground, meters.
        length: Length ``L`` of every waveguide, meters.
        f_c: Carrier frequency, Hz.
        n_eff: Effective refractive index of the dielectric waveguide.
        noise_power: Noise power, watts.
        p_t: Total transmit power, watts.
    """
    n: int = 5
    d: float = 2.0
    height: float = 5.0
    length: float = 10.0
    f_c: float = 28e9
    n_eff: float = 1.4
    noise_power: float = 1e-12
    p_t: float = 1e-3

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise PreconditionError(f'n={self.n!r} must be a positive integer')
        object.__setattr__(self, 'n', int(self.n))
        for name in ('d', 'height', 'length', 'f_c', 'n_eff', 'noise_power', 'p_t'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise PreconditionError(f'{name}={value!r} is not finite')
            object.__setattr__(self, name, value)
        for name in ('d', 'height', 'length', 'f_c', 'noise_power'):
            if getattr(self, name) <= 0:
                raise PreconditionError(f'{name}={getattr(self, name)!r} must be > 0')
        if self.n_eff < 1:
            raise PreconditionError(f'n_eff={self.n_eff!r} must be >= 1')
        if self.p_t < 0:
            raise PreconditionError(f'p_t={self.p_t!r} must be >= 0')

    @property
    def wavelength(self) -> float:
        """Free-space wavelength λ = c/f_c."""
        return SPEED_OF_LIGHT / self.f_c

    @property
    def guided_wavelength(self) -> float:
        """In-waveguide wavelength λ_g = λ/n_eff."""
        return self.wavelength / self.n_eff

    @property
    def element_spacing(self) -> float:
        """In-phase spacing λ_e of adjacent PAs on one waveguide."""
        return self.wavelength / self.n_eff

    @property
    def eta(self) -> float:
        """Channel gain at the 1 m reference distance, (λ/4π)²."""
        return (self.wavelength / (4 * math.pi)) ** 2

    @property
    def y_margin(self) -> float:
        """Distance kept between sampled users and the waveguide ends."""
        return self.n * self.element_spacing

    @property
    def waveguide_xs(self) -> np.ndarray:
        """x-coordinates of all waveguides, index 0 being waveguide 1."""
        return np.arange(self.n) * self.d

    @property
    def pt_dbm(self) -> float:
        return watt_to_dbm(self.p_t) if self.p_t > 0 else -math.inf

    @property
    def noise_dbm(self) -> float:
        return watt_to_dbm(self.noise_power)

    def with_(self, **changes) -> SystemConfig:
        """Copy of this config with some fields replaced."""
        return replace(self, **changes)

    def with_pt_dbm(self, pt_dbm: float) -> SystemConfig:
        return replace(self, p_t=dbm_to_watt(pt_dbm))

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> SystemConfig:
        """Build a config from file keys, ignoring ``seed``.

        The exact ``noise_w``/``pt_w`` keys win over their dBm forms.
        """
        kwargs: Dict[str, float] = {}
        exact = {}
        for key, raw in values.items():
            if key not in CONFIG_KEYS:
                raise PreconditionError(
                    f'Unknown config key {key!r}; expected one of '
                    f'{", ".join(CONFIG_KEYS)}')
            field_name = CONFIG_KEYS[key]
            if field_name is None:
                continue
            try:
                value = float(raw)
            except ValueError:
                raise PreconditionError(
                    f'Config key {key!r} has non-numeric value {raw!r}') from None
            if key == 'pt_dbm' and value == -math.inf:
                value = 0.0
            elif key in ('noise_dbm', 'pt_dbm'):
                value = dbm_to_watt(value)
            if key in ('noise_w', 'pt_w'):
                exact[field_name] = value
            else:
                kwargs[field_name] = value
        kwargs.update(exact)
        if 'n' in kwargs:
            if kwargs['n'] != int(kwargs['n']):
                raise PreconditionError(f'n={kwargs["n"]!r} must be an integer')
            kwargs['n'] = int(kwargs['n'])
        return cls(**kwargs)

    @classmethod
    def from_str(cls, s: str) -> SystemConfig:
        """SystemConfig.from_str('n=5\\nd=2') -> SystemConfig"""
        return cls.from_mapping(parse_config(s))

    def __str__(self) -> str:
        """str(cfg) -> key=value lines in the config file format"""
        return '\n'.join(f'{key}={value}' for key, value in (
            ('n', self.n), ('d', repr(self.d)), ('D', repr(self.height)),
            ('L', repr(self.length)), ('fc_hz', repr(self.f_c)),
            ('n_eff', repr(self.n_eff)), ('noise_dbm', repr(self.noise_dbm)),
            ('pt_dbm', repr(self.pt_dbm)),
        ))

    def to_record(self) -> Dict[str, str]:
        """Exact key=value form, reproducing this config bit for bit."""
        return {
            'n': str(self.n), 'd': repr(self.d), 'D': repr(self.height),
            'L': repr(self.length), 'fc_hz': repr(self.f_c),
            'n_eff': repr(self.n_eff), 'noise_w': repr(self.noise_power),
            'pt_w': repr(self.p_t),
        }

@dataclass(frozen=True)
class Point3:
    """A point in the 3D Cartesian frame, meters."""
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        for name in ('x', 'y', 'z'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise PreconditionError(f'Coordinate {name}={value!r} is not finite')
            object.__setattr__(self, name, value)

    def distance_to(self, other: Point3) -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))

    def __str__(self) -> str:
        return f'({self.x!r}, {self.y!r}, {self.z!r})'

    __repr__ = __str__

@dataclass(frozen=True)
class UserDrop:
    """One realization of the ground users' positions.

    Attributes:
        positions: One :class:`Point3` per user, user ``k`` at index
            ``k - 1``.
        seed: The seed that produced the drop, if it was sampled.
    """
    positions: Tuple[Point3, ...]
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'positions', tuple(self.positions))
        if not self.positions:
            raise PreconditionError('A drop needs at least one user')
        for k, pos in enumerate(self.positions, start=1):
            if pos.z != 0:
                raise PreconditionError(f'User {k} is not on the ground (z={pos.z!r})')

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.positions])

    @property
    def ys(self) -> np.ndarray:
        return np.array([p.y for p in self.positions])

    @property
    def worst_case(self) -> bool:
        """Whether all users share one y-coordinate."""
        return len({p.y for p in self.positions}) == 1

    def subset(self, count: int) -> UserDrop:
        """The drop restricted to its first ``count`` users."""
        if not 1 <= count <= self.n:
            raise PreconditionError(f'Cannot restrict {self.n} users to {count}')
        return UserDrop(self.positions[:count], self.seed)

    def check(self, cfg: SystemConfig) -> None:
        """Raise :class:`PreconditionError` if a user leaves its interval."""
        if self.n > cfg.n:
            raise PreconditionError(f'{self.n} users but only {cfg.n} waveguides')
        tol = 1e-12 * max(1.0, cfg.n * cfg.d)
        for k, pos in enumerate(self.positions, start=1):
            low = k * cfg.d - 1.5 * cfg.d
            if not low - tol <= pos.x <= low + cfg.d + tol:
                raise PreconditionError(
                    f'User {k} at x={pos.x!r} outside [{low!r}, {low + cfg.d!r}]')
            if abs(pos.y) > cfg.length / 2 + tol:
                raise PreconditionError(
                    f'User {k} at y={pos.y!r} beyond the waveguide length')

def waveguide_x(i: int, cfg: SystemConfig) -> float:
    """x-coordinate of waveguide ``i`` (1-based)."""
    if not 1 <= i <= cfg.n:
        raise PreconditionError(f'Waveguide {i} not in range [1, {cfg.n}]')
    return (i - 1) * cfg.d

def nearest_waveguide(user: Point3, cfg: SystemConfig) -> int:
    """Index of the waveguide closest to ``user``; ties go to the lower."""
    # np.argmin returns the first of equal minima
    return int(np.argmin(np.abs(user.x - cfg.waveguide_xs))) + 1

def drop_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for one drop."""
    if seed < 0:
        raise PreconditionError(f'Seed {seed} must be non-negative')
    return np.random.Generator(np.random.Philox(seed))

def drop_seed(master: int, index: int) -> int:
    """Seed of drop ``index`` spawned from ``master``.

    The result depends only on the pair, never on which other drops were
    drawn or in which order.
    """
    if master < 0 or index < 0:
        raise PreconditionError(f'Seed {master} and index {index} must be non-negative')
    seq = np.random.SeedSequence(master, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])

def sample_users(cfg: SystemConfig, seed: int,
                 worst_case_y: bool = False) -> UserDrop:
    """Draw one user drop.

    User ``k`` is uniform on ``[kd - 3d/2, kd - d/2]`` in x. In y, all
    users share one value when ``worst_case_y`` is set and are drawn
    independently otherwise; either way y stays ``cfg.y_margin`` away
    from the waveguide ends.

    Args:
        cfg: The system configuration.
        seed: Non-negative seed; equal seeds give bitwise-equal drops.
        worst_case_y: Whether all users share one y-coordinate.

    Returns:
        The sampled :class:`UserDrop`.
    """
    rng = drop_rng(seed)
    low = np.arange(1, cfg.n + 1) * cfg.d - 1.5 * cfg.d
    xs = rng.uniform(low, low + cfg.d)
    y_low = -cfg.length / 2 + cfg.y_margin
    y_high = cfg.length / 2 - cfg.y_margin
    if y_low > y_high:
        raise PreconditionError(
            f'Waveguide length {cfg.length!r} leaves no room for the '
            f'{cfg.y_margin!r} m margin at both ends')
    if worst_case_y:
        ys = np.full(cfg.n, rng.uniform(y_low, y_high))
    else:
        ys = rng.uniform(y_low, y_high, size=cfg.n)
    return UserDrop(tuple(Point3(float(x), float(y)) for x, y in zip(xs, ys)), seed)

def fixed_users(cfg: SystemConfig, xs: Sequence[float],
                y: Union[float, Sequence[float]] = 0.0) -> UserDrop:
    """A deterministic drop at the given x-coordinates.

    A scalar ``y`` is shared by all users (the worst case).
    """
    ys: Iterable[float] = [y] * len(xs) if np.isscalar(y) else y
    drop = UserDrop(tuple(Point3(float(x), float(yy)) for x, yy in zip(xs, ys)))
    if drop.n != len(xs):
        raise PreconditionError('xs and y have different lengths')
    drop.check(cfg)
    return drop

def parse_config(text: str) -> Dict[str, str]:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise PreconditionError(f'Config line {lineno} is not key=value: {line!r}')
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONFIG_KEYS:
            raise PreconditionError(f'Unknown config key {key!r} on line {lineno}')
        values[key] = value
    return values

def load_config(path: Optional[PathLike] = None,
                overrides: Optional[Mapping[str, str]] = None,
                defaults: Optional[Mapping[str, str]] = None
                ) -> Tuple[SystemConfig, int]:
    """Read the config file (if any), apply overrides and return the seed too.

    Later sources win: built-in defaults, then ``defaults``, then the
    file, then ``overrides``.
    """
    values: Dict[str, str] = dict(defaults or {})
    if path is not None:
        values.update(parse_config(Path(path).read_text()))
        logger.debug('Read config from %s', path)
    for key, value in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise PreconditionError(f'Unknown config key {key!r}')
        # an explicit dBm override replaces an exact value from the file
        if key == 'pt_dbm':
            values.pop('pt_w', None)
        elif key == 'noise_dbm':
            values.pop('noise_w', None)
        values[key] = str(value)
    seed = DEFAULT_SEED
    if 'seed' in values:
        try:
            seed = int(values['seed'])
        except ValueError:
            raise PreconditionError(f'Seed {values["seed"]!r} is not an integer') from None
        if seed < 0:
            raise PreconditionError(f'Seed {seed} must be non-negative')
    return SystemConfig.from_mapping(values), seed
