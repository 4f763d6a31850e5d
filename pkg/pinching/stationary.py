"""Stationary-phase forms of the inter-user interference.

The average interference between two users of the distributed deployment
is approximated by λ³/(π²d⁶D)·T², where T combines the two endpoint
contributions of the neighbouring waveguide with the interior stationary
point of the user's own waveguide.
"""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import math

import numpy as np

from .channel import reduced_phase
from .errors import PreconditionError
from .model import SystemConfig

__all__ = [
    'TForm',
    'InterferenceTerm',
    'interference_prefactor',
    't_factor',
    't_phasor',
    't_squared_matrix',
    'avg_interference_approx',
    'f_stationary',
    'f_endpoint',
]

class TForm(Enum):
    """Which phase offset the T factor uses.

    Attributes:
        PRINTED: The two-cosine expression with the −π/4 offset, as it is
            usually quoted.
        CORRECTED: The −3π/4 offset that follows from the interior
            stationary point e^{−j(2πD/λ + π/4)} (see :func:`f_stationary`).
    """
    PRINTED = 'printed'
    CORRECTED = 'corrected'

    @property
    def offset(self) -> float:
        return math.pi / 4 if self is TForm.PRINTED else 3 * math.pi / 4

@dataclass(frozen=True)
class InterferenceTerm:
    """Approximate average interference of user ``k_from`` at ``k_to``.

    Attributes:
        t_value: The T factor.
        i_bar: λ³/(π²d⁶D)·T², in 1/m⁴.
        k_from: Interfering user.
        k_to: Victim user.
    """
    t_value: float
    i_bar: float
    k_from: int
    k_to: int

    def __post_init__(self) -> None:
        if abs(self.t_value) > 4 + 1e-12:
            raise PreconditionError(f'|T|={abs(self.t_value)!r} exceeds 4')
        if self.i_bar < 0:
            raise PreconditionError(f'Average interference {self.i_bar!r} is negative')

def interference_prefactor(cfg: SystemConfig) -> float:
    """λ³/(π²d⁶D)."""
    return cfg.wavelength ** 3 / (math.pi ** 2 * cfg.d ** 6 * cfg.height)

def _edge_phase(offset: float, cfg: SystemConfig) -> float:
    """2π/λ·(√(offset²d² + D²) − D), reduced."""
    rho = offset ** 2 * cfg.d ** 2
    excess = rho / (math.sqrt(rho + cfg.height ** 2) + cfg.height)
    return float(reduced_phase(excess, cfg.wavelength))

def _check_pair(k_from: int, k_to: int) -> int:
    if k_from == k_to:
        raise PreconditionError(f'T is undefined for a user with itself (k={k_from})')
    return k_from - k_to

def t_phasor(k_from: int, k_to: int, cfg: SystemConfig,
             form: TForm = TForm.PRINTED) -> complex:
    """Complex two-term phasor whose real part is :func:`t_factor`."""
    delta = _check_pair(k_from, k_to)
    total = 0j
    for sign in (1, -1):
        offset = delta + sign / 2
        psi = _edge_phase(offset, cfg) - form.offset
        total += sign * complex(math.cos(psi), -math.sin(psi)) / offset
    return total

def t_factor(k_from: int, k_to: int, cfg: SystemConfig,
             form: TForm = TForm.PRINTED) -> float:
    """T(k', k): cos(ψ₊)/(Δ+½) − cos(ψ₋)/(Δ−½) with Δ = k' − k.

    ψ± = 2π/λ·√((Δ±½)²d² + D²) − 2πD/λ − offset, the offset being chosen
    by ``form``. The default is the expression as quoted; the interference
    estimates below default to the corrected offset.
    """
    delta = _check_pair(k_from, k_to)
    value = 0.0
    for sign in (1, -1):
        offset = delta + sign / 2
        value += sign * math.cos(_edge_phase(offset, cfg) - form.offset) / offset
    return value

@lru_cache(maxsize=256)
def _t_squared(n: int, cfg: SystemConfig, form: TForm) -> np.ndarray:
    t_sq = np.zeros((n, n))
    for k in range(1, n + 1):
        for kk in range(1, n + 1):
            if k != kk:
                # ordered (k, k') for the interference of k' at user k
                t_sq[k - 1, kk - 1] = t_factor(k, kk, cfg, form) ** 2
    t_sq.setflags(write=False)
    return t_sq

def t_squared_matrix(n: int, cfg: SystemConfig,
                     form: TForm = TForm.CORRECTED) -> np.ndarray:
    """Read-only T² of the first ``n`` users, zero on the diagonal.

    Cached per geometry; the transmit and noise powers do not enter T.
    """
    if not 1 <= n <= cfg.n:
        raise PreconditionError(f'{n} users out of range for N={cfg.n}')
    return _t_squared(n, cfg.with_(p_t=1.0, noise_power=1.0), form)

def avg_interference_approx(k_from: int, k_to: int, cfg: SystemConfig,
                            form: TForm = TForm.CORRECTED) -> InterferenceTerm:
    """λ³/(π²d⁶D)·T² for the ordered pair.

    The corrected offset keeps the estimate within a factor of two of the
    quadrature average; the printed one undershoots it by almost three.
    """
    t = t_factor(k_from, k_to, cfg, form)
    return InterferenceTerm(t, interference_prefactor(cfg) * t ** 2, k_from, k_to)

def f_stationary(cfg: SystemConfig) -> complex:
    """Interior stationary-point value of the per-waveguide integral.

    √(λ/D)·e^{−j(2πD/λ + π/4)}: the quadratic phase −πx²/(λD) around the
    stationary point integrates to √(λD)·e^{−jπ/4}.
    """
    phase = float(reduced_phase(cfg.height, cfg.wavelength)) + math.pi / 4
    return math.sqrt(cfg.wavelength / cfg.height) * complex(math.cos(phase), -math.sin(phase))

def f_endpoint(k_prime: int, i: int, cfg: SystemConfig) -> complex:
    """Leading endpoint contributions of the integral for ``i != k_prime``."""
    delta = _check_pair(k_prime, i)
    total = 0j
    for sign in (1, -1):
        offset = delta + sign / 2
        distance = math.sqrt(offset ** 2 * cfg.d ** 2 + cfg.height ** 2)
        phase = float(reduced_phase(distance, cfg.wavelength))
        total += sign * complex(math.cos(phase), -math.sin(phase)) / offset
    return 1j * cfg.wavelength / (2 * math.pi * cfg.d) * total
