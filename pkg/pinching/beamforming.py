"""MRT and ZF beamformers and the uniform power allocation."""
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Optional

import numpy as np
from scipy import linalg

from .channel import ChannelMatrix
from .errors import DegenerateGeometryError, PreconditionError
from .model import SystemConfig

__all__ = [
    'MAX_CONDITION',
    'Scheme',
    'BeamformerSet',
    'PowerAllocation',
    'mrt',
    'zf',
    'beamformer',
    'uniform_power',
]

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
"""Largest condition number of H Hᴴ accepted by :func:`zf`."""

class Scheme(Enum):
    """Beamforming scheme.

    Attributes:
        MRT: Maximum ratio transmission.
        ZF: Zero forcing.
    """
    MRT = 'mrt'
    ZF = 'zf'

@dataclass(frozen=True)
class BeamformerSet:
    """One beamforming vector per user.

    Attributes:
        columns: Complex array whose column ``k - 1`` is w_k.
        scheme: How the vectors were built.
        alpha: ZF normalisation α; ``None`` for MRT.
    """
    columns: np.ndarray
    scheme: Scheme
    alpha: Optional[float] = None

    def __post_init__(self) -> None:
        columns = np.array(self.columns, dtype=complex)
        columns.setflags(write=False)
        object.__setattr__(self, 'columns', columns)

    @property
    def n_users(self) -> int:
        return self.columns.shape[1]

    def w(self, k: int) -> np.ndarray:
        """Beamformer of user ``k`` (1-based)."""
        return self.columns[:, k - 1]

    def norms_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.columns) ** 2, axis=0)

@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power of every user's stream, watts."""
    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float)
        if p.ndim != 1 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise PreconditionError(f'Invalid power allocation {p!r}')
        p.setflags(write=False)
        object.__setattr__(self, 'p', p)

    @property
    def total(self) -> float:
        return math.fsum(self.p)

def mrt(H: ChannelMatrix) -> BeamformerSet:
    """w_k = h_k*/||h_k||."""
    norms = np.sqrt(H.row_norms_sq())
    if np.any(norms == 0):
        k = int(np.argmin(norms)) + 1
        raise PreconditionError(f'User {k} has an all-zero channel')
    return BeamformerSet((H.entries.conj() / norms[:, None]).T, Scheme.MRT)

def zf(H: ChannelMatrix, max_condition: float = MAX_CONDITION) -> BeamformerSet:
    """Zero-forcing beamformers, normalised to a total squared norm of N.

    With the user channels as the rows of H, W = √α Hᴴ(HHᴴ)⁻¹ and
    α = N/tr((HHᴴ)⁻¹), so that h_kᵀw_{k'} = √α·δ_{kk'}.

    Raises:
        DegenerateGeometryError: HHᴴ is singular or its condition number
            exceeds ``max_condition``.
    """
    if H.n_users > H.n_waveguides:
        raise DegenerateGeometryError(
            f'{H.n_users} users cannot be separated by {H.n_waveguides} PAs')
    gram = H.gram()
    cond = np.linalg.cond(gram)
    if not cond <= max_condition:
        raise DegenerateGeometryError(
            f'Gram matrix condition number {cond:.3g} exceeds {max_condition:.3g}')
    # (HHᴴ)⁻¹H, whose conjugate transpose is Hᴴ(HHᴴ)⁻¹
    solved = linalg.cho_solve(linalg.cho_factor(gram), H.entries)
    unscaled = solved.conj().T
    # ||Hᴴ(HHᴴ)⁻¹||_F² = tr((HHᴴ)⁻¹)
    alpha = H.n_users / math.fsum(np.abs(unscaled.ravel()) ** 2)
    logger.debug('ZF: condition %.3g, alpha %.6g', cond, alpha)
    return BeamformerSet(math.sqrt(alpha) * unscaled, Scheme.ZF, alpha)

def beamformer(H: ChannelMatrix, scheme: Scheme) -> BeamformerSet:
    if scheme is Scheme.MRT:
        return mrt(H)
    if scheme is Scheme.ZF:
        return zf(H)
    raise PreconditionError(f'Unknown beamforming scheme {scheme!r}')

def uniform_power(cfg: SystemConfig) -> PowerAllocation:
    """P_t/N for every user."""
    return PowerAllocation(np.full(cfg.n, cfg.p_t / cfg.n))
