"""Brute-force references for the approximations.

Quadrature of the per-waveguide oscillatory integrals and threaded
Monte-Carlo averaging over user drops.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import cmath
import logging
import math
import os
from typing import Callable, List, Optional, Sequence, Union
import warnings

import numpy as np
import pandas as pd
from scipy import integrate

from .channel import reduced_phase
from .errors import ConvergenceError, PreconditionError
from .metrics import SeResult, interference_limited_se
from .model import SystemConfig, UserDrop, drop_seed, sample_users
from .stationary import TForm, avg_interference_approx, f_endpoint, f_stationary

__all__ = [
    'THREADS_ENV',
    'QuadratureScheme',
    'QuadratureSpec',
    'McEstimate',
    'f_integral_reference',
    'avg_interference_reference',
    'reference_coupling',
    'se_distributed_averaged',
    'resolve_threads',
    'mc_average',
    'oracle_report',
]

logger = logging.getLogger(__name__)

THREADS_ENV = 'PINCH_SE_THREADS'

Scalar = Union[float, np.ndarray]

class QuadratureScheme(Enum):
    """Quadrature rule for the reference integrals.

    Attributes:
        SIMPSON: Composite Simpson on a uniform grid, halving the step
            until two successive results agree.
        ADAPTIVE: Adaptive subdivision (QUADPACK) on the real and
            imaginary parts.
    """
    SIMPSON = 'simpson'
    ADAPTIVE = 'adaptive'

@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate the reference integrals.

    Attributes:
        max_step: Initial grid step, meters; ``None`` means λ/32.
        scheme: The quadrature rule.
        abs_tol: Absolute tolerance.
        rel_tol: Relative tolerance of the step-halving criterion.
        max_halvings: How many times the step may be halved.
    """
    max_step: Optional[float] = None
    scheme: QuadratureScheme = QuadratureScheme.SIMPSON
    abs_tol: float = 0.0
    rel_tol: float = 1e-6
    max_halvings: int = 8

    def step(self, cfg: SystemConfig) -> float:
        """The initial step for ``cfg``.

        Raises:
            PreconditionError: The step is above λ/16 and so cannot resolve
                the fastest phase oscillation to π/4 per step.
        """
        step = cfg.wavelength / 32 if self.max_step is None else self.max_step
        if not 0 < step <= cfg.wavelength / 16:
            raise PreconditionError(
                f'Quadrature step {step!r} m must be in (0, λ/16 = '
                f'{cfg.wavelength / 16!r}] m')
        return step

@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo mean of a per-drop metric.

    ``mean`` and ``stderr`` are floats for scalar metrics and arrays for
    vector metrics. ``values`` holds every drop's result in drop order.
    """
    mean: Scalar
    stderr: Scalar
    n: int
    values: np.ndarray

def _integrand(x: np.ndarray, center: float, cfg: SystemConfig) -> np.ndarray:
    """e^{−j2π(R − D)/λ}/R with R the distance to the waveguide at ``center``."""
    u = np.asarray(x, dtype=float) - center
    r = np.sqrt(u ** 2 + cfg.height ** 2)
    excess = u ** 2 / (r + cfg.height)
    return np.exp(-1j * reduced_phase(excess, cfg.wavelength)) / r

def _simpson(a: float, b: float, center: float, cfg: SystemConfig,
             spec: QuadratureSpec) -> complex:
    intervals = max(2, math.ceil((b - a) / spec.step(cfg)))
    intervals += intervals % 2

    def rule(count: int) -> complex:
        x = np.linspace(a, b, count + 1)
        y = _integrand(x, center, cfg)
        return complex(integrate.simpson(y.real, x=x), integrate.simpson(y.imag, x=x))

    previous = rule(intervals)
    for _ in range(spec.max_halvings):
        intervals *= 2
        current = rule(intervals)
        change = abs(current - previous)
        if change <= max(spec.abs_tol, spec.rel_tol * abs(current)):
            logger.debug('Simpson converged with %d intervals (change %.3g)',
                         intervals, change)
            return current
        previous = current
    raise ConvergenceError(
        f'Simpson quadrature on [{a!r}, {b!r}] did not reach rel_tol '
        f'{spec.rel_tol!r} after {spec.max_halvings} halvings (last change {change:.3g})')

def _adaptive(a: float, b: float, center: float, cfg: SystemConfig,
              spec: QuadratureSpec) -> complex:
    limit = max(50, 10 * math.ceil((b - a) / cfg.wavelength))
    # absolute floor relative to the integrand's scale, for near-zero parts
    epsabs = max(spec.abs_tol, 1e-3 * spec.rel_tol * (b - a) / cfg.height)
    parts = []
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        for part in (np.real, np.imag):
            try:
                value, _ = integrate.quad(
                    lambda x: float(part(_integrand(x, center, cfg))), a, b,
                    epsabs=epsabs, epsrel=spec.rel_tol, limit=limit)
            except integrate.IntegrationWarning as exc:
                raise ConvergenceError(
                    f'Adaptive quadrature on [{a!r}, {b!r}] failed: {exc}') from None
            parts.append(value)
    return complex(parts[0], parts[1])

@lru_cache(maxsize=4096)
def _f_reference(k_prime: int, i: int, cfg: SystemConfig,
                 spec: QuadratureSpec) -> complex:
    a = k_prime * cfg.d - 1.5 * cfg.d
    b = k_prime * cfg.d - 0.5 * cfg.d
    center = (i - 1) * cfg.d
    if spec.scheme is QuadratureScheme.SIMPSON:
        value = _simpson(a, b, center, cfg, spec)
    else:
        value = _adaptive(a, b, center, cfg, spec)
    common = float(reduced_phase(cfg.height, cfg.wavelength))
    return value * cmath.exp(-1j * common)

def f_integral_reference(k_prime: int, i: int, cfg: SystemConfig,
                         spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """∫ e^{−j2π/λ·R(x)}/R(x) dx over user ``k_prime``'s interval.

    R(x) = √((x − (i−1)d)² + D²) is the distance to waveguide ``i``.

    Raises:
        ConvergenceError: The quadrature did not converge.
    """
    if k_prime < 1 or i < 1:
        raise PreconditionError(f'Indices k\'={k_prime}, i={i} must be >= 1')
    return _f_reference(k_prime, i, cfg, spec)

def avg_interference_reference(k_from: int, k_to: int, cfg: SystemConfig,
                               spec: QuadratureSpec = QuadratureSpec(),
                               waveguides: Optional[Sequence[int]] = None) -> float:
    """(1/d⁴)·|Σ_i f(k_from, i)·f*(k_to, i)|² over all (or the given) waveguides."""
    if k_from == k_to:
        raise PreconditionError(f'Interference of user {k_from} with itself')
    indices = range(1, cfg.n + 1) if waveguides is None else waveguides
    total = sum(f_integral_reference(k_from, i, cfg, spec)
                * f_integral_reference(k_to, i, cfg, spec).conjugate()
                for i in indices)
    return abs(total) ** 2 / cfg.d ** 4

@lru_cache(maxsize=64)
def _reference_coupling(cfg: SystemConfig, spec: QuadratureSpec) -> np.ndarray:
    coupling = np.zeros((cfg.n, cfg.n))
    for k in range(1, cfg.n + 1):
        for kk in range(1, cfg.n + 1):
            if k != kk:
                coupling[k - 1, kk - 1] = avg_interference_reference(kk, k, cfg, spec)
    coupling.setflags(write=False)
    return coupling

def reference_coupling(cfg: SystemConfig,
                       spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Quadrature-averaged interference of every ordered pair, in 1/m⁴.

    Row ``k`` is the victim, column ``k'`` the interferer. The matrix is
    read-only and cached per geometry.
    """
    return _reference_coupling(cfg.with_(p_t=1.0, noise_power=1.0), spec)

def se_distributed_averaged(drop: UserDrop, cfg: SystemConfig,
                            spec: QuadratureSpec = QuadratureSpec()) -> SeResult:
    """Distributed MRT SE with the interference averaged over user positions.

    Each user keeps its exact channel gain while the interference of every
    pair is replaced by its quadrature average, which is the quantity the
    stationary-phase form approximates.
    """
    if drop.n != cfg.n:
        raise PreconditionError(f'Drop has {drop.n} users, config has {cfg.n}')
    return interference_limited_se(drop, cfg, cfg.n, 1, reference_coupling(cfg, spec),
                                   'simulation')

def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: ``threads`` (or the CPU count) capped by the environment."""
    cap = os.environ.get(THREADS_ENV)
    count = threads if threads is not None else (os.cpu_count() or 1)
    if cap:
        try:
            count = min(count, int(cap))
        except ValueError:
            raise PreconditionError(f'{THREADS_ENV}={cap!r} is not an integer') from None
    return max(1, count)

def _fsum_columns(values: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(column) for column in values.T])

def mc_average(scenario: Callable[[UserDrop], Scalar], cfg: SystemConfig,
               n_drops: int, seed: int, worst_case_y: bool = True,
               threads: Optional[int] = None) -> McEstimate:
    """Average ``scenario`` over ``n_drops`` sampled drops.

    Drop ``j`` is sampled from :func:`~pinching.model.drop_seed` of
    ``(seed, j)``. Results are gathered by drop index and summed with
    :func:`math.fsum`, so the estimate does not depend on the worker count
    or on the order in which drops finish.

    Args:
        scenario: Metric of one drop, a scalar or a 1D array.
        cfg: The configuration the drops are sampled for.
        n_drops: Number of drops.
        seed: Master seed.
        worst_case_y: Whether users in a drop share one y-coordinate.
        threads: Worker threads; see :func:`resolve_threads`.
    """
    if n_drops < 1:
        raise PreconditionError(f'n_drops={n_drops} must be >= 1')

    def evaluate(j: int) -> np.ndarray:
        drop = sample_users(cfg, drop_seed(seed, j), worst_case_y)
        return np.atleast_1d(np.asarray(scenario(drop), dtype=float))

    workers = min(resolve_threads(threads), n_drops)
    if workers == 1:
        results = [evaluate(j) for j in range(n_drops)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, range(n_drops)))
    values = np.stack(results)
    mean = _fsum_columns(values) / n_drops
    if n_drops > 1:
        spread = _fsum_columns((values - mean) ** 2) / (n_drops - 1)
        stderr = np.sqrt(spread / n_drops)
    else:
        stderr = np.zeros_like(mean)
    if values.shape[1] == 1:
        return McEstimate(float(mean[0]), float(stderr[0]), n_drops, values[:, 0])
    return McEstimate(mean, stderr, n_drops, values)

def _phase_error(a: complex, b: complex) -> float:
    return abs(cmath.phase(a / b))

def oracle_report(cfg: SystemConfig, spec: QuadratureSpec = QuadratureSpec(),
                  ds: Sequence[float] = (1.0, 2.0, 4.0),
                  heights: Sequence[float] = (3.0, 5.0, 10.0)) -> pd.DataFrame:
    """Audit of the stationary-phase forms against quadrature.

    For every (d, D) the report has a ``stationary`` row (own waveguide),
    ``endpoint`` rows (first and second neighbour) and ``interference``
    rows for adjacent users, the latter against both T forms.
    """
    rows: List[dict] = []
    for d in ds:
        for height in heights:
            sub = cfg.with_(n=max(cfg.n, 3), d=d, height=height)
            quad = f_integral_reference(1, 1, sub, spec)
            approx = f_stationary(sub)
            printed = approx * cmath.exp(1j * math.pi / 2)
            rows.append({
                'kind': 'stationary', 'd': d, 'D': height, 'k_from': 1, 'k_to': 1,
                'quadrature': abs(quad), 'approximation': abs(approx),
                'ratio': abs(quad) / abs(approx),
                'phase_error': _phase_error(quad, approx),
                'printed_phase_error': _phase_error(quad, printed),
            })
            for k_prime in (2, 3):
                quad = f_integral_reference(k_prime, 1, sub, spec)
                approx = f_endpoint(k_prime, 1, sub)
                rows.append({
                    'kind': 'endpoint', 'd': d, 'D': height, 'k_from': k_prime, 'k_to': 1,
                    'quadrature': abs(quad), 'approximation': abs(approx),
                    'ratio': abs(quad) / abs(approx),
                    'phase_error': _phase_error(quad, approx),
                    'printed_phase_error': math.nan,
                })
            reference = avg_interference_reference(2, 1, sub, spec)
            for form in TForm:
                approx_i = avg_interference_approx(2, 1, sub, form).i_bar
                rows.append({
                    'kind': f'interference-{form.value}', 'd': d, 'D': height,
                    'k_from': 2, 'k_to': 1, 'quadrature': reference,
                    'approximation': approx_i,
                    'ratio': approx_i / reference if reference else math.inf,
                    'phase_error': math.nan, 'printed_phase_error': math.nan,
                })
    return pd.DataFrame(rows)
